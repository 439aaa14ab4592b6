"""Phase matching, SHG, Fabry-Perot loss and SPDC efficiency."""
from .fploss import FpLoss, LossExtractionError, contrast_to_loss, extract_loss_fp, synthesize_fp
from .phasematch import (
    ModeSet,
    PhaseMatchError,
    PhaseMatchPoint,
    TemperatureSlope,
    TuningCurve,
    degeneracy,
    degenerate_wavelength,
    idler_wavelength,
    mode_curves,
    phase_mismatch,
    pm_center_vs_temperature,
    shg_mismatch,
    tuning_curves,
)
from .shg import (
    ShgFit,
    ShgFitError,
    ShgParams,
    fit_shg,
    fringe_period,
    measured_fwhm,
    read_spectrum_csv,
    shg_bandwidth,
    shg_spectrum,
    write_spectrum_csv,
)
from .spdc import bandwidth_from_nm, spdc_pair_probability

__all__ = [
    "FpLoss", "LossExtractionError", "contrast_to_loss", "extract_loss_fp", "synthesize_fp",
    "ModeSet", "PhaseMatchError", "PhaseMatchPoint", "TemperatureSlope", "TuningCurve",
    "degeneracy", "degenerate_wavelength", "idler_wavelength", "mode_curves", "phase_mismatch",
    "pm_center_vs_temperature", "shg_mismatch", "tuning_curves",
    "ShgFit", "ShgFitError", "ShgParams", "fit_shg", "fringe_period", "measured_fwhm",
    "read_spectrum_csv", "shg_bandwidth", "shg_spectrum", "write_spectrum_csv",
    "bandwidth_from_nm", "spdc_pair_probability",
]
