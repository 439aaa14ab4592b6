"""Command-line front end: ``pairforge <command> [options]``.

Exit codes: 0 success, 2 usage error, 3 invalid input/config, 4 solver failure.
Errors are reported as one line on stderr:
``pairforge: error code=<n> kind=<ExceptionName> message=<text>``.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import secrets
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, counting, lasermodel, layerstack, materials, modesolver
from .nonlinear import fploss, phasematch, shg
from .units import celsius_to_kelvin

EXIT_USAGE, EXIT_INPUT, EXIT_SOLVER = 2, 3, 4

INPUT_ERRORS = (layerstack.SchemaError, materials.DispersionRangeError, ValueError, FileNotFoundError,
                json.JSONDecodeError, KeyError, TypeError)
SOLVER_ERRORS = (phasematch.PhaseMatchError, modesolver.ModeTrackingError, shg.ShgFitError,
                 fploss.LossExtractionError, lasermodel.NoCrossingError, lasermodel.BelowThresholdError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- run manifest ----------------------------------------------------------------

@dataclasses.dataclass
class RunManifest:
    command: str
    argv: list
    config: dict
    input_hashes: dict
    seed: int | None
    version: str
    outputs: list
    wall_time_s: float

    def write(self, path):
        with open(path, "w") as fh:
            json.dump(dataclasses.asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


class _Run:
    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.inputs = {}
        self.outputs = []
        self.config = {}
        self.seed = None
        self.t0 = time.perf_counter()

    def input(self, path):
        path = str(path)
        self.inputs[path] = _sha256(path)
        return path

    def output(self, path):
        self.outputs.append(str(path))
        return path

    def finish(self):
        if self.args.out is None and self.args.manifest is None:
            return
        path = self.args.manifest or f"{self.args.out}.manifest.json"
        RunManifest(self.args.command, self.argv, self.config, self.inputs, self.seed, __version__,
                    self.outputs, round(time.perf_counter() - self.t0, 6)).write(path)


# -- helpers -----------------------------------------------------------------------

def _table(run):
    if run.args.data:
        return materials.load_table(run.input(run.args.data))
    p = materials.data_path(materials.DEFAULT_TABLE)
    run.input(p)
    return materials.load_table(p)


def _device_doc(run):
    path = run.args.device or materials.data_path("paper_device.json")
    run.input(path)
    return layerstack.read_device_doc(path)


def _stack(run, table):
    doc = _device_doc(run)
    stack = layerstack.parse_stack(doc, table)
    if run.args.temp_C is not None:
        stack = stack.at_temperature(celsius_to_kelvin(run.args.temp_C))
    run.config["device"] = layerstack.stack_to_dict(stack)
    return stack, doc


def _emit(run, text, suffix=None):
    """Write to --out (optionally with a suffix) or stdout."""
    if run.args.out is None:
        sys.stdout.write(text)
        return None
    path = run.args.out if suffix is None else f"{run.args.out}{suffix}"
    with open(path, "w") as fh:
        fh.write(text)
    return run.output(path)


def _dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o).__name__}")


def _out_path(run, default_suffix):
    if run.args.out is None:
        raise ValueError(f"this command needs --out (e.g. result{default_suffix})")
    return run.output(run.args.out)


# -- commands ------------------------------------------------------------------------

def cmd_modes(run):
    a = run.args
    table = _table(run)
    stack, _ = _stack(run, table)
    pols = ["TE", "TM"] if a.pol == "both" else [a.pol]
    modes = []
    for pol in pols:
        modes += modesolver.find_modes(stack, a.wavelength, pol, table, lossy=a.lossy)
    run.config.update(wavelength_nm=a.wavelength, polarizations=pols, lossy=a.lossy)
    if a.format == "json":
        if a.out is None:
            raise ValueError("JSON profile export needs --out")
        modesolver.export_profiles(modes, run.output(a.out))
        return 0
    lines = ["polarization,family,order,wavelength_nm,n_eff_re,n_eff_im,n_g,alpha_cm1,confinement,peak_depth_nm"]
    for m in modes:
        lines.append(f"{m.polarization},{m.family},{m.order},{m.wavelength:.4f},{m.n_eff.real:.10f},"
                     f"{m.n_eff.imag:.6e},{m.n_g:.8f},{m.alpha:.6e},{m.confinement:.6f},{m.peak_depth:.2f}")
    _emit(run, "\n".join(lines) + "\n")
    return 0


def _curves(run, stack, table, pump_range, fundamental_range=None):
    return phasematch.mode_curves(stack, stack.temperature_K, pump_range, fundamental_range, table=table,
                                  pump_step=run.args.pump_step, fundamental_step=run.args.fundamental_step)


def cmd_tune(run):
    a = run.args
    table = _table(run)
    stack, _ = _stack(run, table)
    lo, hi = a.pump_range
    hw = phasematch.SEARCH_HALF_WIDTH
    curves = _curves(run, stack, table, (lo - 1.0, hi + 1.0), (2 * lo - hw, 2 * hi + hw))
    pumps = np.linspace(lo, hi, a.points)
    tc = phasematch.tuning_curves(curves, pumps)
    run.config.update(pump_range_nm=[lo, hi], points=a.points, temperature_K=stack.temperature_K)
    if a.format == "json":
        doc = {"temperature_K": tc.temperature, "degeneracy_pump_nm": tc.degeneracy_pump,
               "points": [dataclasses.asdict(p) for p in tc.points], "skipped_pump_nm": list(tc.skipped)}
        _emit(run, _dumps(doc))
    else:
        _emit(run, tc.csv_text())
    if tc.skipped:
        print(f"skipped {len(tc.skipped)} pump wavelengths in [{min(tc.skipped):.4f}, {max(tc.skipped):.4f}] nm: "
              "no phase-matching root in search window", file=sys.stderr)
    print(f"degenerate pair wavelength {2 * tc.degeneracy_pump:.4f} nm at {tc.temperature:.2f} K", file=sys.stderr)
    return 0


def _shg_params(run, stack):
    a = run.args
    f = stack.facets
    return shg.ShgParams(a.eta, 1570.0, 0.6, stack.ridge.length_cm, a.power_W,
                         (f.R_te00, f.R_tm00, f.R_teb), tuple(a.alpha), (3.23, 3.23, 4.0), tuple(a.phases))


def cmd_shg(run):
    a = run.args
    table = _table(run)
    stack, _ = _stack(run, table)
    curves = _curves(run, stack, table, tuple(a.pump_range))
    center, fwhm = shg.shg_bandwidth(curves, stack.ridge.length_cm)
    lam = np.arange(center - a.span / 2, center + a.span / 2 + 1e-12, a.step)
    params = _shg_params(run, stack)
    p = shg.shg_spectrum(params, lam, curves)
    run.config.update(params=dataclasses.asdict(params), span_nm=a.span, step_nm=a.step)
    summary = {"center_nm": center, "fwhm_nm": fwhm, "sh_center_nm": center / 2,
               "temperature_K": stack.temperature_K, "length_cm": stack.ridge.length_cm}
    if a.format == "json":
        _emit(run, _dumps({**summary, "lambda_nm": lam, "P_sh_W": p}))
    elif a.out is None:
        sys.stdout.write("lambda_nm,P_sh_norm,P_sh_W\n")
        peak = p.max() if p.max() > 0 else 1.0
        for l, v in zip(lam, p):
            sys.stdout.write(f"{l:.6f},{v / peak:.9e},{v:.9e}\n")
    else:
        shg.write_spectrum_csv(run.output(a.out), lam, p)
        _emit(run, _dumps(summary), ".summary.json")
    print(f"SHG peak {center:.4f} nm (SH {center / 2:.4f} nm), envelope FWHM {fwhm:.4f} nm", file=sys.stderr)
    return 0


def cmd_fitshg(run):
    a = run.args
    lam, p = shg.read_spectrum_csv(run.input(a.spectrum))
    fit = shg.fit_shg(lam, p, R=tuple(a.R), alpha_cm1=tuple(a.alpha), n_g=tuple(a.ng),
                      length_cm=a.length_cm, power_W=a.power_W)
    run.config.update(R=a.R, alpha_cm1=a.alpha, n_g=a.ng, length_cm=a.length_cm, power_W=a.power_W)
    _emit(run, fit.to_json())
    return 0


def cmd_loss(run):
    a = run.args
    if a.synthesize is not None:
        lam = np.arange(a.range[0], a.range[1], a.step)
        t = fploss.synthesize_fp(lam, a.synthesize, a.R, a.length_cm, n_eff=a.n_eff)
        run.config.update(synthesize_alpha_cm1=a.synthesize, R=a.R, length_cm=a.length_cm)
        _emit(run, "lambda_nm,intensity\n" + "".join(f"{l:.6f},{v:.12e}\n" for l, v in zip(lam, t)))
        return 0
    if a.spectrum is None:
        raise ValueError("loss needs --spectrum or --synthesize")
    lam, y = shg.read_spectrum_csv(run.input(a.spectrum))
    res = fploss.extract_loss_fp(lam, y, a.R, a.length_cm)
    run.config.update(R=a.R, length_cm=a.length_cm)
    _emit(run, _dumps({"alpha_cm1": res.alpha_cm1, "std_cm1": res.std_cm1, "n_fringes": res.n_fringes,
                       "R": res.R, "length_cm": res.length_cm}))
    return 0


def cmd_operate(run):
    a = run.args
    table = _table(run)
    stack, doc = _stack(run, table)
    if "diode" not in doc:
        raise ValueError("device file has no 'diode' section")
    diode = lasermodel.DiodeParams.from_dict(doc["diode"])
    temps = celsius_to_kelvin(np.arange(a.pm_temps_C[0], a.pm_temps_C[1] + 1e-9, a.pm_step_C))
    slope = phasematch.pm_center_vs_temperature(stack, temps)
    t_ref = float(np.mean(slope.temperatures))
    fwhm = a.fwhm_nm
    win = lasermodel.operating_window(diode, slope.slope, slope.center_at(t_ref), t_ref, fwhm)
    sweep_T = celsius_to_kelvin(np.arange(a.sweep_C[0], a.sweep_C[1] + 1e-9, a.sweep_C[2]))
    sweep = lasermodel.window_sweep(diode, sweep_T, slope.slope, slope.center_at(t_ref), t_ref, fwhm, a.current)
    extra = {"pm_slope_nm_per_K": slope.slope, "pm_intercept_nm": slope.intercept,
             "laser_slope_nm_per_K": diode.wavelength_slope_nm_per_K, "fwhm_nm": fwhm,
             "pm_temperatures_K": list(slope.temperatures), "pm_centers_nm": list(slope.centers)}
    if a.temp_C is not None:
        op = lasermodel.operating_point(diode, celsius_to_kelvin(a.temp_C), a.current, slope.slope,
                                        slope.center_at(t_ref), t_ref, fwhm)
        extra["operating_point"] = dataclasses.asdict(op)
    run.config.update(diode=diode.to_dict(), fwhm_nm=fwhm)
    if a.out is None:
        sys.stdout.write(_dumps(lasermodel.write_window_report(win, sweep, extra=extra)))
    else:
        lasermodel.write_window_report(win, sweep, csv_path=run.output(a.out),
                                       json_path=run.output(f"{a.out}.window.json"), extra=extra)
    return 0


def _seed(run):
    if run.args.seed is None:
        run.args.seed = secrets.randbelow(2**31)
        print(f"seed={run.args.seed}", file=sys.stderr)
    run.seed = run.args.seed
    return run.args.seed


def cmd_coincide(run):
    a = run.args
    path = a.config or materials.data_path("fig4.json")
    cfg = counting.load_config(run.input(path))
    cfg = dataclasses.replace(cfg, seed=_seed(run))
    if a.gates is not None:
        cfg = dataclasses.replace(cfg, n_gates=a.gates)
    h = counting.simulate_coincidences(cfg, threads=a.threads)
    run.config.update(experiment=cfg.to_dict())
    out = _out_path(run, ".csv")
    h.to_csv(out)
    run.output(counting.sidecar_path(out))
    return 0


def cmd_analyze(run):
    a = run.args
    h = counting.CoincidenceHistogram.from_csv(run.input(a.histogram))
    res = counting.analyze_histogram(h)
    doc = res.to_dict()
    doc["werner"] = dataclasses.asdict(counting.werner_fidelity(res.snr)) if np.isfinite(res.snr) and res.snr >= 0 else None
    _emit(run, _dumps(doc))
    return 0


def cmd_fidelity(run):
    w = counting.werner_fidelity(run.args.snr)
    if run.args.format == "json":
        _emit(run, _dumps(dataclasses.asdict(w)))
    else:
        _emit(run, f"SNR = {w.snr:g}\nP = {w.P:.5f}\nF = {w.fidelity:.5f}\n")
    return 0


# -- parser --------------------------------------------------------------------------

def build_parser():
    common = _Parser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--device", help="device JSON (default: packaged reference device)")
    g.add_argument("--data", help="dispersion coefficient table (overrides PAIRFORGE_DATA)")
    g.add_argument("--temp-C", dest="temp_C", type=float, help="operating temperature [deg C]")
    g.add_argument("--seed", type=int, help="random seed (chosen and printed when absent)")
    g.add_argument("--threads", type=int, default=1, help="worker threads")
    g.add_argument("--out", help="output file (default: stdout where possible)")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--manifest", help="run-manifest path (default: <out>.manifest.json)")

    p = _Parser(prog="pairforge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"pairforge {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("modes", parents=[common], help="guided and Bragg modes at one wavelength")
    s.add_argument("--wavelength", type=float, default=785.0, help="[nm]")
    s.add_argument("--pol", choices=("TE", "TM", "both"), default="both")
    s.add_argument("--lossy", action="store_true", help="include doping losses")
    s.set_defaults(func=cmd_modes)

    def curve_opts(s, pump=(775.0, 795.0)):
        s.add_argument("--pump-step", type=float, default=1.0, help="pump dispersion grid step [nm]")
        s.add_argument("--fundamental-step", type=float, default=5.0, help="signal/idler grid step [nm]")
        s.add_argument("--pump-range", type=float, nargs=2, default=list(pump), metavar=("LO", "HI"))

    s = sub.add_parser("tune", parents=[common], help="type-II tuning curves")
    curve_opts(s, (780.5, 783.5))
    s.add_argument("--points", type=int, default=31, help="pump wavelengths across the range")
    s.set_defaults(func=cmd_tune)

    s = sub.add_parser("shg", parents=[common], help="simulated SHG spectrum")
    curve_opts(s)
    s.add_argument("--eta", type=float, default=35.0, help="normalized efficiency [%%/(W cm^2)]")
    s.add_argument("--power-W", dest="power_W", type=float, default=1.0, help="fundamental power [W]")
    s.add_argument("--alpha", type=float, nargs=3, default=[2.0, 2.0, 2.0], metavar=("TE", "TM", "TEB"),
                   help="propagation losses [cm^-1]")
    s.add_argument("--phases", type=float, nargs=3, default=[0.0, 0.0, 0.0], metavar=("TE", "TM", "TEB"))
    s.add_argument("--span", type=float, default=4.0, help="fundamental span [nm]")
    s.add_argument("--step", type=float, default=0.002, help="fundamental step [nm]")
    s.set_defaults(func=cmd_shg)

    s = sub.add_parser("fitshg", parents=[common], help="fit a measured SHG spectrum")
    s.add_argument("--spectrum", required=True, help="CSV (lambda_nm, intensity)")
    s.add_argument("--R", type=float, nargs=3, default=[0.27, 0.25, 0.79], metavar=("TE", "TM", "TEB"))
    s.add_argument("--alpha", type=float, nargs=3, default=[2.0, 2.0, 2.0], metavar=("TE", "TM", "TEB"))
    s.add_argument("--ng", type=float, nargs=3, default=[3.23, 3.23, 4.0], metavar=("TE", "TM", "TEB"))
    s.add_argument("--length-cm", dest="length_cm", type=float, default=0.2)
    s.add_argument("--power-W", dest="power_W", type=float, default=1.0)
    s.set_defaults(func=cmd_fitshg)

    s = sub.add_parser("loss", parents=[common], help="Fabry-Perot loss extraction")
    s.add_argument("--spectrum", help="CSV (lambda_nm, intensity)")
    s.add_argument("--R", type=float, default=0.27, help="facet reflectivity")
    s.add_argument("--length-cm", dest="length_cm", type=float, default=0.2)
    s.add_argument("--synthesize", type=float, metavar="ALPHA", help="write a synthetic spectrum instead")
    s.add_argument("--range", type=float, nargs=2, default=[1565.0, 1567.0], metavar=("LO", "HI"))
    s.add_argument("--step", type=float, default=0.0005)
    s.add_argument("--n-eff", dest="n_eff", type=float, default=3.2)
    s.set_defaults(func=cmd_loss)

    s = sub.add_parser("operate", parents=[common], help="laser / phase-matching operating window")
    s.add_argument("--current", type=float, default=0.7, help="drive current [A]")
    s.add_argument("--fwhm-nm", dest="fwhm_nm", type=float, default=0.35,
                   help="phase-matching acceptance on the pump axis [nm]")
    s.add_argument("--pm-temps-C", dest="pm_temps_C", type=float, nargs=2, default=[15.0, 40.0])
    s.add_argument("--pm-step-C", dest="pm_step_C", type=float, default=5.0)
    s.add_argument("--sweep-C", dest="sweep_C", type=float, nargs=3, default=[15.0, 40.0, 0.5],
                   metavar=("LO", "HI", "STEP"))
    s.set_defaults(func=cmd_operate)

    s = sub.add_parser("coincide", parents=[common], help="Monte-Carlo coincidence histogram")
    s.add_argument("--config", help="experiment JSON (default: packaged fig4.json)")
    s.add_argument("--gates", type=int, help="override the number of gates")
    s.set_defaults(func=cmd_coincide)

    s = sub.add_parser("analyze", parents=[common], help="analyze a coincidence histogram")
    s.add_argument("--histogram", required=True, help="CSV (bin_start_s, count) with optional JSON sidecar")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("fidelity", parents=[common], help="Werner-state fidelity from SNR")
    s.add_argument("--snr", type=float, required=True)
    s.set_defaults(func=cmd_fidelity)
    return p


def _fail(code, err):
    msg = " ".join(str(err).split())
    print(f"pairforge: error code={code} kind={type(err).__name__} message={msg}", file=sys.stderr)
    return code


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as err:
        return _fail(EXIT_USAGE, err)
    if args.data:
        os.environ[materials.DATA_ENV] = args.data
    if args.threads < 1:
        return _fail(EXIT_USAGE, UsageError("--threads must be >= 1"))
    run = _Run(args, argv)
    try:
        code = args.func(run)
    except SOLVER_ERRORS as err:
        return _fail(EXIT_SOLVER, err)
    except INPUT_ERRORS as err:
        return _fail(EXIT_INPUT, err)
    run.finish()
    return code


if __name__ == "__main__":
    sys.exit(main())
