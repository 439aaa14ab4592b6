"""Monte-Carlo of the gated coincidence experiment, histogram analysis and Werner fidelity.

Each gate draws photon pairs and noise photons as independent Poisson
processes.  By Poisson thinning, pairs split into three independent groups:
detected on both arms, only on arm 1, only on arm 2.  Only the earliest
click of each arm counts (gated detectors are not photon-number resolving),
so each group contributes the minimum of its uniformly distributed arrival
times, sampled directly as ``start + span * (1 - U**(1/n))``.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

CHUNK_GATES = 1 << 16


@dataclass(frozen=True)
class ExperimentConfig:
    """Gated two-detector coincidence experiment (times in s, probabilities per gate)."""

    pulse_s: float = 60e-9
    repetition_Hz: float = 1e4
    acquisition_s: float = 1200.0
    pairs_per_pulse: float = 7.35
    noise_per_pulse: tuple = (0.0, 0.0)  # photons reaching each detector per pulse
    transmission: tuple = (1.0, 1.0)
    detector_efficiency: float = 0.2
    gate_s: float = 50e-9
    gate_offset_s: float = 5e-9  # gate opening after the pulse starts
    dark_probability: tuple = (0.0, 0.0)
    bin_s: float = 162e-12
    jitter_s: float = 0.0  # Gaussian rms per detector
    seed: int = 0
    n_gates: int | None = None  # default: repetition rate x acquisition time

    def __post_init__(self):
        object.__setattr__(self, "noise_per_pulse", tuple(float(v) for v in self.noise_per_pulse))
        object.__setattr__(self, "transmission", tuple(float(v) for v in self.transmission))
        object.__setattr__(self, "dark_probability", tuple(float(v) for v in self.dark_probability))
        for name in ("pulse_s", "repetition_Hz", "acquisition_s", "gate_s", "bin_s"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.pairs_per_pulse < 0 or min(self.noise_per_pulse) < 0 or self.jitter_s < 0:
            raise ValueError("rates and jitter must be non-negative")
        for name in ("transmission", "dark_probability"):
            v = getattr(self, name)
            if len(v) != 2 or not all(0.0 <= x <= 1.0 for x in v):
                raise ValueError(f"{name} must be two probabilities in [0, 1]")
        if len(self.noise_per_pulse) != 2:
            raise ValueError("noise_per_pulse needs one value per arm")
        if not 0.0 <= self.detector_efficiency <= 1.0:
            raise ValueError("detector_efficiency must lie in [0, 1]")
        if self.overlap_s <= 0:
            raise ValueError("gate does not overlap the optical pulse")
        if self.n_gates is not None and self.n_gates < 0:
            raise ValueError("n_gates must be non-negative")

    @property
    def total_gates(self):
        return int(self.n_gates if self.n_gates is not None else round(self.repetition_Hz * self.acquisition_s))

    @property
    def overlap(self):
        """(start, end) of the pulse/gate overlap, relative to the gate opening."""
        start = max(0.0, -self.gate_offset_s)
        end = min(self.gate_s, self.pulse_s - self.gate_offset_s)
        return start, end

    @property
    def overlap_s(self):
        s, e = self.overlap
        return e - s

    @property
    def in_gate_fraction(self):
        return self.overlap_s / self.pulse_s

    def arm_efficiency(self, arm):
        return self.transmission[arm] * self.detector_efficiency

    def singles_probability(self, arm):
        """Probability that arm `arm` clicks in a gate."""
        f = self.in_gate_fraction
        lam = f * (self.pairs_per_pulse + self.noise_per_pulse[arm]) * self.arm_efficiency(arm)
        return 1.0 - math.exp(-lam) * (1.0 - self.dark_probability[arm])

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, doc):
        names = {f.name for f in fields(cls)}
        unknown = set(doc) - names
        if unknown:
            raise ValueError(f"unknown experiment config keys: {sorted(unknown)}")
        return cls(**doc)


def load_config(path):
    with open(path) as fh:
        doc = json.load(fh)
    doc.pop("notes", None)
    doc.pop("calibration", None)
    return ExperimentConfig.from_dict(doc)


@dataclass(frozen=True, eq=False)
class CoincidenceHistogram:
    edges_s: np.ndarray
    counts: np.ndarray
    total_gates: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.edges_s) != len(self.counts) + 1:
            raise ValueError("need one more edge than bins")
        if np.any(np.asarray(self.counts) < 0):
            raise ValueError("counts must be non-negative")

    @property
    def bin_s(self):
        return float(self.edges_s[1] - self.edges_s[0])

    @property
    def centers_s(self):
        return 0.5 * (self.edges_s[:-1] + self.edges_s[1:])

    @property
    def total(self):
        return int(np.sum(self.counts))

    def to_csv(self, path):
        """CSV (bin_start_s, count) plus ``<path>.json`` metadata sidecar."""
        path = Path(path)
        with open(path, "w", newline="") as fh:
            fh.write("bin_start_s,count\n")
            for e, c in zip(self.edges_s[:-1], self.counts):
                fh.write(f"{e:.6e},{int(c)}\n")
        meta = {"bin_s": self.bin_s, "n_bins": int(len(self.counts)), "total_gates": int(self.total_gates),
                "last_edge_s": float(self.edges_s[-1]), **self.meta}
        with open(sidecar_path(path), "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        data = np.genfromtxt(path, delimiter=",", names=True, dtype=float, ndmin=1)
        starts = np.asarray(data["bin_start_s"], dtype=float)
        counts = np.asarray(data["count"]).astype(np.int64)
        meta = {}
        if sidecar_path(path).exists():
            meta = json.loads(sidecar_path(path).read_text())
        bin_s = meta.get("bin_s", float(np.median(np.diff(starts))) if len(starts) > 1 else None)
        if bin_s is None:
            raise ValueError(f"{path}: cannot infer bin width from one bin without a sidecar")
        edges = np.append(starts, starts[-1] + bin_s)
        total_gates = int(meta.pop("total_gates", 0))
        for k in ("bin_s", "n_bins", "last_edge_s"):
            meta.pop(k, None)
        return cls(edges, counts, total_gates, meta)


def sidecar_path(path):
    path = Path(path)
    return path.with_name(path.name + ".json")


def histogram_edges(cfg: ExperimentConfig):
    """Bins centred on zero delay that cover +/- gate (plus 5 sigma of jitter)."""
    reach = cfg.gate_s + 5 * math.sqrt(2) * cfg.jitter_s
    half = int(math.ceil(reach / cfg.bin_s))
    return (np.arange(-half, half + 2) - 0.5) * cfg.bin_s


def _first_of(rng, n, start, span):
    """Earliest of n uniform times on [start, start+span); inf where n == 0."""
    u = rng.random(n.shape)
    with np.errstate(divide="ignore"):
        t = start + span * (1.0 - u ** (1.0 / np.maximum(n, 1)))
    return np.where(n > 0, t, np.inf)


def _simulate_chunk(cfg: ExperimentConfig, index, n, edges):
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(index,)))
    f = cfg.in_gate_fraction
    o0, _ = cfg.overlap
    span = cfg.overlap_s
    p1, p2 = cfg.arm_efficiency(0), cfg.arm_efficiency(1)
    mu = cfg.pairs_per_pulse * f
    both = rng.poisson(mu * p1 * p2, n)
    only = (rng.poisson(mu * p1 * (1 - p2) + f * cfg.noise_per_pulse[0] * p1, n),
            rng.poisson(mu * (1 - p1) * p2 + f * cfg.noise_per_pulse[1] * p2, n))
    t_both = _first_of(rng, both, o0, span)
    clicks = []
    for arm in (0, 1):
        t = np.minimum(t_both, _first_of(rng, only[arm], o0, span))
        dark = rng.random(n) < cfg.dark_probability[arm]
        t_dark = np.where(dark, rng.random(n) * cfg.gate_s, np.inf)
        t = np.minimum(t, t_dark)
        if cfg.jitter_s > 0:
            t = t + rng.normal(0.0, cfg.jitter_s, n)
        clicks.append(t)
    ok = np.isfinite(clicks[0]) & np.isfinite(clicks[1])
    delay = clicks[0][ok] - clicks[1][ok]
    delay = np.clip(delay, edges[0], np.nextafter(edges[-1], -np.inf))
    idx = np.floor((delay - edges[0]) / cfg.bin_s).astype(np.int64)
    idx = np.clip(idx, 0, len(edges) - 2)
    return np.bincount(idx, minlength=len(edges) - 1).astype(np.int64)


def simulate_coincidences(cfg: ExperimentConfig, threads=1):
    """Histogram of arm1 - arm2 first-click delays over all gates.

    Gates are processed in fixed-size chunks, each seeded from
    ``(seed, chunk index)``, so the result does not depend on ``threads``.
    """
    edges = histogram_edges(cfg)
    total = cfg.total_gates
    sizes = [min(CHUNK_GATES, total - s) for s in range(0, total, CHUNK_GATES)]
    work = lambda i: _simulate_chunk(cfg, i, sizes[i], edges)
    counts = np.zeros(len(edges) - 1, dtype=np.int64)
    if threads <= 1 or len(sizes) <= 1:
        parts = map(work, range(len(sizes)))
    else:
        pool = ThreadPoolExecutor(max_workers=threads)
        parts = pool.map(work, range(len(sizes)))
    for part in parts:
        counts += part
    if threads > 1 and len(sizes) > 1:
        pool.shutdown()
    return CoincidenceHistogram(edges, counts, total, {"config": _jsonable(cfg.to_dict())})


def _jsonable(d):
    return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def _first_click_rate(cfg: ExperimentConfig, arm):
    """Poisson mean of click sources in the window (photons plus darks)."""
    f = cfg.in_gate_fraction
    lam = f * (cfg.pairs_per_pulse + cfg.noise_per_pulse[arm]) * cfg.arm_efficiency(arm)
    d = cfg.dark_probability[arm]
    return lam + (-math.log1p(-d) if d < 1 else math.inf)


def expected_accidentals_per_bin(cfg: ExperimentConfig, delay_s=0.0, exact=True):
    """Analytic accidental counts in the bin centred on ``delay_s``.

    Uncorrelated clicks are assumed to be uniform over one window W (the
    gate/pulse overlap).  With ``exact=False`` the first-click times are
    treated as uniform, giving ``N p1 p2 (bin/W) (1 - |delay|/W)``.  The exact
    form accounts for the first-click rule: with a Poisson mean lam_j per
    gate the first click is a truncated exponential with rate b_j = lam_j/W.
    """
    w = cfg.overlap_s
    if cfg.overlap_s != cfg.gate_s and any(cfg.dark_probability):
        exact = False  # darks and photons live on different windows
    n = cfg.total_gates * cfg.singles_probability(0) * cfg.singles_probability(1)
    a = abs(delay_s)
    if a >= w:
        return 0.0
    if not exact:
        return n * cfg.bin_s / w * (1.0 - a / w)
    b1, b2 = _first_click_rate(cfg, 0) / w, _first_click_rate(cfg, 1) / w
    if delay_s < 0:
        b1, b2 = b2, b1
    if b1 + b2 == 0:
        return n * cfg.bin_s / w * (1.0 - a / w)

    def norm(b):
        return 1.0 / w if b == 0 else b / -math.expm1(-b * w)

    s = b1 + b2
    g = norm(b1) * norm(b2) * math.exp(-b1 * a) * -math.expm1(-s * (w - a)) / s
    return n * cfg.bin_s * g


# -- analysis -------------------------------------------------------------------

@dataclass(frozen=True)
class HistogramAnalysis:
    peak_position_s: float
    fwhm_s: float
    window_s: tuple
    counts_in_window: int
    background_in_window: float
    true_coincidences: float
    snr: float
    snr_error: float
    saturated: bool = False

    def to_dict(self):
        d = asdict(self)
        d["window_s"] = list(self.window_s)
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d.items()}


def analyze_histogram(h: CoincidenceHistogram, background_span_s=15e-9):
    """Peak, FWHM window, background and SNR of a coincidence histogram.

    The background is a straight line in |delay - peak| fitted to the bins
    lying between 3 x FWHM and 3 x FWHM + ``background_span_s`` from the
    peak, which follows the triangular accidental shape.
    """
    c = np.asarray(h.counts, dtype=float)
    if c.size == 0 or c.sum() == 0:
        raise ValueError("histogram is empty")
    x = h.centers_s
    dt = h.bin_s
    side_bins = max(int(round(background_span_s / dt)), 4)

    # coarse baseline to locate the peak
    base = float(np.median(c))
    i_pk = int(np.argmax(c - base))

    def window(baseline):
        half = baseline + 0.5 * (c[i_pk] - baseline)
        lo = i_pk
        while lo > 0 and c[lo - 1] >= half:
            lo -= 1
        hi = i_pk
        while hi < len(c) - 1 and c[hi + 1] >= half:
            hi += 1
        return lo, hi

    lo, hi = window(base)
    for _ in range(3):
        fw_bins = hi - lo + 1
        d = np.abs(np.arange(len(c)) - i_pk)
        sel = (d > 3 * fw_bins) & (d <= 3 * fw_bins + side_bins)
        if sel.sum() < 4:
            sel = d > fw_bins
        if sel.sum() < 2:
            raise ValueError("not enough bins outside the peak to estimate the background")
        slope, icpt = np.polyfit(d[sel] * dt, c[sel], 1) if np.ptp(d[sel]) > 0 else (0.0, c[sel].mean())
        bg = icpt + slope * d * dt
        new = window(float(bg[i_pk]))
        if new == (lo, hi):
            break
        lo, hi = new
    in_win = slice(lo, hi + 1)
    C = float(c[in_win].sum())
    B = float(max(bg[in_win].sum(), 0.0))
    # variance of the extrapolated background from the straight-line fit,
    # taking the Poisson variance of the side bins as their mean count
    X = np.column_stack([np.ones(int(sel.sum())), d[sel] * dt])
    g = np.array([hi - lo + 1, float(np.sum(d[in_win] * dt))])
    try:
        var_B = float(g @ np.linalg.inv(X.T @ X) @ g) * max(float(c[sel].mean()), 0.0)
    except np.linalg.LinAlgError:
        var_B = B * (hi - lo + 1) / int(sel.sum())
    w = c[in_win]
    peak_pos = float(np.sum(x[in_win] * np.maximum(w - bg[in_win], 0)) / max(np.sum(np.maximum(w - bg[in_win], 0)), 1e-300))
    if B <= 0:
        return HistogramAnalysis(peak_pos, (hi - lo + 1) * dt, (float(h.edges_s[lo]), float(h.edges_s[hi + 1])),
                                 int(C), 0.0, C, math.inf, math.inf, saturated=True)
    snr = (C - B) / B
    err = math.sqrt(C / B**2 + (C / B**2) ** 2 * var_B)
    return HistogramAnalysis(peak_pos, (hi - lo + 1) * dt, (float(h.edges_s[lo]), float(h.edges_s[hi + 1])),
                             int(C), B, C - B, snr, err)


# -- Werner state ---------------------------------------------------------------

@dataclass(frozen=True)
class WernerEstimate:
    snr: float
    P: float
    fidelity: float


def werner_fidelity(snr):
    """Werner weight P = SNR/(2+SNR) and fidelity F = (1+3P)/4 to |psi+>."""
    if not snr >= 0:
        raise ValueError(f"SNR must be non-negative, got {snr}")
    if math.isinf(snr):
        return WernerEstimate(snr, 1.0, 1.0)
    P = snr / (2.0 + snr)
    return WernerEstimate(float(snr), P, (1.0 + 3.0 * P) / 4.0)
