"""Double-compression texture profile analysis (TPA).

Curves are segmented at the protocol's nominal turning points, refined
against the force signal, and reduced to six mechanical descriptors.
Displacement is not measured; it is reconstructed as constant probe speed
``|strain_rate| * specimen_height`` from each cycle's contact onset.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np
from scipy.ndimage import gaussian_filter1d
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import (
    ConfigError,
    CycleCountMismatch,
    DegenerateCycle,
    DurationMismatch,
    InsufficientSamples,
    NonPositivePeak,
    NoTimeOverlap,
)
from .stats import t_ppf

if TYPE_CHECKING:
    from .ingest import CurveFile

PARAMETERS = ("stiffness", "hardness", "cohesiveness", "springiness", "resilience", "chewiness")
UNITS = {
    "stiffness": "N/mm",
    "hardness": "N",
    "cohesiveness": "-",
    "springiness": "-",
    "resilience": "-",
    "chewiness": "N",
}

# fraction of the cycle duration searched around each nominal turning point
REFINE_WINDOW = 0.10
# force band (fraction of the cycle peak) used for stiffness and onset fits
BAND = (0.10, 0.40)
DURATION_TOLERANCE = 0.20
SOFT_RATIO_BOUND = 1.2
# Gaussian smoothing (in samples) used only to locate peaks and fit bands;
# every reported value is read from the raw force
SMOOTHING = 2.0
# radius (samples) around the turning point searched for the raw peak force
PEAK_SNAP = 2
# force band (fraction of the smoothed peak) of the flanks whose fitted lines
# intersect at the turning point
FLANK = (0.60, 0.90)
# onsets within this fraction of a sample spacing of a sample snap onto it
ONSET_SLACK = 1e-6


@dataclass(frozen=True)
class CompressionProtocol:
    specimen_height: float
    strain_amplitude: float = -0.50
    strain_rate: float = -0.25
    n_cycles: int = 2
    specimen_diameter: float = 8.0

    def __post_init__(self):
        if not (math.isfinite(self.specimen_height) and self.specimen_height > 0):
            raise ConfigError("specimen_height must be a positive length in mm")
        if not -1.0 < self.strain_amplitude < 0.0:
            raise ConfigError("strain_amplitude must lie in (-1, 0)")
        if not self.strain_rate < 0.0:
            raise ConfigError("strain_rate must be negative")
        if self.n_cycles != 2:
            raise ConfigError("texture profile analysis needs exactly 2 compression cycles")
        if not self.specimen_diameter > 0:
            raise ConfigError("specimen_diameter must be positive")

    @property
    def stroke_duration(self) -> float:
        """Seconds for one downstroke (equal to one upstroke)."""
        return self.strain_amplitude / self.strain_rate

    @property
    def cycle_duration(self) -> float:
        return 2.0 * self.stroke_duration

    @property
    def total_duration(self) -> float:
        return self.n_cycles * self.cycle_duration

    @property
    def probe_speed(self) -> float:
        """Crosshead speed in mm/s."""
        return abs(self.strain_rate) * self.specimen_height


@dataclass(frozen=True)
class Cycle:
    """Inclusive sample indices of one compression cycle.

    The downstroke spans ``[start, peak]`` and the upstroke ``[peak, end]``;
    ``peak`` is the sample nearest the probe's turning point.
    ``onset`` is the sub-sample contact time of the downstroke.
    """

    start: int
    peak: int
    end: int
    onset: float

    @property
    def downstroke(self) -> tuple[int, int]:
        return (self.start, self.peak)

    @property
    def upstroke(self) -> tuple[int, int]:
        return (self.peak, self.end)


@dataclass(frozen=True)
class CycleSegmentation:
    cycles: tuple[Cycle, ...]

    def __len__(self):
        return len(self.cycles)

    def __getitem__(self, k) -> Cycle:
        return self.cycles[k]


@dataclass(frozen=True)
class TpaParameters:
    stiffness: float
    hardness: float
    cohesiveness: float
    springiness: float
    resilience: float

    @property
    def chewiness(self) -> float:
        return self.hardness * self.cohesiveness * self.springiness

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in PARAMETERS}

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in PARAMETERS])


@dataclass(frozen=True, eq=False)
class EnsembleCurve:
    time: np.ndarray
    mean: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    n_samples: int
    ci_level: float = 0.95

    def as_curve(self, burger_id: str, sample_id: str = "mean") -> "CurveFile":
        from .ingest import CurveFile

        return CurveFile(burger_id, sample_id, self.time, self.mean)


def _label(curve) -> str:
    return f"{curve.burger_id}/{curve.sample_id}"


def _nearest(t: np.ndarray, value: float) -> int:
    i = int(np.searchsorted(t, value))
    if i <= 0:
        return 0
    if i >= len(t):
        return len(t) - 1
    return i if t[i] - value < value - t[i - 1] else i - 1


def _smooth(f):
    return gaussian_filter1d(f, SMOOTHING, mode="nearest") if SMOOTHING > 0 else f


def _rise_band(t, f, lo, peak, fs=None):
    """Indices of the final rise into ``peak`` whose force lies in the fit band.

    Membership is decided on the smoothed force ``fs`` so noise at the band
    edges does not bias the fit.
    """
    fs = f if fs is None else fs
    fpk = f[peak]
    below = np.flatnonzero(fs[lo:peak] < BAND[0] * fpk)
    first = lo + int(below[-1]) + 1 if below.size else lo
    idx = np.arange(first, peak + 1)
    band = idx[fs[idx] <= BAND[1] * fpk]
    return first, band


def _line_fit(t, f, band):
    """Least-squares slope and zero-force time of force against time."""
    tb = t[band] - t[band[0]]
    fb = f[band]
    tm = tb.mean()
    fm = fb.mean()
    dt = tb - tm
    denom = np.dot(dt, dt)
    if denom == 0:
        return 0.0, math.nan
    slope = float(np.dot(dt, fb - fm) / denom)
    if slope <= 0:
        return slope, math.nan
    return slope, float(t[band[0]] + tm - fm / slope)


def _flank(fs, top, step, level):
    """Contiguous run of indices from ``top`` in direction ``step`` inside the flank band."""
    idx = []
    i = top
    while 0 <= i < len(fs) and fs[i] >= FLANK[0] * level:
        if fs[i] <= FLANK[1] * level:
            idx.append(i)
        i += step
    return np.array(sorted(idx), dtype=int)


def _turning_point(t, f, fs, guess) -> float:
    """Time where lines fitted to the rising and falling flanks meet, or nan.

    The raw maximum of a noisy peak drifts toward the shallower flank; the
    flank intersection does not, and equals the vertex of a piecewise-linear
    peak exactly.
    """
    level = fs[guess]
    rise, fall = _flank(fs, guess, -1, level), _flank(fs, guess, 1, level)
    if rise.size < 2 or fall.size < 2:
        return math.nan
    t_ref = t[guess]
    lines = []
    for band in (rise, fall):
        tb = t[band] - t_ref
        A = np.column_stack([np.ones_like(tb), tb])
        (b, s), *_ = np.linalg.lstsq(A, f[band], rcond=None)
        lines.append((b, s))
    (b1, s1), (b2, s2) = lines
    if not (s1 > 0 > s2):
        return math.nan
    return float(t_ref + (b2 - b1) / (s1 - s2))


def _onset(t, f, lo, peak, fs=None) -> float:
    first, band = _rise_band(t, f, lo, peak, fs)
    onset = math.nan
    if band.size >= 2:
        _, onset = _line_fit(t, f, band)
    if math.isnan(onset):
        onset = t[first - 1] if first > lo else t[lo]
    return float(min(max(onset, t[lo]), t[peak]))


def segment_cycles(curve: "CurveFile", protocol: CompressionProtocol) -> CycleSegmentation:
    """Split a double-compression curve into downstroke/upstroke cycles."""
    t, f = curve.time, curve.force
    period = protocol.cycle_duration
    stroke = protocol.stroke_duration
    t0 = float(t[0])
    duration = float(t[-1]) - t0
    nominal = protocol.total_duration
    detected = int(round(duration / period))
    if detected != protocol.n_cycles:
        raise CycleCountMismatch(
            f"curve of {duration:g} s covers {detected} cycle(s) of {period:g} s, expected {protocol.n_cycles}",
            source=_label(curve),
        )
    if abs(duration - nominal) > DURATION_TOLERANCE * nominal:
        raise DurationMismatch(
            f"curve lasts {duration:g} s, protocol implies {nominal:g} s", source=_label(curve)
        )

    window = REFINE_WINDOW * period
    step = float(np.median(np.diff(t)))
    fs = _smooth(f)
    peaks = []
    for k in range(protocol.n_cycles):
        p_nom = t0 + k * period + stroke
        i = int(np.searchsorted(t, p_nom - window, side="left"))
        j = int(np.searchsorted(t, p_nom + window, side="right"))
        if j <= i or fs[i:j].max() <= 0:
            raise CycleCountMismatch(f"no compression peak found in cycle {k + 1}", source=_label(curve))
        guess = i + int(np.argmax(fs[i:j]))
        vertex = _turning_point(t, f, fs, guess)
        turn = _nearest(t, vertex) if math.isfinite(vertex) else -1
        if i <= turn < j:
            peaks.append(turn)
        else:
            a, b = max(i, guess - PEAK_SNAP), min(j, guess + PEAK_SNAP + 1)
            peaks.append(a + int(np.argmax(f[a:b])))

    starts, onsets = [], []
    for k, peak in enumerate(peaks):
        lo = int(np.searchsorted(t, t0 + k * period - window, side="left"))
        if k > 0:
            lo = max(lo, peaks[k - 1] + 1)
        onset = _onset(t, f, lo, peak, fs)
        # last sample at or before the onset, tolerant of rounding in the intercept
        start = max(lo, int(np.searchsorted(t, onset + ONSET_SLACK * step, side="right")) - 1)
        starts.append(start)
        onsets.append(onset)

    cycles = []
    for k, peak in enumerate(peaks):
        end = _nearest(t, t0 + (k + 1) * period)
        if k + 1 < len(peaks):
            end = min(end, starts[k + 1])
        # withdrawal ends where the force first returns to zero
        returned = np.flatnonzero(fs[peak + 1 : end] <= 0)
        if returned.size:
            end = peak + 1 + int(returned[0])
        end = max(end, peak)
        cycles.append(Cycle(starts[k], peak, end, onsets[k]))
    return CycleSegmentation(tuple(cycles))


def _positive_area(t, f, i, j) -> float:
    return float(np.trapezoid(np.clip(f[i : j + 1], 0.0, None), t[i : j + 1]))


def compute_tpa(curve: "CurveFile", seg: CycleSegmentation, protocol: CompressionProtocol) -> TpaParameters:
    """Six TPA descriptors from a segmented curve.

    Areas are positive-force work (trapezoidal rule); at constant probe speed
    the time-to-displacement map is linear, so ratios are computed in time.
    """
    if len(seg) != 2:
        raise CycleCountMismatch(f"expected 2 cycles, segmentation has {len(seg)}")
    t, f = curve.time, curve.force
    c1, c2 = seg[0], seg[1]
    # peak force read from the raw samples around the turning point
    hardness = float(f[max(c1.start, c1.peak - PEAK_SNAP) : min(c1.end, c1.peak + PEAK_SNAP) + 1].max())
    if hardness <= 0:
        raise NonPositivePeak(f"cycle-1 peak force {hardness!r} N is not positive", source=_label(curve))

    down1 = _positive_area(t, f, c1.start, c1.peak)
    up1 = _positive_area(t, f, c1.peak, c1.end)
    work1 = _positive_area(t, f, c1.start, c1.end)
    work2 = _positive_area(t, f, c2.start, c2.end)
    rise1 = float(t[c1.peak]) - c1.onset
    rise2 = float(t[c2.peak]) - c2.onset
    if down1 <= 0 or work1 <= 0 or rise1 <= 0:
        raise DegenerateCycle("cycle 1 has zero compression work or duration", source=_label(curve))

    _, band = _rise_band(t, f, c1.start, c1.peak, _smooth(f))
    if band.size < 2:
        raise DegenerateCycle("too few samples in the stiffness band", source=_label(curve))
    slope, _ = _line_fit(t, f, band)

    params = TpaParameters(
        stiffness=slope / protocol.probe_speed,
        hardness=hardness,
        cohesiveness=work2 / work1,
        springiness=max(rise2, 0.0) / rise1,
        resilience=up1 / down1,
    )
    for name in ("cohesiveness", "springiness", "resilience"):
        if getattr(params, name) > SOFT_RATIO_BOUND:
            warnings.warn(
                f"{curve.burger_id}/{curve.sample_id}: {name} = {getattr(params, name):.3f} exceeds {SOFT_RATIO_BOUND}",
                stacklevel=2,
            )
    return params


def analyze_curve(curve: "CurveFile", protocol: CompressionProtocol) -> TpaParameters:
    return compute_tpa(curve, segment_cycles(curve, protocol), protocol)


def ensemble_stats(curves: Sequence["CurveFile"], ci_level: float = 0.95, n_points: int | None = None) -> EnsembleCurve:
    """Pointwise mean and two-sided t confidence band of resampled curves."""
    if len(curves) < 2:
        raise InsufficientSamples(f"need at least 2 curves, got {len(curves)}")
    lo = max(float(c.time[0]) for c in curves)
    hi = min(float(c.time[-1]) for c in curves)
    if hi <= lo:
        raise NoTimeOverlap("curves share no common time range")
    shared = all(np.array_equal(c.time, curves[0].time) for c in curves[1:])
    if shared and n_points is None:
        # members already share one grid: no resampling needed
        grid = np.array(curves[0].time)
        forces = np.stack([c.force for c in curves])
    else:
        grid = np.linspace(lo, hi, n_points or max(len(c) for c in curves))
        forces = np.stack([np.interp(grid, c.time, c.force) for c in curves])

    n = len(curves)
    constant = np.ptp(forces, axis=0) == 0
    mean = np.where(constant, forces[0], forces.mean(axis=0))
    sd = np.where(constant, 0.0, forces.std(axis=0, ddof=1))
    half = t_ppf(0.5 + 0.5 * ci_level, n - 1) * sd / math.sqrt(n)
    return EnsembleCurve(grid, mean, mean - half, mean + half, n, ci_level)


@dataclass(frozen=True, eq=False)
class BurgerTpa:
    """TPA of one burger: mean-curve parameters (canonical) plus per-sample spread."""

    burger_id: str
    ensemble: EnsembleCurve
    canonical: TpaParameters
    samples: tuple[TpaParameters, ...]

    @property
    def sample_sd(self) -> dict[str, float]:
        values = np.array([p.as_array() for p in self.samples])
        sd = values.std(axis=0, ddof=1) if len(values) > 1 else np.full(len(PARAMETERS), math.nan)
        return dict(zip(PARAMETERS, sd.tolist()))


def analyze_burgers(curves: Iterable["CurveFile"], protocol: CompressionProtocol, ci_level: float = 0.95) -> list[BurgerTpa]:
    """Group curves by burger and run per-sample and mean-curve TPA."""
    groups: dict[str, list] = {}
    for curve in curves:
        groups.setdefault(curve.burger_id, []).append(curve)
    results = []
    for burger in sorted(groups):
        members = groups[burger]
        samples = tuple(analyze_curve(c, protocol) for c in members)
        ensemble = ensemble_stats(members, ci_level)
        canonical = analyze_curve(ensemble.as_curve(burger), protocol)
        results.append(BurgerTpa(burger, ensemble, canonical, samples))
    return results


class TPAExtractor(TransformerMixin, BaseEstimator):
    """Transform force-time curves into rows of TPA parameters.

    Parameters mirror :class:`CompressionProtocol`. ``transform`` accepts any
    iterable of :class:`~texturalyze.ingest.CurveFile` and returns an array
    with one row per curve and columns ordered as :data:`PARAMETERS`.
    """

    def __init__(self, specimen_height=10.0, strain_amplitude=-0.5, strain_rate=-0.25, specimen_diameter=8.0):
        self.specimen_height = specimen_height
        self.strain_amplitude = strain_amplitude
        self.strain_rate = strain_rate
        self.specimen_diameter = specimen_diameter

    def fit(self, X=None, y=None):
        self.protocol_ = CompressionProtocol(
            specimen_height=self.specimen_height,
            strain_amplitude=self.strain_amplitude,
            strain_rate=self.strain_rate,
            specimen_diameter=self.specimen_diameter,
        )
        self.n_features_out_ = len(PARAMETERS)
        return self

    def transform(self, X):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "protocol_")
        rows = [analyze_curve(c, self.protocol_).as_array() for c in X]
        return np.array(rows).reshape(-1, len(PARAMETERS))

    def get_feature_names_out(self, input_features=None):
        return np.array(PARAMETERS, dtype=object)


__all__ = [
    "PARAMETERS",
    "CompressionProtocol",
    "Cycle",
    "CycleSegmentation",
    "TpaParameters",
    "EnsembleCurve",
    "BurgerTpa",
    "segment_cycles",
    "compute_tpa",
    "analyze_curve",
    "ensemble_stats",
    "analyze_burgers",
    "TPAExtractor",
]
