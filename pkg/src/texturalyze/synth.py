"""Ground-truth fixture factories.

Every generator returns its data together with the truth used to create it.
Randomness comes from numpy's Philox counter-based generator so a seed
reproduces the same stream on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .ingest import CurveFile, StudyConfig, SurveyRecord
from .tpa import CompressionProtocol, TpaParameters


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class SyntheticCurveSpec:
    """Piecewise-linear double-compression curve.

    Cycle 1 rises linearly to ``peak_force_1`` at the first turning point and
    relaxes to zero over ``upstroke_ratio`` of the stroke. Cycle 2 makes
    contact after a delay set by ``recovery`` (its springiness), peaks at
    ``cycle2_scale * peak_force_1`` at the second turning point, and relaxes
    with the same upstroke ratio. The closed-form TPA values are exact for
    noise-free curves whose breakpoints fall on the sample grid.
    """

    protocol: CompressionProtocol
    peak_force_1: float
    cycle2_scale: float = 1.0
    upstroke_ratio: float = 1.0
    noise_sd: float = 0.0
    seed: int = 0
    recovery: float = 1.0
    sample_rate: float = 100.0
    time_offset: float = 0.0
    burger_id: str = "B1"
    sample_id: str = "S01"

    def __post_init__(self):
        if not self.peak_force_1 > 0:
            raise ConfigError("peak_force_1 must be positive")
        for name in ("cycle2_scale", "upstroke_ratio", "recovery"):
            if not 0 < getattr(self, name) <= 1:
                raise ConfigError(f"{name} must lie in (0, 1]")
        if self.noise_sd < 0 or self.sample_rate <= 0:
            raise ConfigError("noise_sd must be >= 0 and sample_rate > 0")

    def expected(self) -> TpaParameters:
        p = self.protocol
        return TpaParameters(
            stiffness=self.peak_force_1 / (abs(p.strain_amplitude) * p.specimen_height),
            hardness=self.peak_force_1,
            cohesiveness=self.cycle2_scale * self.recovery,
            springiness=self.recovery,
            resilience=self.upstroke_ratio,
        )

    def breakpoints(self) -> tuple[np.ndarray, np.ndarray]:
        h = self.protocol.stroke_duration
        T = self.protocol.cycle_duration
        F, s, r, q = self.peak_force_1, self.cycle2_scale, self.upstroke_ratio, self.recovery
        pts = [
            (0.0, 0.0),
            (h, F),
            (h + r * h, 0.0),
            (T + (1 - q) * h, 0.0),
            (T + h, s * F),
            (T + h + r * q * h, 0.0),
            (2 * T, 0.0),
        ]
        xs, ys = [], []
        for x, y in pts:
            if xs and x <= xs[-1]:
                continue
            xs.append(x)
            ys.append(y)
        return np.array(xs), np.array(ys)


def gen_curve(spec: SyntheticCurveSpec) -> tuple[CurveFile, TpaParameters]:
    n = int(round(spec.protocol.total_duration * spec.sample_rate)) + 1
    rel = np.arange(n) / spec.sample_rate
    xs, ys = spec.breakpoints()
    force = np.interp(rel, xs, ys)
    if spec.noise_sd > 0:
        force = force + make_rng(spec.seed).normal(0.0, spec.noise_sd, n)
    curve = CurveFile(spec.burger_id, spec.sample_id, rel + spec.time_offset, force)
    return curve, spec.expected()


@dataclass(frozen=True)
class SyntheticSurveySpec:
    participants: int
    burgers: int
    true_beta: tuple[float, float, float] = (0.5, 0.55, 0.3)
    sigma_u: float = 0.5
    sigma: float = 0.5
    cata_probabilities: np.ndarray | float = 0.3
    seed: int = 0
    config: StudyConfig = field(default_factory=StudyConfig)

    def __post_init__(self):
        if self.participants < 1 or self.burgers < 1:
            raise ConfigError("participants and burgers must be positive")
        if len(self.true_beta) != 3:
            raise ConfigError("true_beta needs intercept, flavor and texture coefficients")
        if self.sigma_u < 0 or self.sigma < 0:
            raise ConfigError("standard deviations must be non-negative")
        probs = np.broadcast_to(
            np.asarray(self.cata_probabilities, dtype=float), (self.burgers, len(self.config.cata_vocabulary))
        )
        if np.any(probs < 0) or np.any(probs > 1):
            raise ConfigError("CATA probabilities must lie in [0, 1]")
        object.__setattr__(self, "cata_probabilities", np.array(probs))

    @property
    def burger_ids(self) -> tuple[str, ...]:
        return tuple(f"B{j + 1}" for j in range(self.burgers))

    @property
    def participant_ids(self) -> tuple[str, ...]:
        width = len(str(self.participants))
        return tuple(f"P{i + 1:0{width}d}" for i in range(self.participants))


@dataclass(frozen=True, eq=False)
class SurveyTruth:
    beta: tuple[float, float, float]
    sigma_u: float
    sigma: float
    u: dict[str, float]
    cata_probabilities: np.ndarray


def _likert(value: float, lo: int, hi: int) -> int:
    return int(min(hi, max(lo, math.floor(value + 0.5))))


def gen_survey(spec: SyntheticSurveySpec) -> tuple[list[SurveyRecord], SurveyTruth]:
    """Survey records whose overall liking follows the random-intercept model.

    Flavor and texture liking are uniform on 1..7; overall liking is
    ``b0 + b1 flavor + b2 texture + u + e`` rounded and clamped to 1..7.
    """
    rng = make_rng(spec.seed)
    b0, b1, b2 = spec.true_beta
    vocab = spec.config.cata_vocabulary
    records, u = [], {}
    for pid in spec.participant_ids:
        u[pid] = float(rng.normal(0.0, spec.sigma_u)) if spec.sigma_u > 0 else 0.0
        for j, bid in enumerate(spec.burger_ids):
            flavor = int(rng.integers(1, 8))
            texture = int(rng.integers(1, 8))
            attrs = {a: int(rng.integers(1, 6)) for a in spec.config.likert_attributes}
            eps = float(rng.normal(0.0, spec.sigma)) if spec.sigma > 0 else 0.0
            overall = _likert(b0 + b1 * flavor + b2 * texture + u[pid] + eps, 1, 7)
            picks = rng.random(len(vocab)) < spec.cata_probabilities[j]
            cata = frozenset(a for a, hit in zip(vocab, picks) if hit)
            records.append(SurveyRecord(pid, bid, overall, flavor, texture, attrs, cata))
    truth = SurveyTruth(tuple(spec.true_beta), spec.sigma_u, spec.sigma, u, spec.cata_probabilities)
    return records, truth


@dataclass(frozen=True, eq=False)
class LmmDesign:
    groups: np.ndarray
    X: np.ndarray
    y: np.ndarray
    beta: np.ndarray
    sigma_u: float
    sigma: float
    u: np.ndarray


def gen_lmm_design(
    participants: int,
    items: int,
    beta,
    sigma_u: float,
    sigma: float,
    seed: int,
    *,
    shared_predictors: bool = False,
    centered_noise: bool = False,
) -> LmmDesign:
    """Balanced continuous design drawn exactly from the random-intercept model.

    Predictors are standard normal; with ``shared_predictors`` every
    participant sees the same item-level predictor values. With
    ``centered_noise`` the residuals of each participant are centred, so the
    sample itself carries no between-participant variation beyond ``u``.
    """
    rng = make_rng(seed)
    beta = np.asarray(beta, dtype=float)
    k = len(beta) - 1
    if shared_predictors:
        X = np.tile(rng.standard_normal((items, k)), (participants, 1))
    else:
        X = rng.standard_normal((participants * items, k))
    u = rng.normal(0.0, sigma_u, participants) if sigma_u > 0 else np.zeros(participants)
    eps = rng.normal(0.0, sigma, participants * items) if sigma > 0 else np.zeros(participants * items)
    if centered_noise:
        eps = (eps.reshape(participants, items) - eps.reshape(participants, items).mean(axis=1, keepdims=True)).ravel()
    groups = np.repeat(np.arange(participants), items)
    y = beta[0] + X @ beta[1:] + u[groups] + eps
    return LmmDesign(groups, X, y, beta, sigma_u, sigma, u)
