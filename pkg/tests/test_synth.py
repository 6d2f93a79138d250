import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from texturalyze.errors import ConfigError
from texturalyze.ingest import LIKING_RANGE, StudyConfig
from texturalyze.lmm import fit_lmm
from texturalyze.synth import SyntheticCurveSpec, SyntheticSurveySpec, gen_curve, gen_lmm_design, gen_survey, make_rng
from texturalyze.tpa import CompressionProtocol

PROTOCOL = CompressionProtocol(specimen_height=10.0)


def test_philox_stream_is_frozen():
    # the integer stream of a counter-based generator is platform independent
    assert make_rng(0).integers(0, 2**32, 4).tolist() == [582496169, 60417458, 4027530181, 1107101889]
    assert isinstance(make_rng(0).bit_generator, np.random.Philox)


def test_unit_ratios_give_unit_expectations():
    _, e = gen_curve(SyntheticCurveSpec(PROTOCOL, 5.0))
    assert (e.cohesiveness, e.springiness, e.resilience) == (1.0, 1.0, 1.0)
    assert e.hardness == 5.0 and e.stiffness == 5.0 / (0.5 * 10.0)


def test_half_scale_gives_half_cohesiveness():
    _, e = gen_curve(SyntheticCurveSpec(PROTOCOL, 5.0, cycle2_scale=0.5))
    assert e.cohesiveness == 0.5


def test_curve_shape_and_timing():
    c, _ = gen_curve(SyntheticCurveSpec(PROTOCOL, 4.0, upstroke_ratio=0.5, sample_rate=50.0, time_offset=3.0))
    assert len(c) == 401 and c.time[0] == 3.0 and c.time[-1] == pytest.approx(11.0)
    assert c.force.max() == 4.0
    assert c.force[np.argmin(np.abs(c.time - 6.0))] == 0.0


def test_curve_determinism_and_noise_level():
    spec = SyntheticCurveSpec(PROTOCOL, 5.0, noise_sd=0.2, seed=11)
    a, _ = gen_curve(spec)
    b, _ = gen_curve(spec)
    np.testing.assert_array_equal(a.force, b.force)
    c, _ = gen_curve(SyntheticCurveSpec(PROTOCOL, 5.0, noise_sd=0.2, seed=12))
    assert not np.array_equal(a.force, c.force)
    clean, _ = gen_curve(SyntheticCurveSpec(PROTOCOL, 5.0))
    assert np.std(a.force - clean.force) == pytest.approx(0.2, rel=0.1)


@pytest.mark.parametrize(
    "kwargs",
    [{"peak_force_1": 0.0}, {"cycle2_scale": 0.0}, {"upstroke_ratio": 1.5}, {"recovery": 0.0}, {"noise_sd": -1.0}],
)
def test_curve_spec_validation(kwargs):
    base = {"protocol": PROTOCOL, "peak_force_1": 1.0}
    base.update(kwargs)
    with pytest.raises(ConfigError):
        SyntheticCurveSpec(**base)


def test_noise_free_survey_is_deterministic_from_beta():
    spec = SyntheticSurveySpec(5, 3, true_beta=(0.5, 0.55, 0.3), sigma_u=0.0, sigma=0.0)
    records, truth = gen_survey(spec)
    for r in records:
        expected = int(np.floor(0.5 + 0.55 * r.flavor_liking + 0.3 * r.texture_liking + 0.5))
        assert r.overall_liking == min(7, max(1, expected))
    assert all(u == 0.0 for u in truth.u.values())


@given(st.integers(0, 2**32 - 1))
def test_survey_determinism_and_ranges(seed):
    spec = SyntheticSurveySpec(6, 4, seed=seed)
    a, ta = gen_survey(spec)
    b, tb = gen_survey(spec)
    assert a == b and ta.u == tb.u
    assert len(a) == 24 and len({(r.participant_id, r.burger_id) for r in a}) == 24
    lo, hi = LIKING_RANGE
    for r in a:
        assert all(lo <= r.rating(q) <= hi for q in ("overall_liking", "flavor_liking", "texture_liking"))
        assert all(1 <= v <= 5 for v in r.attribute_ratings.values())
        assert r.cata_selections <= set(spec.config.cata_vocabulary)


def test_cata_probabilities_extremes():
    vocab = StudyConfig().cata_vocabulary
    probs = np.zeros((2, len(vocab)))
    probs[1] = 1.0
    records, _ = gen_survey(SyntheticSurveySpec(5, 2, cata_probabilities=probs))
    for r in records:
        assert r.cata_selections == (frozenset() if r.burger_id == "B1" else frozenset(vocab))


def test_survey_spec_validation():
    with pytest.raises(ConfigError):
        SyntheticSurveySpec(0, 2)
    with pytest.raises(ConfigError):
        SyntheticSurveySpec(2, 2, cata_probabilities=1.5)
    with pytest.raises(ConfigError):
        SyntheticSurveySpec(2, 2, true_beta=(1.0, 2.0))
    with pytest.raises(ValueError):
        SyntheticSurveySpec(2, 2, cata_probabilities=np.zeros((3, 13)))


def test_identifiers():
    spec = SyntheticSurveySpec(120, 3)
    assert spec.participant_ids[:2] == ("P001", "P002") and spec.burger_ids == ("B1", "B2", "B3")


def test_survey_lmm_coverage():
    """200 participants x 6 burgers: the fitted model covers the generating beta in >= 95% of seeds."""
    covered = 0
    for seed in range(100):
        records, truth = gen_survey(SyntheticSurveySpec(200, 6, seed=seed))
        groups = np.array([r.participant_id for r in records])
        X = np.array([[r.flavor_liking, r.texture_liking] for r in records], dtype=float)
        y = np.array([r.overall_liking for r in records], dtype=float)
        fit = fit_lmm(groups, X, y)
        covered += bool(np.all(np.abs(fit.beta - np.array(truth.beta)) <= 3 * fit.se))
    assert covered >= 95


def test_lmm_design_truth():
    d = gen_lmm_design(10, 4, (1.0, 2.0), 0.0, 0.0, 0)
    np.testing.assert_allclose(d.y, 1.0 + 2.0 * d.X[:, 0])
    shared = gen_lmm_design(3, 4, (0.0, 1.0, 1.0), 0.1, 0.1, 0, shared_predictors=True)
    np.testing.assert_array_equal(shared.X[:4], shared.X[4:8])
    centered = gen_lmm_design(5, 4, (0.0, 1.0), 0.0, 1.0, 0, centered_noise=True)
    resid = (centered.y - centered.X[:, 0]).reshape(5, 4)
    np.testing.assert_allclose(resid.mean(axis=1), 0.0, atol=1e-14)
