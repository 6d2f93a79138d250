import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from texturalyze.errors import (
    ConfigError,
    DuplicatePair,
    InputError,
    MalformedHeader,
    MissingColumn,
    NoInput,
    NonMonotonicTime,
    NonNumericCell,
    OutOfRangeLikert,
    TooFewRows,
    UnknownCataAttribute,
)
from texturalyze.ingest import (
    DEFAULT_CATA_VOCABULARY,
    CurveFile,
    StudyConfig,
    SurveyRecord,
    format_config,
    load_curve_dir,
    normalize_attribute,
    parse_config,
    parse_curve_file,
    parse_survey_file,
    serialize_curve,
    serialize_survey,
)

CONFIG = StudyConfig()
HEADER = "participant_id,burger_id,overall_liking,flavor_liking,texture_liking,softness,hardness,fattiness,moistness,fibrousness,cata"


def curve_text(rows):
    return "time_s,force_N\n" + "".join(f"{t},{f}\n" for t, f in rows)


# --------------------------------------------------------------------------- curves


def test_decreasing_time_reports_row_two():
    data = curve_text([(0.0, 0.0), (-0.1, 1.0), (0.2, 2.0)]).encode()
    with pytest.raises(NonMonotonicTime) as exc:
        parse_curve_file(data, "B1", "S01", source="s.csv")
    assert exc.value.row == 2
    assert "row 2" in str(exc.value) and "s.csv" in str(exc.value)


def test_triangle_wave_round_trip():
    t = np.arange(200) / 25.0
    f = 5.0 * (1 - np.abs((t % 4.0) - 2.0) / 2.0)
    curve = parse_curve_file(curve_text(zip(t.tolist(), f.tolist())).encode(), "B1", "S01")
    assert len(curve) == 200
    np.testing.assert_array_equal(curve.time, t)
    np.testing.assert_array_equal(curve.force, f)


@pytest.mark.parametrize("bad", ["NaN", "inf", "abc", ""])
def test_non_numeric_force(bad):
    rows = [(i * 0.1, 1.0) for i in range(20)]
    text = curve_text(rows).replace("\n0.5,1.0\n", f"\n0.5,{bad}\n")
    with pytest.raises(NonNumericCell) as exc:
        parse_curve_file(text.encode(), "B1", "S01")
    assert exc.value.row == 6 and exc.value.column == "force_N"


def test_malformed_header_and_short_file():
    with pytest.raises(MalformedHeader):
        parse_curve_file(b"t,force\n0,1\n", "B1", "S01")
    with pytest.raises(MalformedHeader):
        parse_curve_file(b"", "B1", "S01")
    with pytest.raises(TooFewRows):
        parse_curve_file(curve_text([(i, 0.0) for i in range(5)]).encode(), "B1", "S01")
    with pytest.raises(InputError):
        parse_curve_file(b"\xff\xfe", "B1", "S01")


def test_curve_arrays_are_read_only():
    c = CurveFile("B", "S", np.arange(20.0), np.zeros(20))
    with pytest.raises(ValueError):
        c.force[0] = 1.0


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@given(st.lists(st.tuples(st.floats(1e-6, 10.0), finite), min_size=16, max_size=60))
def test_curve_serialize_parse_round_trip(steps):
    t = np.cumsum([s for s, _ in steps])
    f = np.array([v for _, v in steps])
    curve = CurveFile("B1", "S01", t, f)
    data = serialize_curve(curve)
    back = parse_curve_file(data, "B1", "S01")
    np.testing.assert_array_equal(back.time, curve.time)
    np.testing.assert_array_equal(back.force, curve.force)
    assert serialize_curve(back) == data


def test_load_curve_dir(tmp_path):
    for b in ("B2", "B1"):
        (tmp_path / b).mkdir()
        for s in ("S02", "S01"):
            rows = [(i * 0.1, float(i)) for i in range(16)]
            (tmp_path / b / f"{s}.csv").write_text(curve_text(rows))
    curves = load_curve_dir(tmp_path)
    assert [(c.burger_id, c.sample_id) for c in curves] == [("B1", "S01"), ("B1", "S02"), ("B2", "S01"), ("B2", "S02")]


def test_load_curve_dir_empty_or_missing(tmp_path):
    with pytest.raises(NoInput):
        load_curve_dir(tmp_path)
    with pytest.raises(NoInput):
        load_curve_dir(tmp_path / "absent")


def test_load_curve_dir_error_names_file(tmp_path):
    (tmp_path / "B1").mkdir()
    (tmp_path / "B1" / "S01.csv").write_text("time_s,force_N\n0,1\n0,2\n")
    with pytest.raises(NonMonotonicTime, match="S01.csv"):
        load_curve_dir(tmp_path)


# --------------------------------------------------------------------------- config


def test_default_config():
    assert len(CONFIG.cata_vocabulary) == 13
    assert CONFIG.cata_vocabulary == DEFAULT_CATA_VOCABULARY
    assert CONFIG.significance_alpha == 0.05 and CONFIG.ci_level == 0.95
    with pytest.raises(ConfigError):
        CONFIG.require_protocol()


def test_config_round_trip():
    cfg = parse_config(
        "cata_vocabulary = Firm, dry,  Holds   Together\n"
        "likert_attributes = softness, meatiness\n"
        "significance_alpha = 0.01\n"
        "specimen_height = 12.5\n"
    )
    assert cfg.cata_vocabulary == ("firm", "dry", "holds together")
    assert cfg.likert_attributes == ("softness", "meatiness")
    assert cfg.require_protocol().specimen_height == 12.5
    assert parse_config(format_config(cfg)) == cfg


@pytest.mark.parametrize(
    "text",
    [
        "bogus = 1\n",
        "significance_alpha = 1.5\n",
        "ci_level = abc\n",
        "strain_rate = -0.2\n",
        "cata_vocabulary = firm, firm\n",
        "likert_attributes = overall_liking\n",
        "specimen_height = 10\nstrain_amplitude = 0.5\n",
        "[section]\n=",
    ],
)
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_config_error_exit_code():
    assert ConfigError("x").exit_code == 3
    assert InputError("x").exit_code == 2


# --------------------------------------------------------------------------- survey


def survey(*rows, header=HEADER):
    return (header + "\n" + "\n".join(rows) + "\n").encode()


def test_minimal_survey():
    rows = [f"P{p},B{b},4,4,4,4,4,4,4,4," for p in (1, 2) for b in (1, 2)]
    recs = parse_survey_file(survey(*rows), CONFIG)
    assert len(recs) == 4
    for r in recs:
        assert all(r.rating(q) == 4 for q in CONFIG.questions)
        assert r.cata_selections == frozenset()


def test_out_of_range_names_field_and_row():
    data = survey("P1,B1,4,4,4,4,4,4,4,4,", "P1,B2,9,4,4,4,4,4,4,4,")
    with pytest.raises(OutOfRangeLikert) as exc:
        parse_survey_file(data, CONFIG, source="survey.csv")
    assert exc.value.row == 2 and exc.value.column == "overall_liking"
    with pytest.raises(OutOfRangeLikert):
        parse_survey_file(survey("P1,B1,4,4,4,6,4,4,4,4,"), CONFIG)


def test_unknown_cata_token():
    with pytest.raises(UnknownCataAttribute) as exc:
        parse_survey_file(survey("P1,B1,4,4,4,4,4,4,4,4,firm|umami"), CONFIG)
    assert exc.value.column == "cata"


def test_cata_tokens_are_normalized():
    rec = parse_survey_file(survey("P1,B1,4,4,4,4,4,4,4,4,  FIRM | Holds  together|"), CONFIG)[0]
    assert rec.cata_selections == {"firm", "holds together"}


def test_duplicate_pair_and_missing_column():
    with pytest.raises(DuplicatePair):
        parse_survey_file(survey("P1,B1,4,4,4,4,4,4,4,4,", "P1,B1,5,4,4,4,4,4,4,4,"), CONFIG)
    with pytest.raises(MissingColumn) as exc:
        parse_survey_file(survey("P1,B1,4,4,4,4,4,4,4,", header=HEADER.replace(",moistness", "")), CONFIG)
    assert exc.value.column == "moistness"


@pytest.mark.parametrize("cell", ["", "4.5", "x"])
def test_missing_or_non_integer_likert_is_rejected(cell):
    with pytest.raises(NonNumericCell):
        parse_survey_file(survey(f"P1,B1,4,{cell},4,4,4,4,4,4,"), CONFIG)


def test_header_case_and_configured_attributes():
    cfg = StudyConfig(likert_attributes=("softness", "meatiness"))
    header = "Participant_ID,Burger_ID,Overall_Liking,Flavor_Liking,Texture_Liking,Softness,Meatiness,CATA"
    rec = parse_survey_file(survey("P1,B1,5,6,7,1,5,dry", header=header), cfg)[0]
    assert rec.rating("meatiness") == 5 and rec.texture_liking == 7


record_strategy = st.builds(
    lambda p, b, liking, attrs, cata: SurveyRecord(
        f"P{p}",
        f"B{b}",
        *liking,
        attribute_ratings=dict(zip(CONFIG.likert_attributes, attrs)),
        cata_selections=frozenset(cata),
    ),
    st.integers(1, 30),
    st.integers(1, 6),
    st.tuples(*[st.integers(1, 7)] * 3),
    st.tuples(*[st.integers(1, 5)] * 5),
    st.sets(st.sampled_from(DEFAULT_CATA_VOCABULARY)),
)


@given(st.lists(record_strategy, min_size=1, max_size=25, unique_by=lambda r: (r.participant_id, r.burger_id)), st.randoms())
def test_survey_round_trip_and_order_independence(records, rnd):
    data = serialize_survey(records, CONFIG)
    parsed = parse_survey_file(data, CONFIG)
    assert parsed == sorted(records, key=lambda r: (r.participant_id, r.burger_id))
    assert serialize_survey(parsed, CONFIG) == serialize_survey(sorted(records, key=lambda r: (r.participant_id, r.burger_id)), CONFIG)
    shuffled = list(records)
    rnd.shuffle(shuffled)
    assert parse_survey_file(serialize_survey(shuffled, CONFIG), CONFIG) == parsed


def test_normalize_attribute():
    assert normalize_attribute("  Crumbly/Grainy ") == "crumbly/grainy"
    assert normalize_attribute("holds\t together") == "holds together"
