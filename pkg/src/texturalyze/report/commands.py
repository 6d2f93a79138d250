"""Subcommand implementations.

Each command reads its inputs, calls the analysis modules and writes CSV
and SVG files under ``out``. Commands return the list of files they wrote;
no statistic is recomputed here.
"""

from __future__ import annotations

import configparser
import re
import warnings
from pathlib import Path

import numpy as np

from ..ca import fit_ca, project_supplementary
from ..errors import ConfigError, InputError, ZeroVariance
from ..ingest import LIKING_QUESTIONS, StudyConfig, format_config, load_curve_dir, load_survey, serialize_curve, serialize_survey
from ..lmm import fit_lmm, lmm_predict
from ..stats import pearson
from ..survey import build_contingency, likert_summary, ratings_matrix, tally_cata, zscore
from ..synth import SyntheticCurveSpec, SyntheticSurveySpec, gen_curve, gen_survey, make_rng
from ..tpa import PARAMETERS, UNITS, CompressionProtocol, analyze_burgers
from . import svg
from .csvio import read_tpa_table, write_csv

_SAFE = re.compile(r"[^A-Za-z0-9_.-]+")


def safe_name(text: str) -> str:
    return _SAFE.sub("_", str(text)).strip("_") or "unnamed"


def _out_dir(out) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --------------------------------------------------------------------------- tpa


def cmd_tpa(curves_dir, config: StudyConfig, out) -> list[Path]:
    protocol = config.require_protocol()
    curves = load_curve_dir(curves_dir)
    results = analyze_burgers(curves, protocol, config.ci_level)
    out = _out_dir(out)
    written = []

    header = ["burger_id", "n_samples"] + list(PARAMETERS) + [f"{p}_sd" for p in PARAMETERS]
    rows = []
    for res in results:
        canon = res.canonical.as_dict()
        sd = res.sample_sd
        rows.append([res.burger_id, len(res.samples)] + [canon[p] for p in PARAMETERS] + [sd[p] for p in PARAMETERS])
    written.append(write_csv(out / "tpa_parameters.csv", header, rows))

    sample_rows = []
    by_burger = {}
    for c in curves:
        by_burger.setdefault(c.burger_id, []).append(c.sample_id)
    for res in results:
        for sample_id, params in zip(by_burger[res.burger_id], res.samples):
            d = params.as_dict()
            sample_rows.append([res.burger_id, sample_id] + [d[p] for p in PARAMETERS])
    written.append(write_csv(out / "tpa_samples.csv", ["burger_id", "sample_id"] + list(PARAMETERS), sample_rows))

    series = []
    for res in results:
        e = res.ensemble
        written.append(
            write_csv(
                out / f"ensemble_{safe_name(res.burger_id)}.csv",
                ["time_s", "mean_N", "ci_low_N", "ci_high_N"],
                zip(e.time.tolist(), e.mean.tolist(), e.ci_low.tolist(), e.ci_high.tolist()),
            )
        )
        series.append((res.burger_id, e.time.tolist(), e.mean.tolist(), e.ci_low.tolist(), e.ci_high.tolist()))

    burgers = [r.burger_id for r in results]
    panels = {p: [r.canonical.as_dict()[p] for r in results] for p in PARAMETERS}
    written.append(
        svg.write(out / "tpa_overview.svg", svg.bar_panels("Texture profile analysis parameters", burgers, panels, UNITS))
    )
    level = f"{100 * config.ci_level:g}%"
    written.append(
        svg.write(
            out / "ensemble_curves.svg",
            svg.line_bands(f"Mean force curves with {level} confidence bands", series, "time [s]", "force [N]"),
        )
    )
    return written


# --------------------------------------------------------------------------- survey + tpa


def _aligned_tpa(tpa_csv, burgers) -> dict[str, np.ndarray]:
    table = read_tpa_table(tpa_csv)
    missing = sorted(set(burgers) - set(table))
    extra = sorted(set(table) - set(burgers))
    if missing or extra:
        raise InputError(
            f"burger ids differ between survey and TPA table (missing {missing}, unexpected {extra})", source=str(tpa_csv)
        )
    return {p: np.array([table[b][p] for b in burgers]) for p in PARAMETERS}


def cmd_ca(survey_csv, tpa_csv, config: StudyConfig, out) -> list[Path]:
    records = load_survey(survey_csv, config)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        table = build_contingency(records, config)
    model = fit_ca(table)
    burgers = sorted({r.burger_id for r in records})
    tpa = _aligned_tpa(tpa_csv, burgers)
    # rows pruned from the table (no selections) have no coordinates
    keep = [burgers.index(b) for b in model.rows]
    variables = {p: v[keep] for p, v in tpa.items() if np.ptp(v[keep]) > 0}
    proj = project_supplementary(model, variables)
    out = _out_dir(out)
    written = []

    full = tally_cata(records, config)
    written.append(
        write_csv(out / "contingency.csv", ["burger_id"] + list(full.columns), [[b] + row for b, row in zip(full.rows, full.counts.tolist())])
    )

    k = model.n_dims
    dims = [f"dim{d + 1}" for d in range(k)]
    rows = [["eigenvalue", "inertia", ""] + model.eigenvalues.tolist(), ["inertia_share", "inertia", ""] + model.inertia_shares.tolist()]
    for name, mass, coords in zip(model.rows, model.row_masses.tolist(), model.row_coordinates.tolist()):
        rows.append(["row", name, mass] + coords)
    for name, mass, coords in zip(model.columns, model.col_masses.tolist(), model.column_coordinates.tolist()):
        rows.append(["column", name, mass] + coords)
    for name, loads in zip(proj.names, proj.loadings.tolist()):
        rows.append(["supplementary", name, ""] + loads)
    written.append(write_csv(out / "ca_coordinates.csv", ["kind", "label", "mass"] + dims, rows))

    def xy(coords):
        return coords[0], (coords[1] if len(coords) > 1 else 0.0)

    shares = model.inertia_shares.tolist() + [0.0]
    written.append(
        svg.write(
            out / "ca_biplot.svg",
            svg.biplot(
                "Correspondence analysis biplot",
                f"Dimension 1 ({100 * shares[0]:.2f}% of inertia)",
                f"Dimension 2 ({100 * shares[1]:.2f}% of inertia)",
                [(n, *xy(c)) for n, c in zip(model.rows, model.row_coordinates.tolist())],
                [(n, *xy(c)) for n, c in zip(model.columns, model.column_coordinates.tolist())],
                [(n, *xy(c)) for n, c in zip(proj.names, proj.loadings.tolist())],
            ),
        )
    )
    return written


def _likert_table(records, config, out) -> Path:
    rows = []
    for q in config.questions:
        s = likert_summary(records, q)
        for b, m, sd, n in zip(s.burgers, s.mean.tolist(), s.sd.tolist(), s.count.tolist()):
            rows.append([q, b, n, m, sd])
    return write_csv(out / "likert_summary.csv", ["question", "burger_id", "n", "mean", "sd"], rows)


def cmd_correlate(survey_csv, tpa_csv, config: StudyConfig, out, alpha=None) -> list[Path]:
    alpha = config.significance_alpha if alpha is None else float(alpha)
    if not 0 < alpha < 1:
        raise ConfigError("alpha must lie in (0, 1)")
    records = load_survey(survey_csv, config)
    counts = tally_cata(records, config)
    burgers = list(counts.rows)
    tpa = _aligned_tpa(tpa_csv, burgers)
    attributes = [("cata", a, counts.column(a).astype(float)) for a in counts.columns]
    for a in config.likert_attributes:
        attributes.append(("likert", a, likert_summary(records, a).mean))
    family = len(PARAMETERS) * len(attributes)
    out = _out_dir(out)
    written = [_likert_table(records, config, out)]

    rows = []
    for p in PARAMETERS:
        for kind, a, values in attributes:
            try:
                res = pearson(tpa[p], values, alpha)
            except ZeroVariance:
                rows.append([p, kind, a, len(burgers), float("nan"), float("nan"), False, family, "zero variance"])
                continue
            rows.append([p, kind, a, res.n, res.r, res.p_value, res.significant, family, ""])
            if res.significant:
                name = f"scatter_{safe_name(p)}__{kind}_{safe_name(a)}.svg"
                label = "selections" if kind == "cata" else "mean rating"
                written.append(
                    svg.write(
                        out / name,
                        svg.scatter_fit(
                            f"{p} vs {a} ({kind})",
                            f"{p} [{UNITS[p]}]",
                            f"{a} ({label})",
                            burgers,
                            tpa[p].tolist(),
                            values.tolist(),
                            f"r = {res.r:.2f}, p = {res.p_value:.3g}",
                        ),
                    )
                )
    header = ["parameter", "kind", "attribute", "n", "r", "p_value", "significant", "family_size", "note"]
    written.insert(0, write_csv(out / "correlations.csv", header, rows))
    return written


# --------------------------------------------------------------------------- lmm


def cmd_lmm(survey_csv, config: StudyConfig, out, response: str, predictors, method="reml") -> list[Path]:
    records = load_survey(survey_csv, config)
    predictors = [p for p in predictors if p]
    for q in [response] + predictors:
        if q not in config.questions:
            raise ConfigError(f"unknown question {q!r}; expected one of {', '.join(config.questions)}")
    if not predictors:
        raise ConfigError("at least one predictor is required")
    if response in predictors or len(set(predictors)) != len(predictors):
        raise ConfigError("response and predictors must be distinct questions")
    out = _out_dir(out)
    written = []

    matrices = {q: ratings_matrix(records, q) for q in [response] + predictors}
    for q, m in matrices.items():
        z = zscore(m)
        written.append(
            write_csv(
                out / f"ratings_{safe_name(q)}.csv",
                ["participant_id", "burger_id", "value", "z"],
                zip(m.participant_ids, m.burger_ids, m.values.tolist(), z.values.tolist()),
            )
        )
    base = matrices[response]
    X = np.column_stack([matrices[p].values for p in predictors])
    fit = fit_lmm(
        np.array(base.participant_ids),
        X,
        base.values,
        method,
        predictor_names=predictors,
        response_name=response,
        standardize=True,
    )

    rows = [["coefficient", n, b, s] for n, b, s in zip(fit.names, fit.beta.tolist(), fit.se.tolist())]
    rows += [
        ["variance", "sigma_u2", fit.sigma_u2, ""],
        ["variance", "sigma2", fit.sigma2, ""],
        ["fit", "method", fit.method, ""],
        ["fit", "loglik", fit.loglik, ""],
        ["fit", "loglik_ols", fit.loglik_ols, ""],
        ["fit", "log_lambda", fit.log_lambda, ""],
        ["fit", "converged", fit.converged, ""],
        ["fit", "iterations", fit.iterations, ""],
        ["fit", "identifiable", fit.identifiable, ""],
        ["fit", "n_obs", fit.n_obs, ""],
        ["fit", "n_groups", len(fit.participants), ""],
        ["transform", response, fit.response_transform[0], fit.response_transform[1]],
    ]
    rows += [["transform", p, c, s] for p, (c, s) in zip(predictors, fit.predictor_transforms)]
    tag = safe_name(response)
    written.append(write_csv(out / f"lmm_{tag}.csv", ["section", "name", "value", "se"], rows))

    written.append(
        svg.write(
            out / f"lmm_{tag}_coefficients.svg",
            svg.coefficient_bars(f"{response}: standardized fixed effects", list(predictors), fit.beta[1:].tolist(), fit.se[1:].tolist()),
        )
    )

    # prediction surface on the raw rating scale: x = last predictor, one line per level of the first
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    means = X.mean(axis=0)
    xi = len(predictors) - 1
    xs = np.linspace(lo[xi], hi[xi], 25)
    levels = [lo[0], hi[0]] if xi > 0 else [None]
    if xi > 0 and hi[0] - lo[0] >= 2:
        levels.insert(1, float(np.round((lo[0] + hi[0]) / 2)))
    series, table = [], []
    for level in levels:
        grid = np.tile(means, (len(xs), 1))
        grid[:, xi] = xs
        label = response
        if level is not None:
            grid[:, 0] = level
            label = f"{predictors[0]} = {level:g}"
        pred = lmm_predict(fit, grid, raw=True, ci_level=config.ci_level)
        series.append((label, xs.tolist(), pred.mean.tolist(), pred.ci_low.tolist(), pred.ci_high.tolist()))
        for row, m, a, b in zip(grid.tolist(), pred.mean.tolist(), pred.ci_low.tolist(), pred.ci_high.tolist()):
            table.append(row + [m, a, b])
    header = list(predictors) + [f"{response}_mean", "ci_low", "ci_high"]
    written.append(write_csv(out / f"lmm_{tag}_surface.csv", header, table))
    others = "" if len(predictors) <= 2 else " (other predictors at their means)"
    written.append(
        svg.write(
            out / f"lmm_{tag}_surface.svg",
            svg.line_bands(
                f"Predicted {response}{others}", series, predictors[xi], response, header=header, rows=table
            ),
        )
    )
    return written


# --------------------------------------------------------------------------- report


def report_models(config: StudyConfig) -> list[tuple[str, list[str]]]:
    return [
        ("overall_liking", ["flavor_liking", "texture_liking"]),
        ("texture_liking", list(config.likert_attributes)),
    ]


def cmd_report(curves_dir, survey_csv, config: StudyConfig, out, method="reml", alpha=None) -> list[Path]:
    out = _out_dir(out)
    written = cmd_tpa(curves_dir, config, out)
    tpa_csv = out / "tpa_parameters.csv"
    for path in cmd_ca(survey_csv, tpa_csv, config, out) + cmd_correlate(survey_csv, tpa_csv, config, out, alpha):
        if path not in written:
            written.append(path)
    for response, predictors in report_models(config):
        for path in cmd_lmm(survey_csv, config, out, response, predictors, method):
            if path not in written:
                written.append(path)
    return written


# --------------------------------------------------------------------------- synth


def read_spec(path) -> dict[str, str]:
    """Flat ``key = value`` spec file."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        text = Path(path).read_text(encoding="utf-8")
        parser.read_string("[spec]\n" + text, source=str(path))
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"unreadable spec: {exc}", source=str(path)) from None
    return dict(parser["spec"])


def _floats(spec, key, default, count, source):
    raw = spec.get(key)
    try:
        values = [float(v) for v in raw.split(",")] if raw is not None else [default]
    except ValueError:
        raise ConfigError(f"{key} must be a number or comma-separated numbers", source=source) from None
    if len(values) == 1:
        values *= count
    if len(values) != count:
        raise ConfigError(f"{key} needs 1 or {count} values, got {len(values)}", source=source)
    return values


def _int(spec, key, default, source):
    try:
        return int(spec.get(key, default))
    except ValueError:
        raise ConfigError(f"{key} must be an integer", source=source) from None


_CURVE_KEYS = {
    "specimen_height", "strain_amplitude", "strain_rate", "specimen_diameter", "burgers", "samples",
    "peak_force_1", "cycle2_scale", "upstroke_ratio", "recovery", "noise_sd", "sample_rate", "seed",
}
_SURVEY_KEYS = {"participants", "burgers", "true_beta", "sigma_u", "sigma", "cata_probabilities", "seed"}


def _check_keys(spec, allowed, source):
    unknown = sorted(set(spec) - allowed)
    if unknown:
        raise ConfigError(f"unknown spec keys: {unknown}", source=source)


def cmd_synth_curve(spec_path, out, seed=None) -> list[Path]:
    spec = read_spec(spec_path)
    src = str(spec_path)
    _check_keys(spec, _CURVE_KEYS, src)
    if "specimen_height" not in spec:
        raise ConfigError("specimen_height is required", source=src)
    try:
        protocol = CompressionProtocol(
            specimen_height=float(spec["specimen_height"]),
            strain_amplitude=float(spec.get("strain_amplitude", -0.5)),
            strain_rate=float(spec.get("strain_rate", -0.25)),
            specimen_diameter=float(spec.get("specimen_diameter", 8.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid protocol value: {exc}", source=src) from None
    n_burgers = _int(spec, "burgers", 1, src)
    n_samples = _int(spec, "samples", 10, src)
    if n_burgers < 1 or n_samples < 1:
        raise ConfigError("burgers and samples must be positive", source=src)
    base_seed = _int(spec, "seed", 0, src) if seed is None else int(seed)
    per_burger = {
        key: _floats(spec, key, default, n_burgers, src)
        for key, default in (
            ("peak_force_1", 10.0),
            ("cycle2_scale", 1.0),
            ("upstroke_ratio", 1.0),
            ("recovery", 1.0),
            ("noise_sd", 0.0),
        )
    }
    sample_rate = _floats(spec, "sample_rate", 100.0, 1, src)[0]

    out = _out_dir(out)
    rng = make_rng(base_seed)
    written, truth = [], []
    width = len(str(n_samples))
    for j in range(n_burgers):
        burger = f"B{j + 1}"
        (out / "curves" / burger).mkdir(parents=True, exist_ok=True)
        for i in range(n_samples):
            sample = f"S{i + 1:0{max(width, 2)}d}"
            s = SyntheticCurveSpec(
                protocol,
                peak_force_1=per_burger["peak_force_1"][j],
                cycle2_scale=per_burger["cycle2_scale"][j],
                upstroke_ratio=per_burger["upstroke_ratio"][j],
                recovery=per_burger["recovery"][j],
                noise_sd=per_burger["noise_sd"][j],
                seed=int(rng.integers(0, 2**63 - 1)),
                sample_rate=sample_rate,
                burger_id=burger,
                sample_id=sample,
            )
            curve, expected = gen_curve(s)
            path = out / "curves" / burger / f"{sample}.csv"
            path.write_bytes(serialize_curve(curve))
            written.append(path)
            d = expected.as_dict()
            truth.append([burger, sample, s.seed] + [d[p] for p in PARAMETERS])
    written.append(write_csv(out / "truth.csv", ["burger_id", "sample_id", "seed"] + list(PARAMETERS), truth))
    cfg = out / "config.txt"
    cfg.write_text(format_config(StudyConfig(protocol=protocol)), encoding="utf-8", newline="")
    written.append(cfg)
    return written


def cmd_synth_survey(spec_path, out, config: StudyConfig | None = None, seed=None) -> list[Path]:
    spec = read_spec(spec_path)
    src = str(spec_path)
    _check_keys(spec, _SURVEY_KEYS, src)
    config = config or StudyConfig()
    for key in ("participants", "burgers"):
        if key not in spec:
            raise ConfigError(f"{key} is required", source=src)
    n_burgers = _int(spec, "burgers", 0, src)
    probs = spec.get("cata_probabilities", "0.3")
    try:
        rows = [[float(v) for v in r.split(",")] for r in probs.split(";") if r.strip()]
    except ValueError:
        raise ConfigError("cata_probabilities must be numbers (rows separated by ';')", source=src) from None
    cata = rows[0][0] if rows == [rows[0][:1]] and len(rows[0]) == 1 else np.array(rows)
    try:
        survey_spec = SyntheticSurveySpec(
            participants=_int(spec, "participants", 0, src),
            burgers=n_burgers,
            true_beta=tuple(_floats(spec, "true_beta", 0.0, 3, src)) if "true_beta" in spec else (0.5, 0.55, 0.3),
            sigma_u=_floats(spec, "sigma_u", 0.5, 1, src)[0],
            sigma=_floats(spec, "sigma", 0.5, 1, src)[0],
            cata_probabilities=cata,
            seed=_int(spec, "seed", 0, src) if seed is None else int(seed),
            config=config,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid spec: {exc}", source=src) from None
    records, truth = gen_survey(survey_spec)
    out = _out_dir(out)
    path = out / "survey.csv"
    path.write_bytes(serialize_survey(records, config))
    rows = [[f"beta_{n}", b] for n, b in zip(("intercept",) + LIKING_QUESTIONS[1:], truth.beta)]
    rows += [["sigma_u", truth.sigma_u], ["sigma", truth.sigma], ["seed", survey_spec.seed]]
    rows += [[f"u:{p}", u] for p, u in truth.u.items()]
    return [path, write_csv(out / "truth.csv", ["quantity", "value"], rows)]
