"""Parsing and validation of rheometer curve files, survey exports and study configs.

Data rows are numbered from 1 in every diagnostic; the header line is not counted.
"""

from __future__ import annotations

import configparser
import csv
import io
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    ConfigError,
    DuplicatePair,
    InputError,
    MalformedHeader,
    NoInput,
    MissingColumn,
    NonMonotonicTime,
    NonNumericCell,
    OutOfRangeLikert,
    TooFewRows,
    UnknownCataAttribute,
)
from .tpa import CompressionProtocol

logger = logging.getLogger(__name__)

CURVE_HEADER = ("time_s", "force_N")
MIN_CURVE_ROWS = 16

LIKING_QUESTIONS = ("overall_liking", "flavor_liking", "texture_liking")
LIKING_RANGE = (1, 7)
ATTRIBUTE_RANGE = (1, 5)

DEFAULT_CATA_VOCABULARY = (
    "chewy",
    "sticky",
    "firm",
    "holds together",
    "fatty",
    "tough",
    "dry",
    "crumbly/grainy",
    "brittle",
    "springy",
    "gummy",
    "mushy",
    "crispy/crunchy",
)
DEFAULT_LIKERT_ATTRIBUTES = ("softness", "hardness", "fattiness", "moistness", "fibrousness")

_WS = re.compile(r"\s+")


def normalize_attribute(name: str) -> str:
    """Lowercase and collapse internal whitespace."""
    return _WS.sub(" ", name.strip().lower())


def _decode(data, source) -> str:
    if isinstance(data, str):
        text = data
    else:
        try:
            text = bytes(data).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InputError(f"file is not valid UTF-8: {exc}", source=source) from None
    return text.removeprefix("﻿")


# --------------------------------------------------------------------------- curves


@dataclass(frozen=True, eq=False)
class CurveFile:
    """One sample's force-time trace from a double-compression test."""

    burger_id: str
    sample_id: str
    time: np.ndarray
    force: np.ndarray

    def __post_init__(self):
        time = np.array(self.time, dtype=float)
        force = np.array(self.force, dtype=float)
        if time.ndim != 1 or time.shape != force.shape:
            raise InputError("time and force must be 1-D arrays of equal length")
        if len(time) < MIN_CURVE_ROWS:
            raise TooFewRows(f"curve has {len(time)} rows, need at least {MIN_CURVE_ROWS}")
        if not (np.all(np.isfinite(time)) and np.all(np.isfinite(force))):
            raise NonNumericCell("curve contains non-finite values")
        bad = np.flatnonzero(np.diff(time) <= 0)
        if bad.size:
            raise NonMonotonicTime("time is not strictly increasing", row=int(bad[0]) + 2)
        time.flags.writeable = False
        force.flags.writeable = False
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "force", force)

    @property
    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.time.tolist(), self.force.tolist()))

    def __len__(self):
        return len(self.time)

    def with_force(self, force) -> "CurveFile":
        return CurveFile(self.burger_id, self.sample_id, self.time, force)

    def with_time(self, time) -> "CurveFile":
        return CurveFile(self.burger_id, self.sample_id, time, self.force)


def _parse_float(cell: str, *, source, row, column) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise NonNumericCell(f"cannot parse {cell!r} as a number", source=source, row=row, column=column) from None
    if not math.isfinite(value):
        raise NonNumericCell(f"non-finite value {cell!r}", source=source, row=row, column=column)
    return value


def parse_curve_file(data, burger_id: str, sample_id: str, *, source=None) -> CurveFile:
    """Parse a ``time_s,force_N`` CSV into a validated :class:`CurveFile`."""
    text = _decode(data, source)
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(c.strip() for c in header) != CURVE_HEADER:
        raise MalformedHeader(
            f"expected header {','.join(CURVE_HEADER)!r}, got {','.join(header or [])!r}", source=source, row=0
        )
    times: list[float] = []
    forces: list[float] = []
    row = 0
    for cells in reader:
        if not cells or all(not c.strip() for c in cells):
            continue
        row += 1
        if len(cells) != 2:
            raise NonNumericCell(f"expected 2 cells, got {len(cells)}", source=source, row=row)
        t = _parse_float(cells[0], source=source, row=row, column="time_s")
        f = _parse_float(cells[1], source=source, row=row, column="force_N")
        if times and t <= times[-1]:
            raise NonMonotonicTime(
                f"time {t!r} does not exceed previous {times[-1]!r}", source=source, row=row, column="time_s"
            )
        times.append(t)
        forces.append(f)
    if row < MIN_CURVE_ROWS:
        raise TooFewRows(f"curve has {row} rows, need at least {MIN_CURVE_ROWS}", source=source)
    return CurveFile(str(burger_id), str(sample_id), np.array(times), np.array(forces))


def serialize_curve(curve: CurveFile) -> bytes:
    lines = [",".join(CURVE_HEADER)]
    lines.extend(f"{t!r},{f!r}" for t, f in curve.rows)
    return ("\n".join(lines) + "\n").encode("utf-8")


def load_curve_dir(path) -> list[CurveFile]:
    """Load ``<path>/<burger_id>/<sample_id>.csv`` files in sorted order."""
    root = Path(path)
    if not root.is_dir():
        raise NoInput("curve directory does not exist", source=str(root))
    curves = []
    for burger_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for file in sorted(burger_dir.glob("*.csv")):
            curves.append(parse_curve_file(file.read_bytes(), burger_dir.name, file.stem, source=str(file)))
    if not curves:
        raise NoInput("no <burger>/<sample>.csv curve files found", source=str(root))
    return curves


# --------------------------------------------------------------------------- config


@dataclass(frozen=True)
class StudyConfig:
    cata_vocabulary: tuple[str, ...] = DEFAULT_CATA_VOCABULARY
    likert_attributes: tuple[str, ...] = DEFAULT_LIKERT_ATTRIBUTES
    protocol: CompressionProtocol | None = None
    significance_alpha: float = 0.05
    ci_level: float = 0.95

    def __post_init__(self):
        for name in ("cata_vocabulary", "likert_attributes"):
            values = tuple(normalize_attribute(v) for v in getattr(self, name))
            if not values or any(not v for v in values):
                raise ConfigError(f"{name} must be a non-empty list of non-empty names")
            if len(set(values)) != len(values):
                raise ConfigError(f"{name} contains duplicates")
            object.__setattr__(self, name, values)
        clash = set(self.likert_attributes) & (set(LIKING_QUESTIONS) | {"participant_id", "burger_id", "cata"})
        if clash:
            raise ConfigError(f"likert attribute names clash with reserved columns: {sorted(clash)}")
        if not 0 < self.significance_alpha < 1:
            raise ConfigError("significance_alpha must lie in (0, 1)")
        if not 0 < self.ci_level < 1:
            raise ConfigError("ci_level must lie in (0, 1)")

    @property
    def questions(self) -> tuple[str, ...]:
        return LIKING_QUESTIONS + self.likert_attributes

    def require_protocol(self) -> CompressionProtocol:
        if self.protocol is None:
            raise ConfigError("config does not define a compression protocol (specimen_height is required)")
        return self.protocol


_PROTOCOL_KEYS = ("strain_amplitude", "strain_rate", "n_cycles", "specimen_height", "specimen_diameter")
_CONFIG_KEYS = {"cata_vocabulary", "likert_attributes", "significance_alpha", "ci_level", *_PROTOCOL_KEYS}


def parse_config(text: str, *, source=None) -> StudyConfig:
    """Parse a flat ``key = value`` config; list values are comma-separated."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        parser.read_string("[study]\n" + text, source=str(source or "<config>"))
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}", source=source) from None
    values = dict(parser["study"])
    unknown = sorted(set(values) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}", source=source)

    kwargs: dict = {}
    try:
        for key in ("cata_vocabulary", "likert_attributes"):
            if key in values:
                kwargs[key] = tuple(v for v in (s.strip() for s in values[key].split(",")) if v)
        for key in ("significance_alpha", "ci_level"):
            if key in values:
                kwargs[key] = float(values[key])
        if "specimen_height" in values:
            proto = {k: float(values[k]) for k in _PROTOCOL_KEYS if k in values}
            if "n_cycles" in proto:
                proto["n_cycles"] = int(proto["n_cycles"])
            kwargs["protocol"] = CompressionProtocol(**proto)
        elif any(k in values for k in _PROTOCOL_KEYS):
            raise ConfigError("protocol keys given without specimen_height", source=source)
        return StudyConfig(**kwargs)
    except ConfigError as exc:
        if exc.source is None:
            raise ConfigError(str(exc), source=source) from None
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid config value: {exc}", source=source) from None


def load_config(path) -> StudyConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", source=str(path)) from None
    return parse_config(text, source=str(path))


def format_config(config: StudyConfig) -> str:
    lines = [
        f"cata_vocabulary = {', '.join(config.cata_vocabulary)}",
        f"likert_attributes = {', '.join(config.likert_attributes)}",
        f"significance_alpha = {config.significance_alpha!r}",
        f"ci_level = {config.ci_level!r}",
    ]
    if config.protocol is not None:
        p = config.protocol
        lines += [
            f"strain_amplitude = {p.strain_amplitude!r}",
            f"strain_rate = {p.strain_rate!r}",
            f"n_cycles = {p.n_cycles}",
            f"specimen_height = {p.specimen_height!r}",
            f"specimen_diameter = {p.specimen_diameter!r}",
        ]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------- survey


@dataclass(frozen=True)
class SurveyRecord:
    """One participant's ratings of one burger."""

    participant_id: str
    burger_id: str
    overall_liking: int
    flavor_liking: int
    texture_liking: int
    attribute_ratings: Mapping[str, int] = field(default_factory=dict)
    cata_selections: frozenset = frozenset()

    def rating(self, question: str) -> int:
        if question in LIKING_QUESTIONS:
            return getattr(self, question)
        return self.attribute_ratings[question]


def _parse_likert(cell, bounds, *, source, row, column) -> int:
    text = (cell or "").strip()
    if not text:
        raise NonNumericCell("missing Likert value", source=source, row=row, column=column)
    try:
        value = int(text)
    except ValueError:
        raise NonNumericCell(f"Likert value {text!r} is not an integer", source=source, row=row, column=column) from None
    lo, hi = bounds
    if not lo <= value <= hi:
        raise OutOfRangeLikert(f"value {value} outside {lo}..{hi}", source=source, row=row, column=column)
    return value


def parse_survey_file(data, config: StudyConfig, *, source=None) -> list[SurveyRecord]:
    """Parse a survey export, one row per (participant, burger).

    Records are returned sorted by ``(participant_id, burger_id)`` so the
    result does not depend on row order in the file.
    """
    text = _decode(data, source)
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise MissingColumn("survey file is empty", source=source, column="participant_id")
    names = [normalize_attribute(h) for h in header]
    required = ("participant_id", "burger_id") + config.questions + ("cata",)
    for col in required:
        if col not in names:
            raise MissingColumn("required column missing", source=source, column=col)
    index = {name: names.index(name) for name in required}
    vocab = set(config.cata_vocabulary)

    records: dict[tuple[str, str], SurveyRecord] = {}
    row = 0
    for cells in reader:
        if not cells or all(not c.strip() for c in cells):
            continue
        row += 1
        if len(cells) < len(header):
            cells = cells + [""] * (len(header) - len(cells))
        pid = cells[index["participant_id"]].strip()
        bid = cells[index["burger_id"]].strip()
        for col, val in (("participant_id", pid), ("burger_id", bid)):
            if not val:
                raise InputError("empty identifier", source=source, row=row, column=col)
        liking = {
            q: _parse_likert(cells[index[q]], LIKING_RANGE, source=source, row=row, column=q) for q in LIKING_QUESTIONS
        }
        attrs = {
            a: _parse_likert(cells[index[a]], ATTRIBUTE_RANGE, source=source, row=row, column=a)
            for a in config.likert_attributes
        }
        tokens = set()
        for raw in cells[index["cata"]].split("|"):
            token = normalize_attribute(raw)
            if not token:
                continue
            if token not in vocab:
                raise UnknownCataAttribute(f"{token!r} is not in the CATA vocabulary", source=source, row=row, column="cata")
            tokens.add(token)
        key = (pid, bid)
        if key in records:
            raise DuplicatePair(f"participant {pid!r} rated burger {bid!r} twice", source=source, row=row)
        records[key] = SurveyRecord(pid, bid, attribute_ratings=attrs, cata_selections=frozenset(tokens), **liking)

    logger.info("parsed %d survey records from %s", len(records), source or "<bytes>")
    return [records[k] for k in sorted(records)]


def serialize_survey(records: Iterable[SurveyRecord], config: StudyConfig) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("participant_id", "burger_id") + config.questions + ("cata",))
    for rec in records:
        cata = "|".join(a for a in config.cata_vocabulary if a in rec.cata_selections)
        writer.writerow([rec.participant_id, rec.burger_id] + [rec.rating(q) for q in config.questions] + [cata])
    return buf.getvalue().encode("utf-8")


def load_survey(path, config: StudyConfig) -> list[SurveyRecord]:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read survey: {exc}", source=str(path)) from None
    return parse_survey_file(data, config, source=str(path))
