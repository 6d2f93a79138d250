"""Run manifest: a flat JSON object of string keys and string values.

Keys
----
``manifest_version``, ``tool_version``, ``subcommand``, ``timestamp``
    run metadata; ``timestamp`` is the only field that changes between
    otherwise identical runs.
``config_path``
    path of the ``--config`` file, empty when none was given.
``input_path:<name>``
    path given for each input flag (``curves``, ``survey``, ``tpa``, ``spec``).
``input_sha256:<relpath>``
    content hash of every input file; curve files are keyed
    ``curves/<burger>/<sample>.csv``, other inputs by their flag name.
``output_sha256:<relpath>``
    content hash of every emitted file, relative to ``--out``.
``option:<name>``
    effective option values (``alpha``, ``method``, ``seed``, ...).
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = "1"


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def build_manifest(
    *,
    subcommand: str,
    tool_version: str,
    out,
    outputs,
    inputs: dict[str, object],
    config_path=None,
    options: dict[str, object] | None = None,
    timestamp: str | None = None,
) -> dict[str, str]:
    out = Path(out)
    data = {
        "manifest_version": MANIFEST_VERSION,
        "tool_version": tool_version,
        "subcommand": subcommand,
        "timestamp": timestamp or datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "config_path": "" if config_path is None else str(config_path),
    }
    if config_path is not None:
        data["input_sha256:config"] = sha256_file(config_path)
    for name, path in inputs.items():
        if path is None:
            continue
        path = Path(path)
        data[f"input_path:{name}"] = str(path)
        if path.is_dir():
            for file in sorted(path.glob("*/*.csv")):
                data[f"input_sha256:{name}/{file.parent.name}/{file.name}"] = sha256_file(file)
        elif path.is_file():
            data[f"input_sha256:{name}"] = sha256_file(path)
    for path in sorted({Path(p) for p in outputs}):
        data[f"output_sha256:{path.relative_to(out).as_posix()}"] = sha256_file(path)
    for name, value in (options or {}).items():
        if value is not None:
            data[f"option:{name}"] = str(value)
    return data


def write_manifest(data: dict[str, str], out) -> Path:
    path = Path(out) / MANIFEST_NAME
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="")
    return path
