"""Line-delimited JSON record files.

Line 1 is a header object (schema name and version, library version, the
config echo and a creation timestamp); every further line is one
:class:`ExperimentRecord`.  Keys are sorted and floats are written with
``repr`` precision, so ``parse(serialize(records)) == records`` exactly.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
from pathlib import Path
from typing import Any, Iterable

from .experiments import ExperimentRecord

SCHEMA = "tensor-denoise.records"
SCHEMA_VERSION = 1
# Fields left out of the determinism digest.
VOLATILE_HEADER = ("created",)
VOLATILE_RECORD = ("wall_time",)


def _version() -> str:
    from . import __version__
    return __version__


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def serialize(records: Iterable[ExperimentRecord], config: dict | None = None,
              created: str | None = None) -> str:
    header = {
        "schema": SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "library_version": _version(),
        "config": config or {},
        "created": created or _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    lines = [_dumps(header)] + [_dumps(r.to_dict()) for r in records]
    return "\n".join(lines) + "\n"


def parse(text: str) -> tuple[dict, list[ExperimentRecord]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty record file")
    header = json.loads(lines[0])
    if header.get("schema") != SCHEMA:
        raise ValueError(f"not a record file (schema {header.get('schema')!r})")
    if header.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {header.get('schema_version')}")
    return header, [ExperimentRecord.from_dict(json.loads(ln)) for ln in lines[1:]]


def write_records(path: str | Path, records: Iterable[ExperimentRecord],
                  config: dict | None = None) -> Path:
    path = Path(path)
    path.write_text(serialize(records, config), encoding="utf-8")
    return path


def read_records(path: str | Path) -> tuple[dict, list[ExperimentRecord]]:
    return parse(Path(path).read_text(encoding="utf-8"))


def stable_text(text: str) -> str:
    """The record file with timestamp and timing fields removed."""
    out = []
    for i, line in enumerate(ln for ln in text.splitlines() if ln.strip()):
        obj = json.loads(line)
        for key in VOLATILE_HEADER if i == 0 else VOLATILE_RECORD:
            obj.pop(key, None)
        out.append(_dumps(obj))
    return "\n".join(out) + "\n"


def digest(text: str) -> str:
    """SHA-256 of :func:`stable_text`; equal digests mean identical runs."""
    return hashlib.sha256(stable_text(text).encode("utf-8")).hexdigest()


def file_digest(path: str | Path) -> str:
    return digest(Path(path).read_text(encoding="utf-8"))
