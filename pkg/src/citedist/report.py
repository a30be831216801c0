"""Deterministic JSON/CSV writers that stamp every file with its run config."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

TOOL = "citedist"


def _version() -> str:
    from . import __version__

    return __version__


@dataclass
class RunConfig:
    """Options of one CLI invocation, embedded in everything it writes."""

    command: str
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "tool": TOOL,
            "version": _version(),
            "command": self.command,
            "options": clean(self.options),
        }

    def header(self) -> str:
        return "config: " + json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def clean(obj: Any) -> Any:
    """JSON-safe copy: enums to values, numpy to python, non-finite to None."""
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {_key(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [clean(v) for v in items]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    return obj


def _key(k: Any) -> str:
    if isinstance(k, Enum):
        return str(k.value)
    if isinstance(k, tuple):
        return "|".join("" if v is None else str(v) for v in k)
    return str(k)


def dumps(payload: Any) -> str:
    return json.dumps(clean(payload), sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_json(path, payload: dict, config: RunConfig) -> Path:
    path = Path(path)
    body = dict(payload)
    body["run_config"] = config.to_dict()
    path.write_text(dumps(body), encoding="utf-8")
    return path


def _cell(v: Any) -> str:
    v = clean(v)
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[Any]], config: RunConfig) -> Path:
    """CSV whose first line is ``# config: {...}``."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {config.header()}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path
