"""JSON round-tripping for the dense instances (UTF-8 files)."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

from .dialg import DialgebraInstance
from .exactlin import Field
from .structures import DenseStructure
from .trisystems import TrisystemInstance

__all__ = ["to_json", "from_json", "load", "dump"]


def to_json(obj) -> dict:
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, DenseStructure):
        f = obj.field
        return {
            "type": "structure",
            "dim": obj.dim,
            "scalar": f.to_json(),
            "ops": {k: f.encode(t) for k, t in obj.tensors.items()},
            "labels": list(obj.labels),
        }
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_json(data: Mapping):
    kind = data.get("type")
    if kind == "dialgebra":
        return DialgebraInstance.from_json(data)
    if kind == "trisystem":
        return TrisystemInstance.from_json(data)
    if kind == "structure":
        f = Field.from_json(data["scalar"])
        s = DenseStructure(f, data["dim"], {k: f.decode(v) for k, v in data["ops"].items()}, data.get("labels"))
        return s
    if kind == "embedding":
        return DialgebraInstance.from_json(data["algebra"])
    raise ValueError(f"unknown instance type {kind!r}")


def load(path) -> object:
    return from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def dump(obj, path) -> None:
    data = obj if isinstance(obj, dict) else to_json(obj)
    Path(path).write_text(json.dumps(data, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
