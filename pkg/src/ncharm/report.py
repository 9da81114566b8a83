"""Deterministic JSON reports.

Floats are written with 17 significant digits so values round-trip exactly;
non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

SCHEMA = "ncharm.report/1"


def _scalar(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return '"nan"'
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return format(x, ".17g")
    return None


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    s = _scalar(obj)
    if s is not None:
        return s
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps({"re": obj.real, "im": obj.imag}, indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(_scalar(v) is not None for v in obj):
            return "[" + ", ".join(_scalar(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass
class Report:
    command: str
    config: dict
    results: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)
    runtime_ms: float | None = None
    version: str = ""

    def add(self, name: str, value, source: str) -> None:
        self.results[name] = {"value": value, "source": source}

    def note(self, message: str, **details) -> None:
        self.diagnostics.append({"message": message, **details} if details else {"message": message})

    def to_json(self) -> str:
        return dumps({
            "schema": SCHEMA,
            "command": self.command,
            "version": self.version,
            "config": self.config,
            "results": self.results,
            "diagnostics": self.diagnostics,
            "runtime_ms": self.runtime_ms,
        }) + "\n"
