"""Canonical JSON and CSV emission for workbench reports."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import numpy as np

from .profiles import PerturbationParams
from .symbolic_kernel import Operator, WeightSet

INDENT = "  "


def format_float(value: float) -> str:
    """17 significant digits; integral values keep a '.0' so they parse back as floats."""
    if not math.isfinite(value):
        return "null"
    text = format(value, ".17g")
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def _emit(value: Any, depth: int, out: list[str]) -> None:
    if isinstance(value, np.generic):
        value = value.item()
    if value is None:
        out.append("null")
    elif isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(format_float(value))
    elif isinstance(value, str):
        out.append(json.dumps(value))
    elif isinstance(value, Mapping):
        if not value:
            out.append("{}")
            return
        pad = INDENT * (depth + 1)
        out.append("{\n")
        for i, key in enumerate(sorted(value, key=str)):
            if i:
                out.append(",\n")
            out.append(f"{pad}{json.dumps(str(key))}: ")
            _emit(value[key], depth + 1, out)
        out.append(f"\n{INDENT * depth}}}")
    elif isinstance(value, (list, tuple, np.ndarray)):
        items = list(value)
        if not items:
            out.append("[]")
            return
        pad = INDENT * (depth + 1)
        out.append("[\n")
        for i, item in enumerate(items):
            if i:
                out.append(",\n")
            out.append(pad)
            _emit(item, depth + 1, out)
        out.append(f"\n{INDENT * depth}]")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")


def canonical_json(payload: Any) -> str:
    """Sorted keys, two-space indent, fixed float format, trailing newline."""
    out: list[str] = []
    _emit(payload, 0, out)
    out.append("\n")
    return "".join(out)


def _csv_cell(value: Any) -> str:
    if isinstance(value, np.generic):
        value = value.item()
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ";".join(_csv_cell(v) for v in value)
    return str(value)


def csv_text(rows: Iterable[Mapping[str, Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({col: _csv_cell(row.get(col)) for col in columns})
    return buf.getvalue()


def write_text(path: str | Path, text: str) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text, encoding="utf-8", newline="\n")


@dataclass
class KernelReport:
    """Symbolic kernel of one operator, optionally with per-mode spectral reports."""

    params: PerturbationParams
    operator: Operator
    symbolic: WeightSet
    # SpectralReport.to_dict() payloads, in mode order
    numeric: list[dict] = field(default_factory=list)
    window: Optional[tuple[int, int]] = None

    def to_dict(self) -> dict:
        data = {
            "params": self.params.to_dict(),
            "operator": self.operator.value,
            "symbolic": self.symbolic.to_dict(),
            "numeric": list(self.numeric),
        }
        if self.window is not None:
            data["window"] = list(self.window)
        return data

    def rows(self) -> list[dict]:
        """One CSV row per mode: the symbolic decision and, when present, the numeric one."""
        numeric = {entry["n"]: entry for entry in self.numeric}
        if self.window is not None:
            modes = range(self.window[0], self.window[1] + 1)
        else:
            modes = sorted(numeric) or list(self.symbolic.weights)
        out = []
        for n in modes:
            entry = numeric.get(n, {})
            low_plus = entry.get("low_plus") or [None]
            low_minus = entry.get("low_minus") or [None]
            out.append(
                {
                    "n": n,
                    "operator": self.operator.value,
                    "symbolic": self.symbolic.contains(n),
                    "kernel_plus": entry.get("kernel_plus"),
                    "kernel_minus": entry.get("kernel_minus"),
                    "lambda0_plus": low_plus[0],
                    "lambda0_minus": low_minus[0],
                }
            )
        return out

    ROW_COLUMNS = ("n", "operator", "symbolic", "kernel_plus", "kernel_minus", "lambda0_plus", "lambda0_minus")

    def save(self, path: str | Path) -> None:
        write_text(path, canonical_json(self.to_dict()))
