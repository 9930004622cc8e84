import json
import math
import sys
from pathlib import Path

import numpy as np

# Ensure the repository root is on path
sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from cylindex.profiles import PerturbationParams
from cylindex.reports import KernelReport, canonical_json, csv_text, format_float
from cylindex.symbolic_kernel import Operator, WeightSet, kernel_weights


def test_format_float():
    assert format_float(1.0) == "1.0"
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(1e-6) == "9.9999999999999995e-07"
    assert format_float(1e20) == "1e+20"
    assert format_float(math.nan) == "null"
    assert format_float(-math.inf) == "null"


def test_canonical_json_layout():
    text = canonical_json({"b": [1, 2.0], "a": {"z": None, "y": True}, "c": []})
    assert text == (
        '{\n  "a": {\n    "y": true,\n    "z": null\n  },\n'
        '  "b": [\n    1,\n    2.0\n  ],\n  "c": []\n}\n'
    )


def test_canonical_json_is_stable_after_reparse():
    payload = {"low": [np.float64(1e-12), 0.3, 25.132741228718345], "n": np.int64(4), "name": "Sphere(5)"}
    text = canonical_json(payload)
    assert canonical_json(json.loads(text)) == text


def test_csv_text():
    rows = [{"n": 1, "ok": True, "weights": [-1, 0, 1], "x": 0.5, "missing": None}]
    text = csv_text(rows, ("n", "ok", "weights", "x", "missing"))
    assert text == "n,ok,weights,x,missing\n1,true,-1;0;1,0.5,\n"


def test_kernel_report_save(tmp_path):
    params = PerturbationParams(2, t=1, eps2=1)
    report = KernelReport(params, Operator.D_PLUS, kernel_weights(params), window=(0, 4))
    path = tmp_path / "out" / "kernel.json"
    report.save(path)
    text = path.read_text(encoding="utf-8")
    assert text == canonical_json(report.to_dict())
    data = json.loads(text)
    assert data["symbolic"] == WeightSet.finite([2], case="II").to_dict()
    assert data["window"] == [0, 4]
    assert [row["symbolic"] for row in report.rows()] == [False, False, True, False, False]
