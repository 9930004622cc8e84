import sys
from pathlib import Path

import pytest

# Ensure the repository root is on path
sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from cylindex.config import RunConfig
from cylindex.verify import SUITES, check_names, parameter_grid, run_checks, staircase


def test_check_registry():
    assert set(SUITES) == {"appendix-a", "quantization", "contrast"}
    names = check_names()
    assert "case-ii" in names and "holonomy-gate" in names and "cylinder-three" in names
    assert check_names("contrast") == ["cylinder-three", "cylinder-zero", "rr-loc-differs"]
    assert "oracle-agreement" in check_names("appendix-a")
    with pytest.raises(ValueError):
        check_names("everything")


def test_parameter_grid_excludes_unperturbed():
    grid = list(parameter_grid())
    assert all(p.s > 0 or p.t > 0 for p in grid)
    assert len(grid) == 5 * 15 * 16
    assert {p.eps1 for p in grid} == {0.0, 0.5, 1.0, 2.0}


def test_staircase():
    assert staircase(0, 3.0) == [-1, 0, 1]
    assert staircase(1, 1.0) == [2]
    assert staircase(1, 0.0) == [1]


@pytest.mark.parametrize("suite", ["quantization", "contrast"])
def test_fast_suites_pass(suite):
    results = run_checks(suite)
    assert results and all(r.passed for r in results), [r.to_dict() for r in results if not r.passed]


@pytest.mark.slow
def test_case_analysis_suite_passes():
    results = run_checks("appendix-a", RunConfig(jobs=4))
    assert len(results) == 11
    assert all(r.passed for r in results), [r.to_dict() for r in results if not r.passed]


def test_case_i_and_d_minus_numeric_checks_pass():
    config = RunConfig(R=8.0, h=0.02)
    names = ["case-i-symbolic", "case-i-numeric", "d-minus-empty"]
    results = run_checks("appendix-a", config, names=names)
    assert [r.name for r in results] == [f"appendix-a/{name}" for name in names]
    assert all(r.passed for r in results), [r.to_dict() for r in results if not r.passed]


def test_run_checks_rejects_unknown_names():
    with pytest.raises(ValueError):
        run_checks("contrast", names=["case-ii"])
