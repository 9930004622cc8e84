import json
import sys
from pathlib import Path

import pytest

# Ensure the repository root is on path
sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from cylindex.cli import (
    EXIT_INDETERMINATE,
    EXIT_NON_FREDHOLM,
    EXIT_OK,
    EXIT_USAGE,
    UsageError,
    main,
    parse_ratios,
    parse_window,
    run,
)


def run_json(*argv):
    code, text = run(list(argv))
    assert code == EXIT_OK, text
    return json.loads(text)


def test_parse_helpers():
    assert parse_window("-1:6") == (-1, 6)
    assert parse_ratios("0, 1,3") == [0.0, 1.0, 3.0]
    for bad in ("5", "3:1", "a:b"):
        with pytest.raises(UsageError):
            parse_window(bad)
    with pytest.raises(UsageError):
        parse_ratios("")


def test_kernel_case_ii():
    data = run_json("kernel", "--m", "2", "--t", "1", "--eps2", "1")
    assert data["symbolic"] == {"variant": "finite", "weights": [2], "case": "II"}
    assert data["operator"] == "plus"
    assert data["window"] == [-4, 8]


def test_kernel_case_i_and_minus():
    data = run_json("kernel", "--m", "0", "--s", "1", "--eps1", "1")
    assert data["symbolic"]["variant"] == "all_integers"
    assert data["symbolic"]["case"] == "I"
    data = run_json("kernel", "--m", "0", "--s", "1", "--eps1", "1", "--operator", "minus")
    assert data["symbolic"]["variant"] == "empty"


def test_kernel_non_fredholm_exit_code():
    code, text = run(["kernel", "--m", "0"])
    assert code == EXIT_NON_FREDHOLM
    assert text.startswith("error:")


def test_kernel_numeric_rows_as_csv():
    code, text = run(
        ["kernel", "--m", "2", "--t", "1", "--n-min", "1", "--n-max", "3", "--numeric",
         "--output", "csv", "--R", "8", "--h", "0.02"]
    )
    assert code == EXIT_OK, text
    lines = text.splitlines()
    assert lines[0] == "n,operator,symbolic,kernel_plus,kernel_minus,lambda0_plus,lambda0_minus"
    assert [line.split(",")[:5] for line in lines[1:]] == [
        ["1", "plus", "false", "false", "false"],
        ["2", "plus", "true", "true", "false"],
        ["3", "plus", "false", "false", "false"],
    ]


def test_kernel_indeterminate_exit_code():
    code, text = run(["kernel", "--m", "2", "--t", "1", "--n-min", "2", "--n-max", "2", "--numeric",
                      "--tau-gap", "100"])
    assert code == EXIT_INDETERMINATE
    report = json.loads(text.split("\n", 1)[1])
    assert report["n"] == 2
    assert report["kernel_plus"] is None


def test_index_rr_loc_negative_window():
    data = run_json("index", "--scheme", "rr-loc", "--m", "3", "--window", "-1:6")
    assert data["character"]["multiplicities"] == [0, 0, 0, 0, 1, 0, 0, 0]


def test_index_transverse():
    data = run_json("index", "--scheme", "transverse", "--m", "3")
    assert not any(data["character"]["multiplicities"])
    data = run_json("index", "--scheme", "transverse", "--m", "0", "--window", "0:3")
    assert data["character"]["multiplicities"] == [1, 1, 1, 1]
    assert data["character"]["pattern"] == "all_integers"


def test_index_scheme_constraints():
    assert run(["index", "--scheme", "transverse", "--m", "0", "--eps1", "1", "--eps2", "1"])[0] == EXIT_USAGE
    assert run(["index", "--scheme", "transverse", "--m", "0", "--t", "1"])[0] == EXIT_USAGE
    assert run(["index", "--scheme", "rr-loc", "--m", "0", "--s", "1"])[0] == EXIT_USAGE


def test_sweep_csv():
    code, text = run(["sweep", "--m", "0", "--ratios", "0,1,3", "--output", "csv"])
    assert code == EXIT_OK
    assert text.splitlines() == ["ratio,kernel_dim,weights", "0.0,1,0", "1.0,1,0", "3.0,3,-1;0;1"]


def test_sweep_json():
    data = run_json("sweep", "--m", "1", "--ratios", "1")
    assert data["rows"] == [{"ratio": 1.0, "kernel_dim": 1, "weights": [2]}]
    assert run(["sweep", "--m", "1", "--ratios", ""])[0] == EXIT_USAGE
    code, text = run(["sweep", "--m", "1", "--ratios", "1", "--t", "0"])
    assert code == EXIT_USAGE
    assert "--t must be > 0" in text


def test_model_sphere():
    data = run_json("model", "--kind", "sphere", "--k", "5")
    assert data["model"]["name"] == "Sphere(5)"
    assert data["rr_loc"]["multiplicities"] == data["sections"]["multiplicities"]
    statuses = {level["n"]: level["status"] for level in data["levels"]}
    assert statuses[0] == "fixed_point" and statuses[2] == "regular" and statuses[7] == "outside_image"


def test_model_cylinder_contrast():
    data = run_json("model", "--kind", "cylinder", "--m", "3", "--window", "0:6")
    assert data["rr_loc"]["multiplicities"] == [0, 0, 0, 1, 0, 0, 0]
    assert data["transverse"]["multiplicities"] == [0] * 7


def test_spectrum_reports_end_fits():
    data = run_json("spectrum", "--m", "2", "--t", "1", "--n", "2", "--R", "8", "--h", "0.02")
    assert data["kernel_plus"] is True
    assert len(data["low_plus"]) == 5
    assert {fit["end"] for fit in data["end_fits"]} == {"minus_infinity", "plus_infinity"}


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["kernel"],
        ["kernel", "--m", "x"],
        ["kernel", "--m", "0", "--t", "1", "--h", "0.2"],
        ["kernel", "--m", "0", "--t", "1", "--n-min", "4", "--n-max", "1"],
        ["kernel", "--m", "0", "--t", "1", "--output", "xml"],
        ["model", "--kind", "torus"],
    ],
)
def test_bad_arguments_exit_one(argv):
    code, text = run(argv)
    assert code == EXIT_USAGE
    assert text.startswith("error:")


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# csv by default\noutput = csv\nR = 8\n", encoding="utf-8")
    code, text = run(["index", "--scheme", "rr-loc", "--m", "0", "--window", "0:1", "--config", str(cfg)])
    assert code == EXIT_OK
    assert text.splitlines()[0] == "n,multiplicity"
    data = run_json("index", "--scheme", "rr-loc", "--m", "0", "--window", "0:1", "--config", str(cfg),
                    "--output", "json")
    assert data["character"]["multiplicities"] == [1, 0]

    cfg.write_text("bogus = 1\n", encoding="utf-8")
    assert run(["index", "--scheme", "rr-loc", "--m", "0", "--config", str(cfg)])[0] == EXIT_USAGE


@pytest.mark.parametrize("suite", ["contrast", "quantization"])
def test_verify_suites_pass(suite, capsys):
    assert main(["verify", "--suite", suite]) == EXIT_OK
    captured = capsys.readouterr()
    assert json.loads(captured.out)["passed"] is True
    assert "FAIL" not in captured.err
    assert captured.err.count("PASS") >= 3


def test_main_writes_errors_to_stderr(capsys):
    assert main(["kernel", "--m", "0"]) == EXIT_NON_FREDHOLM
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "Fredholm" in captured.err


def test_short_t_flag_is_not_ambiguous():
    data = run_json("kernel", "--m", "2", "--s", "0", "--t", "1", "--eps1", "0", "--eps2", "1")
    assert data["symbolic"]["weights"] == [2]
    data = run_json("--tau-zero", "1e-7", "kernel", "--m", "2", "--t", "1", "--eps2", "1")
    assert data["symbolic"]["case"] == "II"
    code, text = run(["kernel", "--m", "0", "--t", "1", "--op", "minus"])
    assert code == EXIT_USAGE
    assert "--op" in text


def test_kernel_save_writes_report(tmp_path):
    path = tmp_path / "reports" / "kernel.json"
    code, text = run(["kernel", "--m", "2", "--t", "1", "--eps2", "1", "--save", str(path)])
    assert code == EXIT_OK
    assert path.read_text(encoding="utf-8") == text


def test_verify_single_check(capsys):
    assert main(["verify", "--suite", "contrast", "--check", "cylinder-zero"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert [c["name"] for c in data["checks"]] == ["contrast/cylinder-zero"]
    assert run(["verify", "--suite", "contrast", "--check", "bogus"])[0] == EXIT_USAGE


def test_web_flags_parsed_by_argparse(monkeypatch):
    calls = []
    monkeypatch.setattr("cylindex.web.run_web", lambda host, port: calls.append((host, port)))
    assert run(["--web", "--host", "0.0.0.0", "--port", "6060"]) == (EXIT_OK, "")
    assert run(["--web"]) == (EXIT_OK, "")
    assert calls == [("0.0.0.0", 6060), ("127.0.0.1", 5050)]
    code, text = run(["--web", "--port", "x"])
    assert code == EXIT_USAGE and "--port" in text
