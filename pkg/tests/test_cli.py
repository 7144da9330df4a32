import json

import pytest

from bdli.cli import main


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_list_builtins(capsys):
    assert main(["list-builtins"]) == 0
    out = capsys.readouterr().out
    for name in ("drift2d", "banana", "transit"):
        assert name in out


def test_run_builtin_with_flags(tmp_path, capsys):
    out = tmp_path / "b.csv"
    rc = main(["run", "banana", "--steps", "50", "--out", str(out)])
    assert rc == 0
    assert out.is_file()
    assert (tmp_path / "b.summary.txt").is_file()
    text = capsys.readouterr().out
    assert "max_abs_err_H" in text


def test_run_config_file(tmp_path, capsys):
    cfg = write(tmp_path, {
        "builtin": "banana", "n_steps": 40,
        "output": str(tmp_path / "series.csv"),
    })
    assert main(["run", cfg]) == 0
    assert (tmp_path / "series.csv").is_file()


def test_run_method_override(tmp_path):
    out = tmp_path / "r.csv"
    rc = main(["run", "banana", "--steps", "30", "--method", "rk4",
               "--out", str(out)])
    assert rc == 0
    header, first = out.read_text().split("\n")[:2]
    assert first.endswith(",0")  # explicit method reports zero iterations


def test_run_rule_flag_retargets_dli(tmp_path, capsys):
    rc = main(["run", "banana", "--steps", "30", "--rule", "simpson",
               "--out", str(tmp_path / "s.csv")])
    assert rc == 0
    assert "method = dli:simpson" in capsys.readouterr().out


def test_run_h_and_tol_flags(tmp_path, capsys):
    rc = main(["run", "banana", "--steps", "30", "--h", "pi/20",
               "--tol", "1e-12", "--out", str(tmp_path / "h.csv")])
    assert rc == 0


def test_unknown_scenario_exit_2(capsys):
    assert main(["run", "spiral"]) == 2
    assert "config error" in capsys.readouterr().err


def test_broken_json_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{nope")
    assert main(["run", str(p)]) == 2


def test_invalid_scenario_exit_2(tmp_path):
    cfg = write(tmp_path, {"builtin": "banana", "n_steps": 0})
    assert main(["run", cfg]) == 2


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_nonconvergence_exit_3(tmp_path, capsys):
    cfg = write(tmp_path, {
        "name": "stiff",
        "field": {"name": "quartic_well", "params": {"strength": 50.0}},
        "x0": [2.0, 0.0, 0.0],
        "v0": [0.0, 0.0, 0.0],
        "h": 1.0,
        "n_steps": 5,
        "method": "bdli",
        "solver": {"max_iterations": 8},
        "output": str(tmp_path / "x.csv"),
    })
    assert main(["run", cfg]) == 3
    assert "solver failure" in capsys.readouterr().err


def test_singularity_exit_4(tmp_path, capsys):
    cfg = write(tmp_path, {
        "name": "axis",
        "field": "cylindrical_drift",
        "x0": [0.0, 0.0, 0.0],
        "v0": [0.0, 0.0, 0.0],
        "h": 0.1,
        "n_steps": 3,
        "method": "boris",
        "output": str(tmp_path / "x.csv"),
    })
    assert main(["run", cfg]) == 4
    assert "singularity" in capsys.readouterr().err


def test_convergence_subcommand(tmp_path, capsys):
    cfg = write(tmp_path, {
        "builtin": "banana",
        "n_steps": 100,
        "study": {"h_list": ["pi/10", "pi/20"], "reference_h": "pi/160"},
    })
    out = tmp_path / "study.txt"
    assert main(["convergence", cfg, "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "slope" in text
    assert out.is_file()


def test_convergence_default_ladder(capsys):
    assert main(["convergence", "banana", "--steps", "80"]) == 0
    assert "slope" in capsys.readouterr().out


def test_compare_subcommand(tmp_path, capsys):
    cfg = write(tmp_path, {
        "builtin": "banana",
        "n_steps": 60,
        "methods": ["bdli", "boris", "rk4"],
    })
    assert main(["compare", cfg, "--out", str(tmp_path / "cmp")]) == 0
    out = capsys.readouterr().out
    for m in ("bdli", "boris", "rk4"):
        assert m in out
    assert (tmp_path / "cmp" / "banana_compare.txt").is_file()


def test_compare_rejects_single_method(tmp_path):
    cfg = write(tmp_path, {"builtin": "banana", "n_steps": 10,
                           "methods": ["bdli"]})
    assert main(["compare", cfg]) == 2


def test_relative_errors_flag(tmp_path):
    rc = main(["run", "banana", "--steps", "30", "--relative-errors",
               "--out", str(tmp_path / "rel.csv")])
    assert rc == 0
