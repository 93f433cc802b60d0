import subprocess
import sys

import pytest

from qbnb.cli import main
from qbnb.tree import dump_tree

from conftest import toy_tree


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def mis_file(tmp_path, capsys):
    path = tmp_path / "mis.txt"
    assert run(capsys, "gen", "--kind", "mis", "--n", "8", "--seed", "2", "--out", str(path))[0] == 0
    return str(path)


def field(out, name):
    return next(l.split(":", 1)[1].strip() for l in out.splitlines() if l.startswith(name + ":"))


def test_gen_and_solvers_agree(capsys, mis_file):
    values = []
    for cmd in ("solve-classical", "solve-iqbb", "solve-iqbc"):
        code, out, _ = run(capsys, cmd, mis_file)
        assert code == 0
        values.append(field(out, "value"))
    assert len(set(values)) == 1
    code, out, _ = run(capsys, "solve-iqbb", "--problem", mis_file, "--estimator", "adversarial:3",
                       "--bound", "paper", "--charge-polylog", "off")
    assert code == 0 and field(out, "value") == values[0]
    rows = out.split("m,incumbent,bound1,bound2,best_bound,gap,cuts,charge\n")[1].splitlines()
    assert rows and rows[0].startswith("0,")


def test_solve_classical_history(capsys, tmp_path):
    path = tmp_path / "sk.txt"
    run(capsys, "gen", "--kind", "sk", "--n", "6", "--out", str(path))
    code, out, _ = run(capsys, "solve-classical", str(path), "--heuristic", "dfs")
    assert code == 0 and "step,incumbent,best_bound,gap" in out


def test_usage_errors(capsys, mis_file):
    assert run(capsys, "solve-iqbb")[0] == 1
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["solve-iqbb", mis_file, "--estimator", "noisy"])
    assert e.value.code == 1
    assert run(capsys, "solve-iqbc", mis_file, "--cuts", "-1")[0] == 1


def test_instance_errors(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("kind sk\nn 2\n[J]\n0 1\n5 0\n")
    assert run(capsys, "solve-iqbb", str(bad))[0] == 2
    assert run(capsys, "solve-classical", str(tmp_path / "missing.txt"))[0] == 2
    assert run(capsys, "gen", "--kind", "sk", "--n", "1", "--out", str(tmp_path / "x"))[0] == 2
    sk = tmp_path / "sk.txt"
    run(capsys, "gen", "--kind", "sk", "--n", "4", "--out", str(sk))
    assert run(capsys, "solve-iqbc", str(sk), "--cuts", "2")[0] == 1
    assert run(capsys, "solve-iqbc", str(sk), "--cuts", "0")[0] == 0


def test_subtree_check(capsys, tmp_path):
    path = tmp_path / "toy.tree"
    with open(path, "w") as fh:
        dump_tree(toy_tree(), fh)
    code, out, _ = run(capsys, "subtree-check", "--tree", str(path), "--m", "2")
    assert code == 0 and out.splitlines()[1].endswith("True")
    code, out, _ = run(capsys, "subtree-check", "--trees", "5", "--mode", "adversarial:4")
    assert code == 0 and "failures 0" in out
    assert run(capsys, "subtree-check", "--tree", str(path), "--m", "-1")[0] == 1


def test_bench_fit_report(capsys, tmp_path):
    cfg = tmp_path / "sweep.cfg"
    csv_path = tmp_path / "out.csv"
    cfg.write_text(f"kind = sk\nn_min = 4\nn_max = 8\nn_step = 2\nseeds = 3\nout = {csv_path}\n")
    code, _, err = run(capsys, "bench", "--config", str(cfg))
    assert code == 0 and "9 records, 0 failures" in err
    code, out, _ = run(capsys, "fit", str(csv_path))
    assert code == 0 and "alpha:" in out and "projected alpha/2:" in out
    code, out, _ = run(capsys, "report", str(csv_path))
    assert code == 0 and "spearman" in out and "reference alpha (gurobi 0.494, cplex 0.513)" in out


def test_bench_empty_grid_and_bad_config(capsys, tmp_path):
    code, out, _ = run(capsys, "bench", "--n-min", "10", "--n-max", "8")
    assert code == 0 and out.strip() == "kind,n,seed,heuristic,eps,solver,Q,d_max,charged_quantum,value,wall_ms"
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("speed = 11\n")
    assert run(capsys, "bench", "--config", str(cfg))[0] == 1
    assert run(capsys, "bench", "--solver", "quantum", "--n-max", "4", "--n-min", "4")[0] == 1


def test_fit_needs_three_sizes(capsys, tmp_path):
    csv_path = tmp_path / "two.csv"
    run(capsys, "bench", "--n-min", "4", "--n-max", "6", "--seeds", "2", "--out", str(csv_path))
    assert run(capsys, "fit", str(csv_path))[0] == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "qbnb", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "subtree-check" in r.stdout
