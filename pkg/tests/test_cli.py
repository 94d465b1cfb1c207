import json
import subprocess
import sys

import numpy as np
import pytest

from models import chain, copy_pair, independent_coins, or_gate, triple_copy, xor
from polytree import Factored, random_polytree
from polytree import io
from polytree.cli import main


@pytest.fixture
def write_model(tmp_path):
    def _write(model, name="m.json"):
        path = tmp_path / name
        io.write_model(model, path)
        return str(path)

    return _write


def run(argv, capsys=None):
    code = main([str(a) for a in argv])
    out = capsys.readouterr() if capsys else None
    return code, out


def learn(tmp_path, model_path, *extra):
    out = tmp_path / "result.json"
    code, _ = run(["learn", "--model", model_path, "-o", out, *extra])
    assert code == 0
    return json.loads(out.read_text())


# file formats


def test_model_json_round_trip(tmp_path, write_model):
    m = random_polytree(6, max_card=3, seed=1)
    back = io.read_model(write_model(m))
    assert back.names == m.names and back.parents == m.parents
    for a, b in zip(m.cpts, back.cpts):
        np.testing.assert_array_equal(a, b)


def test_model_json_layout_child_index_fastest(tmp_path, write_model):
    data = json.loads(open(write_model(or_gate())).read())
    assert data["parents"] == {"A": [], "B": ["A", "C"], "C": []}
    # parent assignment (A, C) in row-major order, child value fastest
    assert data["cpts"]["B"] == [1, 0, 0, 1, 0, 1, 0, 1]


def test_jpdf_and_csv_round_trip(tmp_path):
    m = or_gate()
    io.write_jpdf(Factored(m), tmp_path / "p.json")
    src = io.read_jpdf(tmp_path / "p.json")
    np.testing.assert_allclose(src.joint_table(), m.joint_table())
    io.write_csv(["A", "B"], [[0, 1], [1, 1]], tmp_path / "d.csv")
    ds = io.read_csv(tmp_path / "d.csv")
    assert ds.names == ("A", "B") and ds.total == 2


def test_jpdf_size_cap(tmp_path):
    path = tmp_path / "big.json"
    path.write_text(json.dumps({"variables": [{"name": f"V{i}", "cardinality": 2} for i in range(21)], "table": []}))
    code, out = run(["learn", "--jpdf", path, "-o", tmp_path / "r.json"])
    assert code == 2


# sample


def test_sample_is_deterministic(tmp_path, write_model):
    path = write_model(random_polytree(5, seed=3))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["sample", "--model", path, "-n", 1000, "--seed", 7, "-o", a])[0] == 0
    assert run(["sample", "--model", path, "-n", 1000, "--seed", 7, "-o", b])[0] == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "X0,X1,X2,X3,X4" and len(lines) == 1001


def test_sample_zero_is_a_usage_error(tmp_path, write_model, capsys):
    path = write_model(or_gate())
    with pytest.raises(SystemExit) as exc:
        main(["sample", "--model", path, "-n", "0", "-o", str(tmp_path / "x.csv")])
    assert exc.value.code == 1


def test_sample_missing_cpt_names_variable(tmp_path, capsys):
    data = io.model_to_dict(or_gate())
    del data["cpts"]["C"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    code, out = run(["sample", "--model", path, "-n", 5, "-o", tmp_path / "x.csv"], capsys)
    assert code == 1
    assert "'C'" in out.err


def test_malformed_json_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"variables": [\n  oops]}')
    code, out = run(["sample", "--model", path, "-n", 5, "-o", tmp_path / "x.csv"], capsys)
    assert code == 1 and "line 2" in out.err


# learn


def test_learn_or_gate(tmp_path, write_model):
    result = learn(tmp_path, write_model(or_gate()), "--oracle", "exact", "--epsilon", "1e-9")
    directed = io.result_directed(result)
    assert directed == {(0, 1), (2, 1)}
    assert result["basins"] == [[[0, 1], [2, 1]]]
    assert {e["state"] for e in result["edges"]} == {"directed"}


def test_learn_chain_needs_semantics(tmp_path, write_model):
    result = learn(tmp_path, write_model(chain()))
    assert io.result_undetermined(result) == {(0, 1), (1, 2)}
    assert sum("external semantics" in w for w in result["warnings"]) == 2


def test_learn_triple_copy_reports_ties(tmp_path, write_model):
    result = learn(tmp_path, write_model(triple_copy()))
    tie = [w for w in result["warnings"] if "ties" in w and "spanning tree" in w]
    assert tie and all(s in tie[0] for s in ("(0, 1)", "(0, 2)", "(1, 2)"))


def test_learn_is_byte_deterministic(tmp_path, write_model):
    path = write_model(random_polytree(7, max_card=3, seed=4))
    run(["learn", "--model", path, "--fit", "-o", tmp_path / "a.json"])
    run(["learn", "--model", path, "--fit", "-o", tmp_path / "b.json"])
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_learn_from_samples_deterministic(tmp_path, write_model):
    path = write_model(random_polytree(5, seed=8))
    run(["sample", "--model", path, "-n", 3000, "--seed", 1, "-o", tmp_path / "d.csv"])
    for name in ("a.json", "b.json"):
        code, _ = run(["learn", "--data", tmp_path / "d.csv", "--oracle", "gtest", "--alpha", "0.01",
                       "--fit", "--smoothing", "1.0", "-o", tmp_path / name])
        assert code == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_fitted_model_round_trips(tmp_path, write_model):
    m = random_polytree(8, max_card=3, seed=6)
    first = learn(tmp_path, write_model(m), "--fit")
    refit = tmp_path / "refit.json"
    refit.write_text(json.dumps(first["model"]))
    second = learn(tmp_path, str(refit))
    assert second["skeleton"] == first["skeleton"]
    assert second["edges"] == first["edges"]


def test_learn_with_override(tmp_path, write_model):
    result = learn(tmp_path, write_model(chain()), "--fit", "--orient", "C:B")
    fitted = io.model_from_dict(result["model"])
    assert fitted.edges == [(1, 0), (2, 1)]


def test_learn_rejects_contradicting_override(tmp_path, write_model, capsys):
    code, out = run(["learn", "--model", write_model(chain()), "--fit", "--orient", "A:B",
                     "--orient", "C:B", "-o", tmp_path / "r.json"], capsys)
    assert code == 2 and "dependent" in out.err


def test_learn_gtest_on_exact_input_is_data_error(tmp_path, write_model):
    code, _ = run(["learn", "--model", write_model(or_gate()), "--oracle", "gtest", "-o", tmp_path / "r.json"])
    assert code == 2


def test_learn_needs_two_variables(tmp_path):
    path = tmp_path / "one.json"
    path.write_text(json.dumps({"variables": [{"name": "A", "cardinality": 2}], "parents": {}, "cpts": {"A": [0.5, 0.5]}}))
    code, _ = run(["learn", "--model", path, "-o", tmp_path / "r.json"])
    assert code == 1


def test_learn_from_explicit_table(tmp_path):
    io.write_jpdf(Factored(or_gate()), tmp_path / "p.json")
    code, _ = run(["learn", "--jpdf", tmp_path / "p.json", "-o", tmp_path / "r.json", "--dot", tmp_path / "r.dot"])
    assert code == 0
    assert io.result_directed(json.loads((tmp_path / "r.json").read_text())) == {(0, 1), (2, 1)}
    assert "cluster" in (tmp_path / "r.dot").read_text()


# mi


@pytest.mark.parametrize(
    "model,args,expected",
    [
        (independent_coins(2), ["A", "B"], "0.000000"),
        (copy_pair(), ["A", "B"], "1.000000"),
        (xor(), ["A", "C", "--given", "B"], "1.000000"),
    ],
)
def test_mi_values(write_model, capsys, model, args, expected):
    code, out = run(["mi", "--model", write_model(model), *args], capsys)
    assert code == 0
    assert out.out.strip() == expected


def test_mi_from_csv(tmp_path, capsys):
    io.write_csv(["A", "B"], [[0, 0], [1, 1]] * 4, tmp_path / "d.csv")
    code, out = run(["mi", "--data", tmp_path / "d.csv", "A", "B"], capsys)
    assert out.out.strip() == "1.000000"


def test_mi_unknown_variable(write_model, capsys):
    code, out = run(["mi", "--model", write_model(or_gate()), "A", "Q"], capsys)
    assert code == 2 and "'Q'" in out.err


# eval


def test_eval_exact_learn_is_perfect(tmp_path, write_model, capsys):
    truth = write_model(random_polytree(9, max_card=3, seed=21), "truth.json")
    learn(tmp_path, truth)
    code, _ = run(["eval", "--result", tmp_path / "result.json", "--truth", truth, "-o", tmp_path / "rep.json"])
    assert code == 0
    rep = json.loads((tmp_path / "rep.json").read_text())
    assert rep["skeleton_f1"] == 1.0
    assert rep["orientation_accuracy"] == 1.0
    assert rep["undetermined_exact"] is True
    assert rep["reversed_edges"] == 0


def test_eval_inline_on_tiny_sample(tmp_path, write_model, capsys):
    truth = write_model(random_polytree(6, seed=2), "truth.json")
    run(["sample", "--model", truth, "-n", 10, "--seed", 0, "-o", tmp_path / "d.csv"])
    code, out = run(["eval", "--data", tmp_path / "d.csv", "--truth", truth], capsys)
    assert code == 0
    rep = json.loads(out.out)
    for key in ("skeleton_precision", "skeleton_recall", "skeleton_f1", "orientation_accuracy"):
        assert 0.0 <= rep[key] <= 1.0


def test_eval_rejects_renamed_truth(tmp_path, write_model):
    learn(tmp_path, write_model(or_gate()))
    data = io.model_to_dict(or_gate())
    data = json.loads(json.dumps(data).replace('"A"', '"Z"'))
    (tmp_path / "renamed.json").write_text(json.dumps(data))
    code, _ = run(["eval", "--result", tmp_path / "result.json", "--truth", tmp_path / "renamed.json"])
    assert code == 2


# dot


def test_dot_or_gate(tmp_path, write_model, capsys):
    learn(tmp_path, write_model(or_gate()))
    code, out = run(["dot", "--result", tmp_path / "result.json"], capsys)
    assert code == 0
    assert out.out.count("subgraph cluster") == 1
    assert '"A" -> "B";' in out.out and '"C" -> "B";' in out.out
    assert "dashed" not in out.out


def test_dot_chain(tmp_path, write_model, capsys):
    learn(tmp_path, write_model(chain()))
    code, out = run(["dot", "--result", tmp_path / "result.json"], capsys)
    assert out.out.count("style=dashed") == 2 and "dir=none" in out.out
    assert "cluster" not in out.out


def test_dot_single_node(tmp_path, capsys):
    path = tmp_path / "one.json"
    path.write_text(json.dumps({"variables": ["A"], "weights": [], "skeleton": [], "edges": [],
                                "basins": [], "warnings": []}))
    code, out = run(["dot", "--result", path], capsys)
    assert code == 0
    assert out.out == 'digraph polytree {\n  "A";\n}\n'


def test_dot_malformed_result(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"variables": ["A"]}))
    assert run(["dot", "--result", path])[0] == 1


def test_console_script_entry_point(tmp_path, write_model):
    path = write_model(copy_pair())
    proc = subprocess.run(
        [sys.executable, "-m", "polytree.cli", "mi", "--model", path, "A", "B"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout.strip() == "1.000000"
