import json
import subprocess
import sys

import numpy as np
import pytest

from ranklab import cli, io
from ranklab.errors import DimensionMismatch, ProtocolError, ValidationError
from ranklab.generate import GeneratorConfig, generate_profiles, random_profile
from ranklab.profile import from_linear_orders, from_upper

ORDER_123 = from_linear_orders([(1, 2, 3)])
CYCLE = from_linear_orders([(1, 2, 3), (2, 3, 1), (3, 1, 2)])


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def order_file(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(io.dumps_profile(ORDER_123))
    return str(path)


def script(tmp_path, name, body):
    path = tmp_path / name
    path.write_text(f"#!{sys.executable}\nimport json, sys\n{body}\n")
    path.chmod(0o755)
    return str(path)


# --- formats ------------------------------------------------------------------------


def test_json_round_trip_bit_exact():
    for p in generate_profiles(GeneratorConfig(2, 6, 1, 4, "interior", seed=1), 100):
        back = io.loads_profile(io.dumps_profile(p))
        assert back.matrices.tobytes() == p.matrices.tobytes()


def test_json_schema():
    data = json.loads(io.dumps_profile(ORDER_123))
    assert data == {"n": 3, "m": 1, "matrices": [[[0, 1, 1], [0, 0, 1], [0, 0, 0]]]}
    with pytest.raises(DimensionMismatch):
        io.profile_from_dict({"n": 2, "m": 1, "matrices": data["matrices"]})
    with pytest.raises(ValidationError):
        io.loads_profile('{"n": 3}')
    with pytest.raises(ValidationError):
        io.loads_profile("not json")


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    p = random_profile(rng, 5, 3, "interior")
    paths = io.write_profile_csv(p, tmp_path / "p")
    back = io.read_profile(paths)
    assert np.abs(back.matrices - p.matrices).max() <= 1e-15


def test_csv_grammar(tmp_path):
    path = tmp_path / "a.csv"
    path.write_text("# individual 1\n0,0.25\n\n0.75,0\n")
    assert io.read_profile([path]).matrices[0, 1, 0] == 0.75
    path.write_text("0,0.25\n0.75\n")
    with pytest.raises(DimensionMismatch):
        io.read_profile([path])
    path.write_text("0,x\n1,0\n")
    with pytest.raises(ValidationError):
        io.read_profile([path])


def test_read_vector(tmp_path):
    a = tmp_path / "w.json"
    a.write_text("[0, 1, 2]")
    b = tmp_path / "w.txt"
    b.write_text("0, 1\n2")
    assert io.read_vector(a) == io.read_vector(b) == [0, 1, 2]


def test_parse_scores():
    assert io.parse_scores('{"scores": [1, 2.5]}', 2).tolist() == [1, 2.5]
    for bad in ("[1, 2]", '{"scores": [1]}', '{"scores": ["a", 1]}', "nope", '{"scores": [true, 1]}',
                '{"scores": [NaN, 1]}'):
        with pytest.raises(ProtocolError):
            io.parse_scores(bad, 2)


def test_paretian_json_round_trip():
    data = {"k": 2, "points": [[0.5, -0.5], [-0.5, 0.5]], "values": [0, 1]}
    pset = io.paretian_from_dict(data)
    again = io.paretian_from_dict(io.paretian_to_dict(pset))
    assert np.array_equal(again.points, pset.points) and (again.f_min, again.f_max) == (0, 1)
    with pytest.raises(DimensionMismatch):
        io.paretian_from_dict({"k": 3, "points": [[0, 1]], "values": [0]})


def test_run_report_round_trip(tmp_path):
    rep = io.RunReport(["check"], {"seed": 1, "trials": 5}, {"violation_count": 0}, 0.5)
    path = tmp_path / "r.json"
    rep.write(path)
    back = io.RunReport.read(path)
    assert back.config_hash == rep.config_hash
    assert back.results == rep.results
    assert io.RunReport(["x"], {"trials": 5, "seed": 1}).config_hash == rep.config_hash


# --- score --------------------------------------------------------------------------


def test_score_borda(order_file, capsys):
    code, out, _ = run(["score", "--method", "borda", "--input", order_file], capsys)
    assert code == 0 and json.loads(out) == {"scores": [2, 0, -2]}


def test_score_grs_matches_borda(order_file, capsys):
    code, out, _ = run(["score", "--method", "grs", "--eps", "0.5", "--input", order_file], capsys)
    assert code == 0 and json.loads(out)["scores"] == [2, 0, -2]


def test_score_zermelo_ford(order_file, capsys):
    code, _, err = run(["score", "--method", "zermelo", "--input", order_file], capsys)
    assert code == 3 and json.loads(err)["error"] == "FORD_CONDITION"


def test_score_validation_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2, "m": 1, "matrices": [[[0, 0.6], [0.3, 0]]]}')
    code, _, err = run(["score", "--method", "borda", "--input", str(bad)], capsys)
    assert code == 2 and json.loads(err)["error"] == "COMPLEMENTARITY"
    code, _, err = run(["score", "--method", "borda", "--input", str(tmp_path / "missing.json")], capsys)
    assert code == 2


def test_score_csv_and_weights(order_file, tmp_path, capsys):
    code, out, _ = run(["score", "--method", "borda", "--input", order_file, "--format", "csv"], capsys)
    assert out.splitlines() == ["alternative,score", "1,2", "2,0", "3,-2"]
    w = tmp_path / "w.json"
    w.write_text("[0, 0, 1]")
    code, out, _ = run(["score", "--method", "point", "--points", str(w), "--input", order_file], capsys)
    assert json.loads(out)["scores"] == [1, 0, 0]
    code, _, err = run(["score", "--method", "point", "--input", order_file], capsys)
    assert code == 2


def test_score_out_file(order_file, tmp_path, capsys):
    target = tmp_path / "s.json"
    code, out, _ = run(["score", "--method", "borda", "--input", order_file, "--out", str(target)], capsys)
    assert code == 0 and out == ""
    assert json.loads(target.read_text()) == {"scores": [2, 0, -2]}


def test_score_exec(order_file, tmp_path, capsys):
    prog = script(tmp_path, "count", 'p = json.load(sys.stdin)\nprint(json.dumps({"scores": list(range(p["n"]))}))')
    code, out, _ = run(["score", "--exec", prog, "--input", order_file], capsys)
    assert code == 0 and json.loads(out)["scores"] == [0, 1, 2]


def test_residual(tmp_path, capsys):
    prof = tmp_path / "two.json"
    prof.write_text(io.dumps_profile(from_upper(np.array([[[0, 0.75], [0, 0]]]))))
    s = tmp_path / "s.json"
    s.write_text("[0.75, 0.25]")
    code, out, _ = run(["residual", "--method", "zermelo", "--input", str(prof), "--scores", str(s)], capsys)
    assert code == 0 and json.loads(out)["max_abs"] == 0
    s.write_text("[0, 1]")
    code, _, err = run(["residual", "--method", "cowden", "--input", str(prof), "--scores", str(s)], capsys)
    assert code == 2 and json.loads(err)["error"] == "DOMAIN_VIOLATION"
    code, _, _ = run(["residual", "--method", "borda", "--input", str(prof), "--scores", str(s)], capsys)
    assert code == 2


# --- check --------------------------------------------------------------------------


def test_check_borda_passes(capsys, tmp_path):
    report = tmp_path / "rep.json"
    argv = ["check", "--axiom", "self-consistency", "--method", "borda", "--trials", "1000", "--seed", "7",
            "--out", str(report)]
    code, out, _ = run(argv, capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["violation_count"] == 0 and summary["checked"] == 1000
    saved = json.loads(report.read_text())
    assert saved["command"] == argv and saved["config"]["seed"] == 7
    # replaying the recorded command reproduces the results
    code, again, _ = run(saved["command"], capsys)
    assert json.loads(again) == summary


def test_check_external_constant_zero(capsys, tmp_path):
    prog = script(tmp_path, "constant_zero", 'p = json.load(sys.stdin)\nprint(json.dumps({"scores": [0] * p["n"]}))')
    report = tmp_path / "rep.json"
    code, out, _ = run(["check", "--axiom", "self-consistency", "--exec", prog, "--trials", "100", "--seed", "7",
                        "--out", str(report)], capsys)
    assert code == 1
    summary = json.loads(out)
    assert summary["violation_count"] > 0 and summary["witnesses"]
    assert json.loads(report.read_text())["results"]["violations"]


def test_check_malformed_external(capsys, tmp_path):
    prog = script(tmp_path, "broken", 'sys.stdin.read()\nprint("scores: none")')
    code, _, err = run(["check", "--axiom", "neutrality", "--exec", prog, "--trials", "3"], capsys)
    assert code == 4 and json.loads(err)["error"] == "PROTOCOL"
    crash = script(tmp_path, "crash", "sys.exit(3)")
    code, _, _ = run(["check", "--axiom", "neutrality", "--exec", crash, "--trials", "3"], capsys)
    assert code == 4


def test_check_reversed_borda_monotonicity(capsys):
    code, out, _ = run(["check", "--axiom", "monotonicity", "--method", "reversed-borda", "--trials", "50"], capsys)
    assert code == 1 and json.loads(out)["violation_count"] > 0


# --- other subcommands -----------------------------------------------------------


def test_kemeny_and_choice(tmp_path, capsys):
    path = tmp_path / "cyc.json"
    path.write_text(io.dumps_profile(CYCLE))
    code, out, _ = run(["kemeny", "--input", str(path)], capsys)
    assert json.loads(out) == {"medians": [[1, 2, 3], [2, 3, 1], [3, 1, 2]], "distance": 8}
    code, _, err = run(["kemeny", "--input", str(path), "--cap", "2"], capsys)
    assert code == 2 and json.loads(err)["error"] == "TOO_LARGE"
    code, out, _ = run(["choice", "--method", "closeness", "--input", str(path)], capsys)
    assert json.loads(out) == {"choice": [1, 2, 3]}
    path.write_text(io.dumps_profile(ORDER_123))
    code, out, _ = run(["choice", "--method", "borda", "--input", str(path)], capsys)
    assert json.loads(out) == {"choice": [1]}


def test_extend(tmp_path, capsys):
    pset = tmp_path / "p.json"
    pset.write_text('{"k": 2, "points": [[0.5, -0.5], [-0.5, 0.5]], "values": [0, 0]}')
    q = tmp_path / "q.json"
    q.write_text("[[0.6, 0.6], [0.5, -0.5]]")
    code, out, _ = run(["extend", "--paretian", str(pset), "--queries", str(q), "--cube"], capsys)
    assert json.loads(out) == {"values": [3.2, 0]}
    code, out, _ = run(["extend", "--paretian", str(pset), "--queries", str(q)], capsys)
    values = json.loads(out)["values"]
    assert values[1] == 0 and values[0] > 0
    pset.write_text('{"k": 2, "points": [[0, 0], [1, 1]], "values": [0, 0]}')
    code, _, err = run(["extend", "--paretian", str(pset), "--queries", str(q)], capsys)
    assert code == 2 and json.loads(err)["error"] == "NOT_PARETIAN"


def test_generate_deterministic(tmp_path, capsys):
    argv = ["generate", "--count", "5", "--seed", "11", "--mode", "crisp"]
    _, first, _ = run(argv, capsys)
    _, second, _ = run(argv, capsys)
    assert first == second
    for line in first.splitlines():
        p = io.loads_profile(line)
        assert set(np.unique(p.matrices)) <= {0.0, 0.5, 1.0}


def test_compare(tmp_path, capsys):
    a = tmp_path / "a.json"
    a.write_text(io.dumps_profile(ORDER_123))
    code, out, _ = run(["compare", "--method", "borda", "--input", str(a)], capsys)
    data = json.loads(out)
    assert code == 0 and data == {"majorizations": [], "violations": []}
    code, out, _ = run(["compare", "--method", "borda", "--input", str(a), "--other", str(a)], capsys)
    data = json.loads(out)
    assert code == 0 and data["violations"] == []
    assert {"i": 2, "j": 2, "strict": False, "score_i": 0, "score_j": 0} in data["majorizations"]
    code, out, _ = run(["compare", "--method", "constant-zero", "--input", str(a), "--other", str(a)], capsys)
    assert code == 1 and json.loads(out)["violations"]


def test_module_entry_point(order_file):
    done = subprocess.run([sys.executable, "-m", "ranklab", "score", "--method", "borda", "--input", order_file],
                          capture_output=True, text=True)
    assert done.returncode == 0 and json.loads(done.stdout) == {"scores": [2, 0, -2]}


def test_env_tolerance(order_file, monkeypatch, capsys):
    monkeypatch.setenv("RANKLAB_TOL", "5")
    code, out, _ = run(["choice", "--method", "borda", "--input", order_file], capsys)
    assert json.loads(out) == {"choice": [1, 2, 3]}
