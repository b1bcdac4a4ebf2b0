"""Command-line front end: subcommands, formats, exit codes."""
import json

from wlmpnn.cases import builtin_graph
from wlmpnn.cli import main
from wlmpnn.graphs import format_graph
from wlmpnn.mpnn import spec_to_json
from wlmpnn.cases import named_spec


def run(argv):
    return main(argv)


def test_wl_run_text_and_json(capsys):
    assert run(["wl", "run", "--graph", "fig1"]) == 0
    text = capsys.readouterr().out
    assert "stabilized_at: 3" in text
    assert run(["wl", "run", "--graph", "fig1", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["stabilized_at"] == 3
    assert payload["rounds"][1] == [0, 0, 1, 2, 2, 3]


def test_wl_run_on_graph_file(tmp_path, capsys):
    path = tmp_path / "graph.txt"
    path.write_text(format_graph(builtin_graph("g1")))
    assert run(["wl", "run", "--graph", str(path)]) == 0
    assert "stabilized_at" in capsys.readouterr().out


def test_mpnn_run_named_family(capsys):
    assert run(["mpnn", "run", "--graph", "fig1", "--spec", "gcn", "--rounds", "1"]) == 0
    out = capsys.readouterr().out
    assert "1/6*sqrt(6), 2/3" in out


def test_mpnn_run_spec_file(tmp_path, capsys):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec_to_json(named_spec("dgnn6", 3, rounds=2))))
    assert run(["mpnn", "run", "--graph", "fig1", "--spec", str(spec_path), "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["rounds"]) == 3


def test_compare_same_round_fails_with_witness(capsys):
    code = run(["compare", "--graph", "fig1", "--left", "gcn", "--right", "wl",
                "--shift", "0", "--rounds", "1"])
    assert code == 1
    out = capsys.readouterr().out
    assert "witness: round 1, vertices v4 and v5" in out


def test_compare_one_step_ahead_holds(capsys):
    code = run(["compare", "--graph", "fig1", "--left", "gcn", "--right", "wl",
                "--shift", "+1", "--rounds", "3"])
    assert code == 0
    assert "weaker-than" in capsys.readouterr().out


def test_compare_json_emit(tmp_path):
    out = tmp_path / "verdict.json"
    code = run(["compare", "--graph", "fig1", "--left", "gcn", "--right", "wl",
                "--shift", "0", "--rounds", "1", "--format", "json", "--emit", str(out)])
    assert code == 1
    payload = json.loads(out.read_text())
    assert payload["comparisons"][0]["first_violation"] == {"round": 1, "v": 4, "w": 5}


def test_synth_gnn_minus_json(tmp_path, capsys):
    out = tmp_path / "cert.json"
    code = run(["synth", "--graph", "fig1", "--target", "gnn-minus", "--sigma", "relu",
                "--rounds", "3", "--p", "1/2", "--format", "json", "--emit", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["all_equivalent_to_wl"] is True
    assert payload["p"] == "1/2"


def test_synth_dgnn6(capsys):
    code = run(["synth", "--graph", "g1", "--target", "dgnn6", "--sigma", "sign", "--rounds", "2"])
    assert code == 0
    assert "m_p: 0" in capsys.readouterr().out


def test_synth_dgnn6_on_uniform_path(capsys, tmp_path):
    path = tmp_path / "path5.txt"
    path.write_text("n 5\n" + "".join(f"v {v} 1: 1\n" for v in range(1, 6)) +
                    "e 1 2\ne 2 3\ne 3 4\ne 4 5\n")
    code = run(["synth", "--graph", str(path), "--target", "dgnn6", "--sigma", "relu",
                "--rounds", "3"])
    assert code == 0  # the clamp repair realizes the refinement partition
    assert "repair=clamp" in capsys.readouterr().out


def test_synth_dgnn6_reports_equivalence_gap(capsys, tmp_path):
    # two internally-torn degree classes on width-1 labels: no ReLU layer of
    # this form can separate them, so the certificate reports the gap
    path = tmp_path / "torn.txt"
    path.write_text("n 6\n" + "".join(f"v {v} 1: 1\n" for v in range(1, 7)) +
                    "e 1 4\ne 1 5\ne 2 4\ne 3 6\ne 4 5\ne 4 6\n")
    code = run(["synth", "--graph", str(path), "--target", "dgnn6", "--sigma", "relu",
                "--rounds", "2"])
    assert code == 1  # certificate exists but not every round is equivalent
    assert "equivalent=False" in capsys.readouterr().out


def test_cases_verify_and_list(capsys):
    assert run(["cases", "list"]) == 0
    assert "g2-dgnn34" in capsys.readouterr().out
    assert run(["cases", "verify", "--case", "g2-dgnn34", "--trials", "100", "--seed", "1"]) == 0
    assert "passed: True" in capsys.readouterr().out


def test_usage_errors_exit_2(capsys):
    assert run(["frobnicate"]) == 2
    assert run(["compare", "--graph", "fig1", "--left", "gcn", "--right", "wl",
                "--shift", "0", "--rounds", "1", "--bogus-flag"]) == 2
    assert run(["wl", "run", "--graph", "no-such-file"]) == 2
    capsys.readouterr()


def test_bad_graph_file_exit_2(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("n 2\nv 1 1: 1\nv 2 1: 1\ne 1 1\n")
    assert run(["wl", "run", "--graph", str(path)]) == 2
    assert "self-loop" in capsys.readouterr().err
