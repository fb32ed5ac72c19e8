import pytest

from groupnet.cli import build_parser, main
from groupnet.graph import load_edge_list


def run(args):
    return main([str(a) for a in args])


@pytest.fixture
def cave(tmp_path):
    path = tmp_path / "g.edges"
    assert run(["generate", "--model", "caveman", "--cliques", 10, "--size", 5,
                "--out", path]) == 0
    return path


def test_generate_caveman(cave):
    g = load_edge_list(cave.read_text())
    assert (g.node_count, g.n_edges) == (50, 100)


def test_generate_prints_config(tmp_path, capsys):
    run(["generate", "--model", "random", "--seed", 4, "--out", tmp_path / "r.edges"])
    err = capsys.readouterr().err
    assert "'p': 0.08" in err and "seed = 4" in err


def test_groups_and_infer_deterministic(cave, tmp_path):
    m = tmp_path / "m.csv"
    assert run(["groups", "--graph", cave, "--multiplier", 2, "--p-clique", 0.8,
                "--out", m]) == 0
    outs = []
    for method in ("projection", "projection", "sdsm", "sdsm"):
        out = tmp_path / f"{method}{len(outs)}.edges"
        assert run(["infer", "--membership", m, "--method", method, "--nodes", cave,
                    "--out", out]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] and outs[2] == outs[3]


def test_infer_flags(cave, tmp_path):
    m = tmp_path / "m.csv"
    run(["groups", "--graph", cave, "--num-groups", 80, "--out", m])
    assert run(["infer", "--membership", m, "--alpha", 0.01, "--tail", "two_sided_split",
                "--pvalues", "refined-normal", "--correction", "holm",
                "--out", tmp_path / "x.edges"]) == 0


def test_cell(capsys):
    assert run(["cell", "--network", "caveman", "--multiplier", 1, "--p-clique", 1,
                "--method", "projection", "--reps", 3]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("network,multiplier") and out[1].startswith("caveman,1.0,1.0")


def test_experiment_reproducible(tmp_path):
    cfg = tmp_path / "d.cfg"
    cfg.write_text("networks = caveman, karate\ngroup_multipliers = 1, 2\n"
                   "p_values = 0.5, 1.0\nreplications = 3\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["experiment", "--config", cfg, "--seed", 42, "--threads", 1, "--out", a]) == 0
    assert run(["experiment", "--config", cfg, "--seed", 42, "--threads", 2, "--out", b]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "master_seed = 42" in (tmp_path / "a.csv.manifest.json").read_text()


def test_report(tmp_path):
    cfg = tmp_path / "d.cfg"
    cfg.write_text("networks = random, caveman, florentine, karate, tailor\n"
                   "group_multipliers = 1, 2, 5\np_values = 0.5, 0.8, 1.0\nreplications = 2\n")
    res = tmp_path / "r.csv"
    assert run(["experiment", "--config", cfg, "--out", res, "--threads", 1]) == 0
    assert run(["report", "--results", res, "--out-dir", tmp_path / "rep"]) == 0
    reg = (tmp_path / "rep" / "regression_sdsm.tsv").read_text().splitlines()
    assert reg[0] == "term\tB\tbeta" and reg[1].startswith("intercept")
    fig = (tmp_path / "rep" / "figure_long.csv").read_text().splitlines()
    assert len(fig) == 1 + 5 * 3 * 3 * 2 * 3


@pytest.mark.parametrize("argv", [[], ["bogus"], ["generate"], ["generate", "--model", "mars"],
                                  ["infer", "--membership"], ["generate", "--model", "random",
                                                              "--unknown", "1"]])
def test_usage_errors(argv, capsys):
    assert run(argv) == 1
    assert capsys.readouterr().err.strip()


def test_input_errors(tmp_path, capsys):
    assert run(["infer", "--membership", tmp_path / "missing.csv"]) == 2
    bad = tmp_path / "bad.edges"
    bad.write_text("1 1\n")
    assert run(["groups", "--graph", bad, "--num-groups", 3]) == 2
    assert run(["generate", "--model", "caveman", "--beta", 0.3]) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert all(line.startswith("input error") for line in err if not line.startswith("#"))


def test_runtime_failure(tmp_path):
    cfg = tmp_path / "d.cfg"
    cfg.write_text("networks = random\ngroup_multipliers = 1\np_values = 0.5\n"
                   "methods = sdsm\nreplications = 2\nsolver_max_iterations = 1\n")
    assert run(["experiment", "--config", cfg, "--threads", 1]) == 3


def test_help_documents_flags():
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    for name, p in sub.choices.items():
        text = p.format_help()
        for action in p._actions:
            if action.help and action.dest != "help":
                assert action.option_strings[0] in text
                assert action.help
