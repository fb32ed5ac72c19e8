"""``groupnet`` command line.

Exit codes: 0 success, 1 usage error, 2 bad input, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .experiment import (
    METHODS, CellFailure, ExperimentDesign, cell_seed, default_threads, design_to_config,
    parse_config, read_results_csv, results_csv, run_cell, run_design,
)
from .generators import ALL_KINDS, EMPIRICAL_KINDS, DEFAULT_PARAMS, DatasetError, NetworkSpec
from .graph import load_edge_list, save_edge_list
from .groups import (
    NOISE_MODELS, REPLACEMENT_POOLS, GroupGenSpec, generate_groups, read_membership_csv,
    write_membership_csv,
)
from .projection import unweighted_projection
from .regression import PREDICTORS, fit_regression
from .sdsm import CORRECTIONS, TAILS, NullModelError, SdsmConfig, sdsm

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _note(text: str) -> None:
    for line in text.rstrip("\n").splitlines():
        print(f"# {line}", file=sys.stderr)


def _add_sdsm_flags(p: argparse.ArgumentParser) -> None:
    d = SdsmConfig()
    p.add_argument("--alpha", type=float, default=None,
                   help=f"significance level for SDSM edges (default {d.alpha})")
    p.add_argument("--tail", choices=TAILS, default=None,
                   help=f"tail convention (default {d.tail})")
    p.add_argument("--pvalues", choices=("exact", "refined-normal", "auto"), default=None,
                   help="p-value engine; auto is exact up to 1024 groups (default auto)")
    p.add_argument("--correction", choices=CORRECTIONS, default=None,
                   help=f"multiple-comparison correction (default {d.multiple_comparisons})")


def _sdsm_overrides(args) -> dict:
    kw = {}
    if args.alpha is not None:
        kw["alpha"] = args.alpha
    if args.tail is not None:
        kw["tail"] = args.tail
    if args.pvalues is not None:
        kw["pvalue_method"] = args.pvalues.replace("-", "_")
    if args.correction is not None:
        kw["multiple_comparisons"] = args.correction
    return kw


# --- generate -------------------------------------------------------------

_GEN_FLAGS = {
    # flag dest -> (model, param)
    "n": {"random": "n", "small_world": "n", "scale_free": "n"},
    "edge_p": {"random": "p"},
    "k": {"small_world": "k"},
    "beta": {"small_world": "beta"},
    "m": {"scale_free": "m"},
    "cliques": {"caveman": "n_cliques"},
    "size": {"caveman": "clique_size"},
    "connected": {"caveman": "connected"},
    "core": {"core_periphery": "core_n"},
    "periphery": {"core_periphery": "periph_n"},
    "core_density": {"core_periphery": "core_density"},
}


def _network_spec(model: str, args) -> NetworkSpec:
    if model in EMPIRICAL_KINDS:
        used = [f for f in _GEN_FLAGS if getattr(args, f, None) not in (None, False)]
        if used:
            raise ValueError(f"empirical network {model!r} takes no generator flags")
        return NetworkSpec(model)
    params = dict(DEFAULT_PARAMS[model])
    for dest, targets in _GEN_FLAGS.items():
        val = getattr(args, dest, None)
        if val is None or (val is False and dest == "connected"):
            continue
        if model not in targets:
            raise ValueError(f"--{dest.replace('_', '-')} does not apply to model {model!r}")
        params[targets[model]] = val
    return NetworkSpec(model, params)


def _add_gen_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("generator parameters (defaults: 50 nodes, about 100 edges)")
    g.add_argument("--n", type=int, help="node count for random, small_world, scale_free (50)")
    g.add_argument("--edge-p", dest="edge_p", type=float, help="random: edge probability (0.08)")
    g.add_argument("--k", type=int, help="small_world: lattice neighbours (4)")
    g.add_argument("--beta", type=float, help="small_world: rewiring probability (0.05)")
    g.add_argument("--m", type=int, help="scale_free: edges added per step (2)")
    g.add_argument("--cliques", type=int, help="caveman: number of caves (10)")
    g.add_argument("--size", type=int, help="caveman: cave size (5)")
    g.add_argument("--connected", action="store_true",
                   help="caveman: link caves into a ring (default disconnected)")
    g.add_argument("--core", type=int, help="core_periphery: core size (10)")
    g.add_argument("--periphery", type=int, help="core_periphery: periphery size (40)")
    g.add_argument("--core-density", dest="core_density", type=float,
                   help="core_periphery: core density (0.85)")


def cmd_generate(args) -> int:
    spec = _network_spec(args.model, args)
    _note(f"model = {spec.kind}\nparams = {spec.params}\nseed = {args.seed}")
    g = spec.build(np.random.default_rng(args.seed))
    _emit(save_edge_list(g), args.out)
    return EXIT_OK


# --- groups ---------------------------------------------------------------

def _read_graph(path: str):
    return load_edge_list(Path(path).read_text())


def cmd_groups(args) -> int:
    g = _read_graph(args.graph)
    if (args.num_groups is None) == (args.multiplier is None):
        raise UsageError("groups: give exactly one of --num-groups or --multiplier")
    n_groups = args.num_groups
    if n_groups is None:
        n_groups = max(1, int(round(args.multiplier * g.node_count)))
    spec = GroupGenSpec(n_groups, args.p_clique, args.min_clique_size, args.replacement,
                        args.noise)
    _note(f"graph = {args.graph}\nnum_groups = {spec.num_groups}\np_clique = {spec.p_clique}\n"
          f"min_clique_size = {spec.min_clique_size}\nreplacement = {spec.replacement}\n"
          f"noise = {spec.noise}\nseed = {args.seed}")
    b = generate_groups(g, spec, np.random.default_rng(args.seed))
    if b.pool_exhausted:
        _note(f"warning: {b.pool_exhausted} groups kept clique members for lack of outsiders")
    b = replace(b, agent_labels=g.labels)
    _emit(write_membership_csv(b), args.out)
    return EXIT_OK


# --- infer ----------------------------------------------------------------

def cmd_infer(args) -> int:
    labels = None
    if args.nodes is not None:
        ng = _read_graph(args.nodes)
        labels = tuple(ng.label_of(i) for i in range(ng.node_count))
    b = read_membership_csv(Path(args.membership).read_text(), agent_labels=labels)
    if args.method == "projection":
        _note(f"method = projection\nmembership = {args.membership}")
        inferred = unweighted_projection(b)
    else:
        cfg = SdsmConfig(**_sdsm_overrides(args))
        _note(f"method = sdsm\nmembership = {args.membership}\nalpha = {cfg.alpha}\n"
              f"tail = {cfg.tail}\npvalues = {cfg.pvalue_method}\n"
              f"correction = {cfg.multiple_comparisons}")
        res = sdsm(b, cfg)
        _note(f"pvalue_engine = {res.engine}")
        inferred = res.backbone
    inferred = replace(inferred, labels=b.agent_labels)
    _emit(save_edge_list(inferred), args.out)
    return EXIT_OK


# --- cell / experiment ----------------------------------------------------

def _design_from_args(args) -> ExperimentDesign:
    base = ExperimentDesign()
    if getattr(args, "config", None):
        base = parse_config(Path(args.config).read_text(), base)
    sd = replace(base.sdsm, **_sdsm_overrides(args))
    top = {}
    if args.seed is not None:
        top["master_seed"] = args.seed
    if args.reps is not None:
        top["replications"] = args.reps
    return replace(base, sdsm=sd, **top)


def cmd_cell(args) -> int:
    design = _design_from_args(args)
    spec = next((s for s in design.networks if s.kind == args.network),
                NetworkSpec.default(args.network))
    if args.connected:
        if spec.kind != "caveman":
            raise ValueError("--connected applies to caveman only")
        spec = NetworkSpec("caveman", {**spec.params, "connected": True})
    seed = cell_seed(design.master_seed, spec.kind, args.multiplier, args.p_clique)
    _note(design_to_config(replace(design, networks=(spec,), methods=(args.method,),
                                   group_multipliers=(args.multiplier,),
                                   p_values=(args.p_clique,))))
    r = run_cell(spec, args.multiplier, args.p_clique, args.method, design.replications, seed,
                 design.sdsm, design.min_clique_size, design.replacement, noise=design.noise)
    _emit(results_csv([r]), args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    design = _design_from_args(args)
    threads = args.threads or default_threads()
    _note(design_to_config(design) + f"threads = {threads}")
    if args.out is None:
        rows = list(run_design(design, threads))
        sys.stdout.write(results_csv(rows))
    else:
        for r in run_design(design, threads, args.out):
            if r.aborted:
                _note(f"{r.network} x{r.multiplier} p={r.p_clique} {r.method}: "
                      f"{r.aborted} aborted replications")
    return EXIT_OK


# --- report ---------------------------------------------------------------

def _regression_table(rows, method, sep) -> str:
    s = fit_regression(rows, method)
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=sep, lineterminator="\n")
    w.writerow(["term", "B", "beta"])
    for name, b, beta in s.as_rows():
        w.writerow([name, repr(float(b)), "" if np.isnan(beta) else repr(float(beta))])
    w.writerow(["r_squared", repr(s.r_squared), ""])
    w.writerow(["n_obs", s.n_obs, ""])
    return buf.getvalue()


def _figure_long(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["network", "method", "multiplier", "p_clique", "metric", "value", "sd", "reps"])
    for r in rows:
        for metric in ("r", "kappa", "jaccard"):
            w.writerow([r["network"], r["method"], repr(r["multiplier"]), repr(r["p_clique"]),
                        metric, repr(r[f"mean_{metric}"]), repr(r[f"sd_{metric}"]), r["reps"]])
    return buf.getvalue()


def cmd_report(args) -> int:
    rows = read_results_csv(Path(args.results).read_text())
    if not rows:
        raise ValueError(f"{args.results}: no result rows")
    sep = "\t" if args.format == "tsv" else ","
    methods = [m for m in METHODS if any(r["method"] == m for r in rows)]
    outdir = Path(args.out_dir) if args.out_dir else None
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
    _note(f"results = {args.results}\npredictors = {', '.join(PREDICTORS)}\n"
          f"outcome = mean_r\nunit = cell means")
    fig = _figure_long(rows)
    if outdir is None:
        sys.stdout.write("## cells\n" + fig)
    else:
        (outdir / "figure_long.csv").write_text(fig)
    failed = []
    for m in methods:
        try:
            table = _regression_table(rows, m, sep)
        except ValueError as exc:
            failed.append(f"{m}: {exc}")
            continue
        if outdir is None:
            sys.stdout.write(f"\n## regression {m}\n{table}")
        else:
            (outdir / f"regression_{m}.{args.format}").write_text(table)
    if failed:
        raise ValueError("regression not identified; " + "; ".join(failed))
    return EXIT_OK


# --- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="groupnet", description="Infer networks from observed groups.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a ground-truth edge list")
    g.add_argument("--model", required=True, choices=ALL_KINDS, help="network model or dataset")
    _add_gen_flags(g)
    g.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    g.add_argument("--out", default=None, help="output edge list (stdout if omitted)")
    g.set_defaults(func=cmd_generate)

    gr = sub.add_parser("groups", help="synthesize observed groups from a graph")
    gr.add_argument("--graph", required=True, help="input edge list")
    gr.add_argument("--num-groups", type=int, default=None, help="number of groups G")
    gr.add_argument("--multiplier", type=float, default=None, help="G as a multiple of node count")
    gr.add_argument("--p-clique", type=float, default=1.0, help="clique fidelity p (default 1.0)")
    gr.add_argument("--min-clique-size", type=int, default=2, help="smallest source clique (default 2)")
    gr.add_argument("--replacement", choices=REPLACEMENT_POOLS, default="outside_clique",
                    help="pool that replacement members come from (default outside_clique)")
    gr.add_argument("--noise", choices=NOISE_MODELS, default="per_slot",
                    help="per_slot replaces members one by one; per_group swaps the whole group (default per_slot)")
    gr.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    gr.add_argument("--out", default=None, help="output membership CSV (stdout if omitted)")
    gr.set_defaults(func=cmd_groups)

    i = sub.add_parser("infer", help="infer a network from a membership CSV")
    i.add_argument("--membership", required=True, help="agent,group CSV")
    i.add_argument("--method", choices=METHODS, default="sdsm", help="inference method (default sdsm)")
    i.add_argument("--nodes", default=None,
                   help="edge list fixing the agent set and order (keeps agents without groups)")
    _add_sdsm_flags(i)
    i.add_argument("--out", default=None, help="output edge list (stdout if omitted)")
    i.set_defaults(func=cmd_infer)

    c = sub.add_parser("cell", help="run one experimental condition")
    c.add_argument("--network", required=True, choices=ALL_KINDS, help="truth network")
    c.add_argument("--multiplier", type=float, required=True, help="groups per node")
    c.add_argument("--p-clique", type=float, required=True, help="clique fidelity p")
    c.add_argument("--method", choices=METHODS, required=True, help="inference method")
    c.add_argument("--reps", type=int, default=None, help="replications (config value or 1000)")
    c.add_argument("--seed", type=int, default=None, help="master seed (config value or 0)")
    c.add_argument("--connected", action="store_true", help="use the connected caveman variant")
    c.add_argument("--config", default=None, help="design config file for shared settings")
    _add_sdsm_flags(c)
    c.add_argument("--out", default=None, help="output CSV (stdout if omitted)")
    c.set_defaults(func=cmd_cell)

    e = sub.add_parser("experiment", help="run a factorial design")
    e.add_argument("--config", default=None, help="design config file (defaults: full design)")
    e.add_argument("--seed", type=int, default=None, help="master seed, overrides the config")
    e.add_argument("--reps", type=int, default=None, help="replications, overrides the config")
    e.add_argument("--threads", type=int, default=None,
                   help=f"worker processes (default: {default_threads()} on this machine)")
    _add_sdsm_flags(e)
    e.add_argument("--out", default=None,
                   help="results CSV; enables resume and the manifest sidecar")
    e.set_defaults(func=cmd_experiment)

    r = sub.add_parser("report", help="regression and plot-ready tables from a results CSV")
    r.add_argument("--results", required=True, help="results CSV from experiment")
    r.add_argument("--format", choices=("tsv", "csv"), default="tsv",
                   help="regression table format (default tsv)")
    r.add_argument("--out-dir", default=None, help="directory for output files (stdout if omitted)")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "threads", None) is not None and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NullModelError, CellFailure) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, OSError, DatasetError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
