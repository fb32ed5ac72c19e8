"""Factorial simulation: networks x group counts x clique fidelity x method.

Randomness is derived, never shared: every cell seed is a hash of the master
seed and the cell's identity (network kind, multiplier, p), and every
replication seed is a hash of the cell seed and the replication index. The
two inference methods of a cell therefore see the same truths and groups,
and results do not depend on worker count or execution order.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import __version__
from .generators import ALL_KINDS, EMPIRICAL_KINDS, NetworkSpec
from .graph import graph_stats, maximal_cliques
from .groups import GroupGenerationError, GroupGenSpec, generate_groups, membership_stats
from .metrics import similarity
from .projection import unweighted_projection
from .sdsm import NullModelError, SdsmConfig, sdsm
from .poibin import AUTO_EXACT_MAX

METHODS = ("projection", "sdsm")
DEFAULT_MULTIPLIERS = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0)
DEFAULT_P_VALUES = (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
MAX_ABORT_FRACTION = 0.01

CSV_COLUMNS = (
    "network", "multiplier", "p_clique", "method", "reps", "undefined_r",
    "mean_r", "sd_r", "mean_kappa", "sd_kappa", "mean_jaccard", "sd_jaccard",
    "size", "density", "transitivity", "n_maximal_cliques",
    "mean_group_size", "mean_memberships", "groups_observed",
)

_MASK64 = (1 << 64) - 1


class CellFailure(RuntimeError):
    pass


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer on the 64-bit state advanced by the golden gamma."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, *indices: int) -> int:
    """Fold integer indices into a 64-bit seed.

    ``h = mix(master ^ mix(len))``, then ``h = mix(h ^ mix(i))`` for each
    index. ``mix`` is a bijection, so seeds differing in one index never
    collide.
    """
    h = splitmix64((master_seed & _MASK64) ^ splitmix64(len(indices)))
    for i in indices:
        h = splitmix64(h ^ splitmix64(int(i) & _MASK64))
    return h


class RunningStats:
    """Welford mean / sample variance, skipping nan values."""

    __slots__ = ("n", "mean", "m2", "skipped", "values")

    def __init__(self, keep: bool = False):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0
        self.skipped = 0
        self.values = [] if keep else None

    def add(self, x: float) -> None:
        if self.values is not None:
            self.values.append(x)
        if math.isnan(x):
            self.skipped += 1
            return
        self.n += 1
        d = x - self.mean
        self.mean += d / self.n
        self.m2 += d * (x - self.mean)

    @property
    def sd(self) -> float:
        return math.sqrt(self.m2 / (self.n - 1)) if self.n > 1 else math.nan

    @property
    def mean_or_nan(self) -> float:
        return self.mean if self.n else math.nan


@dataclass(frozen=True)
class CellResult:
    network: str
    multiplier: float
    p_clique: float
    method: str
    reps: int
    undefined_r: int
    mean_r: float
    sd_r: float
    mean_kappa: float
    sd_kappa: float
    mean_jaccard: float
    sd_jaccard: float
    size: float
    density: float
    transitivity: float
    n_maximal_cliques: float
    mean_group_size: float
    mean_memberships: float
    groups_observed: int
    undefined_kappa: int = 0
    undefined_jaccard: int = 0
    aborted: int = 0
    engine: str = ""
    values: dict | None = field(default=None, compare=False, repr=False)

    def csv_row(self) -> list[str]:
        return [_fmt(getattr(self, c)) for c in CSV_COLUMNS]

    def key(self) -> tuple:
        return (self.network, self.multiplier, self.p_clique, self.method)

    def to_json(self) -> str:
        d = asdict(self)
        d.pop("values")
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "CellResult":
        return cls(**json.loads(line))


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def n_groups_for(multiplier: float, n: int) -> int:
    return max(1, int(math.floor(multiplier * n + 0.5)))


def cell_seed(master_seed: int, kind: str, multiplier: float, p: float) -> int:
    return derive_seed(master_seed, ALL_KINDS.index(kind),
                       int(round(multiplier * 1000)), int(round(p * 1000)))


def run_cell(truth_spec: NetworkSpec, multiplier: float, p: float, method: str, reps: int,
             seed: int, sdsm_config: SdsmConfig | None = None, min_clique_size: int = 2,
             replacement: str = "outside_clique", keep_values: bool = False,
             noise: str = "per_slot") -> CellResult:
    """Run ``reps`` replications of one experimental condition."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    sdsm_config = sdsm_config or SdsmConfig()
    stats = {k: RunningStats(keep_values) for k in ("r", "kappa", "jaccard")}
    cov = {k: RunningStats(keep_values) for k in (
        "size", "density", "transitivity", "n_maximal_cliques",
        "mean_group_size", "mean_memberships", "groups_observed")}
    fixed_truth = None
    if truth_spec.is_empirical:
        g = truth_spec.build()
        fixed_truth = (g, maximal_cliques(g), graph_stats(g))
    aborted = 0
    engine = ""
    for rep in range(reps):
        rng = np.random.default_rng(derive_seed(seed, rep))
        if fixed_truth is None:
            g = truth_spec.build(rng)
            cliques = maximal_cliques(g)
            gs = graph_stats(g, cliques)
        else:
            g, cliques, gs = fixed_truth
        n_groups = n_groups_for(multiplier, g.node_count)
        spec = GroupGenSpec(n_groups, p, min_clique_size, replacement, noise)
        try:
            b = generate_groups(g, spec, rng, cliques)
            if method == "projection":
                inferred = unweighted_projection(b)
            else:
                res = sdsm(b, sdsm_config)
                inferred = res.backbone
                engine = res.engine
        except (GroupGenerationError, NullModelError):
            aborted += 1
            continue
        s = similarity(g, inferred)
        stats["r"].add(s.correlation)
        stats["kappa"].add(s.kappa)
        stats["jaccard"].add(s.jaccard)
        mgs, mm = membership_stats(b)
        for k, v in (("size", gs.size), ("density", gs.density),
                     ("transitivity", gs.transitivity),
                     ("n_maximal_cliques", gs.n_maximal_cliques),
                     ("mean_group_size", mgs), ("mean_memberships", mm),
                     ("groups_observed", n_groups)):
            cov[k].add(float(v))
    if reps and aborted / reps > MAX_ABORT_FRACTION:
        raise CellFailure(
            f"{truth_spec.kind} x{multiplier} p={p} {method}: "
            f"{aborted} of {reps} replications aborted")
    done = reps - aborted
    values = None
    if keep_values:
        values = {k: list(v.values) for k, v in {**stats, **cov}.items()}
    return CellResult(
        network=truth_spec.kind, multiplier=float(multiplier), p_clique=float(p),
        method=method, reps=done, undefined_r=stats["r"].skipped,
        mean_r=stats["r"].mean_or_nan, sd_r=stats["r"].sd,
        mean_kappa=stats["kappa"].mean_or_nan, sd_kappa=stats["kappa"].sd,
        mean_jaccard=stats["jaccard"].mean_or_nan, sd_jaccard=stats["jaccard"].sd,
        size=cov["size"].mean_or_nan, density=cov["density"].mean_or_nan,
        transitivity=cov["transitivity"].mean_or_nan,
        n_maximal_cliques=cov["n_maximal_cliques"].mean_or_nan,
        mean_group_size=cov["mean_group_size"].mean_or_nan,
        mean_memberships=cov["mean_memberships"].mean_or_nan,
        groups_observed=int(round(cov["groups_observed"].mean_or_nan)) if done else 0,
        undefined_kappa=stats["kappa"].skipped, undefined_jaccard=stats["jaccard"].skipped,
        aborted=aborted, engine=engine if method == "sdsm" else "",
        values=values,
    )


@dataclass(frozen=True)
class ExperimentDesign:
    networks: tuple = tuple(NetworkSpec.default(k) for k in ALL_KINDS)
    group_multipliers: tuple = DEFAULT_MULTIPLIERS
    p_values: tuple = DEFAULT_P_VALUES
    methods: tuple = METHODS
    replications: int = 1000
    master_seed: int = 0
    sdsm: SdsmConfig = SdsmConfig()
    min_clique_size: int = 2
    replacement: str = "outside_clique"
    noise: str = "per_slot"

    def __post_init__(self):
        if any(m not in METHODS for m in self.methods):
            raise ValueError(f"methods must be drawn from {METHODS}")
        if any(m <= 0 for m in self.group_multipliers):
            raise ValueError("group multipliers must be positive")
        if any(not 0.0 <= p <= 1.0 for p in self.p_values):
            raise ValueError("p values must lie in [0, 1]")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        kinds = [s.kind for s in self.networks]
        if len(set(kinds)) != len(kinds):
            raise ValueError("each network kind may appear once")

    def cells(self) -> list[tuple]:
        """(network spec, multiplier, p, method) in canonical order."""
        return [(net, m, p, meth)
                for net in self.networks
                for m in self.group_multipliers
                for p in self.p_values
                for meth in self.methods]

    @property
    def cell_count(self) -> int:
        return (len(self.networks) * len(self.group_multipliers)
                * len(self.p_values) * len(self.methods))


def _run_one(design: ExperimentDesign, cell) -> CellResult:
    net, m, p, meth = cell
    return run_cell(net, m, p, meth, design.replications,
                    cell_seed(design.master_seed, net.kind, m, p),
                    design.sdsm, design.min_clique_size, design.replacement,
                    noise=design.noise)


def _cell_key(cell) -> tuple:
    net, m, p, meth = cell
    return (net.kind, float(m), float(p), meth)


def run_design(design: ExperimentDesign, threads: int = 1, out=None) -> Iterator[CellResult]:
    """Yield every cell's result in canonical order.

    With ``out`` set, finished cells are appended to ``<out>.partial.jsonl``
    as they complete; a rerun skips cells already recorded there. The final
    CSV and a ``<out>.manifest.json`` sidecar are written once every cell is
    done, after which the partial file is removed.
    """
    cells = design.cells()
    done: dict[tuple, CellResult] = {}
    partial = Path(str(out) + ".partial.jsonl") if out is not None else None
    if partial is not None and partial.exists():
        for line in partial.read_text().splitlines():
            if line.strip():
                r = CellResult.from_json(line)
                done[r.key()] = r
    todo = [c for c in cells if _cell_key(c) not in done]

    sink = open(partial, "a") if partial is not None else None
    try:
        if threads > 1 and len(todo) > 1:
            pool = ProcessPoolExecutor(max_workers=threads)
            results = pool.map(_run_one, [design] * len(todo), todo)
        else:
            pool = None
            results = (_run_one(design, c) for c in todo)
        fresh = iter(results)
        for c in cells:
            k = _cell_key(c)
            if k not in done:
                r = next(fresh)
                done[k] = r
                if sink is not None:
                    sink.write(r.to_json() + "\n")
                    sink.flush()
            yield done[k]
        if pool is not None:
            pool.shutdown()
    finally:
        if sink is not None:
            sink.close()

    if out is not None:
        ordered = [done[_cell_key(c)] for c in cells]
        Path(out).write_text(results_csv(ordered))
        Path(str(out) + ".manifest.json").write_text(manifest_json(design, threads))
        partial.unlink(missing_ok=True)


def run_design_to_list(design: ExperimentDesign, threads: int = 1, out=None) -> list[CellResult]:
    return list(run_design(design, threads, out))


def results_csv(results: Sequence[CellResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        w.writerow(r.csv_row())
    return buf.getvalue()


def read_results_csv(text: str) -> list[dict]:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        return []
    if tuple(rows[0].keys()) != CSV_COLUMNS:
        raise ValueError("results CSV does not carry the expected columns")
    out = []
    for row in rows:
        d = {}
        for k, v in row.items():
            if k in ("network", "method"):
                d[k] = v
            elif k in ("reps", "undefined_r", "groups_observed"):
                d[k] = int(v)
            else:
                d[k] = float(v)
        out.append(d)
    return out


def engine_summary(design: ExperimentDesign) -> dict:
    """p-value engine per distinct group count under the design's setting."""
    return {"method": design.sdsm.pvalue_method,
            "auto_exact_max_groups": AUTO_EXACT_MAX}


def manifest_json(design: ExperimentDesign, threads: int) -> str:
    meta = {
        "code_version": __version__,
        "config": design_to_config(design),
        "master_seed": design.master_seed,
        "threads": threads,
        "cell_count": design.cell_count,
        "pvalue_engine": engine_summary(design),
        "clique_pool": "maximal cliques of size >= min_clique_size, sampled uniformly",
        "n_maximal_cliques_counts": "maximal cliques (isolated nodes count as 1-cliques)",
        "caveman_variant": next((("connected" if s.params.get("connected") else "disconnected")
                                 for s in design.networks if s.kind == "caveman"), None),
        "undefined_scores": "cell means average defined replications only",
    }
    return json.dumps(meta, indent=2, sort_keys=True) + "\n"


# --- plain-text config ----------------------------------------------------

_LIST_KEYS = {"networks", "group_multipliers", "p_values", "methods"}


def parse_config(text: str, base: ExperimentDesign | None = None) -> ExperimentDesign:
    """Parse ``key = value`` lines into a design.

    Lists are comma separated. ``<kind>.<param> = value`` overrides one
    generator parameter, e.g. ``caveman.connected = true``.
    """
    base = base or ExperimentDesign()
    kv: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        kv[k] = v
    return design_from_mapping(kv, base)


def _parse_scalar(v: str):
    low = v.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


def design_from_mapping(kv: dict, base: ExperimentDesign | None = None) -> ExperimentDesign:
    base = base or ExperimentDesign()
    overrides: dict[str, dict] = {}
    sdsm_kw = {}
    top = {}
    sdsm_keys = {"alpha": "alpha", "tail": "tail", "pvalues": "pvalue_method",
                 "correction": "multiple_comparisons", "solver_tolerance": "solver_tolerance",
                 "solver_max_iterations": "solver_max_iterations"}
    for k, v in kv.items():
        if "." in k:
            kind, param = k.split(".", 1)
            if kind not in ALL_KINDS:
                raise ValueError(f"unknown network kind in key {k!r}")
            overrides.setdefault(kind, {})[param] = _parse_scalar(v)
        elif k in sdsm_keys:
            val = _parse_scalar(v)
            if k == "pvalues":
                val = str(v).replace("-", "_")
            sdsm_kw[sdsm_keys[k]] = val
        elif k in _LIST_KEYS:
            items = [s.strip() for s in v.split(",") if s.strip()]
            if k == "networks":
                top[k] = items
            elif k == "methods":
                top[k] = tuple(items)
            else:
                top[k] = tuple(float(s) for s in items)
        elif k in ("replications", "master_seed", "min_clique_size"):
            top[k] = int(v)
        elif k in ("replacement", "noise"):
            top[k] = v
        else:
            raise ValueError(f"unknown config key {k!r}")
    kinds = top.pop("networks", [s.kind for s in base.networks])
    current = {s.kind: s for s in base.networks}
    specs = []
    for kind in kinds:
        if kind not in ALL_KINDS:
            raise ValueError(f"unknown network kind {kind!r}")
        spec = current.get(kind, NetworkSpec.default(kind))
        if kind in overrides:
            if kind in EMPIRICAL_KINDS:
                raise ValueError(f"empirical network {kind!r} takes no parameters")
            spec = NetworkSpec(kind, {**spec.params, **overrides[kind]})
        specs.append(spec)
    sd = replace(base.sdsm, **sdsm_kw)
    return replace(base, networks=tuple(specs), sdsm=sd, **top)


def design_to_config(design: ExperimentDesign) -> str:
    """Full effective configuration, defaults included, in config-file syntax."""
    lines = [
        "networks = " + ", ".join(s.kind for s in design.networks),
        "group_multipliers = " + ", ".join(repr(float(m)) for m in design.group_multipliers),
        "p_values = " + ", ".join(repr(float(p)) for p in design.p_values),
        "methods = " + ", ".join(design.methods),
        f"replications = {design.replications}",
        f"master_seed = {design.master_seed}",
        f"min_clique_size = {design.min_clique_size}",
        f"replacement = {design.replacement}",
        f"noise = {design.noise}",
        f"alpha = {design.sdsm.alpha!r}",
        f"tail = {design.sdsm.tail}",
        f"pvalues = {design.sdsm.pvalue_method}",
        f"correction = {design.sdsm.multiple_comparisons}",
        f"solver_tolerance = {design.sdsm.solver_tolerance!r}",
        f"solver_max_iterations = {design.sdsm.solver_max_iterations}",
    ]
    for s in design.networks:
        for k, v in s.params.items():
            lines.append(f"{s.kind}.{k} = {str(v).lower() if isinstance(v, bool) else v}")
    return "\n".join(lines) + "\n"


def default_threads() -> int:
    return os.cpu_count() or 1
