"""Stochastic degree sequence model (SDSM) backbone.

The null model treats every agent x group cell as an independent Bernoulli
whose probabilities reproduce both observed degree sequences in
expectation. Among such models we take the maximum-entropy one,
``p_ik = x_i y_k / (1 + x_i y_k)``. A dyad's null co-membership count is
then Poisson-binomial with per-group probabilities ``p_ik * p_jk`` and the
observed projection weight is tested against its upper tail.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom

from .graph import UndirectedGraph
from .groups import BipartiteMembership
from .poibin import refined_normal_sf, resolve_method
from .projection import project

TAILS = ("upper_one_sided", "two_sided_split")
CORRECTIONS = ("none", "bonferroni", "holm")


class NullModelError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class SdsmConfig:
    alpha: float = 0.05
    tail: str = "upper_one_sided"
    pvalue_method: str = "auto"
    multiple_comparisons: str = "none"
    solver_tolerance: float = 1e-8
    solver_max_iterations: int = 10_000

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.tail not in TAILS:
            raise ValueError(f"tail must be one of {TAILS}")
        if self.pvalue_method not in ("exact", "refined_normal", "auto"):
            raise ValueError("pvalue_method must be exact, refined_normal or auto")
        if self.multiple_comparisons not in CORRECTIONS:
            raise ValueError(f"multiple_comparisons must be one of {CORRECTIONS}")
        if self.solver_tolerance <= 0 or self.solver_max_iterations < 1:
            raise ValueError("solver tolerance and iteration cap must be positive")


@dataclass(frozen=True)
class NullModelProbabilities:
    cell_probs: np.ndarray
    converged: bool
    max_constraint_residual: float
    iterations: int = 0
    # class labels: rows (columns) with equal labels have identical probabilities
    row_class: np.ndarray | None = field(default=None, repr=False)
    col_class: np.ndarray | None = field(default=None, repr=False)


def _reduce_degenerate(r, c):
    """Fix rows/columns whose margins force all-0 or all-1 cells.

    Returns (fixed N x G matrix with nan for free cells, active row mask,
    active col mask, residual row margins, residual col margins).
    """
    n, g = r.size, c.size
    fixed = np.full((n, g), np.nan)
    rows = np.ones(n, dtype=bool)
    cols = np.ones(g, dtype=bool)
    r = r.astype(float).copy()
    c = c.astype(float).copy()
    changed = True
    while changed:
        changed = False
        n_cols, n_rows = cols.sum(), rows.sum()
        for mask, margins, width, axis in ((rows, r, n_cols, 0), (cols, c, n_rows, 1)):
            for val in (0.0, width):
                hit = mask & (margins == val)
                if not hit.any():
                    continue
                changed = True
                mask &= ~hit
                fill = 1.0 if val == width and val > 0 else 0.0
                if axis == 0:
                    fixed[np.ix_(hit, cols)] = fill
                    c[cols] -= fill * hit.sum()
                else:
                    fixed[np.ix_(rows, hit)] = fill
                    r[rows] -= fill * hit.sum()
            if changed:
                break
    return fixed, rows, cols, r, c


def _solve_classes(rv, rn, cv, cn, tol, max_iter):
    """Fixed-point solve on degree classes.

    rv/cv are distinct row/column margins, rn/cn their multiplicities.
    Returns (row log-multipliers, col log-multipliers, residual, iterations).
    """
    # start from the independent-margin guess
    total = float((rv * rn).sum())
    a = np.log(rv / np.sqrt(total))
    b = np.log(cv / np.sqrt(total))

    def residual(a, b):
        p = 1.0 / (1.0 + np.exp(-(a[:, None] + b[None, :])))
        row_err = np.abs(p @ cn - rv).max()
        col_err = np.abs(rn @ p - cv).max()
        return max(row_err, col_err)

    res = residual(a, b)
    damp = 1.0
    it = 0
    for it in range(1, max_iter + 1):
        if res < tol:
            return a, b, res, it - 1
        # x_r = r / sum_c n_c y_c / (1 + x_r y_c); likewise for y
        ea = np.exp(a)
        eb = np.exp(b)
        a_new = np.log(rv) - np.log((cn * eb / (1.0 + ea[:, None] * eb[None, :])).sum(axis=1))
        a_step = a + damp * (a_new - a)
        ea = np.exp(a_step)
        b_new = np.log(cv) - np.log((rn * ea / (1.0 + ea[:, None] * eb[None, :]).T).sum(axis=1))
        b_step = b + damp * (b_new - b)
        new_res = residual(a_step, b_step)
        if new_res > res and damp > 0.5:
            # oscillation: retry this step damped
            damp = 0.5
            continue
        a, b, res = a_step, b_step, new_res
        # accelerate with a Newton step once the iteration is close
        if res < 1e-3:
            a_n, b_n = _newton_step(a, b, rv, rn, cv, cn)
            res_n = residual(a_n, b_n)
            if res_n < res:
                a, b, res = a_n, b_n, res_n
    return a, b, res, it


def _newton_step(a, b, rv, rn, cv, cn):
    p = 1.0 / (1.0 + np.exp(-(a[:, None] + b[None, :])))
    v = p * (1.0 - p)
    f = np.concatenate([p @ cn - rv, rn @ p - cv])
    nr = a.size
    jac = np.zeros((nr + b.size, nr + b.size))
    jac[:nr, :nr] = np.diag(v @ cn)
    jac[:nr, nr:] = v * cn[None, :]
    jac[nr:, :nr] = (v * rn[:, None]).T
    jac[nr:, nr:] = np.diag(rn @ v)
    # the system has one gauge freedom (a + t, b - t): least squares picks the minimum-norm step
    step = np.linalg.lstsq(jac, -f, rcond=None)[0]
    return a + step[:nr], b + step[nr:]


def fit_null_model(row_sums, col_sums, config: SdsmConfig | None = None) -> NullModelProbabilities:
    """Maximum-entropy cell probabilities matching both margins in expectation."""
    config = config or SdsmConfig()
    r = np.asarray(row_sums, dtype=np.int64).ravel()
    c = np.asarray(col_sums, dtype=np.int64).ravel()
    n, g = r.size, c.size
    if r.sum() != c.sum():
        raise ValueError(f"margin totals differ: rows {r.sum()} vs columns {c.sum()}")
    if (r < 0).any() or (r > g).any() or (c < 0).any() or (c > n).any():
        raise ValueError("margins out of range")

    fixed, rows, cols, rr, cr = _reduce_degenerate(r, c)
    probs = np.where(np.isnan(fixed), 0.0, fixed)
    row_class = np.full(n, -1, dtype=np.int64)
    col_class = np.full(g, -1, dtype=np.int64)
    iters = 0
    if rows.any() and cols.any():
        rv, r_inv, rn = np.unique(rr[rows], return_inverse=True, return_counts=True)
        cv, c_inv, cn = np.unique(cr[cols], return_inverse=True, return_counts=True)
        a, b, _, iters = _solve_classes(rv, rn.astype(float), cv, cn.astype(float),
                                        config.solver_tolerance, config.solver_max_iterations)
        p_cls = 1.0 / (1.0 + np.exp(-(a[:, None] + b[None, :])))
        probs[np.ix_(rows, cols)] = p_cls[np.ix_(r_inv, c_inv)]
        row_class[rows] = r_inv
        col_class[cols] = c_inv
    # degenerate rows/cols get their own classes keyed by the fixed pattern
    _label_fixed(row_class, probs)
    _label_fixed(col_class, probs.T)

    residual = max(np.abs(probs.sum(axis=1) - r).max(initial=0.0),
                   np.abs(probs.sum(axis=0) - c).max(initial=0.0))
    if not residual < config.solver_tolerance:
        raise NullModelError(
            f"null model did not converge in {config.solver_max_iterations} iterations "
            f"(max margin residual {residual:.3g})", residual)
    return NullModelProbabilities(probs, True, float(residual), iters, row_class, col_class)


def _label_fixed(labels, probs):
    free = labels >= 0
    start = labels.max(initial=-1) + 1
    todo = np.flatnonzero(~free)
    if todo.size == 0:
        return
    _, inv = np.unique(probs[todo], axis=0, return_inverse=True)
    labels[todo] = start + inv.ravel()


@dataclass(frozen=True)
class SdsmResult:
    backbone: UndirectedGraph
    pvalues: np.ndarray        # N x N, symmetric, 1.0 on the diagonal
    weights: np.ndarray
    engine: str
    null: NullModelProbabilities


def dyad_upper_pvalues(b: BipartiteMembership, null: NullModelProbabilities,
                       method: str = "auto") -> tuple[np.ndarray, str]:
    """P(null co-membership >= observed weight) for every dyad."""
    weights = project(b).weights
    n, g = b.agent_count, b.group_count
    engine = resolve_method(method, g)
    pv = np.ones((n, n))
    iu, ju = np.triu_indices(n, 1)
    w = weights[iu, ju]
    test = w > 0
    if not test.any():
        return pv, engine
    iu, ju, w = iu[test], ju[test], w[test]

    # groups in one class share a probability column; collapse them
    col_ids, first, counts = np.unique(null.col_class, return_index=True, return_counts=True)
    p_cls = null.cell_probs[:, first]                   # N x C
    q = p_cls[iu] * p_cls[ju]                           # D x C
    m = counts.astype(float)

    if engine == "refined_normal":
        v = q * (1.0 - q)
        mu = q @ m
        var = v @ m
        sd = np.sqrt(var)
        with np.errstate(divide="ignore", invalid="ignore"):
            gamma = np.where(var > 0, ((v * (1.0 - 2.0 * q)) @ m) / sd**3, 0.0)
        p = refined_normal_sf(w, mu, sd, gamma)
    else:
        p = _block_upper_tail(q, counts, w)
    pv[iu, ju] = p
    pv[ju, iu] = p
    return pv, engine


def _block_upper_tail(q: np.ndarray, counts: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Exact P(sum_c Binomial(counts[c], q[:, c]) >= w), row by row.

    Mass is only needed below each dyad's observed weight, so the running
    distribution is truncated at max(w) - 1.
    """
    width = int(w.max())                     # need P(X = 0..w-1)
    j = np.arange(width)
    f = np.zeros((q.shape[0], width))
    f[:, 0] = 1.0
    for col, nc in enumerate(counts):
        blk = binom.pmf(j[None, :], int(nc), q[:, col:col + 1])
        out = np.zeros_like(f)
        for i in range(width):
            out[:, i:] += f[:, i:i + 1] * blk[:, : width - i]
        f = out
    cdf = np.cumsum(f, axis=1)
    below = cdf[np.arange(w.size), w - 1]
    return np.clip(1.0 - below, 0.0, 1.0)


def adjust_pvalues(p: np.ndarray, method: str) -> np.ndarray:
    """Family-wise adjustment over a flat vector of p-values."""
    p = np.asarray(p, dtype=float)
    if method == "none" or p.size == 0:
        return p.copy()
    m = p.size
    if method == "bonferroni":
        return np.minimum(p * m, 1.0)
    if method == "holm":
        order = np.argsort(p, kind="stable")
        adj = np.maximum.accumulate(np.minimum((m - np.arange(m)) * p[order], 1.0))
        out = np.empty(m)
        out[order] = adj
        return out
    raise ValueError(f"unknown correction {method!r}")


def sdsm(b: BipartiteMembership, config: SdsmConfig | None = None) -> SdsmResult:
    config = config or SdsmConfig()
    null = fit_null_model(b.row_sums(), b.col_sums(), config)
    pv, engine = dyad_upper_pvalues(b, null, config.pvalue_method)
    n = b.agent_count
    iu, ju = np.triu_indices(n, 1)
    adj_p = adjust_pvalues(pv[iu, ju], config.multiple_comparisons)
    level = config.alpha if config.tail == "upper_one_sided" else config.alpha / 2.0
    keep = adj_p < level
    backbone = UndirectedGraph(n, frozenset(zip(iu[keep].tolist(), ju[keep].tolist())),
                               b.agent_labels)
    return SdsmResult(backbone, pv, project(b).weights, engine, null)


def sdsm_backbone(b: BipartiteMembership, config: SdsmConfig | None = None) -> UndirectedGraph:
    return sdsm(b, config).backbone
