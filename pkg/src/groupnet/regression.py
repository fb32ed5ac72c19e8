"""OLS summary of cell-level accuracy against network and group covariates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PREDICTORS = (
    "size", "density", "transitivity", "n_maximal_cliques",
    "mean_group_size", "mean_memberships", "groups_observed", "p_clique",
)
OUTCOME = "mean_r"


class RegressionError(ValueError):
    pass


@dataclass(frozen=True)
class RegressionSummary:
    predictors: tuple
    coef: np.ndarray           # unstandardized B
    beta: np.ndarray           # standardized
    intercept: float
    r_squared: float
    n_obs: int

    def as_rows(self) -> list[tuple[str, float, float]]:
        rows = [("intercept", self.intercept, float("nan"))]
        rows += [(p, float(b), float(s)) for p, b, s in zip(self.predictors, self.coef, self.beta)]
        return rows


def _get(row, name):
    return float(row[name] if isinstance(row, dict) else getattr(row, name))


def fit_ols(x: np.ndarray, y: np.ndarray, names=None) -> RegressionSummary:
    """OLS with intercept via the normal equations."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = x.shape
    names = tuple(names) if names is not None else tuple(f"x{j}" for j in range(k))
    if n < k + 1:
        raise RegressionError(f"{n} observations cannot identify {k + 1} coefficients")
    sd_x = x.std(axis=0, ddof=1)
    flat = [names[j] for j in range(k) if not sd_x[j] > 0]
    if flat:
        raise RegressionError(f"predictors without variation: {', '.join(flat)}")
    design = np.column_stack([np.ones(n), x])
    # rank check on the column-scaled design so units do not matter
    scaled = design / np.linalg.norm(design, axis=0)
    sv = np.linalg.svd(scaled, compute_uv=False)
    if sv[-1] < sv[0] * 1e-10:
        _, _, vt = np.linalg.svd(scaled)
        null = np.abs(vt[-1])
        involved = [(["intercept"] + list(names))[j] for j in np.flatnonzero(null > 1e-6)]
        raise RegressionError(f"collinear predictors: {', '.join(involved)}")
    xtx = design.T @ design
    xty = design.T @ y
    sol = np.linalg.solve(xtx, xty)
    resid = y - design @ sol
    sst = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float(resid @ resid) / sst if sst > 0 else float("nan")
    sd_y = y.std(ddof=1)
    beta = sol[1:] * sd_x / sd_y
    return RegressionSummary(names, sol[1:], beta, float(sol[0]), r2, n)


def fit_regression(results, method_filter: str | None = None,
                   predictors=PREDICTORS, outcome: str = OUTCOME) -> RegressionSummary:
    """Regress cell-mean accuracy on the covariates of the cells of one method.

    ``results`` holds ``CellResult`` objects or dict rows read back from a
    results CSV. Cells whose outcome is undefined are dropped.
    """
    rows = [r for r in results
            if method_filter is None or (r["method"] if isinstance(r, dict) else r.method) == method_filter]
    rows = [r for r in rows if np.isfinite(_get(r, outcome))]
    x = np.array([[_get(r, p) for p in predictors] for r in rows]).reshape(len(rows), len(predictors))
    y = np.array([_get(r, outcome) for r in rows])
    return fit_ols(x, y, predictors)
