"""Upper tails of the Poisson-binomial distribution.

``X = sum of independent Bernoulli(p_i)``. Two engines:

* ``exact``: the probability mass function by iterative convolution, one
  Bernoulli (or one binomial block of equal probabilities) at a time. The
  upper tail is summed from the top so small tails keep relative precision.
* ``refined_normal``: skewness-corrected normal approximation with
  continuity correction,
  ``P(X <= k) ~ G((k + 0.5 - mu) / sigma)``,
  ``G(x) = Phi(x) + gamma (1 - x^2) phi(x) / 6``, clipped to [0, 1].
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr
from scipy.stats import binom

METHODS = ("exact", "refined_normal", "auto")
# largest number of Bernoulli terms handled by the exact engine under "auto"
AUTO_EXACT_MAX = 1024

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def resolve_method(method: str, length: int) -> str:
    if method not in METHODS:
        raise ValueError(f"unknown p-value method {method!r}")
    if method == "auto":
        return "exact" if length <= AUTO_EXACT_MAX else "refined_normal"
    return method


def pmf(probs) -> np.ndarray:
    """Probability mass of the Poisson-binomial, length len(probs) + 1."""
    f = np.ones(1)
    for q in np.asarray(probs, dtype=float).ravel():
        g = np.empty(f.size + 1)
        g[:-1] = f * (1.0 - q)
        g[-1] = 0.0
        g[1:] += f * q
        f = g
    return f


def _sf_from_pmf(f: np.ndarray) -> np.ndarray:
    """sf[k] = P(X >= k) for k = 0..len(f), summed from the top."""
    sf = np.zeros(f.size + 1)
    sf[:-1] = np.cumsum(f[::-1])[::-1]
    sf[0] = 1.0
    return np.minimum(sf, 1.0)


def upper_tail_exact(probs, k: int) -> float:
    probs = np.asarray(probs, dtype=float).ravel()
    if k <= 0:
        return 1.0
    if k > probs.size:
        return 0.0
    return float(_sf_from_pmf(pmf(probs))[k])


def moments(probs) -> tuple[float, float, float]:
    """Mean, standard deviation and skewness."""
    p = np.asarray(probs, dtype=float).ravel()
    v = p * (1.0 - p)
    mu = float(p.sum())
    var = float(v.sum())
    sd = np.sqrt(var)
    gamma = float((v * (1.0 - 2.0 * p)).sum() / sd**3) if var > 0 else 0.0
    return mu, float(sd), gamma


def refined_normal_sf(k, mu, sd, gamma):
    """Vectorized refined-normal P(X >= k); degenerate sd == 0 handled exactly."""
    k = np.asarray(k, dtype=float)
    mu = np.asarray(mu, dtype=float)
    sd = np.asarray(sd, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = (k - 0.5 - mu) / sd
        cdf = ndtr(x) + gamma * (1.0 - x * x) * np.exp(-0.5 * x * x) * _INV_SQRT_2PI / 6.0
    sf = 1.0 - np.clip(cdf, 0.0, 1.0)
    # point mass at mu when sd == 0
    sf = np.where(sd > 0, sf, (k <= mu + 1e-9).astype(float))
    return np.where(k <= 0, 1.0, sf)


def upper_tail_refined_normal(probs, k: int) -> float:
    probs = np.asarray(probs, dtype=float).ravel()
    if k <= 0:
        return 1.0
    if k > probs.size:
        return 0.0
    mu, sd, gamma = moments(probs)
    return float(refined_normal_sf(k, mu, sd, gamma))


def poisson_binomial_upper_tail(probs, k: int, method: str = "exact") -> float:
    """P(X >= k) for X a sum of independent Bernoulli(probs)."""
    probs = np.asarray(probs, dtype=float).ravel()
    if probs.size and (probs.min() < 0.0 or probs.max() > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    if k < 0:
        raise ValueError("k must be nonnegative")
    if resolve_method(method, probs.size) == "exact":
        return upper_tail_exact(probs, k)
    return upper_tail_refined_normal(probs, k)


def block_sf(q: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Exact survival function of a sum of independent Binomial(counts[c], q[c]).

    This is the Poisson-binomial with ``counts[c]`` repeated probabilities
    ``q[c]``; each binomial block is convolved in as a whole. Returns sf with
    sf[k] = P(X >= k), k = 0..sum(counts)+1.
    """
    f = np.ones(1)
    for qc, nc in zip(np.asarray(q, dtype=float), np.asarray(counts, dtype=np.int64)):
        if nc == 0:
            continue
        f = np.convolve(f, binom.pmf(np.arange(nc + 1), nc, qc))
    return _sf_from_pmf(np.clip(f, 0.0, None))
