"""Thurstone Case V scale reconstruction by maximum likelihood.

Scales maximize the pairwise log-likelihood sum c_ik * ln Phi(s_i - s_k)
with the source stimulus pinned at 0 (the translation gauge). The optimizer
is a damped Newton ascent on the concave objective: probabilities are
floored at 1e-6 so perfectly separated pairs stay finite, and a halving
line search guarantees the likelihood never decreases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .. import _kernels

PHI_INV_75 = float(ndtri(0.75))

DEFAULT_PROB_FLOOR = 1e-6
DEFAULT_GRAD_TOL = 1e-7
DEFAULT_MAX_ITER = 1000


class AnalysisError(ValueError):
    pass


@dataclass
class FitInfo:
    log_likelihood: float
    iterations: int
    grad_max: float
    converged: bool


def connected_components(counts: np.ndarray) -> list[list[int]]:
    """Components of the comparison graph (an edge wherever any count exists)."""
    n = counts.shape[0]
    adj = (counts > 0) | (counts.T > 0)
    seen = np.zeros(n, dtype=bool)
    components = []
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            node = stack.pop()
            comp.append(node)
            for nxt in np.nonzero(adj[node] & ~seen)[0]:
                seen[nxt] = True
                stack.append(int(nxt))
        components.append(sorted(comp))
    return components


def fit_thurstone(
    counts: np.ndarray,
    anchor: int = 0,
    start: np.ndarray | None = None,
    prob_floor: float = DEFAULT_PROB_FLOOR,
    grad_tol: float = DEFAULT_GRAD_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[np.ndarray, FitInfo]:
    """Newton ascent on the pairwise likelihood with ``anchor`` fixed at 0."""
    counts = np.ascontiguousarray(counts, dtype=np.float64)
    n = counts.shape[0]
    if counts.ndim != 2 or counts.shape != (n, n):
        raise AnalysisError(f"counts must be square, got {counts.shape}")
    if np.any(np.diag(counts) != 0):
        raise AnalysisError("counts matrix has nonzero diagonal (self-comparisons)")

    s = np.zeros(n) if start is None else np.asarray(start, dtype=np.float64).copy()
    s -= s[anchor]
    free = np.arange(n) != anchor

    ll, grad, hess = _kernels.pair_loglik(counts, s, prob_floor)
    iterations = 0
    while iterations < max_iter:
        gmax = float(np.max(np.abs(grad[free]))) if n > 1 else 0.0
        if gmax < grad_tol:
            break
        iterations += 1
        a = -hess[np.ix_(free, free)]
        ridge = np.einsum("ii->i", a)
        ridge += 1e-10 * max(1.0, float(ridge.max(initial=0.0)))
        try:
            step = np.linalg.solve(a, grad[free])
        except np.linalg.LinAlgError:
            step = grad[free]
        # Halving line search keeps the ascent monotone.
        t = 1.0
        improved = False
        while t >= 1e-12:
            trial = s.copy()
            trial[free] += t * step
            ll_t, grad_t, hess_t = _kernels.pair_loglik(counts, trial, prob_floor)
            if ll_t >= ll:
                s, ll, grad, hess = trial, ll_t, grad_t, hess_t
                improved = True
                break
            t *= 0.5
        if not improved:
            break

    gmax = float(np.max(np.abs(grad[free]))) if n > 1 else 0.0
    return s, FitInfo(float(ll), iterations, gmax, gmax < grad_tol)


def reconstruct_scales(counts, **fit_kwargs) -> dict:
    """MLE scales (Thurstone units) for one source's comparison counts.

    Takes a :class:`~jndscale.analysis.counts.ComparisonCounts`; returns a
    dict mapping (codec_id, level) nodes to scale values anchored so the
    level-0 source sits at exactly 0. Raises if the comparison graph is
    disconnected, naming the components.
    """
    matrix = counts.matrix
    components = connected_components(matrix)
    if len(components) > 1:
        named = [[counts.nodes[i] for i in comp] for comp in components]
        raise AnalysisError(f"comparison graph is disconnected; components: {named}")
    scales, _ = fit_thurstone(matrix, anchor=counts.anchor_index, **fit_kwargs)
    return {node: float(scales[i]) for i, node in enumerate(counts.nodes)}


def to_jnd(scales):
    """Convert Thurstone-unit scales to JND units (divide by Phi^-1(0.75))."""
    if isinstance(scales, dict):
        return {key: val / PHI_INV_75 for key, val in scales.items()}
    return np.asarray(scales, dtype=np.float64) / PHI_INV_75
