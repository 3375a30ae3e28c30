"""Nelder-Mead simplex minimizer.

Standard coefficients (reflection 1, expansion 2, contraction 1/2, shrink
1/2) with inside and outside contraction. Vertex ordering uses a stable
sort so ties resolve by insertion order and runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    fun: float
    converged: bool
    n_iter: int
    n_evals: int


def nelder_mead(
    func: Callable[[np.ndarray], float],
    x_start: Sequence[float],
    step: Sequence[float] | float = 0.1,
    tol: float = 1e-8,
    max_iter: int = 5000,
    relative: bool = False,
) -> SimplexResult:
    """Minimize ``func`` starting from an axis-aligned simplex around ``x_start``.

    Stops when the spread of function values over the simplex is at most
    ``tol`` (times ``max(1, |f_best|)`` when ``relative``), or after
    ``max_iter`` iterations with ``converged=False``.
    """
    x_start = np.asarray(x_start, dtype=float)
    dim = x_start.size
    steps = np.broadcast_to(np.asarray(step, dtype=float), (dim,))

    simplex = np.empty((dim + 1, dim))
    simplex[0] = x_start
    for i in range(dim):
        simplex[i + 1] = x_start
        simplex[i + 1, i] += steps[i]
    fvals = np.array([func(v) for v in simplex])
    n_evals = dim + 1

    converged = False
    n_iter = 0
    while True:
        order = np.argsort(fvals, kind="stable")
        simplex = simplex[order]
        fvals = fvals[order]
        scale = max(1.0, abs(fvals[0])) if relative else 1.0
        if fvals[-1] - fvals[0] <= tol * scale:
            converged = True
            break
        if n_iter >= max_iter:
            break
        n_iter += 1

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + (centroid - worst)
        fr = func(xr)
        n_evals += 1

        if fr < fvals[0]:
            xe = centroid + 2.0 * (centroid - worst)
            fe = func(xe)
            n_evals += 1
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue

        if fr < fvals[-1]:
            xc = centroid + 0.5 * (xr - centroid)
            fc = func(xc)
            n_evals += 1
            if fc <= fr:
                simplex[-1], fvals[-1] = xc, fc
                continue
        else:
            xc = centroid + 0.5 * (worst - centroid)
            fc = func(xc)
            n_evals += 1
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = xc, fc
                continue

        best = simplex[0]
        for i in range(1, dim + 1):
            simplex[i] = best + 0.5 * (simplex[i] - best)
            fvals[i] = func(simplex[i])
        n_evals += dim

    return SimplexResult(simplex[0].copy(), float(fvals[0]), converged, n_iter, n_evals)
