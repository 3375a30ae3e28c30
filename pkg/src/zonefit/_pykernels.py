"""Pure numpy versions of the compiled kernels (same signatures)."""

from __future__ import annotations

import numpy as np

_TINY = 1e-300


def nll(x, y, sign, weight, x0, y0, alpha, lam, beta, r):
    """Sum of ``softplus(sign * beta * (d - alpha))``, optionally weighted.

    ``sign`` is +1 for a called strike and -1 for a called ball, which makes
    each term the Bernoulli negative log-likelihood of the observed call.
    """
    tx = np.abs(x - x0)
    ty = np.abs(y - y0)
    ty *= 1.0 / lam
    m = np.maximum(tx, ty)
    np.maximum(m, _TINY, out=m)
    q = np.minimum(tx, ty, out=tx)
    np.maximum(q, _TINY, out=q)
    t = np.divide(q, m, out=q)
    np.log(t, out=t)
    t *= r
    np.exp(t, out=t)
    np.log1p(t, out=t)
    t *= 1.0 / r
    np.exp(t, out=t)
    t *= m
    t -= alpha
    t *= beta
    t *= sign
    # softplus(u) = max(u, 0) + log1p(exp(-|u|))
    tail = np.abs(t, out=ty)
    np.negative(tail, out=tail)
    np.exp(tail, out=tail)
    np.log1p(tail, out=tail)
    np.maximum(t, 0.0, out=t)
    t += tail
    if weight is None:
        return float(t.sum())
    return float(np.dot(t, weight))
