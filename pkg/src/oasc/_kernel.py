"""Fused online training loop (activation, accumulation, center update)."""

import math

import numpy as np
from numba import njit

MODE_NONE = 0
MODE_INF = 1
MODE_FINITE = 2


def norm_code(p):
    if p is None:
        return MODE_NONE, 0.0
    if math.isinf(p):
        return MODE_INF, 0.0
    return MODE_FINITE, float(p)


@njit(cache=True, nogil=True)
def train_span(X, order, start, stop, mu, Q, sigma, eta, lam, mode, p, floor):
    """Process stream positions ``start..stop-1`` in place on ``mu`` and ``Q``.

    Returns ``(seen, skipped, bad_pos, bad_index)``; ``bad_pos`` is -1 unless a
    center update went non-finite, in which case ``mu`` holds the centers from
    before that step.
    """
    K, D = mu.shape
    f = np.empty(K)
    rep = np.empty((K, D))
    new = np.empty((K, D))
    rate = eta / sigma
    seen = 0
    skipped = 0
    for pos in range(start, stop):
        x = X[order[pos]]
        for i in range(K):
            s = 0.0
            for d in range(D):
                t = x[d] - mu[i, d]
                s += t * t
            f[i] = math.exp(-s / sigma)

        if mode == MODE_NONE:
            z = 1.0
        elif mode == MODE_INF:
            m = 0.0
            for i in range(K):
                if f[i] > m:
                    m = f[i]
            z = m * m
        else:
            s = 0.0
            for i in range(K):
                s += f[i] ** p
            z = s ** (1.0 / p)
            z = z * z
        if z >= floor:
            for k in range(K):
                for l in range(k, K):
                    v = f[k] * f[l] / z
                    Q[k, l] += v
                    if l != k:
                        Q[l, k] += v
            seen += 1
        else:
            skipped += 1

        rep[:, :] = 0.0
        for i in range(K):
            for j in range(i + 1, K):
                s = 0.0
                for d in range(D):
                    t = mu[j, d] - mu[i, d]
                    s += t * t
                g = math.exp(-s / sigma)
                for d in range(D):
                    t = mu[j, d] - mu[i, d]
                    rep[i, d] += g * t
                    rep[j, d] -= g * t
        for i in range(K):
            for d in range(D):
                v = mu[i, d] + rate * (f[i] * (x[d] - mu[i, d]) - 2.0 * lam * rep[i, d])
                if not math.isfinite(v):
                    return seen, skipped, pos, i
                new[i, d] = v
        mu[:, :] = new
    return seen, skipped, -1, -1
