"""Cached Gauss rules and composite panel helpers."""

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@lru_cache(maxsize=256)
def gauss_legendre(n):
    x, w = roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=512)
def gauss_jacobi(n, alpha, beta):
    """Nodes/weights for weight (1 - x)**alpha * (1 + x)**beta on [-1, 1]."""
    x, w = roots_jacobi(n, alpha, beta)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_legendre(edges, n):
    """Gauss-Legendre nodes and weights on consecutive panels given by `edges`."""
    edges = np.asarray(edges, dtype=float)
    y, w = gauss_legendre(n)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * y[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()
