"""Closed-form two-sided envelopes for W-invariant heat kernels.

Everything is assembled as a log first and exponentiated once, so the
formulas stay usable where the envelope itself under- or overflows.

Rank-one conventions: the single positive root satisfies ``alpha(X) = r`` and
``rho(X) = k r``.  For a general root datum ``rho`` is
``sum (k(alpha) + 2 k(2 alpha)) alpha`` over the positive indivisible roots,
which is the same normalisation.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError
from .kernels import as_point
from .specfun import as_k, phi0_log_jet


def log_envelope_E_rank1(k, p):
    k = as_k(k)
    p = as_point(p)
    r, s, t = p.r, p.s, p.t
    return (-0.5 * math.log(t) - (r - s) ** 2 / (4.0 * t) - k * k * t - k * (r + s)
            + math.log1p(r) + math.log1p(s)
            + (k - 1.0) * math.log(t + 1.0 + r + s) - k * math.log(t + r * s))


def envelope_E_rank1(k, p):
    """Two-sided envelope for the rank-one kernel.

    ``t^-1/2 e^{-(r-s)^2/4t} e^{-k^2 t} e^{-k(r+s)} (1+r)(1+s)
    (t+1+r+s)^(k-1) / (t+rs)^k``
    """
    return math.exp(log_envelope_E_rank1(k, p))


def envelope_E_phi0_form(k, p):
    """Variant of `envelope_E_rank1` with ``e^{-kr}(1+r)`` replaced by ``phi0(r)``."""
    k = as_k(k)
    p = as_point(p)
    r, s, t = p.r, p.s, p.t
    lg = (-0.5 * math.log(t) - (r - s) ** 2 / (4.0 * t) - k * k * t
          + phi0_log_jet(k, r)[0] + phi0_log_jet(k, s)[0]
          + (k - 1.0) * math.log(t + 1.0 + r + s) - k * math.log(t + r * s))
    return math.exp(lg)


def log_centered_envelope(k, r, t):
    k = as_k(k)
    p = as_point((r, 0.0, t))
    r, t = p.r, p.t
    return (-(k + 0.5) * math.log(t) - r * r / (4.0 * t) - k * k * t - k * r
            + math.log1p(r) + (k - 1.0) * math.log(t + 1.0 + r))


def centered_envelope(k, r, t):
    """``t^(-k-1/2) e^{-r^2/4t} e^{-k^2 t} e^{-kr} (1+r) (t+1+r)^(k-1)``."""
    return math.exp(log_centered_envelope(k, r, t))


# ---------------------------------------------------------------------------
# general root data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootDatum:
    """Positive indivisible roots with multiplicities ``k1 = k(alpha)``, ``k2 = k(2 alpha)``."""

    roots: tuple
    k1: tuple
    k2: tuple
    rho: tuple = None

    def __post_init__(self):
        roots = np.atleast_2d(np.asarray(self.roots, dtype=float))
        if roots.size == 0:
            raise DomainError("at least one root is required")
        k1 = np.asarray(self.k1, dtype=float).reshape(-1)
        k2 = np.asarray(self.k2, dtype=float).reshape(-1)
        if not (len(k1) == len(k2) == len(roots)):
            raise DomainError("one k1 and one k2 value per root")
        if not (np.all(np.isfinite(k1)) and np.all(np.isfinite(k2))) or k1.min() < 0 or k2.min() < 0:
            raise DomainError("multiplicities must be finite and non-negative")
        if not np.all(np.isfinite(roots)):
            raise DomainError("roots must be finite")
        for i in range(len(roots)):
            if np.linalg.norm(roots[i]) == 0:
                raise DomainError("zero root")
            for j in range(i):
                a, b = roots[i], roots[j]
                cross = np.dot(a, a) * np.dot(b, b) - np.dot(a, b) ** 2
                if cross <= 1e-12 * np.dot(a, a) * np.dot(b, b):
                    raise DomainError(f"roots {i} and {j} are proportional")
        rho_expected = ((k1 + 2.0 * k2)[:, None] * roots).sum(axis=0)
        if self.rho is None:
            rho = rho_expected
        else:
            rho = np.asarray(self.rho, dtype=float).reshape(-1)
            if rho.shape != rho_expected.shape or not np.allclose(rho, rho_expected, rtol=1e-12, atol=1e-12):
                raise DomainError(f"rho {rho} inconsistent with roots/multiplicities ({rho_expected})")
        object.__setattr__(self, "roots", tuple(tuple(float(x) for x in row) for row in roots))
        object.__setattr__(self, "k1", tuple(float(x) for x in k1))
        object.__setattr__(self, "k2", tuple(float(x) for x in k2))
        object.__setattr__(self, "rho", tuple(float(x) for x in rho))

    @property
    def rank(self):
        return len(self.roots[0])

    @classmethod
    def a1(cls, k):
        return cls(roots=((1.0,),), k1=(as_k(k),), k2=(0.0,))

    @classmethod
    def a_n_complex(cls, n):
        """Type A_n with k = 1 on the trace-zero hyperplane, written in ``R^(n+1)``."""
        roots = []
        for i in range(n + 1):
            for j in range(i + 1, n + 1):
                v = [0.0] * (n + 1)
                v[i], v[j] = 1.0, -1.0
                roots.append(tuple(v))
        m = len(roots)
        return cls(roots=tuple(roots), k1=(1.0,) * m, k2=(0.0,) * m)


@dataclass(frozen=True)
class VectorPoint:
    X: tuple
    Y: tuple
    t: float

    def __post_init__(self):
        X = tuple(float(x) for x in np.atleast_1d(self.X))
        Y = tuple(float(y) for y in np.atleast_1d(self.Y))
        if len(X) != len(Y):
            raise DomainError("X and Y must have the same dimension")
        t = float(self.t)
        if not (t > 0 and math.isfinite(t)) or not all(map(math.isfinite, X + Y)):
            raise DomainError("need finite X, Y and t > 0")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "t", t)


def _chamber_values(rd, v):
    if len(v.X) != rd.rank:
        raise DomainError(f"point dimension {len(v.X)} != root datum rank {rd.rank}")
    R = np.asarray(rd.roots)
    X = np.asarray(v.X)
    Y = np.asarray(v.Y)
    aX, aY = R @ X, R @ Y
    tol = 1e-12 * (1.0 + np.abs(X).max() + np.abs(Y).max())
    if aX.min() < -tol or aY.min() < -tol:
        raise DomainError("X and Y must lie in the closed positive chamber")
    return np.maximum(aX, 0.0), np.maximum(aY, 0.0), X, Y


def _log_gauss_part(rd, v, X, Y):
    rho = np.asarray(rd.rho)
    n = rd.rank
    t = v.t
    return (-0.5 * n * math.log(t) - float(np.sum((X - Y) ** 2)) / (4.0 * t)
            - float(rho @ rho) * t - float(rho @ (X + Y)))


def log_envelope_conjecture_general(rd, v):
    aX, aY, X, Y = _chamber_values(rd, v)
    t = v.t
    m = np.asarray(rd.k1) + np.asarray(rd.k2)
    prod = np.sum(np.log1p(aX) + np.log1p(aY) + (m - 1.0) * np.log(t + 1.0 + aX + aY)
                  - m * np.log(t + aX * aY))
    return _log_gauss_part(rd, v, X, Y) + float(prod)


def envelope_conjecture_general(rd, v):
    """Conjectured envelope for a general root datum (product over indivisible roots)."""
    return math.exp(log_envelope_conjecture_general(rd, v))


def log_dunkl_flat_envelope(rd, v):
    aX, aY, X, Y = _chamber_values(rd, v)
    t = v.t
    m = np.asarray(rd.k1) + np.asarray(rd.k2)
    return (-0.5 * rd.rank * math.log(t) - float(np.sum((X - Y) ** 2)) / (4.0 * t)
            - float(np.sum(m * np.log(t + aX * aY))))


def dunkl_flat_envelope(rd, v):
    """``t^(-n/2) e^{-|X-Y|^2/4t} / prod (t + alpha(X) alpha(Y))^k``."""
    return math.exp(log_dunkl_flat_envelope(rd, v))


def log_complex_case_envelope(rd, v):
    aX, aY, X, Y = _chamber_values(rd, v)
    t = v.t
    prod = np.sum(np.log1p(aX) + np.log1p(aY) - np.log(t + aX * aY))
    return _log_gauss_part(rd, v, X, Y) + float(prod)


def complex_case_envelope(rd, v):
    """Envelope of the complex (k = 1) case: every root contributes ``(1+a)(1+b)/(t+ab)``."""
    return math.exp(log_complex_case_envelope(rd, v))
