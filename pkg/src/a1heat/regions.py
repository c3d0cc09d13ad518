"""Region geometry for the comparison argument.

Derived constants, region membership, the dyadic-exponent time windows that
cover ``[s, s^2]``, the canonical bump function and the partition of unity
that glues the window-wise comparison functions.
"""

from dataclasses import dataclass
import enum
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConfigurationError, DomainError
from .kernels import as_point
from .specfun import G_function, as_k

SAFETY = 1.1
FLOOR = 1e-6
R_LO, R_HI = 1e-3, 50.0


class RegionLabel(str, enum.Enum):
    ZERO = "Zero"
    A = "A"
    B = "B"
    C = "C"
    D1 = "D1"
    D2 = "D2"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class RegionParams:
    K0: float
    H: float
    R0: float
    R: float
    T: float
    M: float

    def __post_init__(self):
        if not (self.K0 > 0 and self.H > 0):
            raise ConfigurationError("K0 and H must be positive")
        checks = {
            "R0": max(1.0, 4.0 * self.K0 - 1.0),
            "R": self.R0 + 1.0,
            "T": (self.R ** 2 + 1.0) ** 1.5,
            "M": (self.R ** 2 + 1.0) ** 1.5 + 1.0,
        }
        for name, want in checks.items():
            if not math.isclose(getattr(self, name), want, rel_tol=1e-12):
                raise ConfigurationError(f"{name}={getattr(self, name)} violates its definition ({want})")

    @classmethod
    def from_constants(cls, K0, H):
        R0 = max(1.0, 4.0 * K0 - 1.0)
        R = R0 + 1.0
        T = (R * R + 1.0) ** 1.5
        return cls(K0=K0, H=H, R0=R0, R=R, T=T, M=T + 1.0)


def _refined_max(f, grid):
    """Max of ``f`` on a grid, polished by a bounded search around the best node."""
    vals = np.array([f(x) for x in grid])
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda x: -f(x), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10 * hi})
        best = max(best, -float(res.fun))
    return best


def k_sup(k, r_cap=R_HI, n=400):
    """``max |K(r)|`` over ``[1e-3, r_cap]`` (no safety margin)."""
    k = as_k(k)
    grid = np.geomspace(R_LO, r_cap, n)
    return _refined_max(lambda r: abs(G_function(k, float(r))[1]), grid)


def h_bound_profile(k, r):
    """``(1+r)^2 |k^2 - k| |1/r^2 - 1/sinh^2 r|`` (the Region A defect weight)."""
    r = np.asarray(r, dtype=float)
    small = r < 1e-3
    rr = np.where(small, 1.0, r)
    bracket = np.where(small, 1.0 / 3.0 - r * r / 15.0, 1.0 / rr ** 2 - 1.0 / np.sinh(rr) ** 2)
    return (1.0 + r) ** 2 * abs(k * k - k) * np.abs(bracket)


@lru_cache(maxsize=64)
def _derive(k):
    K0 = max(FLOOR, SAFETY * k_sup(k))
    grid = np.geomspace(R_LO, R_HI, 20000)
    Hraw = _refined_max(lambda r: float(h_bound_profile(k, r)), grid)
    H = max(FLOOR, SAFETY * Hraw)
    return RegionParams.from_constants(K0, H)


def derive_params(k):
    """Constants of the comparison argument with a 10% margin and a 1e-6 floor."""
    return _derive(as_k(k))


def classify(p, rp):
    """Set of regions containing ``(r, s, t)``; requires ``r >= s``."""
    p = as_point(p)
    r, s, t = p.r, p.s, p.t
    if r < s:
        raise DomainError("classify needs r >= s; swap the arguments first")
    out = set()
    if t <= rp.M:
        out.add(RegionLabel.ZERO)
    if t <= 2.0 * r:
        out.add(RegionLabel.A)
    ordered = t >= r >= s
    if ordered and t >= rp.T and r <= rp.R:
        out.add(RegionLabel.B)
    if ordered and t >= 1.0 and r >= rp.R0:
        if t >= r * s / 2.0:
            out.add(RegionLabel.C)
        if t <= r * s:
            if t >= s * s / 2.0:
                out.add(RegionLabel.D1)
            if t <= s * s:
                out.add(RegionLabel.D2)
    return frozenset(out)


def in_region(label, p, rp):
    return RegionLabel(label) in classify(p, rp)


# ---------------------------------------------------------------------------
# covering windows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoverWindow:
    a: Fraction
    N: int
    S: tuple
    Tw: tuple

    def contains(self, t, which="S"):
        lo, hi = self.S if which == "S" else self.Tw
        return lo <= t <= hi


def cover_level(s):
    """Smallest ``N >= 0`` with ``s <= 4^(2^N)``."""
    if not (s >= 1.0 and math.isfinite(s)):
        raise DomainError("cover windows need finite s >= 1")
    N = 0
    while s > 4.0 ** (2 ** N):
        N += 1
    return N


def window(s, a, N):
    sa = s ** float(a)
    return CoverWindow(a=Fraction(a), N=N, S=(sa / 2.0, 2.0 * sa), Tw=(sa / 4.0, 2.0 * sa))


def all_windows(s):
    N = cover_level(s)
    d = 2 ** N
    return [window(s, Fraction(j, d), N) for j in range(d, 2 * d + 1)]


def cover_windows(s, t):
    """Windows ``a = j/2^N`` whose ``S`` or ``Tw`` interval contains ``t``."""
    s, t = float(s), float(t)
    if not (1.0 <= s <= t <= s * s):
        raise DomainError(f"need 1 <= s <= t <= s^2, got s={s}, t={t}")
    out = [w for w in all_windows(s) if w.contains(t, "S") or w.contains(t, "Tw")]
    if not any(w.contains(t, "S") for w in out):
        raise AssertionError(f"covering failed at s={s}, t={t}")
    return out


# ---------------------------------------------------------------------------
# bump function and partition of unity
# ---------------------------------------------------------------------------

def bump_chi_full(x):
    """``(chi, 1 - chi, chi', chi'')`` with the complement computed without cancellation."""
    x = float(x)
    if x <= 1.0:
        return 1.0, 0.0, 0.0, 0.0
    if x >= 2.0:
        return 0.0, 1.0, 0.0, 0.0
    u = 2.0 - x
    v = 1.0 - u
    g = 1.0 / u - 1.0 / v
    g1 = -1.0 / u ** 2 - 1.0 / v ** 2
    g2 = 2.0 / u ** 3 - 2.0 / v ** 3
    # sigma(u) = 1/(1+e^g) and its complement, free of overflow and cancellation
    if g > 0:
        e = math.exp(-g)
        sig, comp = e / (1.0 + e), 1.0 / (1.0 + e)
    else:
        e = math.exp(g)
        sig, comp = 1.0 / (1.0 + e), e / (1.0 + e)
    s1 = -sig * comp * g1
    s2 = -(s1 * (comp - sig) * g1 + sig * comp * g2)
    return sig, comp, -s1, s2


def bump_chi(x):
    """``(chi, chi', chi'')``: 1 for x <= 1, 0 for x >= 2, C-infinity between."""
    c, _, c1, c2 = bump_chi_full(x)
    return c, c1, c2


@lru_cache(maxsize=1)
def bump_derivative_bounds(n=20001):
    """``(M1, M2)``: sampled maxima of ``|chi'|`` and ``|chi''|`` on ``[1, 2]``."""
    xs = np.linspace(1.0, 2.0, n)
    jets = np.array([bump_chi(x) for x in xs])
    return float(np.abs(jets[:, 1]).max()), float(np.abs(jets[:, 2]).max())


def _jmul(a, b):
    return (a[0] * b[0], a[1] * b[0] + a[0] * b[1], a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2])


def _cut(s, a_lo, a_hi, t):
    """Jet in t of the switch from window a_lo (value 1) to a_hi (value 0), plus ``1 - value``."""
    lo = s ** float(a_lo)
    hi = s ** float(a_hi)
    den = 2.0 * lo - hi / 4.0
    x = (t + 2.0 * lo - hi / 2.0) / den
    c, comp, c1, c2 = bump_chi_full(x)
    return (c, c1 / den, c2 / den ** 2), comp


def d2_partition_jets(s, t, m=None):
    """Non-zero weights of the window partition with their t-derivatives.

    Returns ``[(a, w, dw/dt, d2w/dt2), ...]``.  Weight ``i`` is
    ``(1 - v_{i-1}) prod_{j >= i} v_j`` where ``v_j`` switches from window
    ``j`` to ``j + 1``; the sum telescopes to 1.  ``1 - v`` is taken from the
    bump's complement so tiny weights keep their relative accuracy.
    """
    s, t = float(s), float(t)
    if not (1.0 <= s <= t <= s * s):
        raise DomainError(f"need 1 <= s <= t <= s^2, got s={s}, t={t}")
    N = cover_level(s)
    if m is None:
        m = N
    if m != N:
        raise DomainError(f"s={s} belongs to level {N}, not {m}")
    d = 2 ** m
    a = [Fraction(j, d) for j in range(d, 2 * d + 1)]
    n = len(a)
    one = (1.0, 0.0, 0.0)
    cuts = [_cut(s, a[i], a[i + 1], t) for i in range(n - 1)]
    v = [c for c, _ in cuts] + [one]
    tail = [None] * (n + 1)
    tail[n] = one
    for i in range(n - 1, -1, -1):
        tail[i] = _jmul(v[i], tail[i + 1])
    out = []
    for i in range(n):
        if i == 0:
            comp = one
        else:
            (_, p1, p2), pc = cuts[i - 1]
            comp = (pc, -p1, -p2)
        w = _jmul(comp, tail[i])
        if w[0] > 0.0:
            out.append((a[i], w[0], w[1], w[2]))
    return out


def d2_partition_weights(s, t, m=None):
    """``[(a, weight), ...]`` with the non-zero weights of the window partition."""
    return [(a, w) for a, w, _, _ in d2_partition_jets(s, t, m)]
