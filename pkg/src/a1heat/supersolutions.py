"""Comparison functions for the heat operator ``D = d_t - d_r^2 - 2k coth(r) d_r``.

Every auxiliary function is a product of elementary factors, so it is built
as a *log-jet* ``(l, l_r, l_rr, l_t)`` and stored as a `Jet2` carrying an
explicit log scale.  ``D f / f = l_t - l_rr - l_r^2 - 2k coth(r) l_r`` is then
evaluated without ever forming ``f`` itself, which keeps sign checks clean
where ``f`` under- or overflows.

Variants are keyed by the sign that ``D f`` should have: ``'+'`` means
``D f >= 0`` (the upper comparison function), ``'-'`` means ``D f <= 0``.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np

from ._parallel import pmap
from .errors import ConfigurationError, DomainError
from .kernels import as_point, log_scaled_bessel_jet, EvalPoint
from .regions import (
    RegionLabel, bump_chi_full, classify, cover_windows, d2_partition_jets, derive_params,
)
from .specfun import as_k, phi0_log_jet

SIGNS = ("+", "-")
STAGES = ("D2", "D", "CD", "BCD", "ABCD")


# ---------------------------------------------------------------------------
# jets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Jet2:
    """``f, f_r, f_rr, f_t`` in units of ``exp(log_scale)``."""

    value: float
    dr: float
    drr: float
    dt: float
    log_scale: float = 0.0

    def __post_init__(self):
        for name in ("value", "dr", "drr", "dt", "log_scale"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"non-finite jet entry {name}={getattr(self, name)}")

    @classmethod
    def from_log(cls, lj):
        l, lr, lrr, lt = lj
        return cls(1.0, lr, lrr + lr * lr, lt, l)

    def rescaled(self, log_scale):
        f = math.exp(self.log_scale - log_scale)
        return Jet2(self.value * f, self.dr * f, self.drr * f, self.dt * f, log_scale)

    def absolute(self):
        """Entries as plain floats (may under- or overflow)."""
        return self.rescaled(0.0)

    @property
    def log_abs_value(self):
        return self.log_scale + math.log(abs(self.value)) if self.value != 0 else -math.inf


def _coth(r):
    return 1.0 / math.tanh(r)


def apply_D(j, k, r):
    """``D f`` in the units of ``j`` (multiply by ``exp(j.log_scale)`` for the absolute value)."""
    k = as_k(k)
    r = float(r)
    if not r > 0:
        raise DomainError("apply_D needs r > 0 (coth pole at 0)")
    return j.dt - j.drr - 2.0 * k * _coth(r) * j.dr


def relative_D(j, k, r):
    """``D f / f``."""
    return apply_D(j, k, r) / j.value


def _lsum(*terms):
    return tuple(sum(x) for x in zip(*terms))


def _ljet_phi0(k, r):
    lg, g1, g2 = phi0_log_jet(k, r)
    return (lg, g1, g2 - g1 * g1, 0.0)


def _ljet_log_ratio(k, r):
    """``k log(r / sinh r)`` and its r-derivatives."""
    if r < 1e-3:
        r2 = r * r
        return (k * (-r2 / 6.0 + r2 * r2 / 180.0), k * (-r / 3.0 + r * r2 / 45.0),
                k * (-1.0 / 3.0 + r2 / 15.0), 0.0)
    log_sinh = r + math.log1p(-math.exp(-2.0 * r)) - math.log(2.0)
    return (k * (math.log(r) - log_sinh), k * (1.0 / r - _coth(r)),
            k * (-1.0 / r ** 2 + (2.0 * math.exp(-r) / -math.expm1(-2.0 * r)) ** 2), 0.0)


def _ljet_dunkl(k, r, s, t):
    nu = k - 0.5
    z = r * s / (2.0 * t)
    B0, B1, B2 = log_scaled_bessel_jet(nu, z)
    zr = s / (2.0 * t)
    return (-(k + 0.5) * math.log(2.0 * t) - (r - s) ** 2 / (4.0 * t) + B0,
            -(r - s) / (2.0 * t) + B1 * zr,
            -1.0 / (2.0 * t) + B2 * zr * zr,
            -(k + 0.5) / t + (r - s) ** 2 / (4.0 * t * t) - B1 * z / t)


def _ljet_gauss(r, s, t):
    return (-(r - s) ** 2 / (4.0 * t), -(r - s) / (2.0 * t), -1.0 / (2.0 * t),
            (r - s) ** 2 / (4.0 * t * t))


def _ljet_tpow(p, t):
    return (p * math.log(t), 0.0, 0.0, p / t)


def _ljet_decay(k, t):
    return (-k * k * t, 0.0, 0.0, -k * k)


def _ljet_const(c):
    return (c, 0.0, 0.0, 0.0)


# ---------------------------------------------------------------------------
# auxiliary functions
# ---------------------------------------------------------------------------

_SIGMA_FOR_PLUS = {
    RegionLabel.ZERO: -1, RegionLabel.A: +1, RegionLabel.B: -1,
    RegionLabel.C: -1, RegionLabel.D1: -1, RegionLabel.D2: -1,
}


@dataclass(frozen=True)
class AuxSpec:
    """Which comparison function to evaluate.

    ``sigma`` is the sign attached to ``c`` in the exponent.  For Regions
    Zero, B, C, D1 and D2 ``sigma = -1`` is the upper variant; in Region A
    the factor ``e^{-sigma c/t}`` gives ``D h`` the sign of ``sigma``.
    ``d2_convention='swapped'`` swaps the D2 exponents (both variants with
    ``e^{-ct/s^a}`` for the upper one) to probe that reading.
    """

    region: RegionLabel
    sigma: int
    c: float = 0.0
    d: float | None = None
    a: Fraction | None = None
    d2_convention: str = "signed"

    def __post_init__(self):
        region = RegionLabel(self.region)
        object.__setattr__(self, "region", region)
        if self.sigma not in (-1, 1):
            raise ConfigurationError("sigma must be +1 or -1")
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise ConfigurationError("c must be finite and >= 0")
        if region is RegionLabel.C:
            want = 0.5 if self.sigma == -1 else 0.0
            if self.d is None:
                object.__setattr__(self, "d", want)
            elif self.d != want:
                raise ConfigurationError(f"Region C with sigma={self.sigma} needs d={want}")
        if region is RegionLabel.D2:
            if self.a is None:
                raise ConfigurationError("Region D2 needs a window exponent a")
            object.__setattr__(self, "a", Fraction(self.a))
        if self.d2_convention not in ("signed", "swapped"):
            raise ConfigurationError("d2_convention must be 'signed' or 'swapped'")

    @property
    def target(self):
        """``'+'`` when ``D h >= 0`` is expected, ``'-'`` otherwise."""
        plus = _SIGMA_FOR_PLUS[self.region] == self.sigma
        return "+" if plus else "-"

    @classmethod
    def for_sign(cls, region, sign, c=0.0, a=None, d2_convention="signed"):
        region = RegionLabel(region)
        if sign not in SIGNS:
            raise ConfigurationError("sign must be '+' or '-'")
        sigma = _SIGMA_FOR_PLUS[region] * (1 if sign == "+" else -1)
        return cls(region=region, sigma=sigma, c=c, a=a, d2_convention=d2_convention)


def guaranteed_threshold(region, sign, k, rp):
    """Smallest ``c`` for which the sign of ``D h`` is guaranteed."""
    region = RegionLabel(region)
    k = as_k(k)
    K0 = rp.K0
    table = {
        (RegionLabel.ZERO, "+"): rp.H * (1.0 + rp.M) ** 2,
        (RegionLabel.ZERO, "-"): rp.H * (1.0 + rp.M) ** 2,
        (RegionLabel.A, "+"): 4.0 * rp.H,
        (RegionLabel.A, "-"): 4.0 * rp.H,
        (RegionLabel.B, "+"): 0.0,
        (RegionLabel.B, "-"): 0.0,
        (RegionLabel.C, "+"): K0 + 1.0,
        (RegionLabel.C, "-"): 0.5 + K0,
        (RegionLabel.D1, "+"): k * k + (2 * k + 2) * K0,
        (RegionLabel.D1, "-"): 2 * k + (2 * k + 2) * K0,
        (RegionLabel.D2, "+"): 4.0 * (k * k + 1.0 + (2 * k + 2) * K0),
        (RegionLabel.D2, "-"): 4.0 * (2 * k + (2 * k + 2) * K0),
    }
    return table[(region, sign)]


def h0_logjet(k, r, s, t):
    """``e^{-k^2 t} e^{-ks} (1+s) (r/sinh r)^k h_Du(r, s, t)``."""
    return _lsum(_ljet_decay(k, t), _ljet_const(-k * s + math.log1p(s)),
                 _ljet_log_ratio(k, r), _ljet_dunkl(k, r, s, t))


def _q_logjet(r, R):
    q = 1.0 + (R * R + 1.0) ** 1.5 - (r * r + 1.0) ** 1.5
    if not q > 0:
        raise DomainError(f"Q(r) <= 0 at r={r} > R={R}")
    rt = math.sqrt(r * r + 1.0)
    q1 = -3.0 * r * rt
    q2 = -3.0 * rt - 3.0 * r * r / rt
    g = q1 / q
    return (math.log(q), g, q2 / q - g * g, 0.0)


def _base_d(k, r, s, t):
    """``t^(k-3/2) phi0(r) phi0(s) e^{-(r-s)^2/4t} e^{-k^2 t} (rs)^-k``."""
    return _lsum(_ljet_tpow(k - 1.5, t), _ljet_phi0(k, r), _ljet_const(phi0_log_jet(k, s)[0]),
                 _ljet_gauss(r, s, t), _ljet_decay(k, t),
                 (-k * math.log(r) - k * math.log(s), -k / r, k / (r * r), 0.0))


def aux_logjet(spec, k, p, rp):
    k = as_k(k)
    r, s, t = p.r, p.s, p.t
    sg, c = spec.sigma, spec.c
    reg = spec.region
    if reg is RegionLabel.ZERO:
        extra = (-sg * c * t / (1.0 + t), 0.0, 0.0, -sg * c / (1.0 + t) ** 2)
        return _lsum(h0_logjet(k, r, s, t), extra)
    if reg is RegionLabel.A:
        return _lsum(h0_logjet(k, r, s, t), (-sg * c / t, 0.0, 0.0, sg * c / (t * t)))
    if reg is RegionLabel.B:
        out = _lsum(_ljet_tpow(-1.5, t), _ljet_decay(k, t), _ljet_phi0(k, r))
        return _lsum(out, _q_logjet(r, rp.R)) if sg == -1 else out
    if reg is RegionLabel.C:
        d = spec.d
        rt = math.sqrt(r * r + 1.0)
        ex = -d * r * s / t + sg * c * rt / t
        ex_r = -d * s / t + sg * c * r / (rt * t)
        ex_rr = sg * c / (rt ** 3 * t)
        ex_t = d * r * s / t ** 2 - sg * c * rt / t ** 2
        out = _lsum(_ljet_tpow(-1.5, t), _ljet_phi0(k, r), _ljet_const(phi0_log_jet(k, s)[0]),
                    _ljet_gauss(r, s, t), _ljet_decay(k, t), (ex, ex_r, ex_rr, ex_t))
        if sg == -1:
            out = _lsum(out, (-c * c / t, 0.0, 0.0, c * c / t ** 2))
        return out
    if reg is RegionLabel.D1:
        return _lsum(_base_d(k, r, s, t), (sg * c * s * s / t, 0.0, 0.0, -sg * c * s * s / t ** 2))
    if reg is RegionLabel.D2:
        sa = s ** float(spec.a)
        e = -sg if spec.d2_convention == "signed" else (-1 if sg == -1 else 1)
        return _lsum(_base_d(k, r, s, t), (e * c * t / sa, 0.0, 0.0, e * c / sa))
    raise ConfigurationError(f"unknown region {reg}")


def _check_window(spec, p):
    ws = cover_windows(p.s, p.t)
    if not any(w.a == spec.a and w.contains(p.t, "Tw") for w in ws):
        raise DomainError(f"t={p.t} is not in the window T_a for a={spec.a} at s={p.s}")


def aux_value(spec, k, p, rp, check_region=True):
    """Jet of the comparison function described by ``spec`` at ``p`` (``r >= s``)."""
    p = as_point(p)
    if p.r < p.s:
        raise DomainError("auxiliary functions assume r >= s; swap the arguments")
    if check_region:
        if spec.region not in classify(p, rp):
            raise DomainError(f"{p} is outside region {spec.region.value}")
        if spec.region is RegionLabel.D2:
            _check_window(spec, p)
    return Jet2.from_log(aux_logjet(spec, k, p, rp))


# ---------------------------------------------------------------------------
# gluing
# ---------------------------------------------------------------------------

def default_c_map(k, rp, sign):
    return {lab: guaranteed_threshold(lab, sign, k, rp) for lab in RegionLabel}


@dataclass(frozen=True)
class _Node:
    jet: Jet2
    dleaf: float  # sum of weight * D(leaf) in jet units


def _leaf(region, sign, k, p, rp, c_map, a=None):
    spec = AuxSpec.for_sign(region, sign, c=c_map[RegionLabel(region)], a=a)
    j = aux_value(spec, k, p, rp)
    return _Node(j, apply_D(j, k, p.r))


def _blend(n1, n2, w, k, r):
    """``w h1 + (1-w) h2`` with weight jet ``w = (w, w_r, w_rr, w_t, 1 - w)``."""
    w0, wr, wrr, wt, wc = w
    if wc == 0.0 and wr == wrr == wt == 0.0:
        return n1
    if w0 == 0.0 and wr == wrr == wt == 0.0:
        return n2
    L = max(n1.jet.log_scale, n2.jet.log_scale)
    a, b = n1.jet.rescaled(L), n2.jet.rescaled(L)
    fa = math.exp(n1.jet.log_scale - L)
    fb = math.exp(n2.jet.log_scale - L)
    dv = a.value - b.value
    dr = a.dr - b.dr
    jet = Jet2(
        value=w0 * a.value + wc * b.value,
        dr=w0 * a.dr + wc * b.dr + wr * dv,
        drr=w0 * a.drr + wc * b.drr + 2.0 * wr * dr + wrr * dv,
        dt=w0 * a.dt + wc * b.dt + wt * dv,
        log_scale=L,
    )
    return _Node(jet, w0 * n1.dleaf * fa + wc * n2.dleaf * fb)


def _chi_of(x, xr, xrr, xt):
    c, comp, c1, c2 = bump_chi_full(x)
    return (c, c1 * xr, c2 * xr * xr + c1 * xrr, c1 * xt, comp)


def _node_d2(sign, k, p, rp, c_map):
    parts = d2_partition_jets(p.s, p.t)
    nodes = [(w, w1, _leaf(RegionLabel.D2, sign, k, p, rp, c_map, a=a)) for a, w, w1, _ in parts]
    if len(nodes) == 1 and nodes[0][0] == 1.0 and nodes[0][1] == 0.0:
        return nodes[0][2]
    L = max(n.jet.log_scale for _, _, n in nodes)
    val = dr = drr = dt = dleaf = 0.0
    for w, w1, n in nodes:
        j = n.jet.rescaled(L)
        f = math.exp(n.jet.log_scale - L)
        val += w * j.value
        dr += w * j.dr
        drr += w * j.drr
        dt += w * j.dt + w1 * j.value
        dleaf += w * n.dleaf * f
    return _Node(Jet2(val, dr, drr, dt, L), dleaf)


def _node(stage, sign, k, p, rp, c_map):
    r, s, t = p.r, p.s, p.t
    if stage == "D2":
        return _node_d2(sign, k, p, rp, c_map)
    if stage == "D":
        w = _chi_of(s * s / t, 0.0, 0.0, -s * s / t ** 2)
        n1 = _leaf(RegionLabel.D1, sign, k, p, rp, c_map) if w[0] > 0 else None
        n2 = _node_d2(sign, k, p, rp, c_map) if w[4] > 0 else None
    elif stage == "CD":
        w = _chi_of(r * s / t, s / t, 0.0, -r * s / t ** 2)
        n1 = _leaf(RegionLabel.C, sign, k, p, rp, c_map) if w[0] > 0 else None
        n2 = _node("D", sign, k, p, rp, c_map) if w[4] > 0 else None
    elif stage == "BCD":
        w = _chi_of(r - rp.R0 + 1.0, 1.0, 0.0, 0.0)
        n1 = _leaf(RegionLabel.B, sign, k, p, rp, c_map) if w[0] > 0 else None
        n2 = _node("CD", sign, k, p, rp, c_map) if w[4] > 0 else None
    elif stage == "ABCD":
        w = _chi_of(t / r, -t / r ** 2, 2.0 * t / r ** 3, 1.0 / r)
        n1 = _leaf(RegionLabel.A, sign, k, p, rp, c_map) if w[0] > 0 else None
        n2 = _node("BCD", sign, k, p, rp, c_map) if w[4] > 0 else None
    else:
        raise ConfigurationError(f"unknown stage {stage!r}; expected one of {STAGES}")
    if n1 is None:
        return n2
    if n2 is None:
        return n1
    return _blend(n1, n2, w, k, r)


def glued_value(stage, sign, k, p, rp, c_map=None):
    """Jet of the glued comparison function of ``stage`` at ``p``."""
    return glued_with_remainder(stage, sign, k, p, rp, c_map)[0]


def glued_with_remainder(stage, sign, k, p, rp, c_map=None):
    """``(jet, R)`` where ``R = D(sum w_i h_i) - sum w_i D h_i`` in jet units.

    ``R`` collects every product-rule term created by the partition of
    unity, including the nested ones.
    """
    k = as_k(k)
    p = as_point(p)
    if p.r < p.s:
        raise DomainError("glued functions assume r >= s; swap the arguments")
    if sign not in SIGNS:
        raise ConfigurationError("sign must be '+' or '-'")
    if c_map is None:
        c_map = default_c_map(k, rp, sign)
    else:
        c_map = {**default_c_map(k, rp, sign), **{RegionLabel(kk): v for kk, v in c_map.items()}}
    n = _node(stage, sign, k, p, rp, c_map)
    return n.jet, apply_D(n.jet, k, p.r) - n.dleaf


def remainder_ratio(stage, sign, k, p, rp, c_map=None):
    """``t^2 |R| / h`` for the glued function of ``stage``."""
    p = as_point(p)
    jet, R = glued_with_remainder(stage, sign, k, p, rp, c_map)
    return p.t ** 2 * abs(R) / abs(jet.value)


# ---------------------------------------------------------------------------
# sign sweeps
# ---------------------------------------------------------------------------

SWEEP_CAPS = (50.0, 50.0, 100.0)


def _axis(lo, hi, n, log=True):
    if hi < lo:
        return np.array([])
    if hi == lo or n == 1:
        return np.array([lo])
    if log and lo > 0:
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def region_points(region, rp, n=20, caps=SWEEP_CAPS):
    """An ``n^3`` grid parametrised to lie inside ``region`` (``r >= s``).

    ``r`` and ``t`` are log-spaced over the region's extent under the caps;
    ``s`` is a fraction of its admissible range.  Region B lives at
    ``t >= T``, so its time axis is ``[T, max(4T, t_cap)]`` instead.
    """
    region = RegionLabel(region)
    rmax, smax, tmax = caps
    pts = []
    fr = np.linspace(0.0, 1.0, n)
    if region is RegionLabel.ZERO:
        for r in _axis(1e-3, rmax, n):
            for s in fr * min(r, smax):
                for t in _axis(1e-2, min(rp.M, tmax), n):
                    pts.append((r, s, t))
    elif region is RegionLabel.A:
        for r in _axis(1e-2, rmax, n):
            for s in fr * min(r, smax):
                for t in _axis(1e-2, min(2.0 * r, tmax), n):
                    pts.append((r, s, t))
    elif region is RegionLabel.B:
        for r in _axis(1e-3, rp.R, n):
            for s in fr * r:
                for t in _axis(rp.T, max(4.0 * rp.T, tmax), n):
                    pts.append((r, s, t))
    elif region is RegionLabel.C:
        for r in _axis(rp.R0, rmax, n):
            for s in fr * min(r, smax):
                lo = max(1.0, r, r * s / 2.0)
                for t in _axis(lo, tmax, n):
                    pts.append((r, s, t))
    elif region in (RegionLabel.D1, RegionLabel.D2):
        for r in _axis(rp.R0, rmax, n):
            for s in 1.0 + fr * (min(r, smax) - 1.0):
                if region is RegionLabel.D1:
                    lo, hi = max(1.0, r, s * s / 2.0), min(r * s, tmax)
                else:
                    lo, hi = max(1.0, r), min(r * s, s * s, tmax)
                for t in _axis(lo, hi, n):
                    pts.append((r, s, t))
    out = []
    for r, s, t in pts:
        p = EvalPoint(float(r), float(s), float(t))
        if region in classify(p, rp):
            out.append(p)
    return out


@dataclass(frozen=True)
class SignReport:
    """Extremum of ``D h / h`` over a sweep; ``scale`` is ``log h`` at that point."""

    target: str
    sign: str
    extremum: float
    location: EvalPoint
    scale: float
    n_points: int
    tolerance: float
    passed: bool
    c: float
    details: dict = field(default_factory=dict)

    @property
    def pass_(self):
        return self.passed


def _point_values(target, sign, k, rp, p, c, d2_convention, glued):
    """``[(D h / h, log h), ...]`` at one point (several D2 windows may apply)."""
    if glued:
        c_map = None if c is None else {lab: c for lab in RegionLabel}
        jet = glued_value(target, sign, k, p, rp, c_map)
        return [(relative_D(jet, k, p.r), jet.log_abs_value)]
    region = RegionLabel(target)
    if region is RegionLabel.D2:
        specs = [AuxSpec.for_sign(region, sign, c=c, a=w.a, d2_convention=d2_convention)
                 for w in cover_windows(p.s, p.t) if w.contains(p.t, "Tw")]
    else:
        specs = [AuxSpec.for_sign(region, sign, c=c)]
    out = []
    for spec in specs:
        jet = aux_value(spec, k, p, rp)
        out.append((relative_D(jet, k, p.r), jet.log_abs_value))
    return out


def sign_sweep(target, sign, k, rp=None, grid=20, c=None, tol=1e-8, d2_convention="signed",
               glued=False, threads=1):
    """Check the sign of ``D h`` for a region's comparison function or a glued stage.

    ``target`` names a region, or a stage from `STAGES` when ``glued`` is
    set.  ``grid`` is a point count per axis (a region-parametrised grid), a
    sequence of points, or a ``GridSpec``; points outside the region are
    dropped.  ``c`` defaults to the guaranteed threshold.
    """
    k = as_k(k)
    rp = derive_params(k) if rp is None else rp
    if sign not in SIGNS:
        raise ConfigurationError("sign must be '+' or '-'")
    is_stage = bool(glued)
    if is_stage and target not in STAGES:
        raise ConfigurationError(f"unknown stage {target!r}; expected one of {STAGES}")
    region = None if is_stage else RegionLabel(target)
    if c is None and not is_stage:
        c = guaranteed_threshold(region, sign, k, rp)
    if isinstance(grid, int):
        if is_stage:
            raise ConfigurationError("stages need an explicit point set")
        points = region_points(region, rp, n=grid)
    else:
        raw = grid.points() if hasattr(grid, "points") else [as_point(q) for q in grid]
        points = []
        for q in raw:
            if q.r < q.s:
                continue
            if region is not None and region not in classify(q, rp):
                continue
            points.append(q)
    if not points:
        raise ConfigurationError(f"no grid points inside {target}")
    per_point = pmap(lambda q: _point_values(target, sign, k, rp, q, c, d2_convention, is_stage),
                     points, threads)
    best = None
    count = 0
    for p, vals in zip(points, per_point):
        for val, logh in vals:
            count += 1
            key = val if sign == "+" else -val
            if best is None or key < best[0]:
                best = (key, val, p, logh)
    _, ext, loc, logh = best
    passed = ext >= -tol if sign == "+" else ext <= tol
    return SignReport(target=str(target), sign=sign, extremum=float(ext), location=loc,
                      scale=float(logh), n_points=count, tolerance=tol, passed=bool(passed),
                      c=float(c) if c is not None else float("nan"))
