"""Verification harness: ratio sweeps, identities, cross-method checks, Monte Carlo."""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize

from ._parallel import pmap
from ._quad import composite_legendre
from .envelope import log_envelope_E_rank1
from .errors import A1HeatError, ConfigurationError, DomainError
from .kernels import (
    DEFAULT_CONFIG, EvalPoint, PdeGrid, as_point, heat_kernel_closed_k1, heat_kernel_pde,
    log_heat_kernel_spectral,
)
from .regions import classify, derive_params
from .specfun import as_k
from .supersolutions import remainder_ratio


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    r_values: tuple
    s_values: tuple
    t_values: tuple
    spacing: str = "log"
    enforce_r_ge_s: bool = True

    def __post_init__(self):
        for name in ("r_values", "s_values", "t_values"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise ConfigurationError(f"{name} is empty")
            if any(not math.isfinite(v) for v in vals):
                raise ConfigurationError(f"{name} has non-finite entries")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ConfigurationError(f"{name} must be strictly ascending (no duplicates)")
            if vals[0] < 0 or (name == "t_values" and vals[0] <= 0):
                raise ConfigurationError(f"{name} out of range")
            object.__setattr__(self, name, vals)
        if self.spacing not in ("linear", "log"):
            raise ConfigurationError("spacing must be 'linear' or 'log'")

    def points(self):
        out = []
        for r in self.r_values:
            for s in self.s_values:
                if self.enforce_r_ge_s and s > r:
                    continue
                for t in self.t_values:
                    out.append(EvalPoint(r, s, t))
        return out

    def __len__(self):
        return len(self.points())

    @classmethod
    def build(cls, r_max, n_rs, t_min, t_max, n_t, r_min=0.05, with_zero=True, spacing="log"):
        if spacing == "log":
            rs = np.geomspace(r_min, r_max, n_rs)
            ts = np.geomspace(t_min, t_max, n_t)
        else:
            rs = np.linspace(r_min, r_max, n_rs)
            ts = np.linspace(t_min, t_max, n_t)
        rs = tuple(([0.0] if with_zero else []) + [float(x) for x in rs])
        return cls(rs, rs, tuple(float(x) for x in ts), spacing)


PRESETS = {
    "smoke": dict(r_max=20.0, n_rs=4, t_min=0.1, t_max=50.0, n_t=4),
    "default": dict(r_max=20.0, n_rs=12, t_min=0.1, t_max=50.0, n_t=12),
    "dense": dict(r_max=20.0, n_rs=24, t_min=0.1, t_max=50.0, n_t=24),
}


def preset_grid(name):
    try:
        return GridSpec.build(**PRESETS[name])
    except KeyError:
        raise ConfigurationError(f"unknown grid preset {name!r}; choose from {sorted(PRESETS)}") from None


# ---------------------------------------------------------------------------
# routing
# ---------------------------------------------------------------------------

def log_heat_kernel(k, p, cfg=DEFAULT_CONFIG, method="auto"):
    """``(log h, method used)``; ``auto`` picks spectral above ``t_min_spectral``, else PDE."""
    k = as_k(k)
    p = as_point(p)
    if method == "auto":
        method = "spectral" if p.t >= cfg.t_min_spectral else "pde"
    if method == "spectral":
        return log_heat_kernel_spectral(k, p, cfg), method
    if method == "closed":
        if k != 1.0:
            raise DomainError("the closed form exists only for k = 1")
        return math.log(heat_kernel_closed_k1(p)), method
    if method == "pde":
        hi, lo = max(p.r, p.s), min(p.r, p.s)
        grid = PdeGrid.for_point(hi, lo, p.t)
        val = float(heat_kernel_pde(k, hi, grid, p.t)(lo))
        if not val > 0:
            raise A1HeatError(f"PDE value {val} not positive at {p}")
        return math.log(val), method
    raise ConfigurationError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# ratio sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatioReport:
    inf_ratio: float
    sup_ratio: float
    argmin: EvalPoint
    argmax: EvalPoint
    n_points: int
    per_region: dict
    s0_bracket: tuple
    bracket: tuple
    spread_bound: float
    passed: bool
    rows: tuple = field(default=(), repr=False, compare=False)

    @property
    def spread(self):
        return self.sup_ratio / self.inf_ratio


def ratio_sweep(k, grid, cfg=DEFAULT_CONFIG, bracket=(1e-3, 1e3), spread_bound=1e6, method="auto",
                keep_rows=False, threads=1):
    """``h / E`` over a grid with global, per-region and ``s = 0`` brackets.

    Passes when every ratio lies in ``bracket`` and ``sup / inf <= spread_bound``.
    """
    k = as_k(k)
    points = grid.points() if hasattr(grid, "points") else [as_point(q) for q in grid]
    if not points:
        raise ConfigurationError("empty grid")
    rp = derive_params(k)
    lo = (math.inf, None)
    hi = (-math.inf, None)
    per = {}
    s0 = [math.inf, -math.inf]
    rows = []

    def one(p):
        try:
            return log_heat_kernel(k, p, cfg, method)[0]
        except A1HeatError as exc:
            raise type(exc)(f"{exc} [at {p}]") from exc

    for p, lh in zip(points, pmap(one, points, threads)):
        lr = lh - log_envelope_E_rank1(k, p)
        q = p if p.r >= p.s else p.swapped()
        labels = sorted(str(x) for x in classify(q, rp))
        for lab in labels:
            a, b = per.get(lab, (math.inf, -math.inf))
            per[lab] = (min(a, lr), max(b, lr))
        if min(p.r, p.s) == 0.0:
            s0[0], s0[1] = min(s0[0], lr), max(s0[1], lr)
        if lr < lo[0]:
            lo = (lr, p)
        if lr > hi[0]:
            hi = (lr, p)
        if keep_rows:
            rows.append((p.r, p.s, p.t, lh, lh - lr, lr, "|".join(labels)))
    inf_r, sup_r = math.exp(lo[0]), math.exp(hi[0])
    per_region = {lab: (math.exp(a), math.exp(b)) for lab, (a, b) in sorted(per.items())}
    s0_bracket = (math.exp(s0[0]), math.exp(s0[1])) if s0[0] < math.inf else (math.nan, math.nan)
    passed = (bracket[0] <= inf_r and sup_r <= bracket[1] and sup_r / inf_r <= spread_bound)
    return RatioReport(inf_r, sup_r, lo[1], hi[1], len(points), per_region, s0_bracket,
                       tuple(bracket), spread_bound, bool(passed), tuple(rows))


# ---------------------------------------------------------------------------
# integral identities
# ---------------------------------------------------------------------------

def _log_sinh(x):
    return x + np.log1p(-np.exp(-2.0 * x)) - math.log(2.0)


def _radial_nodes(k, centre, t, n=10):
    """Gauss-Legendre nodes covering the bulk of ``s -> h(centre, s, t) sinh^2k(s)``."""
    top = centre + 2.0 * k * t + 12.0 * math.sqrt(t) + 8.0
    width = 0.5 * math.sqrt(t)
    panels = max(8, math.ceil(top / width))
    return composite_legendre(np.linspace(0.0, top, panels + 1), n)


def mass_check(k, r, t, cfg=DEFAULT_CONFIG):
    """``int_0^inf h(r, s, t) sinh(s)^2k ds`` by composite Gauss-Legendre."""
    k = as_k(k)
    s, w = _radial_nodes(k, float(r), float(t))
    logs = np.array([log_heat_kernel_spectral(k, (r, si, t), cfg) for si in s])
    expo = logs + 2.0 * k * _log_sinh(s)
    return float(np.sum(w * np.exp(expo)))


def semigroup_check(k, r, s, t1, t2, cfg=DEFAULT_CONFIG):
    """Relative Chapman-Kolmogorov defect ``|int h(r,u,t1) h(u,s,t2) dmu(u) - h(r,s,t1+t2)| / h``."""
    k = as_k(k)
    r, s, t1, t2 = float(r), float(s), float(t1), float(t2)
    if min(t1, t2) < cfg.t_min_spectral:
        raise DomainError("semigroup_check needs t1, t2 >= t_min_spectral")
    top = max(r, s) + 2.0 * k * (t1 + t2) + 12.0 * math.sqrt(t1 + t2) + 8.0
    panels = max(8, math.ceil(top / (0.5 * math.sqrt(min(t1, t2)))))
    u, w = composite_legendre(np.linspace(0.0, top, panels + 1), 10)
    la = np.array([log_heat_kernel_spectral(k, (r, ui, t1), cfg) for ui in u])
    lb = np.array([log_heat_kernel_spectral(k, (ui, s, t2), cfg) for ui in u])
    ref = log_heat_kernel_spectral(k, (r, s, t1 + t2), cfg)
    expo = la + lb + 2.0 * k * _log_sinh(u) - ref
    return abs(float(np.sum(w * np.exp(expo))) - 1.0)


# ---------------------------------------------------------------------------
# cross-method agreement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CrossCheck:
    point: EvalPoint
    values: dict
    errors: dict
    max_rel_dev: float


def oracle_crosscheck(k, p, cfg=DEFAULT_CONFIG, grid=None):
    """Values from every applicable method and their largest pairwise relative deviation."""
    k = as_k(k)
    p = as_point(p)
    values, errors = {}, {}
    if p.t >= cfg.t_min_spectral:
        try:
            values["spectral"] = math.exp(log_heat_kernel_spectral(k, p, cfg))
        except A1HeatError as exc:
            errors["spectral"] = str(exc)
    hi, lo = max(p.r, p.s), min(p.r, p.s)
    try:
        g = grid if grid is not None else PdeGrid.for_point(hi, lo, p.t)
        values["pde"] = float(heat_kernel_pde(k, hi, g, p.t)(lo))
    except A1HeatError as exc:
        errors["pde"] = str(exc)
    if k == 1.0:
        values["closed"] = heat_kernel_closed_k1(p)
    vals = list(values.values())
    dev = 0.0
    for i in range(len(vals)):
        for j in range(i):
            dev = max(dev, abs(vals[i] - vals[j]) / min(abs(vals[i]), abs(vals[j])))
    return CrossCheck(p, values, errors, dev)


# ---------------------------------------------------------------------------
# gluing remainders
# ---------------------------------------------------------------------------

def strip_map(stage, rp, u):
    """Point of a stage's closed transition strip at cube coordinates ``u`` (None if empty).

    The strips are where the stage's partition weight is not locally constant,
    clipped to the desk caps ``r <= 50``, ``t <= 100`` (``[T, 4T]`` for BCD).
    """
    a, b, c = (min(max(float(x), 0.0), 1.0) for x in u)
    if stage in ("D", "D2", "CD"):
        r = rp.R0 + a * (50.0 - rp.R0)
        s = 1.0 + b * (r - 1.0) if stage != "CD" else b * r
        if stage == "D":
            lo, hi = max(1.0, r, s * s / 2.0), min(r * s, s * s, 100.0)
        elif stage == "D2":
            lo, hi = max(1.0, r), min(r * s, s * s / 2.0, 100.0)
        else:
            lo, hi = max(1.0, r, r * s / 2.0), min(r * s, 100.0)
    elif stage == "BCD":
        r = rp.R0 + a
        s = b * r
        lo, hi = rp.T, 4.0 * rp.T
    elif stage == "ABCD":
        r = 0.5 * rp.M * (1.0 + a)
        s = b * r
        lo, hi = max(rp.M, r), 2.0 * r
    else:
        raise ConfigurationError(f"unknown stage {stage!r}")
    if not hi > lo:
        return None
    return EvalPoint(r, s, lo + c * (hi - lo))


def strip_points(stage, k, rp, n):
    """Closed ``(n+1)^3`` grid on a stage's transition strip; the ``2n`` grid contains it."""
    f = np.linspace(0.0, 1.0, n + 1)
    pts = (strip_map(stage, rp, (a, b, c)) for a in f for b in f for c in f)
    return [p for p in pts if p is not None]


def _log_remainder(stage, sign, k, rp, u):
    p = strip_map(stage, rp, u)
    if p is None:
        return -math.inf
    try:
        val = remainder_ratio(stage, sign, k, p, rp)
    except DomainError:
        return -math.inf
    return math.log(val) if val > 0 else -math.inf


def _polished_sup(stage, sign, k, rp, n, starts=3):
    """Grid maximum of ``log(t^2 |R| / h)`` refined by bounded local searches."""
    f = np.linspace(0.0, 1.0, n + 1)
    cube = [(a, b, c) for a in f for b in f for c in f]
    vals = np.array([_log_remainder(stage, sign, k, rp, u) for u in cube])
    finite = np.isfinite(vals)
    if not finite.any():
        return math.nan, 0
    best = float(vals[finite].max())
    order = np.argsort(np.where(finite, -vals, np.inf))[:starts]
    h = 1.0 / n

    def objective(u):
        # points off the strip get a large finite penalty so the search stays defined
        v = _log_remainder(stage, sign, k, rp, u)
        return 1e3 if math.isnan(v) else -max(v, -1e3)

    for i in order:
        x0 = np.array(cube[i])
        # simplex of one grid cell, pointing into the cube
        simplex = [x0] + [np.clip(x0 + (h if x0[j] < 0.5 else -h) * e, 0.0, 1.0)
                          for j, e in enumerate(np.eye(3))]
        res = minimize(objective, x0, method="Nelder-Mead", bounds=[(0.0, 1.0)] * 3,
                       options={"initial_simplex": np.array(simplex), "xatol": 1e-7,
                                "fatol": 1e-9, "maxfev": 800})
        if np.isfinite(res.fun):
            best = max(best, -float(res.fun))
    return math.exp(best), int(finite.sum())


@dataclass(frozen=True)
class RemainderReport:
    stage: str
    sign: str
    sup_coarse: float
    sup_fine: float
    n_coarse: int
    n_fine: int
    passed: bool

    @property
    def ratio(self):
        return self.sup_fine / self.sup_coarse


def remainder_sweep(stage, sign, k, n=8, rp=None):
    """``sup t^2 |R| / h`` over a stage's gluing strip from an ``n``- and a ``2n``-grid.

    Each estimate polishes its best grid points with a bounded local search,
    so the two agree once both grids see the basin of the supremum.
    """
    k = as_k(k)
    rp = derive_params(k) if rp is None else rp
    (c_sup, c_n), (f_sup, f_n) = (_polished_sup(stage, sign, k, rp, m) for m in (n, 2 * n))
    ok = (math.isfinite(c_sup) and math.isfinite(f_sup) and c_sup > 0
          and 0.5 <= f_sup / c_sup <= 2.0)
    return RemainderReport(stage, sign, c_sup, f_sup, c_n, f_n, bool(ok))


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class McConfig:
    n_paths: int = 100_000
    dt: float = 5e-4
    seed: int = 12345
    r_floor: float = 1e-6
    allow_small: bool = False

    def __post_init__(self):
        if self.n_paths < 1 or (self.n_paths < 10_000 and not self.allow_small):
            raise ConfigurationError("n_paths must be >= 10^4 (set allow_small for smoke runs)")
        if not (0 < self.dt <= 1e-3):
            raise ConfigurationError("dt must lie in (0, 1e-3]")
        if not self.r_floor > 0:
            raise ConfigurationError("r_floor must be positive")


def simulate_diffusion(k, r0, t, mc, return_stats=False):
    """Euler-Maruyama for ``dR = 2k coth(R) dt + sqrt(2) dB`` up to time ``t``.

    Paths that step below ``r_floor`` are reflected about it; if that happens
    in more than 0.1% of path-steps a warning is raised.
    """
    k = as_k(k)
    if k < 0.5:
        raise DomainError("the diffusion check needs k >= 1/2")
    r0, t = float(r0), float(t)
    if r0 < mc.r_floor or not t > 0:
        raise DomainError("need r0 >= r_floor and t > 0")
    steps = max(1, math.ceil(t / mc.dt))
    dt = t / steps
    rng = np.random.default_rng(mc.seed)
    R = np.full(mc.n_paths, r0)
    sq = math.sqrt(2.0 * dt)
    hits = 0
    for _ in range(steps):
        R += 2.0 * k * dt / np.tanh(R) + sq * rng.standard_normal(mc.n_paths)
        low = R < mc.r_floor
        if low.any():
            hits += int(low.sum())
            R[low] = 2.0 * mc.r_floor - R[low]
            np.maximum(R, mc.r_floor, out=R)
    frac = hits / (steps * mc.n_paths)
    if frac > 1e-3:
        warnings.warn(f"reflection guard active in {frac:.2%} of steps; samples are biased")
    if return_stats:
        return R, {"steps": steps, "guard_fraction": frac}
    return R


def spectral_cdf(k, r0, t, cfg=DEFAULT_CONFIG):
    """CDF of ``h(r0, s, t) sinh(s)^2k ds`` as a monotone interpolant, plus its mean."""
    k = as_k(k)
    top = r0 + 2.0 * k * t + 14.0 * math.sqrt(t) + 6.0
    panels = max(32, math.ceil(top / (0.1 * math.sqrt(t))))
    edges = np.linspace(0.0, top, panels + 1)
    s, w = composite_legendre(edges, 8)
    dens = np.exp(np.array([log_heat_kernel_spectral(k, (r0, si, t), cfg) for si in s])
                  + 2.0 * k * _log_sinh(s))
    per_panel = (w * dens).reshape(panels, -1).sum(axis=1)
    cdf = np.concatenate([[0.0], np.cumsum(per_panel)])
    mean = float(np.sum(w * dens * s))
    return PchipInterpolator(edges, cdf, extrapolate=False), float(cdf[-1]), mean, float(
        np.sum(w * dens * s * s))


@dataclass(frozen=True)
class McReport:
    ks_statistic: float
    threshold: float
    passed: bool
    mean_sample: float
    mean_spectral: float
    std_error: float
    mean_ok: bool
    total_mass: float
    guard_fraction: float


def mc_density_check(k, r0, t, mc, cfg=DEFAULT_CONFIG, margin=0.0):
    """Kolmogorov-Smirnov distance between simulated paths and the spectral law."""
    samples, stats = simulate_diffusion(k, r0, t, mc, return_stats=True)
    F, total, mean, second = spectral_cdf(k, r0, t, cfg)
    x = np.sort(samples)
    n = len(x)
    Fx = np.nan_to_num(F(x), nan=total)
    i = np.arange(1, n + 1)
    ks = float(max(np.max(i / n - Fx), np.max(Fx - (i - 1) / n)))
    thr = 1.63 / math.sqrt(n) * (1.0 + margin)
    m = float(samples.mean())
    se = float(samples.std(ddof=1)) / math.sqrt(n)
    return McReport(ks, thr, ks <= thr, m, mean, se, abs(m - mean) <= 3.0 * se, total,
                    stats["guard_fraction"])
