"""Special functions of the rank-one (A1) theory.

The radial operator is ``L = d^2/dr^2 + 2 k coth(r) d/dr`` and its spherical
functions ``phi_lam`` solve ``L phi = -(lam^2 + k^2) phi`` with ``phi(0) = 1``.
In Jacobi-function language these are ``phi_lam^{(k - 1/2, -1/2)}``.

Three evaluation routes are provided for ``phi_lam``:

* the Gauss hypergeometric series in ``tanh(r)**2`` (small ``r``),
* the Harish-Chandra expansion ``phi = c(lam) Phi_lam + c(-lam) Phi_-lam``
  with ``Phi_lam`` a series in ``cosh(r)**-2`` (large ``r``),
* the Laplace-type integral over ``beta in [0, 1]`` with Jacobi weight
  ``(beta (1 - beta))**(k - 1)``, which is valid for every complex ``lam``.

An ODE integration is kept as an independent oracle.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import gammaln

from ._quad import gauss_jacobi, gauss_legendre
from .errors import ConfigurationError, DomainError, EvaluationError

LOG2 = math.log(2.0)
LOG_2PI_HALF = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Multiplicity:
    k: float

    def __post_init__(self):
        k = float(self.k)
        if not math.isfinite(k) or k <= 0:
            raise DomainError(f"multiplicity must be finite and > 0, got {self.k!r}")
        object.__setattr__(self, "k", k)

    @property
    def rho(self):
        return self.k

    def __float__(self):
        return self.k


@dataclass(frozen=True)
class SpectralPoint:
    lam: float

    def __post_init__(self):
        lam = float(self.lam)
        if not math.isfinite(lam) or lam < 0:
            raise DomainError(f"spectral frequency must be finite and >= 0, got {self.lam!r}")
        object.__setattr__(self, "lam", lam)

    def __float__(self):
        return self.lam


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution of the beta- and lambda-quadratures.

    ``beta_nodes`` is the Gauss order per beta-panel, ``lambda_panels`` the
    minimum number of lambda-panels and ``nodes_per_panel`` their Gauss order.
    ``rel_tol`` sets the truncation of the Gaussian lambda tail.
    """

    beta_nodes: int = 12
    lambda_panels: int = 8
    nodes_per_panel: int = 12
    rel_tol: float = 1e-13

    def __post_init__(self):
        for name in ("beta_nodes", "lambda_panels", "nodes_per_panel"):
            v = getattr(self, name)
            if int(v) != v or v < 4:
                raise ConfigurationError(f"{name} must be an integer >= 4, got {v!r}")
        if not (0 < self.rel_tol <= 1e-2):
            raise ConfigurationError(f"rel_tol must lie in (0, 1e-2], got {self.rel_tol!r}")


DEFAULT_QUAD = QuadratureSpec()


def as_k(k):
    """Validate a multiplicity given as a float or a `Multiplicity`."""
    return Multiplicity(float(k)).k


# ---------------------------------------------------------------------------
# log-gamma
# ---------------------------------------------------------------------------

# B_{2n} / (2n (2n - 1)) for n = 1..8
_STIRLING = np.array([
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
])
_STIRLING_MIN = 15.0


def log_gamma_complex(z):
    """Principal branch of ``log Gamma(z)`` for complex ``z``.

    Arguments are shifted up by the recurrence until ``|z| >= 15`` in the
    right half plane, then the Stirling series with eight Bernoulli terms is
    summed.  The shift adds principal logs ``log(z + j)``, which keeps the
    branch cut on the negative real axis.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    re = z.real
    bad = (z.imag == 0) & (re <= 0) & (re == np.round(re))
    if np.any(bad):
        raise DomainError(f"log_gamma_complex has a pole at {z[bad][0].real:g}")

    need = (re < _STIRLING_MIN) & ((np.abs(z.imag) < _STIRLING_MIN) | (re < 0))
    shift = np.where(need, np.ceil(_STIRLING_MIN - re), 0).astype(int)
    acc = np.zeros_like(z)
    w = z.copy()
    for _ in range(int(shift.max(initial=0))):
        m = shift > 0
        acc[m] += np.log(w[m])
        w[m] += 1.0
        shift[m] -= 1

    inv = 1.0 / w
    inv2 = inv * inv
    series = np.zeros_like(w)
    for c in _STIRLING[::-1]:
        series = series * inv2 + c
    out = (w - 0.5) * np.log(w) - w + LOG_2PI_HALF + series * inv - acc
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# Gauss hypergeometric series
# ---------------------------------------------------------------------------

def hyp2f1_series(a, b, c, z, tol=1e-17, max_terms=50000):
    """Sum the ``2F1(a, b; c; z)`` power series (|z| < 1), vectorised over inputs."""
    a, b, c, z = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (a, b, c, z)))
    shape = a.shape
    a, b, c, z = (v.ravel() for v in (a, b, c, z))
    if np.any(np.abs(z) >= 1):
        raise DomainError("hyp2f1_series needs |z| < 1")
    total = np.ones_like(a)
    term = np.ones_like(a)
    active = np.ones(a.shape, dtype=bool)
    calm = np.zeros(a.shape, dtype=int)
    for n in range(max_terms):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        an, bn, cn = a[idx] + n, b[idx] + n, c[idx] + n
        ratio = an * bn / (cn * (n + 1.0)) * z[idx]
        term[idx] *= ratio
        total[idx] += term[idx]
        small = np.abs(term[idx]) <= tol * np.abs(total[idx])
        # only trust smallness once the terms are shrinking
        small &= np.abs(ratio) < 1.0
        calm[idx] = np.where(small, calm[idx] + 1, 0)
        active[idx] = calm[idx] < 3
    else:
        raise EvaluationError("hyp2f1 series did not converge")
    return total.reshape(shape)


# ---------------------------------------------------------------------------
# Laplace-type integral
# ---------------------------------------------------------------------------

def _log_norm(k):
    """log of Gamma(2k) / Gamma(k)^2."""
    return gammaln(2.0 * k) - 2.0 * gammaln(k)


def _beta_rule(k, r, m, nb):
    """Composite rule on [0, 1] absorbing (beta (1 - beta))**(k - 1) at both ends.

    Returns log(beta), 1 - beta and log weights (the Jacobi weight included).
    Between ``eps = exp(-2 r)`` and 1/2 the panels are geometric, so the
    integrand's scale ``beta + eps`` varies by a bounded factor on each.
    Everything near 0 is kept in logs since ``eps`` underflows for large r.
    """
    log_eps = -2.0 * r
    km1 = k - 1.0
    if log_eps >= -2.0 * LOG2:
        y, w = gauss_jacobi(2 * nb * m + 4, km1, km1)
        logw = np.log(w) + (1.0 - 2.0 * k) * LOG2
        return np.log1p(y) - LOG2, 0.5 * (1.0 - y), logw

    n_end = nb * m + 4
    # [0, eps]: weight beta**(k-1)
    y, w = gauss_jacobi(n_end, 0.0, km1)
    lb0 = log_eps - LOG2 + np.log1p(y)
    b0 = np.exp(lb0)
    l0 = np.log(w) + k * (log_eps - LOG2) + km1 * np.log1p(-b0)

    # geometric panels on [eps, 1/2]
    n_oct = max(1, math.ceil((-LOG2 - log_eps) / LOG2))
    log_edges = np.linspace(log_eps, -LOG2, n_oct * m + 1)
    dlog = log_edges[1] - log_edges[0]
    yg, wg = gauss_legendre(nb)
    L0 = log_edges[:-1, None]
    q1 = math.expm1(dlog)
    lb1 = (L0 + np.log1p(0.5 * q1 * (1.0 + yg))).ravel()
    o1 = -np.expm1(lb1)
    l1 = (L0 + np.log(0.5 * q1 * wg)).ravel() + km1 * (lb1 + np.log(o1))

    # [1/2, 1]: weight (1 - beta)**(k-1)
    y, w = gauss_jacobi(n_end, km1, 0.0)
    b2 = 0.25 * (3.0 + y)
    o2 = 0.25 * (1.0 - y)
    l2 = np.log(w) - k * 2.0 * LOG2 + km1 * np.log(b2)

    return (np.concatenate([lb0, lb1, np.log(b2)]), np.concatenate([1.0 - b0, o1, o2]),
            np.concatenate([l0, l1, l2]))


def laplace_integral(k, lam, r, derivs=0, quad=DEFAULT_QUAD):
    """Evaluate ``phi_lam(r)`` (and r-derivatives) by the Laplace-type integral.

    ``phi_lam(r) = Gamma(2k)/Gamma(k)^2 * int_0^1 A^(i lam - k) (beta(1-beta))^(k-1) d beta``
    with ``A = e^r beta + e^-r (1 - beta)``.  ``lam`` may be complex.

    Returns ``(log_scale, values)`` where ``values`` has shape
    ``(derivs + 1,) + lam.shape`` and the true quantities are
    ``exp(log_scale) * values``.  Derivatives are taken under the integral.
    """
    lam = np.asarray(lam, dtype=complex)
    shape = lam.shape
    lam = lam.ravel()
    r = float(r)
    if r < 0:
        raise DomainError("r must be >= 0")
    nu = 1j * lam - k
    xmax = float(np.max(np.abs(lam.real), initial=0.0))
    m = max(1, math.ceil(xmax * LOG2 / 3.0))
    log_beta, omb, logw = _beta_rule(k, r, m, quad.beta_nodes)
    # A = e^r beta + e^-r (1 - beta) and its log-derivative in r
    u = log_beta + r
    v = np.log(omb) - r
    loga_r = np.logaddexp(u, v)
    ratio = np.tanh(0.5 * (u - v))

    out = np.empty((derivs + 1, lam.size), dtype=complex)
    scale = np.empty(lam.size)
    chunk = max(1, 400000 // omb.size)
    lognorm = _log_norm(k)
    for i in range(0, lam.size, chunk):
        nu_c = nu[i:i + chunk, None]
        expo = nu_c * loga_r[None, :] + logw[None, :]
        smax = expo.real.max(axis=1)
        vals = np.exp(expo - smax[:, None])
        scale[i:i + chunk] = smax + lognorm
        out[0, i:i + chunk] = vals.sum(axis=1)
        if derivs >= 1:
            out[1, i:i + chunk] = nu_c[:, 0] * (vals * ratio).sum(axis=1)
        if derivs >= 2:
            out[2, i:i + chunk] = nu_c[:, 0] * (
                vals * ((nu_c - 1.0) * ratio ** 2 + 1.0)).sum(axis=1)
    return scale.reshape(shape), out.reshape((derivs + 1,) + shape)


# ---------------------------------------------------------------------------
# phi_0, phi_lambda
# ---------------------------------------------------------------------------

def _check_r(r):
    r = float(r)
    if not math.isfinite(r) or r < 0:
        raise DomainError(f"r must be finite and >= 0, got {r!r}")
    return r


def phi0(k, r, quad=DEFAULT_QUAD):
    """Ground spherical function ``phi_0(r)``."""
    return phi0_jet(k, r, quad)[0]


_PHI0_CACHE = {}


def phi0_log_jet(k, r, quad=DEFAULT_QUAD):
    """``(log phi_0, phi_0'/phi_0, phi_0''/phi_0)``; finite where ``phi_0`` underflows.

    Results are memoised per ``(k, r, quad)``; the cache is read-mostly and
    holds immutable tuples.
    """
    k = as_k(k)
    r = _check_r(r)
    key = (k, r, quad)
    hit = _PHI0_CACHE.get(key)
    if hit is not None:
        return hit
    scale, vals = laplace_integral(k, 0.0, r, derivs=2, quad=quad)
    v0 = float(vals[0].real)
    res = (float(scale) + math.log(v0), float(vals[1].real) / v0, float(vals[2].real) / v0)
    if len(_PHI0_CACHE) > 200000:
        _PHI0_CACHE.clear()
    _PHI0_CACHE[key] = res
    return res


def phi0_jet(k, r, quad=DEFAULT_QUAD):
    """``(phi_0, phi_0', phi_0'')`` at ``r`` from the differentiated integral."""
    lg, g1, g2 = phi0_log_jet(k, r, quad)
    f = math.exp(lg)
    return f, g1 * f, g2 * f


def log_c_tilde(k, lam):
    """``log[Gamma(i lam) / Gamma(k + i lam)]``; ``|c(lam)|^-2`` is ``1/(c~(lam) c~(-lam))``."""
    il = 1j * np.asarray(lam, dtype=complex)
    return log_gamma_complex(il) - log_gamma_complex(k + il)


def log_c0(k):
    """log of the constant ``2^(2k-1) Gamma(k+1/2) / sqrt(pi)`` in the c-function."""
    return (2.0 * k - 1.0) * LOG2 + gammaln(k + 0.5) - 0.5 * math.log(math.pi)


def _sech2(r):
    e = math.exp(-2.0 * r)
    return 4.0 * e / (1.0 + e) ** 2


def log_Phi(k, lam, r):
    """log of the Harish-Chandra series solution ``Phi_lam(r) ~ e^{(i lam - k) r}``.

    ``Phi_lam(r) = (2 cosh r)^(i lam - k) 2F1((k - i lam)/2, (k + 1 - i lam)/2; 1 - i lam; cosh(r)^-2)``.
    """
    lam = np.asarray(lam, dtype=complex)
    r = float(r)
    if r <= 0:
        raise DomainError("Phi_lam is singular at r = 0")
    il = 1j * lam
    x = _sech2(r)
    log2cosh = r + math.log1p(math.exp(-2.0 * r))
    F = hyp2f1_series((k - il) / 2.0, (k + 1.0 - il) / 2.0, 1.0 - il, x)
    return (il - k) * log2cosh + np.log(F)


def _phi_series(k, lam, r):
    """2F1 series after the Pfaff transformation (argument tanh(r)^2)."""
    il = 1j * lam
    th2 = math.tanh(r) ** 2
    F = hyp2f1_series((k + il) / 2.0, (k + 1.0 + il) / 2.0, k + 0.5, th2)
    return (np.exp(-(k + il) * math.log(math.cosh(r))) * F).real


def _phi_hc(k, lam, r):
    """Harish-Chandra expansion for real lam > 0: 2 Re[c(lam) Phi_lam(r)]."""
    lam = np.asarray(lam, dtype=float)
    logc = log_c0(k) + log_c_tilde(k, lam)
    return 2.0 * np.exp(logc + log_Phi(k, lam, r)).real


def _phi_laplace(k, lam, r, quad=DEFAULT_QUAD):
    scale, vals = laplace_integral(k, lam, r, quad=quad)
    return (np.exp(scale) * vals[0]).real


def phi_lambda_method(k, lam, r):
    """Name of the route ``phi_lambda`` takes in ``auto`` mode."""
    if lam == 0 or r == 0:
        return "laplace" if r > 0 else "exact"
    if math.tanh(r) ** 2 <= 0.5 and lam * r <= 8.0:
        return "series"
    if r >= 1.0 and lam >= 0.25 and lam * _sech2(r) <= 16.0:
        return "hc"
    return "laplace"


def phi_lambda(k, lam, r, quad=DEFAULT_QUAD, method="auto", validate=False):
    """Spherical function ``phi_lam(r)`` for real ``lam >= 0``.

    ``method`` is ``auto``, ``series`` (2F1 in tanh^2), ``hc``
    (Harish-Chandra expansion), ``laplace`` or ``ode``.  With ``validate``
    the result is compared with the ODE oracle, and a disagreement beyond
    ``1e-6 * phi_0(r)`` raises `EvaluationError`.
    """
    k = as_k(k)
    lam = SpectralPoint(lam).lam
    r = _check_r(r)
    if method == "auto":
        method = phi_lambda_method(k, lam, r)
    if method == "exact" or r == 0:
        val = 1.0
    elif method == "series":
        val = float(_phi_series(k, lam, r))
    elif method == "hc":
        if lam == 0:
            raise DomainError("the Harish-Chandra expansion is singular at lam = 0")
        val = float(_phi_hc(k, lam, r))
    elif method == "laplace":
        val = float(_phi_laplace(k, lam, r, quad))
    elif method == "ode":
        val = phi_lambda_ode(k, lam, r)
    else:
        raise ValueError(f"unknown method {method!r}")
    if validate and method != "ode":
        ref = phi_lambda_ode(k, lam, r)
        if abs(val - ref) > 1e-6 * max(phi0(k, r, quad), 1e-300):
            raise EvaluationError(
                f"phi_lambda disagreement at k={k}, lam={lam}, r={r}: {val!r} vs ODE {ref!r}")
    return val


def phi_lambda_jet(k, lam, r, quad=DEFAULT_QUAD):
    """``(phi, phi', phi'')`` for real ``lam`` via the differentiated Laplace integral."""
    k = as_k(k)
    lam = SpectralPoint(lam).lam
    r = _check_r(r)
    scale, vals = laplace_integral(k, lam, r, derivs=2, quad=quad)
    f = math.exp(float(scale))
    return tuple(float(v.real) * f for v in vals)


def phi_lambda_ode(k, lam, r, rtol=1e-12):
    """Independent oracle: integrate ``phi'' + 2k coth(r) phi' + (lam^2+k^2) phi = 0``.

    Starts from the even Taylor expansion at a small ``r0`` and uses the
    adaptive DOP853 Runge-Kutta scheme.
    """
    k = as_k(k)
    r = _check_r(r)
    mu = lam * lam + k * k
    a2 = -mu / (2.0 * (2.0 * k + 1.0))
    a4 = -(mu * a2 + 4.0 * k * a2 / 3.0) / (12.0 + 8.0 * k)

    def taylor(x):
        return 1.0 + a2 * x * x + a4 * x ** 4, 2.0 * a2 * x + 4.0 * a4 * x ** 3

    r0 = 1e-3 / (1.0 + math.sqrt(mu))
    if r <= r0:
        return taylor(r)[0]

    def rhs(x, y):
        return [y[1], -2.0 * k * y[1] / math.tanh(x) - mu * y[0]]

    sol = solve_ivp(rhs, (r0, r), list(taylor(r0)), method="DOP853",
                    rtol=rtol, atol=1e-300)
    if not sol.success:
        raise EvaluationError(f"ODE oracle failed: {sol.message}")
    return float(sol.y[0, -1])


# ---------------------------------------------------------------------------
# G function and Plancherel density
# ---------------------------------------------------------------------------

def G_function(k, r, limit=False, quad=DEFAULT_QUAD):
    """``G(r) = r d/dr log(sinh(r)^k phi_0(r))`` and ``K(r) = (G(r) - 1)(1 + r)``.

    ``r = 0`` is accepted only with ``limit=True`` and returns ``G = k``.
    """
    k = as_k(k)
    r = float(r)
    if r <= 0 or not math.isfinite(r):
        if limit and r == 0:
            return k, (k - 1.0)
        raise DomainError(f"G_function needs r > 0, got {r!r}")
    G = r * (k / math.tanh(r) + phi0_log_jet(k, r, quad)[1])
    return G, (G - 1.0) * (1.0 + r)


def plancherel_density(k, lam):
    """Unnormalised Plancherel density ``|Gamma(k + i lam) / Gamma(i lam)|^2``."""
    k = as_k(k)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise DomainError("lam must be >= 0")
    out = np.zeros(lam.shape)
    pos = lam > 0
    if np.any(pos):
        il = 1j * lam[pos]
        out[pos] = np.exp(2.0 * (log_gamma_complex(k + il) - log_gamma_complex(il)).real)
    return float(out) if out.ndim == 0 else out
