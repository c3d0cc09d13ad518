import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from a1heat.errors import ConfigurationError, DomainError, EvaluationError
from a1heat.specfun import (G_function, Multiplicity, QuadratureSpec, SpectralPoint, as_k,
                            hyp2f1_series, laplace_integral, log_gamma_complex, log_Phi, phi0,
                            phi0_jet, phi_lambda, phi_lambda_jet, phi_lambda_method,
                            phi_lambda_ode, plancherel_density)

mp.mp.dps = 30


def phi_mp(k, lam, r):
    """Jacobi-function oracle: 2F1((k+i lam)/2, (k-i lam)/2; k+1/2; -sinh^2 r)."""
    a = (k + 1j * lam) / 2
    return float(mp.re(mp.hyp2f1(a, mp.conj(a), k + 0.5, -mp.sinh(r) ** 2)))


# --- domain types ---------------------------------------------------------------

@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_multiplicity_rejects(bad):
    with pytest.raises(DomainError):
        Multiplicity(bad)


def test_multiplicity_rho_and_coercion():
    m = Multiplicity(2.5)
    assert m.rho == 2.5 and float(m) == 2.5 and as_k(m) == 2.5


def test_spectral_point_rejects_negative():
    with pytest.raises(DomainError):
        SpectralPoint(-0.1)


def test_quadrature_spec_invariants():
    with pytest.raises(ConfigurationError):
        QuadratureSpec(beta_nodes=3)
    with pytest.raises(ConfigurationError):
        QuadratureSpec(rel_tol=0.5)


# --- log-gamma, 2F1 --------------------------------------------------------------

def test_log_gamma_reference_point():
    assert abs(log_gamma_complex(2 + 3j) - complex(mp.loggamma(2 + 3j))) < 1e-13


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 40), st.floats(-60, 60))
def test_log_gamma_matches_mpmath(x, y):
    ours = complex(log_gamma_complex(complex(x, y)))
    ref = complex(mp.loggamma(mp.mpc(x, y)))
    assert abs(ours - ref) <= 1e-12 * max(1.0, abs(ref))


def test_log_gamma_vectorised_shape():
    z = np.array([[1 + 1j, 2.5], [10 - 4j, 0.3 + 20j]])
    out = log_gamma_complex(z)
    assert out.shape == z.shape
    assert abs(out[1, 1] - complex(mp.loggamma(0.3 + 20j))) < 1e-12


def test_hyp2f1_series_against_mpmath():
    for a, b, c, z in [(0.5, 1.5, 2.0, 0.3), (1 + 2j, 1.5 - 2j, 2.5, 0.9), (3, -2, 0.5, -0.7)]:
        ref = complex(mp.hyp2f1(a, b, c, z))
        assert abs(complex(hyp2f1_series(a, b, c, z)) - ref) < 1e-12 * max(1, abs(ref))


def test_hyp2f1_series_domain():
    with pytest.raises(DomainError):
        hyp2f1_series(1, 1, 1, 1.0)


# --- spherical functions -----------------------------------------------------------

def test_phi_at_origin_is_one():
    for k in (0.3, 1.0, 4.0):
        assert phi_lambda(k, 2.0, 0.0) == 1.0


@pytest.mark.parametrize("k", [0.3, 0.5, 1.0, 2.5])
@pytest.mark.parametrize("lam,r", [(0.0, 0.7), (0.5, 2.0), (3.0, 0.4), (7.0, 3.0), (1.3, 8.0)])
def test_phi_lambda_against_mpmath(k, lam, r):
    ref = phi_mp(k, lam, r)
    scale = phi_mp(k, 0.0, r)
    assert abs(phi_lambda(k, lam, r) - ref) <= 1e-10 * scale


@pytest.mark.parametrize("method", ["series", "laplace", "ode"])
def test_phi_methods_agree(method):
    k, lam, r = 1.7, 1.1, 0.6
    assert phi_lambda(k, lam, r, method=method) == pytest.approx(phi_mp(k, lam, r), rel=1e-9)


def test_phi_hc_route_far_out():
    k, lam, r = 0.8, 2.0, 5.0
    assert phi_lambda_method(k, lam, r) == "hc"
    ref = phi_mp(k, lam, r)
    assert abs(phi_lambda(k, lam, r) - ref) < 1e-10 * phi_mp(k, 0.0, r)


def test_phi_k1_closed_form():
    # k = 1: phi_lam(r) = sin(lam r) / (lam sinh r)
    for lam, r in [(0.5, 1.0), (2.0, 3.0), (4.0, 0.2)]:
        exact = math.sin(lam * r) / (lam * math.sinh(r))
        assert phi_lambda(1.0, lam, r) == pytest.approx(exact, abs=1e-12)


def test_phi0_k1_closed_form():
    for r in (0.1, 1.0, 5.0, 20.0):
        assert phi0(1.0, r) == pytest.approx(r / math.sinh(r), rel=1e-12)


def test_validate_flag_runs_ode():
    assert phi_lambda(2.0, 1.0, 1.5, validate=True) == pytest.approx(phi_mp(2.0, 1.0, 1.5), rel=1e-9)


def test_unknown_method():
    with pytest.raises(ValueError):
        phi_lambda(1.0, 1.0, 1.0, method="magic")


def test_hc_rejects_zero_frequency():
    with pytest.raises(DomainError):
        phi_lambda(1.0, 0.0, 2.0, method="hc")


def test_ode_oracle_matches_mpmath():
    assert phi_lambda_ode(0.4, 2.5, 3.0) == pytest.approx(phi_mp(0.4, 2.5, 3.0), abs=1e-10)


@pytest.mark.parametrize("k,lam,r", [(0.5, 0.0, 1.2), (2.0, 1.5, 0.8), (3.7, 0.3, 4.0)])
def test_jet_matches_finite_differences(k, lam, r):
    f, f1, f2 = phi_lambda_jet(k, lam, r)
    h = 1e-4
    fp, fm = phi_lambda(k, lam, r + h, method="laplace"), phi_lambda(k, lam, r - h, method="laplace")
    assert f1 == pytest.approx((fp - fm) / (2 * h), rel=1e-6, abs=1e-10)
    assert f2 == pytest.approx((fp - 2 * f + fm) / h ** 2, rel=1e-4, abs=1e-7)


def test_jet_solves_the_radial_ode():
    k, lam, r = 1.3, 0.9, 2.2
    f, f1, f2 = phi_lambda_jet(k, lam, r)
    resid = f2 + 2 * k / math.tanh(r) * f1 + (lam ** 2 + k ** 2) * f
    assert abs(resid) < 1e-11


def test_phi0_jet_positive_and_decreasing():
    for r in (0.01, 0.5, 3.0, 30.0):
        p, dp, _ = phi0_jet(0.6, r)
        assert p > 0 and dp < 0


def test_phi0_upper_bound_one():
    for r in np.linspace(0.0, 10.0, 11):
        assert 0 < phi0(2.0, r) <= 1.0 + 1e-15


def test_laplace_integral_complex_frequency():
    k, lam, r = 1.0, 0.7 + 0.4j, 1.5
    scale, vals = laplace_integral(k, lam, r)
    got = complex(np.exp(scale) * vals[0])
    exact = complex(mp.sin(lam * r) / (lam * mp.sinh(r)))
    assert abs(got - exact) < 1e-12 * abs(exact)


def test_log_Phi_asymptotics():
    # Phi_lam(r) e^{(k - i lam) r} -> 1 as r grows
    k, lam = 1.4, 2.0
    val = complex(log_Phi(k, lam, 25.0)) - (1j * lam - k) * 25.0
    assert abs(val) < 1e-12


def test_log_Phi_singular_at_zero():
    with pytest.raises(DomainError):
        log_Phi(1.0, 1.0, 0.0)


# --- G and Plancherel ---------------------------------------------------------------

def test_G_limit_and_large_r():
    G, K = G_function(0.7, 0.0, limit=True)
    assert G == 0.7 and K == pytest.approx(-0.3)
    with pytest.raises(DomainError):
        G_function(0.7, 0.0)
    # k = 1: sinh(r) phi_0(r) = r, so G = 1 exactly
    G1, K1 = G_function(1.0, 3.0)
    assert G1 == pytest.approx(1.0, abs=1e-12) and abs(K1) < 1e-11


def test_G_small_r_tends_to_k():
    assert G_function(2.5, 1e-3)[0] == pytest.approx(2.5, rel=1e-5)


def test_plancherel_density_k1():
    lam = np.array([0.0, 0.5, 2.0])
    assert np.allclose(plancherel_density(1.0, lam), lam ** 2, rtol=1e-13, atol=0)


def test_plancherel_density_half():
    # k = 1/2: |Gamma(1/2 + i x)/Gamma(i x)|^2 = x tanh(pi x)
    x = 1.3
    assert plancherel_density(0.5, x) == pytest.approx(x * math.tanh(math.pi * x), rel=1e-13)


def test_plancherel_density_domain():
    with pytest.raises(DomainError):
        plancherel_density(1.0, -1.0)


def test_evaluation_error_is_runtime():
    assert issubclass(EvaluationError, RuntimeError)
