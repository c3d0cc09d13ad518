import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import ive

from a1heat.errors import ConfigurationError, DomainError
from a1heat.kernels import (CLOSED_K1_AMPLITUDE, CLOSED_K1_EPS, DEFAULT_CONFIG, EvalPoint,
                            KernelConfig, PdeGrid, calibrate_closed_k1, crude_bound,
                            dunkl_heat_kernel_rank1, heat_kernel_closed_k1, heat_kernel_pde,
                            heat_kernel_spectral, log_heat_kernel_closed_k1,
                            log_heat_kernel_spectral, log_scaled_bessel_jet, plancherel_constant)
from a1heat.specfun import phi_lambda, plancherel_density
from a1heat._quad import composite_legendre


def test_eval_point_validation():
    with pytest.raises(DomainError):
        EvalPoint(-1, 0, 1)
    with pytest.raises(DomainError):
        EvalPoint(1, 1, 0)
    with pytest.raises(DomainError):
        EvalPoint(1, float("nan"), 1)
    assert EvalPoint(1, 2, 3).swapped() == EvalPoint(2, 1, 3)


def test_kernel_config_validation():
    with pytest.raises(ConfigurationError):
        KernelConfig(t_min_spectral=0.0)
    with pytest.raises(ConfigurationError):
        KernelConfig(lambda_max_policy=(1.0, -1.0, 2.0))
    with pytest.raises(ConfigurationError):
        KernelConfig(plancherel_constant=-1.0)


# --- k = 1 closed form ----------------------------------------------------------

def test_closed_form_constants_are_calibrated():
    C, eps, misfit = calibrate_closed_k1()
    assert eps == CLOSED_K1_EPS == 1
    assert C == pytest.approx(CLOSED_K1_AMPLITUDE, rel=1e-11)
    assert misfit < 1e-11


@pytest.mark.parametrize("r,s,t", [(1, 2, 0.5), (0, 0, 1), (0.3, 0.1, 0.07), (5, 1, 3), (2, 2, 40),
                                   (12, 0.5, 1.0), (0, 7, 2)])
def test_spectral_matches_closed_form(r, s, t):
    a = log_heat_kernel_spectral(1.0, (r, s, t))
    b = log_heat_kernel_closed_k1((r, s, t))
    assert a == pytest.approx(b, abs=1e-10)


def test_symmetry_in_r_s():
    for k in (0.4, 2.3):
        assert log_heat_kernel_spectral(k, (0.7, 3.1, 0.8)) == pytest.approx(
            log_heat_kernel_spectral(k, (3.1, 0.7, 0.8)), abs=1e-11)


def test_spectral_against_direct_quadrature():
    # unshifted lambda integral of phi_lam(r) phi_lam(s) with an independent rule
    k, r, s, t = 1.7, 0.4, 0.6, 0.6
    lam, w = composite_legendre(np.linspace(0, 25, 101), 10)
    f = [math.exp(-(x * x + k * k) * t) * phi_lambda(k, x, r) * phi_lambda(k, x, s)
         for x in lam]
    direct = plancherel_constant(k) * float(np.sum(w * np.array(f) * plancherel_density(k, lam)))
    assert heat_kernel_spectral(k, (r, s, t)) == pytest.approx(direct, rel=1e-10)


def test_crude_bound_is_diagonal_value():
    for k in (0.5, 2.0):
        assert crude_bound(k, 0.7) == pytest.approx(heat_kernel_spectral(k, (0, 0, 0.7)), rel=1e-10)


def test_crude_bound_dominates():
    k, t = 1.3, 0.9
    cb = crude_bound(k, t)
    for r, s in [(0.5, 0.2), (3, 1), (2, 2)]:
        assert heat_kernel_spectral(k, (r, s, t)) <= cb * (1 + 1e-12)


def test_far_off_diagonal_stays_finite_in_log():
    lg = log_heat_kernel_spectral(2.0, (40.0, 0.5, 0.2))
    assert math.isfinite(lg) and lg < -1500


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 8.0), st.floats(0.0, 8.0), st.floats(0.1, 20.0))
def test_positivity(r, s, t):
    assert math.isfinite(log_heat_kernel_spectral(0.8, (r, s, t)))


def test_plancherel_constant_override():
    cfg = KernelConfig(plancherel_constant=2 * plancherel_constant(1.5))
    assert log_heat_kernel_spectral(1.5, (1, 1, 1), cfg) == pytest.approx(
        log_heat_kernel_spectral(1.5, (1, 1, 1)) + math.log(2), abs=1e-12)


# --- Dunkl kernel -----------------------------------------------------------------

@pytest.mark.parametrize("nu,z", [(-0.2, 0.3), (0.5, 1.9), (1.5, 2.1), (3.2, 40.0)])
def test_scaled_bessel_against_scipy(nu, z):
    logB, d1, _ = log_scaled_bessel_jet(nu, z)
    assert logB == pytest.approx(math.log(ive(nu, z)) - nu * math.log(z), abs=1e-13)
    h = 1e-5
    fd = (log_scaled_bessel_jet(nu, z + h)[0] - log_scaled_bessel_jet(nu, z - h)[0]) / (2 * h)
    assert d1 == pytest.approx(fd, abs=1e-8)


def test_dunkl_mass_is_one():
    k, r, t = 1.6, 1.2, 0.5
    s, w = composite_legendre(np.linspace(0, 12, 121), 10)
    vals = np.array([dunkl_heat_kernel_rank1(k, (r, x, t)) for x in s])
    assert float(np.sum(w * vals * s ** (2 * k))) == pytest.approx(1.0, rel=1e-12)


def test_dunkl_k1_is_three_dimensional_radial_kernel():
    r, s, t = 0.8, 1.5, 0.3
    g = lambda a: math.exp(-a * a / (4 * t))
    expect = (4 * math.pi * t) ** -0.5 * (g(r - s) - g(r + s)) / (r * s)
    assert dunkl_heat_kernel_rank1(1.0, (r, s, t)) == pytest.approx(expect, rel=1e-13)


def test_dunkl_half_is_planar_radial_kernel():
    from scipy.special import i0
    r, s, t = 0.8, 1.5, 0.3
    expect = math.exp(-(r * r + s * s) / (4 * t)) * i0(r * s / (2 * t)) / (2 * t)
    assert dunkl_heat_kernel_rank1(0.5, (r, s, t)) == pytest.approx(expect, rel=1e-13)


# --- PDE reference solver ----------------------------------------------------------

def test_pde_grid_invariants():
    with pytest.raises(ConfigurationError):
        PdeGrid(r_max=10, n_r=100, dt=1e-4, init_width=0.2)
    with pytest.raises(ConfigurationError):
        PdeGrid(r_max=10, n_r=1000, dt=1.0, init_width=0.2)
    with pytest.raises(ConfigurationError):
        PdeGrid(r_max=10, n_r=1000, dt=1e-4, init_width=0.01)
    g = PdeGrid.for_point(3, 1, 2)
    assert g.dt <= g.ds ** 2 and g.r_max >= 12


def test_pde_matches_closed_form_and_keeps_mass():
    k, r0, t = 1.0, 1.0, 1.0
    prof = heat_kernel_pde(k, r0, PdeGrid.for_point(r0, 2.0, t), t)
    assert prof.mass() == pytest.approx(1.0, abs=2e-3)
    for s in (0.0, 0.5, 2.0):
        assert float(prof(s)) == pytest.approx(heat_kernel_closed_k1((r0, s, t)), rel=3e-3)


def test_pde_general_k_against_spectral():
    k, r0, t = 2.5, 0.5, 0.5
    prof = heat_kernel_pde(k, r0, PdeGrid.for_point(r0, 0.5, t), t)
    assert float(prof(0.5)) == pytest.approx(heat_kernel_spectral(k, (r0, 0.5, t)), rel=5e-3)


def test_pde_rejects_short_grid():
    with pytest.raises(ConfigurationError):
        heat_kernel_pde(1.0, 5.0, PdeGrid(r_max=10, n_r=512, dt=(10 / 512) ** 2, init_width=0.1), 1.0)
