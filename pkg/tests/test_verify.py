import math

import numpy as np
import pytest

from a1heat.errors import ConfigurationError, DomainError
from a1heat.kernels import EvalPoint, heat_kernel_closed_k1
from a1heat.verify import (PRESETS, GridSpec, McConfig, log_heat_kernel, mass_check,
                           mc_density_check, oracle_crosscheck, preset_grid, ratio_sweep,
                           remainder_sweep, semigroup_check, simulate_diffusion, spectral_cdf,
                           strip_points)
from a1heat.regions import derive_params


# --- grids -------------------------------------------------------------------------

def test_grid_validation():
    with pytest.raises(ConfigurationError):
        GridSpec((), (1.0,), (1.0,))
    with pytest.raises(ConfigurationError):
        GridSpec((1.0, 1.0), (1.0,), (1.0,))
    with pytest.raises(ConfigurationError):
        GridSpec((1.0,), (1.0,), (0.0,))
    with pytest.raises(ConfigurationError):
        GridSpec((1.0,), (1.0,), (1.0,), spacing="cubic")
    with pytest.raises(ConfigurationError):
        preset_grid("huge")


def test_grid_points_respect_ordering():
    g = GridSpec((0.0, 1.0, 2.0), (0.0, 1.0, 2.0), (0.5,))
    pts = g.points()
    assert len(pts) == 6 and all(p.r >= p.s for p in pts)
    assert len(GridSpec((0.0, 1.0), (0.0, 1.0), (1.0,), enforce_r_ge_s=False)) == 4


def test_presets_shape():
    g = preset_grid("default")
    assert g.r_values[0] == 0.0 and g.r_values[-1] == pytest.approx(20.0)
    assert g.t_values[0] == pytest.approx(0.1) and g.t_values[-1] == pytest.approx(50.0)
    assert len(g.r_values) == PRESETS["default"]["n_rs"] + 1


# --- routing -------------------------------------------------------------------------

def test_routing():
    assert log_heat_kernel(1.0, (1, 2, 0.5))[1] == "spectral"
    assert log_heat_kernel(1.0, (1, 2, 0.02))[1] == "pde"
    lg, m = log_heat_kernel(1.0, (1, 2, 0.5), method="closed")
    assert m == "closed" and lg == pytest.approx(math.log(heat_kernel_closed_k1((1, 2, 0.5))))
    with pytest.raises(DomainError):
        log_heat_kernel(2.0, (1, 2, 0.5), method="closed")
    with pytest.raises(ConfigurationError):
        log_heat_kernel(2.0, (1, 2, 0.5), method="nope")


# --- identities ------------------------------------------------------------------------

@pytest.mark.parametrize("k,r,t", [(0.5, 0.0, 0.3), (1.0, 2.0, 1.0), (2.5, 1.0, 4.0)])
def test_unit_mass(k, r, t):
    assert mass_check(k, r, t) == pytest.approx(1.0, abs=1e-9)


def test_semigroup():
    assert semigroup_check(1.0, 1.0, 2.0, 0.5, 0.5) < 1e-9


def test_semigroup_rejects_small_times():
    with pytest.raises(DomainError):
        semigroup_check(1.0, 1.0, 1.0, 0.01, 0.5)


# --- ratio sweep ---------------------------------------------------------------------

def test_ratio_sweep_smoke_k1():
    rep = ratio_sweep(1.0, preset_grid("smoke"), keep_rows=True)
    assert rep.passed
    assert 0.2 < rep.inf_ratio <= rep.sup_ratio < 1.5
    assert rep.n_points == len(rep.rows) == len(preset_grid("smoke").points())
    assert "Zero" in rep.per_region
    assert rep.s0_bracket[0] >= rep.inf_ratio


def test_ratio_sweep_threads_deterministic():
    g = GridSpec((0.0, 1.0, 4.0), (0.0, 1.0), (0.5, 3.0))
    assert ratio_sweep(2.0, g, threads=1) == ratio_sweep(2.0, g, threads=2)


def test_ratio_sweep_empty():
    with pytest.raises(ConfigurationError):
        ratio_sweep(1.0, [])


# --- cross-check ---------------------------------------------------------------------

def test_crosscheck_k1():
    cc = oracle_crosscheck(1.0, (1.0, 2.0, 1.0))
    assert set(cc.values) == {"spectral", "pde", "closed"}
    assert cc.max_rel_dev < 0.01
    assert cc.values["spectral"] == pytest.approx(cc.values["closed"], rel=1e-12)


def test_crosscheck_small_t_has_no_spectral():
    cc = oracle_crosscheck(1.0, (0.5, 0.5, 0.02))
    assert "spectral" not in cc.values and cc.max_rel_dev < 0.01


# --- remainders ----------------------------------------------------------------------

def test_strip_points_lie_in_strips():
    rp = derive_params(2.0)
    for p in strip_points("CD", 2.0, rp, 3):
        assert 1.0 <= p.r * p.s / p.t <= 2.0 + 1e-12
    with pytest.raises(ConfigurationError):
        strip_points("E", 2.0, rp, 3)


def test_remainder_sweep_stable():
    rep = remainder_sweep("D", "+", 1.0, n=3)
    assert math.isfinite(rep.sup_coarse) and rep.passed
    assert rep.ratio == pytest.approx(rep.sup_fine / rep.sup_coarse)


# --- Monte Carlo -----------------------------------------------------------------------

def test_mc_config_validation():
    with pytest.raises(ConfigurationError):
        McConfig(n_paths=100)
    with pytest.raises(ConfigurationError):
        McConfig(dt=0.01)
    assert McConfig(n_paths=100, allow_small=True).n_paths == 100


def test_mc_rejects_small_k():
    with pytest.raises(DomainError):
        simulate_diffusion(0.3, 1.0, 0.5, McConfig(n_paths=100, allow_small=True))


def test_simulation_is_seeded():
    mc = McConfig(n_paths=500, dt=1e-3, seed=4, allow_small=True)
    a = simulate_diffusion(1.0, 1.0, 0.2, mc)
    b = simulate_diffusion(1.0, 1.0, 0.2, mc)
    assert np.array_equal(a, b) and np.all(a > 0)


def test_spectral_cdf_mass_and_mean():
    F, total, mean, _ = spectral_cdf(1.0, 1.0, 0.5)
    assert total == pytest.approx(1.0, abs=1e-9)
    assert float(F(0.0)) == 0.0 and 1.0 < mean < 4.0


def test_mc_small_run():
    rep = mc_density_check(1.0, 1.0, 0.5, McConfig(n_paths=20_000, dt=1e-3, seed=3))
    assert rep.passed and rep.mean_ok
    assert rep.threshold == pytest.approx(1.63 / math.sqrt(20_000))
