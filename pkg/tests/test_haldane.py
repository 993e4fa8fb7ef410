import numpy as np
import pytest

from anyonkin_pkg.miscutils import DomainError, ParamsError, MomentMatchError
from anyonkin_pkg.fields import make_grid
from anyonkin_pkg.haldane import \
    filling_factor, filling_factor_max, filling_factor_reg, solve_w, \
    solve_log_w, EquilibriumSpec, wu_profile, wu_equilibrium, \
    equilibrium_moments, minimal_energy, flat_energy, match_moments, \
    entropy_density, entropy, state_count
from anyonkin_pkg.invariants import desk_params

ALPHAS = (0.1, 0.25, 0.5, 0.75, 0.9, 1.0)

def test_filling_factor_endpoints():
    for alpha in ALPHAS:
        assert filling_factor(0.0, alpha) == 1.0
        if alpha < 1:
            assert filling_factor(1 / alpha, alpha) == pytest.approx(
                0.0, abs=1e-10)

def test_filling_factor_fermion_and_array():
    occ = np.linspace(0, 1, 11)
    assert np.allclose(filling_factor(occ, 1.0), 1 - occ, rtol=0, atol=1e-15)

def test_filling_factor_domain():
    with pytest.raises(DomainError):
        filling_factor(-0.1, 0.5)
    with pytest.raises(ValueError):
        filling_factor(2.5, 0.5)

@pytest.mark.parametrize("alpha", (0.1, 0.25, 0.4, 0.5, 0.75))
def test_filling_factor_max_bounds(alpha):
    occ = np.linspace(0, 1 / alpha, 20001)
    fmax = filling_factor_max(alpha)
    assert np.max(filling_factor(occ, alpha)) <= fmax * (1 + 1e-12)
    assert np.max(filling_factor_reg(occ, alpha, 3.0)) <= fmax * (1 + 1e-12)
    if alpha < 0.5:
        peak = (1 - 2 * alpha) / (alpha * (1 - alpha))
        assert filling_factor(peak, alpha) == pytest.approx(fmax, rel=1e-12)

def test_regularized_filling_factor_value():
    assert filling_factor_reg(0.0, 0.5, 1.0) == pytest.approx(
        0.70710678118654752, rel=1e-15)

def test_regularized_filling_factor_below_unregularized():
    occ = np.linspace(0, 2, 41)
    assert np.all(filling_factor_reg(occ, 0.5, 4.0)
                  <= filling_factor(occ, 0.5) + 1e-15)

JS = (2.0, 4.0, 16.0, 64.0)

@pytest.mark.parametrize("alpha", (0.1, 0.25, 0.5, 0.75, 0.9))
def test_regularization_gap_near_exclusion(alpha):
    for j in JS:
        occ = np.linspace(max(0.0, (1 - 2 / j) / alpha), 1 / alpha, 401)
        growth = (1 + (1 - alpha) * occ) ** (1 - alpha)
        gap = np.abs(filling_factor_reg(occ, alpha, j)
                     - filling_factor(occ, alpha))
        assert np.all(gap <= 2 ** (alpha + 1) / j ** alpha * growth + 1e-15)

@pytest.mark.parametrize("alpha", (0.25, 0.5, 0.75))
def test_regularization_gap_shrinks_in_j(alpha):
    occ = np.linspace(0, 1 / alpha, 201)
    gaps = [np.max(np.abs(filling_factor_reg(occ, alpha, j)
                          - filling_factor(occ, alpha))) for j in JS]
    assert np.all(np.diff(gaps) < 0)
    assert gaps[-1] < 2 ** (alpha + 1) / JS[-1] ** alpha

@pytest.mark.parametrize("alpha", (0.25, 0.5, 0.75, 1.0))
def test_regularized_ratio_decreasing_near_exclusion(alpha):
    occ = np.linspace(0.5 / alpha, 1 / alpha, 101)[:-1]
    ratio = filling_factor_reg(occ, alpha, 4.0) / occ
    assert np.all(np.diff(ratio) < 0)

def test_solve_w_fermion_exact():
    zetas = np.array([1e-3, 0.5, 1.0, 7.0, 1e3])
    assert np.array_equal(solve_w(zetas, 1.0), zetas)

def test_solve_w_golden_ratio():
    assert solve_w(1.0, 0.5) == pytest.approx((np.sqrt(5) - 1) / 2,
                                              rel=1e-14)

@pytest.mark.parametrize("alpha", ALPHAS)
def test_solve_w_residual(alpha):
    zetas = np.logspace(-6, 6, 121)
    w = solve_w(zetas, alpha)
    assert np.all(w > 0)
    lhs = alpha * np.log(w) + (1 - alpha) * np.log1p(w)
    assert np.max(np.abs(np.expm1(lhs - np.log(zetas)))) < 1e-12

def test_solve_w_boson_limit():
    alpha = 1e-8
    zetas = np.logspace(np.log10(1.1), 3, 41)
    assert np.allclose(solve_w(zetas, alpha), zetas - 1, rtol=1e-6, atol=0)
    occ = np.linspace(0, 10, 41)
    assert np.allclose(filling_factor(occ, alpha), 1 + occ, rtol=1e-6, atol=0)

def test_solve_log_w_extreme_arguments():
    s = solve_log_w(np.array([-700.0, 0.0, 700.0]), 0.3)
    assert np.all(np.isfinite(s))

def test_solve_w_domain():
    with pytest.raises(DomainError):
        solve_w(0.0, 0.5)

def test_equilibrium_spec_validation():
    with pytest.raises(ParamsError):
        EquilibriumSpec(0.0, -1.0, 0.5)
    with pytest.raises(ParamsError):
        EquilibriumSpec(0.0, 1.0, 0.0)

def test_wu_profile_range(grid):
    for alpha in ALPHAS:
        profile = wu_profile(EquilibriumSpec(2.0, 0.5, alpha), grid)
        inside = profile[grid.mask]
        assert np.all(inside > 0)
        assert np.all(inside <= 1 / alpha)
        assert np.all(profile[~grid.mask] == 0)

def test_wu_profile_maxwellian_tail(grid):
    mu, temperature = -10.0, 1.0
    profile = wu_profile(EquilibriumSpec(mu, temperature, 0.5), grid)
    energy = grid.speed2[grid.mask] / 2
    ratio = profile[grid.mask] * np.exp((energy - mu) / temperature)
    assert np.allclose(ratio, 1.0, rtol=1e-3, atol=0)

def test_wu_equilibrium_uniform(grid):
    field = wu_equilibrium(EquilibriumSpec(0.0, 1.0, 0.5), grid, time=2.0)
    assert field.is_x_uniform()
    assert field.time == 2.0

def test_energy_window_brackets_equilibrium(grid):
    spec = EquilibriumSpec(0.3, 0.8, 0.5)
    mass, energy = equilibrium_moments(spec, grid)
    assert minimal_energy(mass, 0.5, grid) < energy < flat_energy(mass, grid)

@pytest.mark.parametrize("alpha", (0.25, 0.5, 1.0))
def test_match_moments_round_trip(alpha):
    grid = make_grid(desk_params(alpha=alpha, j=3.0, nv=12))
    spec = EquilibriumSpec(0.3, 0.8, alpha)
    mass, energy = equilibrium_moments(spec, grid)
    found = match_moments(mass, energy, alpha, grid)
    assert found.mu == pytest.approx(spec.mu, abs=1e-6)
    assert found.temperature == pytest.approx(spec.temperature, rel=1e-6)
    got_mass, got_energy = equilibrium_moments(found, grid)
    assert got_mass == pytest.approx(mass, rel=1e-8)
    assert got_energy == pytest.approx(energy, rel=1e-8)

def test_match_moments_unreachable(grid):
    mass = 1.0
    with pytest.raises(MomentMatchError, match="unreachable"):
        match_moments(mass, 0.5 * minimal_energy(mass, 0.5, grid), 0.5, grid)
    with pytest.raises(MomentMatchError, match="unreachable"):
        match_moments(mass, 2 * flat_energy(mass, grid), 0.5, grid)
    with pytest.raises(MomentMatchError):
        match_moments(-1.0, 1.0, 0.5, grid)

def test_entropy_density_derivative():
    alpha, occ, step = 0.5, 0.3, 1e-6
    slope = (entropy_density(occ + step, alpha)
             - entropy_density(occ - step, alpha)) / (2 * step)
    expected = np.log(occ / filling_factor(occ, alpha))
    assert slope == pytest.approx(expected, abs=1e-7)

def test_entropy_of_empty_field(grid):
    assert entropy(np.zeros(grid.shape), grid, 0.5).value == 0.0

def test_state_count_values():
    assert state_count(4, 2, 0.5) == pytest.approx(7.875, rel=1e-12)
    assert state_count(4, 2, 1.0) == pytest.approx(6.0, rel=1e-12)
    assert state_count(4, 2, 0.0) == pytest.approx(10.0, rel=1e-12)

def test_state_count_domain():
    with pytest.raises(DomainError):
        state_count(1, 3, 1.0)
