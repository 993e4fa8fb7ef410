import numpy as np
import pytest

from anyonkin_pkg.miscutils import ParamsError, GridError, RangeViolation
from anyonkin_pkg.fields import \
    SimulationParams, DistributionField, make_grid, compute_moments, \
    local_moments, clamp_initial_data, check_range, mollify
from anyonkin_pkg.haldane import EquilibriumSpec, wu_equilibrium
from anyonkin_pkg.invariants import desk_params

def test_params_collect_all_violations():
    with pytest.raises(ParamsError) as info:
        SimulationParams(alpha=1.5, gamma_prime=0.6, nv=1)
    violations = info.value.violations
    assert "alpha out of (0,1]" in violations
    assert "gamma_prime must be < 1/2" in violations
    assert "nv must be >= 2" in violations
    assert ("alpha", "out of (0,1]") in info.value.keyed

def test_params_clamp_level():
    params = SimulationParams(alpha=0.5, j=4.0)
    assert params.clamp_level == pytest.approx(1.75)

def test_params_reject_j_below_alpha():
    with pytest.raises(ParamsError, match="j must be > alpha"):
        SimulationParams(alpha=1.0, j=0.9, gamma=0.1)

def test_grid_nodes_symmetric(grid):
    assert np.array_equal(grid.v_nodes, -grid.v_nodes[::-1])
    assert np.array_equal(grid.mask, grid.mask[::-1, ::-1])
    assert grid.dv == pytest.approx(2 * grid.j / grid.nv)
    assert np.all(grid.speed2[grid.mask] <= grid.j ** 2)

def test_grid_under_resolved():
    with pytest.raises(GridError, match="grid under-resolved"):
        make_grid(desk_params(nv=3))

def test_grid_admissible_angles_strict():
    params = desk_params(ntheta=16, gamma_prime=0.2)
    grid = make_grid(params)
    cos_t = np.abs(np.cos(grid.theta_nodes))
    expected = (cos_t > 0.2) & (cos_t < 0.8)
    assert np.array_equal(grid.admissible_theta, expected)
    assert grid.theta_measure == pytest.approx(
        np.count_nonzero(expected) * grid.dtheta)

def test_field_values_read_only(grid):
    field = DistributionField.zeros(grid)
    with pytest.raises(ValueError):
        field.values[0, 0, 0] = 1.0

def test_field_rejects_bad_shape():
    with pytest.raises(ValueError):
        DistributionField(np.zeros((2, 3, 4)))

def test_uniform_field_masked(grid):
    field = DistributionField.uniform(grid, np.ones((grid.nv, grid.nv)))
    assert field.is_x_uniform()
    assert np.all(field.values[:, ~grid.mask] == 0)

def test_moments_under_reflection(grid, random_field):
    values = random_field(grid)
    direct = compute_moments(values, grid)
    mirrored = compute_moments(values[:, ::-1, ::-1].copy(), grid)
    assert mirrored.mass == direct.mass
    assert mirrored.energy == direct.energy
    assert mirrored.momentum1 == -direct.momentum1
    assert mirrored.momentum2 == -direct.momentum2

def test_local_moments_sum_to_global(grid, random_field):
    values = random_field(grid)
    per_x = local_moments(values, grid)
    total = compute_moments(values, grid)
    assert np.sum(per_x[:, 0]) * grid.dx == pytest.approx(total.mass)
    assert np.sum(per_x[:, 3]) * grid.dx == pytest.approx(total.energy)

def test_local_moments_scaled(grid, random_field):
    values = random_field(grid)
    plain = local_moments(values, grid)
    scaled = local_moments(values, grid, grid.j)
    assert np.array_equal(scaled[:, 0], plain[:, 0])
    assert np.allclose(scaled[:, 1:3] * grid.j, plain[:, 1:3],
                       rtol=1e-13, atol=1e-15)
    assert np.allclose(scaled[:, 3] * grid.j ** 2, plain[:, 3],
                       rtol=1e-13, atol=0)

def test_clamp_inactive_for_equilibrium(params, grid):
    f0 = wu_equilibrium(EquilibriumSpec(0.0, 1.0, params.alpha), grid)
    assert np.max(f0.values) < params.clamp_level
    clamped = clamp_initial_data(f0, params, grid)
    assert np.array_equal(clamped.values[:, grid.mask],
                          f0.values[:, grid.mask])

def test_clamp_caps_and_masks(params, grid):
    f0 = DistributionField(np.full(grid.shape, 10.0))
    clamped = clamp_initial_data(f0, params, grid).values
    assert np.all(clamped[:, grid.mask] == params.clamp_level)
    assert np.all(clamped[:, ~grid.mask] == 0)

def test_mollify_keeps_mask(grid, random_field):
    out = mollify(random_field(grid), grid)
    assert np.all(out[:, ~grid.mask] == 0)
    assert np.all(out >= 0)

def test_check_range_accepts_valid(params, grid, random_field):
    values = random_field(grid, top=1 / params.alpha)
    check_range(DistributionField(values), grid, params.alpha)

@pytest.mark.parametrize("value, invariant", [
    (2.5, "range: f <= 1/alpha"),
    (-1e-300, "range: f >= 0"),
    (np.nan, "finite f"),
])
def test_check_range_trips(params, grid, value, invariant):
    values = np.where(grid.mask, 0.5, 0.0)
    inside = np.argwhere(grid.mask)[0]
    values[0, inside[0], inside[1]] = value
    with pytest.raises(RangeViolation) as info:
        check_range(values, grid, params.alpha, step_index=7)
    assert info.value.invariant == invariant
    assert info.value.step_index == 7
    assert invariant in str(info.value)

def test_check_range_mask(params, grid):
    values = np.zeros(grid.shape)
    values[0, 0, 0] = 0.1
    assert not grid.mask[0, 0]
    with pytest.raises(RangeViolation, match="mask"):
        check_range(values, grid, params.alpha)

def test_check_range_strict_positivity(params, grid):
    values = np.where(grid.mask, 0.5, 0.0)
    positive = values > 0
    values[1, grid.nv // 2, grid.nv // 2] = 0.0
    with pytest.raises(RangeViolation, match="f > 0"):
        check_range(values, grid, params.alpha, positive=positive)
