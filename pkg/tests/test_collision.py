import numpy as np
import pytest

from anyonkin_pkg.miscutils import DomainError, KernelError, ProjectionError
from anyonkin_pkg.fields import DistributionField, make_grid
from anyonkin_pkg.collision import \
    CollisionKernel, CollisionOperator, eval_kernel, post_collision, \
    collision_shift, pair_integrand, conservative_projection, moment_defects, \
    collision_rates, apply_Q
from anyonkin_pkg.haldane import \
    EquilibriumSpec, wu_equilibrium, filling_factor_reg_unchecked
from anyonkin_pkg.invariants import desk_params, nordheim_reference

def test_post_collision_example():
    v_p, v_sp = post_collision((1.0, 0.0), (-1.0, 0.0), np.pi / 4)
    assert np.allclose(v_p, (0.0, -1.0), atol=1e-15)
    assert np.allclose(v_sp, (0.0, 1.0), atol=1e-15)

def test_post_collision_degenerate_pair():
    with pytest.raises(DomainError, match="degenerate pair"):
        post_collision((0.5, 0.5), (0.5, 0.5), 1.0)

def test_collision_shift_lengths(rng):
    u1, u2 = rng.uniform(-3, 3, size=(2, 50))
    theta = rng.uniform(0, 2 * np.pi, 50)
    d1, d2 = collision_shift(u1, u2, theta)
    speed = np.hypot(u1, u2)
    assert np.allclose(np.hypot(d1, d2), speed * np.abs(np.cos(theta)))
    assert np.allclose(np.hypot(u1 + d1, u2 + d2),
                       speed * np.abs(np.sin(theta)))

def test_kernel_cutoffs(params):
    k = CollisionKernel.from_params(params)
    assert eval_kernel(k, 0.1, np.pi / 4) == 0.0
    assert eval_kernel(k, 1.0, np.pi / 4) == k.b0
    assert eval_kernel(k, 1.0, 0.0) == 0.0
    assert eval_kernel(k, 1.0, np.pi / 2) == 0.0
    assert eval_kernel(k, 1.0, np.pi) == 0.0

def test_kernel_sin2theta_profile(params):
    k = CollisionKernel.from_params(params.replace(kernel_profile="sin2theta"))
    assert eval_kernel(k, 1.0, np.pi / 4) == pytest.approx(k.b0)
    assert eval_kernel(k, 1.0, np.pi / 8) == pytest.approx(
        k.b0 * np.sin(np.pi / 4))

def test_kernel_angular_mass_below_c_b(grid):
    k = CollisionKernel(b0=1.0, gamma=0.2, gamma_prime=0.05, c_b=100.0)
    with pytest.raises(KernelError, match="below c_b"):
        k.verify(grid)

def test_rates_vanish_on_empty_field(operator, grid):
    rates = operator.rates(np.zeros(grid.shape), with_bony=True)
    assert not np.any(rates.gain_env)
    assert not np.any(rates.loss)
    assert not np.any(rates.bony_density)

def test_single_node_has_no_loss(operator, grid):
    values = np.zeros(grid.shape)
    a, b = np.argwhere(grid.mask)[5]
    values[:, a, b] = 1.0
    rates = operator.rates(values)
    assert np.all(rates.loss[:, a, b] == 0)

def test_q_nonnegative_at_empty_nodes(operator, grid, random_field, rng):
    values = random_field(grid, top=2.0)
    holes = rng.uniform(size=grid.shape) < 0.3
    values[holes] = 0.0
    q = operator.apply_q(values)
    assert np.all(q[holes] >= 0)
    assert np.all(q[:, ~grid.mask] == 0)

def test_fermion_operator_matches_pairwise_sum(random_field):
    params = desk_params(alpha=1.0, nx=1)
    grid = make_grid(params)
    kernel = CollisionKernel.from_params(params)
    op = CollisionOperator(grid, kernel, 1.0, params.j)
    values = random_field(grid)
    reference = nordheim_reference(values, grid, kernel)
    assert np.allclose(op.apply_q(values), reference, rtol=0, atol=1e-13)

@pytest.mark.parametrize("alpha", (0.25, 0.5, 1.0))
def test_q_within_bound(alpha, random_field):
    params = desk_params(alpha=alpha, nx=1)
    grid = make_grid(params)
    op = CollisionOperator(grid, CollisionKernel.from_params(params), alpha,
                           params.j)
    values = random_field(grid, top=1 / alpha)
    assert np.max(np.abs(op.apply_q(values))) <= op.q_bound()

def test_workers_give_identical_rates(params, random_field):
    params = params.replace(nx=5)
    grid = make_grid(params)
    kernel = CollisionKernel.from_params(params)
    values = random_field(grid, top=2.0)
    one = CollisionOperator(grid, kernel, params.alpha, params.j, workers=1)
    three = CollisionOperator(grid, kernel, params.alpha, params.j, workers=3)
    r1 = one.rates(values, with_bony=True)
    r3 = three.rates(values, with_bony=True)
    assert np.array_equal(r1.gain_env, r3.gain_env)
    assert np.array_equal(r1.loss, r3.loss)
    assert np.array_equal(r1.bony_density, r3.bony_density)

def _smooth(w):
    return 0.8 * np.exp(-np.dot(w, w))

def test_pair_integrand_symmetries(params, rng):
    kernel = CollisionKernel.from_params(params)
    for _ in range(20):
        v, v_star = rng.uniform(-0.6, 0.6, size=(2, 2))
        theta = rng.uniform(0, 2 * np.pi)
        args = (theta, kernel, params.alpha, params.j)
        direct = pair_integrand(_smooth, v, v_star, *args)
        swapped = pair_integrand(_smooth, v_star, v, *args)
        turned = pair_integrand(_smooth, v, v_star, theta + np.pi,
                                kernel, params.alpha, params.j)
        assert swapped == pytest.approx(direct, rel=1e-12, abs=1e-15)
        assert turned == pytest.approx(direct, rel=1e-12, abs=1e-15)

def test_pair_integrand_outside_ball(params):
    kernel = CollisionKernel.from_params(params)
    assert pair_integrand(_smooth, (1.9, 0.0), (-1.9, 0.5), np.pi / 4,
                          kernel, params.alpha, 1.0) == 0.0

def test_projection_zero_increment(grid):
    res = conservative_projection(np.zeros(grid.shape), grid)
    assert res.correction_norm == 0.0
    assert not np.any(res.increment)

def test_projection_removes_defect(grid, rng):
    inc = np.where(grid.mask, rng.normal(size=grid.shape), 0.0)
    res = conservative_projection(inc, grid)
    scale = np.max(np.abs(moment_defects(np.abs(inc), grid)))
    assert np.max(np.abs(res.defect_after)) < 1e-12 * scale
    assert res.correction_norm > 0
    assert np.all(res.increment[:, ~grid.mask] == 0)

def test_projection_singular_weight(grid, rng):
    inc = np.where(grid.mask, rng.normal(size=grid.shape), 0.0)
    weight = np.zeros(grid.shape)
    a, b = np.argwhere(grid.mask)[0]
    weight[:, a, b] = 1.0
    with pytest.raises(ProjectionError, match="singular"):
        conservative_projection(inc, grid, weight)

def test_functional_wrappers(params, grid, operator, random_field):
    field = DistributionField(random_field(grid, top=2.0))
    kernel = CollisionKernel.from_params(params)
    rates = collision_rates(field, grid, kernel, params.alpha, params.j)
    direct = operator.rates(field.values)
    assert np.array_equal(rates.gain_env, direct.gain_env)
    assert np.array_equal(rates.loss, direct.loss)
    assert np.array_equal(apply_Q(field, grid, kernel, params.alpha, params.j),
                          operator.apply_q(field.values))

def _equilibrium_imbalance(nv, ntheta=8):
    params = desk_params(alpha=1.0, j=4.0, nv=nv, ntheta=ntheta)
    grid = make_grid(params)
    operator = CollisionOperator(grid, CollisionKernel.from_params(params),
                                 params.alpha, params.j)
    values = wu_equilibrium(EquilibriumSpec(0.0, 1.0, params.alpha),
                            grid).values
    rates = operator.rates(values)
    q = operator.apply_q(values, rates)
    gain = filling_factor_reg_unchecked(values, params.alpha, params.j) \
           * rates.gain_env
    gain = np.where(grid.mask, gain, 0.0)
    return grid.dv, float(np.sum(np.abs(q)) / np.sum(np.abs(gain)))

@pytest.mark.slow
def test_equilibrium_imbalance_shrinks_under_refinement():
    spacings, ratios = zip(*[_equilibrium_imbalance(nv)
                             for nv in (12, 16, 24, 32)])
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    order = np.polyfit(np.log(spacings), np.log(ratios), 1)[0]
    assert order >= 1.0
    _dv, fine = _equilibrium_imbalance(48, ntheta=16)
    assert fine < 1e-2
