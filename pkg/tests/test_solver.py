import numpy as np
import pytest

from anyonkin_pkg.miscutils import RangeViolation
from anyonkin_pkg.fields import DistributionField, make_grid, compute_moments
from anyonkin_pkg.collision import CollisionKernel, CollisionOperator
from anyonkin_pkg.solver import \
    shift_values, transport_shift, exponential_update, \
    exponential_collision_step, ExponentialStepper, SlabIntegrator, run
from anyonkin_pkg.presets import PresetSpec, make_initial, PRESET_NAMES
from anyonkin_pkg.invariants import desk_params

def test_commensurate_shift_is_roll(random_field):
    params = desk_params(nv=4, nx=4, dt=0.5)
    grid = make_grid(params)
    values = random_field(grid)
    out = shift_values(values, grid, params.dt)
    for k, v1 in enumerate(grid.v_nodes):
        cells = int(round(v1 * params.dt / grid.dx))
        assert np.array_equal(out[:, k, :], np.roll(values[:, k, :], cells,
                                                    axis=0))

def test_shift_keeps_column_sums_and_bounds(params, random_field):
    grid = make_grid(params.replace(nx=6))
    values = random_field(grid)
    out = shift_values(values, grid, 0.037)
    assert np.allclose(out.sum(axis=0), values.sum(axis=0), rtol=1e-14,
                       atol=1e-15)
    assert out.min() >= 0
    assert out.max() <= values.max()

def test_transport_advances_time(grid, random_field):
    field = DistributionField(random_field(grid), 0.25)
    assert transport_shift(field, grid, 0.5).time == 0.75

def test_exponential_update_fermion_closed_form(rng):
    f = rng.uniform(0, 1, 40)
    gain = rng.uniform(0, 3, 40)
    loss = rng.uniform(0, 3, 40)
    dt = 0.3
    lam = gain + loss
    expected = gain / lam * (1 - np.exp(-lam * dt)) + f * np.exp(-lam * dt)
    got = exponential_update(f, f, gain, loss, 1.0, 4.0, dt)
    assert np.allclose(got, expected, rtol=1e-14, atol=0)

def test_exponential_update_without_rates_keeps_f(rng):
    f = rng.uniform(0, 2, 10)
    zero = np.zeros(10)
    assert np.array_equal(exponential_update(f, f, zero, zero, 0.5, 4.0, 1.0),
                          f)

@pytest.mark.parametrize("dt", (1e-3, 1.0, 1e3))
@pytest.mark.parametrize("alpha", (0.25, 0.5, 1.0))
def test_exponential_update_range(alpha, dt, rng):
    f = rng.uniform(0, 1 / alpha, 200)
    frozen = rng.uniform(0, 1 / alpha, 200)
    gain = rng.uniform(0, 50, 200)
    loss = rng.uniform(0, 50, 200)
    g = exponential_update(f, frozen, gain, loss, alpha, 4.0, dt)
    assert np.all(g >= 0)
    assert np.all(g <= 1 / alpha)

def test_collision_step_advances_time(params, grid):
    f0 = make_initial(params, grid, PresetSpec("bimodal"))
    kernel = CollisionKernel.from_params(params)
    f1 = exponential_collision_step(f0, grid, kernel, params.alpha, params.j,
                                    params.dt)
    assert f1.time == params.dt
    assert not np.array_equal(f1.values, f0.values)

def test_total_steps():
    integ = SlabIntegrator(desk_params(dt=0.3, t_end=1.0))
    assert integ.total_steps() == 4
    integ = SlabIntegrator(desk_params(dt=0.01, t_end=0.05))
    assert integ.total_steps() == 5

def test_time_is_step_times_dt(params, grid):
    integ = SlabIntegrator(params, grid)
    state = integ.start(make_initial(params, grid, PresetSpec("bimodal")))
    for state in integ.steps(state):
        assert state.time == state.step_index * params.dt
    assert state.step_index == integ.total_steps()

def test_x_uniform_data_stays_uniform(params, grid):
    integ = SlabIntegrator(params, grid)
    state = integ.start(make_initial(params, grid, PresetSpec("wu")))
    for state in integ.steps(state, 2):
        pass
    assert state.field.is_x_uniform()

def test_start_rejects_out_of_range(params, grid):
    integ = SlabIntegrator(params, grid)
    values = np.where(grid.mask, 3.0, 0.0)
    with pytest.raises(RangeViolation):
        integ.start(DistributionField(np.broadcast_to(values, grid.shape)
                                      .copy()))

def test_start_rejects_wrong_shape(params, grid):
    integ = SlabIntegrator(params, grid)
    with pytest.raises(ValueError):
        integ.start(DistributionField(np.zeros((3, grid.nv, grid.nv))))

def test_start_at_resume_step(params, grid):
    integ = SlabIntegrator(params, grid)
    state = integ.start(make_initial(params, grid, PresetSpec("bimodal")), 3)
    assert state.step_index == 3
    assert state.time == 3 * params.dt

@pytest.mark.parametrize("name", PRESET_NAMES)
@pytest.mark.parametrize("dt", (1e-3, 1.0, 1e3))
@pytest.mark.parametrize("alpha", (0.25, 0.5, 0.75, 1.0))
def test_steps_stay_in_range(name, dt, alpha):
    params = desk_params(alpha=alpha, dt=dt, t_end=3 * dt)
    grid = make_grid(params)
    integ = SlabIntegrator(params, grid)
    state = integ.start(make_initial(params, grid, PresetSpec(name)))
    for state in integ.steps(state):
        inside = state.field.values[:, grid.mask]
        assert inside.max() <= 1 / alpha
        assert inside.min() > 0
        assert np.all(state.field.values[:, ~grid.mask] == 0)
    assert state.step_index == 3

def test_projection_conserves_moments():
    params = desk_params(t_end=0.1)
    grid = make_grid(params)
    initial = make_initial(params, grid, PresetSpec("bimodal", jitter=0.2))
    integ = SlabIntegrator(params, grid)
    state = integ.start(initial)
    for state in integ.steps(state):
        assert state.correction_norm >= 0
    m0 = compute_moments(initial, grid)
    m1 = compute_moments(state.field, grid)
    assert abs(m1.mass - m0.mass) < 1e-10 * m0.mass
    assert abs(m1.energy - m0.energy) < 1e-10 * m0.energy

@pytest.mark.slow
def test_projection_conserves_over_long_runs():
    params = desk_params(nx=4, t_end=10.0)
    grid = make_grid(params)
    initial = make_initial(params, grid, PresetSpec("bimodal", jitter=0.2))
    integ = SlabIntegrator(params, grid)
    assert integ.total_steps() == 1000
    m0 = compute_moments(initial, grid)
    mom_ref = np.sqrt(m0.mass * m0.energy)
    state = integ.start(initial)
    for state in integ.steps(state):
        m1 = compute_moments(state.field, grid)
        assert abs(m1.mass - m0.mass) < 1e-10 * m0.mass
        assert abs(m1.momentum1 - m0.momentum1) < 1e-10 * mom_ref
        assert abs(m1.momentum2 - m0.momentum2) < 1e-10 * mom_ref
        assert abs(m1.energy - m0.energy) < 1e-10 * m0.energy

def _unprojected_defect(nv):
    params = desk_params(j=3.0, nv=nv, dt=0.01)
    grid = make_grid(params)
    operator = CollisionOperator(grid, CollisionKernel.from_params(params),
                                 params.alpha, params.j)
    stepper = ExponentialStepper(operator, picard_iters=1, projection=False)
    initial = make_initial(params, grid, PresetSpec(
        "bimodal", center=(0.8, 0.0), width=0.4))
    return grid.dv, stepper.step(initial.values, params.dt).defect

@pytest.mark.slow
def test_unprojected_defect_shrinks_under_refinement():
    spacings, defects = zip(*[_unprojected_defect(nv) for nv in (16, 32, 48)])
    assert defects[0] > defects[1] > defects[2] > 0
    order = np.polyfit(np.log(spacings), np.log(defects), 1)[0]
    assert order >= 1.5

def test_workers_give_identical_runs():
    fields = []
    for workers in (1, 3):
        params = desk_params(nx=4, workers=workers, t_end=0.03)
        grid = make_grid(params)
        integ = SlabIntegrator(params, grid)
        state = integ.start(make_initial(
            params, grid, PresetSpec("bimodal", jitter=0.3, seed=7)))
        for state in integ.steps(state):
            pass
        fields.append(state.field.values)
    assert np.array_equal(fields[0], fields[1])

def test_run_records_every_step(params, grid):
    seen = []
    final, report = run(params, make_initial(params, grid,
                                             PresetSpec("bimodal")),
                        hooks=[lambda state, record: seen.append(record.step)],
                        grid=grid)
    assert final.step_index == 5
    assert len(report.records) == 6
    assert seen == list(range(6))
