"""
Scenario runs on desk grids: stationarity, stability under perturbed data,
truncation and time-step convergence, the Bony envelope and velocity tail
decay. Marked slow.
"""

import numpy as np
import pytest

from anyonkin_pkg.fields import make_grid, compute_moments
from anyonkin_pkg.solver import SlabIntegrator, run
from anyonkin_pkg.diagnostics import DiagnosticsMonitor, l1_distance, \
    fit_affine
from anyonkin_pkg.presets import PresetSpec, make_initial
from anyonkin_pkg.invariants import desk_params

pytestmark = pytest.mark.slow

def _final(params, grid, initial):
    integ = SlabIntegrator(params, grid)
    state = integ.start(initial)
    for state in integ.steps(state):
        pass
    return state.field

def _stationarity_drift(nv):
    # At alpha = 1 the regularized filling factor equals 1 - f for every j.
    params = desk_params(alpha=1.0, j=4.0, nv=nv, dt=0.05, t_end=1.0)
    grid = make_grid(params)
    initial = make_initial(params, grid, PresetSpec("wu"))
    final = _final(params, grid, initial)
    mass = compute_moments(initial, grid).mass
    return l1_distance(final, initial, grid) / mass

def test_solver_holds_equilibrium():
    coarse, fine = _stationarity_drift(12), _stationarity_drift(24)
    assert fine < coarse
    assert fine < 5e-2

def test_nearby_data_stay_close():
    params = desk_params(nx=4, t_end=0.2, dt=0.02)
    grid = make_grid(params)
    f0 = make_initial(params, grid, PresetSpec("wave", wave_amplitude=0.3))
    g0 = f0.with_values(f0.values * (1 - 1e-3))
    delta = l1_distance(f0, g0, grid)
    gap = l1_distance(_final(params, grid, f0), _final(params, grid, g0),
                      grid)
    assert gap < 50 * delta

def _truncation_gap(j):
    fields = []
    for level in (j, 2 * j):
        params = desk_params(j=level, nv=int(4 * level), nx=4, dt=0.1,
                             t_end=1.0)
        grid = make_grid(params)
        initial = make_initial(params, grid, PresetSpec("wave"))
        fields.append((_final(params, grid, initial), grid))
    (small, small_grid), (big, big_grid) = fields
    return l1_distance(small, big, small_grid, big_grid)

def test_truncation_gap_decreases_in_j():
    assert _truncation_gap(3.0) < _truncation_gap(2.0)

def test_time_step_convergence():
    finals = []
    for dt in (0.1, 0.05, 0.025, 0.0125):
        params = desk_params(dt=dt, t_end=0.4)
        grid = make_grid(params)
        finals.append(_final(params, grid,
                             make_initial(params, grid, PresetSpec("bimodal"))))
    gaps = [l1_distance(a, b, grid) for a, b in zip(finals, finals[1:])]
    assert gaps[0] / gaps[1] > 1.5
    assert gaps[1] / gaps[2] > 1.5

def _bony_integrals(nv, horizons):
    params = desk_params(nv=nv, nx=4, dt=0.1, t_end=max(horizons))
    grid = make_grid(params)
    monitor = DiagnosticsMonitor(params, grid)
    _state, report = run(params, make_initial(params, grid,
                                              PresetSpec("wave")),
                         monitor=monitor, grid=grid)
    steps = report.series("step")
    integrals = report.series("bony_integral")
    return [integrals[steps == int(round(t / params.dt))][0]
            for t in horizons]

def test_bony_integral_affine_in_time():
    horizons = [1.0, 2.0, 4.0, 8.0]
    coarse = fit_affine(horizons, _bony_integrals(12, horizons))
    fine = fit_affine(horizons, _bony_integrals(16, horizons))
    assert coarse.rel_residual < 0.05
    assert fine.rel_residual < 0.05
    assert fine.slope > 0
    assert abs(coarse.slope / fine.slope - 1) <= 0.2

def test_tails_decay_in_lambda():
    params = desk_params(j=4.0, nv=16, t_end=0.02, dt=0.01)
    grid = make_grid(params)
    monitor = DiagnosticsMonitor(params, grid, bony=False)
    _state, report = run(params, make_initial(params, grid, PresetSpec("wu")),
                         monitor=monitor, grid=grid)
    assert report.lambdas == [2.0, 3.0, 4.0]
    plain, weighted = report.tail_slopes()
    assert plain <= -0.5
    assert weighted <= -1.0
