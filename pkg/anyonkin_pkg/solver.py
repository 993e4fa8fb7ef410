#!/usr/bin/python3

# Copyright (C) 2021 Miguel Simoes, miguelrsimoes[a]yahoo[.]com
# For conditions of distribution and use, see copyright notice in anyonkin.py

"""
Time integration of
    d_t f + v1 d_x f = Q_j(f)
on the periodic slab by Strang splitting: free streaming for dt/2, an
exponential collision step for dt, free streaming for dt/2.

The collision step freezes the rates at a state s and solves, per node,
    dg/dt = (1 - alpha g) Gt - g L,   g(0) = f,
with Gt = gain_env ((1 + (1-alpha) s) / (1/j + 1 - alpha s))^(1-alpha) and
L = loss. The exact solution
    g = g_inf (1 - e^(-lam dt)) + f e^(-lam dt),
    lam = alpha Gt + L,   g_inf = Gt / lam,
is a convex combination of f and g_inf, both in [0, 1/alpha], so the range
holds for every dt. Picard sweeps re-freeze the rates at the midpoint
(f + g)/2 after the first sweep at f.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

import anyonkin_pkg.printutils as pr
from anyonkin_pkg.fields import DistributionField, check_range, make_grid
from anyonkin_pkg.collision import \
    CollisionKernel, CollisionOperator, conservative_projection, moment_defects

SNAP_TOL = 1e-12

# Largest correction polynomial modulus accepted without damping.
PROJECTION_POLY_LIMIT = 0.5

def shift_values(values, grid, dt):
    """
    Return values(x - v1 dt, v) by periodic linear interpolation in x.
    Each v1 column moves by s = v1 dt / dx cells; out = a + p (b - a) with a,
    b the two neighbouring nodes, clipped to [min(a, b), max(a, b)].
    """
    values = np.asarray(values, dtype=np.float64)
    out = np.empty_like(values)
    for k, v1 in enumerate(grid.v_nodes):
        shift = v1 * dt / grid.dx
        nearest = np.round(shift)
        if abs(shift - nearest) <= SNAP_TOL:
            shift = nearest
        whole = int(np.floor(shift))
        frac = shift - whole
        column = values[:, k, :]
        near = np.roll(column, whole, axis=0)
        if frac == 0:
            out[:, k, :] = near
            continue
        far = np.roll(column, whole + 1, axis=0)
        mixed = near + frac * (far - near)
        out[:, k, :] = np.clip(mixed, np.minimum(near, far),
                               np.maximum(near, far))
    return out

def transport_shift(f, grid, dt):
    """
    Free streaming over dt: f_out(x, v) = f(x - v1 dt mod 1, v).
    """
    return f.with_values(shift_values(f.values, grid, dt), f.time + dt)

def exponential_update(f, frozen, gain_env, loss, alpha, j, dt):
    """
    Exact solution over dt of the linear node-wise ODE with rates frozen at
    the state frozen. Returns g with 0 <= g <= 1/alpha.
    """
    block = np.maximum(1 - alpha * frozen, 0.0)
    if alpha == 1:
        gain = gain_env
    else:
        gain = gain_env * ((1 + (1 - alpha) * frozen)
                           / (1 / j + block)) ** (1 - alpha)
    scaled_gain = alpha * gain
    lam = scaled_gain + loss
    live = lam > 0
    safe_lam = np.where(live, lam, 1.0)
    g_inf = (1 / alpha) * (scaled_gain / safe_lam)
    decay = np.exp(-safe_lam * dt)
    grow = -np.expm1(-safe_lam * dt)
    g = g_inf * grow + f * decay
    g = np.clip(g, np.minimum(f, g_inf), np.maximum(f, g_inf))
    g = np.where(live, g, f)
    return np.minimum(g, 1 / alpha)

def _l1(values, grid):
    return float(np.sum(np.sum(np.abs(values), axis=0) * grid.v_weights)
                 * grid.dx)

class ExponentialStepper:
    """
    The exponential collision step with Picard re-freezing and, optionally,
    the conservative projection of the increment.
    """

    def __init__(self, operator, picard_iters=2, picard_tol=1e-10,
                 projection=True):
        self.operator = operator
        self.picard_iters = picard_iters
        self.picard_tol = picard_tol
        self.projection = projection

    def step(self, values, dt):
        """
        Return a CollisionStep for one step of size dt from values.
        """
        op = self.operator
        grid, alpha, j = op.grid, op.alpha, op.j
        values = np.asarray(values, dtype=np.float64)
        frozen = values
        residuals = []
        g = values
        for sweep in range(self.picard_iters):
            rates = op.rates(frozen)
            g_new = exponential_update(values, frozen, rates.gain_env,
                                       rates.loss, alpha, j, dt)
            residuals.append(_l1(g_new - g, grid))
            g = g_new
            if sweep > 0 and residuals[-1] < self.picard_tol:
                break
            frozen = 0.5 * (values + g)
        g = np.where(grid.mask, g, 0.0)
        result = CollisionStep(values=g, picard_residuals=residuals)
        if self.projection:
            self._project(values, result)
        else:
            result.defect = _relative_defect(values, g, grid)
        return result

    def _project(self, values, result):
        op = self.operator
        grid, alpha = op.grid, op.alpha
        g = result.values
        weight = g * np.maximum(1 - alpha * g, 0.0)
        proj = conservative_projection(g - values, grid, weight)
        poly_max = np.max(np.abs(proj.poly), axis=(1, 2))
        damp = np.where(poly_max > PROJECTION_POLY_LIMIT,
                        PROJECTION_POLY_LIMIT / np.maximum(poly_max, 1e-300),
                        1.0)
        if np.any(damp < 1):
            result.damped = True
            pr.warning("projection correction damped at %d x-node(s), "
                       "max |P| = %.3g"
                       % (int(np.sum(damp < 1)), float(np.max(poly_max))))
        corrected = g + damp[:, None, None] * (weight * proj.poly)
        corrected = np.clip(corrected, 0.0, 1 / alpha)
        corrected = np.where(grid.mask, corrected, 0.0)
        result.values = corrected
        result.correction_norm = proj.correction_norm
        result.defect = _relative_defect(values, corrected, grid)

def _relative_defect(before, after, grid):
    """
    Largest per-x-node moment change, relative to the per-node moments.
    """
    change = moment_defects(after - before, grid)
    scale = moment_defects(np.abs(before), grid)
    ref = np.maximum(np.max(np.abs(scale), axis=1), np.finfo(float).tiny)
    return float(np.max(np.max(np.abs(change), axis=1) / ref))

@dataclass
class CollisionStep:
    values: np.ndarray
    picard_residuals: list
    correction_norm: float = 0.0
    defect: float = 0.0
    damped: bool = False

def exponential_collision_step(f, grid, k, alpha, j, dt, picard_iters=2,
                               picard_tol=1e-10, projection=False, workers=1):
    """
    One exponential collision step of size dt from the field f.
    """
    op = CollisionOperator(grid, k, alpha, j, workers)
    stepper = ExponentialStepper(op, picard_iters, picard_tol, projection)
    res = stepper.step(f.values, dt)
    return f.with_values(res.values, f.time + dt)

@dataclass
class SolverState:
    field: DistributionField
    step_index: int = 0
    picard_residuals: list = dc_field(default_factory=list)
    correction_norm: float = 0.0
    defect: float = 0.0
    damped: bool = False

    @property
    def time(self):
        return self.field.time

class SlabIntegrator:
    """
    Strang-split integrator on the periodic slab.
    Time after step k is exactly k dt.
    """

    def __init__(self, params, grid=None):
        self.params = params
        self.grid = make_grid(params) if grid is None else grid
        self.kernel = CollisionKernel.from_params(params)
        self.operator = CollisionOperator(self.grid, self.kernel, params.alpha,
                                          params.j, params.workers)
        self.stepper = ExponentialStepper(self.operator, params.picard_iters,
                                          params.picard_tol, params.projection)
        self.positive = None

    def start(self, initial, step_index=0):
        """
        Check the initial field and return the SolverState at step_index.
        Nodes where the initial field is positive must stay positive.
        """
        values = np.asarray(initial.values)
        if values.shape != self.grid.shape:
            raise ValueError("initial field shape %s does not match grid %s"
                             % (values.shape, self.grid.shape))
        check_range(initial, self.grid, self.params.alpha,
                    step_index=step_index)
        self.positive = values > 0
        time = step_index * self.params.dt
        return SolverState(field=initial.with_values(values, time),
                           step_index=step_index)

    def total_steps(self):
        return max(1, int(np.ceil(self.params.t_end / self.params.dt - 1e-9)))

    def step(self, state):
        params, grid = self.params, self.grid
        dt = params.dt
        half = shift_values(state.field.values, grid, dt / 2)
        coll = self.stepper.step(half, dt)
        values = shift_values(coll.values, grid, dt / 2)
        index = state.step_index + 1
        new_field = DistributionField(values, index * dt)
        check_range(new_field, grid, params.alpha, positive=self.positive,
                    step_index=index)
        return SolverState(field=new_field, step_index=index,
                           picard_residuals=coll.picard_residuals,
                           correction_norm=coll.correction_norm,
                           defect=coll.defect, damped=coll.damped)

    def steps(self, state, stop_step=None):
        """
        Yield successive states after state up to stop_step.
        """
        if stop_step is None:
            stop_step = self.total_steps()
        while state.step_index < stop_step:
            state = self.step(state)
            pr.progress_step(state.step_index, stop_step, state.time)
            yield state

def run(params, initial, hooks=(), monitor=None, grid=None):
    """
    Integrate from initial to t_end. The monitor (a DiagnosticsMonitor, built
    from defaults if None) records every state; hooks are then called with
    (state, record). Returns (final SolverState, DiagnosticsReport).
    """
    integrator = SlabIntegrator(params, grid)
    if monitor is None:
        from anyonkin_pkg.diagnostics import DiagnosticsMonitor
        monitor = DiagnosticsMonitor(params, integrator.grid,
                                     integrator.operator)
    state = integrator.start(initial)
    record = monitor.observe(state)
    for hook in hooks:
        hook(state, record)
    for state in integrator.steps(state):
        record = monitor.observe(state)
        for hook in hooks:
            hook(state, record)
    return state, monitor.report()
