#!/usr/bin/python3

# Copyright (C) 2021 Miguel Simoes, miguelrsimoes[a]yahoo[.]com
# For conditions of distribution and use, see copyright notice in anyonkin.py

"""
The invariant suite run by "anyonkin check": quick property checks on desk
grids. Each check returns a one-line detail string or raises CheckFailed.
"""

import numpy as np
from scipy.interpolate import RegularGridInterpolator

import anyonkin_pkg.printutils as pr
from anyonkin_pkg.miscutils import AnyonKinError
from anyonkin_pkg.fields import \
    SimulationParams, make_grid, compute_moments
from anyonkin_pkg.haldane import \
    solve_w, filling_factor, state_count, EquilibriumSpec, wu_equilibrium, \
    match_moments, equilibrium_moments
from anyonkin_pkg.collision import \
    CollisionKernel, CollisionOperator, eval_kernel, post_collision, \
    conservative_projection
from anyonkin_pkg.solver import SlabIntegrator, shift_values
from anyonkin_pkg.presets import PresetSpec, make_initial, PRESET_NAMES

class CheckFailed(AnyonKinError):
    pass

CHECKS = []

def invariant_check(name):
    def register(fn):
        CHECKS.append((name, fn))
        return fn
    return register

def desk_params(alpha=0.5, **changes):
    """
    Small parameters shared by the checks: j=2, nv=8, ntheta=8, nx=2.
    """
    base = dict(alpha=alpha, j=2.0, nv=8, ntheta=8, nx=2, gamma=0.2,
                gamma_prime=0.05, c_b=0.1, dt=0.01, t_end=0.05)
    base.update(changes)
    return SimulationParams(**base)

def _expect(cond, message):
    if not cond:
        raise CheckFailed(message)

def nordheim_reference(values, grid, kernel):
    """
    Fermion collision operator
        f'f'_*(1-f)(1-f_*) - f f_*(1-f')(1-f'_*)
    summed pair by pair over (v_*, theta) nodes, with f(v') and f(v'_*)
    read off a bilinear interpolant that is zero outside the node square.
    """
    nv, dv = grid.nv, grid.dv
    j2 = grid.j * grid.j
    ext = np.concatenate(([grid.v_nodes[0] - dv], grid.v_nodes,
                          [grid.v_nodes[-1] + dv]))
    star1, star2 = grid.v1[grid.mask], grid.v2[grid.mask]
    out = np.zeros(values.shape)
    for ix in range(values.shape[0]):
        plane = values[ix]
        interp = RegularGridInterpolator(
            (ext, ext), np.pad(plane, 1), bounds_error=False, fill_value=0.0)
        f_star = plane[grid.mask]
        for a in range(nv):
            for b in range(nv):
                if not grid.mask[a, b]:
                    continue
                v1, v2 = grid.v1[a, b], grid.v2[a, b]
                u1, u2 = v1 - star1, v2 - star2
                speed = np.hypot(u1, u2)
                phi = np.arctan2(u2, u1)
                f_v = plane[a, b]
                total = 0.0
                for m, theta in enumerate(grid.theta_nodes):
                    if grid.theta_weights[m] == 0:
                        continue
                    bval = eval_kernel(kernel, speed, theta)
                    n1, n2 = np.cos(phi + theta), np.sin(phi + theta)
                    proj = u1 * n1 + u2 * n2
                    p1, p2 = v1 - n1 * proj, v2 - n2 * proj
                    q1, q2 = star1 + n1 * proj, star2 + n2 * proj
                    chi = (p1 * p1 + p2 * p2 <= j2) & (q1 * q1 + q2 * q2 <= j2)
                    f_p = interp(np.column_stack([p1, p2]))
                    f_q = interp(np.column_stack([q1, q2]))
                    term = f_p * f_q * (1 - f_v) * (1 - f_star) \
                           - f_v * f_star * (1 - f_p) * (1 - f_q)
                    total += grid.theta_weights[m] \
                             * float(np.sum(np.where(chi, bval * term, 0.0)))
                out[ix, a, b] = total * dv * dv / np.pi
    return out

@invariant_check("w-solver residual")
def check_w_residual():
    zetas = np.logspace(-3, 3, 61)
    worst = 0.0
    for alpha in (0.1, 0.25, 0.5, 0.75, 1.0):
        w = solve_w(zetas, alpha)
        lhs = alpha * np.log(w) + (1 - alpha) * np.log1p(w)
        worst = max(worst, float(np.max(np.abs(np.expm1(lhs - np.log(zetas))))))
    _expect(worst < 1e-12, "relative residual %.3g" % worst)
    return "max relative residual %.3g" % worst

@invariant_check("boson proximity")
def check_boson_limit():
    alpha = 1e-8
    zetas = np.logspace(np.log10(1.1), 3, 41)
    w_err = float(np.max(np.abs(solve_w(zetas, alpha) / (zetas - 1) - 1)))
    occ = np.linspace(0, 10, 41)
    f_err = float(np.max(np.abs(filling_factor(occ, alpha) / (1 + occ) - 1)))
    _expect(w_err < 1e-6 and f_err < 1e-6,
            "w error %.3g, F error %.3g" % (w_err, f_err))
    return "w error %.3g, F error %.3g" % (w_err, f_err)

@invariant_check("state count")
def check_state_count():
    val = state_count(4, 2, 0.5)
    _expect(abs(val - 7.875) < 1e-12, "W(4, 2, 1/2) = %r" % val)
    return "W(4, 2, 1/2) = %r" % val

@invariant_check("collision conservation")
def check_post_collision():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(200):
        v, v_star = rng.uniform(-2, 2, size=(2, 2))
        theta = rng.uniform(0, 2 * np.pi)
        v_p, v_sp = post_collision(v, v_star, theta)
        mom = np.abs((v_p + v_sp) - (v + v_star)).max()
        energy = abs(v_p @ v_p + v_sp @ v_sp - v @ v - v_star @ v_star)
        worst = max(worst, float(mom), float(energy))
    _expect(worst < 1e-12, "max defect %.3g" % worst)
    return "max defect %.3g over 200 pairs" % worst

@invariant_check("angular lower bound")
def check_geometry_bound():
    gamma_prime = 0.05
    theta = np.linspace(0, 2 * np.pi, 2001)
    cos_t = np.abs(np.cos(theta))
    theta = theta[(cos_t > gamma_prime) & (cos_t < 1 - gamma_prime)]
    hat = np.linspace(0, 2 * np.pi, 401)[:, None]
    val = np.cos(theta) ** 2 * np.cos(hat) ** 2 \
          + np.sin(theta) ** 2 * np.sin(hat) ** 2
    low = float(val.min())
    _expect(low >= gamma_prime ** 2, "minimum %.3g" % low)
    return "minimum %.4g >= %.4g" % (low, gamma_prime ** 2)

@invariant_check("fermion reduction")
def check_fermion():
    params = desk_params(alpha=1.0, nx=1)
    grid = make_grid(params)
    kernel = CollisionKernel.from_params(params)
    op = CollisionOperator(grid, kernel, 1.0, params.j)
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(3):
        values = np.where(grid.mask, rng.uniform(0, 1, grid.shape), 0.0)
        diff = op.apply_q(values) - nordheim_reference(values, grid, kernel)
        worst = max(worst, float(np.max(np.abs(diff))))
    _expect(worst < 1e-13, "max pointwise difference %.3g" % worst)
    return "max pointwise difference %.3g" % worst

@invariant_check("collision bound")
def check_q_bound():
    worst = 0.0
    for alpha in (0.25, 0.5, 1.0):
        params = desk_params(alpha=alpha, nx=1)
        grid = make_grid(params)
        op = CollisionOperator(grid, CollisionKernel.from_params(params),
                               alpha, params.j)
        rng = np.random.default_rng(3)
        values = np.where(grid.mask,
                          rng.uniform(0, 1 / alpha, grid.shape), 0.0)
        ratio = float(np.max(np.abs(op.apply_q(values)))) / op.q_bound()
        worst = max(worst, ratio)
    _expect(worst <= 1, "max |Q| / bound = %.3g" % worst)
    return "max |Q| / bound = %.3g" % worst

@invariant_check("projection exactness")
def check_projection():
    params = desk_params()
    grid = make_grid(params)
    rng = np.random.default_rng(4)
    inc = np.where(grid.mask, rng.normal(size=grid.shape), 0.0)
    res = conservative_projection(inc, grid)
    scale = float(np.sum(np.abs(inc)))
    worst = float(np.max(np.abs(res.defect_after))) / scale
    _expect(worst < 1e-13, "relative defect %.3g" % worst)
    return "relative defect %.3g" % worst

@invariant_check("commensurate transport")
def check_transport():
    params = desk_params(nv=4, nx=4, dt=0.5)
    grid = make_grid(params)
    rng = np.random.default_rng(5)
    values = np.where(grid.mask, rng.uniform(0, 1, grid.shape), 0.0)
    shifted = shift_values(values, grid, params.dt)
    for k, v1 in enumerate(grid.v_nodes):
        cells = int(round(v1 * params.dt / grid.dx))
        _expect(np.array_equal(shifted[:, k, :],
                               np.roll(values[:, k, :], cells, axis=0)),
                "column %d not an exact shift" % k)
    return "exact periodic shifts"

@invariant_check("range at extreme dt")
def check_range_extremes():
    runs = 0
    for name in PRESET_NAMES:
        for alpha in (0.25, 0.5, 0.75, 1.0):
            for dt in (1e-3, 1.0, 1e3):
                params = desk_params(alpha=alpha, dt=dt, t_end=2 * dt)
                grid = make_grid(params)
                initial = make_initial(params, grid, PresetSpec(name))
                integ = SlabIntegrator(params, grid)
                state = integ.start(initial)
                for state in integ.steps(state):
                    pass
                runs += 1
    return "%d runs, 0 < f <= 1/alpha at every step" % runs

@invariant_check("conservation with projection")
def check_conservation():
    params = desk_params(t_end=0.1)
    grid = make_grid(params)
    initial = make_initial(params, grid, PresetSpec("bimodal", jitter=0.2))
    integ = SlabIntegrator(params, grid)
    state = integ.start(initial)
    m0 = compute_moments(initial, grid)
    for state in integ.steps(state):
        pass
    m1 = compute_moments(state.field, grid)
    mom_ref = np.sqrt(m0.mass * m0.energy)
    drift = max(abs(m1.mass - m0.mass) / m0.mass,
                abs(m1.momentum1 - m0.momentum1) / mom_ref,
                abs(m1.momentum2 - m0.momentum2) / mom_ref,
                abs(m1.energy - m0.energy) / m0.energy)
    _expect(drift < 1e-10, "relative drift %.3g" % drift)
    return "relative drift %.3g after %d steps" % (drift, state.step_index)

@invariant_check("moment matching round trip")
def check_match():
    params = desk_params()
    grid = make_grid(params)
    spec = EquilibriumSpec(0.3, 0.8, params.alpha)
    mass, energy = equilibrium_moments(spec, grid)
    found = match_moments(mass, energy, params.alpha, grid)
    err = max(abs(found.mu - spec.mu), abs(found.temperature - spec.temperature))
    _expect(err < 1e-6, "parameter error %.3g" % err)
    values = wu_equilibrium(found, grid).values
    _expect(np.all(values <= 1 / params.alpha), "equilibrium out of range")
    return "parameter error %.3g" % err

def run_checks(names=None):
    """
    Run the registered checks (all if names is None), printing one line per
    check. Returns the number of failures.
    """
    failures = 0
    for name, check in CHECKS:
        if names is not None and name not in names:
            continue
        with pr.ProgressPrefix("%s: " % name):
            try:
                detail = check()
            except (CheckFailed, AnyonKinError) as exc:
                failures += 1
                pr.print("FAIL %s: %s" % (name, exc))
                continue
        pr.print("ok   %s: %s" % (name, detail))
    return failures
