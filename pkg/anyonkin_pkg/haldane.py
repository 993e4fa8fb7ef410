#!/usr/bin/python3

# Copyright (C) 2021 Miguel Simoes, miguelrsimoes[a]yahoo[.]com
# For conditions of distribution and use, see copyright notice in anyonkin.py

"""
Haldane exclusion statistics with parameter alpha in (0, 1]:
filling factors F and F_j, Wu's w(zeta) equation and equilibrium,
moment matching, entropy and the interpolated state count.

Energies are eps(v) = |v|^2 / 2 (unit mass).
"""

from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

import anyonkin_pkg.printutils as pr
from anyonkin_pkg.miscutils import \
    DomainError, ParamsError, MomentMatchError, centro_sum
from anyonkin_pkg.fields import DistributionField

@dataclass(frozen=True)
class EquilibriumSpec:
    mu: float
    temperature: float
    alpha: float

    def __post_init__(self):
        violations = []
        if not self.temperature > 0:
            violations.append("temperature must be > 0")
        if not 0 < self.alpha <= 1:
            violations.append("alpha out of (0,1]")
        if violations:
            raise ParamsError(violations)

@dataclass(frozen=True)
class EntropyValue:
    value: float

    def __float__(self):
        return self.value

def _as_result(arr, like):
    if np.ndim(like) == 0:
        return float(arr)
    return arr

def _check_occupation(f, alpha):
    f = np.asarray(f, dtype=np.float64)
    if np.any(~np.isfinite(f)) or np.any(f < 0) or np.any(f > 1 / alpha):
        raise DomainError("occupation outside [0, 1/alpha] for alpha=%g"
                          % (alpha,))
    return f

def filling_factor(f, alpha):
    """
    F(f) = (1 - alpha f)^alpha (1 + (1 - alpha) f)^(1 - alpha).
    """
    arr = _check_occupation(f, alpha)
    block = np.maximum(1 - alpha * arr, 0.0)
    res = block ** alpha * (1 + (1 - alpha) * arr) ** (1 - alpha)
    return _as_result(res, f)

def filling_factor_max(alpha):
    """
    max of F on [0, 1/alpha], also an upper bound for every F_j.
    """
    if alpha >= 0.5:
        return 1.0
    return (1 / alpha - 1) ** (1 - 2 * alpha)

def filling_factor_reg_unchecked(y, alpha, j):
    """
    F_j without the domain check. 1 - alpha y is clipped at 0 so values
    interpolated a rounding error past 1/alpha map to 0.
    """
    block = np.maximum(1 - alpha * y, 0.0)
    if alpha == 1:
        return block
    return block / (1 / j + block) ** (1 - alpha) \
           * (1 + (1 - alpha) * y) ** (1 - alpha)

def filling_factor_reg(f, alpha, j):
    """
    F_j(f) = (1 - alpha f) / (1/j + 1 - alpha f)^(1-alpha)
             * (1 + (1-alpha) f)^(1-alpha).
    """
    arr = _check_occupation(f, alpha)
    return _as_result(filling_factor_reg_unchecked(arr, alpha, j), f)

def _log_form(s, alpha):
    """
    h(s) = alpha s + (1-alpha) log(1 + e^s) and h'(s), for s = log w.
    """
    value = alpha * s + (1 - alpha) * np.logaddexp(0.0, s)
    slope = alpha + (1 - alpha) * special.expit(s)
    return value, slope

def solve_log_w(log_zeta, alpha, max_iter=200):
    """
    Return s = log w solving alpha log w + (1-alpha) log(1+w) = log zeta.
    The left side is increasing and convex in s: Newton started at the
    upper bracket end descends monotonically onto the root; steps leaving
    the bracket fall back to bisection.
    """
    log_zeta = np.asarray(log_zeta, dtype=np.float64)
    if alpha == 1:
        return log_zeta.copy()
    upper_exp = np.maximum(log_zeta, log_zeta / alpha)
    lower_exp = np.minimum(log_zeta, log_zeta / alpha)
    hi = np.logaddexp(upper_exp, 0.0)
    lo = lower_exp - np.log(100.0)
    width = hi - lo
    for _ in range(max_iter):
        val, _slope = _log_form(lo, alpha)
        above = val > log_zeta
        if not np.any(above):
            break
        lo = np.where(above, lo - width, lo)
        width = 2 * width
    s = hi.copy()
    tol = 16 * np.finfo(float).eps * np.maximum(1.0, np.abs(log_zeta))
    for _ in range(max_iter):
        val, slope = _log_form(s, alpha)
        resid = val - log_zeta
        if np.all(np.abs(resid) <= tol):
            break
        hi = np.where(resid > 0, s, hi)
        lo = np.where(resid < 0, s, lo)
        step = s - resid / slope
        outside = (step <= lo) | (step >= hi)
        s = np.where(outside, 0.5 * (lo + hi), step)
    else:
        pr.debug("solve_log_w: iteration cap reached, max residual %g",
                 float(np.max(np.abs(resid))))
    return s

def solve_w(zeta, alpha):
    """
    Return w > 0 with w^alpha (1+w)^(1-alpha) = zeta. Exact for alpha = 1.
    """
    zeta_arr = np.asarray(zeta, dtype=np.float64)
    if np.any(zeta_arr <= 0):
        raise DomainError("zeta must be > 0")
    if alpha == 1:
        return _as_result(zeta_arr.copy(), zeta)
    w = np.exp(solve_log_w(np.log(zeta_arr), alpha))
    return _as_result(w, zeta)

def wu_profile(spec, grid):
    """
    Return the (nv, nv) Wu occupation 1/(w(zeta) + alpha), masked.
    """
    log_zeta = (grid.speed2 / 2 - spec.mu) / spec.temperature
    s = solve_log_w(log_zeta, spec.alpha)
    return np.where(grid.mask, occupation_from_log_w(s, spec.alpha), 0.0)

def occupation_from_log_w(s, alpha):
    """
    1/(w + alpha) for w = e^s, written so that huge w gives 0, not nan.
    """
    return special.expit(np.log(alpha) - s) / alpha

def wu_equilibrium(spec, grid, time=0.0):
    return DistributionField.uniform(grid, wu_profile(spec, grid), time)

def _profile_moments(profile, grid):
    weights = grid.v_weights
    return (centro_sum(weights * profile),
            centro_sum(weights * grid.speed2 * profile))

def equilibrium_moments(spec, grid):
    """
    Return (mass, energy) per unit slab of the Wu equilibrium on the grid.
    """
    return _profile_moments(wu_profile(spec, grid), grid)

def minimal_energy(mass, alpha, grid):
    """
    Energy of the filled ball: nodes taken by increasing |v| at occupation
    1/alpha until the mass is used up. This is the T -> 0 limit at fixed
    mass, below which no equilibrium exists.
    """
    capacity = ball_capacity(alpha, grid)
    if not 0 < mass < capacity:
        raise MomentMatchError("target mass %g outside (0, %g)"
                               % (mass, capacity))
    inside = grid.mask.ravel()
    speed2 = grid.speed2.ravel()[inside]
    weights = grid.v_weights.ravel()[inside]
    order = np.argsort(speed2, kind="stable")
    cell_mass = weights[order] / alpha
    filled = np.cumsum(cell_mass)
    full = np.searchsorted(filled, mass, side="right")
    energy = float(np.sum(cell_mass[:full] * speed2[order][:full]))
    rest = mass - (filled[full - 1] if full > 0 else 0.0)
    if full < len(order):
        energy += rest * speed2[order][full]
    return energy

def flat_energy(mass, grid):
    """
    Energy of the flat distribution with the given mass (T -> infinity).
    """
    weights = grid.v_weights
    return mass * float(np.sum(weights * grid.speed2)) / float(np.sum(weights))

def ball_capacity(alpha, grid):
    return float(np.sum(grid.v_weights)) / alpha

def _mass_mu(mass, temperature, alpha, grid):
    """
    Solve for mu at fixed temperature so the equilibrium has the given mass.
    """
    def excess(mu):
        spec = EquilibriumSpec(mu, temperature, alpha)
        return equilibrium_moments(spec, grid)[0] - mass
    lo, hi = -temperature, temperature
    for _ in range(200):
        if excess(lo) < 0:
            break
        lo = 2 * lo - temperature
    for _ in range(200):
        if excess(hi) > 0:
            break
        hi = 2 * hi + temperature
    return optimize.brentq(excess, lo, hi, xtol=1e-14, rtol=1e-14,
                           maxiter=500)

def _moments_and_jacobian(mu, log_temp, alpha, grid):
    temperature = np.exp(log_temp)
    shifted = grid.speed2 / 2 - mu
    s = solve_log_w(shifted / temperature, alpha)
    f = np.where(grid.mask, occupation_from_log_w(s, alpha), 0.0)
    _val, slope = _log_form(s, alpha)
    # f^2 w = f w/(w + alpha)
    dens = f * special.expit(s - np.log(alpha)) / slope / temperature
    weights = grid.v_weights
    energy_w = weights * grid.speed2
    mass, energy = _profile_moments(f, grid)
    jac = np.array([
        [np.sum(weights * dens), np.sum(weights * dens * shifted)],
        [np.sum(energy_w * dens), np.sum(energy_w * dens * shifted)]])
    return mass, energy, jac

def _newton_match(target_mass, target_energy, alpha, grid, mu, log_temp,
                  max_iter=100, rtol=1e-12):
    def residual(mass, energy):
        return np.array([mass / target_mass - 1, energy / target_energy - 1])
    mass, energy, jac = _moments_and_jacobian(mu, log_temp, alpha, grid)
    res = residual(mass, energy)
    for _ in range(max_iter):
        if np.max(np.abs(res)) <= rtol:
            return mu, log_temp
        scaled = jac / np.array([[target_mass], [target_energy]])
        try:
            step = np.linalg.solve(scaled, -res)
        except np.linalg.LinAlgError:
            return None
        size = 1.0
        for _ in range(60):
            new_mu, new_lt = mu + size * step[0], log_temp + size * step[1]
            new_mass, new_energy, new_jac = \
                _moments_and_jacobian(new_mu, new_lt, alpha, grid)
            new_res = residual(new_mass, new_energy)
            if np.all(np.isfinite(new_res)) and \
                    np.linalg.norm(new_res) < np.linalg.norm(res):
                break
            size /= 2
        else:
            return None
        mu, log_temp, jac, res = new_mu, new_lt, new_jac, new_res
    return None

def _nested_match(target_mass, target_energy, alpha, grid):
    def energy_excess(log_temp):
        temperature = np.exp(log_temp)
        mu = _mass_mu(target_mass, temperature, alpha, grid)
        spec = EquilibriumSpec(mu, temperature, alpha)
        return equilibrium_moments(spec, grid)[1] - target_energy
    lo, hi = -1.0, 1.0
    for _ in range(100):
        if energy_excess(lo) < 0:
            break
        lo -= 2.0
    for _ in range(100):
        if energy_excess(hi) > 0:
            break
        hi += 2.0
    log_temp = optimize.brentq(energy_excess, lo, hi, xtol=1e-14,
                               rtol=1e-14, maxiter=500)
    temperature = np.exp(log_temp)
    return _mass_mu(target_mass, temperature, alpha, grid), log_temp

def match_moments(target_mass, target_energy, alpha, grid):
    """
    Return the EquilibriumSpec whose Wu equilibrium on the grid has the
    given mass and energy (zero bulk velocity).
    Newton on (mu, log T) with backtracking, falling back to nested
    bracketing when Newton stalls.
    """
    if not target_mass > 0:
        raise MomentMatchError("target mass %g must be > 0" % (target_mass,))
    e_min = minimal_energy(target_mass, alpha, grid)
    e_max = flat_energy(target_mass, grid)
    if not e_min < target_energy < e_max:
        raise MomentMatchError(
            "target energy %g unreachable for mass %g: equilibria span (%g, %g)"
            % (target_energy, target_mass, e_min, e_max))
    temperature = target_energy / (2 * target_mass)
    try:
        mu = _mass_mu(target_mass, temperature, alpha, grid)
        found = _newton_match(target_mass, target_energy, alpha, grid,
                              mu, np.log(temperature))
    except (ValueError, RuntimeError, FloatingPointError):
        found = None
    if found is None:
        pr.debug("match_moments: Newton stalled, using nested bracketing")
        try:
            found = _nested_match(target_mass, target_energy, alpha, grid)
        except (ValueError, RuntimeError) as exc:
            raise MomentMatchError(
                "no equilibrium found for mass %g, energy %g: %s"
                % (target_mass, target_energy, exc)) from exc
    mu, log_temp = found
    return EquilibriumSpec(float(mu), float(np.exp(log_temp)), alpha)

def entropy_density(f, alpha):
    """
    f log f + (1 - alpha f) log(1 - alpha f)
      - (1 + (1-alpha) f) log(1 + (1-alpha) f),
    with 0 log 0 = 0. Its derivative in f is log(f / F(f)).
    """
    f = np.asarray(f, dtype=np.float64)
    block = np.maximum(1 - alpha * f, 0.0)
    boost = 1 + (1 - alpha) * f
    return special.xlogy(f, f) + special.xlogy(block, block) \
           - special.xlogy(boost, boost)

def entropy(f, grid, alpha):
    values = f.values if isinstance(f, DistributionField) else f
    dens = entropy_density(values, alpha)
    total = np.sum(np.sum(dens, axis=0) * grid.v_weights) * grid.dx
    return EntropyValue(float(total))

def log_state_count(big_g, n, alpha):
    top = big_g + (n - 1) * (1 - alpha) + 1
    bottom = big_g - alpha * n - (1 - alpha) + 1
    if bottom <= 0 or top <= 0 or n + 1 <= 0:
        raise DomainError("state count undefined for G=%r, N=%r, alpha=%r"
                          % (big_g, n, alpha))
    return special.gammaln(top) - special.gammaln(n + 1) \
           - special.gammaln(bottom)

def state_count(big_g, n, alpha):
    """
    Wu's interpolated count of N-particle states in G single-particle states,
    (G + (N-1)(1-alpha))! / (N! (G - alpha N - (1-alpha))!).
    """
    return float(np.exp(log_state_count(big_g, n, alpha)))
