#!/usr/bin/python3

# Copyright (C) 2021 Miguel Simoes, miguelrsimoes[a]yahoo[.]com
# For conditions of distribution and use, see copyright notice in anyonkin.py

"""
The truncated Haldane collision operator

    Q_j(f)(v) = (1/pi) int B chi_j (f' f'_* F_j(f) F_j(f_*)
                                    - f f_* F_j(f') F_j(f'_*)) dv_* dtheta

on the phase grid, split as Q_j(f) = F_j(f) gain_env - f loss.

Geometry: for u = v - v_* at polar angle phi, the unit vector n sits at angle
phi + theta and
    v' = v - n (u.n),   v'_* = v_* + n (u.n),
so |v' - v| = |u| |cos theta| and |v'_* - v| = |u| |sin theta|.

Evaluation: v_* runs over lattice offsets u = (a dv, b dv), so f_* is an
integer shift of the field. For fixed (u, theta) the displacement of v' and
v'_* is the same at every node, so f' and f'_* are bilinear interpolants
built from four shifted windows of the zero-padded field.
chi_j is the product of the ball masks at v, v_*, v', v'_*.
All accumulations run in a fixed (offset, theta) order and act on each
x-node separately, so any split into x-slabs gives identical bits.
"""

from dataclasses import dataclass

import numpy as np

import anyonkin_pkg.printutils as pr
from anyonkin_pkg.miscutils import DomainError, KernelError, ProjectionError
from anyonkin_pkg.haldane import filling_factor_reg_unchecked, filling_factor_max
from anyonkin_pkg.fields import local_moments, moment_basis
from anyonkin_pkg.thread_utils import slab_executor

STENCIL_CACHE_BYTES = 128 << 20

@dataclass(frozen=True)
class CollisionKernel:
    b0: float
    gamma: float
    gamma_prime: float
    c_b: float
    profile: str = "indicator"

    @classmethod
    def from_params(cls, params):
        return cls(b0=params.b0, gamma=params.gamma,
                   gamma_prime=params.gamma_prime, c_b=params.c_b,
                   profile=params.kernel_profile)

    def angular_factor(self, theta):
        """
        Profile in [0, 1] times the admissible-angle indicator.
        """
        theta = np.asarray(theta, dtype=np.float64)
        abs_cos = np.abs(np.cos(theta))
        admissible = (abs_cos > self.gamma_prime) \
                     & (1 - abs_cos > self.gamma_prime)
        if self.profile == "indicator":
            shape = np.ones_like(theta)
        elif self.profile == "sin2theta":
            shape = np.abs(np.sin(2 * theta))
        else:
            raise KernelError("unknown kernel profile %r" % (self.profile,))
        return np.where(admissible, shape, 0.0)

    def angular_mass(self, grid):
        """
        Quadrature of B(|u|, theta) dtheta on the grid for |u| >= gamma.
        """
        return self.b0 * float(np.sum(grid.theta_weights
                                      * self.angular_factor(grid.theta_nodes)))

    def verify(self, grid):
        """
        Raise KernelError unless int B dtheta >= c_b on the grid quadrature.
        """
        mass = self.angular_mass(grid)
        if mass < self.c_b:
            raise KernelError(
                "kernel angular mass %g below c_b=%g (profile %s, "
                "gamma_prime=%g, ntheta=%d)" % (mass, self.c_b, self.profile,
                                               self.gamma_prime, grid.ntheta))
        return mass

def eval_kernel(k, rel_speed, theta):
    """
    B(|v - v_*|, theta): b0 times the profile on the admissible set, else 0.
    """
    rel_speed = np.asarray(rel_speed, dtype=np.float64)
    res = k.b0 * k.angular_factor(theta) * (rel_speed >= k.gamma)
    if np.ndim(res) == 0:
        return float(res)
    return res

def collision_shift(u1, u2, theta):
    """
    Return d = -n (u.n), the displacement v' - v for relative velocity u.
    """
    phi = np.arctan2(u2, u1)
    n1 = np.cos(phi + theta)
    n2 = np.sin(phi + theta)
    proj = u1 * n1 + u2 * n2
    return -n1 * proj, -n2 * proj

def post_collision(v, v_star, theta):
    """
    Return (v', v'_*) for the pair (v, v_*) and angle theta.
    """
    v = np.asarray(v, dtype=np.float64)
    v_star = np.asarray(v_star, dtype=np.float64)
    u1, u2 = v[0] - v_star[0], v[1] - v_star[1]
    if u1 == 0 and u2 == 0:
        raise DomainError("degenerate pair: v equals v_star")
    d1, d2 = collision_shift(u1, u2, theta)
    v_prime = np.array([v[0] + d1, v[1] + d2])
    v_star_prime = np.array([v_star[0] - d1, v_star[1] - d2])
    return v_prime, v_star_prime

@dataclass
class CollisionRates:
    """
    gain_env, loss and (optionally) bony_density, each (nx, nv, nv).
    bony_density is f times int |u|^2 B chi f_* F_j(f') F_j(f'_*), without
    the 1/pi factor.
    """
    gain_env: np.ndarray
    loss: np.ndarray
    bony_density: np.ndarray = None

@dataclass(frozen=True)
class _Stencil:
    star_shift: tuple
    prime_shift: tuple
    star_prime_shift: tuple
    bony_factor: float
    theta_index: int
    weights: np.ndarray = None

def _split_shift(t):
    """
    Integer floor and fraction of a shift in grid units, snapping values
    within 1e-12 of an integer.
    """
    nearest = round(t)
    if abs(t - nearest) < 1e-12:
        return int(nearest), 0.0
    base = int(np.floor(t))
    return base, t - base

class CollisionOperator:
    """
    Q_j on a fixed grid and kernel. Geometry is set up once; rates() is
    then a pure function of the field values.
    """

    def __init__(self, grid, kernel, alpha, j=None, workers=1):
        self.grid = grid
        self.kernel = kernel
        self.alpha = float(alpha)
        self.j = float(grid.j if j is None else j)
        self.workers = workers
        self.pad = grid.nv + 2
        kernel.verify(grid)
        offsets = self._offsets()
        per_stencil = grid.nv * grid.nv * 8
        n_theta = int(np.count_nonzero(grid.theta_weights))
        self._cache = len(offsets) * n_theta * per_stencil \
                      <= STENCIL_CACHE_BYTES
        self._offsets_list = offsets
        self._stencils = list(self._build_stencils()) if self._cache else None
        pr.debug("collision operator: %d offsets, %d angles, cached=%s",
                 len(offsets), n_theta, self._cache)

    def _offsets(self):
        grid = self.grid
        nv = grid.nv
        res = []
        for a in range(-(nv - 1), nv):
            for b in range(-(nv - 1), nv):
                speed = np.hypot(a * grid.dv, b * grid.dv)
                if self.kernel.gamma <= speed <= 2 * grid.j:
                    res.append((a, b))
        return res

    def _stencil_weights(self, a, b, d1, d2, kw):
        grid = self.grid
        j2 = grid.j * grid.j
        u1, u2 = a * grid.dv, b * grid.dv
        star1, star2 = grid.v1 - u1, grid.v2 - u2
        chi = grid.mask & (star1 * star1 + star2 * star2 <= j2)
        p1, p2 = grid.v1 + d1, grid.v2 + d2
        chi &= p1 * p1 + p2 * p2 <= j2
        q1, q2 = star1 - d1, star2 - d2
        chi &= q1 * q1 + q2 * q2 <= j2
        if not chi.any():
            return None
        return np.where(chi, kw, 0.0)

    def _build_stencils(self):
        grid = self.grid
        dv = grid.dv
        thetas = [m for m in range(grid.ntheta) if grid.theta_weights[m] > 0]
        for a, b in self._offsets_list:
            u1, u2 = a * dv, b * dv
            speed2 = u1 * u1 + u2 * u2
            for m in thetas:
                theta = grid.theta_nodes[m]
                bval = eval_kernel(self.kernel, np.sqrt(speed2), theta)
                if bval <= 0:
                    continue
                kw = bval * grid.theta_weights[m] * dv * dv / np.pi
                d1, d2 = collision_shift(u1, u2, theta)
                weights = self._stencil_weights(a, b, d1, d2, kw)
                if weights is None:
                    continue
                yield _Stencil(
                    star_shift=(-a, -b),
                    prime_shift=(_split_shift(d1 / dv), _split_shift(d2 / dv)),
                    star_prime_shift=(_split_shift(-a - d1 / dv),
                                      _split_shift(-b - d2 / dv)),
                    bony_factor=speed2 * np.pi,
                    theta_index=m,
                    weights=weights)

    def stencils(self):
        if self._stencils is not None:
            return iter(self._stencils)
        return self._build_stencils()

    def _window(self, fpad, s1, s2):
        pad, nv = self.pad, self.grid.nv
        return fpad[:, pad + s1:pad + s1 + nv, pad + s2:pad + s2 + nv]

    def _bilinear(self, fpad, shift):
        (i1, p1), (i2, p2) = shift
        win = self._window
        if p1 == 0 and p2 == 0:
            return win(fpad, i1, i2)
        if p1 == 0:
            return (1 - p2) * win(fpad, i1, i2) + p2 * win(fpad, i1, i2 + 1)
        if p2 == 0:
            return (1 - p1) * win(fpad, i1, i2) + p1 * win(fpad, i1 + 1, i2)
        return (1 - p1) * ((1 - p2) * win(fpad, i1, i2)
                           + p2 * win(fpad, i1, i2 + 1)) \
               + p1 * ((1 - p2) * win(fpad, i1 + 1, i2)
                       + p2 * win(fpad, i1 + 1, i2 + 1))

    def _padded(self, values):
        pad, nv = self.pad, self.grid.nv
        fpad = np.zeros((values.shape[0], nv + 2 * pad, nv + 2 * pad))
        fpad[:, pad:pad + nv, pad:pad + nv] = values
        return fpad

    def rates(self, values, with_bony=False):
        """
        Return CollisionRates for field values of shape (nx, nv, nv).
        """
        values = np.asarray(values, dtype=np.float64)
        gain = np.zeros(values.shape)
        loss = np.zeros(values.shape)
        bony_rate = np.zeros(values.shape) if with_bony else None
        alpha, j = self.alpha, self.j

        def sweep(start, stop):
            fpad = self._padded(values[start:stop])
            fj_pad = filling_factor_reg_unchecked(fpad, alpha, j)
            gain_s = gain[start:stop]
            loss_s = loss[start:stop]
            for st in self.stencils():
                f_star = self._window(fpad, *st.star_shift)
                fj_star = self._window(fj_pad, *st.star_shift)
                f_p = self._bilinear(fpad, st.prime_shift)
                f_sp = self._bilinear(fpad, st.star_prime_shift)
                gain_s += st.weights * f_p * f_sp * fj_star
                lost = f_star * filling_factor_reg_unchecked(f_p, alpha, j) \
                       * filling_factor_reg_unchecked(f_sp, alpha, j)
                loss_s += st.weights * lost
                if bony_rate is not None:
                    bony_rate[start:stop] += (st.weights * st.bony_factor) \
                                             * lost

        slab_executor(sweep, values.shape[0], self.workers)
        bony = values * bony_rate if with_bony else None
        return CollisionRates(gain_env=gain, loss=loss, bony_density=bony)

    def apply_q(self, values, rates=None):
        """
        Q_j(f) = F_j(f) gain_env - f loss, zero off the ball.
        """
        values = np.asarray(values, dtype=np.float64)
        if rates is None:
            rates = self.rates(values)
        q = filling_factor_reg_unchecked(values, self.alpha, self.j) \
            * rates.gain_env - values * rates.loss
        return np.where(self.grid.mask, q, 0.0)

    def total_weight(self):
        """
        Sum of all stencil weights seen by an interior node, an upper bound
        for int B chi dv_* dtheta / pi.
        """
        grid = self.grid
        total = 0.0
        for a, b in self._offsets_list:
            speed = np.hypot(a * grid.dv, b * grid.dv)
            bvals = eval_kernel(self.kernel, speed, grid.theta_nodes)
            total += float(np.sum(bvals * grid.theta_weights))
        return total * grid.dv * grid.dv / np.pi

    def q_bound(self):
        """
        A-priori bound on max |Q_j(f)| over fields with 0 <= f <= 1/alpha.
        """
        fmax = filling_factor_max(self.alpha)
        return (fmax / self.alpha) ** 2 * self.total_weight()

def collision_rates(f, grid, k, alpha, j=None, workers=1, with_bony=False):
    values = getattr(f, "values", f)
    op = CollisionOperator(grid, k, alpha, j, workers)
    return op.rates(values, with_bony=with_bony)

def apply_Q(f, grid, k, alpha, j=None, workers=1): # pylint: disable=invalid-name
    values = getattr(f, "values", f)
    return CollisionOperator(grid, k, alpha, j, workers).apply_q(values)

def pair_integrand(f_of_v, v, v_star, theta, kernel, alpha, j):
    """
    |v - v_*|^2 B chi_j f f_* F_j(f') F_j(f'_*) at one (v, v_*, theta),
    with f given as a callable on velocities. chi_j tests the ball of
    radius j for all four velocities.
    """
    v = np.asarray(v, dtype=np.float64)
    v_star = np.asarray(v_star, dtype=np.float64)
    v_prime, v_star_prime = post_collision(v, v_star, theta)
    speed = float(np.hypot(*(v - v_star)))
    inside = all(np.hypot(*w) <= j for w in (v, v_star, v_prime, v_star_prime))
    if not inside:
        return 0.0
    bval = eval_kernel(kernel, speed, theta)
    fj = lambda w: filling_factor_reg_unchecked(f_of_v(w), alpha, j)
    return speed * speed * bval * f_of_v(v) * f_of_v(v_star) \
           * fj(v_prime) * fj(v_star_prime)

@dataclass
class ProjectionResult:
    increment: np.ndarray
    poly: np.ndarray
    correction_norm: float
    defect_before: np.ndarray
    defect_after: np.ndarray

def _scaled_basis(grid):
    j = grid.j
    return np.stack([np.ones_like(grid.v1), grid.v1 / j, grid.v2 / j,
                     grid.speed2 / (j * j)])

def moment_defects(increment, grid):
    """
    Per x-node sums of increment times (1, v1/j, v2/j, |v|^2/j^2) dv^2.
    """
    return local_moments(increment, grid, grid.j)

def conservative_projection(increment, grid, weight=None):
    """
    Add to each x-node the correction (a + b v1 + c v2 + d |v|^2) w(v)
    that zeroes the discrete mass, momenta and energy of the increment.
    weight defaults to the ball mask and may vary with x (shape (nx, nv, nv)).
    Nodes whose defect is exactly zero are left alone.
    """
    increment = np.asarray(increment, dtype=np.float64)
    nx = increment.shape[0]
    if weight is None:
        weight = np.broadcast_to(grid.mask.astype(np.float64), increment.shape)
    weight = np.where(grid.mask, weight, 0.0)
    basis = _scaled_basis(grid)
    weighted = moment_basis(grid, grid.j)
    defect = moment_defects(increment, grid)
    gram = np.einsum("kab,xab,lab->xkl", weighted, weight, basis)
    active = np.any(defect != 0, axis=1)
    coeffs = np.zeros((nx, 4))
    if np.any(active):
        a_mat = gram[active]
        rhs = -defect[active]
        sing = np.linalg.cond(a_mat) > 1 / np.finfo(float).eps
        if np.any(sing):
            bad = np.flatnonzero(active)[np.flatnonzero(sing)[0]]
            raise ProjectionError(
                "singular conservation system at x-node %d "
                "(weight support too small)" % (bad,))
        sol = np.linalg.solve(a_mat, rhs[..., None])[..., 0]
        resid = rhs - np.einsum("xkl,xl->xk", a_mat, sol)
        sol += np.linalg.solve(a_mat, resid[..., None])[..., 0]
        coeffs[active] = sol
    poly = np.einsum("xk,kab->xab", coeffs, basis)
    correction = weight * poly
    projected = np.where(grid.mask, increment + correction, 0.0)
    norm = float(np.sum(np.abs(correction) * grid.v_weights) * grid.dx)
    return ProjectionResult(
        increment=projected, poly=np.where(grid.mask, poly, 0.0),
        correction_norm=norm, defect_before=defect,
        defect_after=moment_defects(projected, grid))
