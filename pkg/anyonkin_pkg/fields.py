#!/usr/bin/python3

# Copyright (C) 2021 Miguel Simoes, miguelrsimoes[a]yahoo[.]com
# For conditions of distribution and use, see copyright notice in anyonkin.py

"""
Core data model: simulation parameters, the phase-space grid and the
distribution field f(t, x, v) with its range invariant.

Layout: field values are float64 arrays of shape (nx, nv, nv), indexed by
(x-node, v1-node, v2-node). The velocity domain is the square [-j, j]^2 with
cell-centred nodes; nodes with |v| > j carry zero weight and f = 0 there.
The x-grid is periodic on [0, 1) with nx nodes.
"""

from dataclasses import dataclass, field as dc_field, fields as dc_fields, replace

import numpy as np
from scipy import ndimage

from anyonkin_pkg.miscutils import \
    ParamsError, GridError, RangeViolation, centro_sum, centro_odd_sum

KERNEL_PROFILES = ("indicator", "sin2theta")

@dataclass(frozen=True)
class SimulationParams:
    alpha: float
    b0: float = 1.0
    gamma: float = 0.2
    gamma_prime: float = 0.05
    c_b: float = 0.1
    j: float = 4.0
    nx: int = 8
    nv: int = 16
    ntheta: int = 8
    dt: float = 0.01
    t_end: float = 1.0
    picard_iters: int = 2
    picard_tol: float = 1e-10
    projection: bool = True
    kernel_profile: str = "indicator"
    mollify: bool = False
    workers: int = 1

    def __post_init__(self):
        violations = self.violations()
        if violations:
            raise ParamsError(["%s %s" % pair for pair in violations],
                              keyed=violations)

    def violations(self):
        """
        Return (key, message) for every violated invariant, empty if valid.
        """
        res = []
        if not 0 < self.alpha <= 1:
            res.append(("alpha", "out of (0,1]"))
        if not self.gamma_prime > 0:
            res.append(("gamma_prime", "must be > 0"))
        if not self.gamma_prime < 0.5:
            res.append(("gamma_prime", "must be < 1/2"))
        for name in ("gamma", "c_b", "b0", "dt", "t_end"):
            if not getattr(self, name) > 0:
                res.append((name, "must be > 0"))
        if not self.j > self.gamma:
            res.append(("j", "must be > gamma"))
        if 0 < self.alpha <= 1 and not 1 / self.alpha - 1 / self.j > 0:
            res.append(("j", "must be > alpha (clamp level 1/alpha - 1/j)"))
        for name in ("nx", "nv", "ntheta"):
            if not getattr(self, name) >= 2:
                res.append((name, "must be >= 2"))
        if not self.picard_iters >= 1:
            res.append(("picard_iters", "must be >= 1"))
        if not self.picard_tol >= 0:
            res.append(("picard_tol", "must be >= 0"))
        if not self.workers >= 1:
            res.append(("workers", "must be >= 1"))
        if self.kernel_profile not in KERNEL_PROFILES:
            res.append(("kernel_profile", "must be one of %s"
                        % ", ".join(KERNEL_PROFILES)))
        return res

    def replace(self, **changes):
        return replace(self, **changes)

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in dc_fields(self)}

    @property
    def clamp_level(self):
        return 1 / self.alpha - 1 / self.j

@dataclass(frozen=True, eq=False)
class PhaseGrid:
    """
    Nodes and quadrature weights in x, v and theta.
    v1, v2, speed2, mask and v_weights are (nv, nv) arrays.
    """
    j: float
    nx: int
    nv: int
    ntheta: int
    gamma_prime: float
    dx: float
    dv: float
    dtheta: float
    x_nodes: np.ndarray
    v_nodes: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    speed2: np.ndarray
    mask: np.ndarray
    v_weights: np.ndarray
    theta_nodes: np.ndarray
    theta_weights: np.ndarray
    admissible_theta: np.ndarray = dc_field(repr=False)

    @property
    def shape(self):
        return (self.nx, self.nv, self.nv)

    @property
    def theta_measure(self):
        return float(np.sum(self.theta_weights))

def make_grid(params):
    """
    Build the phase grid. Rejects grids with fewer than 4 nodes across 2j.
    """
    if params.nv < 4:
        raise GridError("grid under-resolved: nv=%d < 4 nodes across 2j"
                        % (params.nv,))
    j = float(params.j)
    nv = params.nv
    dv = 2 * j / nv
    # Half-integer offsets make the node set exactly symmetric under v -> -v.
    v_nodes = (np.arange(nv) - (nv - 1) / 2) * dv
    v1, v2 = np.meshgrid(v_nodes, v_nodes, indexing="ij")
    speed2 = v1 * v1 + v2 * v2
    mask = speed2 <= j * j
    if not mask.any():
        raise GridError("grid under-resolved: no v-node inside the ball")
    v_weights = np.where(mask, dv * dv, 0.0)
    nx = params.nx
    x_nodes = np.arange(nx) / nx
    ntheta = params.ntheta
    dtheta = 2 * np.pi / ntheta
    theta_nodes = (np.arange(ntheta) + 0.5) * dtheta
    abs_cos = np.abs(np.cos(theta_nodes))
    gp = params.gamma_prime
    admissible = (abs_cos > gp) & (1 - abs_cos > gp)
    theta_weights = np.where(admissible, dtheta, 0.0)
    for arr in (v_nodes, v1, v2, speed2, mask, v_weights,
                x_nodes, theta_nodes, theta_weights, admissible):
        arr.flags.writeable = False
    return PhaseGrid(
        j=j, nx=nx, nv=nv, ntheta=ntheta, gamma_prime=gp,
        dx=1.0 / nx, dv=dv, dtheta=dtheta,
        x_nodes=x_nodes, v_nodes=v_nodes, v1=v1, v2=v2, speed2=speed2,
        mask=mask, v_weights=v_weights,
        theta_nodes=theta_nodes, theta_weights=theta_weights,
        admissible_theta=admissible)

class DistributionField:
    """
    Occupation density f on the phase grid at a given time.
    Values are read-only once constructed.
    """

    def __init__(self, values, time=0.0):
        values = np.array(values, dtype=np.float64)
        if values.ndim != 3 or values.shape[1] != values.shape[2]:
            raise ValueError("field values must have shape (nx, nv, nv)")
        values.flags.writeable = False
        self.values = values
        self.time = float(time)

    @classmethod
    def uniform(cls, grid, v_profile, time=0.0):
        """
        Return the x-uniform field with the given (nv, nv) velocity profile.
        """
        v_profile = np.where(grid.mask, v_profile, 0.0)
        values = np.broadcast_to(v_profile, grid.shape)
        return cls(values, time)

    @classmethod
    def zeros(cls, grid, time=0.0):
        return cls(np.zeros(grid.shape), time)

    @property
    def shape(self):
        return self.values.shape

    def with_values(self, values, time=None):
        return DistributionField(values, self.time if time is None else time)

    def is_x_uniform(self):
        return bool(np.all(self.values == self.values[:1]))

    def __repr__(self):
        return "DistributionField(shape=%s, time=%r)" % (self.shape, self.time)

@dataclass(frozen=True)
class Moments:
    mass: float
    momentum1: float
    momentum2: float
    energy: float

def compute_moments(f, grid):
    """
    Mass, momenta and energy (int |v|^2 f) per unit slab.
    Reductions pair mirrored velocity nodes, so reflecting f through
    v -> -v negates the momenta and keeps mass and energy bit for bit.
    """
    values = f.values if isinstance(f, DistributionField) else f
    x_sum = np.sum(values, axis=0) * grid.dx
    weights = grid.v_weights
    return Moments(
        mass=centro_sum(weights * x_sum),
        momentum1=centro_odd_sum(grid.v1 * weights, x_sum),
        momentum2=centro_odd_sum(grid.v2 * weights, x_sum),
        energy=centro_sum(grid.speed2 * weights * x_sum))

def local_moments(values, grid, scale=1.0):
    """
    Return the (nx, 4) array of per-x-node velocity moments
    (1, v1/scale, v2/scale, |v|^2/scale^2) of values, without the dx factor.
    """
    basis = moment_basis(grid, scale)
    return np.einsum("xab,kab->xk", values, basis)

def moment_basis(grid, scale=1.0):
    """
    The (4, nv, nv) array of scaled collision invariants times the v-weights.
    """
    weights = grid.v_weights
    return np.stack([weights, grid.v1 / scale * weights,
                     grid.v2 / scale * weights,
                     grid.speed2 / (scale * scale) * weights])

def mollify(values, grid):
    """
    Convolve in v with a discrete Gaussian of width 1/j, then remask.
    """
    sigma = (1.0 / grid.j) / grid.dv
    out = ndimage.gaussian_filter(values, sigma=(0, sigma, sigma),
                                  mode="constant", cval=0.0)
    return np.where(grid.mask, out, 0.0)

def clamp_initial_data(f0, params, grid=None):
    """
    Return min(f0, 1/alpha - 1/j) with the ball mask applied, optionally
    mollified first when params.mollify is set.
    """
    if grid is None:
        grid = make_grid(params)
    values = np.asarray(f0.values, dtype=np.float64)
    if params.mollify:
        values = mollify(values, grid)
    clamped = np.minimum(values, params.clamp_level)
    clamped = np.where(grid.mask, clamped, 0.0)
    return f0.with_values(clamped)

def check_range(f, grid, alpha, positive=None, step_index=None):
    """
    Raise RangeViolation unless f is finite, f <= 1/alpha on the ball, f = 0
    off the ball, f >= 0 everywhere and f > 0 wherever positive is set.
    """
    values = f.values if isinstance(f, DistributionField) else f
    if not np.all(np.isfinite(values)):
        bad = values[~np.isfinite(values)][0]
        raise RangeViolation("finite f", float(bad), step_index)
    outside = values[:, ~grid.mask]
    if outside.size and np.any(outside != 0):
        raise RangeViolation("mask: f = 0 off the ball",
                             float(np.max(np.abs(outside))), step_index)
    fmax = float(np.max(values))
    if fmax > 1 / alpha:
        raise RangeViolation("range: f <= 1/alpha", fmax, step_index)
    fmin = float(np.min(values))
    if fmin < 0:
        raise RangeViolation("range: f >= 0", fmin, step_index)
    if positive is not None:
        inside = values[positive]
        if inside.size and np.min(inside) <= 0:
            raise RangeViolation("range: f > 0", float(np.min(inside)),
                                 step_index)
