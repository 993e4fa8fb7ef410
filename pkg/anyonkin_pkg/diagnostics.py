#!/usr/bin/python3

# Copyright (C) 2021 Miguel Simoes, miguelrsimoes[a]yahoo[.]com
# For conditions of distribution and use, see copyright notice in anyonkin.py

"""
Runtime monitors on the solver output: moments and their drift, entropy and
its production, the Bony functional and its time integral, sup-densities of
the free-streaming-corrected field f#(t, x, v) = f(t, x + t v1, v), velocity
tails, the boundary flux at x = 0, the max-f envelope and fitted constants.

The sup over time is the running max of f# over the recorded steps.
"""

from dataclasses import dataclass, field as dc_field, asdict

import numpy as np

import anyonkin_pkg.printutils as pr
from anyonkin_pkg.miscutils import \
    DomainError, GridError, centro_sum, centro_odd_sum
from anyonkin_pkg.fields import DistributionField, Moments, compute_moments
from anyonkin_pkg.haldane import entropy
from anyonkin_pkg.collision import CollisionKernel, CollisionOperator
from anyonkin_pkg.solver import shift_values

MIN_TAIL_LAMBDA = 2.0

def _values(f):
    return f.values if isinstance(f, DistributionField) else np.asarray(f)

def default_lambdas(j):
    """
    The set {2, 4, j/2, 3j/4}, sorted, without thresholds below 2.
    """
    return sorted({lam for lam in (2.0, 4.0, j / 2, 3 * j / 4)
                   if lam >= MIN_TAIL_LAMBDA})

def default_envelope_band(alpha, j):
    """
    max(0.1/alpha, 2/j): wide enough that data clamped at 1/alpha - 1/j
    start inside the band.
    """
    return max(0.1 / alpha, 2.0 / j)

def bony_functional(f, grid, k, alpha, j=None, operator=None):
    """
    int |v - v_*|^2 B chi_j f f_* F_j(f') F_j(f'_*) over (x, v, v_*, theta).
    """
    values = _values(f)
    if operator is None:
        operator = CollisionOperator(grid, k, alpha, j)
    rates = operator.rates(values, with_bony=True)
    return _integrate(rates.bony_density, grid)

def _integrate(values, grid):
    return float(np.sum(np.sum(values, axis=0) * grid.v_weights) * grid.dx)

def sharp_values(f, grid, time):
    """
    f#(t, x, v) = f(t, x + t v1, v).
    """
    return shift_values(_values(f), grid, -time)

def sup_density(running_max, grid):
    """
    int sup_(t, x) f# dv.
    """
    return float(np.sum(np.max(running_max, axis=0) * grid.v_weights))

def sup_phase_mass(running_max, grid):
    """
    int int sup_t f# dv dx.
    """
    return _integrate(running_max, grid)

def tail_mass(running_max, grid, lam):
    """
    Return (int_{|v|>lam} sup f# dv, int_{|v|>lam} |v| sup f# dv).
    """
    if lam < MIN_TAIL_LAMBDA:
        raise DomainError("tail threshold %g below %g" % (lam, MIN_TAIL_LAMBDA))
    sup = np.max(running_max, axis=0)
    outer = grid.speed2 > lam * lam
    weights = np.where(outer, grid.v_weights, 0.0)
    return (float(np.sum(weights * sup)),
            float(np.sum(weights * np.sqrt(grid.speed2) * sup)))

def energy_flux_probe(f, grid):
    """
    Return (int v1^2 f(0, v) dv, int v1 f(0, v) dv) at the x-node 0.
    """
    station = _values(f)[0]
    flux = centro_sum(grid.v1 * grid.v1 * grid.v_weights * station)
    momentum = centro_odd_sum(grid.v1 * grid.v_weights, station)
    return flux, momentum

def windowed_sup_density(running_max, grid, delta2):
    """
    Profile x0 -> int_{|x - x0| < delta2} int sup_t f# dv dx on the x-nodes,
    distances taken on the periodic slab.
    """
    per_x = np.sum(running_max * grid.v_weights, axis=(1, 2))
    x = grid.x_nodes
    gap = np.abs(x[:, None] - x[None, :])
    gap = np.minimum(gap, 1 - gap)
    window = gap < delta2
    return (window * per_x[None, :]).sum(axis=1) * grid.dx

def regularized_energy_rate(f, operator, eps, q=None):
    """
    int Q_j(f) psi_eps dx dv with psi_eps(v) = |v|^2 / (1 + eps |v|^2).
    """
    grid = operator.grid
    if q is None:
        q = operator.apply_q(_values(f))
    psi = grid.speed2 / (1 + eps * grid.speed2)
    return _integrate(q * psi, grid)

def entropy_production(f_before, f_after, dt, grid, alpha):
    """
    (S(f_after) - S(f_before)) / dt for the entropy functional.
    """
    if dt <= 0:
        raise DomainError("dt must be > 0")
    before = entropy(f_before, grid, alpha).value
    after = entropy(f_after, grid, alpha).value
    return (after - before) / dt

def l1_distance(f, g, grid_f, grid_g=None):
    """
    L1 distance of two fields on the same grid, or on nested velocity grids
    with the same dv and nx whose nodes align; the smaller one is extended
    by zero.
    """
    a, b = _values(f), _values(g)
    if grid_g is None:
        grid_g = grid_f
    if a.shape != b.shape:
        if grid_f.nx != grid_g.nx or not np.isclose(grid_f.dv, grid_g.dv):
            raise GridError("l1_distance: grids not nested (nx or dv differ)")
        if grid_f.nv < grid_g.nv:
            a, b, grid_f, grid_g = b, a, grid_g, grid_f
        gap = grid_f.nv - grid_g.nv
        if gap % 2:
            raise GridError("l1_distance: velocity nodes do not align")
        off = gap // 2
        inner = grid_f.v_nodes[off:off + grid_g.nv]
        if not np.allclose(inner, grid_g.v_nodes):
            raise GridError("l1_distance: velocity nodes do not align")
        wide = np.zeros_like(a)
        wide[:, off:off + grid_g.nv, off:off + grid_g.nv] = b
        b = wide
    return _integrate(np.abs(a - b), grid_f)

@dataclass
class LinearFit:
    slope: float
    intercept: float
    rel_residual: float

def fit_affine(xs, ys):
    """
    Least-squares y = slope x + intercept; rel_residual is the rms residual
    over the rms of y.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if len(xs) < 2 or np.ptp(xs) == 0:
        return None
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    scale = np.sqrt(np.mean(ys * ys))
    rel = float(np.sqrt(np.mean(resid * resid)) / scale) if scale > 0 else 0.0
    return LinearFit(float(slope), float(intercept), rel)

def fit_loglog(xs, ys):
    """
    Affine fit of log y against log x, over the points with y > 0.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    keep = (ys > 0) & (xs > 0)
    return fit_affine(np.log(xs[keep]), np.log(ys[keep]))

@dataclass
class EnvelopeFit:
    applicable: bool
    b1_hat: float = None
    t_m_hat: float = None
    eta_hat: float = None
    reason: str = ""

def envelope_fit(times, max_f, alpha, band):
    """
    Fit 1/alpha - max f ~ b1 t on the initial window where max f stays in
    the band (1/alpha - band, 1/alpha]. t_m_hat is the first recorded time
    with max f <= 1/alpha - band; eta_hat is 1/alpha - max_{t >= t_m} max f.
    """
    times = np.asarray(times, dtype=np.float64)
    max_f = np.asarray(max_f, dtype=np.float64)
    top = 1 / alpha
    if len(max_f) == 0 or max_f[0] <= top - band:
        return EnvelopeFit(False, reason="initial max f below the band")
    below = np.flatnonzero(max_f <= top - band)
    end = below[0] if below.size else len(max_f)
    if end < 2:
        return EnvelopeFit(False, reason="fit window has fewer than 2 points")
    fit = fit_affine(times[:end], top - max_f[:end])
    res = EnvelopeFit(True, b1_hat=fit.slope)
    if below.size:
        res.t_m_hat = float(times[below[0]])
        res.eta_hat = float(top - np.max(max_f[below[0]:]))
    return res

@dataclass
class DiagnosticsRecord:
    step: int
    time: float
    mass: float
    momentum1: float
    momentum2: float
    energy: float
    mass_drift: float
    momentum1_drift: float
    momentum2_drift: float
    energy_drift: float
    entropy: float
    entropy_production: float
    bony: float
    bony_integral: float
    sup_density: float
    sup_phase_mass: float
    windowed_sup_max: float
    max_f: float
    min_f: float
    picard_residual: float
    picard_sweeps: int
    correction_norm: float
    defect: float
    flux_momentum2: float
    flux_momentum: float
    flux_momentum2_integral: float
    flux_momentum_integral: float
    psi_eps_rate: float
    tails: list = dc_field(default_factory=list)
    weighted_tails: list = dc_field(default_factory=list)

    def as_dict(self):
        return asdict(self)

class DiagnosticsMonitor:
    """
    Per-step diagnostics. observe() is called with every solver state in
    step order, starting with the initial state.
    """

    def __init__(self, params, grid, operator=None, lambdas=None, bony=True,
                 envelope_band=None, sup_window=0.0, psi_eps=0.0):
        self.params = params
        self.grid = grid
        self.alpha = params.alpha
        if operator is None:
            operator = CollisionOperator(
                grid, CollisionKernel.from_params(params), params.alpha,
                params.j, params.workers)
        self.operator = operator
        self.lambdas = default_lambdas(params.j) if lambdas is None \
                       else list(lambdas)
        for lam in self.lambdas:
            if lam < MIN_TAIL_LAMBDA:
                raise DomainError("tail threshold %g below %g"
                                  % (lam, MIN_TAIL_LAMBDA))
        self.bony = bony
        if envelope_band is None:
            envelope_band = default_envelope_band(params.alpha, params.j)
        self.envelope_band = envelope_band
        self.sup_window = sup_window
        self.psi_eps = psi_eps
        self.records = []
        self.running_max = None
        self.initial_moments = None
        self._prev = None

    def _drift(self, moments):
        m0 = self.initial_moments
        mass_ref = m0.mass if m0.mass > 0 else 1.0
        energy_ref = m0.energy if m0.energy > 0 else 1.0
        mom_ref = np.sqrt(m0.mass * m0.energy) if m0.mass * m0.energy > 0 \
                  else 1.0
        return ((moments.mass - m0.mass) / mass_ref,
                (moments.momentum1 - m0.momentum1) / mom_ref,
                (moments.momentum2 - m0.momentum2) / mom_ref,
                (moments.energy - m0.energy) / energy_ref)

    def observe(self, state):
        grid = self.grid
        field = state.field
        values = field.values
        time = field.time
        moments = compute_moments(field, grid)
        if self.initial_moments is None:
            self.initial_moments = moments
        sharp = sharp_values(values, grid, time)
        if self.running_max is None:
            self.running_max = sharp.copy()
        else:
            np.maximum(self.running_max, sharp, out=self.running_max)
        ent = entropy(field, grid, self.alpha).value
        bony = 0.0
        psi_rate = 0.0
        if self.bony or self.psi_eps > 0:
            rates = self.operator.rates(values, with_bony=self.bony)
            if self.bony:
                bony = _integrate(rates.bony_density, grid)
            if self.psi_eps > 0:
                q = self.operator.apply_q(values, rates)
                psi_rate = regularized_energy_rate(values, self.operator,
                                                   self.psi_eps, q)
        flux2, flux1 = energy_flux_probe(values, grid)
        prev = self._prev
        if prev is None:
            production = 0.0
            bony_integral = 0.0
            flux2_integral = flux1_integral = 0.0
        else:
            dt = time - prev["time"]
            production = (ent - prev["entropy"]) / dt if dt > 0 else 0.0
            bony_integral = prev["bony_integral"] \
                            + 0.5 * dt * (prev["bony"] + bony)
            flux2_integral = prev["flux_momentum2_integral"] \
                             + 0.5 * dt * (prev["flux_momentum2"] + flux2)
            flux1_integral = prev["flux_momentum_integral"] \
                             + 0.5 * dt * (prev["flux_momentum"] + flux1)
        windowed = 0.0
        if self.sup_window > 0:
            windowed = float(np.max(windowed_sup_density(
                self.running_max, grid, self.sup_window)))
        tails = [tail_mass(self.running_max, grid, lam)
                 for lam in self.lambdas]
        residuals = state.picard_residuals
        inside = values[:, grid.mask]
        drift = self._drift(moments)
        record = DiagnosticsRecord(
            step=state.step_index, time=time,
            mass=moments.mass, momentum1=moments.momentum1,
            momentum2=moments.momentum2, energy=moments.energy,
            mass_drift=drift[0], momentum1_drift=drift[1],
            momentum2_drift=drift[2], energy_drift=drift[3],
            entropy=ent, entropy_production=production,
            bony=bony, bony_integral=bony_integral,
            sup_density=sup_density(self.running_max, grid),
            sup_phase_mass=sup_phase_mass(self.running_max, grid),
            windowed_sup_max=windowed,
            max_f=float(np.max(inside)), min_f=float(np.min(inside)),
            picard_residual=residuals[-1] if residuals else 0.0,
            picard_sweeps=len(residuals),
            correction_norm=state.correction_norm, defect=state.defect,
            flux_momentum2=flux2, flux_momentum=flux1,
            flux_momentum2_integral=flux2_integral,
            flux_momentum_integral=flux1_integral,
            psi_eps_rate=psi_rate,
            tails=[t[0] for t in tails], weighted_tails=[t[1] for t in tails])
        self._prev = {
            "time": time, "entropy": ent, "bony": bony,
            "bony_integral": bony_integral,
            "flux_momentum2": flux2, "flux_momentum": flux1,
            "flux_momentum2_integral": flux2_integral,
            "flux_momentum_integral": flux1_integral}
        self.records.append(record)
        pr.debug("step %d t=%.6g mass=%.17g energy=%.17g entropy=%.17g "
                 "max_f=%.17g", record.step, time, record.mass, record.energy,
                 ent, record.max_f)
        return record

    def state_dict(self):
        """
        Scalars needed to continue the time integrals after a restart.
        The running max array is returned separately by running_max.
        """
        m0 = self.initial_moments
        res = dict(self._prev) if self._prev is not None else {}
        if m0 is not None:
            res.update({"initial_mass": m0.mass,
                        "initial_momentum1": m0.momentum1,
                        "initial_momentum2": m0.momentum2,
                        "initial_energy": m0.energy})
        return res

    def load_state(self, scalars, running_max):
        scalars = dict(scalars)
        self.initial_moments = Moments(
            mass=scalars.pop("initial_mass"),
            momentum1=scalars.pop("initial_momentum1"),
            momentum2=scalars.pop("initial_momentum2"),
            energy=scalars.pop("initial_energy"))
        self._prev = scalars
        self.running_max = np.array(running_max, dtype=np.float64)

    def report(self):
        return DiagnosticsReport(self.records, self.lambdas, self.alpha,
                                 self.envelope_band)

class DiagnosticsReport:
    """
    The recorded time series and the constants fitted on it.
    """

    def __init__(self, records, lambdas, alpha, envelope_band):
        self.records = list(records)
        self.lambdas = list(lambdas)
        self.alpha = alpha
        self.envelope_band = envelope_band

    def series(self, name):
        return np.array([getattr(r, name) for r in self.records])

    def envelope(self):
        return envelope_fit(self.series("time"), self.series("max_f"),
                            self.alpha, self.envelope_band)

    def affine(self, name):
        return fit_affine(self.series("time"), self.series(name))

    def tail_slopes(self):
        """
        Log-log slopes of the final plain and |v|-weighted tails against
        lambda, or None where fewer than two tails are positive.
        """
        if not self.records:
            return None, None
        last = self.records[-1]
        lams = np.array(self.lambdas)
        plain = fit_loglog(lams, last.tails)
        weighted = fit_loglog(lams, last.weighted_tails)
        return (plain.slope if plain else None,
                weighted.slope if weighted else None)

    def max_abs(self, name):
        vals = self.series(name)
        return float(np.max(np.abs(vals))) if len(vals) else 0.0

    def max_value(self, name):
        vals = self.series(name)
        return float(np.max(vals)) if len(vals) else 0.0

    def summary(self):
        """
        Name -> value pairs for the run summary, in a fixed order.
        """
        res = []
        for name in ("mass_drift", "momentum1_drift", "momentum2_drift",
                     "energy_drift", "defect"):
            res.append(("max |%s|" % name, self.max_abs(name)))
        res.append(("max entropy_production", self.max_value(
            "entropy_production")))
        res.append(("max max_f", self.max_value("max_f")))
        for name in ("bony_integral", "sup_density", "sup_phase_mass",
                     "flux_momentum_integral"):
            fit = self.affine(name)
            if fit is None:
                res.append(("%s fit" % name, "n/a"))
            else:
                res.append(("%s slope" % name, fit.slope))
                res.append(("%s intercept" % name, fit.intercept))
                res.append(("%s rel_residual" % name, fit.rel_residual))
        env = self.envelope()
        if env.applicable:
            res.append(("b1_hat", env.b1_hat))
            res.append(("t_m_hat", env.t_m_hat if env.t_m_hat is not None
                        else "not reached"))
            if env.eta_hat is not None:
                res.append(("eta_hat", env.eta_hat))
        else:
            res.append(("b1_hat", "not applicable: %s" % env.reason))
        plain, weighted = self.tail_slopes()
        res.append(("tail loglog slope", "n/a" if plain is None else plain))
        res.append(("weighted tail loglog slope",
                    "n/a" if weighted is None else weighted))
        return res
