#!/usr/bin/python3

# Copyright (C) 2021 Miguel Simoes, miguelrsimoes[a]yahoo[.]com
# For conditions of distribution and use, see copyright notice in anyonkin.py

"""
Initial data scenarios:
    wu       - Wu equilibrium at (mu, temperature), x-uniform;
    bimodal  - two Gaussians centred at +-center, x-uniform unless jittered;
    wave     - Wu equilibrium modulated in x by 1 + a cos(2 pi x).
All are clamped to 1/alpha - 1/j and masked to the ball.
"""

from dataclasses import dataclass

import numpy as np

from anyonkin_pkg.miscutils import ParamsError
from anyonkin_pkg.fields import DistributionField, clamp_initial_data
from anyonkin_pkg.haldane import EquilibriumSpec, wu_profile

PRESET_NAMES = ("wu", "bimodal", "wave")

@dataclass(frozen=True)
class PresetSpec:
    name: str
    mu: float = 0.0
    temperature: float = 1.0
    amplitude: float = 0.5
    center: tuple = (1.0, 0.0)
    width: float = 0.5
    wave_amplitude: float = 0.5
    jitter: float = 0.0
    seed: int = 0

    def violations(self):
        """
        Return (key, message) for every violated constraint.
        """
        res = []
        if self.name not in PRESET_NAMES:
            res.append(("name", "must be one of %s" % ", ".join(PRESET_NAMES)))
        for key in ("temperature", "amplitude", "width"):
            if not getattr(self, key) > 0:
                res.append((key, "must be > 0"))
        if len(self.center) != 2:
            res.append(("center", "must hold two numbers"))
        for key in ("wave_amplitude", "jitter"):
            if not 0 <= getattr(self, key) < 1:
                res.append((key, "must be in [0, 1)"))
        return res

def bimodal_profile(grid, amplitude, center, width):
    c1, c2 = center
    two_w2 = 2 * width * width
    near = np.exp(-((grid.v1 - c1) ** 2 + (grid.v2 - c2) ** 2) / two_w2)
    far = np.exp(-((grid.v1 + c1) ** 2 + (grid.v2 + c2) ** 2) / two_w2)
    return np.where(grid.mask, amplitude * (near + far), 0.0)

def make_initial(params, grid, preset):
    """
    Return the clamped initial DistributionField for the preset.
    """
    violations = preset.violations()
    if violations:
        raise ParamsError(["%s %s" % pair for pair in violations],
                          keyed=violations)
    alpha = params.alpha
    if preset.name == "bimodal":
        profile = bimodal_profile(grid, preset.amplitude, preset.center,
                                  preset.width)
        values = np.broadcast_to(profile, grid.shape)
        if preset.jitter > 0:
            rng = np.random.default_rng(preset.seed)
            noise = rng.uniform(-1.0, 1.0, size=grid.shape)
            values = values * (1 + preset.jitter * noise)
    else:
        spec = EquilibriumSpec(preset.mu, preset.temperature, alpha)
        profile = wu_profile(spec, grid)
        values = np.broadcast_to(profile, grid.shape)
        if preset.name == "wave":
            modulation = 1 + preset.wave_amplitude \
                         * np.cos(2 * np.pi * grid.x_nodes)
            values = values * modulation[:, None, None]
    raw = DistributionField(np.where(grid.mask, values, 0.0), 0.0)
    return clamp_initial_data(raw, params, grid)

def initial_sup_density(f, grid):
    """
    c0 = int sup_x f dv, the scale of the default time step.
    """
    return float(np.sum(np.max(f.values, axis=0) * grid.v_weights))

def default_dt(params, f0, grid):
    """
    0.01 / (b0 c0).
    """
    c0 = initial_sup_density(f0, grid)
    if c0 <= 0:
        return 0.01 / params.b0
    return 0.01 / (params.b0 * c0)
