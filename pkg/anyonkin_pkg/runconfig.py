#!/usr/bin/python3

# Copyright (C) 2021 Miguel Simoes, miguelrsimoes[a]yahoo[.]com
# For conditions of distribution and use, see copyright notice in anyonkin.py

"""
Run configuration files: ini-style documents read with configparser.

Sections and keys (keys are case-insensitive, '-' and '_' are the same):

[simulation]
alpha           required, in (0, 1]
b0 gamma gamma_prime c_b j nx nv ntheta t_end picard_iters picard_tol
dt              default 0.01 / (b0 c0), c0 = int sup_x f0 dv
projection      yes/no, default yes
kernel_profile  indicator | sin2theta
mollify         yes/no, default no
workers         x-slab threads, default 1

[preset]
name            required: wu | bimodal | wave
mu temperature amplitude width wave_amplitude jitter seed
center          two numbers

[diagnostics]
bony            yes/no, default yes
lambdas         whitespace-separated list, default 2 4 j/2 3j/4
envelope_band   default max(0.1/alpha, 2/j)
sup_window      windowed sup-density half-width, 0 = off
psi_eps         eps of the |v|^2/(1 + eps |v|^2) energy probe, 0 = off

[output]
directory       default "anyonkin-out"; ANYONKIN_OUTPUT_DIR overrides it
checkpoint_every  steps between checkpoints, 0 = off

All violations are collected before ConfigError is raised.
"""

import os
import configparser
from dataclasses import dataclass, replace

from anyonkin_pkg.miscutils import ConfigError, ParamsError
from anyonkin_pkg.fields import SimulationParams
from anyonkin_pkg.presets import PresetSpec, default_dt

OUTPUT_DIR_ENV = "ANYONKIN_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "anyonkin-out"

_BOOL_STATES = configparser.ConfigParser.BOOLEAN_STATES

def _to_bool(text):
    low = text.strip().lower()
    if low not in _BOOL_STATES:
        raise ValueError("not a boolean: %r" % (text,))
    return _BOOL_STATES[low]

def _to_int(text):
    return int(text.strip())

def _to_float(text):
    return float(text.strip())

def _to_str(text):
    return text.strip()

def _to_floats(text):
    return tuple(float(tok) for tok in text.split())

# section -> key -> converter
SCHEMA = {
    "simulation": {
        "alpha": _to_float, "b0": _to_float, "gamma": _to_float,
        "gamma_prime": _to_float, "c_b": _to_float, "j": _to_float,
        "nx": _to_int, "nv": _to_int, "ntheta": _to_int, "dt": _to_float,
        "t_end": _to_float, "picard_iters": _to_int,
        "picard_tol": _to_float, "projection": _to_bool,
        "kernel_profile": _to_str, "mollify": _to_bool, "workers": _to_int,
    },
    "preset": {
        "name": _to_str, "mu": _to_float, "temperature": _to_float,
        "amplitude": _to_float, "center": _to_floats, "width": _to_float,
        "wave_amplitude": _to_float, "jitter": _to_float, "seed": _to_int,
    },
    "diagnostics": {
        "bony": _to_bool, "lambdas": _to_floats, "envelope_band": _to_float,
        "sup_window": _to_float, "psi_eps": _to_float,
    },
    "output": {
        "directory": _to_str, "checkpoint_every": _to_int,
    },
}

REQUIRED = (("simulation", "alpha"), ("preset", "name"))

@dataclass(frozen=True)
class RunConfig:
    params: SimulationParams
    preset: PresetSpec
    dt_given: bool = False
    bony: bool = True
    lambdas: tuple = None
    envelope_band: float = None
    sup_window: float = 0.0
    psi_eps: float = 0.0
    output_dir: str = DEFAULT_OUTPUT_DIR
    checkpoint_every: int = 0

    def with_dt(self, f0, grid):
        """
        Return the config with dt resolved from the initial field if not given.
        """
        if self.dt_given:
            return self
        dt = default_dt(self.params, f0, grid)
        return replace(self, params=self.params.replace(dt=dt), dt_given=True)

    def to_ini(self):
        """
        The resolved configuration as a config document parse_config accepts.
        """
        params = self.params.as_dict()
        if not self.dt_given:
            del params["dt"]
        preset = {
            "name": self.preset.name, "mu": self.preset.mu,
            "temperature": self.preset.temperature,
            "amplitude": self.preset.amplitude, "center": self.preset.center,
            "width": self.preset.width,
            "wave_amplitude": self.preset.wave_amplitude,
            "jitter": self.preset.jitter, "seed": self.preset.seed}
        diagnostics = {"bony": self.bony, "sup_window": self.sup_window,
                       "psi_eps": self.psi_eps}
        if self.lambdas is not None:
            diagnostics["lambdas"] = self.lambdas
        if self.envelope_band is not None:
            diagnostics["envelope_band"] = self.envelope_band
        output = {"directory": self.output_dir,
                  "checkpoint_every": self.checkpoint_every}
        lines = []
        for section, entries in (("simulation", params), ("preset", preset),
                                 ("diagnostics", diagnostics),
                                 ("output", output)):
            lines.append("[%s]" % section)
            for key, val in entries.items():
                lines.append("%s = %s" % (key, _format_value(val)))
            lines.append("")
        return "\n".join(lines)

def _format_value(val):
    if isinstance(val, bool):
        return "yes" if val else "no"
    if isinstance(val, float):
        return repr(val)
    if isinstance(val, (tuple, list)):
        return " ".join(_format_value(float(v)) for v in val)
    return str(val)

def _read_document(text, violations):
    parser = configparser.ConfigParser(
        interpolation=None, strict=True, empty_lines_in_values=False)
    parser.optionxform = lambda key: key.strip().lower().replace("-", "_")
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        violations.append("syntax: %s" % (exc,))
        return None
    return parser

def _typed_sections(parser, violations):
    values = {section: {} for section in SCHEMA}
    bad = set()
    for section in parser.sections():
        sect_name = section.strip().lower()
        if sect_name not in SCHEMA:
            violations.append("unknown section [%s]" % (section,))
            continue
        schema = SCHEMA[sect_name]
        for key, raw in parser.items(section):
            path = "%s.%s" % (sect_name, key)
            if key not in schema:
                violations.append("%s: unknown key" % (path,))
                continue
            try:
                values[sect_name][key] = schema[key](raw)
            except ValueError as exc:
                violations.append("%s: bad value %r (%s)" % (path, raw, exc))
                bad.add((sect_name, key))
    for section, key in REQUIRED:
        if key not in values[section] and (section, key) not in bad:
            violations.append("%s.%s: missing required key" % (section, key))
    return values

def _keyed_violations(section, pairs):
    return ["%s.%s: %s" % (section, key, message) for key, message in pairs]

def _build_params(sim, violations):
    kwargs = dict(sim)
    kwargs.setdefault("alpha", 0.5)
    dt_given = "dt" in kwargs
    try:
        params = SimulationParams(**kwargs)
    except ParamsError as exc:
        violations.extend(_keyed_violations("simulation", exc.keyed))
        return None, dt_given
    return params, dt_given

def _build_preset(section, violations):
    kwargs = dict(section)
    kwargs.setdefault("name", "wu")
    preset = PresetSpec(**kwargs)
    violations.extend(_keyed_violations("preset", preset.violations()))
    return preset

def parse_config(text, environ=None):
    """
    Parse a config document into a RunConfig, or raise ConfigError listing
    every violation.
    """
    if environ is None:
        environ = os.environ
    violations = []
    parser = _read_document(text, violations)
    if parser is None:
        raise ConfigError(violations)
    values = _typed_sections(parser, violations)
    params, dt_given = _build_params(values["simulation"], violations)
    preset = _build_preset(values["preset"], violations)
    diag = values["diagnostics"]
    lambdas = diag.get("lambdas")
    if lambdas is not None:
        if not lambdas:
            violations.append("diagnostics.lambdas: empty list")
        elif min(lambdas) < 2:
            violations.append("diagnostics.lambdas: thresholds must be >= 2")
    for key in ("envelope_band",):
        if key in diag and not diag[key] > 0:
            violations.append("diagnostics.%s: must be > 0" % key)
    for key in ("sup_window", "psi_eps"):
        if key in diag and not diag[key] >= 0:
            violations.append("diagnostics.%s: must be >= 0" % key)
    out = values["output"]
    if out.get("checkpoint_every", 0) < 0:
        violations.append("output.checkpoint_every: must be >= 0")
    if violations:
        raise ConfigError(violations)
    output_dir = environ.get(OUTPUT_DIR_ENV) or \
                 out.get("directory", DEFAULT_OUTPUT_DIR)
    return RunConfig(
        params=params, preset=preset, dt_given=dt_given,
        bony=diag.get("bony", True), lambdas=lambdas,
        envelope_band=diag.get("envelope_band"),
        sup_window=diag.get("sup_window", 0.0),
        psi_eps=diag.get("psi_eps", 0.0),
        output_dir=output_dir,
        checkpoint_every=out.get("checkpoint_every", 0))

def read_config_file(path, environ=None):
    try:
        with open(path, "r", encoding="utf-8") as stream:
            text = stream.read()
    except UnicodeDecodeError as exc:
        raise ConfigError("%s: not UTF-8 text (%s)" % (path, exc)) from exc
    return parse_config(text, environ)
