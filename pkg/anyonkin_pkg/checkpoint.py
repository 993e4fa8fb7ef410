#!/usr/bin/python3

# Copyright (C) 2021 Miguel Simoes, miguelrsimoes[a]yahoo[.]com
# For conditions of distribution and use, see copyright notice in anyonkin.py

"""
Checkpoint files.

Layout:
    8 bytes   magic b"ANYONKIN"
    uint32    format version, little-endian
    uint32    header length in bytes, little-endian
    header    UTF-8 JSON: config echo, step, time, shape, payload digest,
              diagnostics monitor scalars
    payload   field values, float64 little-endian, row-major (x, v1, v2)
    payload   running max of f#, same layout (monitor state)

Floats in the header are written with float.hex so they read back exactly.
The digest is xxh64 of both payload blocks.
"""

import json
import struct

import numpy as np
import xxhash

from anyonkin_pkg.miscutils import CheckpointError, ConfigError
from anyonkin_pkg.fields import DistributionField
from anyonkin_pkg.runconfig import parse_config

MAGIC = b"ANYONKIN"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<8sII")
_LE_FLOAT64 = np.dtype("<f8")

HASH_BLOCK_SIZE = 4 * 2**20

class Checkpoint:
    """
    A loaded checkpoint. config is the RunConfig parsed from the echo.
    """
    def __init__(self, config, field, step, monitor_scalars, running_max):
        self.config = config
        self.field = field
        self.step = step
        self.monitor_scalars = monitor_scalars
        self.running_max = running_max

    @property
    def time(self):
        return self.field.time

def _digest(*blocks):
    hasher = xxhash.xxh64()
    for block in blocks:
        view = memoryview(block)
        for start in range(0, len(view), HASH_BLOCK_SIZE):
            hasher.update(view[start:start + HASH_BLOCK_SIZE])
    return hasher.hexdigest()

def _to_le_bytes(values):
    return np.ascontiguousarray(values, dtype=_LE_FLOAT64).tobytes()

def write_checkpoint(path, config, state, monitor_scalars, running_max):
    """
    Write the solver state and a snapshot of the monitor state to path.
    """
    values = state.field.values
    if running_max is None:
        running_max = np.zeros_like(values)
    payload = _to_le_bytes(values)
    monitor_block = _to_le_bytes(running_max)
    header = {
        "config": config.to_ini(),
        "step": int(state.step_index),
        "time": float(state.field.time).hex(),
        "shape": list(values.shape),
        "digest": _digest(payload, monitor_block),
        "monitor": {key: float(val).hex()
                    for key, val in sorted(monitor_scalars.items())},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as stream:
        stream.write(_PREFIX.pack(MAGIC, FORMAT_VERSION, len(header_bytes)))
        stream.write(header_bytes)
        stream.write(payload)
        stream.write(monitor_block)

def read_checkpoint(path, environ=None):
    """
    Read and validate a checkpoint written by write_checkpoint.
    """
    with open(path, "rb") as stream:
        data = stream.read()
    if len(data) < _PREFIX.size:
        raise CheckpointError("%s: truncated header" % (path,))
    magic, version, header_len = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError("%s: not a checkpoint file" % (path,))
    if version != FORMAT_VERSION:
        raise CheckpointError("%s: version mismatch (file %d, supported %d)"
                              % (path, version, FORMAT_VERSION))
    body = _PREFIX.size + header_len
    if len(data) < body:
        raise CheckpointError("%s: truncated header" % (path,))
    try:
        header = json.loads(data[_PREFIX.size:body].decode("utf-8"))
        shape = tuple(int(n) for n in header["shape"])
        step = int(header["step"])
        time = float.fromhex(header["time"])
        scalars = {key: float.fromhex(val)
                   for key, val in header["monitor"].items()}
        config_text = header["config"]
        digest = header["digest"]
    except (ValueError, KeyError, TypeError) as exc:
        raise CheckpointError("%s: bad header (%s)" % (path, exc)) from exc
    block_len = 8 * int(np.prod(shape))
    if len(data) - body < 2 * block_len:
        raise CheckpointError(
            "%s: truncated payload (%d of %d bytes)"
            % (path, len(data) - body, 2 * block_len))
    if len(data) - body > 2 * block_len:
        raise CheckpointError("%s: trailing bytes after payload" % (path,))
    payload = data[body:body + block_len]
    monitor_block = data[body + block_len:]
    if _digest(payload, monitor_block) != digest:
        raise CheckpointError("%s: digest mismatch" % (path,))
    try:
        config = parse_config(config_text, environ)
    except ConfigError as exc:
        raise CheckpointError("%s: bad config echo (%s)" % (path, exc)) \
            from exc
    params = config.params
    if shape != (params.nx, params.nv, params.nv):
        raise CheckpointError(
            "%s: config-grid mismatch (payload %s, config nx=%d nv=%d)"
            % (path, shape, params.nx, params.nv))
    values = np.frombuffer(payload, dtype=_LE_FLOAT64).reshape(shape)
    running_max = np.frombuffer(monitor_block, dtype=_LE_FLOAT64)
    running_max = running_max.reshape(shape).astype(np.float64)
    field = DistributionField(values.astype(np.float64), time)
    return Checkpoint(config, field, step, scalars, running_max)
