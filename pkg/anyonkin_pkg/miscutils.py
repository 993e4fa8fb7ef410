#!/usr/bin/python3

# Copyright (C) 2021 Miguel Simoes, miguelrsimoes[a]yahoo[.]com
# For conditions of distribution and use, see copyright notice in anyonkin.py

"""
Odds and ends: the exception hierarchy and the fixed-order
reductions shared by the numerical modules.
"""

import numpy as np

class AnyonKinError(Exception):
    pass

class ParamsError(AnyonKinError):
    """
    Invalid simulation parameters. Holds the full list of violations and,
    when known, the (key, message) pairs they were formatted from.
    """
    def __init__(self, violations, keyed=()):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        self.keyed = list(keyed)
        super().__init__("; ".join(self.violations))

class GridError(AnyonKinError):
    pass

class DomainError(AnyonKinError, ValueError):
    pass

class KernelError(AnyonKinError):
    pass

class ProjectionError(AnyonKinError):
    pass

class MomentMatchError(AnyonKinError):
    pass

class CheckpointError(AnyonKinError):
    pass

class ConfigError(AnyonKinError):
    """
    Each violation is a string prefixed by its section.key path.
    """
    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("\n  ".join(self.violations))

class RangeViolation(AnyonKinError):
    """
    A hard invariant on the distribution field tripped.
    """
    def __init__(self, invariant, value, step_index=None):
        super().__init__()
        self.invariant = invariant
        self.value = value
        self.step_index = step_index

    def __str__(self):
        where = "" if self.step_index is None else f" at step {self.step_index}"
        return f"{self.invariant} violated{where} (value {self.value!r})"

class ArgumentParserError(Exception):
    pass

def centro_sum(arr):
    """
    Sum of a centrosymmetric-layout array, pairing element k with its mirror
    n-1-k before adding.
    Mirroring arr (arr[::-1, ::-1]) gives a bitwise identical result.
    """
    flat = np.ravel(arr)
    size = flat.size
    half = size // 2
    pairs = flat[:half] + flat[::-1][:half]
    total = np.sum(pairs)
    if size % 2:
        total = total + flat[half]
    return float(total)

def centro_odd_sum(weight, arr):
    """
    Sum of weight*arr where weight is odd under mirroring (weight[::-1] is
    -weight). Mirroring arr exactly negates the result.
    """
    flat_w = np.ravel(weight)
    flat = np.ravel(arr)
    half = flat.size // 2
    terms = flat_w[:half] * (flat[:half] - flat[::-1][:half])
    return float(np.sum(terms))
