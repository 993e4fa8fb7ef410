#!/usr/bin/python3

# Copyright (C) 2021 Miguel Simoes, miguelrsimoes[a]yahoo[.]com
# For conditions of distribution and use, see copyright notice in anyonkin.py

"""
Run output files.

diagnostics.csv has one row per step, step 0 included, with header entries
"name [unit]". Floats are written with %.17g so they read back exactly.
Tail columns are named tail_mass@<lambda> and weighted_tail_mass@<lambda>.

summary.txt echoes the configuration, then lists the fitted constants, the
conservation maxima, pass/fail verdicts and a digest of diagnostics.csv.
"""

import os
import csv

import psutil
import xxhash

import anyonkin_pkg.printutils as pr
from anyonkin_pkg.diagnostics import DiagnosticsRecord

CSV_NAME = "diagnostics.csv"
SUMMARY_NAME = "summary.txt"
CHECKPOINT_NAME = "checkpoint.bin"

# Conservation verdict threshold for relative moment drift.
DRIFT_TOL = 1e-10

# (record attribute, unit)
COLUMNS = (
    ("step", "-"), ("time", "time"),
    ("mass", "1"), ("momentum1", "velocity"), ("momentum2", "velocity"),
    ("energy", "velocity^2"),
    ("mass_drift", "1"), ("momentum1_drift", "1"), ("momentum2_drift", "1"),
    ("energy_drift", "1"),
    ("entropy", "1"), ("entropy_production", "1/time"),
    ("bony", "velocity^2/time"), ("bony_integral", "velocity^2"),
    ("sup_density", "1"), ("sup_phase_mass", "1"),
    ("windowed_sup_max", "1"),
    ("max_f", "1"), ("min_f", "1"),
    ("picard_residual", "1"), ("picard_sweeps", "-"),
    ("correction_norm", "1"), ("defect", "1"),
    ("flux_momentum2", "velocity^2"), ("flux_momentum", "velocity"),
    ("flux_momentum2_integral", "velocity^2*time"),
    ("flux_momentum_integral", "velocity*time"),
    ("psi_eps_rate", "velocity^2/time"),
)

def _cell(val):
    if isinstance(val, float):
        return "%.17g" % (val,)
    return str(val)

def csv_header(lambdas):
    res = ["%s [%s]" % (name, unit) for name, unit in COLUMNS]
    res.extend("tail_mass@%g [1]" % lam for lam in lambdas)
    res.extend("weighted_tail_mass@%g [velocity]" % lam for lam in lambdas)
    return res

_INT_COLUMNS = ("step", "picard_sweeps")

def record_from_row(row, n_lambdas):
    """
    Rebuild the DiagnosticsRecord of a CSV row written by csv_row.
    """
    width = len(COLUMNS)
    kwargs = {name: int(cell) if name in _INT_COLUMNS else float(cell)
              for (name, _unit), cell in zip(COLUMNS, row[:width])}
    tails = [float(cell) for cell in row[width:width + n_lambdas]]
    weighted = [float(cell) for cell in row[width + n_lambdas:]]
    return DiagnosticsRecord(tails=tails, weighted_tails=weighted, **kwargs)

def csv_row(record):
    res = [_cell(getattr(record, name)) for name, _unit in COLUMNS]
    res.extend(_cell(float(val)) for val in record.tails)
    res.extend(_cell(float(val)) for val in record.weighted_tails)
    return res

class DiagnosticsCsvWriter:
    """
    Write diagnostics records as CSV rows, one per step.
    Use as a context manager, or call close().
    """

    def __init__(self, path, lambdas, resume_step=None):
        """
        With resume_step, an existing file is cut back to its header and the
        rows with step <= resume_step before new rows are appended.
        """
        self.path = path
        self.header = csv_header(lambdas)
        n_lambdas = len(lambdas)
        kept = []
        if resume_step is not None and os.path.exists(path):
            kept = self._rows_up_to(resume_step)
        self._stream = open(path, "w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._stream, lineterminator="\n")
        self._writer.writerow(self.header)
        self._writer.writerows(kept)
        self.rows_written = len(kept)
        self.kept_records = [record_from_row(row, n_lambdas) for row in kept]

    def _rows_up_to(self, step):
        with open(self.path, "r", newline="", encoding="utf-8") as stream:
            reader = csv.reader(stream)
            header = next(reader, None)
            if header != self.header:
                pr.warning("%s: columns changed, previous rows dropped"
                           % (self.path,))
                return []
            return [row for row in reader if row and int(row[0]) <= step]

    def write(self, record):
        self._writer.writerow(csv_row(record))
        self.rows_written += 1

    def flush(self):
        self._stream.flush()

    def close(self):
        if self._stream is not None:
            self._stream.close()
            self._stream = None

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        self.close()
        return False

def file_digest(path):
    hasher = xxhash.xxh64()
    with open(path, "rb") as stream:
        for block in iter(lambda: stream.read(2**20), b""):
            hasher.update(block)
    return hasher.hexdigest()

def resident_memory():
    """
    Resident set size of this process, in bytes.
    """
    return psutil.Process().memory_info().rss

def verdicts(report, projection):
    """
    (name, "pass" | "fail") pairs for the conservation and range checks.
    """
    res = []
    if projection and report.records:
        for name in ("mass_drift", "momentum1_drift", "momentum2_drift",
                     "energy_drift"):
            ok = report.max_abs(name) < DRIFT_TOL
            res.append(("|%s| < %g" % (name, DRIFT_TOL),
                        "pass" if ok else "fail"))
    if report.records:
        top = report.max_value("max_f")
        low = min(r.min_f for r in report.records)
        ok = low >= 0 and top <= 1 / report.alpha
        res.append(("0 <= f <= 1/alpha", "pass" if ok else "fail"))
    return res

def write_summary(path, config, report, stationarity=None, csv_path=None):
    """
    Write summary.txt. stationarity is the L1 distance between the final
    and initial fields, or None.
    """
    lines = ["# configuration", config.to_ini().rstrip(), "", "# results"]
    for name, val in report.summary():
        lines.append("%s = %s" % (name, pr.format_number(val)))
    if stationarity is not None:
        lines.append("stationarity residual = %s"
                     % pr.format_number(stationarity))
    lines.append("")
    lines.append("# verdicts")
    for name, verdict in verdicts(report, config.params.projection):
        lines.append("%s: %s" % (name, verdict))
    lines.append("")
    lines.append("# run")
    lines.append("records = %d" % (len(report.records),))
    lines.append("resident memory = %.1f MiB" % (resident_memory() / 2**20,))
    if csv_path is not None and os.path.exists(csv_path):
        lines.append("%s xxh64 = %s" % (os.path.basename(csv_path),
                                         file_digest(csv_path)))
    with open(path, "w", encoding="utf-8") as stream:
        stream.write("\n".join(lines) + "\n")
