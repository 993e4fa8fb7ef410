#!/usr/bin/python3

# Copyright (C) 2021 Miguel Simoes, miguelrsimoes[a]yahoo[.]com
# For conditions of distribution and use, see copyright notice in anyonkin.py

"""
Command handlers do_run, do_resume, do_equilibrium, do_check.
Each returns the exit code, None meaning 0.
"""

import os

import numpy as np

import anyonkin_pkg.printutils as pr
from anyonkin_pkg.thread_utils import ProducerConsumerThreaded, NoMoreData
from anyonkin_pkg.fields import SimulationParams, make_grid
from anyonkin_pkg.haldane import \
    EquilibriumSpec, solve_log_w, occupation_from_log_w, filling_factor, \
    equilibrium_moments
from anyonkin_pkg.solver import SlabIntegrator
from anyonkin_pkg.diagnostics import \
    DiagnosticsMonitor, DiagnosticsReport, l1_distance
from anyonkin_pkg.presets import make_initial
from anyonkin_pkg.runconfig import read_config_file
from anyonkin_pkg.checkpoint import write_checkpoint, read_checkpoint
from anyonkin_pkg.csvreport import \
    DiagnosticsCsvWriter, write_summary, CSV_NAME, SUMMARY_NAME, \
    CHECKPOINT_NAME
from anyonkin_pkg.invariants import run_checks, CHECKS

# Exit code for a failed invariant check.
EXIT_INVARIANT = 3

class ScenarioRunner(ProducerConsumerThreaded):
    """
    The step loop produces (state, record, monitor snapshot) tuples in the
    main thread; a single writer thread appends CSV rows and checkpoints.
    """

    def __init__(self, config, integrator, monitor, state, csv_writer,
                 checkpoint_path, observe_first=True):
        super().__init__(main_thread="producer")
        self.config = config
        self.integrator = integrator
        self.monitor = monitor
        self.csv_writer = csv_writer
        self.checkpoint_path = checkpoint_path
        self.final_state = state
        self._last_step = integrator.total_steps()
        self._items = self._iterate(state, observe_first)

    def _snapshot(self, state):
        every = self.config.checkpoint_every
        if every <= 0:
            return None
        if state.step_index % every and state.step_index != self._last_step:
            return None
        return (self.monitor.state_dict(), self.monitor.running_max.copy())

    def _iterate(self, state, observe_first):
        if observe_first:
            record = self.monitor.observe(state)
            yield state, record, None
        for state in self.integrator.steps(state):
            record = self.monitor.observe(state)
            self.final_state = state
            yield state, record, self._snapshot(state)

    def produce(self):
        try:
            return next(self._items)
        except StopIteration:
            raise NoMoreData from None

    def consume(self, datum):
        state, record, snapshot = datum
        self.csv_writer.write(record)
        if snapshot is not None:
            self.csv_writer.flush()
            scalars, running_max = snapshot
            write_checkpoint(self.checkpoint_path, self.config, state,
                             scalars, running_max)
            pr.debug("checkpoint at step %d", state.step_index)

def _make_monitor(config, integrator):
    return DiagnosticsMonitor(
        config.params, integrator.grid, integrator.operator,
        lambdas=config.lambdas, bony=config.bony,
        envelope_band=config.envelope_band, sup_window=config.sup_window,
        psi_eps=config.psi_eps)

def run_scenario(config, initial, grid, checkpoint=None):
    """
    Integrate the scenario and write diagnostics.csv, summary.txt and the
    checkpoints under config.output_dir. With checkpoint, continue from it.
    """
    params = config.params
    out_dir = config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, CSV_NAME)
    integrator = SlabIntegrator(params, grid)
    monitor = _make_monitor(config, integrator)
    if checkpoint is None:
        state = integrator.start(initial)
        resume_step = None
    else:
        monitor.load_state(checkpoint.monitor_scalars, checkpoint.running_max)
        state = integrator.start(checkpoint.field, checkpoint.step)
        resume_step = checkpoint.step
    pr.info("output directory: %s" % (out_dir,))
    with DiagnosticsCsvWriter(csv_path, monitor.lambdas, resume_step) \
            as csv_writer:
        runner = ScenarioRunner(
            config, integrator, monitor, state, csv_writer,
            os.path.join(out_dir, CHECKPOINT_NAME),
            observe_first=checkpoint is None)
        with pr.ProgressPrefix("%s: " % (config.preset.name,)):
            runner.run()
        kept = csv_writer.kept_records
    report = DiagnosticsReport(kept + monitor.records, monitor.lambdas,
                               monitor.alpha, monitor.envelope_band)
    final = runner.final_state
    stationarity = l1_distance(final.field, initial, grid)
    write_summary(os.path.join(out_dir, SUMMARY_NAME), config, report,
                  stationarity=stationarity, csv_path=csv_path)
    for name, val in report.summary():
        pr.info("%s = %s" % (name, pr.format_number(val)))
    pr.print("%s: %d steps to t=%s, stationarity residual %s"
             % (config.preset.name, final.step_index,
                pr.format_number(final.time),
                pr.format_number(stationarity)))
    return 0

def do_run(args):
    config = read_config_file(args.config)
    params = config.params
    grid = make_grid(params)
    initial = make_initial(params, grid, config.preset)
    config = config.with_dt(initial, grid)
    pr.info("configuration:\n" + config.to_ini())
    return run_scenario(config, initial, grid)

def do_resume(args):
    checkpoint = read_checkpoint(args.checkpoint)
    config = checkpoint.config
    params = config.params
    grid = make_grid(params)
    initial = make_initial(params, grid, config.preset)
    pr.info("resuming at step %d, t=%s" % (checkpoint.step,
                                           pr.format_number(checkpoint.time)))
    return run_scenario(config, initial, grid, checkpoint)

def do_equilibrium(args):
    """
    Print the Wu occupation against speed for (alpha, mu, T), then its mass
    and energy on the velocity grid of radius j.
    """
    spec = EquilibriumSpec(args.mu, args.temperature, args.alpha)
    speeds = np.linspace(0.0, args.vmax, args.rows)
    log_zeta = (speeds * speeds / 2 - spec.mu) / spec.temperature
    s = solve_log_w(log_zeta, spec.alpha)
    occ = occupation_from_log_w(s, spec.alpha)
    rows = [(float(v), float(v * v / 2), float(lz), float(np.exp(sv)),
             float(f), float(filling_factor(float(f), spec.alpha)))
            for v, lz, sv, f in zip(speeds, log_zeta, s, occ)]
    pr.table(rows, ("|v|", "energy", "log zeta", "w", "f", "F(f)"))
    params = SimulationParams(alpha=args.alpha, j=args.j, nv=args.nv, nx=2)
    mass, energy = equilibrium_moments(spec, make_grid(params))
    pr.print("grid j=%s nv=%d: mass %s, energy %s"
             % (pr.format_number(args.j), args.nv, pr.format_number(mass),
                pr.format_number(energy)))
    return 0

def do_check(args):
    if args.list:
        for name, _fn in CHECKS:
            pr.print(name)
        return 0
    names = args.names or None
    if names is not None:
        known = {name for name, _fn in CHECKS}
        unknown = [n for n in names if n not in known]
        if unknown:
            pr.error("unknown check(s): %s" % ", ".join(unknown))
            return 2
    failures = run_checks(names)
    if failures:
        pr.error("%d check(s) failed" % (failures,))
        return EXIT_INVARIANT
    return 0
