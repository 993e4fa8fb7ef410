#!/usr/bin/python3

# Copyright (C) 2021 Miguel Simoes, miguelrsimoes[a]yahoo[.]com
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.

"""
Verbosity-controlled output for the solver and its command line.
Output levels control
- error and warning output to stderr at verbosity levels >= -2, -1 resp.
- print, info and debug output at verbosity levels >= 0, 1 and 2 resp.
  (print and info to stdout, debug to stderr).
- step progress goes to stdout if stdout is a tty and verbosity is >= 0.
Default verbosity is 0, but can be set negative.
A context may be set up during which a prefix is prepended to progress lines,
e.g. the scenario name while a run is stepping.
"""

# pylint: disable=global-statement, redefined-builtin, broad-except

import sys
import threading

# Writer thread and step loop may both print.
PRINT_LOCK = threading.RLock()

ERROR_LEVEL = -2
WARNING_LEVEL = -1
PRINT_LEVEL = 0
INFO_LEVEL = 1
DEBUG_LEVEL = 2

# Tell pylint not to mistake module variables for constants
# pylint: disable=C0103

# Set by the module user.
option_verbosity = 0

_print = print
_stdout_is_tty = sys.stdout.isatty()
_stderr_is_tty = sys.stderr.isatty()

_progress_was_printed = False
_progress_prefixes = []
_app_prefix = ""

class ProgressPrefix:
    """
    Set up a context during which a prefix is prepended to progress output.
    """
    def __init__(self, prefix, clear_on_exit=True):
        self._clear_on_exit = clear_on_exit
        self._prefix = prefix

    def __enter__(self):
        with PRINT_LOCK:
            _progress_prefixes.append(self._prefix)
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        with PRINT_LOCK:
            _progress_prefixes.pop()
        if self._clear_on_exit:
            progress("")
        return False # We never handle exceptions.

def progress(*args):
    """
    Print each arg in the same line, without changing to the next line.
    """
    global _progress_was_printed
    if option_verbosity < 0 or not _stdout_is_tty:
        return
    with PRINT_LOCK:
        line = "".join(_progress_prefixes) + "".join(map(str, args))
        line = line.replace("\n", "")
        _print('\033[?7l', end="") # Wrap off.
        _print(line, end="")
        _print("\033[0K\r", end="") # Erase to end of line, return.
        _print("\033[?7h", end="")  # Wrap on.
        _progress_was_printed = True
        sys.stdout.flush()

def progress_step(step, total_steps, time):
    """
    Report the integrator position as step k/N and the physical time.
    """
    if total_steps:
        perc = 100 * step // total_steps
        progress("step %d/%d t=%.6g (%02d%%)" % (step, total_steps, time, perc))
    else:
        progress("step %d t=%.6g" % (step, time))

def set_app_prefix(pref):
    global _app_prefix
    _app_prefix = pref

def _print_main(*args, **kwargs):
    global _progress_was_printed
    file = kwargs.pop("file", sys.stdout)
    end = kwargs.pop("end", "\n")
    assert not kwargs, "print: extraneous keywords"
    is_tty = _stdout_is_tty if file is sys.stdout else _stderr_is_tty
    with PRINT_LOCK:
        if is_tty and _progress_was_printed:
            _print("\r\033[2K", end="") # Erase current line.
        file.write(" ".join(str(arg) for arg in args if str(arg)))
        if end:
            file.write(end)
        file.flush()
        _progress_was_printed = False

def print(*args, **kwargs):
    if option_verbosity >= PRINT_LEVEL:
        _print_main(*args, file=sys.stdout, **kwargs)

def info(*args, **kwargs):
    if option_verbosity >= INFO_LEVEL:
        _print_main(*args, file=sys.stdout, **kwargs)

def _colored_stderr(color_code, label, *args, **kwargs):
    with PRINT_LOCK:
        try:
            if _stderr_is_tty:
                _print(color_code, file=sys.stderr, end="")
            _print_main(_app_prefix, label, *args, file=sys.stderr, **kwargs)
        finally:
            if _stderr_is_tty:
                _print("\033[39m", file=sys.stderr, end="") # Std foreg.
            sys.stderr.flush()

def error(*args, **kwargs):
    if option_verbosity >= ERROR_LEVEL:
        _colored_stderr("\033[31m", "error:", *args, **kwargs) # Red.

def warning(*args, **kwargs):
    if option_verbosity >= WARNING_LEVEL:
        _colored_stderr("\033[33m", "warning:", *args, **kwargs) # Yellow.

def debug(template_str, *str_args, **kwargs):
    """
    Template with % placeholders and respective values given separately,
    so that nothing is formatted unless printed.
    """
    if option_verbosity >= DEBUG_LEVEL:
        try:
            _print_main("debug:",
                        template_str % str_args, file=sys.stderr, **kwargs)
        except Exception as exc:
            msg = "failed printing debug string '%s'" % (template_str,)
            raise RuntimeError(msg) from exc

def format_number(value):
    if isinstance(value, float):
        return "%.10g" % (value,)
    return str(value)

def table(rows, headers):
    """
    Print rows of numbers as right-aligned columns under the given headers.
    """
    cells = [[format_number(v) for v in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    print("  ".join(h.rjust(w) for h, w in zip(headers, widths)))
    for row in cells:
        print("  ".join(c.rjust(w) for c, w in zip(row, widths)))
