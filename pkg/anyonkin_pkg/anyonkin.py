#!/usr/bin/python3

"""
Deterministic kinetic solver for the anyon Boltzmann equation on a periodic
slab, with a-priori estimate diagnostics.

Copyright (C) 2021 Miguel Simoes, miguelrsimoes[a]yahoo[.]com

This program is free software: you can redistribute it and/or modify
it under the terms of the GNU General Public License as published by
the Free Software Foundation, either version 3 of the License, or
(at your option) any later version.

This program is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
GNU General Public License for more details.

You should have received a copy of the GNU General Public License
along with this program.  If not, see <https://www.gnu.org/licenses/>.
"""

# pylint: disable=invalid-name, broad-except

import sys
import os
import argparse

import anyonkin_pkg.metadata as metadata
import anyonkin_pkg.printutils as pr
from anyonkin_pkg.miscutils import \
    ArgumentParserError, ConfigError, ParamsError, GridError, KernelError, \
    DomainError, RangeViolation, ProjectionError, MomentMatchError, \
    CheckpointError
from anyonkin_pkg.runconfig import OUTPUT_DIR_ENV
import anyonkin_pkg.anyonkin_cmd_handlers as anyonkin_cmd_handlers

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_INVARIANT = 3
EXIT_INTERRUPTED = 130

class FormatDescription(argparse.HelpFormatter):
    """
    Prepend the program name, version and description to the help text.
    """
    description = \
        "Copyright (C) 2021-2022 Miguel Simoes. " \
        "This program comes with ABSOLUTELY NO WARRANTY. " \
        "This is free software, and you are welcome to redistribute it " \
        "under certain conditions. " \
        "See the GNU General Public Licence v3 for details."
    _help_spacing = 30

    def __init__(self, *args, **kwargs):
        super().__init__(*args, max_help_position=self._help_spacing,
                         **kwargs)

    @staticmethod
    def description_prefix():
        return "{entry} {version} on python {pyver_maj}.{pyver_min}.\n" \
               "{meta_desc}".format(
                   entry=metadata.package, version=metadata.version,
                   pyver_maj=sys.version_info[0],
                   pyver_min=sys.version_info[1],
                   meta_desc=metadata.description)

    def format_help(self, *args, **kwargs):
        return self.description_prefix() + "\n" \
               + super().format_help(*args, **kwargs)

class SetVerbosityAction(argparse.Action):
    """
    Adjust verbosity level of print module up and down.
    """
    def __call__(self, parser, namespace, values, option_string=None):
        if "q" in option_string:
            delta = -1
        elif "v" in option_string:
            delta = 1
        else:
            raise ValueError("parsing verbosity option")
        pr.option_verbosity += delta

verbosity_options_parser = argparse.ArgumentParser(add_help=False)
verbosity_options_parser.add_argument(
    "-q", "--quiet", "-v", "--verbose",
    action=SetVerbosityAction,
    nargs=0,
    help="decrease/increase verbosity")

class CommandArgumentParser(argparse.ArgumentParser):
    """
    Register handlers for each command parser.
    Raise exception on parsing error.
    """
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.cmd_handlers = {}
        self._cmd_subparser_handler = \
            self.add_subparsers(dest="cmdname", help="sub-command help",
                                parser_class=SubcommandArgumentParser)

    def add_parser_command(self, name, handler_fn, **kwargs):
        self.cmd_handlers[name] = handler_fn
        return self._cmd_subparser_handler.add_parser(name, **kwargs)

    def error(self, message):
        raise ArgumentParserError(message)

class SubcommandArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ArgumentParserError(message)

def positive_float(value):
    val = float(value)
    if not val > 0:
        raise argparse.ArgumentTypeError("not positive: %s" % (value,))
    return val

def positive_int(value):
    val = int(value)
    if not val > 0:
        raise argparse.ArgumentTypeError("not positive: %s" % (value,))
    return val

top_parser = CommandArgumentParser(
    prog=metadata.package,
    description=FormatDescription.description,
    formatter_class=FormatDescription,
    parents=[verbosity_options_parser],
    epilog="Environment: %s overrides the [output] directory of a run."
           % (OUTPUT_DIR_ENV,))

## run

parser_run = top_parser.add_parser_command(
    "run", anyonkin_cmd_handlers.do_run,
    parents=[verbosity_options_parser],
    help="integrate a scenario and write diagnostics.csv and summary.txt")
parser_run.add_argument("config", help="run configuration file")

## resume

parser_resume = top_parser.add_parser_command(
    "resume", anyonkin_cmd_handlers.do_resume,
    parents=[verbosity_options_parser],
    help="continue a run from its checkpoint file")
parser_resume.add_argument("checkpoint", help="checkpoint file")

## equilibrium

parser_equilibrium = top_parser.add_parser_command(
    "equilibrium", anyonkin_cmd_handlers.do_equilibrium,
    parents=[verbosity_options_parser],
    help="print the Wu equilibrium occupation table")
parser_equilibrium.add_argument("alpha", type=float)
parser_equilibrium.add_argument("mu", type=float)
parser_equilibrium.add_argument("temperature", type=float)
parser_equilibrium.add_argument(
    "--vmax", type=positive_float, default=4.0,
    help="largest speed in the table (default 4)")
parser_equilibrium.add_argument(
    "--rows", type=positive_int, default=9,
    help="number of table rows (default 9)")
parser_equilibrium.add_argument(
    "--j", type=positive_float, default=4.0,
    help="velocity ball radius for the grid moments (default 4)")
parser_equilibrium.add_argument(
    "--nv", type=positive_int, default=32,
    help="velocity nodes per axis for the grid moments (default 32)")

## check

parser_check = top_parser.add_parser_command(
    "check", anyonkin_cmd_handlers.do_check,
    parents=[verbosity_options_parser],
    help="run the invariant suite on desk grids")
parser_check.add_argument(
    "names", nargs="*", help="checks to run (default: all)")
parser_check.add_argument(
    "--list", action="store_true", default=False,
    help="list the checks and exit")

def get_handler_fn(cmd_line_args):
    """
    Parse command line and return a handler function, closed over the parse
    results.
    """
    args = top_parser.parse_args(cmd_line_args)
    cmd = args.cmdname
    if cmd not in top_parser.cmd_handlers:
        raise ArgumentParserError("no command")
    return lambda: top_parser.cmd_handlers[cmd](args)

def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    if not argv:
        pr.print(FormatDescription.description_prefix())
        pr.print(f"For usage: {os.path.basename(sys.argv[0])} --help")
        return EXIT_USAGE
    pr.set_app_prefix("anyonkin:")
    exit_code = EXIT_USAGE
    try:
        cmd_handler = get_handler_fn(argv)
        exit_code = cmd_handler()
        if exit_code is None: # No explicit return value means no error.
            exit_code = EXIT_OK
    except KeyboardInterrupt:
        pr.error("interrupted")
        exit_code = EXIT_INTERRUPTED
    except ConfigError as exc:
        pr.error("config file: %s" % str(exc))
        exit_code = EXIT_USAGE
    except ArgumentParserError as exc:
        pr.error("parsing: %s" % (exc,))
        exit_code = EXIT_USAGE
    except (ParamsError, GridError, KernelError, DomainError) as exc:
        pr.error("parameters: %s" % str(exc))
        exit_code = EXIT_USAGE
    except RangeViolation as exc:
        pr.error("range: %s" % str(exc))
        exit_code = EXIT_INVARIANT
    except (ProjectionError, MomentMatchError) as exc:
        pr.error("numerics: %s" % str(exc))
        exit_code = EXIT_INVARIANT
    except CheckpointError as exc:
        pr.error("checkpoint: %s" % str(exc))
        exit_code = EXIT_IO
    except EnvironmentError as exc:
        pr.error(str(exc))
        exit_code = EXIT_IO
    except RuntimeError as exc:
        pr.error("internal: %s" % str(exc))
        exit_code = EXIT_IO
    return exit_code

if __name__ == "__main__":
    sys.exit(main())
