"""
The ``shapephase`` tool

  shapephase simulate    scenario.phil [path=value ...] [--archive FILE]
  shapephase reconstruct scenario.phil [path=value ...] [--report FILE]
  shapephase reconstruct --archive FILE [scenario.phil] [path=value ...]
  shapephase holonomy    --latitude Z1 | --polygon V | --curve FILE | --point Z1,THETA1
  shapephase validate    [--seed N] [--count N]
  shapephase plotdata    archive.dat [--prefix PREFIX]
  shapephase defaults    [--attributes-level N]

Exit codes: 0 pass, 1 numerical tolerance failure, 2 precondition or physics
failure, 3 configuration or I/O failure.
"""

import optparse
import sys

from . import __version__, command_line
from .errors import EXIT_CONFIG

commands = ("simulate", "reconstruct", "holonomy", "validate", "plotdata", "defaults")


def _parser(command):
    parser = optparse.OptionParser(
        usage="%%prog %s [options] [scenario.phil] [path=value ...]" % command,
        version=__version__,
    )
    parser.add_option("-?", action="help", help=optparse.SUPPRESS_HELP)
    parser.add_option(
        "-v",
        action="count",
        dest="verbosity",
        default=0,
        help="More log output (-vv for debugging output)",
    )
    if command in ("simulate", "reconstruct"):
        parser.add_option(
            "--archive",
            action="store",
            type="string",
            help="Archive to write (simulate) or to reconstruct from (reconstruct)",
            metavar="FILE",
        )
    if command == "reconstruct":
        parser.add_option(
            "--report",
            action="store",
            type="string",
            help="Write the JSON report to FILE",
            metavar="FILE",
        )
    if command == "holonomy":
        parser.add_option("--latitude", type="float", help="Latitude loop at height Z1")
        parser.add_option(
            "--turns", type="int", default=1, help="Turns of the latitude loop (negative reverses)"
        )
        parser.add_option(
            "--polygon",
            type="string",
            help="Geodesic polygon, vertices 'z1,theta1;z1,theta1;...'",
        )
        parser.add_option(
            "--curve", type="string", help="Sampled closed curve file", metavar="FILE"
        )
        parser.add_option(
            "--point", type="string", help="Constant loop at 'z1,theta1'"
        )
        parser.add_option(
            "--masses", type="string", default="1 1 1", help="Masses, e.g. '1 2 3'"
        )
        parser.add_option(
            "--tolerance", type="float", default=1e-6, help="Residual counted as a pass"
        )
    if command == "validate":
        parser.add_option("--seed", type="int", default=0, help="Seed of the random cases")
        parser.add_option("--count", type="int", default=20, help="Cases per property")
        parser.add_option(
            "--suite",
            action="append",
            help="Run only this property (may be repeated)",
        )
        parser.add_option(
            "--flip-beta",
            action="store_true",
            dest="flip_beta",
            default=False,
            help=optparse.SUPPRESS_HELP,
        )
    if command == "plotdata":
        parser.add_option("--prefix", type="string", help="Prefix of the output files")
        parser.add_option(
            "--closure",
            type="choice",
            choices=["north", "south"],
            default="north",
            help="Pole the closing arcs are drawn from",
        )
    if command == "defaults":
        parser.add_option(
            "--attributes-level",
            type="int",
            dest="attributes_level",
            default=1,
            help="0 values only, 1 with help, 2 and 3 with more attributes",
        )
    return parser


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    if not argv or argv[0] not in commands:
        if argv and argv[0] in ("-h", "--help", "-?"):
            print(__doc__)
            return 0
        if argv and argv[0] == "--version":
            print(__version__)
            return 0
        print(__doc__, file=sys.stderr)
        return EXIT_CONFIG
    command = argv[0]
    options, args = _parser(command).parse_args(argv[1:])
    command_line.setup_logging(options.verbosity)
    return command_line.guarded(getattr(command_line, command), options, args)


if __name__ == "__main__":
    sys.exit(main())
