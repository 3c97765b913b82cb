"""
Command implementations behind the ``shapephase`` tool.

Each command takes the parsed options and the remaining arguments (scenario
files and ``path=value`` overrides), writes its outputs, prints a summary and
returns the exit code. Exceptions are mapped to exit codes by :func:`guarded`.
"""

import json
import logging
import sys

import freephil
import numpy as np

from . import archive, pipeline, scenario, validation
from .errors import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_PASS, ScenarioError, ShapePhaseError, Sorry
from .errors import exit_code_for

logger = logging.getLogger(__name__)


def setup_logging(verbosity):
    """-v gives INFO, -vv DEBUG; otherwise only warnings are shown."""
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity and verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def guarded(command, options, args, out=None):
    """
    Runs a command and maps failures to exit codes

    :return: Exit code
    """
    if out is None:
        out = sys.stdout
    try:
        return command(options, args, out)
    except Sorry as e:
        print("Sorry: %s" % e.message, file=sys.stderr)
        return e.exit_code
    except freephil.Sorry as e:
        print("Sorry: %s" % e, file=sys.stderr)
        return EXIT_CONFIG
    except (ShapePhaseError, OSError, ValueError) as e:
        print("Sorry: %s: %s" % (type(e).__name__, e), file=sys.stderr)
        logger.debug("Command failed", exc_info=True)
        return exit_code_for(e)


def load_scenario(args, check_initial=True):
    if not args:
        raise ScenarioError("No scenario given (a PHIL file and/or path=value arguments)")
    return scenario.load(args=args, check_initial=check_initial)


def write_report(file_name, report):
    try:
        with open(file_name, "w") as fh:
            json.dump(report.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as e:
        raise Sorry("Cannot write report %s: %s" % (file_name, e), EXIT_CONFIG)
    logger.info("Report written to %s", file_name)


def simulate(options, args, out):
    sc = load_scenario(args)
    file_name = options.archive or sc.params.output.archive
    if file_name is None:
        raise ScenarioError("output.archive: no archive file given")
    sim = pipeline.simulate(sc)
    archive.write_archive(file_name, sim.otr, sim.gauge, sc.config_hash())
    tr = sim.trajectory
    energy, momentum = tr.drift()
    print("Archive:         %s" % file_name, file=out)
    print("Samples:         %d over t = %.6g" % (len(tr), tr.duration), file=out)
    print("Energy drift:    %.3g" % energy, file=out)
    print("Momentum drift:  %.3g" % momentum, file=out)
    if not sim.budget_ok:
        print("Conservation budget exceeded", file=out)
        return EXIT_NUMERICAL
    return EXIT_PASS


def reconstruct(options, args, out):
    if options.archive:
        sc = scenario.load(args=args, check_initial=False)
        data = archive.read_archive(options.archive)
        report = pipeline.reconstruct_motion(
            data.oriented_trajectory(), sc, source="archive %s" % options.archive
        )
    else:
        sc = load_scenario(args)
        report = pipeline.run(sc)
    file_name = options.report or sc.params.output.report
    if file_name:
        write_report(file_name, report)
    print(report.summary(), file=out)
    return report.exit_code


def _masses(text):
    try:
        values = [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        values = []
    if len(values) != 3:
        raise Sorry("--masses needs three numbers, got %r" % text, EXIT_CONFIG)
    return np.array(values)


def holonomy(options, args, out):
    point = None
    if options.point:
        point = tuple(float(x) for x in options.point.split(","))
    try:
        curve = pipeline.holonomy_curve(
            latitude=options.latitude,
            turns=options.turns,
            polygon=options.polygon,
            curve_file=options.curve,
            point=point,
        )
    except ValueError as e:
        raise Sorry(str(e), EXIT_CONFIG)
    result = pipeline.holonomy(curve, _masses(options.masses), options.tolerance)
    print("Measured rotation:  %.12g" % result.measured, file=out)
    print("Predicted rotation: %.12g" % result.predicted, file=out)
    print("Residual:           %.3g (tolerance %.3g)" % (result.residual, result.tolerance), file=out)
    print("Max |J| on lift:    %.3g" % result.path.max_angular_momentum, file=out)
    print("PASS" if result.passed else "FAIL", file=out)
    return EXIT_PASS if result.passed else EXIT_NUMERICAL


def validate(options, args, out):
    names = options.suite or None
    results = validation.validate(options.seed, options.count, options.flip_beta, names)
    print(validation.format_table(results), file=out)
    if all(r.passed for r in results):
        return EXIT_PASS
    return EXIT_NUMERICAL


def plotdata(options, args, out):
    if len(args) != 1:
        raise Sorry("plotdata needs exactly one archive file", EXIT_CONFIG)
    data = archive.read_archive(args[0])
    prefix = options.prefix or args[0]
    for file_name in pipeline.plot_data(data, prefix, options.closure):
        print(file_name, file=out)
    return EXIT_PASS


def defaults(options, args, out):
    scenario.master_phil.show(out=out, attributes_level=options.attributes_level)
    return EXIT_PASS
