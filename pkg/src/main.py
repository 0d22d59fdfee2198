# main.py
import argparse
import logging
import os
import sys


def setup_environment():
    """Put the source directory on the import path."""
    current_dir = os.path.dirname(os.path.abspath(__file__))
    if current_dir not in sys.path:
        sys.path.insert(0, current_dir)
    os.environ.setdefault('PYTHONIOENCODING', 'utf-8')


def setup_logging(verbose=False, debug=False):
    """One stderr handler with [HH:MM:SS] timestamps; WARNING unless -v or --debug."""
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter('[%(asctime)s] %(message)s', datefmt='%H:%M:%S'))
    root = logging.getLogger()
    for existing in list(root.handlers):
        if getattr(existing, '_pdae_handler', False):
            root.removeHandler(existing)
    handler._pdae_handler = True
    root.addHandler(handler)
    root.setLevel(level)


def handle_exception(exc_type, exc_value, exc_traceback):
    """Global exception handler for unhandled exceptions."""
    if issubclass(exc_type, KeyboardInterrupt):
        sys.__excepthook__(exc_type, exc_value, exc_traceback)
        return
    logging.getLogger('pdae').critical(
        "Unhandled exception: %s: %s", exc_type.__name__, exc_value,
        exc_info=(exc_type, exc_value, exc_traceback))


def build_parser():
    parser = argparse.ArgumentParser(
        prog='pdae',
        description="Constraint-elimination solver and verification harness for a "
                    "semi-explicit PDAE on the unit interval.",
        epilog="Exit codes: 0 success, 1 config/input error, 2 verification failure, 3 blow-up.",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="Log progress to standard error")
    parser.add_argument("--debug", action="store_true",
                        help="Log debug detail to standard error")
    parser.add_argument("--no-cache", action="store_true",
                        help="Reassemble operators instead of reusing cached ones")
    parser.add_argument("--output-dir", type=str, default=None,
                        help="Directory for result files (default: current directory)")
    subparsers = parser.add_subparsers(dest='command', required=True)
    for name, help_text in (
        ('solve', "Integrate one trajectory; writes trajectory.csv and summary.json"),
        ('verify', "Run the operator property checks; writes verify.json"),
        ('converge', "Run spatial and temporal self-convergence studies; writes converge.csv"),
    ):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("config", help="Path to a JSON (or .ini) run configuration")
    return parser


def main(argv=None, operator_hook=None):
    """Parse arguments, run the command, return its exit code."""
    setup_environment()
    from constants import EXIT_CONFIG_ERROR
    from main_app import main as main_app

    sys.excepthook = handle_exception
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return _usage_exit_code(e, EXIT_CONFIG_ERROR)
    setup_logging(args.verbose, args.debug)
    if args.debug:
        logging.getLogger(__name__).debug("Debug mode enabled")
    return main_app(args, operator_hook=operator_hook)


def _usage_exit_code(exit_exc, usage_code):
    """argparse exits 0 for --help and 2 for usage errors; usage errors map to the config-error code."""
    return 0 if exit_exc.code in (0, None) else usage_code


if __name__ == "__main__":
    sys.exit(main())
