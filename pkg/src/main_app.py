# main_app.py
from app_logic import PdaeApp


def main(args, operator_hook=None):
    """
    Builds the application from parsed arguments and runs the chosen command.
    Returns the process exit code.
    """
    app = PdaeApp(
        args.config,
        output_dir=args.output_dir,
        use_cache=not args.no_cache,
        operator_hook=operator_hook,
    )
    return app.run(args.command)
