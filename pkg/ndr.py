import argparse
import sys

import numpy as np

from config import Config

# Import command modules
from commands import analytic_commands, kernel_commands, solve_commands, study_commands
from commands.command_utils import EXIT_INPUT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='ndr', description='Soliton-gas NDR solver and verification suite')
    parser.add_argument('--seed', type=int, default=None, help='Seed for randomized suites')
    subparsers = parser.add_subparsers(dest='command', required=True)

    # Register commands
    solve_commands.register(subparsers)
    analytic_commands.register(subparsers)
    study_commands.register(subparsers)
    kernel_commands.register(subparsers)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT_ERROR if e.code else 0

    try:
        Config.validate_config()
    except ValueError as e:
        print(f"❌ Configuration error: {e}")
        return EXIT_INPUT_ERROR

    if args.seed is not None:
        np.random.seed(args.seed)
    return args.handler(args)


if __name__ == '__main__':
    sys.exit(main())
