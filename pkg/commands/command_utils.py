import functools

from diagnose import MissingOracleError
from problem_config import ConfigError
from solver import SolverError

EXIT_PASS = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_SOLVER_ERROR = 3
EXIT_MISSING_ORACLE = 4


def guarded(action: str):
    """Run a command handler, print a ❌ line on failure and map the error to its exit code"""
    def decorator(handler):
        @functools.wraps(handler)
        def wrapper(args) -> int:
            try:
                return handler(args)
            except ConfigError as e:
                print(f"❌ Invalid configuration while {action}: {e}")
                return EXIT_INPUT_ERROR
            except MissingOracleError as e:
                print(f"❌ No analytic oracle while {action}: {e}")
                return EXIT_MISSING_ORACLE
            except SolverError as e:
                print(f"❌ Solver error while {action}: {e}")
                return EXIT_SOLVER_ERROR
            except (ValueError, OSError) as e:
                print(f"❌ Error {action}: {e}")
                return EXIT_INPUT_ERROR
        return wrapper
    return decorator


def parse_float_list(text: str):
    try:
        return [float(x) for x in text.split(',') if x.strip()]
    except ValueError as e:
        raise ValueError(f"expected a comma-separated list of numbers, got '{text}'") from e


def parse_int_list(text: str):
    try:
        return [int(x) for x in text.split(',') if x.strip()]
    except ValueError as e:
        raise ValueError(f"expected a comma-separated list of integers, got '{text}'") from e
