from commands.command_utils import EXIT_PASS, EXIT_SOLVER_ERROR, EXIT_VERIFICATION_FAILED, guarded
from problem_config import load_problem_config
from problem_logic import ProblemLogic


def _print_flags(flags: dict):
    for name, ok in sorted(flags.items()):
        print(f"{'✅' if ok else '❌'} {name}")


@guarded('solving')
def cmd_solve(args) -> int:
    """Solve the configured problem and write states.csv, quadrature.csv and report.json"""
    problem = load_problem_config(args.config)
    logic = ProblemLogic(problem, out_dir=args.out, tol=args.tol)
    outcome = logic.solve()
    _print_flags(outcome.verification.pass_flags)
    if not outcome.converged:
        print(f"❌ Solver stopped with status {outcome.report_u.status}")
        return EXIT_SOLVER_ERROR
    if not outcome.verification.passed:
        print("❌ Verification failed")
        return EXIT_VERIFICATION_FAILED
    print(f"✅ Solve passed: {problem.name}")
    return EXIT_PASS


@guarded('verifying')
def cmd_verify(args) -> int:
    """Re-run every diagnostic on the stored states.csv and rewrite report.json"""
    problem = load_problem_config(args.config)
    logic = ProblemLogic(problem, out_dir=args.out, tol=args.tol)
    verification = logic.verify()
    _print_flags(verification.pass_flags)
    if not verification.passed:
        print("❌ Verification failed")
        return EXIT_VERIFICATION_FAILED
    print(f"✅ Verification passed: {problem.name}")
    return EXIT_PASS


def register(subparsers):
    solve = subparsers.add_parser('solve', help='Solve an NDR problem from a JSON config')
    solve.add_argument('--config', required=True, help='Problem config (JSON)')
    solve.add_argument('--out', help='Output directory (default: outputs.dir of the config)')
    solve.add_argument('--tol', type=float, help='Solver tolerance (default: solver.tol of the config)')
    solve.set_defaults(handler=cmd_solve)

    verify = subparsers.add_parser('verify', help='Re-verify a stored solve')
    verify.add_argument('--config', required=True, help='Problem config (JSON)')
    verify.add_argument('--out', help='Directory holding states.csv and report.json')
    verify.add_argument('--tol', type=float, help='Solver tolerance used by the residual checks')
    verify.set_defaults(handler=cmd_verify)
