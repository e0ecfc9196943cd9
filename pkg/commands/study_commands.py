from commands.command_utils import EXIT_PASS, EXIT_VERIFICATION_FAILED, guarded, parse_int_list
from diagnose import convergence_passed
from problem_config import load_problem_config
from problem_logic import ProblemLogic


@guarded('running the convergence study')
def cmd_converge(args) -> int:
    """Solve on a ladder of node counts and write convergence.csv"""
    problem = load_problem_config(args.config)
    ns = parse_int_list(args.ns)
    if not ns or any(n <= 0 for n in ns):
        raise ValueError(f"--ns needs positive node counts, got '{args.ns}'")
    min_order = args.min_order
    if min_order is None and problem.oracle and 'min_order' in problem.oracle:
        min_order = float(problem.oracle['min_order'])
    logic = ProblemLogic(problem, out_dir=args.out, tol=args.tol)
    rows = logic.converge(ns)
    if not convergence_passed(rows, min_order):
        orders = ', '.join(f"{row['observed_order']:.2f}" for row in rows if row['observed_order'] is not None)
        print(f"❌ Convergence study failed: errors must decrease with observed order >= "
              f"{min_order if min_order is not None else 'NDR_MIN_ORDER'} (orders: {orders or 'none'})")
        return EXIT_VERIFICATION_FAILED
    print(f"✅ Convergence study passed: {problem.name}")
    return EXIT_PASS


def register(subparsers):
    converge = subparsers.add_parser('converge', help='Convergence study against the analytic oracle')
    converge.add_argument('--config', required=True, help='Problem config with an oracle block')
    converge.add_argument('--ns', default='100,200,400,800', help='Comma-separated node counts')
    converge.add_argument('--min-order', type=float,
                          help='Smallest accepted observed order (default: oracle.min_order, then NDR_MIN_ORDER)')
    converge.add_argument('--out', help='Output directory')
    converge.add_argument('--tol', type=float, help='Solver tolerance')
    converge.set_defaults(handler=cmd_converge)
