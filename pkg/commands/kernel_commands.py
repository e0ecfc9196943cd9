from commands.command_utils import EXIT_PASS, guarded
from problem_config import load_problem_config
from problem_logic import ProblemLogic


@guarded('dumping the kernel matrix')
def cmd_dump_kernel(args) -> int:
    """Write the assembled kernel matrix A in the binary dump format"""
    problem = load_problem_config(args.config)
    path = ProblemLogic(problem).dump_kernel(args.out)
    print(f"✅ Kernel matrix written to {path}")
    return EXIT_PASS


def register(subparsers):
    dump = subparsers.add_parser('dump-kernel', help='Dump the assembled kernel matrix')
    dump.add_argument('--config', required=True, help='Problem config (JSON)')
    dump.add_argument('--out', help='Output file (default: kernel.bin in the output directory)')
    dump.set_defaults(handler=cmd_dump_kernel)
