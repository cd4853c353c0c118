"""`mec systems`: list the fail-prone, kernel and reliable systems of a quorum system."""
import argparse

from mec.access import check_quorum_system, load_quorum_context
from mec.errors import PreconditionError

from cli.utils.io import dumps, read_json


def register(subparsers) -> None:
    parser = subparsers.add_parser('systems', help="Derive kernels and reliable sets from quorums")
    parser.add_argument('--quorum', required=True, help="Quorum JSON file")
    parser.add_argument('--json', action='store_true')
    parser.set_defaults(handler=run)


def _line(label: str, names: list[list[str]]) -> str:
    sets = ' '.join('{' + ','.join(s) + '}' for s in names)
    return f"{label} ({len(names)}): {sets}"


def run(args: argparse.Namespace) -> int:
    ctx = load_quorum_context(read_json(args.quorum))
    ok, violations = check_quorum_system(ctx)
    if not ok:
        raise PreconditionError("Not a Byzantine quorum system: " + '; '.join(violations))
    described = ctx.describe()
    if args.json:
        print(dumps(described), end='')
        return 0
    print(f"universe: {' '.join(described['universe'])}")
    for key, label in (('quorums', 'quorums'), ('fail_prone', 'fail-prone'),
                       ('kernels', 'kernels'), ('reliable', 'reliable')):
        print(_line(label, described[key]))
    return 0
