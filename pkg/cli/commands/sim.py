"""`mec sim` / `mec sweep`: run dispersal scenarios in the simulator."""
import argparse
from pathlib import Path

from mec.errors import InvariantBreach

from gavid.scenario import load_scenario
from gavid.simnet import SimResult, check_execution, run, sweep

from cli.utils.io import dumps


def register(subparsers) -> None:
    parser = subparsers.add_parser('sim', help="Run one scenario")
    parser.add_argument('--scenario', required=True, help="Scenario JSON file")
    parser.add_argument('--seed', type=int, help="Override the scenario's schedule seed")
    parser.add_argument('--transcript', help="Write the JSON-lines transcript here")
    parser.add_argument('--json', action='store_true', help="Print metrics and outputs as JSON")
    parser.set_defaults(handler=run_sim)

    parser = subparsers.add_parser('sweep', help="Run a scenario over many seeds and check properties")
    parser.add_argument('--scenario', required=True)
    parser.add_argument('--seeds', type=int, default=100)
    parser.add_argument('--start', type=int, default=0)
    parser.set_defaults(handler=run_sweep)


def _report(result: SimResult) -> dict:
    return {
        'summary': result.summary(),
        'metrics': result.metrics.to_dict(),
        'outputs': {name: out.describe() if out else None for name, out in result.outputs.items()},
        'retrieved': result.retrieved.describe() if result.retrieved else None,
        'capped': result.capped,
    }


def _lines(result: SimResult) -> list[str]:
    metrics = result.metrics
    counts = ' '.join(f"{kind}={count}" for kind, count in metrics.counts.items())
    lines = [result.summary(),
             f"steps: {metrics.steps}",
             f"messages: {counts} injected={metrics.injected}",
             f"bytes: {metrics.total_bytes}"]
    for name, out in result.outputs.items():
        lines.append(f"  {name}: {out.kind.value if out else '-'}")
    if result.scenario.retriever is not None:
        lines.append(f"retrieved: {'yes' if result.retrieved else 'no'}")
    return lines


def run_sim(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    result = run(scenario)
    if args.transcript:
        Path(args.transcript).write_text(''.join(line + '\n' for line in result.transcript_lines()))
    if args.json:
        print(dumps(_report(result)), end='')
    else:
        print('\n'.join(_lines(result)))
    violations = check_execution(result)
    if violations:
        for violation in violations:
            print(f"violation: {violation}")
        raise InvariantBreach(f"{len(violations)} protocol properties violated (seed {scenario.seed})")
    return 0


def run_sweep(args: argparse.Namespace) -> int:
    template = load_scenario(args.scenario)
    report = sweep(template, range(args.start, args.start + args.seeds))
    print('\n'.join(report.lines()))
    if not report.ok:
        raise InvariantBreach(f"{len(report.violations)} property violations across {report.runs} runs")
    return 0
