"""
Deterministic discrete-event simulator for Disperse, Retrieve and the
broadcast variant.

Time is a step counter. Each step delivers one pending message: first as the
adversary script says, then (with fairness on) as a seeded picker chooses,
falling back to the oldest message once it has waited ``delay_bound`` steps.
"""
from __future__ import annotations

import itertools
import json
import logging
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from mec import config as settings
from mec.access import NodeId
from mec.codes import FragmentVector, decode, encode

from gavid.adversary import Behavior
from gavid.messages import MessageKind, Output, OutputKind, ProtocolMessage
from gavid.retrieve import RetrieverState, handle_fragment, handle_retrieve, retrieve_init
from gavid.scenario import Directive, MessagePattern, Scenario
from gavid.server import ServerState, commit_file, disperse_init, handle_message, new_state, stored_bytes

logger = logging.getLogger(__name__)

COMPLETED = (OutputKind.STORED, OutputKind.DELIVERED)


@dataclass
class Envelope:
    seq: int
    msg: ProtocolMessage
    sent_step: int
    not_before: int = 0


@dataclass
class Metrics:
    counts: dict[str, int] = field(default_factory=lambda: {k.value: 0 for k in MessageKind})
    injected: int = 0
    total_bytes: int = 0
    stored_bytes: dict[str, int] = field(default_factory=dict)
    steps: int = 0

    def to_dict(self) -> dict:
        return {
            'counts': dict(self.counts),
            'injected': self.injected,
            'total_bytes': self.total_bytes,
            'stored_bytes': dict(self.stored_bytes),
            'steps': self.steps,
        }


@dataclass
class SimResult:
    scenario: Scenario
    transcript: list[dict]
    metrics: Metrics
    outputs: dict[str, Output | None]
    retrieved: Output | None
    ready_commitments: set[bytes]
    quiescent: bool
    capped: bool
    retrieval_quiescent: bool
    states: dict[str, ServerState]

    def transcript_lines(self) -> list[str]:
        return [json.dumps(event, sort_keys=True) for event in self.transcript]

    def honest_outputs(self) -> dict[str, Output | None]:
        honest = self.scenario.honest_mask
        universe = self.scenario.config.universe
        return {name: out for name, out in self.outputs.items() if honest & universe.node(name).bit}

    def count(self, kind: OutputKind) -> int:
        return sum(1 for out in self.honest_outputs().values() if out is not None and out.kind is kind)

    def summary(self) -> str:
        honest = len(self.honest_outputs())
        kind = OutputKind.DELIVERED if self.scenario.config.mode == 'broadcast' else OutputKind.STORED
        return f"{kind.value}: {self.count(kind)}/{honest}"

    def __repr__(self):
        return (f"SimResult(seed={self.scenario.seed}, {self.summary()}, "
                f"steps={self.metrics.steps}, capped={self.capped})")


class Simulator:
    """One execution; build a new instance per run."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.config = scenario.config
        self.rng = random.Random(scenario.seed)
        self.step_cap = int(scenario.step_cap or settings.sim_step_cap())
        self.delay_bound = int(scenario.delay_bound or settings.sim_delay_bound())
        self.states: dict[NodeId, ServerState] = {node: new_state(node) for node in self.config.universe}
        self.behaviors: dict[NodeId, Behavior] = scenario.make_behaviors()
        self.retriever: RetrieverState | None = None
        self.pending: list[Envelope] = []
        self.drops: list[MessagePattern] = []
        self.transcript: list[dict] = []
        self.outputs: dict[str, Output | None] = {node.name: None for node in self.config.universe}
        self.metrics = Metrics()
        self.ready_commitments: set[bytes] = set()
        self.step = 0
        self._seq = itertools.count()
        self._dealer_commitment = commit_file(self.config, scenario.file)[1]

    # -- wire -------------------------------------------------------------

    def _log(self, msg: ProtocolMessage, dropped: bool) -> None:
        self.transcript.append({
            'step': self.step,
            'from': msg.sender.name,
            'to': msg.receiver.name,
            'kind': msg.kind.value,
            'D_prefix_8hex': msg.commitment_prefix(),
            'dropped': dropped,
        })

    def _enqueue(self, msg: ProtocolMessage) -> None:
        if any(p.matches(msg) for p in self.drops):
            self._log(msg, dropped=True)
            return
        self.pending.append(Envelope(next(self._seq), msg, self.step))

    def _send(self, sender: NodeId, messages: list[ProtocolMessage]) -> None:
        behavior = self.behaviors.get(sender)
        if behavior is not None:
            messages = behavior.outgoing(self.config, messages)
        honest = self.scenario.honest_mask & sender.bit
        for msg in messages:
            self.metrics.counts[msg.kind.value] += 1
            self.metrics.total_bytes += msg.size_bytes
            if honest and msg.kind is MessageKind.READY:
                self.ready_commitments.add(msg.commitment)
            self._enqueue(msg)

    def _record(self, node: NodeId, outputs: list[Output]) -> None:
        for out in outputs:
            if out.kind is OutputKind.RETRIEVED:
                continue
            self.outputs[node.name] = out
            logger.debug("step %d: %s outputs %s", self.step, node, out.kind.value)

    # -- delivery ---------------------------------------------------------

    def _take(self, index: int) -> Envelope:
        return self.pending.pop(index)

    def _deliver(self, envelope: Envelope) -> None:
        self.step += 1
        msg = envelope.msg
        self._log(msg, dropped=False)
        node = msg.receiver
        behavior = self.behaviors.get(node)
        if behavior is not None and not behavior.alive:
            return
        if msg.kind is MessageKind.RETRIEVE:
            reply = handle_retrieve(self.states[node], self.config, msg)
            if reply is not None:
                self._send(node, [reply])
            return
        if msg.kind is MessageKind.FRAGMENT:
            if self.retriever is not None and node == self.retriever.node:
                self.retriever, outputs = handle_fragment(self.retriever, self.config, msg)
                if outputs:
                    logger.debug("step %d: %s retrieved the file", self.step, node)
            return
        state, messages, outputs = handle_message(self.states[node], self.config, msg)
        self.states[node] = state
        self._record(node, outputs)
        self._send(node, messages)

    def _pick_fair(self) -> int:
        oldest = self.pending[0]
        if self.step - oldest.sent_step >= self.delay_bound:
            return 0
        eligible = [i for i, e in enumerate(self.pending) if e.not_before <= self.step]
        if not eligible:
            return min(range(len(self.pending)),
                       key=lambda i: (self.pending[i].not_before, self.pending[i].seq))
        return eligible[self.rng.randrange(len(eligible))]

    def _drain(self) -> bool:
        """Deliver fairly until nothing is pending; False if the step cap hit first."""
        while self.pending:
            if self.step >= self.step_cap:
                return False
            self._deliver(self._take(self._pick_fair()))
        return True

    # -- adversary script -------------------------------------------------

    def _apply(self, directive: Directive) -> None:
        if directive.action == 'deliver_next':
            index = next((i for i, e in enumerate(self.pending) if directive.pattern.matches(e.msg)), None)
            if index is None:
                logger.debug("step %d: deliver_next matched no pending message", self.step)
                return
            self._deliver(self._take(index))
        elif directive.action == 'delay':
            for envelope in self.pending:
                if directive.pattern.matches(envelope.msg):
                    envelope.not_before = self.step + directive.steps
        elif directive.action == 'drop':
            self.drops.append(directive.pattern)
            kept = []
            for envelope in self.pending:
                if directive.pattern.matches(envelope.msg):
                    self._log(envelope.msg, dropped=True)
                else:
                    kept.append(envelope)
            self.pending = kept
        elif directive.action == 'inject':
            spec = directive.inject
            assert spec is not None
            commitment = self._dealer_commitment if spec.commitment is None else spec.commitment
            msg = ProtocolMessage(spec.kind, spec.sender, spec.receiver,
                                  None if spec.kind is MessageKind.RETRIEVE else commitment,
                                  spec.fragment, spec.proof)
            self.metrics.injected += 1
            self.metrics.total_bytes += msg.size_bytes
            self._enqueue(msg)

    # -- run --------------------------------------------------------------

    def run(self) -> SimResult:
        scenario, config = self.scenario, self.config
        dealer = config.dealer
        behavior = self.behaviors.get(dealer)
        if behavior is not None:
            self._send(dealer, behavior.dealer_messages(config, scenario.file, self.rng))
        else:
            self.states[dealer], sends = disperse_init(config, scenario.file)
            self._send(dealer, sends)

        for directive in scenario.script:
            if self.step >= self.step_cap:
                break
            self._apply(directive)

        quiescent = not self.pending
        if scenario.fairness:
            quiescent = self._drain()
        capped = bool(self.pending) and self.step >= self.step_cap

        retrieval_quiescent = False
        if scenario.retriever is not None and not capped:
            self.retriever, requests = retrieve_init(self.states[scenario.retriever], config)
            self._send(scenario.retriever, requests)
            retrieval_quiescent = self._drain()
            capped = capped or not retrieval_quiescent

        self.metrics.steps = self.step
        for node, state in self.states.items():
            if state.stored_value is not None and scenario.honest_mask & node.bit:
                self.metrics.stored_bytes[node.name] = stored_bytes(config, node, state.stored_value)

        result = SimResult(
            scenario=scenario,
            transcript=self.transcript,
            metrics=self.metrics,
            outputs=self.outputs,
            retrieved=self.retriever.output if self.retriever is not None else None,
            ready_commitments=self.ready_commitments,
            quiescent=quiescent,
            capped=capped,
            retrieval_quiescent=retrieval_quiescent,
            states={node.name: state for node, state in self.states.items()},
        )
        logger.info("seed %d: %s after %d steps", scenario.seed, result.summary(), self.step)
        return result


def run(scenario: Scenario) -> SimResult:
    """Execute one scenario; deterministic given (scenario, seed)."""
    return Simulator(scenario).run()


def committed_value(result: SimResult) -> tuple[int, ...] | None:
    """
    The file fixed by the single commitment honest servers sent READY for.

    Decoded from the fragments honest servers stored under it; None when
    there is no such commitment or those fragments are not sufficient.
    """
    if len(result.ready_commitments) != 1:
        return None
    (commitment,) = result.ready_commitments
    config = result.scenario.config
    entries = []
    for node in config.universe:
        state = result.states.get(node.name)
        stored = state.stored_value if state is not None else None
        honest = result.scenario.honest_mask & node.bit
        entries.append(stored.fragment if honest and stored is not None and stored.commitment == commitment
                       else None)
    return decode(config.code, FragmentVector(config.universe, entries))


def _binds_to(config, value: tuple[int, ...], commitment: bytes | None) -> bool:
    return commitment is not None and config.scheme.commit(encode(config.code, value))[0] == commitment


def check_execution(result: SimResult) -> list[str]:
    """Return every protocol property the execution violates."""
    scenario, config = result.scenario, result.scenario.config
    n = config.n
    violations: list[str] = []
    honest = result.honest_outputs()
    completed = {name for name, out in honest.items() if out is not None and out.kind in COMPLETED}
    aborted = {name for name, out in honest.items() if out is not None and out.kind is OutputKind.ABORT}

    if len(result.ready_commitments) > 1:
        violations.append(f"unique-D: honest READYs carry {len(result.ready_commitments)} commitments")
    if aborted and completed:
        violations.append(f"abort consistency: {sorted(aborted)} aborted while {sorted(completed)} completed")

    delivered = {out.value for out in honest.values()
                 if out is not None and out.kind is OutputKind.DELIVERED}
    if len(delivered) > 1:
        violations.append("agreement: honest servers delivered different values")
    if scenario.honest_dealer and delivered and delivered != {scenario.file}:
        violations.append("correctness: delivered value differs from the sender's input")

    fair = scenario.fairness and result.quiescent
    if fair and completed and len(completed) < len(honest):
        missing = sorted(set(honest) - completed)
        violations.append(f"agreement: {missing} did not complete while {sorted(completed)} did")
    if fair and scenario.honest_dealer and len(completed) < len(honest):
        violations.append(f"termination: only {len(completed)}/{len(honest)} honest servers completed")
    if scenario.fairness and result.capped and scenario.honest_dealer:
        violations.append("liveness: step cap reached under fair scheduling with an honest dealer")

    counts = result.metrics.counts
    limits = {'send': n, 'echo': n * n, 'ready': n * n, 'retrieve': n, 'fragment': n}
    for kind, limit in limits.items():
        if counts[kind] > limit:
            violations.append(f"message bound: {counts[kind]} {kind} messages exceed {limit}")
    if not scenario.corrupt and fair and counts['send'] + counts['echo'] + counts['ready'] != n + 2 * n * n:
        violations.append("message count: all-honest dispersal did not send n + 2n^2 messages")

    if scenario.retriever is not None and result.retrieval_quiescent:
        universe = config.universe
        stored_mask = sum(universe.node(name).bit for name, out in honest.items()
                          if out is not None and out.kind is OutputKind.STORED)
        if config.mode == 'disperse' and config.context.contains_kernel(stored_mask) and result.retrieved is None:
            violations.append("availability: a kernel of honest servers stored but retrieval produced nothing")
    if result.retrieved is not None and scenario.honest_dealer and result.retrieved.value != scenario.file:
        violations.append("correctness: retrieved value differs from the dealer's file")
    if not scenario.honest_dealer:
        fixed = committed_value(result)
        if fixed is not None and delivered and delivered != {fixed}:
            violations.append("correctness: delivered value differs from the committed file")
        if result.retrieved is not None and result.retrieved.value is not None:
            if fixed is not None and result.retrieved.value != fixed:
                violations.append("correctness: retrieved value differs from the committed file")
            if not _binds_to(config, result.retrieved.value, result.retrieved.commitment):
                violations.append("correctness: retrieved value does not re-encode to its commitment")
    return violations


@dataclass
class SweepReport:
    runs: int = 0
    terminated: int = 0
    violations: list[tuple[int, str]] = field(default_factory=list)
    outcomes: Counter = field(default_factory=Counter)

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        lines = [f"runs: {self.runs}", f"terminated: {self.terminated}/{self.runs}",
                 f"violations: {len(self.violations)}"]
        lines.extend(f"  seed {seed}: {message}" for seed, message in self.violations)
        return lines

    def __repr__(self):
        return f"SweepReport(runs={self.runs}, terminated={self.terminated}, violations={len(self.violations)})"


def sweep(template: Scenario, seeds: Iterable[int]) -> SweepReport:
    """Run the template once per seed and collect every property violation with its replay seed."""
    report = SweepReport()
    for seed in seeds:
        result = run(template.with_seed(seed))
        report.runs += 1
        if result.count(OutputKind.STORED) + result.count(OutputKind.DELIVERED) == len(result.honest_outputs()):
            report.terminated += 1
        report.outcomes[result.summary()] += 1
        for message in check_execution(result):
            report.violations.append((seed, message))
    logger.info("sweep: %d runs, %d violations", report.runs, len(report.violations))
    return report
