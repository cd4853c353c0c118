"""
Simulator scenarios: JSON loading and validation.

A scenario names the quorum context, the dealer, the file, the corrupt set
with its behaviors, and the adversary script that drives delivery order.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from mec.access import NodeId, QuorumContext, load_quorum_context
from mec.construct import build_lp_code
from mec.errors import PreconditionError, ScenarioError
from mec.packing import pack

from gavid.adversary import BEHAVIORS, DEALER_ONLY, Behavior
from gavid.messages import MessageKind
from gavid.server import GavidConfig

ACTIONS = ('deliver_next', 'delay', 'drop', 'inject')


@dataclass(frozen=True)
class MessagePattern:
    """Matches on any combination of sender, receiver and kind; absent fields match all."""

    sender: NodeId | None = None
    receiver: NodeId | None = None
    kind: MessageKind | None = None

    def matches(self, msg) -> bool:
        return ((self.sender is None or msg.sender == self.sender)
                and (self.receiver is None or msg.receiver == self.receiver)
                and (self.kind is None or msg.kind is self.kind))

    def touches(self, mask: int) -> bool:
        """True iff the pattern pins the sender or the receiver inside ``mask``."""
        return any(node is not None and mask & node.bit for node in (self.sender, self.receiver))


@dataclass(frozen=True)
class InjectSpec:
    """A raw message from a corrupt server; ``commitment=None`` means the dealer's."""

    sender: NodeId
    receiver: NodeId
    kind: MessageKind
    commitment: bytes | None
    fragment: tuple[int, ...] | None
    proof: tuple[bytes, ...] = ()


@dataclass(frozen=True)
class Directive:
    action: str
    pattern: MessagePattern = MessagePattern()
    steps: int = 0
    inject: InjectSpec | None = None


@dataclass(frozen=True)
class Scenario:
    config: GavidConfig
    file: tuple[int, ...]
    corrupt: int = 0
    behaviors: tuple[tuple[NodeId, str, int], ...] = ()
    script: tuple[Directive, ...] = ()
    seed: int = 0
    fairness: bool = True
    retriever: NodeId | None = None
    step_cap: int | None = None
    delay_bound: int | None = None

    @property
    def context(self) -> QuorumContext:
        return self.config.context

    @property
    def dealer(self) -> NodeId:
        return self.config.dealer

    @property
    def honest_mask(self) -> int:
        return self.config.universe.full_mask & ~self.corrupt

    @property
    def honest_dealer(self) -> bool:
        return not self.corrupt & self.dealer.bit

    def make_behaviors(self) -> dict[NodeId, Behavior]:
        """Fresh behavior objects; they carry per-run counters."""
        return {node: Behavior(kind, crash_after) for node, kind, crash_after in self.behaviors}

    def with_seed(self, seed: int) -> Scenario:
        return replace(self, seed=seed)


def _node(ctx: QuorumContext, name: Any, what: str) -> NodeId:
    try:
        return ctx.universe.node(str(name))
    except PreconditionError:
        raise ScenarioError(f"{what}: unknown node '{name}'") from None


def _pattern(ctx: QuorumContext, obj: dict, where: str) -> MessagePattern:
    unknown = set(obj) - {'from', 'to', 'kind'}
    if unknown:
        raise ScenarioError(f"{where}: unknown pattern keys {sorted(unknown)}")
    kind = None
    if 'kind' in obj:
        try:
            kind = MessageKind(obj['kind'])
        except ValueError:
            raise ScenarioError(f"{where}: unknown message kind '{obj['kind']}'") from None
    return MessagePattern(
        _node(ctx, obj['from'], where) if 'from' in obj else None,
        _node(ctx, obj['to'], where) if 'to' in obj else None,
        kind)


def _directive(ctx: QuorumContext, entry: dict, index: int, corrupt: int) -> Directive:
    where = f"Script entry {index + 1}"
    if not isinstance(entry, dict) or len(entry) != 1:
        raise ScenarioError(f"{where}: expected one of {', '.join(ACTIONS)}")
    action, body = next(iter(entry.items()))
    body = body or {}
    if action == 'deliver_next':
        return Directive(action, _pattern(ctx, body, where))
    if action == 'delay':
        steps = int(body.get('steps', 0))
        if steps < 0:
            raise ScenarioError(f"{where}: delay steps must be non-negative")
        return Directive(action, _pattern(ctx, body.get('match', {}), where), steps)
    if action == 'drop':
        pattern = _pattern(ctx, body, where)
        if not pattern.touches(corrupt):
            raise ScenarioError(
                f"{where}: drop is only allowed on messages to or from corrupt servers")
        return Directive(action, pattern)
    if action == 'inject':
        sender = _node(ctx, body.get('from'), where)
        if not corrupt & sender.bit:
            raise ScenarioError(f"{where}: only corrupt servers can inject messages")
        try:
            kind = MessageKind(body.get('kind'))
        except ValueError:
            raise ScenarioError(f"{where}: unknown message kind '{body.get('kind')}'") from None
        commitment = body.get('commitment', 'dealer')
        fragment = body.get('fragment')
        return Directive(action, inject=InjectSpec(
            sender, _node(ctx, body.get('to'), where), kind,
            None if commitment == 'dealer' else bytes.fromhex(commitment),
            None if fragment is None else tuple(int(s) for s in fragment),
            tuple(bytes.fromhex(p) for p in body.get('proof', []))))
    raise ScenarioError(f"{where}: unknown action '{action}'")


def _file_symbols(obj: Any, q: int, k: int) -> tuple[int, ...]:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ScenarioError("file must be one of {hex}, {random: {seed, len}} or {symbols}")
    (form, value), = obj.items()
    if form == 'symbols':
        symbols = [int(s) for s in value]
        if any(not 0 <= s < q for s in symbols):
            raise ScenarioError(f"file symbols must lie in [0, {q})")
    elif form == 'hex':
        symbols, _ = pack(bytes.fromhex(value), q)
    elif form == 'random':
        rng = random.Random(int(value.get('seed', 0)))
        if 'len' in value:
            symbols, _ = pack(rng.randbytes(int(value['len'])), q)
        else:
            symbols = [rng.randrange(q) for _ in range(k)]
    else:
        raise ScenarioError(f"Unknown file form '{form}'")
    if len(symbols) > k:
        raise ScenarioError(f"File needs {len(symbols)} symbols but the code dimension is {k}")
    return tuple(symbols) + (0,) * (k - len(symbols))


def _behaviors(ctx: QuorumContext, obj: dict, corrupt: int,
               dealer: NodeId) -> tuple[tuple[NodeId, str, int], ...]:
    result = []
    for name, spec in obj.items():
        node = _node(ctx, name, "behaviors")
        if not corrupt & node.bit:
            raise ScenarioError(f"Behavior given for honest server '{name}'")
        if isinstance(spec, str):
            spec = {'kind': spec}
        kind = spec.get('kind')
        if kind not in BEHAVIORS:
            raise ScenarioError(f"Unknown behavior '{kind}' for '{name}'")
        if kind in DEALER_ONLY and node != dealer:
            raise ScenarioError(f"Behavior '{kind}' only applies to the dealer")
        result.append((node, kind, int(spec.get('crash_after', 0))))
    return tuple(sorted(result))


def scenario_from_dict(obj: dict, base_dir: Path | None = None) -> Scenario:
    """
    Build a scenario from its JSON object.

    Raises:
        ScenarioError: On unknown nodes, a corrupt set outside the fail-prone
                       system, illegal drops or injections, or a file too
                       large for the code
    """
    base_dir = base_dir or Path('.')
    quorum = obj.get('quorum')
    if isinstance(quorum, str):
        with open(base_dir / quorum, 'r') as f:
            quorum = json.load(f)
    if not isinstance(quorum, dict):
        raise ScenarioError("Scenario needs a quorum context (file path or inline object)")
    ctx = load_quorum_context(quorum)

    corrupt = ctx.universe.mask([_node(ctx, name, "corrupt") for name in obj.get('corrupt', [])])
    if corrupt and not any(corrupt & f == corrupt for f in ctx.fail_prone):
        raise ScenarioError(
            f"Corrupt set {ctx.universe.names_of(corrupt)} is not inside any fail-prone set")

    code = build_lp_code(ctx.kernel_structure(), int(obj.get('k_multiplier', 1)))
    dealer = _node(ctx, obj.get('dealer', ctx.universe.names[0]), "dealer")
    config = GavidConfig(ctx, code, dealer, obj.get('variant', 'vector'), obj.get('mode', 'disperse'))

    retriever = obj.get('retriever')
    if retriever is not None:
        retriever = _node(ctx, retriever, "retriever")
        if corrupt & retriever.bit:
            raise ScenarioError("The retriever must be an honest server")

    script = tuple(_directive(ctx, entry, i, corrupt) for i, entry in enumerate(obj.get('script', [])))
    return Scenario(
        config=config,
        file=_file_symbols(obj.get('file', {'random': {'seed': 0}}), code.q, code.k),
        corrupt=corrupt,
        behaviors=_behaviors(ctx, obj.get('behaviors', {}), corrupt, dealer),
        script=script,
        seed=int(obj.get('seed', 0)),
        fairness=bool(obj.get('fairness', True)),
        retriever=retriever,
        step_cap=obj.get('step_cap'),
        delay_bound=obj.get('delay_bound'),
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    with open(path, 'r') as f:
        obj = json.load(f)
    return scenario_from_dict(obj, path.parent)
