"""
Pure server state machine for Disperse and its broadcast variant.

Handlers never mutate their input state: they return a new state together
with the messages to send and the outputs produced. The simulator owns all
scheduling.
"""
from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field
from typing import Sequence

from mec.access import NodeId, QuorumContext, Universe
from mec.codes import Fragment, FragmentVector, LinearCode, decode, encode, is_complete
from mec.errors import PreconditionError

from gavid.commitment import HASH_ALGORITHM, CommitmentScheme, Proof, commitment_scheme, fragment_bytes
from gavid.messages import MessageKind, Output, OutputKind, ProtocolMessage

logger = logging.getLogger(__name__)

VARIANTS = ('vector', 'merkle')
MODES = ('disperse', 'broadcast')


@dataclass(frozen=True)
class GavidConfig:
    """
    Wiring shared by every server of one dispersal instance.

    Raises:
        PreconditionError: If the code is not complete for the kernel system,
                           or the variant/mode/dealer is unknown
    """

    context: QuorumContext
    code: LinearCode
    dealer: NodeId
    variant: str = 'vector'
    mode: str = 'disperse'
    hash_algorithm: str = HASH_ALGORITHM

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise PreconditionError(f"Unknown variant '{self.variant}'")
        if self.mode not in MODES:
            raise PreconditionError(f"Unknown mode '{self.mode}'")
        if self.code.universe != self.context.universe:
            raise PreconditionError("Code and quorum context use different universes")
        self.context.universe.node(self.dealer)
        if not is_complete(self.code, self.context.kernel_structure()):
            raise PreconditionError("Code is not complete for the kernel system")

    @property
    def universe(self) -> Universe:
        return self.context.universe

    @property
    def n(self) -> int:
        return len(self.context.universe)

    @property
    def scheme(self) -> CommitmentScheme:
        return commitment_scheme(self.variant)


@dataclass(frozen=True)
class StoredValue:
    commitment: bytes
    fragment: Fragment | None
    proof: Proof


def stored_bytes(config: GavidConfig, node: NodeId, stored: StoredValue) -> int:
    """Canonical fragment bytes plus the per-server commitment overhead."""
    return len(fragment_bytes(node.index, stored.fragment)) + config.scheme.overhead_bytes(config.n)


@dataclass
class ServerState:
    """
    Per-server protocol state.

    ``echoes``/``readies`` map a commitment to the mask of valid senders;
    ``accepted`` maps it to sender index -> (fragment, proof).
    """

    node: NodeId
    echoes: dict[bytes, int] = field(default_factory=dict)
    readies: dict[bytes, int] = field(default_factory=dict)
    accepted: dict[bytes, dict[int, tuple[Fragment | None, Proof]]] = field(default_factory=dict)
    seen: set[tuple[int, MessageKind]] = field(default_factory=set)
    send_received: bool = False
    ready_sent: set[bytes] = field(default_factory=set)
    own: dict[bytes, tuple[Fragment | None, Proof]] = field(default_factory=dict)
    stored: bool = False
    stored_value: StoredValue | None = None
    output: Output | None = None


Step = tuple[ServerState, list[ProtocolMessage], list[Output]]

_DISPERSAL_KINDS = (MessageKind.SEND, MessageKind.ECHO, MessageKind.READY)


def new_state(node: NodeId) -> ServerState:
    return ServerState(node)


def _broadcast(config: GavidConfig, sender: NodeId, kind: MessageKind, commitment: bytes,
               fragment: Fragment | None, proof: Proof) -> list[ProtocolMessage]:
    return [ProtocolMessage(kind, sender, receiver, commitment, fragment, proof)
            for receiver in config.universe]


def _emit(state: ServerState, output: Output, outputs: list[Output]) -> None:
    if state.output is None:
        state.output = output
        outputs.append(output)


def commit_file(config: GavidConfig, f: Sequence[int]) -> tuple[FragmentVector, bytes, tuple[Proof, ...]]:
    """Encode f and commit to the fragments."""
    fragments = encode(config.code, f)
    commitment, proofs = config.scheme.commit(fragments)
    return fragments, commitment, proofs


def dealer_sends(config: GavidConfig, fragments: FragmentVector, commitment: bytes,
                 proofs: tuple[Proof, ...]) -> list[ProtocolMessage]:
    return [ProtocolMessage(MessageKind.SEND, config.dealer, node, commitment,
                            fragments[node], proofs[node.index - 1])
            for node in config.universe]


def disperse_init(config: GavidConfig, f: Sequence[int]) -> tuple[ServerState, list[ProtocolMessage]]:
    """
    Start a dispersal at the dealer: one SEND per node, self included.

    Raises:
        PreconditionError: If len(f) != k
    """
    fragments, commitment, proofs = commit_file(config, f)
    logger.debug("Dealer %s disperses D=%s", config.dealer, commitment.hex()[:8])
    return new_state(config.dealer), dealer_sends(config, fragments, commitment, proofs)


def _valid(config: GavidConfig, msg: ProtocolMessage) -> bool:
    if msg.commitment is None:
        return False
    if msg.fragment is not None and len(msg.fragment) != config.code.fragment_length(msg.sender):
        return False
    return config.scheme.verify(msg.sender, msg.fragment, msg.commitment, msg.proof, config.n)


def _record(state: ServerState, msg: ProtocolMessage, table: dict[bytes, int]) -> None:
    d = msg.commitment
    assert d is not None
    table[d] = table.get(d, 0) | msg.sender.bit
    state.accepted.setdefault(d, {})[msg.sender.index] = (msg.fragment, msg.proof)
    state.seen.add((msg.sender.index, msg.kind))


def _decode_accepted(state: ServerState, config: GavidConfig, d: bytes) -> tuple[int, ...] | None:
    senders = state.echoes.get(d, 0) | state.readies.get(d, 0)
    accepted = state.accepted.get(d, {})
    entries = [accepted[node.index][0] if senders & node.bit else None for node in config.universe]
    # Nodes without columns carry the absent marker either way.
    return decode(config.code, FragmentVector(config.universe, entries))


def _ready_procedure(state: ServerState, config: GavidConfig, d: bytes,
                     messages: list[ProtocolMessage], outputs: list[Output]) -> None:
    """Decode, re-encode and recommit; READY on a match, abort otherwise."""
    state.ready_sent.add(d)
    f = _decode_accepted(state, config, d)
    if f is not None:
        fragments, commitment, proofs = commit_file(config, f)
        if commitment == d:
            own = fragments[state.node], proofs[state.node.index - 1]
            state.own.setdefault(d, own)
            messages.extend(_broadcast(config, state.node, MessageKind.READY, d, *own))
            logger.debug("%s sends READY for D=%s", state.node, d.hex()[:8])
            return
    logger.info("%s aborts: fragments under D=%s are not a codeword", state.node, d.hex()[:8])
    _emit(state, Output(OutputKind.ABORT, state.node, d), outputs)


def _store_check(state: ServerState, config: GavidConfig, d: bytes, mode: str,
                 outputs: list[Output]) -> None:
    if state.stored or state.output is not None:
        return
    if not config.context.contains_reliable(state.readies.get(d, 0)):
        return
    if mode == 'broadcast':
        value = _decode_accepted(state, config, d)
        if value is None:
            return
        state.stored = True
        _emit(state, Output(OutputKind.DELIVERED, state.node, d, value), outputs)
        return
    if d not in state.own:
        return
    fragment, proof = state.own[d]
    state.stored = True
    state.stored_value = StoredValue(d, fragment, proof)
    logger.debug("%s stores its fragment for D=%s", state.node, d.hex()[:8])
    _emit(state, Output(OutputKind.STORED, state.node, d), outputs)


def _handle(state: ServerState, config: GavidConfig, msg: ProtocolMessage, mode: str) -> Step:
    messages: list[ProtocolMessage] = []
    outputs: list[Output] = []
    d = msg.commitment
    if msg.receiver != state.node or d is None or msg.kind not in _DISPERSAL_KINDS:
        return state, messages, outputs

    if msg.kind is MessageKind.SEND:
        if state.send_received or msg.sender != config.dealer:
            return state, messages, outputs
        if msg.fragment is not None and len(msg.fragment) != config.code.fragment_length(state.node):
            return state, messages, outputs
        if not config.scheme.verify(state.node, msg.fragment, d, msg.proof, config.n):
            return state, messages, outputs
        state.send_received = True
        state.own[d] = (msg.fragment, msg.proof)
        messages.extend(_broadcast(config, state.node, MessageKind.ECHO, d, msg.fragment, msg.proof))
        return state, messages, outputs

    if (msg.sender.index, msg.kind) in state.seen or not _valid(config, msg):
        return state, messages, outputs
    ctx = config.context
    if msg.kind is MessageKind.ECHO:
        _record(state, msg, state.echoes)
        if d not in state.ready_sent and ctx.contains_quorum(state.echoes[d]):
            _ready_procedure(state, config, d, messages, outputs)
    else:
        _record(state, msg, state.readies)
        if d not in state.ready_sent and ctx.contains_kernel(state.readies[d]):
            _ready_procedure(state, config, d, messages, outputs)
    _store_check(state, config, d, mode, outputs)
    return state, messages, outputs


def handle_message(state: ServerState, config: GavidConfig, msg: ProtocolMessage) -> Step:
    """
    Process one SEND, ECHO or READY.

    Returns:
        (new state, messages to send, outputs); the input state is untouched.
        Invalid or repeated messages leave the state unchanged.
    """
    return _handle(copy.deepcopy(state), config, msg, config.mode)


def broadcast_deliver_variant(state: ServerState, config: GavidConfig, msg: ProtocolMessage) -> Step:
    """Same handlers with the reliable-set step delivering the decoded message."""
    return _handle(copy.deepcopy(state), config, msg, 'broadcast')
