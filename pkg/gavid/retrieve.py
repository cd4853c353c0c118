"""Retrieve: collect verified fragments until a kernel of senders agrees on one commitment."""
from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field

from mec.access import NodeId
from mec.codes import Fragment, FragmentVector, decode

from gavid.messages import MessageKind, Output, OutputKind, ProtocolMessage
from gavid.server import GavidConfig, ServerState

logger = logging.getLogger(__name__)


@dataclass
class RetrieverState:
    """``valid`` maps a commitment to sender index -> verified fragment."""

    node: NodeId
    valid: dict[bytes, dict[int, Fragment | None]] = field(default_factory=dict)
    responded: set[int] = field(default_factory=set)
    output: Output | None = None


def retrieve_init(state: ServerState, config: GavidConfig) -> tuple[RetrieverState, list[ProtocolMessage]]:
    """
    Start a retrieval at the server owning ``state``: a fresh retriever and
    one RETRIEVE per server, self included. The server state is left as is.
    """
    node = state.node
    messages = [ProtocolMessage(MessageKind.RETRIEVE, node, receiver) for receiver in config.universe]
    return RetrieverState(node), messages


def handle_retrieve(state: ServerState, config: GavidConfig,
                    msg: ProtocolMessage) -> ProtocolMessage | None:
    """Answer with the stored fragment; servers that have not stored stay silent."""
    if msg.kind is not MessageKind.RETRIEVE or state.stored_value is None:
        return None
    stored = state.stored_value
    return ProtocolMessage(MessageKind.FRAGMENT, state.node, msg.sender,
                           stored.commitment, stored.fragment, stored.proof)


def handle_fragment(state: RetrieverState, config: GavidConfig,
                    msg: ProtocolMessage) -> tuple[RetrieverState, list[Output]]:
    """
    Record one FRAGMENT reply.

    The first commitment whose valid senders contain a kernel is decoded and
    output; later replies change nothing.
    """
    if msg.kind is not MessageKind.FRAGMENT or msg.commitment is None:
        return state, []
    if state.output is not None or msg.sender.index in state.responded:
        return state, []
    if msg.fragment is not None and len(msg.fragment) != config.code.fragment_length(msg.sender):
        return state, []
    if not config.scheme.verify(msg.sender, msg.fragment, msg.commitment, msg.proof, config.n):
        logger.debug("%s ignores an invalid fragment from %s", state.node, msg.sender)
        return state, []

    state = copy.deepcopy(state)
    d = msg.commitment
    state.responded.add(msg.sender.index)
    received = state.valid.setdefault(d, {})
    received[msg.sender.index] = msg.fragment
    senders = sum(config.universe.node(i).bit for i in received)
    if not config.context.contains_kernel(senders):
        return state, []
    entries = [received.get(node.index) for node in config.universe]
    value = decode(config.code, FragmentVector(config.universe, entries))
    if value is None:
        return state, []
    state.output = Output(OutputKind.RETRIEVED, state.node, d, value)
    logger.debug("%s retrieved the file under D=%s", state.node, d.hex()[:8])
    return state, [state.output]
