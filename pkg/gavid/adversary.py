"""
Closed library of Byzantine behaviors.

A corrupt server runs the honest handlers internally; its behavior decides
what actually leaves it. Dealer-only behaviors also replace the initial SENDs.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Sequence

from mec.codes import FragmentVector, encode
from mec.errors import ScenarioError

from gavid.messages import MessageKind, ProtocolMessage
from gavid.server import GavidConfig, commit_file, dealer_sends

BEHAVIORS = ('crash', 'mute', 'equivocate', 'corrupt-fragment', 'garbage-dealer')
DEALER_ONLY = ('garbage-dealer',)


def forge_commitment(commitment: bytes) -> bytes:
    """A commitment of the same length that differs in every byte."""
    return bytes(b ^ 0xFF for b in commitment)


@dataclass
class Behavior:
    """
    One corrupt server's behavior.

    ``crash_after`` counts messages the server sends before it stops
    (crash only); ``sent`` is the running count.
    """

    kind: str
    crash_after: int = 0
    sent: int = 0

    def __post_init__(self):
        if self.kind not in BEHAVIORS:
            raise ScenarioError(
                f"Unknown behavior '{self.kind}'; expected one of {', '.join(BEHAVIORS)}")
        if self.crash_after < 0:
            raise ScenarioError("crash_after must be non-negative")

    @property
    def alive(self) -> bool:
        if self.kind == 'mute':
            return False
        if self.kind == 'crash':
            return self.sent < self.crash_after
        return True

    def dealer_messages(self, config: GavidConfig, f: Sequence[int],
                        rng: random.Random) -> list[ProtocolMessage]:
        """The SENDs this behavior emits when its server is the dealer."""
        if self.kind == 'equivocate':
            return self.outgoing(config, _equivocating_sends(config, f, rng))
        if self.kind == 'garbage-dealer':
            return _garbage_sends(config, f)
        fragments, commitment, proofs = commit_file(config, f)
        return self.outgoing(config, dealer_sends(config, fragments, commitment, proofs))

    def outgoing(self, config: GavidConfig,
                 messages: Sequence[ProtocolMessage]) -> list[ProtocolMessage]:
        """Filter or rewrite what the honest logic wants to send."""
        kept: list[ProtocolMessage] = []
        for msg in messages:
            if not self.alive:
                break
            self.sent += 1
            if self.kind == 'corrupt-fragment':
                msg = _corrupt(config, msg)
            elif self.kind == 'equivocate' and msg.kind is not MessageKind.SEND:
                if _in_second_half(config, msg) and msg.commitment is not None:
                    msg = replace(msg, commitment=forge_commitment(msg.commitment))
            kept.append(msg)
        return kept


def _in_second_half(config: GavidConfig, msg: ProtocolMessage) -> bool:
    return msg.receiver.index > config.n // 2


def _equivocating_sends(config: GavidConfig, f: Sequence[int],
                        rng: random.Random) -> list[ProtocolMessage]:
    """Receivers 1..n/2 get a dispersal of f, the rest one of a different file."""
    other = list(f)
    while tuple(other) == tuple(f):
        other = [rng.randrange(config.code.q) for _ in f]
    first = dealer_sends(config, *commit_file(config, f))
    second = dealer_sends(config, *commit_file(config, other))
    return [b if _in_second_half(config, a) else a for a, b in zip(first, second)]


def _garbage_sends(config: GavidConfig, f: Sequence[int]) -> list[ProtocolMessage]:
    """Commit honestly to a vector that is not a codeword: one symbol is shifted."""
    fragments = encode(config.code, f)
    entries = list(fragments.entries)
    target = next((i for i, e in enumerate(entries) if e), None)
    if target is None:
        raise ScenarioError("garbage-dealer needs a node with at least one column")
    shifted = list(entries[target])
    shifted[0] = (shifted[0] + 1) % config.code.q
    entries[target] = tuple(shifted)
    garbage = FragmentVector(config.universe, entries)
    commitment, proofs = config.scheme.commit(garbage)
    return dealer_sends(config, garbage, commitment, proofs)


def _corrupt(config: GavidConfig, msg: ProtocolMessage) -> ProtocolMessage:
    if not msg.fragment:
        return msg
    q = config.code.q
    return replace(msg, fragment=tuple((s + 1) % q for s in msg.fragment))
