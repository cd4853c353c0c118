"""Protocol messages and server outputs."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from mec.access import NodeId
from mec.codes import Fragment

from gavid.commitment import DIGEST_SIZE, Proof, fragment_bytes


class MessageKind(str, Enum):
    SEND = 'send'
    ECHO = 'echo'
    READY = 'ready'
    RETRIEVE = 'retrieve'
    FRAGMENT = 'fragment'


class OutputKind(str, Enum):
    STORED = 'stored'
    ABORT = 'abort'
    RETRIEVED = 'retrieved'
    DELIVERED = 'delivered'


# kind tag, sender index, receiver index
HEADER_BYTES = 1 + 4 + 4


@dataclass(frozen=True)
class ProtocolMessage:
    """
    One point-to-point message.

    Every kind except RETRIEVE carries a commitment, the sender's fragment
    (``None`` is the absent marker for nodes without columns) and the
    sender's proof (empty for the vector variant).
    """

    kind: MessageKind
    sender: NodeId
    receiver: NodeId
    commitment: bytes | None = None
    fragment: Fragment | None = None
    proof: Proof = ()

    @property
    def carries_fragment(self) -> bool:
        return self.kind is not MessageKind.RETRIEVE

    @property
    def size_bytes(self) -> int:
        """Bit length of the message on the wire, in bytes."""
        size = HEADER_BYTES
        if self.carries_fragment:
            size += len(self.commitment or b'')
            size += len(fragment_bytes(self.sender.index, self.fragment))
            size += DIGEST_SIZE * len(self.proof)
        return size

    def commitment_prefix(self) -> str | None:
        return self.commitment.hex()[:8] if self.commitment else None

    def __str__(self):
        return f"{self.kind.value.upper()} {self.sender}->{self.receiver} D={self.commitment_prefix()}"


@dataclass(frozen=True)
class Output:
    """A server's protocol output; ``value`` is the file vector for retrieved/delivered."""

    kind: OutputKind
    node: NodeId
    commitment: bytes | None = None
    value: tuple[int, ...] | None = None

    def describe(self) -> dict:
        return {
            'kind': self.kind.value,
            'node': self.node.name,
            'D_prefix_8hex': self.commitment.hex()[:8] if self.commitment else None,
            'value': list(self.value) if self.value is not None else None,
        }
