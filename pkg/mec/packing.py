"""
Byte/symbol packing: little-endian chunks of floor(log2 q) bits per field symbol.

Bit i of the stream is bit (i mod 8) of byte i // 8; symbol j holds stream
bits j*b .. j*b+b-1 with the first of them as its least significant bit.
"""
from __future__ import annotations

from typing import Sequence

from mec.errors import PreconditionError


def symbol_bits(q: int) -> int:
    """floor(log2 q): the bits one symbol of F_q can carry losslessly."""
    if q < 2:
        raise PreconditionError(f"Field order must be at least 2, got {q}")
    return q.bit_length() - 1


def pack(data: bytes, q: int) -> tuple[list[int], int]:
    """
    Split bytes into symbols.

    Returns:
        (symbols, pad_bits) where pad_bits zero bits complete the last symbol
    """
    b = symbol_bits(q)
    total = len(data) * 8
    value = int.from_bytes(data, 'little')
    count = -(-total // b)
    mask = (1 << b) - 1
    symbols = [(value >> (j * b)) & mask for j in range(count)]
    return symbols, count * b - total


def unpack(symbols: Sequence[int], q: int, length: int) -> bytes:
    """Inverse of ``pack``: the first ``length`` bytes carried by the symbols."""
    b = symbol_bits(q)
    if len(symbols) * b < length * 8:
        raise PreconditionError(
            f"{len(symbols)} symbols of {b} bits cannot hold {length} bytes")
    value = 0
    for j, symbol in enumerate(symbols):
        if not 0 <= symbol < (1 << b):
            raise PreconditionError(f"Symbol {j} = {symbol} does not fit in {b} bits")
        value |= symbol << (j * b)
    value &= (1 << (length * 8)) - 1
    return value.to_bytes(length, 'little')


def stripe(symbols: Sequence[int], k: int) -> list[tuple[int, ...]]:
    """Cut the symbol stream into k-symbol stripes, zero-filling the last one."""
    if k < 1:
        raise PreconditionError(f"Stripe width must be positive, got {k}")
    padded = list(symbols) + [0] * (-len(symbols) % k)
    if not padded:
        padded = [0] * k
    return [tuple(padded[i:i + k]) for i in range(0, len(padded), k)]
