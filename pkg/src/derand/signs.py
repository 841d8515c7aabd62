"""Sign vectors and the bit/sign conventions used across the toolkit.

Global boolean convention: the sign -1 means false and +1 means true.
When signs are packed into integers or table indices, false maps to bit
0 and true to bit 1.

Two serialization orders appear, both fixed for reproducibility:

* Seeds are little-endian: bit 0 of byte 0 is the least-significant bit
  of the first field element.
* Sign blocks (rectangle coordinates, lookup-table entries) pack
  big-endian: the first sign of the block is the most significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MINUS = -1
PLUS = 1


@dataclass(frozen=True)
class SignVector:
    """An assignment in {-1,+1}^n."""

    values: tuple

    def __post_init__(self):
        if not all(v in (-1, 1) for v in self.values):
            raise ValueError("sign vector entries must be -1 or +1")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __iter__(self):
        return iter(self.values)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "SignVector":
        return cls(tuple(1 if b else -1 for b in bits))

    @classmethod
    def from_int(cls, value: int, n: int) -> "SignVector":
        """Unpack little-endian: bit i of ``value`` is coordinate i."""
        return cls(tuple(1 if (value >> i) & 1 else -1 for i in range(n)))

    def bits(self) -> tuple:
        return tuple(1 if v == 1 else 0 for v in self.values)

    def to_int(self) -> int:
        """Pack little-endian (coordinate i -> bit i)."""
        acc = 0
        for i, v in enumerate(self.values):
            if v == 1:
                acc |= 1 << i
        return acc

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.int8)


def pack_block(signs: Sequence[int]) -> int:
    """Pack a sign block big-endian: first sign is the most significant bit."""
    acc = 0
    for v in signs:
        acc = (acc << 1) | (1 if v == 1 else 0)
    return acc


def unpack_block(value: int, width: int) -> tuple:
    return tuple(1 if (value >> (width - 1 - q)) & 1 else -1 for q in range(width))


def pack_block_array(signs: np.ndarray) -> np.ndarray:
    """Vectorized pack_block over the last axis of an int8 sign array."""
    width = signs.shape[-1]
    bits = (signs == 1).astype(np.int64)
    weights = 1 << np.arange(width - 1, -1, -1, dtype=np.int64)
    return bits @ weights


def seed_bits_from_bytes(data: bytes, nbits: int) -> int:
    """Decode a little-endian seed: bit 0 of byte 0 is seed bit 0."""
    expect = (nbits + 7) // 8
    if len(data) != expect:
        raise ValueError(f"seed must be exactly {expect} bytes for {nbits} bits, got {len(data)}")
    value = int.from_bytes(data, "little")
    if value >> nbits:
        raise ValueError("seed padding bits beyond the declared length must be zero")
    return value


def seed_bytes(value: int, nbits: int) -> bytes:
    return value.to_bytes((nbits + 7) // 8, "little")


def parse_seed_hex(text: str, nbits: int) -> int:
    return seed_bits_from_bytes(bytes.fromhex(text), nbits)
