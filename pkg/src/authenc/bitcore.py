"""Immutable bit strings and fixed-width blocks.

Bit 0 is the most significant bit of the first byte. Strings need not be
byte-aligned: the pair encodings double lengths and padding method 2 works
at bit granularity.
"""

from __future__ import annotations

import random
from typing import Iterable, Iterator, Sequence

BLOCK_BITS = 128


class BitString:
    """A finite sequence of bits backed by a Python int.

    The int holds the bits big-endian: ``bits[0]`` is the highest of the
    ``len(self)`` bits.
    """

    __slots__ = ("_value", "_length")

    def __init__(self, value: int = 0, length: int = 0):
        if length < 0:
            raise ValueError("negative length")
        if value < 0 or value >> length:
            raise ValueError(f"value does not fit in {length} bits")
        self._value = value
        self._length = length

    # construction

    @classmethod
    def zeros(cls, length: int) -> "BitString":
        return cls(0, length)

    @classmethod
    def ones(cls, length: int) -> "BitString":
        return cls((1 << length) - 1, length)

    @classmethod
    def from_bits(cls, bits: str | Iterable[int]) -> "BitString":
        """Build from ``"0110"`` or an iterable of 0/1 ints.

        Spaces and underscores in a string are ignored.
        """
        if isinstance(bits, str):
            bits = bits.replace(" ", "").replace("_", "")
            if bits and set(bits) - {"0", "1"}:
                raise ValueError(f"not a bit string: {bits!r}")
            return cls(int(bits, 2) if bits else 0, len(bits))
        value = 0
        n = 0
        for b in bits:
            if b not in (0, 1):
                raise ValueError(f"bit must be 0 or 1, got {b!r}")
            value = (value << 1) | b
            n += 1
        return cls(value, n)

    @classmethod
    def from_bytes(cls, data: bytes) -> "BitString":
        return cls(int.from_bytes(data, "big"), 8 * len(data))

    @classmethod
    def from_hex(cls, text: str, length: int | None = None) -> "BitString":
        """Parse hex; ``length`` truncates to a leading bit prefix."""
        data = bytes.fromhex(text)
        s = cls.from_bytes(data)
        if length is not None:
            if length > len(s):
                raise ValueError("bit length exceeds hex payload")
            s = s[:length]
        return s

    @classmethod
    def from_int(cls, value: int, length: int) -> "BitString":
        return cls(value, length)

    @classmethod
    def random(cls, length: int, rng: random.Random) -> "BitString":
        return cls(rng.getrandbits(length) if length else 0, length)

    # conversion

    @property
    def value(self) -> int:
        return self._value

    def to_bytes(self) -> bytes:
        if self._length % 8:
            raise ValueError(f"{self._length} bits is not byte-aligned")
        return self._value.to_bytes(self._length // 8, "big")

    def hex(self) -> str:
        """Lowercase hex; a ragged tail is zero-filled to the byte."""
        fill = -self._length % 8
        return (self._value << fill).to_bytes((self._length + fill) // 8, "big").hex()

    def to_json(self) -> dict:
        return {"hex": self.hex(), "bits": self._length}

    @classmethod
    def from_json(cls, obj: dict) -> "BitString":
        return cls.from_hex(obj["hex"], obj["bits"])

    def bits(self) -> list[int]:
        return list(self)

    # sequence protocol

    def __len__(self) -> int:
        return self._length

    def __iter__(self) -> Iterator[int]:
        for i in range(self._length - 1, -1, -1):
            yield (self._value >> i) & 1

    def __getitem__(self, key):
        if isinstance(key, slice):
            start, stop, step = key.indices(self._length)
            if step != 1:
                return BitString.from_bits(list(self)[key])
            if stop <= start:
                return BitString()
            width = stop - start
            shift = self._length - stop
            return BitString((self._value >> shift) & ((1 << width) - 1), width)
        if key < 0:
            key += self._length
        if not 0 <= key < self._length:
            raise IndexError(f"bit index {key} out of range for length {self._length}")
        return (self._value >> (self._length - 1 - key)) & 1

    def __add__(self, other: "BitString") -> "BitString":
        if not isinstance(other, BitString):
            return NotImplemented
        return BitString((self._value << other._length) | other._value,
                         self._length + other._length)

    def __xor__(self, other: "BitString") -> "BitString":
        return xor(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return self._length == other._length and self._value == other._value

    def __hash__(self) -> int:
        return hash((self._value, self._length))

    def __repr__(self) -> str:
        if self._length <= 64:
            return f"BitString('{self._value:0{self._length}b}')" if self._length else "BitString('')"
        return f"BitString(hex={self.hex()!r}, bits={self._length})"

    def __str__(self) -> str:
        return f"{self._value:0{self._length}b}" if self._length else ""

    # helpers

    def count_ones(self) -> int:
        return bin(self._value).count("1")

    def is_zero(self) -> bool:
        return self._value == 0

    def with_bits(self, start: int, bits: "BitString") -> "BitString":
        """Return a copy with ``bits`` written at ``start``."""
        end = start + len(bits)
        if start < 0 or end > self._length:
            raise IndexError("replacement out of range")
        return self[:start] + bits + self[end:]


def xor(a: BitString, b: BitString) -> BitString:
    if len(a) != len(b):
        raise ValueError(f"xor of unequal lengths {len(a)} and {len(b)}")
    return BitString(a.value ^ b.value, len(a))


def indicator(length: int, positions: Iterable[int]) -> BitString:
    """Bit string with ones exactly at ``positions``."""
    value = 0
    for i in positions:
        if not 0 <= i < length:
            raise IndexError(f"bit index {i} out of range for length {length}")
        value |= 1 << (length - 1 - i)
    return BitString(value, length)


def flip_bits(s: BitString, positions: Iterable[int]) -> BitString:
    positions = set(positions)
    if not positions:
        return s
    return xor(s, indicator(len(s), positions))


def concat(parts: Iterable[BitString]) -> BitString:
    out = BitString()
    for p in parts:
        out = out + p
    return out


class Block(BitString):
    """A bit string of exactly one cipher block (128 bits unless told otherwise)."""

    __slots__ = ()

    def __init__(self, value: int = 0, length: int = BLOCK_BITS):
        super().__init__(value, length)

    @classmethod
    def of(cls, s: BitString, width: int = BLOCK_BITS) -> "Block":
        if len(s) != width:
            raise ValueError(f"block must be {width} bits, got {len(s)}")
        return cls(s.value, width)


def split_blocks(s: BitString, width: int = BLOCK_BITS) -> list[Block]:
    if len(s) % width:
        raise ValueError(f"length {len(s)} is not a multiple of {width}")
    return [Block.of(s[i:i + width], width) for i in range(0, len(s), width)]


def join_blocks(blocks: Sequence[BitString]) -> BitString:
    return concat(BitString(b.value, len(b)) for b in blocks)
