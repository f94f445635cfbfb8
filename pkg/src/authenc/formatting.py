"""Formatting rules F and their validators V.

Three block paddings (ISO/IEC 9797-1 methods 1-3) and two randomized
bit-pair encodings:

    enck:  0 -> 00         1 -> 01 | 10      (11 is invalid)
    enci:  0 -> 00|01|10   1 -> 11           (every pair decodes)
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass

from .bitcore import BLOCK_BITS, BitString


class _Invalid:
    """The single INVALID verdict. Falsy, so ``if validate(...)`` reads well."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INVALID"

    def __bool__(self) -> bool:
        return False

    def __reduce__(self):
        return (_Invalid, ())


INVALID = _Invalid()


class FormatRule(enum.Enum):
    PAD1 = "pad1"
    PAD2 = "pad2"
    PAD3 = "pad3"
    ENCK = "enck"
    ENCI = "enci"

    @property
    def block_aligned(self) -> bool:
        return self in (FormatRule.PAD1, FormatRule.PAD2, FormatRule.PAD3)

    @property
    def injective(self) -> bool:
        return self is not FormatRule.PAD1


@dataclass(frozen=True)
class FormattedText:
    rule: FormatRule
    body: BitString

    def __len__(self) -> int:
        return len(self.body)


def _zero_fill(s: BitString) -> BitString:
    return s + BitString.zeros(-len(s) % BLOCK_BITS)


def format_text(rule: FormatRule, p: BitString, rng: random.Random | None = None) -> FormattedText:
    """Apply F. ``rng`` is required for the randomized encodings."""
    rule = FormatRule(rule)
    if rule is FormatRule.PAD1:
        body = _zero_fill(p) if len(p) else BitString.zeros(BLOCK_BITS)
    elif rule is FormatRule.PAD2:
        body = _zero_fill(p + BitString(1, 1))
    elif rule is FormatRule.PAD3:
        if len(p) >> BLOCK_BITS:
            raise ValueError("plaintext length not representable in one block")
        body = BitString(len(p), BLOCK_BITS) + _zero_fill(p)
    else:
        if rng is None:
            raise ValueError(f"{rule.value} needs a randomness source")
        body = _encode_pairs(rule, p, rng)
    return FormattedText(rule, body)


def _encode_pairs(rule: FormatRule, p: BitString, rng: random.Random) -> BitString:
    v = 0
    for bit in p:
        if rule is FormatRule.ENCK:
            pair = (0b01, 0b10)[rng.getrandbits(1)] if bit else 0b00
        else:
            pair = 0b11 if bit else rng.randrange(3)
        v = (v << 2) | pair
    return BitString(v, 2 * len(p))


def validate(rule: FormatRule, t: FormattedText | BitString):
    """Apply V: the recovered plaintext, or INVALID.

    Padding method 1 carries no redundancy, so its "plaintext" is the whole
    padded body and it never fails.
    """
    rule = FormatRule(rule)
    body = t.body if isinstance(t, FormattedText) else t
    n = len(body)
    if rule is FormatRule.PAD1:
        return body
    if rule is FormatRule.PAD2:
        if n == 0 or n % BLOCK_BITS or body[n - BLOCK_BITS:].is_zero():
            return INVALID
        v = body.value
        tz = (v & -v).bit_length() - 1
        return body[: n - tz - 1]
    if rule is FormatRule.PAD3:
        if n < BLOCK_BITS or n % BLOCK_BITS:
            return INVALID
        declared = body[:BLOCK_BITS].value
        data_blocks = -(-declared // BLOCK_BITS)
        if n != BLOCK_BITS * (1 + data_blocks):
            return INVALID
        data = body[BLOCK_BITS:]
        if not data[declared:].is_zero():
            return INVALID
        return data[:declared]
    if n % 2:
        return INVALID
    out = 0
    v = body.value
    for i in range(n // 2 - 1, -1, -1):
        pair = (v >> (2 * i)) & 0b11
        if rule is FormatRule.ENCK:
            if pair == 0b11:
                return INVALID
            out = (out << 1) | (pair != 0)
        else:
            out = (out << 1) | (pair == 0b11)
    return BitString(out, n // 2)


def is_valid(rule: FormatRule, t: FormattedText | BitString) -> bool:
    return validate(rule, t) is not INVALID
