"""Composition orders for format (F), authenticate (A) and encrypt (E).

    encrypt-only   C = E(F(p))
    afe            C = E(F(p || A(p)))          MAC over the raw plaintext
    fae            C = E(F(p) || A(F(p)))       MAC over the formatted text
    fea            C = E(F(p)),  tag = A(hdr || C)

The receiver's answer to a manipulated wire message is the side channel
the attacks read, so :meth:`Scheme.open` also reports how much work it did
via an optional meter.
"""

from __future__ import annotations

import enum
import hmac
import random
from dataclasses import dataclass, field

from .bitcore import BLOCK_BITS, BitString
from .formatting import INVALID, FormatRule, format_text, validate
from .primitives import (
    BlockCipher,
    CountingCipher,
    Pad,
    cbc_decrypt,
    cbc_encrypt,
    cbc_mac,
    ctr_crypt,
    make_cipher,
    otp_crypt,
)

SEQ_BITS = 64


class SchemeError(Exception):
    pass


class PadExhausted(SchemeError):
    pass


class Order(enum.Enum):
    ENCRYPT_ONLY = "encrypt-only"
    AFE = "afe"
    FAE = "fae"
    FEA = "fea"

    @property
    def authenticated(self) -> bool:
        return self is not Order.ENCRYPT_ONLY


class CipherMode(enum.Enum):
    OTP = "otp"
    CBC = "cbc"
    CTR = "ctr"


class Outcome(enum.Enum):
    ACCEPT = "ACCEPT"
    INVALID = "INVALID"
    MAC_FAILURE = "MAC_FAILURE"


@dataclass(frozen=True)
class Unprotected:
    outcome: Outcome
    plaintext: BitString | None = None

    @classmethod
    def accept(cls, p: BitString) -> "Unprotected":
        return cls(Outcome.ACCEPT, p)

    @property
    def accepted(self) -> bool:
        return self.outcome is Outcome.ACCEPT


INVALID_OUTCOME = Unprotected(Outcome.INVALID)
MAC_FAILURE = Unprotected(Outcome.MAC_FAILURE)


@dataclass(frozen=True)
class SchemeConfig:
    order: Order
    rule: FormatRule
    cipher: CipherMode = CipherMode.OTP
    tag_bits: int = 64

    def __post_init__(self):
        object.__setattr__(self, "order", Order(self.order))
        object.__setattr__(self, "rule", FormatRule(self.rule))
        object.__setattr__(self, "cipher", CipherMode(self.cipher))
        if self.order.authenticated and not 32 <= self.tag_bits <= BLOCK_BITS:
            raise ValueError(f"tag length {self.tag_bits} outside 32..{BLOCK_BITS}")
        if self.cipher is CipherMode.CBC and not self.rule.block_aligned:
            raise ValueError(f"CBC needs a block-aligned format rule, not {self.rule.value}")

    def describe(self) -> dict:
        return {
            "order": self.order.value,
            "rule": self.rule.value,
            "cipher": self.cipher.value,
            "tag_bits": self.tag_bits if self.order.authenticated else 0,
        }


@dataclass(frozen=True)
class WireMessage:
    """What travels: optional IV / initial counter, optional pad index, body.

    For fea the body is ciphertext followed by the tag.
    """

    body: BitString
    iv: BitString | None = None
    seq: int | None = None

    def replace(self, *, body: BitString | None = None, iv: BitString | None = None) -> "WireMessage":
        return WireMessage(body if body is not None else self.body,
                           iv if iv is not None else self.iv, self.seq)

    @property
    def surface(self) -> BitString:
        """IV followed by body: every bit an attacker can flip."""
        return (self.iv if self.iv is not None else BitString()) + self.body

    def with_surface(self, s: BitString) -> "WireMessage":
        k = len(self.iv) if self.iv is not None else 0
        return WireMessage(s[k:], s[:k] if self.iv is not None else None, self.seq)

    def to_json(self) -> dict:
        return {
            "iv": self.iv.to_json() if self.iv is not None else None,
            "seq": self.seq,
            "body": self.body.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "WireMessage":
        iv = BitString.from_json(obj["iv"]) if obj.get("iv") else None
        return cls(BitString.from_json(obj["body"]), iv, obj.get("seq"))


class PadLedger:
    """Issues one-time pads by message number; each number is issued once."""

    def __init__(self, rng: random.Random, capacity: int | None = None):
        self._rng = rng
        self._pads: dict[int, Pad] = {}
        self.capacity = capacity

    def issue(self, n_bits: int) -> tuple[int, Pad]:
        seq = len(self._pads)
        if self.capacity is not None and seq >= self.capacity:
            raise PadExhausted(f"all {self.capacity} pads have been used")
        pad = Pad(BitString.random(n_bits, self._rng))
        self._pads[seq] = pad
        return seq, pad

    def lookup(self, seq: int | None) -> Pad | None:
        return self._pads.get(seq) if seq is not None else None

    def __len__(self) -> int:
        return len(self._pads)


@dataclass
class Meter:
    """Abstract work: one unit per block-cipher call, one per block validated."""

    cipher_calls: int = 0
    blocks_validated: int = 0

    @property
    def cost(self) -> int:
        return self.cipher_calls + self.blocks_validated


class _Structural(Exception):
    """Wire message cannot even be deciphered."""


@dataclass
class _Keys:
    enc: BlockCipher
    mac: BlockCipher
    meter: Meter | None = field(default=None)


class Scheme:
    """One sender/receiver key holder for a given configuration."""

    def __init__(self, config: SchemeConfig, enc_key: bytes, mac_key: bytes,
                 pad_rng: random.Random | None = None, pad_capacity: int | None = None):
        self.config = config
        self._enc = make_cipher(enc_key)
        self._mac = make_cipher(mac_key)
        self.pads = PadLedger(pad_rng or random.Random(), pad_capacity)

    @classmethod
    def generate(cls, config: SchemeConfig, rng: random.Random, **kw) -> "Scheme":
        enc_key = rng.randbytes(16)
        mac_key = rng.randbytes(16)
        return cls(config, enc_key, mac_key, random.Random(rng.getrandbits(64)), **kw)

    # key-holder building blocks

    def _keys(self, meter: Meter | None) -> _Keys:
        if meter is None:
            return _Keys(self._enc, self._mac)
        return _Keys(CountingCipher(self._enc, meter), CountingCipher(self._mac, meter), meter)

    def mac(self, data: BitString, keys: _Keys | None = None) -> BitString:
        """Keyed tag over arbitrary-length data (length-prefixed CBC-MAC)."""
        cipher = (keys or self._keys(None)).mac
        return cbc_mac(cipher, format_text(FormatRule.PAD3, data).body, self.config.tag_bits)

    def _tags_equal(self, a: BitString, b: BitString) -> bool:
        return len(a) == len(b) and hmac.compare_digest(a.value.to_bytes(16, "big"), b.value.to_bytes(16, "big"))

    def _encipher(self, x: BitString, rng: random.Random) -> WireMessage:
        mode = self.config.cipher
        if mode is CipherMode.OTP:
            seq, pad = self.pads.issue(len(x))
            return WireMessage(otp_crypt(pad, x), seq=seq)
        if mode is CipherMode.CTR:
            # random nonce in the high 96 bits, counter field starts at zero
            ctr0 = BitString(rng.getrandbits(BLOCK_BITS - 32) << 32, BLOCK_BITS)
            return WireMessage(ctr_crypt(self._enc, ctr0, x), iv=ctr0)
        iv = BitString.random(BLOCK_BITS, rng)
        return WireMessage(cbc_encrypt(self._enc, iv, x), iv=iv)

    def _decipher(self, c: BitString, w: WireMessage, keys: _Keys) -> BitString:
        mode = self.config.cipher
        if mode is CipherMode.OTP:
            pad = self.pads.lookup(w.seq)
            if pad is None or len(pad) < len(c):
                raise _Structural
            return otp_crypt(pad, c)
        if w.iv is None or len(w.iv) != BLOCK_BITS:
            raise _Structural
        try:
            if mode is CipherMode.CTR:
                return ctr_crypt(keys.enc, w.iv, c)
            return cbc_decrypt(keys.enc, w.iv, c)
        except ValueError:
            raise _Structural from None

    def _header(self, w: WireMessage) -> BitString:
        h = BitString()
        if w.seq is not None:
            h += BitString(w.seq, SEQ_BITS)
        if w.iv is not None:
            h += w.iv
        return h

    def _cbc_fill(self) -> int:
        if self.config.cipher is CipherMode.CBC:
            return -self.config.tag_bits % BLOCK_BITS
        return 0

    # sender

    def protect(self, p: BitString, rng: random.Random) -> WireMessage:
        cfg = self.config
        if cfg.order is Order.AFE:
            t = format_text(cfg.rule, p + self.mac(p), rng).body
            return self._encipher(t, rng)
        return self.protect_formatted(format_text(cfg.rule, p, rng).body, rng)

    def protect_formatted(self, t: BitString, rng: random.Random) -> WireMessage:
        """Everything after F, for an already formatted (possibly ill-formed) T.

        Only meaningful for orders where F comes first.
        """
        cfg = self.config
        if cfg.order is Order.AFE:
            raise SchemeError("afe authenticates before formatting")
        if cfg.order is Order.ENCRYPT_ONLY:
            return self._encipher(t, rng)
        if cfg.order is Order.FAE:
            x = t + self.mac(t) + BitString.zeros(self._cbc_fill())
            return self._encipher(x, rng)
        w = self._encipher(t, rng)
        return w.replace(body=w.body + self.mac(self._header(w) + w.body))

    # receiver

    def unprotect(self, w: WireMessage) -> Unprotected:
        """Receive with constant work: every check runs on every input."""
        return self.open(w, eager=True)

    def open(self, w: WireMessage, *, eager: bool = True, meter: Meter | None = None) -> Unprotected:
        """Invert the configured order.

        With ``eager=False`` the receiver stops at the first failing check,
        the way a naive implementation would.
        """
        keys = self._keys(meter)
        order = self.config.order
        if order is Order.ENCRYPT_ONLY:
            return self._open_plain(w, keys)
        if order is Order.AFE:
            return self._open_afe(w, keys, eager)
        if order is Order.FAE:
            return self._open_fae(w, keys, eager)
        return self._open_fea(w, keys, eager)

    def _validate(self, t: BitString, keys: _Keys):
        if keys.meter is not None:
            keys.meter.blocks_validated += -(-len(t) // BLOCK_BITS)
        return validate(self.config.rule, t)

    def _open_plain(self, w, keys):
        try:
            t = self._decipher(w.body, w, keys)
        except _Structural:
            return INVALID_OUTCOME
        p = self._validate(t, keys)
        return INVALID_OUTCOME if p is INVALID else Unprotected.accept(p)

    def _open_afe(self, w, keys, eager):
        tag_bits = self.config.tag_bits
        try:
            t = self._decipher(w.body, w, keys)
        except _Structural:
            return MAC_FAILURE
        x = self._validate(t, keys)
        if x is INVALID or len(x) < tag_bits:
            if eager:
                # burn the MAC computation anyway so timing matches a MAC check
                self.mac(BitString.zeros(max(0, self._afe_payload_bits(len(t)))), keys)
            return INVALID_OUTCOME if x is INVALID else MAC_FAILURE
        p, m = x[: len(x) - tag_bits], x[len(x) - tag_bits:]
        if self._tags_equal(self.mac(p, keys), m):
            return Unprotected.accept(p)
        return MAC_FAILURE

    def _afe_payload_bits(self, formatted_bits: int) -> int:
        if self.config.rule.block_aligned:
            return formatted_bits - self.config.tag_bits
        return formatted_bits // 2 - self.config.tag_bits

    def _open_fae(self, w, keys, eager):
        tag_bits = self.config.tag_bits
        fill = self._cbc_fill()
        try:
            x = self._decipher(w.body, w, keys)
        except _Structural:
            return MAC_FAILURE
        if len(x) < tag_bits + fill:
            return MAC_FAILURE
        cut = len(x) - fill
        t, m = x[: cut - tag_bits], x[cut - tag_bits: cut]
        ok = self._tags_equal(self.mac(t, keys), m) and x[cut:].is_zero()
        if not ok and not eager:
            return MAC_FAILURE
        p = self._validate(t, keys)
        if not ok:
            return MAC_FAILURE
        return INVALID_OUTCOME if p is INVALID else Unprotected.accept(p)

    def _open_fea(self, w, keys, eager):
        tag_bits = self.config.tag_bits
        if len(w.body) < tag_bits:
            return MAC_FAILURE
        c, m = w.body[: len(w.body) - tag_bits], w.body[len(w.body) - tag_bits:]
        ok = self._tags_equal(self.mac(self._header(w) + c, keys), m)
        if not ok and not eager:
            return MAC_FAILURE
        try:
            t = self._decipher(c, w, keys)
        except _Structural:
            return MAC_FAILURE
        p = self._validate(t, keys)
        if not ok:
            return MAC_FAILURE
        return INVALID_OUTCOME if p is INVALID else Unprotected.accept(p)
