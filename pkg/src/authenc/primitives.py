"""Block cipher, CBC/CTR/OTP encipherment and CBC-MAC.

Every mode takes a keyed cipher object rather than raw key bytes so that
the reduced-width toy permutation and the counting wrapper used by the
oracle can stand in for AES without touching the mode code.
"""

from __future__ import annotations

from dataclasses import dataclass

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .bitcore import BitString, Block, xor

COUNTER_BITS = 32


class BlockCipher:
    """Keyed permutation on ``block_bits``-bit integers."""

    block_bits: int = 128
    name: str = "abstract"

    def encrypt_block(self, x: int) -> int:
        raise NotImplementedError

    def decrypt_block(self, x: int) -> int:
        raise NotImplementedError


class AES128(BlockCipher):
    """AES-128 (FIPS 197) driven one block at a time through ECB."""

    name = "aes128"

    def __init__(self, key: bytes):
        if len(key) != 16:
            raise ValueError(f"AES-128 needs a 16-byte key, got {len(key)}")
        self.key = bytes(key)
        ecb = Cipher(algorithms.AES(self.key), modes.ECB())
        self._enc = ecb.encryptor()
        self._dec = ecb.decryptor()

    def encrypt_block(self, x: int) -> int:
        return int.from_bytes(self._enc.update(x.to_bytes(16, "big")), "big")

    def decrypt_block(self, x: int) -> int:
        return int.from_bytes(self._dec.update(x.to_bytes(16, "big")), "big")


# PRESENT S-box; the toy cipher only needs some fixed 4-bit bijection.
_SBOX = (0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD, 0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2)
_SBOX_INV = tuple(_SBOX.index(i) for i in range(16))
# bit i of the state moves to position _PERM[i]
_PERM = tuple((i % 4) * 4 + i // 4 for i in range(16))
_PERM_INV = tuple(_PERM.index(i) for i in range(16))


def _sub16(x: int, box) -> int:
    return (box[x >> 12] << 12) | (box[(x >> 8) & 0xF] << 8) | (box[(x >> 4) & 0xF] << 4) | box[x & 0xF]


def _perm16(x: int, table) -> int:
    out = 0
    for i in range(16):
        if (x >> i) & 1:
            out |= 1 << table[i]
    return out


class ToyCipher(BlockCipher):
    """16-bit substitution-permutation network for exhaustive tests.

    Not a secure cipher. Four rounds of key-xor, S-box layer and bit
    transposition, then a final whitening key. Round keys are the first
    five big-endian 16-bit words of the key.
    """

    block_bits = 16
    name = "toy16"
    rounds = 4

    def __init__(self, key: bytes):
        if len(key) != 16:
            raise ValueError(f"toy cipher needs a 16-byte key, got {len(key)}")
        self.key = bytes(key)
        words = [int.from_bytes(key[i:i + 2], "big") for i in range(0, 16, 2)]
        self._rk = words[: self.rounds + 1]

    def encrypt_block(self, x: int) -> int:
        for r in range(self.rounds):
            x = _perm16(_sub16(x ^ self._rk[r], _SBOX), _PERM)
        return x ^ self._rk[self.rounds]

    def decrypt_block(self, x: int) -> int:
        x ^= self._rk[self.rounds]
        for r in reversed(range(self.rounds)):
            x = _sub16(_perm16(x, _PERM_INV), _SBOX_INV) ^ self._rk[r]
        return x


class CountingCipher(BlockCipher):
    """Wraps a cipher and counts invocations into ``meter.cipher_calls``."""

    def __init__(self, inner: BlockCipher, meter):
        self.inner = inner
        self.meter = meter
        self.block_bits = inner.block_bits
        self.name = inner.name

    def encrypt_block(self, x: int) -> int:
        self.meter.cipher_calls += 1
        return self.inner.encrypt_block(x)

    def decrypt_block(self, x: int) -> int:
        self.meter.cipher_calls += 1
        return self.inner.decrypt_block(x)


def make_cipher(key: bytes, name: str = "aes128") -> BlockCipher:
    if name == "aes128":
        return AES128(key)
    if name == "toy16":
        return ToyCipher(key)
    raise ValueError(f"unknown cipher {name!r}")


def block_encrypt(cipher: BlockCipher, b: BitString) -> Block:
    _check_block(cipher, b)
    return Block(cipher.encrypt_block(b.value), cipher.block_bits)


def block_decrypt(cipher: BlockCipher, b: BitString) -> Block:
    _check_block(cipher, b)
    return Block(cipher.decrypt_block(b.value), cipher.block_bits)


def _check_block(cipher: BlockCipher, b: BitString) -> None:
    if len(b) != cipher.block_bits:
        raise ValueError(f"expected a {cipher.block_bits}-bit block, got {len(b)} bits")


def _words(cipher: BlockCipher, s: BitString) -> list[int]:
    w = cipher.block_bits
    if len(s) % w:
        raise ValueError(f"{len(s)} bits is not a whole number of {w}-bit blocks")
    n = len(s) // w
    mask = (1 << w) - 1
    v = s.value
    return [(v >> (w * (n - 1 - i))) & mask for i in range(n)]


def _unwords(cipher: BlockCipher, words: list[int]) -> BitString:
    w = cipher.block_bits
    v = 0
    for x in words:
        v = (v << w) | x
    return BitString(v, w * len(words))


def cbc_encrypt(cipher: BlockCipher, iv: BitString, data: BitString) -> BitString:
    _check_block(cipher, iv)
    prev = iv.value
    out = []
    for p in _words(cipher, data):
        prev = cipher.encrypt_block(p ^ prev)
        out.append(prev)
    return _unwords(cipher, out)


def cbc_decrypt(cipher: BlockCipher, iv: BitString, data: BitString) -> BitString:
    _check_block(cipher, iv)
    prev = iv.value
    out = []
    for c in _words(cipher, data):
        out.append(cipher.decrypt_block(c) ^ prev)
        prev = c
    return _unwords(cipher, out)


def increment_counter(ctr: int, width: int, step: int = 1) -> int:
    """Add ``step`` to the low 32 bits (or all bits, for narrow blocks) mod 2^32."""
    cbits = min(COUNTER_BITS, width)
    mod = 1 << cbits
    return (ctr & ~(mod - 1)) | (((ctr & (mod - 1)) + step) % mod)


def ctr_keystream(cipher: BlockCipher, ctr0: BitString, n: int) -> list[Block]:
    """Keystream blocks E(ctr0), E(ctr0 + 1), ..., E(ctr0 + n - 1).

    Raises if the counter field would wrap, since wrapped counters repeat.
    """
    _check_block(cipher, ctr0)
    w = cipher.block_bits
    cbits = min(COUNTER_BITS, w)
    if (ctr0.value & ((1 << cbits) - 1)) + n > (1 << cbits):
        raise ValueError("counter field would wrap")
    return [Block(cipher.encrypt_block(increment_counter(ctr0.value, w, i)), w) for i in range(n)]


def ctr_crypt(cipher: BlockCipher, ctr0: BitString, s: BitString) -> BitString:
    w = cipher.block_bits
    n = -(-len(s) // w)
    if n == 0:
        return BitString()
    stream = 0
    for blk in ctr_keystream(cipher, ctr0, n):
        stream = (stream << w) | blk.value
    stream >>= n * w - len(s)
    return BitString(s.value ^ stream, len(s))


@dataclass(frozen=True)
class Pad:
    """One-time pad material; the scheme layer guarantees single use."""

    bits: BitString

    def __len__(self) -> int:
        return len(self.bits)


def otp_crypt(pad: Pad | BitString, s: BitString) -> BitString:
    bits = pad.bits if isinstance(pad, Pad) else pad
    if len(bits) < len(s):
        raise ValueError(f"pad of {len(bits)} bits is shorter than the {len(s)}-bit text")
    return xor(s, bits[: len(s)])


def cbc_mac(cipher: BlockCipher, data: BitString, tag_bits: int) -> BitString:
    """Raw CBC-MAC with zero IV, truncated to the leftmost ``tag_bits``.

    Callers must pad ``data`` to whole blocks. Fixed-length inputs only:
    prefix the length (padding method 3) when messages vary in length.
    """
    w = cipher.block_bits
    if not 0 < tag_bits <= w:
        raise ValueError(f"tag length {tag_bits} outside 1..{w}")
    if w == 128 and tag_bits < 32:
        raise ValueError("tags shorter than 32 bits are not supported")
    chain = 0
    for x in _words(cipher, data):
        chain = cipher.encrypt_block(chain ^ x)
    return BitString(chain >> (w - tag_bits), tag_bits)
