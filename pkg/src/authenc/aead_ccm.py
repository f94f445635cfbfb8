"""CCM: CTR encipherment plus CBC-MAC under one AES-128 key.

Formatting and counter layout follow NIST SP 800-38C. The tag is masked
with S_0 = E(Ctr_0); payload keystream starts at Ctr_1. Decryption answers
every failure with the same INVALID value.
"""

from __future__ import annotations

import hmac
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .formatting import INVALID
from .primitives import AES128, BlockCipher

BLOCK = 16
MAX_ADATA = 1 << 64


class CcmError(ValueError):
    pass


@dataclass(frozen=True)
class CcmParams:
    nonce_len: int = 13
    tag_len: int = 8

    def __post_init__(self):
        if not 7 <= self.nonce_len <= 13:
            raise CcmError(f"nonce length {self.nonce_len} outside 7..13")
        if self.tag_len not in (4, 6, 8, 10, 12, 14, 16):
            raise CcmError(f"tag length {self.tag_len} not in {{4,6,...,16}}")

    @property
    def q(self) -> int:
        """Octets in the payload-length field."""
        return 15 - self.nonce_len

    @property
    def max_payload(self) -> int:
        return (1 << (8 * self.q)) - 1


def b0_flags(params: CcmParams, has_adata: bool) -> int:
    return 64 * bool(has_adata) + 8 * ((params.tag_len - 2) // 2) + (params.q - 1)


def encode_adata_length(a: int) -> bytes:
    if a == 0:
        return b""
    if a < (1 << 16) - (1 << 8):
        return a.to_bytes(2, "big")
    if a < (1 << 32):
        return b"\xff\xfe" + a.to_bytes(4, "big")
    if a < MAX_ADATA:
        return b"\xff\xff" + a.to_bytes(8, "big")
    raise CcmError("associated data too long")


def _zero_pad(b: bytes) -> bytes:
    return b + bytes(-len(b) % BLOCK)


def _check(params: CcmParams, nonce: bytes, payload_len: int) -> None:
    if len(nonce) != params.nonce_len:
        raise CcmError(f"nonce must be {params.nonce_len} bytes, got {len(nonce)}")
    if payload_len > params.max_payload:
        raise CcmError(f"payload of {payload_len} bytes does not fit a {params.q}-byte length field")


def ccm_format(params: CcmParams, nonce: bytes, adata: bytes, payload: bytes) -> list[bytes]:
    """B_0, then length-prefixed adata and payload, each zero-padded to blocks."""
    _check(params, nonce, len(payload))
    b0 = bytes([b0_flags(params, bool(adata))]) + nonce + len(payload).to_bytes(params.q, "big")
    data = b0
    if adata:
        data += _zero_pad(encode_adata_length(len(adata)) + adata)
    data += _zero_pad(payload)
    return [data[i:i + BLOCK] for i in range(0, len(data), BLOCK)]


def counter_block(params: CcmParams, nonce: bytes, i: int) -> bytes:
    """Ctr_i = flags(q-1) || nonce || [i]_q."""
    return bytes([params.q - 1]) + nonce + i.to_bytes(params.q, "big")


def counter_blocks(params: CcmParams, nonce: bytes, payload_len: int) -> list[bytes]:
    """Ctr_0 (tag mask) followed by one counter per payload block."""
    m = -(-payload_len // BLOCK)
    return [counter_block(params, nonce, i) for i in range(m + 1)]


def _cipher(key) -> BlockCipher:
    return key if isinstance(key, BlockCipher) else AES128(key)


def _enc(cipher: BlockCipher, block: bytes) -> bytes:
    return cipher.encrypt_block(int.from_bytes(block, "big")).to_bytes(BLOCK, "big")


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def _mac(cipher: BlockCipher, blocks: list[bytes], tag_len: int) -> bytes:
    y = bytes(BLOCK)
    for b in blocks:
        y = _enc(cipher, _xor(y, b))
    return y[:tag_len]


def _ctr(cipher: BlockCipher, params: CcmParams, nonce: bytes, data: bytes) -> bytes:
    out = bytearray()
    for j in range(0, len(data), BLOCK):
        s = _enc(cipher, counter_block(params, nonce, j // BLOCK + 1))
        out += _xor(data[j:j + BLOCK], s)
    return bytes(out)


def ccm_encrypt(key, params: CcmParams, nonce: bytes, adata: bytes, payload: bytes,
                *, _mask_index: int = 0) -> bytes:
    """Generation-encryption: CTR(payload) || (tag xor MSB_t(S_0)).

    The nonce must never repeat under one key; that is the caller's job.
    """
    cipher = _cipher(key)
    tag = _mac(cipher, ccm_format(params, nonce, adata, payload), params.tag_len)
    s0 = _enc(cipher, counter_block(params, nonce, _mask_index))
    return _ctr(cipher, params, nonce, payload) + _xor(tag, s0)


def ccm_decrypt(key, params: CcmParams, nonce: bytes, adata: bytes, ciphertext: bytes,
                *, _mask_index: int = 0):
    """Decryption-verification: the payload, or INVALID.

    Both the CTR pass and the full MAC recomputation run even when the
    input is structurally short, so every rejection costs the same.
    """
    cipher = _cipher(key)
    t = params.tag_len
    well_sized = len(ciphertext) >= t and len(nonce) == params.nonce_len
    if not well_sized:
        # stand-in inputs of legal shape keep the work profile identical
        nonce = bytes(params.nonce_len)
        ciphertext = bytes(t)
    body, masked = ciphertext[:-t], ciphertext[-t:]
    try:
        payload = _ctr(cipher, params, nonce, body)
        s0 = _enc(cipher, counter_block(params, nonce, _mask_index))
        expected = _xor(_mac(cipher, ccm_format(params, nonce, adata, payload), t), s0)
    except CcmError:
        return INVALID
    if hmac.compare_digest(expected, masked) and well_sized:
        return payload
    return INVALID


# vector files: blank-line separated records of KEY=hex lines

VECTOR_FIELDS = ("Key", "Nonce", "Adata", "Payload", "CT")


@dataclass(frozen=True)
class CcmVector:
    key: bytes
    nonce: bytes
    adata: bytes
    payload: bytes
    ct: bytes
    label: str = ""

    @property
    def params(self) -> CcmParams:
        return CcmParams(len(self.nonce), len(self.ct) - len(self.payload))


def load_vectors(path: str | Path) -> Iterator[CcmVector]:
    record: dict[str, str] = {}
    label = ""
    count = 0

    def flush():
        nonlocal record, label
        if record:
            missing = [f for f in VECTOR_FIELDS if f not in record]
            if missing:
                raise ValueError(f"vector {label or count} missing {missing}")
            yield CcmVector(*(bytes.fromhex(record[f]) for f in VECTOR_FIELDS), label=label)
        record, label = {}, ""

    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            yield from flush()
            continue
        if line.startswith("#"):
            if not record:
                label = line.lstrip("# ").strip()
            continue
        name, _, value = line.partition("=")
        name = name.strip()
        if name not in VECTOR_FIELDS:
            raise ValueError(f"unknown field {name!r} in vector file")
        record[name] = value.strip()
        count += 1
    yield from flush()


def check_vector(v: CcmVector) -> bool:
    try:
        params = v.params
    except CcmError:
        return False
    if ccm_encrypt(v.key, params, v.nonce, v.adata, v.payload) != v.ct:
        return False
    return ccm_decrypt(v.key, params, v.nonce, v.adata, v.ct) == v.payload
