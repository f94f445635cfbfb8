"""A CCMP-style channel over CCM.

Packet numbers double as nonces and as replay counters. The peer only
ever learns a single opaque REJECT; the reason goes to the local error
log, which :func:`audit` summarizes.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import asdict, dataclass, field

from .aead_ccm import CcmParams, ccm_decrypt, ccm_encrypt
from .formatting import INVALID

PN_BYTES = 6
PN_LIMIT = 1 << (8 * PN_BYTES)
RETRY_LIMIT = 3
KEY_BYTES = 16


class SessionError(Exception):
    pass


class SessionCancelled(SessionError):
    pass


class PacketNumberExhausted(SessionError):
    """The packet-number space is used up; the session must be rekeyed."""


class Status(enum.Enum):
    ACTIVE = "active"
    CANCELLED = "cancelled"


class EventKind(enum.Enum):
    INVALID_FRAME = "InvalidFrame"
    REPLAY = "Replay"


class _Reject:
    def __repr__(self) -> str:
        return "REJECT"

    def __bool__(self) -> bool:
        return False


REJECT = _Reject()


@dataclass(frozen=True)
class ErrorEvent:
    timestamp: int
    pn: int
    kind: EventKind
    direction: str = "inbound"

    def to_json(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "ErrorEvent":
        return cls(obj["timestamp"], obj["pn"], EventKind(obj["kind"]), obj.get("direction", "inbound"))


@dataclass(frozen=True)
class Frame:
    pn: int
    adata: bytes
    ciphertext: bytes

    def to_bytes(self) -> bytes:
        return (self.pn.to_bytes(PN_BYTES, "big") + len(self.adata).to_bytes(2, "big")
                + self.adata + self.ciphertext)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Frame":
        if len(data) < PN_BYTES + 2:
            raise ValueError("frame too short")
        pn = int.from_bytes(data[:PN_BYTES], "big")
        alen = int.from_bytes(data[PN_BYTES:PN_BYTES + 2], "big")
        start = PN_BYTES + 2
        if len(data) < start + alen:
            raise ValueError("truncated frame header")
        return cls(pn, data[start:start + alen], data[start + alen:])


def pn_nonce(pn: int, params: CcmParams) -> bytes:
    """Big-endian packet number right-aligned in a zero-filled nonce."""
    return pn.to_bytes(params.nonce_len, "big")


def _header_adata(pn: int, header: bytes) -> bytes:
    # the cleartext packet number is authenticated along with the header
    return pn.to_bytes(PN_BYTES, "big") + header


@dataclass
class Session:
    """One endpoint: sends with its own counter, tracks the peer's counter.

    Not thread-safe; give each thread its own instance.
    """

    key: bytes
    params: CcmParams = field(default_factory=CcmParams)
    retry_limit: int = RETRY_LIMIT
    send_pn: int = 0
    last_accepted_pn: int = -1
    consecutive_failures: int = 0
    status: Status = Status.ACTIVE
    error_log: list[ErrorEvent] = field(default_factory=list)
    clock: int = 0
    nonces_used: list[bytes] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if len(self.key) != KEY_BYTES:
            raise SessionError(f"session key must be {KEY_BYTES} bytes")
        if self.params.nonce_len < PN_BYTES:
            raise SessionError("nonce too short to hold a packet number")

    def _tick(self) -> int:
        self.clock += 1
        return self.clock

    def send(self, header: bytes, payload: bytes) -> Frame:
        if self.status is Status.CANCELLED:
            raise SessionCancelled("session cancelled; rekey first")
        if self.send_pn >= PN_LIMIT:
            raise PacketNumberExhausted("packet numbers exhausted; rekey required")
        pn = self.send_pn
        self.send_pn += 1
        nonce = pn_nonce(pn, self.params)
        self.nonces_used.append(nonce)
        ct = ccm_encrypt(self.key, self.params, nonce, _header_adata(pn, header), payload)
        return Frame(pn, header, ct)

    def _is_replay(self, pn: int) -> bool:
        return pn <= self.last_accepted_pn

    def _log(self, pn: int, kind: EventKind) -> None:
        self.error_log.append(ErrorEvent(self._tick(), pn, kind))

    def receive(self, frame: Frame):
        """Return the payload, or REJECT.

        Replays are logged but do not count against the retry budget;
        authentication failures do, and the session is cancelled once
        more than ``retry_limit`` arrive in a row.
        """
        if self.status is Status.CANCELLED:
            raise SessionCancelled("session cancelled; rekey first")
        if self._is_replay(frame.pn):
            self._log(frame.pn, EventKind.REPLAY)
            return REJECT
        payload = ccm_decrypt(self.key, self.params, pn_nonce(frame.pn, self.params),
                              _header_adata(frame.pn, frame.adata), frame.ciphertext)
        if payload is INVALID:
            self._log(frame.pn, EventKind.INVALID_FRAME)
            self.consecutive_failures += 1
            if self.consecutive_failures > self.retry_limit:
                self.status = Status.CANCELLED
            return REJECT
        self.last_accepted_pn = frame.pn
        self.consecutive_failures = 0
        return payload

    def rekey(self, fresh_randomness: bytes) -> "Session":
        """Install a new key from caller-supplied entropy; the log survives."""
        if len(fresh_randomness) < KEY_BYTES:
            raise SessionError(f"need at least {KEY_BYTES} bytes of fresh randomness")
        self.key = bytes(fresh_randomness[:KEY_BYTES])
        self.send_pn = 0
        self.last_accepted_pn = -1
        self.consecutive_failures = 0
        self.status = Status.ACTIVE
        self.nonces_used = []
        return self


def rekey(s: Session, fresh_randomness: bytes) -> Session:
    return s.rekey(fresh_randomness)


def audit(log: list[ErrorEvent]) -> dict:
    """Aggregate an error log: counts by kind, time span, events per pn."""
    counts = Counter(e.kind.value for e in log)
    per_pn = Counter(e.pn for e in log)
    return {
        "total": len(log),
        "counts": {k.value: counts.get(k.value, 0) for k in EventKind},
        "first_timestamp": min((e.timestamp for e in log), default=None),
        "last_timestamp": max((e.timestamp for e in log), default=None),
        "per_pn": {str(pn): n for pn, n in sorted(per_pn.items())},
    }


def export_log(log: list[ErrorEvent]) -> str:
    return json.dumps([e.to_json() for e in log], indent=2)


def import_log(text: str) -> list[ErrorEvent]:
    return [ErrorEvent.from_json(o) for o in json.loads(text)]
