import json
import random

import pytest

from authenc.session import (
    PN_LIMIT,
    REJECT,
    EventKind,
    Frame,
    PacketNumberExhausted,
    Session,
    SessionCancelled,
    SessionError,
    Status,
    audit,
    export_log,
    import_log,
    pn_nonce,
)


def pair(seed=0):
    key = random.Random(seed).randbytes(16)
    return Session(key), Session(key)


def corrupt(frame):
    ct = bytearray(frame.ciphertext)
    ct[0] ^= 1
    return Frame(frame.pn, frame.adata, bytes(ct))


def test_send_increments_pn():
    tx, _ = pair()
    assert [tx.send(b"h", b"x").pn for _ in range(3)] == [0, 1, 2]


def test_nonce_layout():
    tx, _ = pair()
    assert pn_nonce(0x0102, tx.params) == bytes(11) + b"\x01\x02"


def test_roundtrip_in_order():
    tx, rx = pair()
    for i in range(10):
        assert rx.receive(tx.send(b"h", b"msg%d" % i)) == b"msg%d" % i
    assert rx.last_accepted_pn == 9 and rx.error_log == []


def test_replay_rejected_and_logged():
    tx, rx = pair()
    f = tx.send(b"h", b"pay")
    assert rx.receive(f) == b"pay"
    assert rx.receive(f) is REJECT
    assert rx.receive(f) is REJECT
    assert [e.kind for e in rx.error_log] == [EventKind.REPLAY, EventKind.REPLAY]
    assert rx.consecutive_failures == 0


def test_older_pn_is_replay():
    tx, rx = pair()
    frames = [tx.send(b"h", b"p") for _ in range(4)]
    rx.receive(frames[3])
    for f in frames[:3]:
        assert rx.receive(f) is REJECT
    assert all(e.kind is EventKind.REPLAY for e in rx.error_log)


def test_header_is_authenticated():
    tx, rx = pair()
    f = tx.send(b"hdr", b"p")
    assert rx.receive(Frame(f.pn, b"HDR", f.ciphertext)) is REJECT
    assert rx.receive(Frame(f.pn + 1, f.adata, f.ciphertext)) is REJECT


def test_four_corrupted_frames_cancel():
    tx, rx = pair()
    for i in range(3):
        assert rx.receive(corrupt(tx.send(b"h", b"p"))) is REJECT
        assert rx.status is Status.ACTIVE
    assert rx.receive(corrupt(tx.send(b"h", b"p"))) is REJECT
    assert rx.status is Status.CANCELLED
    assert sum(e.kind is EventKind.INVALID_FRAME for e in rx.error_log) == 4
    with pytest.raises(SessionCancelled):
        rx.receive(tx.send(b"h", b"p"))
    with pytest.raises(SessionCancelled):
        rx.send(b"h", b"p")


def test_success_resets_failure_count():
    tx, rx = pair()
    for _ in range(3):
        rx.receive(corrupt(tx.send(b"h", b"p")))
    assert rx.receive(tx.send(b"h", b"ok")) == b"ok"
    for _ in range(3):
        rx.receive(corrupt(tx.send(b"h", b"p")))
    assert rx.status is Status.ACTIVE


def test_rekey():
    tx, rx = pair()
    old = [tx.send(b"h", b"p%d" % i) for i in range(5)]
    for f in old[:2]:
        rx.receive(f)
    for _ in range(4):
        rx.receive(corrupt(tx.send(b"h", b"p")))
    assert rx.status is Status.CANCELLED
    log_len = len(rx.error_log)
    fresh = random.Random(99).randbytes(32)
    rx.rekey(fresh)
    tx.rekey(fresh)
    assert rx.status is Status.ACTIVE and rx.send_pn == 0 and rx.last_accepted_pn == -1
    assert len(rx.error_log) == log_len
    for f in old[2:]:
        assert rx.receive(f) is REJECT
    assert rx.receive(tx.send(b"h", b"new")) == b"new"
    with pytest.raises(SessionError):
        rx.rekey(b"short")


def test_rekey_keys_differ():
    rng = random.Random(5)
    s = Session(rng.randbytes(16))
    keys = set()
    for _ in range(100):
        s.rekey(rng.randbytes(16))
        keys.add(s.key)
    assert len(keys) == 100


def test_pn_exhaustion():
    tx, _ = pair()
    tx.send_pn = PN_LIMIT
    with pytest.raises(PacketNumberExhausted):
        tx.send(b"h", b"p")


def test_nonces_never_repeat():
    tx, rx = pair()
    rng = random.Random(3)
    for _ in range(300):
        f = tx.send(b"h", rng.randbytes(5))
        if rng.random() < 0.3:
            f = corrupt(f)
        rx.receive(f)
        if rx.status is Status.CANCELLED:
            rx.rekey(rng.randbytes(16))
    assert len(tx.nonces_used) == len(set(tx.nonces_used)) == 300


def test_replay_totality_random_schedule():
    tx, rx = pair()
    rng = random.Random(4)
    frames = [tx.send(b"h", b"x") for _ in range(50)]
    accepted = []
    for _ in range(400):
        f = rng.choice(frames)
        if rx.receive(f) is not REJECT:
            assert all(f.pn > a for a in accepted)
            accepted.append(f.pn)


def test_frame_serialization():
    tx, _ = pair()
    f = tx.send(b"header", b"payload")
    assert Frame.from_bytes(f.to_bytes()) == f
    assert f.to_bytes()[:6] == bytes(6)
    with pytest.raises(ValueError):
        Frame.from_bytes(b"\x00" * 7)


def test_audit():
    assert audit([])["counts"] == {"InvalidFrame": 0, "Replay": 0}
    tx, rx = pair()
    f = tx.send(b"h", b"p")
    rx.receive(f)
    for _ in range(3):
        rx.receive(f)
    rx.receive(corrupt(tx.send(b"h", b"p")))
    summary = audit(rx.error_log)
    assert summary["counts"] == {"InvalidFrame": 1, "Replay": 3}
    assert summary["total"] == sum(summary["counts"].values()) == len(rx.error_log)
    assert summary["per_pn"] == {"0": 3, "1": 1}
    assert (summary["first_timestamp"], summary["last_timestamp"]) == (1, 4)
    assert import_log(export_log(rx.error_log)) == rx.error_log
    json.loads(export_log(rx.error_log))
