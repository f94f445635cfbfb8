"""Command-line harness.

Exit codes: 0 success, 1 cryptographic rejection or an outcome that differs
from ``--expect`` / the expected table, 2 usage error. All randomness comes
from ``--seed`` (default 0), so identical arguments give identical output.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .aead_ccm import CcmError, CcmParams, ccm_decrypt, ccm_encrypt, check_vector, load_vectors
from .attacks import (
    AttackResult,
    Status,
    attack_enci_bits,
    attack_enck_bits,
    attack_padding_oracle,
    attack_replay,
    attack_semantic_flip,
    format_matrix,
    run_matrix,
)
from .bitcore import BLOCK_BITS, BitString, flip_bits
from .formatting import INVALID, FormatRule
from .oracle import Oracle, OracleMode
from .schemes import CipherMode, Order, Scheme, SchemeConfig
from .session import REJECT, Frame, Session, SessionCancelled, audit, export_log, import_log

DEFAULT_SEED = 0


def _hex(text: str) -> bytes:
    try:
        return bytes.fromhex(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not byte-aligned hex: {text!r}") from None


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_ccm_encrypt(args) -> int:
    params = CcmParams(len(args.nonce), args.tlen)
    print(ccm_encrypt(args.key, params, args.nonce, args.adata, args.payload).hex())
    return 0


def cmd_ccm_decrypt(args) -> int:
    params = CcmParams(len(args.nonce), args.tlen)
    out = ccm_decrypt(args.key, params, args.nonce, args.adata, args.ciphertext)
    if out is INVALID:
        print("INVALID")
        return 1
    print(out.hex())
    return 0


def cmd_vectors(args) -> int:
    failures = 0
    total = 0
    for i, v in enumerate(load_vectors(args.file), 1):
        ok = check_vector(v)
        total += 1
        failures += not ok
        print(f"{'PASS' if ok else 'FAIL'} {v.label or f'vector {i}'}")
    print(f"{total - failures}/{total} passed")
    return 1 if failures or not total else 0


_ATTACK_DEFAULTS = {
    "enck": (Order.AFE, FormatRule.ENCK, CipherMode.OTP),
    "enci": (Order.AFE, FormatRule.ENCI, CipherMode.OTP),
    "padding-oracle": (Order.ENCRYPT_ONLY, FormatRule.PAD3, CipherMode.CBC),
    "semantic-flip": (Order.ENCRYPT_ONLY, FormatRule.PAD2, CipherMode.OTP),
}


def _attack_config(args) -> SchemeConfig:
    order, rule, cipher = _ATTACK_DEFAULTS[args.name]
    return SchemeConfig(
        Order(args.order) if args.order else order,
        FormatRule(args.rule) if args.rule else rule,
        CipherMode(args.cipher) if args.cipher else cipher,
        args.tag_bits,
    )


def _run_attack(args, rng: random.Random) -> tuple[AttackResult, dict]:
    extra: dict = {}
    if args.name == "replay":
        key = rng.randbytes(16)
        sender, receiver = Session(key), Session(key)
        frame = sender.send(b"hdr", b"transfer 100")
        extra["first_delivery"] = "ACCEPT" if receiver.receive(frame) is not REJECT else "REJECT"
        res = attack_replay(receiver, frame)
        extra["receiver_log"] = [e.to_json() for e in receiver.error_log]
        return res, extra

    cfg = _attack_config(args)
    scheme = Scheme.generate(cfg, rng)
    oracle = Oracle(scheme, args.mode)

    if args.name == "semantic-flip":
        p = BitString.from_bytes(b"no ")
        w = scheme.protect(p, rng)
        forged = attack_semantic_flip(w, 0, p, BitString.from_bytes(b"yes"), cfg.cipher)
        out = scheme.unprotect(forged)
        got = out.plaintext[:24] if out.accepted and len(out.plaintext) >= 24 else None
        ok = got == BitString.from_bytes(b"yes")
        res = AttackResult("semantic-flip", Status.SUCCESS if ok else Status.FAILED, 1,
                           out.plaintext if out.accepted else None, config=cfg.describe())
        extra["receiver_outcome"] = out.outcome.value
        return res, extra

    if args.name == "padding-oracle":
        bits = args.blocks * BLOCK_BITS
    else:
        bits = args.bits
    p = BitString.random(bits, rng)
    w = scheme.protect(p, rng)
    if args.name == "enck":
        res = attack_enck_bits(oracle, w, range(bits))
    elif args.name == "enci":
        res = attack_enci_bits(oracle, w, range(bits))
    else:
        res = attack_padding_oracle(oracle, w, bits)
    extra["ground_truth_match"] = res.status is Status.SUCCESS and res.recovered == p
    return res, extra


def cmd_attack(args) -> int:
    rng = random.Random(args.seed)
    res, extra = _run_attack(args, rng)
    report = res.to_json()
    report.update(extra)
    if res.note:
        report["note"] = res.note
    _emit(report)
    if args.expect and res.status.value.lower() != args.expect:
        return 1
    return 0


def cmd_matrix(args) -> int:
    rows = run_matrix(seed=args.seed, trials=args.trials, bits=args.bits,
                      manipulations=args.manipulations, mode=OracleMode(args.mode))
    if args.json:
        _emit([r.to_json() for r in rows])
    else:
        print(format_matrix(rows))
    return 0 if all(r.matches for r in rows) else 1


def cmd_session_demo(args) -> int:
    rng = random.Random(args.seed)
    key = rng.randbytes(16)
    sender, receiver = Session(key), Session(key)
    transcript = []
    accepted: list[Frame] = []
    try:
        for i in range(args.frames):
            frame = sender.send(b"hdr", f"frame {i}".encode())
            if i < args.tamper:
                bits = BitString.from_bytes(frame.ciphertext)
                bad = flip_bits(bits, {rng.randrange(len(bits))}).to_bytes()
                frame = Frame(frame.pn, frame.adata, bad)
                label = "tampered"
            else:
                label = "genuine"
            answer = receiver.receive(frame)
            ok = answer is not REJECT
            if ok:
                accepted.append(frame)
            transcript.append({"pn": frame.pn, "delivery": label, "response": "ACCEPT" if ok else "REJECT"})
        for j in range(args.replay):
            if not accepted:
                break
            frame = accepted[j % len(accepted)]
            res = attack_replay(receiver, frame)
            transcript.append({"pn": frame.pn, "delivery": "replay",
                               "response": "ACCEPT" if res.status is Status.SUCCESS else "REJECT"})
    except SessionCancelled:
        transcript.append({"event": "session cancelled"})
    summary = audit(receiver.error_log)
    if args.log_out:
        Path(args.log_out).write_text(export_log(receiver.error_log))
    if args.json:
        _emit({"transcript": transcript, "status": receiver.status.value, "audit": summary})
    else:
        for t in transcript:
            if "event" in t:
                print(t["event"])
            else:
                print(f"pn={t['pn']:<4} {t['delivery']:<9} {t['response']}")
        print(f"receiver status: {receiver.status.value}")
        print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_audit(args) -> int:
    log = import_log(Path(args.file).read_text())
    _emit(audit(log))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="authenc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("ccm-encrypt", "ccm-decrypt"):
        p = sub.add_parser(name)
        p.add_argument("--key", type=_hex, required=True)
        p.add_argument("--nonce", type=_hex, required=True)
        p.add_argument("--adata", type=_hex, default=b"")
        if name == "ccm-encrypt":
            p.add_argument("--payload", type=_hex, required=True)
        else:
            p.add_argument("--ciphertext", type=_hex, required=True)
        p.add_argument("--tlen", type=int, default=8, help="tag length in bytes")
        p.set_defaults(func=cmd_ccm_encrypt if name == "ccm-encrypt" else cmd_ccm_decrypt)

    p = sub.add_parser("vectors", help="check a CCM vector file")
    p.add_argument("--file", required=True)
    p.set_defaults(func=cmd_vectors)

    p = sub.add_parser("attack", help="run one attack and print a JSON report")
    p.add_argument("--name", required=True,
                   choices=["enck", "enci", "padding-oracle", "replay", "semantic-flip"])
    p.add_argument("--order", choices=[o.value for o in Order])
    p.add_argument("--rule", choices=[r.value for r in FormatRule])
    p.add_argument("--cipher", choices=[c.value for c in CipherMode])
    p.add_argument("--mode", choices=[m.value for m in OracleMode], default="leaky")
    p.add_argument("--tag-bits", type=int, default=64)
    p.add_argument("--bits", type=int, default=64, help="plaintext bits for enck/enci")
    p.add_argument("--blocks", type=int, default=3, help="data blocks for padding-oracle")
    p.add_argument("--expect", choices=["success", "inconclusive", "failed"])
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("matrix", help="composition-order table, checked by attack")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--bits", type=int, default=64)
    p.add_argument("--manipulations", type=int, default=10_000)
    p.add_argument("--mode", choices=[m.value for m in OracleMode], default="leaky")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("session-demo", help="replay and tamper handling on a CCM channel")
    p.add_argument("--frames", type=int, default=5)
    p.add_argument("--tamper", type=int, default=0)
    p.add_argument("--replay", type=int, default=0)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--log-out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_session_demo)

    p = sub.add_parser("audit", help="summarize an exported error log")
    p.add_argument("--file", required=True)
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CcmError, ValueError) as exc:
        parser.error(str(exc))
    return 2


if __name__ == "__main__":
    sys.exit(main())
