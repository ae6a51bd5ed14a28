#!/usr/bin/env python3
"""Reference re-implementation of a full four-phase session.

Rebuilds the transcript file for a scenario config from scratch (own
framing, own P-256 arithmetic and RFC 6979 signing from primitives_oracle,
AES-GCM from the `cryptography` package) and writes the golden files the
C++ tests compare against. Fault plans are not modelled; configs must be
happy-path.

    python3 session_oracle.py            # rewrite tests/golden/*
    python3 session_oracle.py --check    # compare instead of writing
"""

import hashlib
import json
import pathlib
import sys

from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from primitives_oracle import (GX, GY, Q, MT19937_64, compress, derive_key, ecdsa_sign, frame, hash_fields,
                               point_mul, random_scalar)

HERE = pathlib.Path(__file__).resolve().parent
TESTS = HERE.parent
ROOT = TESTS.parent
G = (GX, GY)

DEFAULTS = {
    "seed": 1, "delta_t_ms": 2000, "tick_ms": 10, "phase_gap_ms": 60000, "start_ms": 1000000, "variant": "A",
    "ids": {"patient": "patient-0001", "hospital": "hospital-01", "doctor": "doctor-07"}, "nid": None,
    "payloads": {"m_h": b"inspection: hb 13.5 g/dL, glucose 92 mg/dL".hex(),
                 "m_b": b"sensor: hr 72 bpm, spo2 98%".hex()},
}

TYPES = ["HupMsg1", "HupMsg2", "HupMsg3", "PupMsg1", "PupMsg2", "PupMsg3",
         "TpMsg1", "TpMsg2", "TpMsg3", "CpMsg1", "CpMsg2", "CpMsg3"]
ROLE = {"hospital": 1, "cloud": 2, "patient": 3, "doctor": 4}
ROUTES = [("hospital", "cloud"), ("cloud", "hospital"), ("hospital", "cloud"),
          ("patient", "cloud"), ("cloud", "patient"), ("patient", "cloud"),
          ("doctor", "cloud"), ("cloud", "doctor"), ("doctor", "cloud"),
          ("patient", "cloud"), ("cloud", "patient"), ("patient", "cloud")]


class Rng:
    def __init__(self, seed, stream):
        self.eng = MT19937_64.from_seed_seq([seed & 0xFFFFFFFF, seed >> 32, stream])

    def fill(self, n):
        out = b""
        while len(out) < n:
            out += self.eng.next().to_bytes(8, "big")
        return out[:n]

    def scalar(self):
        return random_scalar(self.eng)


def sc(v):
    return v.to_bytes(32, "big")


def u64(t):
    return t.to_bytes(8, "big")


def report(kind, patient, payload):
    return frame([bytes([kind]), patient, payload])


def enc(key, plaintext, rng):
    nonce = rng.fill(12)
    sealed = AESGCM(key).encrypt(nonce, plaintext, None)
    return nonce + sealed  # body || tag


def dk(digest):
    return derive_key(1, digest)


def dks(scalar):
    return derive_key(2, sc(scalar))


def K(*parts):
    return hash_fields(b"tmis/key", list(parts))


def V(*parts):
    return hash_fields(b"tmis/verifier", list(parts))


def mask(sn, *parts):
    d = hash_fields(b"tmis/mask", list(parts))
    return (sn + int.from_bytes(d, "big") % Q) % Q


def sign(priv, m_enc):
    _, r, s = ecdsa_sign(priv, hash_fields(b"tmis/report", [m_enc]))
    return sc(r) + sc(s)


def dh(x, y):
    return compress(point_mul(x * y % Q, G))


def load(path):
    cfg = json.loads(json.dumps(DEFAULTS))
    raw = json.loads(pathlib.Path(path).read_text()) if path else {}
    assert not raw.get("faults"), "fault plans are out of scope for the oracle"
    for k, v in raw.items():
        if k in ("ids", "payloads"):
            cfg[k].update(v)
        elif k != "faults":
            cfg[k] = v
    return cfg


def session(cfg):
    seed = cfg["seed"]
    tick, gap = cfg["tick_ms"], cfg["phase_gap_ms"]
    id_p, id_h, id_d = (cfg["ids"][k].encode() for k in ("patient", "hospital", "doctor"))
    variant = cfg["variant"].upper()

    keys = Rng(seed, 0)
    kh, kp, kd = keys.scalar(), keys.scalar(), keys.scalar()
    rh, rc, rp, rd = Rng(seed, 1), Rng(seed, 2), Rng(seed, 3), Rng(seed, 4)

    m_h = report(1, id_p, bytes.fromhex(cfg["payloads"]["m_h"]))
    m_b_payload = bytes.fromhex(cfg["payloads"]["m_b"])
    m_b = report(2, id_p, m_b_payload)
    diag = hash_fields(b"tmis/diagnosis", [bytes.fromhex(cfg["payloads"]["m_h"]), m_b_payload])
    m_d = report(3, id_p, diag)

    nid = bytes.fromhex(cfg["nid"]) if cfg["nid"] else rh.fill(16)
    now = cfg["start_ms"]
    msgs = []  # (fields as (name, kind, value) list, sent_at)

    def send(fields):
        msgs.append(fields)
        nonlocal now
        t = now
        now += tick
        return t

    # HUP
    a = rh.scalar()
    t_h1 = send([("id_h", "b", id_h), ("a", "b", sc(a)), ("t_h1", "t", now)])
    b = rc.scalar()
    t_c2 = now
    s1 = V(id_h, sc(a), sc(b), u64(t_h1))
    e1 = enc(dk(K(id_h, sc(a), u64(t_h1))), frame([sc(b), s1, u64(t_c2)]), rc)
    send([("e1", "b", e1), ("t_c2", "t", t_c2)])
    sk_h = K(id_h, s1, dh(a, b), u64(t_c2))
    c_h = enc(dk(K(id_p, id_h, nid)), frame([m_h]), rh)
    sig_h = sign(kh, m_h)
    t_h3 = now
    s2 = V(sk_h, c_h, sig_h, u64(t_h3))
    e2 = enc(dk(sk_h), frame([id_p, s2, c_h, nid, sig_h, u64(t_h3)]), rh)
    send([("e2", "b", e2), ("t_h3", "t", t_h3)])
    sn = rc.scalar()
    now += gap

    # PUP
    t_p1 = send([("id_p", "b", id_p), ("nid", "b", nid), ("t_p1", "t", now)])
    c = rc.scalar()
    t_c5 = now
    s3 = V(nid, id_p, c_h, sig_h, sc(c), u64(t_c5))
    i = mask(sn, nid, id_p)
    e3 = enc(dks(sn), frame([sig_h, c_h, s3, id_h, sc(c), u64(t_c5)]), rc)
    send([("e3", "b", e3), ("i", "b", sc(i)), ("t_c5", "t", t_c5)])
    d = rp.scalar()
    cdg = dh(d, c)
    sk_p = K(id_p, id_h, c_h, s3, cdg, u64(t_c5))
    kpd = dk(K(id_p, id_h, nid) if variant == "A" else K(id_p, id_d, sc(sn)))
    c_p = enc(kpd, frame([m_h, m_b]), rp)
    sig_p = sign(kp, m_b)
    t_p3 = now
    s4 = V(sk_p, c_p, sig_p, s3, cdg, u64(t_p3))
    e4 = enc(dks(sn), frame([sc(d), s4, sig_p, c_p, u64(t_p3)]), rp)
    send([("e4", "b", e4), ("t_p3", "t", t_p3)])
    now += gap

    # TP
    r = rd.scalar()
    send([("id_d", "b", id_d), ("r", "b", sc(r)), ("t_d1", "t", now)])
    s = rc.scalar()
    t_c8 = now
    s5 = V(id_p, id_d, sig_h, sig_p, c_p, u64(t_c8))
    e5 = enc(dks(sn), frame([sig_p, sig_h, id_p, nid, c_p, sc(s), s5, u64(t_c8)]), rc)
    j = mask(sn, id_d, sc(r))
    send([("e5", "b", e5), ("j", "b", sc(j)), ("t_c8", "t", t_c8)])
    c_d = enc(kpd, frame([m_h, m_b, m_d]), rd)
    sig_d = sign(kd, m_d)
    t_d3 = now
    s6 = V(id_p, id_d, c_d, sig_d, sig_p, u64(t_d3))
    e6 = enc(dks(sn), frame([sig_d, c_d, s6, u64(t_d3)]), rd)
    send([("e6", "b", e6), ("t_d3", "t", t_d3)])
    now += gap

    # CP
    x = rp.scalar()
    send([("id_p", "b", id_p), ("nid", "b", nid), ("x", "b", sc(x)), ("sn_x", "b", sc(sn)), ("t_p4", "t", now)])
    y = rc.scalar()
    t_c11 = now
    xyg = dh(x, y)
    s7 = V(sk_p, id_p, id_d, c_d, xyg, sig_p, u64(t_c11))
    e7 = enc(dk(sk_p), frame([id_d, sig_d, c_d, s7, sc(y), u64(t_c11)]), rc)
    send([("e7", "b", e7), ("t_c11", "t", t_c11)])
    c_e = enc(kpd, frame([m_h, m_b, m_d]), rp)
    t_p6 = now
    s8 = V(sk_p, s7, c_e, sig_p, sig_d, xyg, u64(t_p6))
    e8 = enc(dk(sk_p), frame([c_e, s8, u64(t_p6)]), rp)
    send([("e8", "b", e8), ("t_p6", "t", t_p6)])

    pub = {name: compress(point_mul(k, G)).hex() for name, k in (("patient", kp), ("hospital", kh), ("doctor", kd))}
    return {"ids": (id_p, id_h, id_d), "public_keys": pub, "messages": msgs}


def dumps(obj):
    return json.dumps(obj, separators=(",", ":"), sort_keys=True)


def transcript_text(cfg):
    sess = session(cfg)
    id_p, id_h, id_d = sess["ids"]
    lines = [dumps({
        "kind": "header", "format": "tmis-transcript", "version": 1, "seed": cfg["seed"],
        "variant": cfg["variant"].upper(), "delta_t_ms": cfg["delta_t_ms"], "tick_ms": cfg["tick_ms"],
        "phase_gap_ms": cfg["phase_gap_ms"],
        "ids": {"patient": id_p.hex(), "hospital": id_h.hex(), "doctor": id_d.hex()},
        "public_keys": sess["public_keys"]})]
    for idx, fields in enumerate(sess["messages"]):
        src, dst = ROUTES[idx]
        rec = {"kind": "message", "index": idx, "from": src, "to": dst,
               "channel": "secure" if idx % 3 == 0 else "public", "sent_at": fields[-1][2], "type": TYPES[idx],
               "fields": {n: (v.hex() if k == "b" else v) for n, k, v in fields}}
        lines.append(dumps(rec))
    lines.append(dumps({"kind": "outcome", "status": "completed", "abort": None, "checks": {
        "hospital": ["S1"], "cloud": ["S2", "S4", "S6", "S8"], "patient": ["S3", "Sig_H", "S7", "Sig_D"],
        "doctor": ["S5", "Sig_H", "Sig_P"]}}))
    return "\n".join(lines) + "\n"


def wire(cfg, idx):
    """Serialized bytes of transmission idx."""
    fields = session(cfg)["messages"][idx]
    src, dst = ROUTES[idx]
    body = frame([v if k == "b" else u64(v) for _, k, v in fields])
    return bytes([1, idx + 1, ROLE[src], ROLE[dst], 0 if idx % 3 == 0 else 1]) + body


def campaign_summary(cfg, n):
    digests = b""
    for k in range(n):
        c = dict(cfg, seed=cfg["seed"] + k)
        digests += hashlib.sha256(transcript_text(c).encode()).digest()
    return {"sessions": n, "completed": n, "aborted": 0, "aborts_by_error": {}, "aborts_by_step": {},
            "keys_agreed": n, "reports_recovered": n, "transcript_digest": hashlib.sha256(digests).hexdigest()}


def main():
    check = "--check" in sys.argv
    golden = TESTS / "golden"
    outputs = {
        "default_transcript.jsonl": transcript_text(load(ROOT / "configs" / "default.json")),
        "variant_b_transcript.jsonl": transcript_text(load(ROOT / "configs" / "variant_b.json")),
        "campaign_seed1_n20.json": json.dumps(campaign_summary(load(None), 20), indent=2, sort_keys=True) + "\n",
        "default_wire.hex": "".join(wire(load(ROOT / "configs" / "default.json"), i).hex() + "\n" for i in range(12)),
    }
    bad = 0
    for name, text in outputs.items():
        path = golden / name
        if check:
            same = path.exists() and path.read_text() == text
            print(("ok   " if same else "DIFF ") + name)
            bad += not same
        else:
            path.write_text(text)
            print("wrote", path.relative_to(ROOT))
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
