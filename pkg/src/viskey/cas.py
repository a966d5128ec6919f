"""Central Administrative Server: key generation, share issuance, and
automatic authentication of stacked shares.

The CAS keeps the key as a string; members only ever hold share images.
Authentication OR-stacks the submitted shares, machine-reads the result
through the denoise/segment/classify pipeline and compares strings.
"""

from __future__ import annotations

import logging
import socket
import socketserver
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import vcs
from .bitimage import BitImage, read_pbm, write_pbm
from .classify import Model, decode_string
from .denoise import default_params
from .font import ALPHABET, default_corpus_dir
from .ocr import GLYPH_SIZE

log = logging.getLogger(__name__)

DEFAULT_FONT = "f0"
DEFAULT_SPACING = 4
MARGIN = 2

PENDING = "Pending"
GRANTED = "Granted"
DENIED = "Denied"

INSUFFICIENT_SHARES = "InsufficientShares"
DIMENSION_MISMATCH = "DimensionMismatch"
KEY_MISMATCH = "KeyMismatch"
UNKNOWN_GROUP = "UnknownGroup"
UNKNOWN_MEMBER = "UnknownMember"


@dataclass(frozen=True)
class AuthDecision:
    outcome: str  # GRANTED or DENIED
    reason: str = ""  # empty when granted; KeyMismatch carries the decoded text
    decoded: str = ""


@dataclass
class GroupRecord:
    group_id: str
    key: str
    params: vcs.SchemeParams
    shares: tuple  # n share BitImages, index 0 is member 1
    secret_w: int
    secret_h: int
    issued: list = field(default_factory=list)  # member indices fetched so far
    submissions: dict = field(default_factory=dict)  # member index -> BitImage
    status: str = PENDING


def generate_key(length: int, seed: int) -> str:
    """Uniform random alphanumeric key over 0-9, A-Z."""
    if length < 1:
        raise ValueError("key length must be >= 1")
    rng = np.random.default_rng(seed)
    return "".join(ALPHABET[i] for i in rng.integers(0, len(ALPHABET), size=length))


def render_key_image(key: str, corpus_dir, font_id: str = DEFAULT_FONT,
                     spacing: int = DEFAULT_SPACING) -> BitImage:
    """Lay the key's corpus glyphs on a white canvas, left to right, with
    `spacing` blank columns between glyphs and a 2-pixel white margin."""
    if not key:
        raise ValueError("empty key")
    if spacing < 2:
        raise ValueError("spacing must be >= 2 so glyphs stay separable")
    corpus_dir = Path(corpus_dir)
    glyphs = []
    for ch in key:
        path = corpus_dir / f"{ch}_{font_id}.pbm"
        if not path.exists():
            raise FileNotFoundError(f"no corpus glyph for {ch!r} in font {font_id}: {path}")
        glyphs.append(read_pbm(path.read_bytes()))
    height = 2 * MARGIN + GLYPH_SIZE
    width = 2 * MARGIN + sum(g.width for g in glyphs) + spacing * (len(glyphs) - 1)
    canvas = np.zeros((height, width), dtype=np.uint8)
    x = MARGIN
    for g in glyphs:
        canvas[MARGIN : MARGIN + g.height, x : x + g.width] = g.a
        x += g.width + spacing
    return BitImage(canvas)


def create_group(group_id: str, n: int, key_length: int, seed: int,
                 corpus_dir=None, font_id: str = DEFAULT_FONT,
                 spacing: int = DEFAULT_SPACING) -> GroupRecord:
    """Generate a key, render it, split it into n shares."""
    params = vcs.scheme_params(n)
    corpus_dir = corpus_dir if corpus_dir is not None else default_corpus_dir()
    rng_seeds = np.random.SeedSequence(seed).spawn(2)
    key = generate_key(key_length, rng_seeds[0].generate_state(1)[0])
    secret = render_key_image(key, corpus_dir, font_id, spacing)
    shares = vcs.encode(secret, params, int(rng_seeds[1].generate_state(1)[0]))
    return GroupRecord(group_id, key, params, shares.shares, secret.width, secret.height)


def authenticate(record: GroupRecord, model: Model) -> AuthDecision:
    """Stack the submitted shares and compare the machine-read key."""
    subs = record.submissions
    if len(subs) < 2:
        record.status = DENIED
        return AuthDecision(DENIED, INSUFFICIENT_SHARES)
    expected = (record.secret_h * record.params.block_h,
                record.secret_w * record.params.block_w)
    for img in subs.values():
        if (img.height, img.width) != expected:
            record.status = DENIED
            return AuthDecision(DENIED, DIMENSION_MISMATCH)
    merged = vcs.reconstruct(list(subs.values()))
    decoded = decode_string(merged, model, default_params(record.params),
                            (record.params.block_h, record.params.block_w))
    if decoded == record.key:
        record.status = GRANTED
        return AuthDecision(GRANTED)
    record.status = DENIED
    return AuthDecision(DENIED, KEY_MISMATCH, decoded)


# ---------------------------------------------------------------------------
# file persistence

def save_record(record: GroupRecord, state_dir) -> None:
    gdir = Path(state_dir) / record.group_id
    gdir.mkdir(parents=True, exist_ok=True)
    p = record.params
    lines = [
        f"key {record.key}",
        f"scheme {p.variant} {p.t} {p.n} {p.m} {p.block_h} {p.block_w}",
        f"secret {record.secret_w} {record.secret_h}",
        f"issued {' '.join(str(i) for i in record.issued)}".rstrip(),
        f"submitted {' '.join(str(i) for i in sorted(record.submissions))}".rstrip(),
        f"status {record.status}",
    ]
    (gdir / "record.txt").write_text("\n".join(lines) + "\n")
    for i, share in enumerate(record.shares, start=1):
        path = gdir / f"share_{i}.pbm"
        if not path.exists():
            path.write_bytes(write_pbm(share, "P4"))
    for i, img in record.submissions.items():
        (gdir / f"submission_{i}.pbm").write_bytes(write_pbm(img, "P4"))


def load_record(group_id: str, state_dir) -> GroupRecord:
    gdir = Path(state_dir) / group_id
    fields = {}
    for line in (gdir / "record.txt").read_text().splitlines():
        name, _, rest = line.partition(" ")
        fields[name] = rest
    sp = fields["scheme"].split()
    params = vcs.SchemeParams(sp[0], *(int(v) for v in sp[1:]))
    sw, sh = (int(v) for v in fields["secret"].split())
    shares = tuple(
        read_pbm((gdir / f"share_{i}.pbm").read_bytes()) for i in range(1, params.n + 1)
    )
    record = GroupRecord(group_id, fields["key"], params, shares, sw, sh,
                         status=fields.get("status", PENDING))
    record.issued = [int(v) for v in fields.get("issued", "").split()]
    for i in (int(v) for v in fields.get("submitted", "").split()):
        record.submissions[i] = read_pbm((gdir / f"submission_{i}.pbm").read_bytes())
    return record


# ---------------------------------------------------------------------------
# line-protocol service

class CasState:
    """Server-side group table with per-group locking and file persistence."""

    def __init__(self, state_dir, model: Model, corpus_dir=None):
        self.state_dir = Path(state_dir)
        self.model = model
        self.corpus_dir = corpus_dir if corpus_dir is not None else default_corpus_dir()
        self._records = {}
        self._locks = {}
        self._table_lock = threading.Lock()
        self.state_dir.mkdir(parents=True, exist_ok=True)
        for rec_file in self.state_dir.glob("*/record.txt"):
            gid = rec_file.parent.name
            self._records[gid] = load_record(gid, self.state_dir)

    def lock_for(self, group_id):
        with self._table_lock:
            return self._locks.setdefault(group_id, threading.Lock())

    def get(self, group_id):
        with self._table_lock:
            return self._records.get(group_id)

    def put(self, record):
        with self._table_lock:
            self._records[record.group_id] = record


class ProtocolError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        state = self.server.cas_state
        while True:
            line = self.rfile.readline()
            if not line:
                return
            try:
                reply, payload = self._dispatch(state, line.decode("utf-8").strip())
            except ProtocolError as e:
                reply, payload = f"ERR {e.code} {e}", b""
            except Exception as e:  # I/O failures close the connection
                log.exception("request failed")
                self.wfile.write(f"ERR internal {e}\n".encode())
                return
            self.wfile.write(reply.encode("utf-8") + b"\n" + payload)
            self.wfile.flush()

    def _read_exact(self, nbytes):
        data = self.rfile.read(nbytes)
        if len(data) != nbytes:
            raise ProtocolError("payload", f"expected {nbytes} payload bytes")
        return data

    def _dispatch(self, state, line):
        parts = line.split()
        if not parts:
            raise ProtocolError("empty", "empty request")
        cmd, args = parts[0].upper(), parts[1:]

        if cmd == "CREATE":
            if len(args) != 4:
                raise ProtocolError("usage", "CREATE <group_id> <n> <key_len> <seed>")
            gid, n, key_len, seed = args[0], int(args[1]), int(args[2]), int(args[3])
            with state.lock_for(gid):
                if state.get(gid) is not None:
                    raise ProtocolError("exists", f"group {gid} already exists")
                try:
                    record = create_group(gid, n, key_len, seed, state.corpus_dir)
                except ValueError as e:
                    raise ProtocolError("badscheme", str(e))
                state.put(record)
                save_record(record, state.state_dir)
            return f"OK {gid} {n}", b""

        if cmd == "FETCH":
            if len(args) != 2:
                raise ProtocolError("usage", "FETCH <group_id> <member>")
            gid, member = args[0], int(args[1])
            record = state.get(gid)
            if record is None:
                raise ProtocolError("unknowngroup", f"no group {gid}")
            if not (1 <= member <= record.params.n):
                raise ProtocolError("unknownmember", f"member must be 1..{record.params.n}")
            with state.lock_for(gid):
                if member not in record.issued:
                    record.issued.append(member)
                    save_record(record, state.state_dir)
                share = record.shares[member - 1]
                payload = write_pbm(share, "P4") + vcs.share_sidecar(
                    record.params, record.secret_w, record.secret_h, member, gid
                ).encode()
            return f"SHARE {gid} {member} {len(payload)}", payload

        if cmd == "SUBMIT":
            if len(args) != 3:
                raise ProtocolError("usage", "SUBMIT <group_id> <member> <nbytes>")
            gid, member, nbytes = args[0], int(args[1]), int(args[2])
            data = self._read_exact(nbytes)
            record = state.get(gid)
            if record is None:
                raise ProtocolError("unknowngroup", f"no group {gid}")
            if not (1 <= member <= record.params.n):
                raise ProtocolError("unknownmember", f"member must be 1..{record.params.n}")
            try:
                img = read_pbm(data)
            except ValueError as e:
                raise ProtocolError("badpbm", str(e))
            with state.lock_for(gid):
                record.submissions[member] = img
                save_record(record, state.state_dir)
                count = len(record.submissions)
            return f"ACCEPTED {count}", b""

        if cmd == "AUTH":
            if len(args) != 1:
                raise ProtocolError("usage", "AUTH <group_id>")
            gid = args[0]
            record = state.get(gid)
            if record is None:
                raise ProtocolError("unknowngroup", f"no group {gid}")
            with state.lock_for(gid):
                decision = authenticate(record, state.model)
                save_record(record, state.state_dir)
            if decision.outcome == GRANTED:
                return f"GRANTED {gid}", b""
            return f"DENIED {gid} {decision.reason}", b""

        if cmd == "RESET":
            if len(args) != 1:
                raise ProtocolError("usage", "RESET <group_id>")
            gid = args[0]
            record = state.get(gid)
            if record is None:
                raise ProtocolError("unknowngroup", f"no group {gid}")
            with state.lock_for(gid):
                record.submissions.clear()
                record.status = PENDING
                for p in (state.state_dir / gid).glob("submission_*.pbm"):
                    p.unlink()
                save_record(record, state.state_dir)
            return "OK", b""

        raise ProtocolError("unknown", f"unknown command {cmd}")


class CasServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, state: CasState):
        super().__init__(address, _Handler)
        self.cas_state = state


def serve(port: int, state_dir, model: Model, corpus_dir=None, host="127.0.0.1"):
    """Run the CAS service until interrupted."""
    state = CasState(state_dir, model, corpus_dir)
    server = CasServer((host, port), state)
    log.info("CAS listening on %s:%d, state in %s", host, port, state_dir)
    try:
        server.serve_forever()
    finally:
        server.server_close()


# ---------------------------------------------------------------------------
# protocol client helpers (used by the CLI and tests)

class CasClient:
    def __init__(self, host, port, timeout=30.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.rfile = self.sock.makefile("rb")

    def close(self):
        self.rfile.close()
        self.sock.close()

    def _request(self, line, payload=b""):
        self.sock.sendall(line.encode("utf-8") + b"\n" + payload)
        reply = self.rfile.readline().decode("utf-8").strip()
        return reply

    def create(self, gid, n, key_len, seed):
        return self._request(f"CREATE {gid} {n} {key_len} {seed}")

    def fetch(self, gid, member):
        reply = self._request(f"FETCH {gid} {member}")
        parts = reply.split()
        if parts[0] != "SHARE":
            return reply, b""
        nbytes = int(parts[3])
        payload = self.rfile.read(nbytes)
        return reply, payload

    def submit(self, gid, member, pbm_bytes):
        return self._request(f"SUBMIT {gid} {member} {len(pbm_bytes)}", pbm_bytes)

    def auth(self, gid):
        return self._request(f"AUTH {gid}")

    def reset(self, gid):
        return self._request(f"RESET {gid}")
