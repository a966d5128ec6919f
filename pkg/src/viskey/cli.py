"""Single `viskey` executable exposing every pipeline stage and the service.

Exit status: 0 success, 1 domain error, 2 usage error. All randomness is
controlled through --seed flags so every stage is reproducible.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import cas, classify, vcs
from .bitimage import downsample_majority, read_pbm, write_pbm
from .denoise import FilterParams, adaptive_filter, default_params
from .font import default_corpus_dir
from .ocr import extract_features, normalize_glyph, segment


def _read(path):
    return read_pbm(Path(path).read_bytes())


def _write(path, img, variant):
    Path(path).write_bytes(write_pbm(img, variant))


def _filter_params(args, params=None):
    if params is not None:
        fp = default_params(params)
    else:
        fp = FilterParams(2 / 3, 5 / 6)
    overrides = {}
    if args.white_cutoff is not None:
        overrides["white_cutoff"] = args.white_cutoff
    if args.black_cutoff is not None:
        overrides["black_cutoff"] = args.black_cutoff
    if args.max_window is not None:
        overrides["max_window"] = args.max_window
    if overrides:
        fp = FilterParams(
            overrides.get("white_cutoff", fp.white_cutoff),
            overrides.get("black_cutoff", fp.black_cutoff),
            fp.initial_window,
            overrides.get("max_window", fp.max_window),
            fp.growth_step,
        )
    return fp


def _add_filter_flags(sp):
    sp.add_argument("--white-cutoff", type=float, default=None)
    sp.add_argument("--black-cutoff", type=float, default=None)
    sp.add_argument("--max-window", type=int, default=None)


def build_parser():
    ap = argparse.ArgumentParser(prog="viskey")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate a random alphanumeric key")
    p.add_argument("--length", type=int, default=6)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("render", help="render a key string as a PBM image")
    p.add_argument("key")
    p.add_argument("--corpus", default=None)
    p.add_argument("--font", default=cas.DEFAULT_FONT)
    p.add_argument("--spacing", type=int, default=cas.DEFAULT_SPACING)
    p.add_argument("--out", required=True)

    p = sub.add_parser("encode", help="split a PBM secret into shares")
    p.add_argument("image")
    p.add_argument("--scheme", type=int, required=True, help="share count n")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--group-id", default="-")

    p = sub.add_parser("reconstruct", help="OR-stack share PBMs")
    p.add_argument("shares", nargs="+")
    p.add_argument("--out", required=True)

    p = sub.add_parser("denoise", help="adaptive-filter a stacked PBM")
    p.add_argument("image")
    p.add_argument("--sidecar", default=None, help="share sidecar to derive defaults")
    _add_filter_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("segment", help="print glyph bounding boxes")
    p.add_argument("image")

    p = sub.add_parser("features", help="print the 48 features of a glyph image")
    p.add_argument("image")

    p = sub.add_parser("train", help="train a recognition model")
    p.add_argument("--corpus", default=None, help="directory of <LABEL>_<FONTID>.pbm")
    p.add_argument("--scheme", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("classify", help="classify one glyph image")
    p.add_argument("image")
    p.add_argument("--model", required=True)

    p = sub.add_parser("decode", help="read a stacked key image back to text")
    p.add_argument("image")
    p.add_argument("--model", required=True)
    p.add_argument("--scheme", type=int, required=True)
    _add_filter_flags(p)

    for name in ("create", "fetch", "submit", "auth"):
        p = sub.add_parser(name, help=f"{name.upper()} against a running CAS")
        p.add_argument("--host", default="127.0.0.1")
        p.add_argument("--port", type=int, required=True)
        p.add_argument("group_id")
        if name == "create":
            p.add_argument("n", type=int)
            p.add_argument("key_len", type=int)
            p.add_argument("seed", type=int)
        elif name == "fetch":
            p.add_argument("member", type=int)
            p.add_argument("--out", required=True)
        elif name == "submit":
            p.add_argument("member", type=int)
            p.add_argument("share")

    p = sub.add_parser("serve", help="run the CAS service")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", default=None)
    p.add_argument("--host", default="127.0.0.1")

    p = sub.add_parser("demo", help="full create/distribute/authenticate story")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--key-len", type=int, default=6)
    p.add_argument("--corpus", default=None)
    return ap


def _corpus(arg):
    return Path(arg) if arg else default_corpus_dir()


def run_cli(argv) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0

    try:
        return _run(args)
    except (ValueError, FileNotFoundError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def _run(args) -> int:
    cmd = args.command

    if cmd == "keygen":
        print(cas.generate_key(args.length, args.seed))
        return 0

    if cmd == "render":
        img = cas.render_key_image(args.key, _corpus(args.corpus), args.font, args.spacing)
        _write(args.out, img, "P1")
        return 0

    if cmd == "encode":
        params = vcs.scheme_params(args.scheme)
        secret = _read(args.image)
        shares = vcs.encode(secret, params, args.seed)
        for i, share in enumerate(shares.shares, start=1):
            _write(f"{args.out_prefix}_{i}.pbm", share, "P4")
            Path(f"{args.out_prefix}_{i}.txt").write_text(
                vcs.share_sidecar(params, secret.width, secret.height, i, args.group_id)
            )
        print(f"wrote {params.n} shares to {args.out_prefix}_*.pbm")
        return 0

    if cmd == "reconstruct":
        merged = vcs.reconstruct([_read(p) for p in args.shares])
        _write(args.out, merged, "P1")
        return 0

    if cmd == "denoise":
        img = _read(args.image)
        params = None
        if args.sidecar:
            params, *_ = vcs.parse_sidecar(Path(args.sidecar).read_text())
        fp = _filter_params(args, params)
        _write(args.out, adaptive_filter(img, fp), "P1")
        return 0

    if cmd == "segment":
        for box in segment(_read(args.image)):
            print(f"{box.top} {box.bottom} {box.left} {box.right}")
        return 0

    if cmd == "features":
        img = _read(args.image)
        boxes = segment(img)
        if len(boxes) != 1:
            print(f"error: expected 1 glyph, found {len(boxes)}", file=sys.stderr)
            return 1
        feats = extract_features(normalize_glyph(img, boxes[0]))
        print(",".join(f"{v:.6f}" for v in feats))
        return 0

    if cmd == "train":
        params = vcs.scheme_params(args.scheme)
        model = classify.train_model(_corpus(args.corpus), params, args.seed)
        classify.save_model(model, args.out)
        print(f"trained {len(model.samples)} samples ({len(model.skipped)} skipped)")
        return 0

    if cmd == "classify":
        model = classify.load_model(args.model)
        img = _read(args.image)
        boxes = segment(img)
        if len(boxes) != 1:
            print(f"error: expected 1 glyph, found {len(boxes)}", file=sys.stderr)
            return 1
        label, dist = classify.classify_1nn(
            extract_features(normalize_glyph(img, boxes[0])), model
        )
        print(f"{label} {dist:.6f}")
        return 0

    if cmd == "decode":
        model = classify.load_model(args.model)
        params = vcs.scheme_params(args.scheme)
        fp = _filter_params(args, params)
        text = classify.decode_string(
            _read(args.image), model, fp, (params.block_h, params.block_w)
        )
        print(text)
        return 0

    if cmd in ("create", "fetch", "submit", "auth"):
        client = cas.CasClient(args.host, args.port)
        try:
            if cmd == "create":
                print(client.create(args.group_id, args.n, args.key_len, args.seed))
            elif cmd == "fetch":
                reply, payload = client.fetch(args.group_id, args.member)
                print(reply)
                if payload:
                    Path(args.out).write_bytes(payload)
            elif cmd == "submit":
                print(client.submit(args.group_id, args.member,
                                    Path(args.share).read_bytes()))
            else:
                print(client.auth(args.group_id))
        finally:
            client.close()
        return 0

    if cmd == "serve":
        model = classify.load_model(args.model)
        cas.serve(args.port, args.state, model, _corpus(args.corpus), args.host)
        return 0

    if cmd == "demo":
        return _demo(args)

    raise AssertionError(f"unhandled command {cmd}")


def _demo(args) -> int:
    corpus = _corpus(args.corpus)
    params = vcs.scheme_params(args.n)
    print(f"scheme: n={params.n} m={params.m} block={params.block_h}x{params.block_w}")
    record = cas.create_group("demo", args.n, args.key_len, args.seed, corpus)
    print(f"key: {record.key}")
    print(f"shares: {params.n} of {record.shares[0].width}x{record.shares[0].height}")
    model = classify.train_model(corpus, params, args.seed + 1)
    print(f"model: {len(model.samples)} samples")
    record.submissions[1] = record.shares[0]
    record.submissions[2] = record.shares[1]
    decision = cas.authenticate(record, model)
    if decision.outcome == cas.GRANTED:
        print("AUTH: GRANTED")
        return 0
    print(f"AUTH: DENIED {decision.reason} {decision.decoded}")
    return 1


def main():
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
