"""Training through the share pipeline and 1-nearest-neighbor recognition.

Training pushes every corpus glyph through encode -> stack -> denoise ->
downsample, so the model learns characters as they actually look after
reconstruction; queries produced the same way then match by plain Euclidean
nearest neighbor.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import vcs
from .bitimage import BitImage, downsample_majority, read_pbm
from .denoise import FilterParams, adaptive_filter, default_params
from .font import ALPHABET
from .ocr import FEATURE_LEN, extract_features, normalize_glyph, segment

log = logging.getLogger(__name__)

MODEL_MAGIC = "viskey-model"


@dataclass(frozen=True)
class LabeledSample:
    label: str
    features: np.ndarray
    source_id: str

    def __post_init__(self):
        if self.label not in ALPHABET:
            raise ValueError(f"label {self.label!r} not in the 36-class alphabet")
        if len(self.features) != FEATURE_LEN:
            raise ValueError(f"feature vector must have {FEATURE_LEN} components")


@dataclass(frozen=True)
class Model:
    samples: tuple
    scheme_n: int
    feature_len: int = FEATURE_LEN
    skipped: tuple = field(default=(), compare=False)

    def without_font(self, font_id: str) -> "Model":
        """Leave-one-font-out view of the same trained model."""
        kept = tuple(s for s in self.samples if not s.source_id.endswith(f"_{font_id}"))
        return Model(kept, self.scheme_n, self.feature_len)


def euclidean_distance(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((b - a) ** 2)))


def glyph_through_pipeline(secret: BitImage, params: vcs.SchemeParams,
                           fp: FilterParams, seed: int) -> BitImage:
    """Encode a bilevel image, stack shares 1 and 2, denoise, downsample."""
    shares = vcs.encode(secret, params, seed)
    merged = vcs.reconstruct(shares.shares[:2])
    filtered = adaptive_filter(merged, fp)
    return downsample_majority(filtered, params.block_h, params.block_w)


def train_model(corpus_dir, params: vcs.SchemeParams, seed: int) -> Model:
    """Train on every <LABEL>_<FONTID>.pbm in corpus_dir.

    Each glyph runs through the full share pipeline before feature
    extraction; files whose pipeline output does not segment into exactly one
    glyph are skipped with a warning.
    """
    corpus_dir = Path(corpus_dir)
    files = sorted(corpus_dir.glob("*.pbm"))
    if not files:
        raise ValueError(f"no corpus files in {corpus_dir}")
    fp = default_params(params)
    seeds = np.random.SeedSequence(seed).spawn(len(files))
    samples = []
    skipped = []
    for path, seq in zip(files, seeds):
        stem = path.stem
        label, _, font_id = stem.partition("_")
        if label not in ALPHABET or not font_id:
            raise ValueError(f"corpus filename {path.name} not of form <LABEL>_<FONTID>.pbm")
        secret = read_pbm(path.read_bytes())
        clean = glyph_through_pipeline(secret, params, fp, seq.generate_state(1)[0])
        boxes = segment(clean)
        if len(boxes) != 1:
            log.warning("skipping %s: segmentation found %d glyphs", path.name, len(boxes))
            skipped.append(path.name)
            continue
        feats = extract_features(normalize_glyph(clean, boxes[0]))
        samples.append(LabeledSample(label, feats, stem))
    if not samples:
        raise ValueError(f"no usable corpus files in {corpus_dir}")
    return Model(tuple(samples), params.n, skipped=tuple(skipped))


def classify_1nn(x, model: Model):
    """Nearest training sample's label; ties prefer the alphabet-smaller
    label (digits before letters), then the earlier training sample."""
    if not model.samples:
        raise ValueError("empty model")
    x = np.asarray(x, dtype=float)
    mat = np.stack([s.features for s in model.samples])
    dists = np.sqrt(np.sum((mat - x) ** 2, axis=1))
    best = min(
        range(len(dists)),
        key=lambda i: (dists[i], ALPHABET.index(model.samples[i].label), i),
    )
    return model.samples[best].label, float(dists[best])


def decode_string(img: BitImage, model: Model, p: FilterParams, block) -> str:
    """Read a raw OR-stacked key image back into its text."""
    block_h, block_w = block
    filtered = adaptive_filter(img, p)
    clean = downsample_majority(filtered, block_h, block_w)
    out = []
    for box in segment(clean):
        label, _ = classify_1nn(extract_features(normalize_glyph(clean, box)), model)
        out.append(label)
    return "".join(out)


def save_model(model: Model, path) -> None:
    lines = [f"{MODEL_MAGIC} {model.feature_len} {len(model.samples)}"]
    for s in model.samples:
        vals = " ".join(f"{v:.9g}" for v in s.features)
        lines.append(f"{s.label} {s.source_id} {vals}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path) -> Model:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"empty model file {path}")
    head = lines[0].split()
    if len(head) != 3 or head[0] != MODEL_MAGIC:
        raise ValueError(f"bad model header {lines[0]!r}")
    feature_len, n_samples = int(head[1]), int(head[2])
    scheme_n = 0  # not persisted; the group record carries the scheme
    samples = []
    for line in lines[1 : n_samples + 1]:
        parts = line.split()
        label, source_id = parts[0], parts[1]
        feats = np.array([float(v) for v in parts[2:]])
        if len(feats) != feature_len:
            raise ValueError(f"sample {source_id} has {len(feats)} features")
        samples.append(LabeledSample(label, feats, source_id))
    if len(samples) != n_samples:
        raise ValueError(f"model file holds {len(samples)} samples, header says {n_samples}")
    return Model(tuple(samples), scheme_n, feature_len)
