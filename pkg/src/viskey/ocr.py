"""Glyph isolation and the 48-dimensional density/centroid feature extractor.

A denoised single-line key image is cut into per-character bounding boxes by
projection profiles, each box is stretched to a 32x32 bitmap, and every 8x8
zone contributes (density, x-centroid, y-centroid), all scaled into [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitimage import BitImage, Rect, crop, scale_nn

GLYPH_SIZE = 32
ZONE = 8  # 4x4 grid of 8x8 zones
FEATURE_LEN = 48
MIN_GLYPH_WIDTH = 2  # narrower column runs are specks, not characters


@dataclass(frozen=True)
class Glyph:
    box: Rect
    bitmap: BitImage

    def __post_init__(self):
        if self.bitmap.width != GLYPH_SIZE or self.bitmap.height != GLYPH_SIZE:
            raise ValueError(f"glyph bitmap must be {GLYPH_SIZE}x{GLYPH_SIZE}")


def segment(img: BitImage):
    """Left-to-right character boxes of a one-line image.

    The text band is the global first..last nonzero row; inside it, maximal
    nonzero column runs become glyphs, each tightened to its own row extent.
    Runs narrower than MIN_GLYPH_WIDTH columns are discarded.
    """
    row_counts = img.a.sum(axis=1)
    nonzero_rows = np.flatnonzero(row_counts)
    if nonzero_rows.size == 0:
        return []
    band_top, band_bottom = int(nonzero_rows[0]), int(nonzero_rows[-1])
    band = img.a[band_top : band_bottom + 1]
    col_counts = band.sum(axis=0)

    boxes = []
    in_run = False
    start = 0
    for j in range(len(col_counts) + 1):
        filled = j < len(col_counts) and col_counts[j] > 0
        if filled and not in_run:
            in_run, start = True, j
        elif not filled and in_run:
            in_run = False
            if j - start >= MIN_GLYPH_WIDTH:
                sub = band[:, start:j]
                rows = np.flatnonzero(sub.sum(axis=1))
                boxes.append(
                    Rect(band_top + int(rows[0]), band_top + int(rows[-1]), start, j - 1)
                )
    return boxes


def normalize_glyph(img: BitImage, box: Rect) -> Glyph:
    """Crop the box and stretch it to the 32x32 classification grid."""
    return Glyph(box, scale_nn(crop(img, box), GLYPH_SIZE, GLYPH_SIZE))


def geometric_moment(block: np.ndarray, p: int, q: int) -> float:
    """m_pq = sum_x sum_y x^p y^q f(x, y), with x = column, y = row."""
    ys, xs = np.nonzero(block)
    return float(np.sum((xs**p) * (ys**q)))


def extract_features(g: Glyph) -> np.ndarray:
    """48 features: (density, x_c, y_c) per 8x8 zone, zones row-major.

    Centroids are divided by 7 (the largest local coordinate) so every
    component lives in [0, 1]; an empty zone reports centroid (0.5, 0.5).
    """
    a = g.bitmap.a
    feats = np.empty(FEATURE_LEN)
    k = 0
    for zi in range(0, GLYPH_SIZE, ZONE):
        for zj in range(0, GLYPH_SIZE, ZONE):
            block = a[zi : zi + ZONE, zj : zj + ZONE]
            m00 = int(block.sum())
            density = m00 / (ZONE * ZONE)
            if m00 == 0:
                xc = yc = 0.5
            else:
                ys, xs = np.nonzero(block)
                xc = float(xs.mean()) / (ZONE - 1)
                yc = float(ys.mean()) / (ZONE - 1)
            feats[k : k + 3] = (density, xc, yc)
            k += 3
    return feats
