"""Adaptive windowed black-ratio filter for OR-stacked share images.

Per pixel, the black ratio of a window clipped to the image is compared
against two cutoffs: below the white cutoff the pixel becomes white, above
the black cutoff it becomes black, and in between the window grows until the
upper size limit; a pixel that is still undecided keeps its input value.
All decisions read the input raster only, so visit order is irrelevant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitimage import BitImage
from .vcs import TWO_OF_TWO, SchemeParams


@dataclass(frozen=True)
class FilterParams:
    white_cutoff: float
    black_cutoff: float
    initial_window: int = 3
    max_window: int = 11
    growth_step: int = 2

    def __post_init__(self):
        if not (0 < self.white_cutoff < self.black_cutoff < 1):
            raise ValueError(
                f"need 0 < white_cutoff < black_cutoff < 1, got "
                f"{self.white_cutoff}, {self.black_cutoff}"
            )
        if self.initial_window % 2 == 0 or self.max_window % 2 == 0:
            raise ValueError("window sizes must be odd")
        if self.initial_window < 3 or self.max_window < self.initial_window:
            raise ValueError("need 3 <= initial_window <= max_window")
        if self.growth_step % 2:
            raise ValueError("growth_step must be even")


def default_params(params: SchemeParams) -> FilterParams:
    """Cutoffs derived from the scheme's stacked ink densities.

    d_w is the expected stacked black density of a white region, d_b the
    minimum stacked density of a black region; the cutoffs sit at one-third
    margins inside the (d_w, d_b) gap.
    """
    if params.variant == TWO_OF_TWO:
        d_w, d_b = 0.5, 1.0
    else:
        d_w = (params.t - 1) / params.m
        d_b = (2 * params.t - 3) / params.m
    gap = d_b - d_w
    return FilterParams(d_w + gap / 3, d_b - gap / 3)


def _window_counts(cum, i0, i1, j0, j1):
    # cum is the zero-padded 2-d prefix sum; slices are half-open row/col
    # bounds per pixel (arrays).
    return cum[i1, j1] - cum[i0, j1] - cum[i1, j0] + cum[i0, j0]


def adaptive_filter(img: BitImage, p: FilterParams) -> BitImage:
    """Vectorized over pixels, iterating window sizes from initial to max.

    Comparisons are strict: a ratio strictly below the white cutoff decides
    white, strictly above the black cutoff decides black; a ratio exactly at
    a cutoff stays indecisive and the window keeps growing.
    """
    a = img.a
    h, w = a.shape
    cum = np.zeros((h + 1, w + 1), dtype=np.int64)
    np.cumsum(np.cumsum(a, axis=0), axis=1, out=cum[1:, 1:])

    rows = np.arange(h)[:, None]
    cols = np.arange(w)[None, :]
    out = a.copy()
    undecided = np.ones((h, w), dtype=bool)

    win = p.initial_window
    while True:
        r = win // 2
        i0 = np.maximum(rows - r, 0)
        i1 = np.minimum(rows + r + 1, h)
        j0 = np.maximum(cols - r, 0)
        j1 = np.minimum(cols + r + 1, w)
        area = (i1 - i0) * (j1 - j0)
        black = _window_counts(cum, np.broadcast_to(i0, (h, w)), np.broadcast_to(i1, (h, w)),
                               np.broadcast_to(j0, (h, w)), np.broadcast_to(j1, (h, w)))
        ratio = black / area
        white_now = undecided & (ratio < p.white_cutoff)
        black_now = undecided & (ratio > p.black_cutoff)
        out[white_now] = 0
        out[black_now] = 1
        undecided &= ~(white_now | black_now)
        if win >= p.max_window or not undecided.any():
            break
        win += p.growth_step
    # pixels still undecided keep their input value (out started as a copy)
    return BitImage(out)
