"""2-of-2 and Latin-square (2,n) visual threshold schemes.

The (2,n) construction (n = 3t, t >= 3) builds basis matrices from an
idempotent Latin square of order t: a 3 x t^2 arrangement is reduced by
deleting its t constant columns, the surviving columns are read as blocks of
a design on 3t treatments, and the treatment/block incidence matrix is the
black-pixel basis. Pixel expansion is m = t(t-1) = n(n-3)/9.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitimage import BitImage, DimensionError

TWO_OF_TWO = "2of2"
TWO_OF_N = "2ofn"


@dataclass(frozen=True)
class SchemeParams:
    variant: str
    t: int  # Latin-square order, 0 for 2of2
    n: int  # number of shares
    m: int  # pixel expansion (subpixels per secret pixel)
    block_h: int
    block_w: int


@dataclass(frozen=True)
class LatinSquare:
    t: int
    cells: tuple  # t rows of t values in 1..t

    def is_valid(self):
        full = set(range(1, self.t + 1))
        rows_ok = all(set(row) == full for row in self.cells)
        cols_ok = all({row[j] for row in self.cells} == full for j in range(self.t))
        diag_ok = all(self.cells[i][i] == i + 1 for i in range(self.t))
        return rows_ok and cols_ok and diag_ok


@dataclass(frozen=True)
class BasisMatrices:
    s0: np.ndarray  # n x m, white pixel
    s1: np.ndarray  # n x m, black pixel


@dataclass(frozen=True)
class ShareSet:
    params: SchemeParams
    shares: tuple  # n BitImages at expanded resolution
    secret_w: int
    secret_h: int


def _block_geometry(m):
    # largest divisor of m not exceeding floor(sqrt(m))
    best = 1
    d = 1
    while d * d <= m:
        if m % d == 0:
            best = d
        d += 1
    return best, m // best


def scheme_params(n: int) -> SchemeParams:
    """Parameters for the supported share counts: n = 2 or n = 3t, t >= 3."""
    if n == 2:
        return SchemeParams(TWO_OF_TWO, 0, 2, 2, 1, 2)
    if n >= 9 and n % 3 == 0:
        t = n // 3
        m = t * (t - 1)
        bh, bw = _block_geometry(m)
        return SchemeParams(TWO_OF_N, t, n, m, bh, bw)
    raise ValueError(
        f"unsupported share count {n}: admissible counts are 2 or any multiple "
        "of 3 that is at least 9 (9, 12, 15, ...)"
    )


def idempotent_latin_square(t: int) -> LatinSquare:
    """Lexicographically smallest (row-major) Latin square of order t with
    diagonal 1..t, found by deterministic backtracking."""
    if t < 3:
        raise ValueError(f"order must be >= 3, got {t}")
    cells = [[0] * t for _ in range(t)]
    for i in range(t):
        cells[i][i] = i + 1

    def fill(pos):
        if pos == t * t:
            return True
        i, j = divmod(pos, t)
        if i == j:
            return fill(pos + 1)
        used_row = set(cells[i])
        used_col = {cells[r][j] for r in range(t)}
        for v in range(1, t + 1):
            if v not in used_row and v not in used_col:
                cells[i][j] = v
                if fill(pos + 1):
                    return True
                cells[i][j] = 0
        return False

    if not fill(0):
        raise ValueError(f"no idempotent latin square of order {t}")
    return LatinSquare(t, tuple(tuple(row) for row in cells))


def basis_matrices(t: int) -> BasisMatrices:
    """Basis matrices of the (2, 3t) scheme, in surviving-column order."""
    if t < 3:
        raise ValueError(f"order must be >= 3, got {t}")
    ls = idempotent_latin_square(t)
    # 3 x t^2 arrangement: symbols repeated, 1..t cycled, Latin-square rows.
    row1 = [a for a in range(1, t + 1) for _ in range(t)]
    row2 = [b for _ in range(t) for b in range(1, t + 1)]
    row3 = [v for row in ls.cells for v in row]
    cols = [
        (row1[j], row2[j], row3[j])
        for j in range(t * t)
        if not (row1[j] == row2[j] == row3[j])
    ]
    assert len(cols) == t * (t - 1)
    n, m = 3 * t, t * (t - 1)
    s1 = np.zeros((n, m), dtype=np.uint8)
    for j, col in enumerate(cols):
        for a, b in enumerate(col, start=1):
            # treatment (a, b) -> v_{t(a-1)+b}, 1-based
            s1[t * (a - 1) + b - 1, j] = 1
    s0 = np.zeros((n, m), dtype=np.uint8)
    s0[:, : t - 1] = 1
    return BasisMatrices(s0, s1)


def scheme_basis(params: SchemeParams) -> BasisMatrices:
    if params.variant == TWO_OF_TWO:
        s0 = np.array([[1, 0], [1, 0]], dtype=np.uint8)
        s1 = np.array([[1, 0], [0, 1]], dtype=np.uint8)
        return BasisMatrices(s0, s1)
    return basis_matrices(params.t)


def encode(secret: BitImage, params: SchemeParams, seed: int) -> ShareSet:
    """Split a secret into n shares.

    Each secret pixel draws one uniformly random column permutation of the
    appropriate basis matrix; the permuted row i fills share i's subpixel
    block row-major. Randomness comes from numpy's seeded PCG64 generator,
    one permutation per pixel in row-major pixel order.
    """
    basis = scheme_basis(params)
    rng = np.random.default_rng(seed)
    h, w = secret.height, secret.width
    npix = h * w
    m = params.m
    perms = rng.permuted(np.tile(np.arange(m), (npix, 1)), axis=1)
    colors = secret.a.reshape(-1)  # 0/1 per pixel

    bh, bw = params.block_h, params.block_w
    shares = []
    for i in range(params.n):
        rows = np.where(colors[:, None] == 1, basis.s1[i][perms], basis.s0[i][perms])
        blocks = rows.reshape(h, w, bh, bw)
        share = blocks.transpose(0, 2, 1, 3).reshape(h * bh, w * bw)
        shares.append(BitImage(share))
    return ShareSet(params, tuple(shares), w, h)


def reconstruct(shares) -> BitImage:
    """OR-stack two or more shares; output stays at expanded resolution."""
    shares = list(shares)
    if len(shares) < 2:
        raise ValueError(f"need at least 2 shares, got {len(shares)}")
    from .bitimage import or_merge

    return or_merge(shares)


def share_sidecar(params: SchemeParams, secret_w, secret_h, share_index, group_id) -> str:
    """One-line text header accompanying a serialized share."""
    return (
        f"{params.variant} {params.t} {params.n} {params.m} "
        f"{params.block_h} {params.block_w} {secret_w} {secret_h} "
        f"{share_index} {group_id}\n"
    )


def parse_sidecar(line: str):
    parts = line.split()
    if len(parts) != 10:
        raise ValueError(f"sidecar must have 10 fields, got {len(parts)}")
    variant = parts[0]
    t, n, m, bh, bw, sw, sh, idx = (int(p) for p in parts[1:9])
    params = SchemeParams(variant, t, n, m, bh, bw)
    expected = scheme_params(n)
    if params != expected:
        raise ValueError(f"sidecar parameters {params} inconsistent with n={n}")
    return params, sw, sh, idx, parts[9]
