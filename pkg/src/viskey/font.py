"""Built-in 5x7 glyph set and the generator for the bundled training corpus.

The corpus is 36 classes (0-9, A-Z) times 10 font variants, pre-rendered as
32x32 PBM files named <LABEL>_<FONTID>.pbm. Variants are derived from one
hand-drawn base by thickening, shearing and resampling, so results are
reproducible without any font-rendering dependency.
"""

from __future__ import annotations

import importlib.resources
from pathlib import Path

import numpy as np

from .bitimage import BitImage, Rect, crop, scale_nn, write_pbm
from .ocr import GLYPH_SIZE

ALPHABET = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ"
FONT_IDS = tuple(f"f{i}" for i in range(10))

# 5 columns x 7 rows, '#' = ink. Confusable pairs are deliberately separated:
# 0 carries an inner diagonal, 1 and I differ in their top, B and D have a
# double-thick left stem while 8 is waisted and O is round, Q has a tail,
# N's diagonal is thickened so slanted variants keep it visible.
_GLYPHS = {
    "0": (" ### ", "#   #", "#  ##", "# # #", "##  #", "#   #", " ### "),
    "1": ("  #  ", " ##  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "),
    "2": (" ### ", "#   #", "    #", "   # ", "  #  ", " #   ", "#####"),
    "3": (" ### ", "#   #", "    #", "  ## ", "    #", "#   #", " ### "),
    "4": ("   # ", "  ## ", " # # ", "#  # ", "#####", "   # ", "   # "),
    "5": ("#####", "#    ", "#### ", "    #", "    #", "#   #", " ### "),
    "6": ("  ## ", " #   ", "#    ", "#### ", "#   #", "#   #", " ### "),
    "7": ("#####", "    #", "   # ", "  #  ", " #   ", " #   ", " #   "),
    "8": (" ### ", "#   #", "#   #", " ### ", "#   #", "#   #", " ### "),
    "9": (" ### ", "#   #", "#   #", " ####", "    #", "   # ", " ##  "),
    "A": ("  #  ", " # # ", "#   #", "#   #", "#####", "#   #", "#   #"),
    "B": ("#### ", "##  #", "##  #", "#### ", "##  #", "##  #", "#### "),
    "C": (" ### ", "#   #", "#    ", "#    ", "#    ", "#   #", " ### "),
    "D": ("#### ", "##  #", "##  #", "##  #", "##  #", "##  #", "#### "),
    "E": ("#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#####"),
    "F": ("#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#    "),
    "G": (" ### ", "#   #", "#    ", "# ###", "#   #", "#   #", " ####"),
    "H": ("#   #", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"),
    "I": (" ### ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "),
    "J": ("  ###", "   # ", "   # ", "   # ", "   # ", "#  # ", " ##  "),
    "K": ("#   #", "#  # ", "# #  ", "##   ", "# #  ", "#  # ", "#   #"),
    "L": ("#    ", "#    ", "#    ", "#    ", "#    ", "#    ", "#####"),
    "M": ("#   #", "## ##", "# # #", "# # #", "#   #", "#   #", "#   #"),
    "N": ("#   #", "##  #", "##  #", "# # #", "#  ##", "#  ##", "#   #"),
    "O": (" ### ", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "),
    "P": ("#### ", "#   #", "#   #", "#### ", "#    ", "#    ", "#    "),
    "Q": (" ### ", "#   #", "#   #", "#   #", "# # #", "#  # ", " ## #"),
    "R": ("#### ", "#   #", "#   #", "#### ", "# #  ", "#  # ", "#   #"),
    "S": (" ####", "#    ", "#    ", " ### ", "    #", "    #", "#### "),
    "T": ("#####", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  "),
    "U": ("#   #", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "),
    "V": ("#   #", "#   #", "#   #", "#   #", "#   #", " # # ", "  #  "),
    "W": ("#   #", "#   #", "#   #", "# # #", "# # #", "## ##", "#   #"),
    "X": ("#   #", "#   #", " # # ", "  #  ", " # # ", "#   #", "#   #"),
    "Y": ("#   #", "#   #", " # # ", "  #  ", "  #  ", "  #  ", "  #  "),
    "Z": ("#####", "    #", "   # ", "  #  ", " #   ", "#    ", "#####"),
}


def base_glyph(label: str) -> np.ndarray:
    rows = _GLYPHS[label]
    return np.array([[1 if ch == "#" else 0 for ch in row] for row in rows], dtype=np.uint8)


def _upscale(a, factor):
    return np.kron(a, np.ones((factor, factor), dtype=np.uint8))


def _dilate(a, dr, dc):
    out = a.copy()
    if dr:
        out[dr:, :] |= a[:-dr, :]
    if dc:
        out[:, dc:] |= a[:, :-dc]
    return out


def _shear(a, direction, maxshift=2):
    # slant: shift rows horizontally by up to maxshift px, then thicken by
    # one column so staircased diagonals stay connected
    h, w = a.shape
    out = np.zeros((h, w + maxshift + 1), dtype=np.uint8)
    for r in range(h):
        s = (r * maxshift) // (h - 1)
        if direction < 0:
            s = maxshift - s
        out[r, s : s + w] = a[r]
    return _dilate(out, 0, 1)


def _tight(a):
    img = BitImage(a)
    rows = np.flatnonzero(a.sum(axis=1))
    cols = np.flatnonzero(a.sum(axis=0))
    box = Rect(int(rows[0]), int(rows[-1]), int(cols[0]), int(cols[-1]))
    return crop(img, box)


def render_variant(label: str, font_id: str) -> BitImage:
    """One 32x32 corpus bitmap: base glyph -> variant transform -> tight crop
    -> stretch to the classification grid."""
    base = base_glyph(label)
    i = FONT_IDS.index(font_id)
    if i == 0:
        a = _upscale(base, 3)
    elif i == 1:
        a = _shear(_upscale(base, 4), +1, maxshift=1)  # near-upright slant
    elif i == 2:
        a = _dilate(_upscale(base, 3), 1, 1)
    elif i == 3:
        a = _dilate(_upscale(base, 4), 1, 1)
    elif i == 4:
        a = _shear(_upscale(base, 3), +1)
    elif i == 5:
        a = _shear(_upscale(base, 3), -1)
    elif i == 6:
        a = _dilate(_upscale(base, 3), 0, 1)  # horizontally bold
    elif i == 7:
        a = _dilate(_upscale(base, 3), 1, 0)  # vertically bold
    elif i == 8:
        a = _upscale(base, 5)[:, ::2]  # condensed
    elif i == 9:
        a = _dilate(_upscale(base, 5), 2, 2)  # heavy
    else:
        raise ValueError(f"unknown font id {font_id!r}")
    return scale_nn(_tight(a), GLYPH_SIZE, GLYPH_SIZE)


def build_corpus(directory) -> int:
    """Write all 360 corpus files into `directory`; returns the file count."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    count = 0
    for label in ALPHABET:
        for font_id in FONT_IDS:
            img = render_variant(label, font_id)
            (directory / f"{label}_{font_id}.pbm").write_bytes(write_pbm(img, "P1"))
            count += 1
    return count


def default_corpus_dir() -> Path:
    """Directory of the corpus bundled with the installed package."""
    return Path(importlib.resources.files("viskey") / "corpus")
