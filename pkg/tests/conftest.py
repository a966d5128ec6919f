import numpy as np
import pytest

from viskey import classify, vcs
from viskey.bitimage import BitImage
from viskey.font import default_corpus_dir


def bits(text):
    """Build a BitImage from rows of '1'/'0' (or '#'/' ') separated by newlines."""
    rows = [r for r in text.splitlines() if r.strip("")]
    grid = [[1 if ch in "1#" else 0 for ch in row] for row in rows if row]
    return BitImage(np.array(grid, dtype=np.uint8))


def random_image(rng, w, h, density=0.5):
    return BitImage((rng.random((h, w)) < density).astype(np.uint8))


@pytest.fixture(scope="session")
def corpus_dir():
    return default_corpus_dir()


@pytest.fixture(scope="session")
def model2(corpus_dir):
    """Recognition model trained through the 2-of-2 pipeline."""
    return classify.train_model(corpus_dir, vcs.scheme_params(2), seed=100)


@pytest.fixture(scope="session")
def model9(corpus_dir):
    """Recognition model trained through the (2,9) pipeline."""
    return classify.train_model(corpus_dir, vcs.scheme_params(9), seed=200)
