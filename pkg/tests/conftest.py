import numpy as np
import pytest

from bnpsketch.sketch import HashSpec, Sketch


def make_sketch(counts, width=None):
    """Sketch with given bucket counts and a placeholder hash identity."""
    counts = list(int(c) for c in counts)
    width = int(width) if width is not None else len(counts)
    spec = HashSpec(a=1, b=0, width=width, symbol_seed=0)
    full = np.zeros(width, dtype=np.uint64)
    full[: len(counts)] = counts
    return Sketch(spec=spec, counts=full, n=int(sum(counts)))


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
