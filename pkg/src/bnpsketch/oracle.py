"""Ground truth from raw (non-sketched) symbol streams.

Everything here sees the actual symbols, which the sketch estimators never
do; it exists to score them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .genmodel import PriorParams, RawSample
from .numkit import DomainError

__all__ = [
    "PartitionStats",
    "good_turing_coverage",
    "partition_stats",
    "raw_bnp_coverage",
    "true_coverage",
    "true_coverage_profile",
]


@dataclass
class PartitionStats:
    """Distinct-symbol count and the frequency-of-frequencies table.

    ``m[r]`` is the number of distinct symbols observed exactly r times,
    indexed 1..n (index 0 unused); sum(m) = k and sum(r*m[r]) = n.
    """

    k: int
    m: np.ndarray
    n: int


def partition_stats(sample: RawSample) -> PartitionStats:
    """Tabulate symbol frequencies of the stream."""
    symbols = np.asarray(sample.symbols)
    n = int(symbols.size)
    if n == 0:
        return PartitionStats(k=0, m=np.zeros(1, dtype=np.int64), n=0)
    _, freqs = np.unique(symbols, return_counts=True)
    m = np.bincount(freqs, minlength=n + 1).astype(np.int64)
    m[0] = 0
    return PartitionStats(k=int(freqs.size), m=m, n=n)


def _observed_weights(sample: RawSample):
    if not sample.has_weights:
        raise DomainError("true coverage needs a sample with atom weights")
    ids, freqs = np.unique(sample.symbols, return_counts=True)
    pos = np.searchsorted(sample.atom_ids, ids)
    if ids.size and (
        pos.max(initial=-1) >= sample.atom_ids.size
        or not np.array_equal(sample.atom_ids[pos], ids)
    ):
        raise DomainError("sample contains a symbol with no recorded weight")
    return sample.atom_weights[pos], freqs


def true_coverage(sample: RawSample, r: int) -> float:
    """Total probability mass of the symbols observed exactly r times.

    r = 0 gives the missing mass, 1 minus the mass of everything observed;
    exact (truncation-free) whenever the sample records exact atom weights.
    """
    r = int(r)
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    w, freqs = _observed_weights(sample)
    if r == 0:
        return float(1.0 - w.sum())
    return float(w[freqs == r].sum())


def true_coverage_profile(sample: RawSample, r_max: int) -> np.ndarray:
    """Vector of true coverage masses for r = 0..r_max."""
    w, freqs = _observed_weights(sample)
    out = np.zeros(int(r_max) + 1)
    out[0] = 1.0 - w.sum()
    for r in range(1, out.size):
        out[r] = w[freqs == r].sum()
    return out


def raw_bnp_coverage(stats: PartitionStats, n: int, params: PriorParams, r: int) -> float:
    """Posterior-predictive coverage estimate from the raw partition.

    (theta + k*alpha)/(theta + n) for r = 0, m_r*(r - alpha)/(theta + n) for
    r >= 1: the full-data counterpart that the sketch estimators collapse to
    under a lossless hash.
    """
    r = int(r)
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    n = int(n)
    if r == 0:
        return (params.theta + stats.k * params.alpha) / (params.theta + n)
    m_r = int(stats.m[r]) if r < stats.m.size else 0
    return m_r * (r - params.alpha) / (params.theta + n)


def good_turing_coverage(stats: PartitionStats, r: int) -> float:
    """Classical frequency-smoothing baseline: (r+1) m_{r+1} / n.

    Comparison column only; never applied to sketched data.
    """
    r = int(r)
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    if stats.n == 0:
        return 1.0 if r == 0 else 0.0
    m_next = int(stats.m[r + 1]) if r + 1 < stats.m.size else 0
    return (r + 1) * m_next / stats.n
