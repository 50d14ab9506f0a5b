"""Estimate the missing mass of a stream seen only through a tiny sketch.

A synthetic stream of 50,000 tokens is hashed into 128 bucket counts; the
estimator never sees the tokens, only the 128 numbers, yet recovers the
probability that the next token is a brand-new symbol.
"""

import numpy as np

from bnpsketch import (
    HashSpec,
    PriorParams,
    Sketch,
    dp_report,
    sample_pyp_sequence,
    true_coverage,
)

N = 50_000
WIDTH = 128

print(f"{'theta':>8} {'true p0':>10} {'estimate':>10} {'theta_hat':>10}")
for theta in (10.0, 100.0, 1000.0):
    root = np.random.SeedSequence(20260810 + int(theta))
    s_data, s_hash = root.spawn(2)

    sample = sample_pyp_sequence(PriorParams(alpha=0.0, theta=theta), N, s_data)
    truth = true_coverage(sample, 0)

    sketch = Sketch(HashSpec.random(WIDTH, s_hash))
    sketch.insert_ids(sample.symbols)

    report = dp_report(sketch, fit="eb-mle", r_max=3)
    print(
        f"{theta:8.0f} {truth:10.5f} {report.coverage[0]:10.5f} "
        f"{report.prior.theta:10.2f}"
    )

print()
print("coverage of orders 0..3 for the last run (sums to ~1 with the rest):")
for r, value in report.coverage.items():
    print(f"  order {r}: estimated mass {value:.5f}")
print(f"estimated distinct symbols: {report.distinct:.0f}")
