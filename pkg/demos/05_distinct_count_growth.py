"""Growth of the distinct-symbol count under different tail weights.

Under a zero discount the count grows logarithmically; with discount alpha
it grows like n^alpha.  One sequential chain per configuration traces the
whole trajectory; the log-log slopes over the last two decades recover the
discount.
"""

import numpy as np

from bnpsketch import PriorParams, expected_distinct_exact
from bnpsketch.genmodel import sample_distinct_pairs

N_MAX = 100_000
marks = np.unique(np.logspace(3, 5, 9).astype(np.int64))

print(f"{'alpha':>6} {'K at 1e3':>9} {'K at 1e4':>9} {'K at 1e5':>9} "
      f"{'slope':>6} {'E[K] at 1e5':>12}")
for alpha in (0.0, 0.25, 0.5, 0.75):
    params = PriorParams(alpha, 1.0)
    rng = np.random.default_rng(50 + int(100 * alpha))
    k = np.ones(16, dtype=np.int64)
    recorded = np.zeros((len(marks), 16))
    nxt = 0
    for i in range(2, N_MAX + 1):
        p = (params.theta + params.alpha * k) / (params.theta + i - 1)
        k += rng.random(16) < p
        if nxt < len(marks) and i == marks[nxt]:
            recorded[nxt] = k
            nxt += 1
    mean_traj = recorded.mean(axis=1)
    slope = np.polyfit(np.log(marks.astype(float)), np.log(mean_traj), 1)[0]
    expected = expected_distinct_exact(N_MAX, params)
    print(
        f"{alpha:6.2f} {mean_traj[0]:9.1f} {mean_traj[4]:9.1f} "
        f"{mean_traj[-1]:9.1f} {slope:6.3f} {expected:12.1f}"
    )

print("\nslopes near 0 (log growth), 0.25, 0.5 and 0.75 match the discounts;")
print("sample_distinct_pairs exposes the same chains for Monte Carlo use:")
k_cr, k_c = sample_distinct_pairs(1000, 10, PriorParams(0.5, 1.0), 5, np.random.default_rng(1))
print(f"  five chains read at depths 990 and 1000: {k_cr.tolist()} -> {k_c.tolist()}")
