"""Fitting prior parameters from the sketch alone.

Zero-discount scale: maximize the closed-form marginal likelihood (seconds).
Two-parameter case: the likelihood is intractable, so parameters come from
matching sorted bucket-count profiles of simulated sketches (a few seconds
of simulation per fit).
"""

import numpy as np

from bnpsketch import (
    HashSpec,
    PriorParams,
    Sketch,
    dp_fit_theta,
    sample_pyp_sequence,
    wasserstein_fit,
)

root = np.random.SeedSequence(4040)
s1, s2, s3, s4 = root.spawn(4)

# scale fit under the zero-discount prior
sample = sample_pyp_sequence(PriorParams(0.0, 100.0), 30_000, s1)
sketch = Sketch(HashSpec.random(128, s2))
sketch.insert_ids(sample.symbols)
theta_hat, boundary = dp_fit_theta(sketch)
print(f"marginal-likelihood fit: theta_hat = {theta_hat:.1f} (true 100), "
      f"boundary_hit={boundary}")

# simulation-matching fit of (alpha, theta) on power-law data
sample = sample_pyp_sequence(PriorParams(0.5, 100.0), 50_000, s3, with_weights=False)
sketch = Sketch(HashSpec.random(128, s4))
sketch.insert_ids(sample.symbols)
fit = wasserstein_fit(sketch, seed=11)
print(f"simulation-matching fit: alpha_hat = {fit.prior.alpha:.2f} (true 0.5), "
      f"theta_hat = {fit.prior.theta:.1f} (true 100)")

surface = fit.surface
order = np.argsort(surface[:, 2])[:8]
print("\nclosest grid points (alpha, theta, mean distance):")
for idx in order:
    a, t, d = surface[idx]
    print(f"  alpha={a:4.2f}  theta={t:9.2f}  distance={d:8.3f}")
