"""
Two variance recursions
=======================

The hardware recursion weights the new squared distance by ``1/k``; the
exact variant weights it by ``1/(k-1)`` and reproduces the population
variance. This script shows how far apart they drift and why the
eccentricities only sum to 2 with the population variance.
"""

import numpy as np

from tedastream import batch_eccentricities, batch_mean, batch_variance, unrolled_oracle

rng = np.random.default_rng(0)
X = rng.normal(size=(1000, 2))

paper = [s for _, s in unrolled_oracle(X, "paper")]
exact = [s for _, s in unrolled_oracle(X, "exact")]
truth = batch_variance(X, batch_mean(X))

# %%
# The smallest case, samples 0 and 2, already differs by a factor of two.
print("stream [0], [2]:", unrolled_oracle([[0.0], [2.0]], "paper")[1][1],
      "vs", unrolled_oracle([[0.0], [2.0]], "exact")[1][1])

# %%
# After 1000 samples the paper recursion sits below the population value.
for k in (2, 10, 100, 1000):
    print(f"k={k:5d}  paper={paper[k - 1]:.6f}  exact={exact[k - 1]:.6f}")
print(f"population variance of all samples: {truth:.6f}")

# %%
# Batch eccentricities with the population variance sum to exactly 2.
print("sum of eccentricities:", batch_eccentricities(X).sum())
