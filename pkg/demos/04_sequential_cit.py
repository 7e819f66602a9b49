"""Sequential conditional-independence testing vs the fixed-n habit.

The null is X independent of Y given Z.  Residuals from two online
regressions (X on Z, Y on Z) are multiplied; their running mean, pushed
through the time-uniform boundary, gives an anytime p-value.  The fixed-n
test applied afresh as data accumulate has no such protection: its
cumulative false-rejection rate climbs steadily past its nominal level.

Reduced scale (horizon 2000, 150 replications); the acceptance suite runs
the full-size version.
"""

import time

import numpy as np

from avinfer import ExperimentConfig, run_cit_experiment

t0 = time.time()
print("=== Null DGP: X = sin(2u) + e_x, Y = u^2/2 + e_y, u = z1 (d = 1) ===\n")
null_cfg = ExperimentConfig(
    kind="cit-null", d=1, regressor="knn", m=100, horizon=2000,
    alpha=0.05, replications=150, seed=60601,
)
null = run_cit_experiment(null_cfg)

print("cumulative fraction of replications that have (falsely) rejected:")
print(f"{'k':>6}  {'sequential':>11}  {'naive batch':>11}")
for k in (100, 250, 500, 1000, 2000):
    print(f"{k:>6}  {null.seqgcm.value_at(k):>11.3f}  {null.batchgcm.value_at(k):>11.3f}")
print(f"\nnaive batch checkpoints: {list(map(int, null.batch_grid))}")
print("The sequential monitor holds near alpha = 0.05 over the whole run;")
print("re-running the batch test at each checkpoint lets errors accumulate.")

print("\n=== Alternative: Y picks up rho * e_x with rho = 0.5 ===\n")
alt_cfg = ExperimentConfig(
    kind="cit-alternative", d=1, regressor="knn", rho=0.5, m=100, horizon=2000,
    alpha=0.05, replications=150, seed=60602,
)
alt = run_cit_experiment(alt_cfg)
print(f"{'k':>6}  {'sequential':>11}  {'naive batch':>11}")
for k in (100, 250, 500, 1000, 2000):
    print(f"{k:>6}  {alt.seqgcm.value_at(k):>11.3f}  {alt.batchgcm.value_at(k):>11.3f}")
print("\nBoth detect the dependence; the sequential test pays a modest power")
print("price for its anytime validity and may simply stop at first rejection.")
print(f"\ntotal time {time.time()-t0:.1f}s")
