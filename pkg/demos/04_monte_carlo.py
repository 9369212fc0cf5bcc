"""Monte Carlo absorption: reproducible ensembles against the BVP answer."""
import math

import numpy as np

from itostrat import DiffusionSpec
from itostrat.simulate import ensemble, simulate_ito
from itostrat.rng import PathStream

logistic = DiffusionSpec.from_strings("0", "x*(1-x)", "[0, 1]")

# every path is addressable on its own: path 3 of seed 42
p = simulate_ito(logistic, 0.5, 1e-3, 20.0, PathStream(42, 3))
print("path 3 absorbed at step/endpoint:", p.absorbed_at)

st, times = ensemble(logistic, 0.5, 4000, 1e-3, 20.0, 42, return_times=True)
print(f"\nmean absorption time {st.mean_absorption_time:.4f} "
      f"+/- {st.mean_absorption_time_se:.4f}   (log 2 = {math.log(2):.4f})")
print("absorbed:", st.n_absorbed, "of", st.n_paths, " by endpoint:", st.endpoint_counts)

# the tail: fraction still alive decays roughly exponentially
for t in (0.5, 1, 2, 4, 8):
    print(f"  alive at t = {t:<4g}: {np.mean(~(times <= t)):.4f}")

# same seed, same numbers
again = ensemble(logistic, 0.5, 4000, 1e-3, 20.0, 42)
print("\nrerun identical:", again == st)

# Feller: P(absorbed by t) = exp(-x0/t)
feller = DiffusionSpec.from_strings("0", "x", "[0, inf)")
_, tf = ensemble(feller, 1.0, 4000, 1e-3, 10.0, 7, return_times=True)
for t in (1, 2, 5, 10):
    print(f"  Feller P(tau <= {t:<2d}) = {np.mean(tf <= t):.3f}   exp(-1/t) = {math.exp(-1 / t):.3f}")
