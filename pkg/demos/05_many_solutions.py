"""One noise path, many solutions of dX = sqrt(2X) o dW."""
import itertools

import numpy as np

from itostrat import DiffusionSpec
from itostrat.rng import PathStream
from itostrat.simulate import (
    bessel_closed_form, reflected_solution, shifted_family, sign_change_nodes,
    simulate_stratonovich, stopped_family, verification_tolerance, verify_solution,
)

strat = DiffusionSpec.from_strings("0", "x", "[0, inf)", "Stratonovich")
dt, n, x0 = 1e-4, 50_000, 1.0
# Y = sqrt(2 x0) + W; the closed form (Y^2/2) leaves residual Y^2 while Y < 0,
# so take a noise that goes well below zero
W = next(w for w in (PathStream(42, i).brownian(n, dt) for i in range(100))
         if np.min(np.sqrt(2 * x0) + w) < -0.5)
tol = verification_tolerance(dt)
print("first zero of the closed form at t =", sign_change_nodes(x0, W)[0] * dt)
print(f"tolerance {tol:.4f}\n")

cands = {
    "closed form": bessel_closed_form(x0, W, dt),
    "stopped at first zero": stopped_family(x0, W, dt, 1),
    "Heun": simulate_stratonovich(strat, x0, dt, n * dt, W),
    "reflected": reflected_solution(x0, W, dt),
    "shifted tau=0": shifted_family(W, dt, 0.0),
}
for tau in (0.0, 0.5, 1.0, 2.0):
    cands[f"from 0, start {tau:g}"] = reflected_solution(0.0, W, dt, tau)

for label, path in cands.items():
    r = verify_solution(strat, path)
    print(f"{label:24s} residual {r:8.4f}  {'solves' if r <= tol else '-'}")

good = {k: v for k, v in cands.items() if verify_solution(strat, v) <= tol}
print("\nsup distance between solutions")
for a, b in itertools.combinations(good, 2):
    print(f"  {a:24s} {b:24s} {np.max(np.abs(good[a].states - good[b].states)):.3f}")
