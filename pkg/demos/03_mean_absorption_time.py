"""Mean time to absorption from the boundary value problem, checked against closed forms."""
import numpy as np

from itostrat import DiffusionSpec
from itostrat.meantime import (
    drifted_logistic_mean_time, feller_exit_time, logistic_mean_time,
    solve_mean_absorption_time,
)

logistic = DiffusionSpec.from_strings("0", "x*(1-x)", "[0, 1]")
drifted = DiffusionSpec.from_strings("x*(1-x)", "x*(1-x)", "[0, 1]")

print(f"{'n':>5s}  {'logistic err':>12s}  {'pointwise err':>13s}  {'drifted err':>11s}")
for n in (99, 249, 499, 999):
    rows = []
    for s, exact, scheme in [(logistic, logistic_mean_time, "hat"),
                             (logistic, logistic_mean_time, "pointwise"),
                             (drifted, drifted_logistic_mean_time, "hat")]:
        sol = solve_mean_absorption_time(s, n, scheme=scheme)
        ref = np.array([exact(x) for x in sol.grid])
        rows.append(np.max(np.abs(sol.values - ref)))
    print(f"{n:5d}  {rows[0]:12.2e}  {rows[1]:13.2e}  {rows[2]:11.2e}")

sol = solve_mean_absorption_time(logistic, 999)
print("\nT(0.5) =", float(sol(0.5)), " log 2 =", np.log(2))

# drift pushes towards 1, so the profile tilts
sd = solve_mean_absorption_time(drifted, 999)
k = int(np.argmax(sd.values))
print(f"drifted: max T = {sd.values[k]:.4f} at x = {sd.grid[k]:.3f}")

# exit from (0, M): grows like log M without bound
print("\nFeller exit from x0 = 1")
for M in (10, 100, 1000):
    s = DiffusionSpec.from_strings("0", "x", f"[0, {M}]")
    num = float(solve_mean_absorption_time(s, 999)(1.0))
    print(f"  M = {M:5d}: BVP {num:.5f}   x0 log(M/x0) = {feller_exit_time(1.0, M):.5f}")
