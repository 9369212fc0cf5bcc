"""Same noise coefficient, two readings: what the drift correction does to trivial solutions."""
import numpy as np

from itostrat import DiffusionSpec, ito_to_stratonovich, stratonovich_to_ito
from itostrat.expr import to_string
from itostrat.rng import PathStream
from itostrat.simulate import Path, residual_path

# branching diffusion, Ito reading
ito = DiffusionSpec.from_strings("0", "x", "[0, inf)", "Ito")
rep = ito_to_stratonovich(ito)
print("Ito drift      :", to_string(ito.f))
print("Strat drift    :", to_string(rep.target.f))
print("trivial before :", rep.to_dict()["fixed_points_source"])
print("trivial after  :", rep.to_dict()["fixed_points_target"])
print("destroyed      :", list(rep.destroyed))

# X = 0 solves the Ito form exactly; in the Stratonovich form it leaves t/2 behind
dt, n = 1e-3, 2000
t = np.arange(n + 1) * dt
W = PathStream(42).brownian(n, dt)
zero = Path(t, np.zeros(n + 1), W)
print("\nresidual of X = 0")
for label, s in [("Ito (0, x)", ito), ("Strat (-1/2, x)", rep.target)]:
    r = residual_path(s, zero)
    print(f"  {label:16s} r(1) = {r[1000]:.4f}   r(2) = {r[-1]:.4f}")

# two absorbing states; both are lost in the Stratonovich form
two = DiffusionSpec.from_strings("x - x^2", "x - x^2", "[0, 1]", "Ito")
rep2 = ito_to_stratonovich(two)
print("\nlogistic Strat drift:", to_string(rep2.target.f), " destroyed:", list(rep2.destroyed))

# and the other way: the Stratonovich spec with zero drift gains one
back = stratonovich_to_ito(DiffusionSpec.from_strings("0", "x", "[0, inf)", "Stratonovich"))
print("Strat (0, x) -> Ito drift:", to_string(back.target.f), " destroyed:", list(back.destroyed))
