"""Boundary behaviour at a degenerate endpoint as the drift there grows."""
from itostrat import DiffusionSpec
from itostrat.boundary import EPSILONS, accessibility_integral, boundary_report

# g = x near 0: absorbing for f(0) = 0, reflecting below g'(0), inaccessible from g'(0) on
print(f"{'f':>6s}  {'analytic':22s} {'integral':10s} agree")
for f in ["0", "0.25", "0.5", "0.75", "1", "2"]:
    r = boundary_report(DiffusionSpec.from_strings(f, "x", "[0, inf)"), 0.0)
    print(f"{f:>6s}  {r.analytic_class.value:22s} {r.integral_verdict.value:10s} {r.agreement}")

# the integral itself: finite limits for f < g', log growth at f = g', power growth above
print("\nI(eps) on [eps, 1/2]")
print("eps      " + "  ".join(f"f={c:<5g}" for c in (0, 0.5, 1, 2)))
for eps in EPSILONS:
    vals = [accessibility_integral(DiffusionSpec.from_strings(str(c), "x", "[0, inf)"),
                                   0.0, 0.5, eps) for c in (0, 0.5, 1, 2)]
    print(f"{eps:<8.0e} " + "  ".join(f"{v:<7.3g}" for v in vals))

# the right end of [0, 1] is read through x -> 1 - x
s = DiffusionSpec.from_strings("-0.5*x", "x*(1-x)", "[0, 1]")
for e in (0.0, 1.0):
    print(f"\nendpoint {e:g}: {boundary_report(s, e).analytic_class.value}", end="")
print()
