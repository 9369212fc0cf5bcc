"""Path simulation, stochastic partial sums and pathwise solution checks.

SDEs have the form ``dX = f dt + sqrt(2 g) dW``.  Ito equations are stepped
with Euler-Maruyama, Stratonovich equations with the Heun predictor-corrector.
Both evaluate ``sqrt(2 max(g, 0))`` and clamp to the closed state space.

Endpoint handling during simulation:

* degenerate endpoint classified absorbing (Ito only): the path is frozen
  once it comes within ``tol_abs`` of it or is clamped onto it;
* finite non-degenerate endpoint: an exit boundary, the path is frozen on
  crossing;
* anything else: clamping only.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .boundary import BoundaryClass, classify_boundary
from .coefficients import DiffusionSpec, Interpretation, validate_spec
from .expr import compile_expr
from .rng import PathStream, counter_normals

__all__ = [
    "Path", "EnsembleStats", "simulate_ito", "simulate_stratonovich",
    "simulate_batch", "ensemble", "ito_integral", "stratonovich_integral", "residual_path",
    "verify_solution", "verification_tolerance", "bessel_closed_form",
    "sign_change_nodes", "stopped_family", "shifted_family",
    "reflected_solution", "default_tol_abs", "stopping_boundaries",
]


@dataclass
class Path:
    times: np.ndarray
    states: np.ndarray
    driving_noise: np.ndarray
    absorbed_at: tuple[int, float] | None = None

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def x0(self) -> float:
        return float(self.states[0])

    def absorbed_mask(self) -> np.ndarray:
        mask = np.zeros(self.times.size, dtype=bool)
        if self.absorbed_at is not None:
            mask[self.absorbed_at[0]:] = True
        return mask

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,W,X,absorbed\n")
        for t, w, x, ab in zip(self.times, self.driving_noise, self.states,
                               self.absorbed_mask()):
            buf.write(f"{float(t)!r},{float(w)!r},{float(x)!r},{int(ab)}\n")
        return buf.getvalue()


@dataclass(frozen=True)
class EnsembleStats:
    n_paths: int
    n_absorbed: int
    absorption_probability: float
    absorption_probability_se: float
    mean_absorption_time: float
    mean_absorption_time_se: float
    seed: int
    dt: float
    horizon: float
    x0: float = math.nan
    endpoint_counts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["endpoint_counts"] = {repr(k): v for k, v in self.endpoint_counts.items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=True)


def default_tol_abs(s: DiffusionSpec, endpoint: float, dt: float) -> float:
    """Freezing distance at an absorbing degenerate endpoint: ``|g'(e)| dt``.

    Below this distance one Euler step has noise ``sqrt(2 g' d dt) >~ d`` so the
    chain reaches the endpoint within a few steps anyway, and the mean time
    left from there is ``O(dt log(1/dt))``.
    """
    return abs(float(np.asarray(compile_expr(s.gprime)(np.array([endpoint]))).item())) * dt


def stopping_boundaries(s: DiffusionSpec, dt: float, tol_abs: float | None = None):
    """``[(endpoint, tolerance, kind)]`` for the endpoints a path may stop at.

    ``kind`` is ``"absorbing"`` or ``"exit"``; tolerance is 0 for exits.
    Degenerate endpoints that cannot be classified are left to clamping.
    """
    out = []
    for e in s.finite_endpoints():
        if s.is_degenerate(e):
            if s.interpretation is not Interpretation.ITO:
                continue
            try:
                cls = classify_boundary(s, e)
            except ValueError:
                # unclassifiable (g' = 0 or incompatible drift): clamp only
                continue
            if cls is BoundaryClass.ACCESSIBLE_ABSORBING:
                tol = default_tol_abs(s, e, dt) if tol_abs is None else tol_abs
                out.append((e, tol, "absorbing"))
        else:
            out.append((e, 0.0, "exit"))
    return out


def _check_inputs(s: DiffusionSpec, x0: float, dt: float, horizon: float, kind):
    if s.interpretation is not kind:
        raise ValueError(f"spec interpretation is {s.interpretation.value}, expected {kind.value}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt >= horizon:
        raise ValueError("dt must be smaller than the horizon")
    a, b = s.domain
    if not a <= x0 <= b:
        raise ValueError(f"x0={x0} outside the state space {s.domain}")
    # g' != 0 and compatibility only matter for classification, see stopping_boundaries
    report = validate_spec(s)
    if report.evaluation_errors or not report.g_nonnegative:
        raise ValueError("invalid coefficients: " + "; ".join(report.failures()))
    return int(round(horizon / dt))


def _increments(rng_stream, n_steps: int, dt: float):
    """``(dW, W)``; a stream draws ``sqrt(dt) Z`` directly so batch runs match."""
    if isinstance(rng_stream, PathStream):
        dW = math.sqrt(dt) * rng_stream.normals(n_steps)
        return dW, np.concatenate(([0.0], np.cumsum(dW)))
    W = np.asarray(rng_stream, dtype=float)
    if W.shape != (n_steps + 1,):
        raise ValueError(f"driving noise needs {n_steps + 1} nodes, got {W.shape}")
    return np.diff(W), W


class _Stepper:
    """One time step of either scheme for an array of states."""

    def __init__(self, s: DiffusionSpec, dt: float):
        self.f = compile_expr(s.f)
        self.g = compile_expr(s.g)
        self.lo, self.hi = s.domain
        self.dt = dt
        self.heun = s.interpretation is Interpretation.STRATONOVICH

    def sigma(self, x):
        return np.sqrt(2.0 * np.maximum(self.g(x), 0.0))

    def __call__(self, x, dW):
        drift = self.f(x) * self.dt
        sx = self.sigma(x)
        pred = x + drift + sx * dW
        if self.heun:
            pred = np.clip(pred, self.lo, self.hi)
            pred = x + drift + 0.5 * (sx + self.sigma(pred)) * dW
        return np.clip(pred, self.lo, self.hi)


def _stop_hits(x, stops):
    """Endpoint index hit by each state, -1 where none."""
    hit = np.full(x.shape, -1)
    for i, (e, tol, kind) in enumerate(stops):
        if kind == "absorbing":
            near = np.abs(x - e) <= tol
        else:
            near = x == e
        hit = np.where((hit < 0) & near, i, hit)
    return hit


def _simulate(s, x0, dt, horizon, rng_stream, kind, tol_abs):
    n = _check_inputs(s, x0, dt, horizon, kind)
    dW, W = _increments(rng_stream, n, dt)
    stops = stopping_boundaries(s, dt, tol_abs)
    step = _Stepper(s, dt)
    X = np.empty(n + 1)
    X[0] = x0
    absorbed = None
    x = np.array([float(x0)])
    for k in range(n + 1):
        if k > 0:
            x = step(x, dW[k - 1:k])
        h = _stop_hits(x, stops)[0]
        if h >= 0:
            e = stops[h][0]
            X[k:] = e
            absorbed = (k, e)
            break
        X[k] = x[0]
    return Path(np.arange(n + 1) * dt, X, W, absorbed)


def simulate_ito(s: DiffusionSpec, x0: float, dt: float, horizon: float,
                 rng_stream, tol_abs: float | None = None) -> Path:
    """Euler-Maruyama with full truncation.

    ``rng_stream`` is a :class:`PathStream` or the driving Brownian path at the
    ``round(horizon/dt) + 1`` nodes.  ``tol_abs`` overrides
    :func:`default_tol_abs` at absorbing endpoints.
    """
    return _simulate(s, x0, dt, horizon, rng_stream, Interpretation.ITO, tol_abs)


def simulate_stratonovich(s: DiffusionSpec, x0: float, dt: float, horizon: float,
                          rng_stream) -> Path:
    """Heun predictor-corrector, ``sigma`` averaged over the step; no absorption freezing."""
    return _simulate(s, x0, dt, horizon, rng_stream, Interpretation.STRATONOVICH, None)


def simulate_batch(s: DiffusionSpec, x0: float, dt: float, horizon: float, W,
                   tol_abs: float | None = None) -> np.ndarray:
    """States of many paths at once, one row per row of the Brownian paths ``W``.

    Same scheme and stopping rules as the single-path simulators (which one
    follows ``s.interpretation``); rows are bit-identical to
    ``simulate_ito``/``simulate_stratonovich`` driven by the same row.
    """
    n = _check_inputs(s, x0, dt, horizon, s.interpretation)
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if W.shape[1] != n + 1:
        raise ValueError(f"driving noise needs {n + 1} nodes, got {W.shape[1]}")
    dW = np.diff(W, axis=1)
    stops = stopping_boundaries(s, dt, tol_abs)
    step = _Stepper(s, dt)
    X = np.empty(W.shape)
    x = np.full(W.shape[0], float(x0))
    alive = np.ones(W.shape[0], dtype=bool)
    for k in range(n + 1):
        if k > 0:
            x = np.where(alive, step(x, dW[:, k - 1]), x)
        h = _stop_hits(x, stops)
        hit = alive & (h >= 0)
        if hit.any():
            x[hit] = np.array([stops[i][0] for i in h[hit]])
            alive &= ~hit
        X[:, k] = x
    return X


def ensemble(s: DiffusionSpec, x0: float, n_paths: int, dt: float, horizon: float,
             master_seed: int, tol_abs: float | None = None,
             return_times: bool = False):
    """Monte Carlo absorption statistics over ``n_paths`` independent paths.

    All live paths advance together; path ``i`` draws the same normals as
    ``PathStream(master_seed, i)``, so every path equals its single-path
    simulation and the result does not depend on batching.  Moments are taken
    over arrays in path-index order.  With ``return_times`` the per-path
    absorption times (``nan`` if alive at the horizon) are returned as well.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be at least 1")
    n = _check_inputs(s, x0, dt, horizon, s.interpretation)
    stops = stopping_boundaries(s, dt, tol_abs)
    step = _Stepper(s, dt)
    sqdt = math.sqrt(dt)

    t_abs = np.full(n_paths, np.nan)
    where = np.full(n_paths, -1)
    ids = np.arange(n_paths, dtype=np.uint64)
    x = np.full(n_paths, float(x0))
    for k in range(n + 1):
        if k > 0:
            x = step(x, sqdt * counter_normals(master_seed, ids, k - 1))
        h = _stop_hits(x, stops)
        done = h >= 0
        if done.any():
            idx = ids[done].astype(np.intp)
            t_abs[idx] = k * dt
            where[idx] = h[done]
            keep = ~done
            ids, x = ids[keep], x[keep]
            if ids.size == 0:
                break

    absorbed = ~np.isnan(t_abs)
    m = int(absorbed.sum())
    ind = absorbed.astype(float)
    p = float(ind.mean())
    p_se = float(ind.std(ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else math.nan
    times = t_abs[absorbed]
    mean_t = float(times.mean()) if m else math.nan
    mean_se = float(times.std(ddof=1) / math.sqrt(m)) if m > 1 else math.nan
    counts = {e: int(np.sum(where == i)) for i, (e, _, _) in enumerate(stops)}
    stats = EnsembleStats(n_paths, m, p, p_se, mean_t, mean_se, int(master_seed),
                          float(dt), float(horizon), float(x0), counts)
    return (stats, t_abs) if return_times else stats


# stochastic partial sums

def _pair(integrand, W):
    h = np.asarray(integrand, dtype=float)
    W = np.asarray(W, dtype=float)
    if h.ndim == 0:
        h = np.full(W.shape, float(h))
    if h.shape != W.shape:
        raise ValueError(f"length mismatch: integrand {h.shape} vs noise {W.shape}")
    return h, np.diff(W)


def ito_integral(integrand, W, cumulative: bool = False):
    """Left-point sum ``sum h(t_{i-1}) (W_i - W_{i-1})``; ``integrand`` at the nodes."""
    h, dW = _pair(integrand, W)
    terms = h[:-1] * dW
    if cumulative:
        return np.concatenate(([0.0], np.cumsum(terms)))
    return float(np.sum(terms))


def stratonovich_integral(integrand, W, cumulative: bool = False):
    """Midpoint sum with the midpoint value taken as the mean of adjacent nodes."""
    h, dW = _pair(integrand, W)
    terms = 0.5 * (h[:-1] + h[1:]) * dW
    if cumulative:
        return np.concatenate(([0.0], np.cumsum(terms)))
    return float(np.sum(terms))


def residual_path(s: DiffusionSpec, candidate: Path) -> np.ndarray:
    """``X_t - x0 - int f dt - int sqrt(2g) dW`` at every node.

    The drift integral is the cumulative trapezoid rule; the noise integral is
    Ito or Stratonovich according to ``s.interpretation``.
    """
    X = np.asarray(candidate.states, dtype=float)
    t = np.asarray(candidate.times, dtype=float)
    fx = compile_expr(s.f)(X)
    sig = np.sqrt(2.0 * np.maximum(compile_expr(s.g)(X), 0.0))
    drift = np.concatenate(([0.0], np.cumsum(0.5 * (fx[1:] + fx[:-1]) * np.diff(t))))
    if s.interpretation is Interpretation.ITO:
        noise = ito_integral(sig, candidate.driving_noise, cumulative=True)
    else:
        noise = stratonovich_integral(sig, candidate.driving_noise, cumulative=True)
    return X - X[0] - drift - noise


def verify_solution(s: DiffusionSpec, candidate: Path) -> float:
    """Max-norm of :func:`residual_path`."""
    return float(np.max(np.abs(residual_path(s, candidate))))


def verification_tolerance(dt: float) -> float:
    """Pass threshold ``5 dt^0.4`` for square-root integrands."""
    return 5.0 * dt ** 0.4


# explicit solutions of dX = sqrt(2X) o dW

def _grid(W, dt):
    W = np.asarray(W, dtype=float)
    return W, np.arange(W.size) * dt


def bessel_closed_form(x0: float, W, dt: float) -> Path:
    """``(sqrt(x0) + W_t / sqrt(2))^2`` evaluated pathwise."""
    if x0 < 0:
        raise ValueError("x0 must be nonnegative")
    W, t = _grid(W, dt)
    return Path(t, (math.sqrt(x0) + W / math.sqrt(2.0)) ** 2, W)


def sign_change_nodes(x0: float, W) -> np.ndarray:
    """Grid nodes where ``sqrt(x0) + W/sqrt(2)`` changes sign (an exact zero counts too)."""
    p = math.sqrt(x0) + np.asarray(W, dtype=float) / math.sqrt(2.0)
    sg = np.sign(p)
    # a node sitting exactly on zero is the crossing; skip the node right after it
    hits = np.nonzero((sg[1:] != sg[:-1]) & (sg[:-1] != 0))[0] + 1
    return hits


def stopped_family(x0: float, W, dt: float, n: int) -> Path:
    """The closed form multiplied by ``1{t < T_n}``, ``T_n`` the n-th sign-change node.

    Without an n-th sign change on the grid the closed form is returned.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    path = bessel_closed_form(x0, W, dt)
    nodes = sign_change_nodes(x0, W)
    if nodes.size >= n:
        k = int(nodes[n - 1])
        path.states[k:] = 0.0
        path.absorbed_at = (k, 0.0)
    return path


def shifted_family(W, dt: float, tau: float) -> Path:
    """``W_{t-tau}^2 / 2 * 1{t > tau}`` started from 0, with ``W_s = 0`` for ``s < 0``.

    The returned path is driven by the shifted noise ``W_{t-tau}``.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    W, t = _grid(W, dt)
    m = int(round(tau / dt))
    shifted = np.zeros_like(W)
    if m < W.size:
        shifted[m:] = W[:W.size - m]
    return Path(t, 0.5 * shifted**2, shifted)


def reflected_solution(x0: float, W, dt: float, tau: float = 0.0) -> Path:
    """``Y^2`` with ``Y`` the Brownian path ``sqrt(x0) + (W_t - W_tau)/sqrt(2)``
    reflected at zero from time ``tau`` on, driven by ``W`` itself.

    For ``x0 = 0`` every ``tau`` gives a different solution of the same
    initial value problem; for ``x0 > 0`` only ``tau = 0`` is allowed.
    """
    if x0 < 0:
        raise ValueError("x0 must be nonnegative")
    if tau > 0 and x0 > 0:
        raise ValueError("a delayed start needs x0 = 0")
    W, t = _grid(W, dt)
    m = int(round(tau / dt))
    X = np.zeros_like(W)
    if m < W.size:
        p = math.sqrt(x0) + (W[m:] - W[m]) / math.sqrt(2.0)
        Y = p - np.minimum(np.minimum.accumulate(p), 0.0)
        X[m:] = Y**2
    return Path(t, X, W)
