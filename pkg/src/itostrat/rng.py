"""Counter-based Gaussian noise keyed by (seed, path index, step index).

Every increment is a pure function of its three keys, so an ensemble gives the
same numbers whether paths are simulated one at a time, in batches, or in any
order. Mixing is the splitmix64 finaliser; normals come from Box-Muller.
"""
from __future__ import annotations

import numpy as np

__all__ = ["counter_normals", "PathStream"]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31 = np.uint64(30), np.uint64(27), np.uint64(31)
_S11 = np.uint64(11)
_TWO_PI = 2.0 * np.pi
_INV_2_53 = 1.0 / 9007199254740992.0


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _path_keys(seed: int, path_index) -> np.ndarray:
    seed_key = _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) * _GOLDEN + _GOLDEN)
    return _mix(seed_key ^ (np.asarray(path_index, dtype=np.uint64) * _GOLDEN + _M1))


def counter_normals(seed: int, path_index, step_index) -> np.ndarray:
    """Standard normals for the broadcast of ``path_index`` and ``step_index``."""
    with np.errstate(over="ignore"):
        key = _path_keys(seed, path_index)
        ctr = np.asarray(step_index, dtype=np.uint64) * np.uint64(2)
        h1 = _mix(key + (ctr + np.uint64(1)) * _GOLDEN)
        h2 = _mix(key ^ ((ctr + np.uint64(2)) * _M2))
    # top 53 bits; u1 in (0, 1] keeps the log finite
    u1 = ((h1 >> _S11).astype(np.float64) + 1.0) * _INV_2_53
    u2 = (h2 >> _S11).astype(np.float64) * _INV_2_53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


class PathStream:
    """The noise stream of one path."""

    def __init__(self, seed: int = 0, path_index: int = 0):
        self.seed = int(seed)
        self.path_index = int(path_index)

    def normals(self, n_steps: int, start: int = 0) -> np.ndarray:
        return counter_normals(self.seed, self.path_index,
                               np.arange(start, start + n_steps))

    def increments(self, n_steps: int, dt: float) -> np.ndarray:
        return np.sqrt(dt) * self.normals(n_steps)

    def brownian(self, n_steps: int, dt: float) -> np.ndarray:
        """Brownian path at ``n_steps + 1`` nodes, starting at 0."""
        return np.concatenate(([0.0], np.cumsum(self.increments(n_steps, dt))))

    def __repr__(self):
        return f"PathStream(seed={self.seed}, path_index={self.path_index})"
