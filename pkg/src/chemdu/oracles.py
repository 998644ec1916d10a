"""Independent reference values for the Müller–Brown surface.

Nothing here uses the NEB code. Minima come from grid local minima polished
by BFGS. Saddles come from grid local minima of |grad E|^2 polished by a root
solve and kept when the Hessian has exactly one negative eigenvalue. The
A -> B barrier is the minimax level: the lowest energy at which A and B
lie in one connected component of the grid sublevel set, snapped to the
refined saddle closest to that level.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage, optimize

from .potentials import MullerBrown

__all__ = ["StationaryPoint", "muller_brown_stationary_points", "muller_brown_barrier",
           "MB_MINIMA", "MB_SADDLES"]

X_RANGE = (-1.6, 1.3)
Y_RANGE = (-0.6, 2.1)


@dataclass(frozen=True)
class StationaryPoint:
    x: float
    y: float
    energy: float
    kind: str  # "minimum" or "saddle"


def _grid(step: float):
    mb = MullerBrown()
    xs = np.arange(X_RANGE[0], X_RANGE[1] + step / 2, step)
    ys = np.arange(Y_RANGE[0], Y_RANGE[1] + step / 2, step)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    E, G = mb.energies_gradients(pts)
    return mb, xs, ys, E.reshape(X.shape), (G ** 2).sum(axis=1).reshape(X.shape)


def _interior_local_minima(Z: np.ndarray) -> list[tuple[int, int]]:
    filt = ndimage.minimum_filter(Z, size=3, mode="nearest")
    mask = Z == filt
    mask[[0, -1], :] = False
    mask[:, [0, -1]] = False
    return list(zip(*np.nonzero(mask)))


def _hessian(mb: MullerBrown, p: np.ndarray, h: float = 1e-5) -> np.ndarray:
    H = np.zeros((2, 2))
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        H[:, k] = (mb.gradient(p + e) - mb.gradient(p - e)) / (2 * h)
    return 0.5 * (H + H.T)


def _dedupe(points, tol=1e-4):
    out = []
    for p in points:
        if all(abs(p.x - q.x) > tol or abs(p.y - q.y) > tol for q in out):
            out.append(p)
    return out


@lru_cache(maxsize=4)
def muller_brown_stationary_points(step: float = 0.01) -> tuple[list[StationaryPoint], list[StationaryPoint]]:
    """(minima sorted by energy, saddles sorted by energy)."""
    mb, xs, ys, E, G2 = _grid(step)
    minima, saddles = [], []
    for i, j in _interior_local_minima(E):
        res = optimize.minimize(mb.energy, [xs[i], ys[j]], jac=mb.gradient, method="BFGS",
                                options={"gtol": 1e-10})
        minima.append(StationaryPoint(float(res.x[0]), float(res.x[1]), float(res.fun), "minimum"))
    for i, j in _interior_local_minima(G2):
        with np.errstate(over="ignore", invalid="ignore"):
            sol = optimize.root(mb.gradient, [xs[i], ys[j]], jac=lambda p: _hessian(mb, p), tol=1e-12)
        if not sol.success or np.linalg.norm(mb.gradient(sol.x)) > 1e-6:
            continue
        ev = np.linalg.eigvalsh(_hessian(mb, sol.x))
        if ev[0] < 0 < ev[1]:
            saddles.append(StationaryPoint(float(sol.x[0]), float(sol.x[1]),
                                           mb.energy(sol.x), "saddle"))
    key = lambda p: p.energy
    return sorted(_dedupe(minima), key=key), sorted(_dedupe(saddles), key=key)


def _connected_level(E: np.ndarray, a: tuple[int, int], b: tuple[int, int]) -> float:
    """Lowest level at which grid cells a and b share a sublevel component."""
    lo, hi = max(E[a], E[b]), float(E.max())
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lab, _ = ndimage.label(E <= mid)
        if lab[a] and lab[a] == lab[b]:
            hi = mid
        else:
            lo = mid
    return hi


@lru_cache(maxsize=4)
def muller_brown_barrier(step: float = 0.005) -> dict:
    """Barrier from the global minimum A to the second-deepest minimum B."""
    minima, saddles = muller_brown_stationary_points()
    A, B = minima[0], minima[1]
    _, xs, ys, E, _ = _grid(step)
    idx = lambda p: (int(np.argmin(abs(xs - p.x))), int(np.argmin(abs(ys - p.y))))
    level = _connected_level(E, idx(A), idx(B))
    ts = min(saddles, key=lambda s: abs(s.energy - level))
    return {"A": A, "B": B, "grid_level": level, "saddle": ts,
            "barrier": ts.energy - A.energy, "enthalpy": B.energy - A.energy}


# Frozen reference table (regenerate with muller_brown_stationary_points()).
MB_MINIMA = (
    StationaryPoint(-0.558224, 1.441726, -146.699517, "minimum"),
    StationaryPoint(0.623499, 0.028038, -108.166724, "minimum"),
    StationaryPoint(-0.050011, 0.466694, -80.767818, "minimum"),
)
MB_SADDLES = (
    StationaryPoint(0.212487, 0.292988, -72.248940, "saddle"),
    StationaryPoint(-0.822002, 0.624313, -40.664844, "saddle"),
)
