"""Analytic toy potentials used in place of a learned interatomic potential.

Every potential maps a position array to a scalar energy and returns a
gradient of the same shape. ``energies_gradients`` evaluates a stack of
images at once; the base implementation loops, Müller–Brown vectorises.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Potential",
    "MullerBrown",
    "LennardJones",
    "MorseBond",
    "HarmonicWell",
    "builtin_potentials",
    "get_potential",
    "finite_difference_gradient",
    "gradient_error",
]


class Potential:
    """Contract: ``energy(x) -> float`` and ``gradient(x) -> array like x``."""

    name = "potential"
    #: expected position shape, None where any size is accepted
    shape: tuple | None = None

    def energy(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def energies_gradients(self, images: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        e = np.array([self.energy(x) for x in images], dtype=float)
        g = np.stack([self.gradient(x) for x in images])
        return e, g


# Standard four-term Müller–Brown constants.
MB_A = np.array([-200.0, -100.0, -170.0, 15.0])
MB_a = np.array([-1.0, -1.0, -6.5, 0.7])
MB_b = np.array([0.0, 0.0, 11.0, 0.6])
MB_c = np.array([-10.0, -10.0, -6.5, 0.7])
MB_X0 = np.array([1.0, 0.0, -0.5, -1.0])
MB_Y0 = np.array([0.0, 0.5, 1.5, 1.0])


class MullerBrown(Potential):
    """Two-dimensional Müller–Brown surface; positions have shape (2,)."""

    name = "muller_brown"
    shape = (2,)

    def _terms(self, xy: np.ndarray):
        xy = np.asarray(xy, dtype=float)
        dx = xy[..., 0, None] - MB_X0
        dy = xy[..., 1, None] - MB_Y0
        t = MB_A * np.exp(MB_a * dx * dx + MB_b * dx * dy + MB_c * dy * dy)
        return dx, dy, t

    def energy(self, x):
        _, _, t = self._terms(np.reshape(x, 2))
        return float(t.sum())

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        dx, dy, t = self._terms(x.reshape(2))
        gx = np.sum(t * (2 * MB_a * dx + MB_b * dy))
        gy = np.sum(t * (MB_b * dx + 2 * MB_c * dy))
        return np.array([gx, gy]).reshape(x.shape)

    def energies_gradients(self, images):
        images = np.asarray(images, dtype=float)
        flat = images.reshape(len(images), 2)
        dx, dy, t = self._terms(flat)
        e = t.sum(axis=-1)
        gx = np.sum(t * (2 * MB_a * dx + MB_b * dy), axis=-1)
        gy = np.sum(t * (MB_b * dx + 2 * MB_c * dy), axis=-1)
        return e, np.stack([gx, gy], axis=-1).reshape(images.shape)


def _pair_geometry(x: np.ndarray):
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or len(x) < 2:
        raise ValueError("pair potentials need positions of shape (n >= 2, dim)")
    i, j = np.triu_indices(len(x), 1)
    d = x[j] - x[i]
    r = np.linalg.norm(d, axis=1)
    return x, i, j, d, r


def _scatter(x, i, j, d, r, dEdr):
    g = np.zeros_like(x)
    contrib = (dEdr / r)[:, None] * d
    np.add.at(g, j, contrib)
    np.add.at(g, i, -contrib)
    return g


@dataclass
class LennardJones(Potential):
    """Pairwise 12-6 potential over every atom pair; positions (n, dim)."""

    epsilon: float = 1.0
    sigma: float = 1.0
    name = "lj_pair"

    def energy(self, x):
        _, _, _, _, r = _pair_geometry(x)
        sr6 = (self.sigma / r) ** 6
        return float(np.sum(4 * self.epsilon * (sr6 * sr6 - sr6)))

    def gradient(self, x):
        x, i, j, d, r = _pair_geometry(x)
        sr6 = (self.sigma / r) ** 6
        dEdr = 4 * self.epsilon * (-12 * sr6 * sr6 + 6 * sr6) / r
        return _scatter(x, i, j, d, r, dEdr)


@dataclass
class MorseBond(Potential):
    """Morse well D(1 - exp(-a(r - r0)))^2 between two atoms; positions (2, dim)."""

    depth: float = 1.0
    alpha: float = 1.5
    r0: float = 1.0
    name = "morse_bond"

    def _check(self, x):
        if np.shape(x)[0] != 2:
            raise ValueError("morse_bond is a two-body potential")

    def energy(self, x):
        self._check(x)
        _, _, _, _, r = _pair_geometry(x)
        q = 1 - np.exp(-self.alpha * (r - self.r0))
        return float(np.sum(self.depth * q * q))

    def gradient(self, x):
        self._check(x)
        x, i, j, d, r = _pair_geometry(x)
        e = np.exp(-self.alpha * (r - self.r0))
        dEdr = 2 * self.depth * (1 - e) * self.alpha * e
        return _scatter(x, i, j, d, r, dEdr)


@dataclass
class HarmonicWell(Potential):
    """Isotropic well k/2 |x - center|^2; center defaults to the origin."""

    k: float = 1.0
    center: np.ndarray | None = field(default=None)
    name = "harmonic_well"

    def _offset(self, x):
        x = np.asarray(x, dtype=float)
        c = 0.0 if self.center is None else np.broadcast_to(self.center, x.shape)
        return x - c

    def energy(self, x):
        d = self._offset(x)
        return float(0.5 * self.k * np.sum(d * d))

    def gradient(self, x):
        return self.k * self._offset(x)


def builtin_potentials() -> dict[str, Potential]:
    return {
        "muller_brown": MullerBrown(),
        "lj_pair": LennardJones(),
        "morse_bond": MorseBond(),
        "harmonic_well": HarmonicWell(),
    }


def get_potential(name: str) -> Potential:
    pots = builtin_potentials()
    if name not in pots:
        raise KeyError(f"unknown potential {name!r}; available: {', '.join(sorted(pots))}")
    return pots[name]


def finite_difference_gradient(pot: Potential, x, h: float = 1e-5) -> np.ndarray:
    """Central differences, one coordinate at a time."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    flat = g.reshape(-1)
    for k in range(x.size):
        xp, xm = x.copy().reshape(-1), x.copy().reshape(-1)
        xp[k] += h
        xm[k] -= h
        flat[k] = (pot.energy(xp.reshape(x.shape)) - pot.energy(xm.reshape(x.shape))) / (2 * h)
    return g


def gradient_error(pot: Potential, x, h: float = 1e-5) -> float:
    """Relative error ||g - g_fd|| / max(||g_fd||, 1) of the analytic gradient.

    The floor of 1 keeps the ratio meaningful at stationary points, where the
    gradient itself vanishes and any absolute error would look infinite.
    """
    g = pot.gradient(x)
    fd = finite_difference_gradient(pot, x, h)
    return float(np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1.0))
