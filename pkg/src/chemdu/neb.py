"""Energy-profile analysis and a climbing-image nudged elastic band.

The band uses the energy-weighted upwind tangent, springs acting only along
the tangent, and a quick-min optimiser (Euler steps whose velocity keeps only
its component along the current force, and is reset when it opposes it).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import EnergyProfile
from .potentials import Potential

log = logging.getLogger(__name__)

__all__ = [
    "ProfileAnalysis",
    "analyze_profile",
    "NebConfig",
    "NebResult",
    "NebError",
    "run_neb",
]


@dataclass(frozen=True)
class ProfileAnalysis:
    ts_index: int
    barrier_ev: float
    enthalpy_ev: float


def analyze_profile(p) -> ProfileAnalysis:
    """Transition state = first image attaining the maximum energy."""
    e = np.asarray(p.energies if isinstance(p, EnergyProfile) else p, dtype=float)
    if e.ndim != 1 or len(e) < 2:
        raise ValueError("an energy profile needs at least two entries")
    ts = int(np.argmax(e))  # argmax returns the first maximum
    return ProfileAnalysis(ts, float(e[ts] - e[0]), float(e[-1] - e[0]))


class NebError(RuntimeError):
    def __init__(self, message: str, image: int):
        super().__init__(f"image {image}: {message}")
        self.image = image


@dataclass(frozen=True)
class NebConfig:
    n_images: int = 11
    spring_k: float = 1.0
    climbing: bool = True
    max_force_tol: float = 0.05
    max_steps: int = 5000
    step_size: float = 0.01

    def __post_init__(self):
        if self.n_images < 3:
            raise ValueError("n_images must be >= 3")
        for name in ("spring_k", "max_force_tol", "step_size"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")


@dataclass
class NebResult:
    images: list[np.ndarray]
    profile: EnergyProfile
    converged: bool
    steps_taken: int
    climbing_image: int | None = None
    max_force: float = 0.0
    history: list[float] = field(default_factory=list, repr=False)

    @property
    def analysis(self) -> ProfileAnalysis:
        return analyze_profile(self.profile)


def _tangents(R: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Improved tangent for interior images (rows 1..M-2); endpoints get zero."""
    M = len(R)
    tau = np.zeros_like(R)
    for i in range(1, M - 1):
        fwd = R[i + 1] - R[i]
        bwd = R[i] - R[i - 1]
        ep, e0, em = E[i + 1], E[i], E[i - 1]
        if ep > e0 > em:
            t = fwd
        elif ep < e0 < em:
            t = bwd
        else:
            dmax = max(abs(ep - e0), abs(em - e0))
            dmin = min(abs(ep - e0), abs(em - e0))
            if ep > em:
                t = fwd * dmax + bwd * dmin
            else:
                t = fwd * dmin + bwd * dmax
        n = np.linalg.norm(t)
        if n > 0:
            tau[i] = t / n
    return tau


def _climber(E: np.ndarray) -> int | None:
    """Highest interior image, if it is a maximum along the band."""
    i = 1 + int(np.argmax(E[1:-1]))
    if E[i] > E[i - 1] and E[i] > E[i + 1]:
        return i
    return None


def _evaluate(pot: Potential, R: np.ndarray, offset: int = 0):
    E, G = pot.energies_gradients(R)
    E = np.asarray(E, dtype=float)
    G = np.asarray(G, dtype=float)
    for i in range(len(R)):
        if not np.isfinite(E[i]) or not np.all(np.isfinite(G[i])):
            raise NebError("non-finite energy or gradient", i + offset)
    return E, G


def _neb_forces(R, E, G, k, climbing):
    """NEB force on every image (zero on the pinned endpoints)."""
    M = len(R)
    tau = _tangents(R, E)
    F = np.zeros_like(R)
    ci = _climber(E) if climbing else None
    ax = tuple(range(1, R.ndim))
    for i in range(1, M - 1):
        true_f = -G[i]
        par = np.sum(true_f * tau[i]) * tau[i]
        if i == ci:
            F[i] = true_f - 2 * par
        else:
            spring = k * (np.linalg.norm(R[i + 1] - R[i]) - np.linalg.norm(R[i] - R[i - 1]))
            F[i] = true_f - par + spring * tau[i]
    norms = np.sqrt(np.sum(F * F, axis=ax)) if R.ndim > 1 else np.abs(F)
    return F, norms, ci


def run_neb(pot: Potential, start, end, cfg: NebConfig | None = None) -> NebResult:
    """Relax a band of ``cfg.n_images`` images between fixed endpoints.

    Converged when every interior image's NEB force norm is below
    ``max_force_tol``. That force is the perpendicular true force plus the
    tangential spring force, or for the climbing image its full true force
    with the parallel part inverted, so convergence also bounds the climbing
    image's gradient norm.
    """
    cfg = cfg or NebConfig()
    start = np.array(start, dtype=float)
    end = np.array(end, dtype=float)
    if start.shape != end.shape:
        raise ValueError(f"endpoint shapes differ: {start.shape} vs {end.shape}")
    M = cfg.n_images
    s = np.linspace(0.0, 1.0, M).reshape((M,) + (1,) * start.ndim)
    R = (1 - s) * start + s * end
    R[0], R[-1] = start, end

    E, G = _evaluate(pot, R)
    if np.array_equal(start, end):
        return NebResult([r.copy() for r in R], EnergyProfile(E.tolist()), True, 0)

    V = np.zeros_like(R)
    dt = cfg.step_size
    history = []
    converged = False
    step = 0
    F, norms, ci = _neb_forces(R, E, G, cfg.spring_k, cfg.climbing)
    while True:
        fmax = float(norms[1:-1].max())
        history.append(fmax)
        if fmax < cfg.max_force_tol:
            converged = True
            break
        if step >= cfg.max_steps:
            break
        # quick-min: keep only the velocity component along the force
        vf = float(np.sum(V * F))
        ff = float(np.sum(F * F))
        V = (vf / ff) * F if vf > 0 and ff > 0 else np.zeros_like(V)
        V += dt * F
        R[1:-1] += dt * V[1:-1]
        step += 1
        E[1:-1], G[1:-1] = _evaluate(pot, R[1:-1], offset=1)
        F, norms, ci = _neb_forces(R, E, G, cfg.spring_k, cfg.climbing)

    if not converged:
        log.warning("NEB stopped after %d steps with max force %.3g", step, history[-1])
    R[0], R[-1] = start, end
    return NebResult(
        images=[r.copy() for r in R],
        profile=EnergyProfile(E.tolist()),
        converged=converged,
        steps_taken=step,
        climbing_image=ci,
        max_force=history[-1],
        history=history,
    )
