"""Averaging functionals of a pure qubit state over the Bloch sphere."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .qmath import SIX_STATES

StateFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class BlochAverager:
    """How to average: ``quadrature`` (Gauss-Legendre in cos(theta) times a
    uniform azimuthal grid), ``six_state`` (the six axis states) or
    ``monte_carlo`` (Haar samples from a counter-based Philox stream).
    """

    mode: str = "quadrature"
    n_nodes: int = 64
    n_phi: int = 8
    n_samples: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("quadrature", "six_state", "monte_carlo"):
            raise ValueError(f"unknown averaging mode {self.mode!r}")
        if self.mode == "quadrature" and (self.n_nodes < 32 or self.n_phi < 1):
            raise ValueError("quadrature needs at least 32 polar nodes and one azimuth")
        if self.mode == "monte_carlo" and self.n_samples < 1:
            raise ValueError("monte_carlo needs n_samples >= 1")

    @classmethod
    def quadrature(cls, n_nodes: int = 64, n_phi: int = 8) -> "BlochAverager":
        return cls("quadrature", n_nodes=n_nodes, n_phi=n_phi)

    @classmethod
    def six_state(cls) -> "BlochAverager":
        return cls("six_state")

    @classmethod
    def monte_carlo(cls, n_samples: int, seed: int = 0) -> "BlochAverager":
        return cls("monte_carlo", n_samples=n_samples, seed=seed)


def states_from_angles(cos_theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    cos_theta = np.asarray(cos_theta, dtype=float)
    alpha = np.sqrt(np.clip((1 + cos_theta) / 2, 0, 1))
    beta = np.sqrt(np.clip((1 - cos_theta) / 2, 0, 1)) * np.exp(1j * np.asarray(phi))
    return np.stack([alpha + 0j, beta], axis=-1)


@lru_cache(maxsize=16)
def _quadrature_points(n_nodes: int, n_phi: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    cos_t = np.repeat(x, n_phi)
    phis = np.tile(phi, n_nodes)
    weights = np.repeat(w / 2, n_phi) / n_phi
    states = states_from_angles(cos_t, phis)
    states.setflags(write=False)
    weights.setflags(write=False)
    return states, weights


def haar_states(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` Haar-random qubit states: cos(theta) uniform in [-1, 1], phi uniform."""
    cos_t = rng.uniform(-1.0, 1.0, n)
    phi = rng.uniform(0.0, 2 * np.pi, n)
    return states_from_angles(cos_t, phi)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def sample_points(averager: BlochAverager) -> tuple[np.ndarray, np.ndarray]:
    """States ``(m, 2)`` and weights ``(m,)`` summing to one."""
    if averager.mode == "quadrature":
        return _quadrature_points(averager.n_nodes, averager.n_phi)
    if averager.mode == "six_state":
        return np.array(SIX_STATES), np.full(6, 1 / 6)
    states = haar_states(averager.n_samples, make_rng(averager.seed))
    return states, np.full(averager.n_samples, 1 / averager.n_samples)


def bloch_average(fn: StateFunction, averager: BlochAverager | None = None, linear: bool = True) -> float:
    """Average ``fn`` over the sphere; ``fn`` maps states ``(m, 2)`` to values ``(m,)``.

    ``linear`` declares that ``fn`` is linear in the input density matrix;
    the six-state rule is exact only for such functionals.
    """
    averager = averager or BlochAverager.quadrature()
    if averager.mode == "six_state" and not linear:
        raise ValueError(
            "six-state averaging is exact only for functionals linear in rho_in; "
            "average the numerator and denominator separately instead"
        )
    states, weights = sample_points(averager)
    return float(np.real(weights @ np.asarray(fn(states))))


def azimuthal_spread(fn: StateFunction, n_nodes: int = 64, n_phi: int = 8) -> float:
    """Largest variation of ``fn`` over ``n_phi`` azimuths at fixed polar node."""
    states, _ = _quadrature_points(n_nodes, n_phi)
    vals = np.real(np.asarray(fn(states))).reshape(n_nodes, n_phi)
    return float(np.max(vals.max(axis=1) - vals.min(axis=1)))
