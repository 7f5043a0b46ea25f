"""Average fidelity of linear qubit operations against a unitary, and the
best unitary correction for each syndrome class of the repetitive code.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .analytic import f_ign_2q, f_qec_2q
from .qmath import I2, SIX_STATES, X, Y, Z, dagger, is_unitary, ket_to_density, rotation_gate

_PROBES = {
    "0": SIX_STATES[0],
    "1": SIX_STATES[1],
    "+": SIX_STATES[2],
    "+i": SIX_STATES[4],
}


@dataclass(frozen=True)
class LinearQubitOp:
    """A linear, possibly trace-decreasing, one-qubit map given by its images
    of ``|0>``, ``|1>``, ``|+>`` and ``|+i>``.
    """

    rho0: np.ndarray
    rho1: np.ndarray
    rho_plus: np.ndarray
    rho_plus_i: np.ndarray

    @property
    def rho_c(self) -> np.ndarray:
        return (self.rho0 + self.rho1) / 2

    @classmethod
    def from_map(cls, fn: Callable[[np.ndarray], np.ndarray]) -> "LinearQubitOp":
        imgs = {k: np.asarray(fn(ket_to_density(v)), dtype=complex) for k, v in _PROBES.items()}
        return cls(imgs["0"], imgs["1"], imgs["+"], imgs["+i"])

    @classmethod
    def from_kraus(cls, ops: Sequence[np.ndarray]) -> "LinearQubitOp":
        ops = [np.asarray(k, dtype=complex) for k in ops]
        return cls.from_map(lambda rho: sum(k @ rho @ dagger(k) for k in ops))

    def image(self, rho_in: np.ndarray) -> np.ndarray:
        """Image of any input via ``rho_c + x(rho_+ - rho_c) + y(...) + z(...)``."""
        rho_in = np.asarray(rho_in, dtype=complex)
        x, y, z = (float(np.real(np.trace(rho_in @ s))) for s in (X, Y, Z))
        tr = float(np.real(np.trace(rho_in)))
        c = self.rho_c
        return tr * c + x * (self.rho_plus - c) + y * (self.rho_plus_i - c) + z * (self.rho0 - c)

    def linearity_defect(self) -> float:
        """Zero for a consistent op: the maximally mixed input maps to ``rho_c``."""
        return float(np.max(np.abs(self.image(I2 / 2) - self.rho_c)))

    def select_probability(self) -> float:
        """Bloch-averaged trace (two antipodal points suffice)."""
        return float(np.real(np.trace(self.rho_c)))


def avg_fidelity_vs_unitary(op: LinearQubitOp, u: np.ndarray) -> float:
    """Bloch average of ``Tr(op(rho) U rho U^dag)``."""
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u):
        raise ValueError("comparison operator must be unitary")
    c = op.rho_c
    half = I2 / 2
    total = 0.5 * np.trace(c)
    for img, probe in ((op.rho_plus, "+"), (op.rho_plus_i, "+i"), (op.rho0, "0")):
        target = u @ ket_to_density(_PROBES[probe]) @ dagger(u)
        total += np.trace((img - c) @ (target - half)) / 3
    return float(np.real(total))


def six_state_fidelity(op: LinearQubitOp, u: np.ndarray | None = None) -> float:
    """Mean of ``Tr(op(rho_j) U rho_j U^dag)`` over the six axis states."""
    u = I2 if u is None else np.asarray(u, dtype=complex)
    vals = []
    for ket in SIX_STATES:
        rho = ket_to_density(ket)
        vals.append(np.trace(op.image(rho) @ u @ rho @ dagger(u)))
    return float(np.real(np.mean(vals)))


# -- optimal correction for syndrome classes -------------------------------

NO_ERROR = "no_error_0"
ERROR_RESULT = "error_result"


@dataclass(frozen=True)
class BranchKK:
    """Outcome branch as the mixture ``a|0> + b|1> -> a|0> + k b|1>`` (no-error
    class) or ``-> k b|1>`` (error class), together with ``-> k_tilde b|0>``.
    """

    k: float
    k_tilde: float
    outcome_class: str = NO_ERROR

    def __post_init__(self):
        if self.outcome_class not in (NO_ERROR, ERROR_RESULT):
            raise ValueError(f"unknown outcome class {self.outcome_class!r}")
        if self.k < 0 or self.k_tilde < 0:
            raise ValueError("k and k_tilde must be nonnegative")
        if self.k**2 + self.k_tilde**2 > 1 + 1e-12:
            raise ValueError(f"k^2 + k_tilde^2 = {self.k**2 + self.k_tilde**2} exceeds 1")

    def kraus(self) -> list[np.ndarray]:
        down = np.array([[0, self.k_tilde], [0, 0]], dtype=complex)
        if self.outcome_class == NO_ERROR:
            return [np.diag([1, self.k]).astype(complex), down]
        return [np.diag([0, self.k]).astype(complex), down]

    def op(self) -> LinearQubitOp:
        return LinearQubitOp.from_kraus(self.kraus())


@dataclass(frozen=True)
class CorrectionChoice:
    unitary_class: str  # "identity", "fixes_zero" or "bit_flip"
    f_bar_max: float

    @property
    def unitary(self) -> np.ndarray:
        """Representative correction to apply to the output."""
        return X.copy() if self.unitary_class == "bit_flip" else I2.copy()


def optimal_correction(branch: BranchKK) -> CorrectionChoice:
    k2, kt2 = branch.k**2, branch.k_tilde**2
    if branch.outcome_class == NO_ERROR:
        return CorrectionChoice("identity", (1 + branch.k + k2 + kt2 / 2) / 3)
    if branch.k >= branch.k_tilde:
        return CorrectionChoice("fixes_zero", (2 * k2 + kt2) / 6)
    return CorrectionChoice("bit_flip", (k2 + 2 * kt2) / 6)


def branch_from_kraus(ops: Sequence[np.ndarray], outcome_class: str, tol: float = 1e-12) -> BranchKK:
    """Recover ``(k, k_tilde)`` from the Kraus operators of a syndrome branch."""
    ops = [np.asarray(k, dtype=complex) for k in ops]
    k2 = sum(abs(m[1, 1]) ** 2 for m in ops)
    kt2 = sum(abs(m[0, 1]) ** 2 for m in ops)
    zero_img = sum(abs(m[:, 0]) ** 2 for m in ops)
    expect = np.array([1.0, 0.0]) if outcome_class == NO_ERROR else np.zeros(2)
    if np.max(np.abs(zero_img - expect)) > tol:
        raise ValueError("branch operators do not have the repetitive-code form")
    return BranchKK(float(np.sqrt(k2)), float(np.sqrt(kt2)), outcome_class)


# -- grid search over SU(2) -------------------------------------------------


def euler_unitary(a: float, b: float, c: float) -> np.ndarray:
    return rotation_gate("Z", a) @ rotation_gate("Y", b) @ rotation_gate("Z", c)


def _euler_angles(resolution: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    az = 2 * np.pi * np.arange(resolution) / resolution
    pol = np.linspace(0, np.pi, resolution)
    a, b, c = np.meshgrid(az, pol, az, indexing="ij")
    return a.ravel(), b.ravel(), c.ravel()


def _rz_so3(t: np.ndarray) -> np.ndarray:
    ct, st = np.cos(t), np.sin(t)
    out = np.zeros(t.shape + (3, 3))
    out[..., 0, 0], out[..., 0, 1], out[..., 1, 0], out[..., 1, 1] = ct, -st, st, ct
    out[..., 2, 2] = 1
    return out


def _ry_so3(t: np.ndarray) -> np.ndarray:
    ct, st = np.cos(t), np.sin(t)
    out = np.zeros(t.shape + (3, 3))
    out[..., 0, 0], out[..., 0, 2], out[..., 2, 0], out[..., 2, 2] = ct, st, -st, ct
    out[..., 1, 1] = 1
    return out


@lru_cache(maxsize=2)
def _euler_grid(resolution: int) -> np.ndarray:
    """Bloch rotations of all grid unitaries, flattened to ``(G, 9)``."""
    a, b, c = _euler_angles(resolution)
    rot = _rz_so3(a) @ _ry_so3(b) @ _rz_so3(c)
    flat = rot.reshape(-1, 9)
    flat.setflags(write=False)
    return flat


def _bloch_components(m: np.ndarray) -> np.ndarray:
    return np.real([np.trace(m @ s) for s in (X, Y, Z)])


def _objective_terms(op: LinearQubitOp) -> tuple[float, np.ndarray]:
    # For U with Bloch rotation R: F = Tr(rho_c)/2 + (1/6) sum_ij R_ij D_ij,
    # where column j of D holds the Pauli components of (probe_j image - rho_c).
    c = op.rho_c
    cols = [_bloch_components(img - c) for img in (op.rho_plus, op.rho_plus_i, op.rho0)]
    return 0.5 * float(np.real(np.trace(c))), np.array(cols).T.reshape(9)


def numeric_unitary_search_batch(ops: Sequence[LinearQubitOp], resolution: int = 48, chunk: int = 16) -> list[dict]:
    """Exhaustive ZYZ Euler-angle grid maximization of :func:`avg_fidelity_vs_unitary`."""
    if resolution < 24:
        raise ValueError("resolution must be at least 24 per angle")
    grid = _euler_grid(resolution)
    a, b, c = _euler_angles(resolution)
    results = []
    for start in range(0, len(ops), chunk):
        block = ops[start : start + chunk]
        terms = [_objective_terms(op) for op in block]
        consts = np.array([t[0] for t in terms])
        mats = np.stack([t[1] for t in terms], axis=1)
        scores = grid @ mats / 6
        best = np.argmax(scores, axis=0)
        for j, idx in enumerate(best):
            u = euler_unitary(a[idx], b[idx], c[idx])
            # canonical global phase: make the largest entry of the first column real positive
            col = u[:, 0]
            lead = col[np.argmax(np.abs(col))]
            u = u * (abs(lead) / lead)
            results.append(
                {
                    "best_u": u,
                    "f_bar": float(consts[j] + scores[idx, j]),
                    "flip_amplitude": float(abs(u[1, 0])),
                }
            )
    return results


def numeric_unitary_search(op: LinearQubitOp, resolution: int = 48) -> dict:
    return numeric_unitary_search_batch([op], resolution)[0]


def unitary_class(u: np.ndarray) -> str:
    """``bit_flip`` when ``|<1|U|0>| > 1/sqrt(2)``, else ``fixes_zero``."""
    return "bit_flip" if abs(np.asarray(u)[1, 0]) > np.sqrt(0.5) else "fixes_zero"


def qec_gain_2q(p1: float, p2: float) -> float:
    """Fidelity gained by the optimal correction over ignoring the syndrome.

    Equals ``(p1 - min(p1, p2)) / 6``: positive only when the main qubit
    relaxes more readily than the ancilla (``p1 > p2``).
    """
    return f_qec_2q(p1, p2) - f_ign_2q(p1, p2)
