"""Zero-temperature amplitude damping and pure dephasing as Kraus maps.

Both channels are exact exponentials in time, so stepping with ``dt`` and
then ``dt'`` is identical to one step of ``dt + dt'``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qmath import I2, Z, _n_qubits, apply_gate, dagger

DEFAULT_DT_NS = 0.5
CONSISTENCY_RTOL = 1e-9


def _check_prob(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise ValueError(f"{name}={value!r} outside [0, 1]")
    return value


def damping_probability(t: float, t1: float) -> float:
    """``p = 1 - exp(-t/T1)``; ``T1 = inf`` means no relaxation."""
    if t < 0:
        raise ValueError(f"negative duration {t}")
    if not t1 > 0:
        raise ValueError(f"T1 must be positive, got {t1}")
    return -math.expm1(-t / t1)


def dephasing_lambda(t: float, t_phi: float) -> float:
    """Dephasing strength whose off-diagonal factor ``sqrt(1-lambda)`` is ``exp(-t/T_phi)``."""
    if t < 0:
        raise ValueError(f"negative duration {t}")
    if not t_phi > 0:
        raise ValueError(f"T_phi must be positive, got {t_phi}")
    return -math.expm1(-2.0 * t / t_phi)


def pure_dephasing_time(t1: float, t2: float) -> float:
    """``T_phi`` from ``1/T2 = 1/(2 T1) + 1/T_phi``."""
    if not (t1 > 0 and t2 > 0):
        raise ValueError("T1 and T2 must be positive")
    rate = 1.0 / t2 - 0.5 / t1
    if rate < -CONSISTENCY_RTOL / t2:
        raise ValueError(f"T2={t2} exceeds 2*T1={2 * t1}")
    return math.inf if rate <= 0 else 1.0 / rate


@dataclass(frozen=True)
class QubitDecoherence:
    """Per-qubit ``T1`` and pure-dephasing ``T_phi`` (same time unit)."""

    t1: float = math.inf
    t_phi: float = math.inf

    def __post_init__(self):
        if not (self.t1 > 0 and self.t_phi > 0):
            raise ValueError(f"nonpositive decoherence time in {self}")

    @classmethod
    def from_times(cls, t1: float, t2: float | None = None, t_phi: float | None = None) -> "QubitDecoherence":
        """Build from ``T1`` plus ``T2`` and/or ``T_phi``; if both given they must agree."""
        if t2 is None and t_phi is None:
            return cls(t1, math.inf)
        if t2 is None:
            return cls(t1, t_phi)
        derived = pure_dephasing_time(t1, t2)
        if t_phi is not None:
            if math.isinf(derived) != math.isinf(t_phi) or (
                not math.isinf(derived) and abs(derived - t_phi) > CONSISTENCY_RTOL * abs(t_phi)
            ):
                raise ValueError(f"T2={t2} implies T_phi={derived}, inconsistent with T_phi={t_phi}")
        return cls(t1, derived)

    @property
    def t2(self) -> float:
        rate = 0.5 / self.t1 + 1.0 / self.t_phi
        return math.inf if rate == 0 else 1.0 / rate


def damping_kraus(p: float, keep: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Relaxation and no-relaxation Kraus operators ``(A_r, A_n)``.

    ``keep`` optionally supplies ``sqrt(1-p)`` computed without cancellation.
    """
    p = _check_prob("p", p)
    keep = math.sqrt(1.0 - p) if keep is None else keep
    a_r = np.array([[0, math.sqrt(p)], [0, 0]], dtype=complex)
    a_n = np.array([[1, 0], [0, keep]], dtype=complex)
    return a_r, a_n


def dephasing_kraus(lam: float) -> tuple[np.ndarray, np.ndarray]:
    lam = _check_prob("lambda", lam)
    q = 0.5 * (1.0 - math.sqrt(1.0 - lam))
    return math.sqrt(1.0 - q) * I2, math.sqrt(q) * Z


def apply_kraus(rho: np.ndarray, kraus: Sequence[np.ndarray], target: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected square density matrix, got {rho.shape}")
    n = _n_qubits(rho.shape[0])
    if not 0 <= target < n:
        raise ValueError(f"target {target} out of range for {n} qubits")
    return sum(apply_gate(rho, k, [target], raw=True) for k in kraus)


def apply_damping(rho: np.ndarray, p: float, target: int = 0, keep: float | None = None) -> np.ndarray:
    return apply_kraus(rho, damping_kraus(p, keep), target)


def _scale_coherences(rho: np.ndarray, factor: float, target: int) -> np.ndarray:
    # equivalent to the phase-flip Kraus map, without forming 1 - 2q
    rho = np.asarray(rho, dtype=complex)
    n = _n_qubits(rho.shape[0])
    if not 0 <= target < n:
        raise ValueError(f"target {target} out of range for {n} qubits")
    bit = (np.arange(rho.shape[0]) >> (n - 1 - target)) & 1
    return np.where(bit[:, None] != bit[None, :], factor * rho, rho)


def apply_dephasing(rho: np.ndarray, lam: float, target: int = 0) -> np.ndarray:
    """Phase-flip channel scaling target-qubit coherences by ``sqrt(1-lambda)``."""
    lam = _check_prob("lambda", lam)
    return _scale_coherences(rho, math.sqrt(1.0 - lam), target)


def step_decoherence(
    rho: np.ndarray, dt: float, per_qubit: Sequence[QubitDecoherence | tuple[float, float]]
) -> np.ndarray:
    """Relax and dephase every qubit for duration ``dt``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    n = _n_qubits(np.asarray(rho).shape[0])
    if len(per_qubit) != n:
        raise ValueError(f"{len(per_qubit)} decoherence entries for {n} qubits")
    out = np.asarray(rho, dtype=complex)
    for q, params in enumerate(per_qubit):
        if not isinstance(params, QubitDecoherence):
            params = QubitDecoherence(*params)
        if not math.isinf(params.t1):
            keep = math.exp(-0.5 * dt / params.t1)
            out = apply_damping(out, damping_probability(dt, params.t1), q, keep)
        if not math.isinf(params.t_phi):
            out = _scale_coherences(out, math.exp(-dt / params.t_phi), q)
    return out


def completeness_defect(kraus: Sequence[np.ndarray]) -> float:
    """Max entry of ``|sum K^dag K - I|``."""
    total = sum(dagger(k) @ k for k in kraus)
    return float(np.max(np.abs(total - np.eye(total.shape[0]))))


def lindblad_superoperator(
    hamiltonian: np.ndarray, per_qubit: Sequence[QubitDecoherence]
) -> np.ndarray:
    """Row-major Liouvillian ``L`` with ``d vec(rho)/dt = L vec(rho)``.

    Jump operators are ``sqrt(1/T1) |0><1|`` and ``sqrt(1/(2 T_phi)) Z`` per
    qubit, which reproduce the Kraus channels above exactly.
    """
    h = np.asarray(hamiltonian, dtype=complex)
    d = h.shape[0]
    n = _n_qubits(d)
    eye = np.eye(d, dtype=complex)
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    for q, params in enumerate(per_qubit[:n]):
        jumps = []
        if not math.isinf(params.t1):
            jumps.append(math.sqrt(1.0 / params.t1) * lower)
        if not math.isinf(params.t_phi):
            jumps.append(math.sqrt(0.5 / params.t_phi) * Z)
        for j in jumps:
            full = _embed1(j, q, n)
            jdj = dagger(full) @ full
            sup += np.kron(full, full.conj()) - 0.5 * np.kron(jdj, eye) - 0.5 * np.kron(eye, jdj.T)
    return sup


def _embed1(op: np.ndarray, q: int, n: int) -> np.ndarray:
    out = np.array([[1.0]], dtype=complex)
    for k in range(n):
        out = np.kron(out, op if k == q else I2)
    return out
