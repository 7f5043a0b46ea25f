"""Dense linear algebra for small qubit registers.

States are 1-D complex arrays, density matrices and operators are 2-D
complex arrays. Qubit 0 is the leftmost tensor factor and the most
significant bit of a basis index; ``|0>`` comes first in every one-qubit
basis. Matrices written with the excited state first (upper row = ``|1>``)
must be reversed with :func:`flip_basis` before comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

MAX_DIM = 2**14
INPUT_TOL = 1e-10
OUTPUT_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
CZ = np.diag([1, 1, 1, -1]).astype(complex)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class BlochPoint:
    """Polar/azimuthal angles of a pure qubit state."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.theta <= np.pi):
            raise ValueError(f"theta={self.theta} outside [0, pi]")

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array(
            [np.cos(self.theta / 2), np.exp(1j * self.phi) * np.sin(self.theta / 2)]
        )

    @property
    def cartesian(self) -> tuple[float, float, float]:
        st = np.sin(self.theta)
        return (st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta))

    def to_state(self) -> "PureState":
        return PureState(self.amplitudes)


@dataclass(frozen=True)
class PureState:
    """Amplitude vector, normalized unless ``unnormalized`` is set."""

    amplitudes: np.ndarray
    unnormalized: bool = False

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(amps)):
            raise ValueError("non-finite amplitude")
        if amps.size & (amps.size - 1) or amps.size > MAX_DIM:
            raise DimensionError(f"state dimension {amps.size} is not a power of two <= {MAX_DIM}")
        norm = float(np.vdot(amps, amps).real)
        if not self.unnormalized and abs(norm - 1.0) > OUTPUT_TOL:
            raise ValueError(f"state norm^2 = {norm!r}, expected 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_bloch(cls, theta: float, phi: float = 0.0) -> "PureState":
        return BlochPoint(theta, phi).to_state()

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


def flip_basis(m: np.ndarray) -> np.ndarray:
    """Convert a one-qubit matrix between excited-first and ground-first layout."""
    m = np.asarray(m)
    return m[::-1, ::-1] if m.ndim == 2 else m[::-1]


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def is_unitary(u: np.ndarray, tol: float = INPUT_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return np.allclose(dagger(u) @ u, np.eye(u.shape[0]), atol=tol, rtol=0)


def is_hermitian(m: np.ndarray, tol: float = INPUT_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(m, dagger(m), atol=tol, rtol=0)


def _n_qubits(dim: int) -> int:
    if dim < 1 or dim & (dim - 1):
        raise DimensionError(f"dimension {dim} is not a power of two")
    if dim > MAX_DIM:
        raise DimensionError(f"dimension {dim} exceeds cap {MAX_DIM}")
    return dim.bit_length() - 1


def tensor(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of vectors or matrices, left factor = qubit 0."""
    if not factors:
        raise ValueError("tensor() needs at least one factor")
    arrays = [np.asarray(f, dtype=complex) for f in factors]
    size = 1
    for a in arrays:
        size *= a.shape[0]
    if size > MAX_DIM:
        raise DimensionError(f"tensor product dimension {size} exceeds cap {MAX_DIM}")
    return reduce(np.kron, arrays)


def basis_state(bits: str | Sequence[int]) -> np.ndarray:
    """Computational basis ket, e.g. ``basis_state("01")``."""
    bits = [int(b) for b in bits]
    out = np.zeros(2 ** len(bits), dtype=complex)
    out[int("".join(map(str, bits)), 2) if bits else 0] = 1.0
    return out


def embed(gate: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Full 2^n operator acting as ``gate`` on ``targets`` (in that order)."""
    dim = 2**n_qubits
    if dim > MAX_DIM:
        raise DimensionError(f"dimension {dim} exceeds cap {MAX_DIM}")
    return _apply_left(np.eye(dim, dtype=complex), np.asarray(gate, dtype=complex), list(targets), n_qubits)


def _apply_left(m: np.ndarray, gate: np.ndarray, targets: list[int], n: int) -> np.ndarray:
    # contract gate with the row index of m (or with a ket)
    k = len(targets)
    if gate.shape != (2**k, 2**k):
        raise DimensionError(f"gate shape {gate.shape} does not match {k} target qubit(s)")
    if len(set(targets)) != k or any(t < 0 or t >= n for t in targets):
        raise ValueError(f"bad target list {targets} for {n} qubits")
    trailing = m.shape[1:]
    t = m.reshape((2,) * n + trailing)
    g = gate.reshape((2,) * (2 * k))
    t = np.tensordot(g, t, axes=(list(range(k, 2 * k)), targets))
    # tensordot puts the gate's output axes first; move them back into place
    t = np.moveaxis(t, list(range(k)), targets)
    return t.reshape(m.shape)


def apply_gate(
    x: np.ndarray,
    gate: np.ndarray,
    targets: Sequence[int],
    raw: bool = False,
) -> np.ndarray:
    """Apply ``gate`` to a ket (``U|psi>``) or density matrix (``U rho U^dag``).

    ``raw=True`` skips the unitarity check so Kraus factors can be applied.
    """
    x = np.asarray(x, dtype=complex)
    gate = np.asarray(gate, dtype=complex)
    if not raw and not is_unitary(gate):
        raise ValueError("gate is not unitary; pass raw=True for Kraus factors")
    targets = [int(t) for t in targets]
    n = _n_qubits(x.shape[0])
    if x.ndim == 1:
        return _apply_left(x, gate, targets, n)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionError(f"expected ket or square matrix, got shape {x.shape}")
    left = _apply_left(x, gate, targets, n)
    return dagger(_apply_left(dagger(left), gate, targets, n))


def partial_trace(rho: np.ndarray, keep: int | Sequence[int], n_qubits: int) -> np.ndarray:
    """Reduced density matrix on the ``keep`` qubit(s)."""
    rho = np.asarray(rho, dtype=complex)
    dim = 2**n_qubits
    if rho.shape != (dim, dim):
        raise DimensionError(f"rho shape {rho.shape} does not match {n_qubits} qubits")
    if not is_hermitian(rho):
        raise ValueError("rho is not hermitian")
    keep = [keep] if isinstance(keep, (int, np.integer)) else list(keep)
    if any(k < 0 or k >= n_qubits for k in keep) or len(set(keep)) != len(keep):
        raise ValueError(f"bad keep list {keep}")
    traced = [q for q in range(n_qubits) if q not in keep]
    t = rho.reshape((2,) * (2 * n_qubits))
    # trace pairs from the highest index down so axis numbers stay valid
    n_left = n_qubits
    for q in sorted(traced, reverse=True):
        t = np.trace(t, axis1=q, axis2=q + n_left)
        n_left -= 1
    d = 2 ** len(keep)
    out = t.reshape(d, d)
    # traced axes removed; remaining order follows sorted(keep)
    order = sorted(keep)
    if order != keep:
        perm = [order.index(k) for k in keep]
        out = out.reshape((2,) * (2 * len(keep)))
        out = np.transpose(out, perm + [p + len(keep) for p in perm]).reshape(d, d)
    return out


def state_fidelity(rho: np.ndarray, psi: PureState | np.ndarray) -> float:
    """``Tr(rho |psi><psi|)`` for a possibly unnormalized ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    amps = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
    if rho.shape != (amps.size, amps.size):
        raise DimensionError(f"rho shape {rho.shape} vs state dim {amps.size}")
    return float(np.vdot(amps, rho @ amps).real)


def rotation_gate(axis: str, angle: float) -> np.ndarray:
    """``exp(-i angle/2 sigma_axis)``; ``angle`` is the Bloch-sphere angle."""
    try:
        sigma = PAULI[axis.upper()]
    except KeyError:
        raise ValueError(f"unknown rotation axis {axis!r}") from None
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * sigma


def projector(bits: str) -> np.ndarray:
    ket = basis_state(bits)
    return np.outer(ket, ket.conj())


def ket_to_density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


SIX_STATES: tuple[np.ndarray, ...] = (
    KET0,
    KET1,
    np.array([1, 1], dtype=complex) / np.sqrt(2),
    np.array([1, -1], dtype=complex) / np.sqrt(2),
    np.array([1, 1j], dtype=complex) / np.sqrt(2),
    np.array([1, -1j], dtype=complex) / np.sqrt(2),
)
SIX_STATE_LABELS = ("0", "1", "+", "-", "+i", "-i")
