"""Time-stepped two-qubit simulation of the CZ-based detection protocols.

Qubit 0 is the main qubit, qubit 1 the ancilla; times are in ns. Driven
windows are integrated with the exact propagator of the Lindblad generator
(constant drive within a window), idle windows with the exact decoherence
channels, so results do not depend on the step size beyond the requirement
that it divides every window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .channels import QubitDecoherence, apply_damping, lindblad_superoperator, step_decoherence
from .qmath import CZ, I2, PAULI, SIX_STATES, dagger, embed, ket_to_density, rotation_gate
from .report import FidelityReport

PROTOCOLS = ("fig4", "fig7a", "fig7b")
ROTATION_ERRORS = ("R1X", "R1Y", "R2Y", "R2Z", "R1Z", "R2X")
ERRORS = ROTATION_ERRORS + ("storage",)
ERROR_ALIASES = {"R1X_damp_storage": "storage"}
DETECTABLE = {
    "fig4": ("R1X", "R1Y", "R2Y", "R2Z"),
    "fig7a": ("R1Y", "R1Z", "R2Y", "R2Z"),
    "fig7b": ("R1X", "R1Y", "R2X", "R2Y"),
}

SELECT_FLOOR = 1e-9

# preparation rotations taking |0> to the six probe states (up to global phase)
_PREP = (("Z", 0.0), ("X", math.pi), ("Y", math.pi / 2), ("Y", -math.pi / 2), ("X", -math.pi / 2), ("X", math.pi / 2))


@dataclass(frozen=True)
class ProtocolConfig:
    protocol: str = "fig4"
    error: str = "R1X"
    theta2: float = 0.0  # Bloch-sphere rotation angle of the intentional error
    t1: tuple[float, float] = (math.inf, math.inf)
    t2: tuple[float, float] | None = None  # None means T2 = T1
    storage_p: float = 0.0
    dt: float = 0.5
    gate_ns: float = 10.0
    cz_ns: float = 40.0
    gap_ns: float = 5.0
    decohere_during_gates: bool = True
    check_invariants: bool = True

    def __post_init__(self):
        object.__setattr__(self, "error", ERROR_ALIASES.get(self.error, self.error))
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.error not in ERRORS:
            raise ValueError(f"unknown error {self.error!r}; choose from {ERRORS}")
        if self.error == "storage" and self.protocol != "fig7b":
            raise ValueError("damping storage is only defined for the fig7b protocol")
        if not 0 <= self.storage_p <= 1:
            raise ValueError("storage_p outside [0, 1]")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        t1 = tuple(float(x) for x in np.broadcast_to(self.t1, 2))
        object.__setattr__(self, "t1", t1)
        if self.t2 is not None:
            object.__setattr__(self, "t2", tuple(float(x) for x in np.broadcast_to(self.t2, 2)))

    @property
    def decoherence(self) -> tuple[QubitDecoherence, QubitDecoherence]:
        t2 = self.t2 if self.t2 is not None else self.t1
        return tuple(QubitDecoherence.from_times(a, b) for a, b in zip(self.t1, t2))


@dataclass(frozen=True)
class GateEvent:
    kind: str  # prepare_main, rotation, cz, error_rotation, storage, idle
    start: float
    duration: float
    targets: tuple[int, ...]
    axis: str = ""
    angle: float = 0.0

    @property
    def end(self) -> float:
        return self.start + self.duration


def _rot(kind, start, qubit, axis, angle, dur):
    return GateEvent(kind, start, dur, (qubit,), axis, angle)


def build_schedule(config: ProtocolConfig) -> list[GateEvent]:
    """Timed events; concurrent events share a start time."""
    g, c, s = config.gate_ns, config.cz_ns, config.gap_ns
    ev: list[GateEvent] = []
    t = 0.0

    def gap():
        nonlocal t
        if s > 0:
            ev.append(GateEvent("idle", t, s, (0, 1)))
        t += s

    def single(kind, qubit, axis, angle):
        nonlocal t
        ev.append(_rot(kind, t, qubit, axis, angle, g))
        t += g

    def cz():
        nonlocal t
        ev.append(GateEvent("cz", t, c, (0, 1)))
        t += c

    # encoding: prepare main || Y/2 on ancilla, then CZ
    ev.append(GateEvent("prepare_main", t, g, (0,)))
    ev.append(_rot("rotation", t, 1, "Y", math.pi / 2, g))
    t += g
    gap()
    cz()
    gap()
    pre = {"fig7a": (0, math.pi / 2), "fig7b": (1, -math.pi / 2)}.get(config.protocol)
    if pre is not None:
        single("rotation", pre[0], "Y", pre[1])
        gap()
    if config.error == "storage":
        ev.append(GateEvent("storage", t, 0.0, (0, 1)))
    else:
        qubit = int(config.error[1]) - 1
        single("error_rotation", qubit, config.error[2], config.theta2)
        gap()
    if pre is not None:
        if config.error == "storage":
            gap()
        single("rotation", pre[0], "Y", -pre[1])
        gap()
    # decoding
    cz()
    gap()
    single("rotation", 1, "Y", -math.pi / 2)
    gap()
    _validate(ev)
    return ev


def _validate(events: Sequence[GateEvent]) -> None:
    for q in (0, 1):
        busy = sorted((e.start, e.end) for e in events if q in e.targets and e.duration > 0)
        for (a0, a1), (b0, _) in zip(busy, busy[1:]):
            if b0 < a1 - 1e-9:
                raise ValueError(f"overlapping events on qubit {q} at t={b0}")


def schedule_duration(events: Sequence[GateEvent]) -> float:
    return max(e.end for e in events)


def _event_unitary(e: GateEvent, prep_index: int | None = None) -> np.ndarray:
    if e.kind == "cz":
        return CZ
    if e.kind == "prepare_main":
        axis, angle = _PREP[prep_index or 0]
        return embed(rotation_gate(axis, angle), [0], 2)
    if e.kind in ("rotation", "error_rotation"):
        return embed(rotation_gate(e.axis, e.angle), list(e.targets), 2)
    return np.eye(4, dtype=complex)


def _event_hamiltonian(e: GateEvent, prep_index: int) -> np.ndarray:
    if e.kind == "cz":
        # phase on |11> accumulating linearly to pi
        return -math.pi / e.duration * np.diag([0, 0, 0, 1]).astype(complex)
    if e.kind == "prepare_main":
        axis, angle = _PREP[prep_index]
        return embed(angle / (2 * e.duration) * PAULI[axis], [0], 2)
    if e.kind in ("rotation", "error_rotation"):
        return embed(e.angle / (2 * e.duration) * PAULI[e.axis], list(e.targets), 2)
    return np.zeros((4, 4), dtype=complex)


@lru_cache(maxsize=512)
def _propagator(h_key: bytes, step: float, deco: tuple[QubitDecoherence, ...], dissipate: bool) -> np.ndarray:
    h = np.frombuffer(h_key, dtype=complex).reshape(4, 4)
    params = deco if dissipate else (QubitDecoherence(), QubitDecoherence())
    return expm(lindblad_superoperator(h, params) * step)


@dataclass(frozen=True)
class SimulationResult:
    rho0: np.ndarray
    rho1: np.ndarray
    max_trace_error: float
    min_eigenvalue: float
    n_steps: int


def _windows(events: Sequence[GateEvent]) -> list[tuple[float, float, list[GateEvent]]]:
    cuts = sorted({round(e.start, 9) for e in events} | {round(e.end, 9) for e in events})
    out = []
    for a, b in zip(cuts, cuts[1:]):
        active = [e for e in events if e.duration > 0 and e.start <= a + 1e-9 and e.end >= b - 1e-9]
        out.append((a, b, active))
    return out


def simulate(config: ProtocolConfig, j: int, events: Sequence[GateEvent] | None = None) -> SimulationResult:
    """Evolve one probe state ``j`` (1..6 for |0>, |1>, |+>, |->, |+i>, |-i>)."""
    if not 1 <= j <= 6:
        raise ValueError("initial state index must be in 1..6")
    events = list(events) if events is not None else build_schedule(config)
    deco = config.decoherence
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0
    worst_tr, worst_eig, steps = 0.0, 0.0, 0

    def check(r):
        nonlocal worst_tr, worst_eig
        if config.check_invariants:
            worst_tr = max(worst_tr, abs(np.trace(r).real - 1.0))
            worst_eig = min(worst_eig, float(np.linalg.eigvalsh((r + dagger(r)) / 2)[0]))

    storage = [e for e in events if e.kind == "storage"]
    for a, b, active in _windows(events):
        for e in storage:
            if abs(e.start - a) < 1e-9:
                for q in e.targets:
                    rho = apply_damping(rho, config.storage_p, q)
                check(rho)
        n = max(1, math.ceil((b - a) / config.dt - 1e-9))
        step = (b - a) / n
        driven = [e for e in active if e.kind != "idle"]
        if not driven:
            for _ in range(n):
                rho = step_decoherence(rho, step, deco)
                check(rho)
            steps += n
            continue
        h = sum(_event_hamiltonian(e, j - 1) for e in driven)
        prop = _propagator(np.ascontiguousarray(h).tobytes(), step, deco, config.decohere_during_gates)
        vec = rho.reshape(16)
        for _ in range(n):
            vec = prop @ vec
            check(vec.reshape(4, 4))
        rho = vec.reshape(4, 4)
        steps += n
    for e in storage:
        if e.start >= schedule_duration(events) - 1e-9:
            for q in e.targets:
                rho = apply_damping(rho, config.storage_p, q)
    t = rho.reshape(2, 2, 2, 2)
    return SimulationResult(t[:, 0, :, 0].copy(), t[:, 1, :, 1].copy(), worst_tr, worst_eig, steps)


def ideal_circuit(config: ProtocolConfig) -> np.ndarray:
    """Product of the ideal gate unitaries after preparation."""
    u = np.eye(4, dtype=complex)
    for e in sorted(build_schedule(config), key=lambda e: e.start):
        if e.kind not in ("prepare_main", "idle", "storage"):
            u = _event_unitary(e) @ u
    return u


def ideal_correction(config: ProtocolConfig) -> np.ndarray:
    """Unitary undoing the ideal result-1 branch for the configured error type."""
    if config.error == "storage":
        raise ValueError("no unitary correction exists for real energy relaxation")
    cfg = replace(config, theta2=math.pi)
    u = ideal_circuit(cfg)
    branch = u.reshape(2, 2, 2, 2)[:, 1, :, 0]
    scale = math.sqrt(abs(np.linalg.det(branch)))
    if scale < 1e-9:
        return I2.copy()
    v = branch / scale
    if not np.allclose(dagger(v) @ v, I2, atol=1e-9):
        raise RuntimeError("result-1 branch is not proportional to a unitary")
    return dagger(v)


@dataclass(frozen=True)
class ProtocolResult:
    rho0: tuple[np.ndarray, ...]
    rho1: tuple[np.ndarray, ...]
    report: FidelityReport
    max_trace_error: float = 0.0
    min_eigenvalue: float = 0.0

    @property
    def p0(self) -> tuple[float, ...]:
        return tuple(float(np.trace(r).real) for r in self.rho0)

    @property
    def p1(self) -> tuple[float, ...]:
        return tuple(float(np.trace(r).real) for r in self.rho1)


def run_protocol(config: ProtocolConfig, qec: bool | None = None) -> ProtocolResult:
    """Simulate all six probes and combine them into the fidelity family.

    ``qec=None`` computes the corrected fidelity whenever it is defined.
    """
    if qec is None:
        qec = config.error != "storage"
    elif qec and config.error == "storage":
        raise ValueError("QEC is impossible for real energy relaxation during storage")
    events = build_schedule(config)
    sims = [simulate(config, j, events) for j in range(1, 7)]
    rho_in = [ket_to_density(k) for k in SIX_STATES]
    rho0 = [s.rho0 for s in sims]
    rho1 = [s.rho1 for s in sims]
    f_ign = np.mean([np.trace((a + b) @ r).real for a, b, r in zip(rho0, rho1, rho_in)])
    sel = sum(np.trace(a).real for a in rho0)
    # with (numerically) no result-0 events the post-selected fidelity is undefined
    f_qed = sum(np.trace(a @ r).real for a, r in zip(rho0, rho_in)) / sel if sel > SELECT_FLOOR else None
    f_qec = None
    if qec:
        c = ideal_correction(config)
        f_qec = float(np.mean([np.trace((a + c @ b @ dagger(c)) @ r).real for a, b, r in zip(rho0, rho1, rho_in)]))
    report = FidelityReport(
        f_ign=float(f_ign),
        f_qed_weighted=None if f_qed is None else float(f_qed),
        f_qec=f_qec,
        p_select=float(sel / 6),
    )
    return ProtocolResult(
        tuple(rho0),
        tuple(rho1),
        report,
        max(s.max_trace_error for s in sims),
        min(s.min_eigenvalue for s in sims),
    )


def protocol_fidelities(config: ProtocolConfig, qec: bool | None = None) -> FidelityReport:
    return run_protocol(config, qec).report


def sweep_theta(config: ProtocolConfig, theta_grid: Sequence[float], pool=None) -> list[FidelityReport]:
    cfgs = [replace(config, theta2=float(th)) for th in theta_grid]
    mapper = pool.map if pool is not None else map
    return list(mapper(protocol_fidelities, cfgs))


def sweep_storage(config: ProtocolConfig, p_grid: Sequence[float], pool=None) -> list[FidelityReport]:
    cfgs = [replace(config, protocol="fig7b", error="storage", storage_p=float(p)) for p in p_grid]
    mapper = pool.map if pool is not None else map
    return list(mapper(protocol_fidelities, cfgs))
