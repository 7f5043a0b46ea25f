"""Brute-force oracle for N-qubit repetitive encoding under relaxation.

Each of the ``2^N`` relaxation patterns is a linear map from the main qubit
into the register: encode by CNOT fan-out, apply one Kraus factor per qubit,
decode by the same fan-out. Projecting the ancillas onto a measured string
leaves a 2x2 operator per pattern; each syndrome gathers two of them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .bloch import BlochAverager, bloch_average, haar_states, make_rng
from .channels import damping_kraus, damping_probability
from .correction import ERROR_RESULT, NO_ERROR, branch_from_kraus, optimal_correction
from .qmath import CNOT, I2, X, dagger, embed, tensor
from .report import FidelityReport

MODES = ("ignore", "qed_uniform", "qed_weighted", "qec_optimal", "qec_global")
MC_MODES = MODES[:4]
MAX_QUBITS = 12

Mask = tuple[int, ...]


def _check_inputs(n: int, p_list: Sequence[float] | float) -> list[float]:
    if int(n) != n or not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"N must be an integer in [1, {MAX_QUBITS}], got {n}")
    if np.isscalar(p_list):
        p_list = [float(p_list)] * int(n)
    p_list = [float(p) for p in p_list]
    if len(p_list) != n:
        raise ValueError(f"{len(p_list)} probabilities for {n} qubits")
    for p in p_list:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability {p} outside [0, 1]")
    return p_list


def all_masks(n: int) -> list[Mask]:
    return list(itertools.product((0, 1), repeat=n))


@lru_cache(maxsize=None)
def fanout(n: int) -> np.ndarray:
    """CNOTs from qubit 0 to each ancilla; self-inverse."""
    u = np.eye(2**n, dtype=complex)
    for j in range(1, n):
        u = embed(CNOT, [0, j], n) @ u
    return u


@lru_cache(maxsize=None)
def encoder(n: int) -> np.ndarray:
    """``2^n x 2`` isometry ``a|0> + b|1> -> a|0..0> + b|1..1>`` built from the circuit."""
    zeros = np.zeros(2 ** (n - 1), dtype=complex)
    zeros[0] = 1
    cols = [fanout(n) @ tensor(ket, zeros) for ket in (np.array([1, 0]), np.array([0, 1]))]
    return np.stack(cols, axis=1)


def mask_kraus(mask: Mask, p_list: Sequence[float]) -> np.ndarray:
    factors = []
    for bit, p in zip(mask, p_list):
        a_r, a_n = damping_kraus(p)
        factors.append(a_r if bit else a_n)
    return tensor(*factors)


def _ancilla_projection(bits: Sequence[int], n: int) -> np.ndarray:
    """``2 x 2^n`` map ``(I ⊗ <bits|)``."""
    idx = int("".join(map(str, bits)), 2) if len(bits) else 0
    out = np.zeros((2, 2**n), dtype=complex)
    out[0, idx] = 1
    out[1, 2 ** (n - 1) + idx] = 1
    return out


@lru_cache(maxsize=None)
def _structural_outcome(mask: Mask) -> tuple[int, ...]:
    # unit-strength Kraus factors so every pattern has support on |1..1>
    n = len(mask)
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    op = tensor(*[lower if b else I2 for b in mask]) if n else np.eye(1)
    out = fanout(n) @ op @ encoder(n)[:, 1]
    support = np.flatnonzero(np.abs(out) > 0.5)
    if support.size != 1:
        raise RuntimeError(f"pattern {mask} does not decode to a basis state")
    bits = format(int(support[0]), f"0{n}b")
    return tuple(int(c) for c in bits[1:])


def scenario_outcome(mask: Mask) -> tuple[int, ...]:
    """Ancilla string produced by relaxation pattern ``mask``, from circuit simulation."""
    return _structural_outcome(tuple(int(b) for b in mask))


def complement_rule(mask: Mask) -> tuple[int, ...]:
    """Ancilla string predicted combinatorially: relaxed ancillas read 1, complemented if the main qubit relaxed."""
    anc = tuple(int(b) for b in mask[1:])
    return tuple(1 - b for b in anc) if mask[0] else anc


@dataclass(frozen=True)
class Scenario:
    relax_mask: Mask
    probability: float
    state: np.ndarray  # normalized register state after relaxation (zero if impossible)


@dataclass(frozen=True)
class OutcomeBranch:
    result_bits: tuple[int, ...]
    unnormalized_rho: np.ndarray  # main qubit after decoding, weighted by probability
    probability: float
    masks: tuple[Mask, ...]


def unravel(n: int, p_list: Sequence[float] | float, alpha: complex, beta: complex) -> list[Scenario]:
    """Split relaxation of the encoded state into its ``2^n`` patterns."""
    p_list = _check_inputs(n, p_list)
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1) > 1e-12:
        raise ValueError(f"|alpha|^2 + |beta|^2 = {norm}, expected 1")
    encoded = encoder(n) @ np.array([alpha, beta], dtype=complex)
    out = []
    for mask in all_masks(n):
        v = mask_kraus(mask, p_list) @ encoded
        prob = float(np.vdot(v, v).real)
        out.append(Scenario(mask, prob, v / math.sqrt(prob) if prob > 0 else v))
    return out


def decode_and_measure(scenarios: Sequence[Scenario], n: int) -> list[OutcomeBranch]:
    """Decode each pattern, project the ancillas, and group patterns by syndrome."""
    groups: dict[tuple[int, ...], list] = {}
    dec = fanout(n)
    for sc in scenarios:
        bits = scenario_outcome(sc.relax_mask)
        v = _ancilla_projection(bits, n) @ (dec @ sc.state) * math.sqrt(sc.probability)
        groups.setdefault(bits, []).append((sc.relax_mask, np.outer(v, v.conj())))
    out = []
    for bits in sorted(groups):
        masks = tuple(m for m, _ in groups[bits])
        rho = sum(r for _, r in groups[bits])
        out.append(OutcomeBranch(bits, rho, float(np.trace(rho).real), masks))
    return out


def outcome_operators(n: int, p_list: Sequence[float] | float) -> dict[tuple[int, ...], list[np.ndarray]]:
    """Per syndrome, the 2x2 Kraus operators (one per pattern) acting on the main qubit."""
    p_list = _check_inputs(n, p_list)
    dec, enc = fanout(n), encoder(n)
    ops: dict[tuple[int, ...], list[np.ndarray]] = {}
    for mask in all_masks(n):
        bits = scenario_outcome(mask)
        m = _ancilla_projection(bits, n) @ dec @ mask_kraus(mask, p_list) @ enc
        ops.setdefault(bits, []).append(m)
    return ops


def register_channel(rho: np.ndarray, p_list: Sequence[float]) -> np.ndarray:
    """Sum of pattern density matrices (should equal qubit-wise damping)."""
    out = np.zeros_like(rho, dtype=complex)
    for mask in all_masks(len(p_list)):
        k = mask_kraus(mask, p_list)
        out += k @ rho @ dagger(k)
    return out


# -- fidelity functionals ---------------------------------------------------


def _numerator(states: np.ndarray, ops: Sequence[np.ndarray]) -> np.ndarray:
    # sum_s |<psi|M_s|psi>|^2
    return sum(np.abs(np.einsum("ni,ij,nj->n", states.conj(), m, states)) ** 2 for m in ops)


def _probability(states: np.ndarray, ops: Sequence[np.ndarray]) -> np.ndarray:
    return sum(np.sum(np.abs(states @ m.T) ** 2, axis=1) for m in ops)


def corrections(n: int, p_list: Sequence[float] | float) -> dict[tuple[int, ...], np.ndarray]:
    """Best unitary correction per syndrome, chosen from the branch's ``(k, k_tilde)``."""
    out = {}
    for bits, ops in outcome_operators(n, p_list).items():
        cls = ERROR_RESULT if any(bits) else NO_ERROR
        out[bits] = optimal_correction(branch_from_kraus(ops, cls)).unitary
    return out


def oracle_fidelity(
    n: int,
    p_list: Sequence[float] | float,
    mode: str,
    averager: BlochAverager | None = None,
) -> float:
    """Average fidelity of one syndrome-handling strategy."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
    averager = averager or BlochAverager.quadrature()
    ops = outcome_operators(n, p_list)
    zero = tuple([0] * (n - 1))
    if mode == "ignore":
        every = [m for group in ops.values() for m in group]
        return bloch_average(lambda s: _numerator(s, every), averager)
    if mode == "qec_optimal":
        fix = corrections(n, p_list)
        every = [fix[bits] @ m for bits, group in ops.items() for m in group]
        return bloch_average(lambda s: _numerator(s, every), averager)
    if mode == "qec_global":
        # one policy shared by every error syndrome: leave all, or flip all
        best = -np.inf
        for u in (I2, X):
            every = [m if bits == zero else u @ m for bits, group in ops.items() for m in group]
            best = max(best, bloch_average(lambda s: _numerator(s, every), averager))
        return best
    sel = ops[zero]
    if mode == "qed_weighted":
        num = bloch_average(lambda s: _numerator(s, sel), averager)
        den = bloch_average(lambda s: _probability(s, sel), averager)
        return num / den
    return bloch_average(lambda s: _numerator(s, sel) / _probability(s, sel), averager, linear=False)


def oracle_p_select(n: int, p_list: Sequence[float] | float, averager: BlochAverager | None = None) -> float:
    ops = outcome_operators(n, p_list)
    sel = ops[tuple([0] * (n - 1))]
    return bloch_average(lambda s: _probability(s, sel), averager or BlochAverager.quadrature())


def fidelity_sweep(
    n: int, p_list: Sequence[float] | float, averager: BlochAverager | None = None
) -> FidelityReport:
    """Every strategy for one parameter point; ``f_qed`` is omitted under six-state averaging."""
    p_list = _check_inputs(n, p_list)
    averager = averager or BlochAverager.quadrature()
    uniform = None if averager.mode == "six_state" else oracle_fidelity(n, p_list, "qed_uniform", averager)
    return FidelityReport(
        f_1q=oracle_fidelity(1, p_list[:1], "ignore", averager),
        f_ign=oracle_fidelity(n, p_list, "ignore", averager),
        f_qed=uniform,
        f_qed_weighted=oracle_fidelity(n, p_list, "qed_weighted", averager),
        f_qec=oracle_fidelity(n, p_list, "qec_optimal", averager),
        p_select=oracle_p_select(n, p_list, averager),
    )


# -- Monte-Carlo trajectories ----------------------------------------------


def monte_carlo_fidelity(
    n: int,
    p_list: Sequence[float] | float,
    mode: str,
    n_samples: int = 10**6,
    seed: int = 0,
    chunk: int = 1 << 16,
) -> dict[str, float]:
    """Sample Haar initial states and one relaxation pattern per trajectory.

    ``qed_weighted`` averages fidelity over selected trajectories;
    ``qed_uniform`` reweights each selected trajectory by ``1/P_select(psi)``.
    The stream is Philox-based, so a seed reproduces across platforms.
    """
    if mode not in MC_MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {MC_MODES}")
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    ops = outcome_operators(n, p_list)
    fix = corrections(n, p_list) if mode == "qec_optimal" else None
    mats, selected = [], []
    for bits, group in ops.items():
        for m in group:
            mats.append(fix[bits] @ m if fix is not None else m)
            selected.append(not any(bits))
    mats = np.array(mats)
    selected = np.array(selected)
    sel_mats = mats[selected]
    rng = make_rng(seed)
    values, n_sel = [], 0
    remaining = n_samples
    while remaining > 0:
        size = min(chunk, remaining)
        remaining -= size
        psi = haar_states(size, rng)
        u = rng.uniform(0.0, 1.0, size)
        out = np.einsum("sij,nj->nsi", mats, psi)
        probs = np.sum(np.abs(out) ** 2, axis=2)
        cdf = np.cumsum(probs, axis=1)
        pick = np.minimum(np.sum(cdf < (u * cdf[:, -1])[:, None], axis=1), len(mats) - 1)
        v = out[np.arange(size), pick]
        pv = probs[np.arange(size), pick]
        overlap = np.abs(np.sum(psi.conj() * v, axis=1)) ** 2
        fid = np.where(pv > 0, overlap / np.where(pv > 0, pv, 1), 0.0)
        hit = selected[pick]
        if mode in ("ignore", "qec_optimal"):
            values.append(fid)
        elif mode == "qed_weighted":
            values.append(fid[hit])
        else:
            p_sel = _probability(psi, sel_mats)
            values.append(np.where(hit, fid / np.where(hit, p_sel, 1), 0.0))
        n_sel += int(hit.sum())
    vals = np.concatenate(values)
    if vals.size == 0:
        raise RuntimeError("no selected trajectories")
    std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
    return {"estimate": float(vals.mean()), "std_error": std / math.sqrt(vals.size), "n_used": int(vals.size), "n_selected": n_sel}


# -- repeated QED cycles ---------------------------------------------------

PULSE_PLACEMENTS = ("after_reencode", "before_decode")


def _cycle_operators(n: int, p: float, pulse: str | None) -> tuple[list[np.ndarray], np.ndarray]:
    """Selected-branch operators of one encode/relax/decode cycle, plus the no-relaxation one."""
    p_list = [p] * n
    dec, enc = fanout(n), encoder(n)
    xs = tensor(*[X] * n)
    proj = _ancilla_projection([0] * (n - 1), n)
    ops, none_op = [], None
    for mask in all_masks(n):
        k = mask_kraus(mask, p_list)
        if pulse == "after_reencode":
            m = proj @ dec @ k @ xs @ enc
        elif pulse == "before_decode":
            m = proj @ dec @ xs @ k @ enc
        else:
            m = proj @ dec @ k @ enc
        if np.any(np.abs(m) > 0) or not any(mask):
            ops.append(m)
        if not any(mask):
            none_op = m
    return ops, none_op


def multicycle_simulate(
    n: int,
    m: int,
    t: float,
    t1: float,
    pi_pulses: bool = True,
    placement: str = "after_reencode",
) -> dict:
    """Run ``m`` QED cycles of duration ``t/m`` keeping only all-zero syndromes.

    With ``pi_pulses`` every cycle carries one logical bit flip: ``after_reencode``
    flips all physical qubits right after (re-)encoding, ``before_decode`` flips
    them just before decoding. An odd number of flips is undone by a final
    X on the main qubit so the reference stays the input state.
    """
    if placement not in PULSE_PLACEMENTS:
        raise ValueError(f"placement must be one of {PULSE_PLACEMENTS}")
    if m < 1:
        raise ValueError("need at least one cycle")
    p = damping_probability(t / m, t1)
    cyc, none_cyc = _cycle_operators(n, p, placement if pi_pulses else None)
    total = [I2.copy()]
    none_total = I2.copy()
    for _ in range(m):
        total = [c @ a for a in total for c in cyc]
        none_total = none_cyc @ none_total
    if pi_pulses and m % 2:
        total = [X @ a for a in total]
        none_total = X @ none_total
    six = BlochAverager.six_state()
    num = bloch_average(lambda s: _numerator(s, total), six)
    den = bloch_average(lambda s: _probability(s, total), six)
    uniform = bloch_average(lambda s: _numerator(s, total) / _probability(s, total), BlochAverager.quadrature(), linear=False)
    return {
        "fidelity": num / den,
        "fidelity_uniform": uniform,
        "p_select": den,
        "none_operator": none_total,
        "p_cycle": p,
    }
