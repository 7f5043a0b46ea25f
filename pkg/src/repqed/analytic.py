"""Closed-form fidelities of repetitive encoding under energy relaxation.

Bloch-sphere averages of functions of ``|beta|^2`` reduce to integrals over
``x = |beta|^2``, which is uniform on ``[0, 1]`` for the Haar measure.
Averages of ``P(x) / (1 + B x)`` have logarithmic closed forms that cancel
catastrophically as ``B -> 0``; below ``SERIES_THRESHOLD`` they are summed
as a convergent power series in ``B`` instead.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .channels import damping_probability
from .report import FidelityReport, chi_from_average

SERIES_THRESHOLD = 0.5


def _check_p(*ps: float) -> None:
    for p in ps:
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"probability {p!r} outside [0, 1]")


def resolve_p(p: float | None = None, t: float | None = None, t1: float | None = None) -> float:
    """Relaxation probability given directly or as duration ``t`` with ``T1``."""
    if p is not None:
        if t is not None:
            raise ValueError("give either p or (t, T1), not both")
        _check_p(p)
        return float(p)
    if t is None or t1 is None:
        raise ValueError("need p or both t and T1")
    return damping_probability(t, t1)


# -- rational averages ------------------------------------------------------


def rational_moments(b: float, kmax: int) -> np.ndarray:
    """``L_k = int_0^1 x^k / (1 + b x) dx`` for ``k = 0..kmax`` (requires ``b > -1``)."""
    if b <= -1.0:
        raise ValueError(f"1 + b x vanishes on [0, 1] for b={b}")
    ks = np.arange(kmax + 1)
    if abs(b) < SERIES_THRESHOLD:
        out = np.zeros(kmax + 1)
        term = 1.0
        for m in range(200):
            out += term / (ks + m + 1)
            term *= -b
            if abs(term) < 1e-18:
                break
        return out
    out = np.empty(kmax + 1)
    out[0] = math.log1p(b) / b
    for k in range(1, kmax + 1):
        out[k] = (1.0 / k - out[k - 1]) / b
    return out


def rational_average(coeffs: Sequence[float], b: float) -> float:
    """Average of ``sum_k coeffs[k] x^k / (1 + b x)`` over uniform ``x`` in ``[0, 1]``."""
    coeffs = np.asarray(coeffs, dtype=float)
    if b == -1.0:
        # integrable only when the numerator vanishes at x = 1; divide by (1 - x)
        quot, rem = np.polynomial.polynomial.polydiv(coeffs, [1.0, -1.0])
        if abs(rem[0]) > 1e-12 * max(1.0, np.max(np.abs(coeffs))):
            raise ValueError("average diverges: pole at x = 1 with nonzero residue")
        quot = np.atleast_1d(quot)
        return float(np.sum(quot / (np.arange(quot.size) + 1)))
    return float(coeffs @ rational_moments(b, coeffs.size - 1))


def _square_plus(c: float, tail: float) -> np.ndarray:
    """Coefficients of ``((1 - x) + c x)^2 + tail * (1 - x) x``."""
    d = c - 1.0
    return np.array([1.0, 2.0 * d + tail, d * d - tail])


# -- Bloch-sphere integral table -------------------------------------------

_POLY_AVERAGES = {
    "a2": 1 / 2,
    "b2": 1 / 2,
    "a4": 1 / 3,
    "b4": 1 / 3,
    "a2b2": 1 / 6,
    "a6": 1 / 4,
    "b6": 1 / 4,
    "a2b4": 1 / 12,
    "a4b2": 1 / 12,
    "a4b4": 1 / 30,
}

# numerators of the log forms as polynomials in x = |beta|^2
_LOG_NUMERATORS = {
    "inv": [1.0],
    "b2_inv": [0.0, 1.0],
    "b4_inv": [0.0, 0.0, 1.0],
    "a4_inv": [1.0, -2.0, 1.0],
    "a2b2_inv": [0.0, 1.0, -1.0],
}

BLOCH_KINDS = tuple(_POLY_AVERAGES) + tuple(_LOG_NUMERATORS)


def _log_form_literal(kind: str, a: float, b: float) -> float:
    lg = math.log1p(b / a)
    if kind == "inv":
        return lg / b
    if kind == "b2_inv":
        return 1 / b - a / b**2 * lg
    if kind == "b4_inv":
        return 1 / (2 * b) - a / b**2 + a**2 / b**3 * lg
    if kind == "a4_inv":
        return -3 / (2 * b) - a / b**2 + (a + b) ** 2 / b**3 * lg
    if kind == "a2b2_inv":
        return 1 / (2 * b) + a / b**2 - a * (a + b) / b**3 * lg
    raise KeyError(kind)


def bloch_average_closed(kind: str, a: float = 1.0, b: float = 0.0) -> float:
    """Tabulated Bloch-sphere average.

    ``kind`` names the integrand: ``"a4"`` is ``|alpha|^4``, ``"a2b2"`` is
    ``|alpha|^2 |beta|^2`` and so on; the ``*_inv`` kinds divide by
    ``a + b |beta|^2``.
    """
    if kind in _POLY_AVERAGES:
        return _POLY_AVERAGES[kind]
    if kind not in _LOG_NUMERATORS:
        raise ValueError(f"unknown average kind {kind!r}; choose from {BLOCH_KINDS}")
    if a <= 0 or a + b <= 0:
        raise ValueError(f"log forms need a > 0 and a + b > 0, got a={a}, b={b}")
    if abs(b / a) >= SERIES_THRESHOLD:
        return _log_form_literal(kind, a, b)
    return rational_average(_LOG_NUMERATORS[kind], b / a) / a


# -- single qubit -----------------------------------------------------------


def f_av_1q(p: float) -> float:
    """Average state fidelity of an unencoded qubit after relaxation probability ``p``."""
    _check_p(p)
    return 2 / 3 + math.sqrt(1 - p) / 3 - p / 6


def f_chi_from_av(f_av: float) -> float:
    return chi_from_average(f_av)


def _f_av_n_literal(p: float) -> float:
    r = math.sqrt(1 - p)
    return 0.5 + (r * (2 - p) - 2 * (1 - p)) / p**2 + (1 - p) * (2 * r - 2 + p) / p**3 * math.log1p(-p)


def conditional_fidelities_1q(p: float) -> dict[str, float]:
    """Per-scenario fidelities of one relaxing qubit (relaxed ``r`` / not relaxed ``n``)."""
    _check_p(p)
    r = math.sqrt(1 - p)
    if p >= SERIES_THRESHOLD and p < 1:
        f_n = _f_av_n_literal(p)
    else:
        f_n = rational_average(_square_plus(r, 0.0), -p)
    return {
        "f_av_r": 0.5,
        "f_av_n": f_n,
        "f_av_r_weighted": 1 / 3,
        "f_av_n_weighted": (2 - p + r) / (3 - 1.5 * p),
        "p_r_avg": p / 2,
        "p_n_avg": 1 - p / 2,
    }


# -- two qubits -------------------------------------------------------------


def f_ign_2q(p1: float, p2: float) -> float:
    _check_p(p1, p2)
    return 2 / 3 + math.sqrt((1 - p1) * (1 - p2)) / 3 - p1 / 6


def _f_qed_2q_literal(p1: float, p2: float) -> float:
    b = 2 * p1 * p2 - p1 - p2
    s = math.sqrt(1 - p1) * math.sqrt(1 - p2)
    return (
        0.5
        + (s - 1) / b
        + (p1 + p2 - 2 + 2 * s) / b**2
        + ((1 + b) ** 2 + s**2 - (1 + b) * (2 * s + p1 * p2)) / b**3 * math.log1p(b)
    )


def f_qed_2q(p1: float, p2: float) -> float:
    """QED fidelity with uniform Bloch-sphere weight (selected result 0)."""
    _check_p(p1, p2)
    b = 2 * p1 * p2 - p1 - p2
    s = math.sqrt(1 - p1) * math.sqrt(1 - p2)
    if abs(b) >= SERIES_THRESHOLD and 1 + b > 0:
        return _f_qed_2q_literal(p1, p2)
    return rational_average(_square_plus(s, p1 * p2), b)


def f_qed_2q_weighted(p1: float, p2: float) -> float:
    """QED fidelity weighted by the selection probability."""
    _check_p(p1, p2)
    s = math.sqrt(1 - p1) * math.sqrt(1 - p2)
    return (2 - p1 - p2 + 1.5 * p1 * p2 + s) / (3 * (1 + p1 * p2 - (p1 + p2) / 2))


def p_select_2q(p1: float, p2: float) -> float:
    """Average probability of ancilla result 0."""
    _check_p(p1, p2)
    return 1 + p1 * p2 - (p1 + p2) / 2


def f_qec_2q(p1: float, p2: float) -> float:
    _check_p(p1, p2)
    return 2 / 3 + math.sqrt((1 - p1) * (1 - p2)) / 3 - min(p1, p2) / 6


def report_2q(p1: float, p2: float) -> FidelityReport:
    return FidelityReport(
        f_1q=f_av_1q(p1),
        f_ign=f_ign_2q(p1, p2),
        f_qed=f_qed_2q(p1, p2),
        f_qed_weighted=f_qed_2q_weighted(p1, p2),
        f_qec=f_qec_2q(p1, p2),
        p_select=p_select_2q(p1, p2),
    )


# -- N qubits, uniform p ----------------------------------------------------


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"number of qubits must be a positive integer, got {n}")
    return int(n)


def f_ign_nq(n: int, p: float) -> float:
    n = _check_n(n)
    _check_p(p)
    return 2 / 3 + (1 - p) ** (n / 2) / 3 - p / 6


def _f_qed_nq_literal(n: int, p: float) -> float:
    q = (1 - p) ** n
    b = -1 + q + p**n
    s = 2 * (1 - p) ** (n / 2) + p**n
    return (
        (-3 + s + q) / (2 * b)
        + (-1 + s - q) / b**2
        + ((1 + b) ** 2 + q - s * (1 + b)) / b**3 * math.log1p(b)
    )


def f_qed_nq(n: int, p: float) -> float:
    n = _check_n(n)
    _check_p(p)
    b = -1 + (1 - p) ** n + p**n
    if abs(b) >= SERIES_THRESHOLD and 1 + b > 0:
        return _f_qed_nq_literal(n, p)
    return rational_average(_square_plus((1 - p) ** (n / 2), p**n), b)


def f_qed_nq_weighted(n: int, p: float) -> float:
    n = _check_n(n)
    _check_p(p)
    q = (1 - p) ** n
    return (2 / 3) * (1 + q + (1 - p) ** (n / 2) + 0.5 * p**n) / (1 + q + p**n)


def p_select_nq(n: int, p: float) -> float:
    """Average probability of the all-zero syndrome."""
    n = _check_n(n)
    _check_p(p)
    return (1 + (1 - p) ** n + p**n) / 2


def f_qec_nq(n: int, p: float) -> float:
    """Best correction shared by all error syndromes (flip every one or none).

    Coincides with :func:`f_ign_nq` for ``p <= 1/2``. For ``N >= 3`` a
    syndrome-by-syndrome choice does better, see :func:`f_qec_nq_per_syndrome`.
    """
    n = _check_n(n)
    _check_p(p)
    q = (1 - p) ** n
    return 0.5 + (1 - p) ** (n / 2) / 3 + q / 6 + max(p - p**n, (1 - p) - q) / 6


def f_qec_nq_per_syndrome(n: int, p: float) -> float:
    """Correction chosen separately for each ancilla string.

    A string with ``w`` ones among ``N-1`` ancillas gives ``k^2 = (1-p) p^w (1-p)^(N-1-w)``
    and ``k_tilde^2 = p (1-p)^w p^(N-1-w)``; each contributes
    ``max(2k^2 + k_tilde^2, k^2 + 2k_tilde^2) / 6``.
    """
    n = _check_n(n)
    _check_p(p)
    k0 = (1 - p) ** (n / 2)
    total = (1 + k0 + k0**2 + p**n / 2) / 3
    for w in range(1, n):
        k2 = (1 - p) * p**w * (1 - p) ** (n - 1 - w)
        kt2 = p * (1 - p) ** w * p ** (n - 1 - w)
        total += math.comb(n - 1, w) * (k2 + kt2 + max(k2, kt2)) / 6
    return total


def report_nq(n: int, p: float) -> FidelityReport:
    return FidelityReport(
        f_1q=f_av_1q(p),
        f_ign=f_ign_nq(n, p),
        f_qed=f_qed_nq(n, p),
        f_qed_weighted=f_qed_nq_weighted(n, p),
        f_qec=f_qec_nq(n, p),
        p_select=p_select_nq(n, p),
    )


# -- counting and multi-cycle estimates ------------------------------------


def hamming_min_qubits(max_n: int = 64) -> tuple[int, list[tuple[int, int, int, bool]]]:
    """Smallest ``N`` with ``2^(N-1) >= 1 + 2N``, plus the ``(N, lhs, rhs, holds)`` trace."""
    trace = []
    for n in range(1, max_n + 1):
        lhs, rhs = 2 ** (n - 1), 1 + 2 * n
        trace.append((n, lhs, rhs, lhs >= rhs))
        if lhs >= rhs:
            return n, trace
    raise RuntimeError("no N found")  # pragma: no cover


def f_qed_multicycle_estimate(n: int, m: int, t: float, t1: float) -> dict[str, float]:
    """Small-error estimate for ``m`` QED cycles separated by pi-pulses.

    ``validity`` is ``n t / (m T1)``, which should be small for the estimate to hold.
    """
    n = _check_n(n)
    if m < 1 or m % 2:
        raise ValueError(f"pi-pulse compensation needs an even number of cycles, got M={m}")
    if t < 0 or not t1 > 0:
        raise ValueError("need t >= 0 and T1 > 0")
    x = t / (m * t1)
    return {
        "fidelity": 1 - m * x**n / 3,
        "p_select": math.exp(-t * n / (2 * t1)),
        "validity": n * x,
    }
