"""Cross-checks between the independent engines.

Each check reports a deviation and the tolerance it is held to; Monte-Carlo
checks report the deviation in standard errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from . import analytic as an
from . import scenario as sc
from .bloch import BlochAverager, bloch_average, make_rng
from .channels import apply_damping
from .correction import (
    ERROR_RESULT,
    NO_ERROR,
    BranchKK,
    LinearQubitOp,
    avg_fidelity_vs_unitary,
    numeric_unitary_search_batch,
    optimal_correction,
    six_state_fidelity,
    unitary_class,
)
from .protocol import DETECTABLE, ProtocolConfig, protocol_fidelities, run_protocol
from .qmath import I2, ket_to_density

DEFAULT_PROFILE = {
    "tolerance": None,
    "tol_closed": 1e-9,
    "tol_channel": 1e-12,
    "tol_ideal": 1e-9,
    "tol_storage": 1e-6,
    "tol_grid": 1e-6,
    "tol_six_state": 1e-9,
    "mc_sigma": 4.0,
    "mc_samples": 200_000,
}

P_GRID = (0.0, 0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95, 0.99, 1.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    deviation: float
    tolerance: float
    unit: str = "abs"

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name:<44s} dev={self.deviation:.3e} tol={self.tolerance:.1e} ({self.unit})"


def _tol(profile: dict, key: str) -> float:
    return profile["tolerance"] if profile.get("tolerance") is not None else profile[key]


def _worst(pairs) -> float:
    return max((abs(a - b) for a, b in pairs), default=0.0)


def check_closed_forms(profile: dict) -> Iterator[CheckResult]:
    tol = _tol(profile, "tol_closed")
    pairs = {k: [] for k in ("f_1q", "f_ign", "f_qed", "f_qed_weighted", "p_select", "f_qec_global", "f_qec_per_syndrome")}
    for n in (1, 2, 3, 4):
        for p in P_GRID:
            ref = an.report_nq(n, p)
            pairs["f_1q"].append((sc.oracle_fidelity(1, p, "ignore"), an.f_av_1q(p)))
            pairs["f_ign"].append((sc.oracle_fidelity(n, p, "ignore"), ref.f_ign))
            pairs["f_qed"].append((sc.oracle_fidelity(n, p, "qed_uniform"), ref.f_qed))
            pairs["f_qed_weighted"].append((sc.oracle_fidelity(n, p, "qed_weighted"), ref.f_qed_weighted))
            pairs["p_select"].append((sc.oracle_p_select(n, p), ref.p_select))
            pairs["f_qec_global"].append((sc.oracle_fidelity(n, p, "qec_global"), an.f_qec_nq(n, p)))
            pairs["f_qec_per_syndrome"].append((sc.oracle_fidelity(n, p, "qec_optimal"), an.f_qec_nq_per_syndrome(n, p)))
    for key, vals in pairs.items():
        yield CheckResult(f"analytic~scenario {key} N=1..4", _worst(vals), tol)
    two = []
    for p1 in (0.05, 0.3, 0.7):
        for p2 in (0.0, 0.2, 0.6, 0.95):
            r = an.report_2q(p1, p2)
            o = sc.fidelity_sweep(2, [p1, p2])
            two += [(o.f_ign, r.f_ign), (o.f_qed, r.f_qed), (o.f_qed_weighted, r.f_qed_weighted)]
            two += [(o.f_qec, r.f_qec), (o.p_select, r.p_select)]
    yield CheckResult("analytic~scenario two-qubit p1!=p2", _worst(two), tol)


def check_channel_map(profile: dict) -> Iterator[CheckResult]:
    rng = make_rng(11)
    dev = 0.0
    for n in (1, 2, 3, 4, 5, 6):
        ps = rng.uniform(0, 1, n)
        a = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
        rho = a @ a.conj().T
        rho /= np.trace(rho)
        direct = rho
        for q, p in enumerate(ps):
            direct = apply_damping(direct, p, q)
        dev = max(dev, float(np.max(np.abs(sc.register_channel(rho, ps) - direct))))
    yield CheckResult("scenario unraveling = Kraus channel N<=6", dev, _tol(profile, "tol_channel"))


def check_monte_carlo(profile: dict, seed: int = 0) -> Iterator[CheckResult]:
    cases = [(1, 0.3, "ignore"), (2, 0.4, "qed_weighted"), (3, 0.25, "qed_uniform"), (3, 0.7, "qec_optimal")]
    worst = 0.0
    for i, (n, p, mode) in enumerate(cases):
        est = sc.monte_carlo_fidelity(n, p, mode, profile["mc_samples"], seed=seed + i)
        ref = sc.oracle_fidelity(n, p, mode)
        worst = max(worst, abs(est["estimate"] - ref) / est["std_error"])
    yield CheckResult("monte-carlo~scenario", worst, profile["mc_sigma"], "sigma")


def check_protocol_ideal(profile: dict) -> Iterator[CheckResult]:
    tol = _tol(profile, "tol_ideal")
    thetas = np.linspace(0, math.pi, 9)[:-1]
    qed, ign = [], []
    for err in DETECTABLE["fig4"]:
        for th in thetas:
            r = protocol_fidelities(ProtocolConfig(protocol="fig4", error=err, theta2=float(th)))
            qed += [(r.f_qed_weighted, 1.0), (r.f_qec, 1.0)]
            expect = 1.0 if err == "R2Z" else math.cos(th / 2) ** 2 + math.sin(th / 2) ** 2 / 3
            ign.append((r.f_ign, expect))
    yield CheckResult("protocol ideal F_qed = F_qec = 1", _worst(qed), tol)
    yield CheckResult("protocol ideal F_ign", _worst(ign), tol)
    leak = 0.0
    for err in ("R1Z", "R2X"):
        for th in thetas:
            res = run_protocol(ProtocolConfig(protocol="fig4", error=err, theta2=float(th)), qec=False)
            leak = max(leak, max(res.p1))
    yield CheckResult("protocol undetectable errors give p1 = 0", leak, min(tol, 1e-12))


def check_storage(profile: dict) -> Iterator[CheckResult]:
    dev = []
    for p in np.linspace(0, 1, 11):
        r = protocol_fidelities(ProtocolConfig(protocol="fig7b", error="storage", storage_p=float(p)))
        dev.append((r.f_qed_weighted, an.f_qed_2q_weighted(p, p)))
        dev.append((r.f_ign, an.f_ign_2q(p, p)))
    yield CheckResult("fig7b ideal gates = two-qubit closed forms", _worst(dev), _tol(profile, "tol_storage"))


def check_grid_search(profile: dict) -> Iterator[CheckResult]:
    rng = make_rng(5)
    branches = []
    while len(branches) < 40:
        k, kt = rng.uniform(0, 1, 2)
        if k * k + kt * kt <= 1 and abs(k - kt) > 0.05:
            branches.append(BranchKK(k, kt, ERROR_RESULT if len(branches) % 2 else NO_ERROR))
    found = numeric_unitary_search_batch([b.op() for b in branches], resolution=48)
    excess, mismatch = 0.0, 0
    for b, f in zip(branches, found):
        best = optimal_correction(b)
        excess = max(excess, f["f_bar"] - best.f_bar_max)
        if b.outcome_class == ERROR_RESULT and unitary_class(f["best_u"]) != best.unitary_class:
            mismatch += 1
    yield CheckResult("grid search never beats closed form", max(excess, 0.0), _tol(profile, "tol_grid"))
    yield CheckResult("grid argmax class matches closed form", float(mismatch), 0.0, "count")


def random_linear_op(rng: np.random.Generator) -> LinearQubitOp:
    """Random completely positive, possibly trace-decreasing, qubit map."""
    ks = [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3)]
    total = sum(k.conj().T @ k for k in ks)
    scale = rng.uniform(0.2, 1.0) / np.max(np.linalg.eigvalsh(total))
    return LinearQubitOp.from_kraus([k * math.sqrt(scale) for k in ks])


def check_six_state(profile: dict) -> Iterator[CheckResult]:
    rng = make_rng(7)
    dev = 0.0
    for _ in range(25):
        op = random_linear_op(rng)

        def fid(states, op=op):
            return np.array([np.trace(op.image(ket_to_density(s)) @ ket_to_density(s)).real for s in states])

        quad = bloch_average(fid, BlochAverager.quadrature())
        dev = max(dev, abs(six_state_fidelity(op) - quad), abs(avg_fidelity_vs_unitary(op, I2) - quad))
    yield CheckResult("six-state identity vs quadrature", dev, _tol(profile, "tol_six_state"))


CHECKS: tuple[Callable[..., Iterator[CheckResult]], ...] = (
    check_closed_forms,
    check_channel_map,
    check_monte_carlo,
    check_protocol_ideal,
    check_storage,
    check_grid_search,
    check_six_state,
)


def run_verify(profile: dict | None = None, seed: int = 0, emit: Callable[[str], None] | None = print) -> list[CheckResult]:
    prof = dict(DEFAULT_PROFILE)
    prof.update({k: v for k, v in (profile or {}).items() if k in DEFAULT_PROFILE})
    results = []
    for check in CHECKS:
        gen = check(prof, seed) if check is check_monte_carlo else check(prof)
        for res in gen:
            results.append(res)
            if emit:
                emit(res.line())
    return results
