"""Acceptance criteria 1-11 at their stated tolerances.

Each test prints one ``PASS``/``FAIL`` line; the lines are also collected
into the pytest terminal summary under "acceptance criteria".
"""

import math
import shutil
import subprocess
import sys
import time
from dataclasses import replace

import numpy as np
import pytest

from repqed import analytic as an
from repqed import scenario as sc
from repqed.bloch import BlochAverager, bloch_average
from repqed.correction import (
    ERROR_RESULT,
    NO_ERROR,
    BranchKK,
    avg_fidelity_vs_unitary,
    euler_unitary,
    numeric_unitary_search_batch,
    optimal_correction,
    six_state_fidelity,
    unitary_class,
)
from repqed.protocol import ProtocolConfig, protocol_fidelities, run_protocol, sweep_theta
from repqed.qmath import dagger, ket_to_density
from repqed.verify import random_linear_op

T1_SET = (300.0, 500.0, 700.0)


def record(log, num, title, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'}  criterion {num:2d}  {title}: {detail}"
    log[num] = line
    print(line)
    assert passed, line


# -- 1 ----------------------------------------------------------------------------


def test_criterion_01_oracle_equivalence(acceptance_log):
    start = time.perf_counter()
    grid = np.linspace(0, 1, 50)
    worst: dict[str, float] = {}

    def note(name, a, b):
        worst[name] = max(worst.get(name, 0.0), abs(a - b))

    for p in grid:
        note("N1 f_1q", an.f_av_1q(p), sc.oracle_fidelity(1, p, "ignore"))
        p2 = p / 2
        note("N2 f_ign(p1!=p2)", an.f_ign_2q(p, p2), sc.oracle_fidelity(2, [p, p2], "ignore"))
        note("N2 f_qed(p1!=p2)", an.f_qed_2q(p, p2), sc.oracle_fidelity(2, [p, p2], "qed_uniform"))
        note("N2 f_qed_w(p1!=p2)", an.f_qed_2q_weighted(p, p2), sc.oracle_fidelity(2, [p, p2], "qed_weighted"))
        note("N2 f_qec(p1!=p2)", an.f_qec_2q(p, p2), sc.oracle_fidelity(2, [p, p2], "qec_optimal"))
        note("N2 f_qec(p2!=p1)", an.f_qec_2q(p2, p), sc.oracle_fidelity(2, [p2, p], "qec_optimal"))
        for n in (2, 3, 4):
            note(f"N{n} f_ign", an.f_ign_nq(n, p), sc.oracle_fidelity(n, p, "ignore"))
            note(f"N{n} f_qed", an.f_qed_nq(n, p), sc.oracle_fidelity(n, p, "qed_uniform"))
            note(f"N{n} f_qed_w", an.f_qed_nq_weighted(n, p), sc.oracle_fidelity(n, p, "qed_weighted"))
            note(f"N{n} p_select", an.p_select_nq(n, p), sc.oracle_p_select(n, p))
            note(f"N{n} f_qec", an.f_qec_nq(n, p), sc.oracle_fidelity(n, p, "qec_optimal"))
            # supplementary pairings: shared-policy formula vs shared-policy oracle, per-syndrome vs per-syndrome
            note(f"N{n} f_qec~global", an.f_qec_nq(n, p), sc.oracle_fidelity(n, p, "qec_global"))
            note(f"N{n} f_qec_per_syndrome", an.f_qec_nq_per_syndrome(n, p), sc.oracle_fidelity(n, p, "qec_optimal"))
    elapsed = time.perf_counter() - start
    bad = {k: v for k, v in worst.items() if v > 1e-9 and "~" not in k and "per_syndrome" not in k}
    extra_ok = all(v <= 1e-9 for k, v in worst.items() if "~" in k or "per_syndrome" in k)
    passed = not bad and elapsed < 10
    if bad:
        detail = "mismatch " + ", ".join(f"{k} {v:.2e}" for k, v in sorted(bad.items()))
        detail += (
            "; the closed-form N-qubit f_qec applies one correction to every error syndrome and matches "
            f"that oracle ({'ok' if extra_ok else 'NOT ok'}), while the scenario engine corrects per syndrome"
        )
    else:
        detail = f"max deviation {max(worst.values()):.1e}"
    record(acceptance_log, 1, "closed forms = scenario engine", passed, f"{detail}; {elapsed:.1f} s")


# -- 2 ----------------------------------------------------------------------------------


def _quadratic_coefficient(fn, ps):
    infid = np.array([1 - fn(p) for p in ps])
    design = np.stack([ps**2, ps**3], axis=1)
    return float(np.linalg.lstsq(design, infid, rcond=None)[0][0])


def test_criterion_02_small_p_asymptotes(acceptance_log):
    ps = np.linspace(1e-3, 1e-2, 40)
    parts, ok = [], True
    c2 = _quadratic_coefficient(lambda p: an.f_qed_nq(2, p), ps)
    ok &= abs(c2 / 0.5 - 1) < 0.02
    parts.append(f"N=2 {c2:.4f} (1/2)")
    for n in (3, 4, 5):
        c = _quadratic_coefficient(lambda p: an.f_qed_nq(n, p), ps)
        ok &= abs(c / (n * n / 24) - 1) < 0.02
        parts.append(f"N={n} {c:.4f} ({n * n}/24)")
    ratio = (1 - an.f_qed_nq(3, 1e-3)) / (1 - an.f_qed_nq(2, 1e-3))
    ok &= abs(ratio / 0.75 - 1) < 0.02
    parts.append(f"N3/N2 {ratio:.4f}")
    record(acceptance_log, 2, "small-p asymptotes", ok, ", ".join(parts))


# -- 3 ------------------------------------------------------------------------------------


def test_criterion_03_shape_properties(acceptance_log):
    grid = np.linspace(0, 1, 201)
    low = grid[(grid > 0) & (grid <= 0.3)]
    qed_beats_1q = all(an.f_qed_2q(p, p) > an.f_av_1q(p) for p in low)
    ps = np.linspace(0.2, 0.45, 101)
    diff = np.array([an.f_qed_nq(2, p) - an.f_qed_nq(3, p) for p in ps])
    crossing = bool(np.any(np.sign(diff[:-1]) != np.sign(diff[1:])))
    cross_at = float(ps[np.argmin(np.abs(diff))])
    equal_low, below_1q = True, True
    for n in (2, 3, 4):
        equal_low &= all(abs(an.f_qec_nq(n, p) - an.f_ign_nq(n, p)) <= 1e-15 for p in grid[grid <= 0.5])
        below_1q &= all(an.f_qec_nq(n, p) < an.f_av_1q(p) for p in grid[(grid > 0) & (grid < 1)])
    ok = qed_beats_1q and crossing and equal_low and below_1q
    detail = (
        f"F_qed(2q)>F_1q on (0,0.3]: {qed_beats_1q}; N2/N3 crossover near p={cross_at:.3f}: {crossing}; "
        f"f_qec=f_ign for p<=1/2: {equal_low}; f_qec<F_1q: {below_1q}"
    )
    record(acceptance_log, 3, "figure shape properties", ok, detail)


# -- 4 --------------------------------------------------------------------------------------


def test_criterion_04_correction_optimality(acceptance_log):
    start = time.perf_counter()
    rng = np.random.default_rng(404)
    branches = []
    while len(branches) < 1000:
        k, kt = rng.uniform(0, 1, 2)
        if k * k + kt * kt <= 1:
            branches.append(BranchKK(k, kt, NO_ERROR if len(branches) % 2 else ERROR_RESULT))
    ops = [b.op() for b in branches]
    expect = [optimal_correction(b) for b in branches]
    excess, mismatch, ties = {}, {}, 0
    for res in (48, 96):
        found = numeric_unitary_search_batch(ops, resolution=res, chunk=8)
        excess[res] = max(f["f_bar"] - e.f_bar_max for f, e in zip(found, expect))
        mismatch[res] = 0
        for b, f, e in zip(branches, found, expect):
            predicted = "fixes_zero" if e.unitary_class in ("identity", "fixes_zero") else "bit_flip"
            if b.outcome_class == ERROR_RESULT and abs(b.k - b.k_tilde) < 1e-9:
                ties += res == 48
                continue
            mismatch[res] += unitary_class(f["best_u"]) != predicted
    elapsed = time.perf_counter() - start
    ok = all(v <= 1e-6 for v in excess.values()) and not any(mismatch.values()) and elapsed < 120
    detail = (
        f"max excess {max(excess.values()):.1e} (48: {excess[48]:.1e}, 96: {excess[96]:.1e}); "
        f"class mismatches {mismatch[48]}/{mismatch[96]}; ties skipped {ties}; {elapsed:.0f} s"
    )
    record(acceptance_log, 4, "unitary grid search vs closed-form optimum", ok, detail)


# -- 5 ----------------------------------------------------------------------------------------


def test_criterion_05_six_state_identity(acceptance_log):
    rng = np.random.default_rng(505)
    quad = BlochAverager.quadrature(64, 8)
    worst, trace_decreasing = 0.0, 0
    for _ in range(100):
        op = random_linear_op(rng)
        u = euler_unitary(*rng.uniform(0, 2 * np.pi, 3))
        trace_decreasing += op.select_probability() < 1 - 1e-6

        def fid(states, op=op, u=u):
            out = np.empty(len(states))
            for i, s in enumerate(states):
                rho = ket_to_density(s)
                out[i] = np.trace(op.image(rho) @ u @ rho @ dagger(u)).real
            return out

        q = bloch_average(fid, quad)
        worst = max(worst, abs(six_state_fidelity(op, u) - q), abs(avg_fidelity_vs_unitary(op, u) - q))
    ok = worst <= 1e-9 and trace_decreasing > 0
    record(acceptance_log, 5, "six-state average = quadrature", ok, f"max deviation {worst:.1e}; {trace_decreasing}/100 trace-decreasing")


# -- 6 ------------------------------------------------------------------------------------------


def test_criterion_06_ideal_protocol(acceptance_log):
    grid = np.linspace(0, math.pi, 21)
    dev_sel, dev_qec, dev_ign, undefined = 0.0, 0.0, 0.0, 0
    for err in ("R1X", "R1Y", "R2Y", "R2Z"):
        for th in grid:
            r = protocol_fidelities(ProtocolConfig(error=err, theta2=float(th)))
            if r.f_qed_weighted is None:
                # nothing passes selection (2theta = pi): the post-selected fidelity is undefined
                undefined += 1
            else:
                dev_sel = max(dev_sel, abs(r.f_qed_weighted - 1))
            dev_qec = max(dev_qec, abs(r.f_qec - 1))
            expect = 1.0 if err == "R2Z" else math.cos(th / 2) ** 2 + math.sin(th / 2) ** 2 / 3
            dev_ign = max(dev_ign, abs(r.f_ign - expect))
    p1 = 0.0
    for err in ("R1Z", "R2X"):
        for th in grid:
            p1 = max(p1, max(run_protocol(ProtocolConfig(error=err, theta2=float(th))).p1))
    ok = max(dev_sel, dev_qec, dev_ign) <= 1e-9 and p1 <= 1e-12
    detail = (
        f"|F_qed-1| {dev_sel:.1e}, |F_qec-1| {dev_qec:.1e}, F_ign dev {dev_ign:.1e}, "
        f"undetectable p1 {p1:.1e}; F_qed undefined at {undefined} full-flip points"
    )
    record(acceptance_log, 6, "ideal protocol limits", ok, detail)


# -- 7 --------------------------------------------------------------------------------------------


def test_criterion_07_decohered_protocol(acceptance_log):
    start = time.perf_counter()
    grid = np.linspace(0, math.pi, 41)
    curves = {t: sweep_theta(ProtocolConfig(error="R1X", t1=(t, t)), grid) for t in T1_SET}
    ry = sweep_theta(ProtocolConfig(error="R1Y", t1=(500.0, 500.0)), grid)
    elapsed = time.perf_counter() - start

    sel_beats_ign = all(curves[t][0].f_qed_weighted > curves[t][0].f_ign for t in T1_SET)
    agree = max(
        abs(a - b)
        for x, y in zip(curves[500.0], ry)
        for a, b in zip(x.values(), y.values())
        if a is not None and b is not None
    )
    mid = curves[500.0]
    crossing = any(
        math.pi / 2 < th < math.pi and r.f_qed_weighted is not None and r.f_qec > r.f_qed_weighted
        for th, r in zip(grid, mid)
    )
    violations = {}
    for key in ("f_ign", "f_qed_weighted", "f_qec"):
        bad = []
        for i, th in enumerate(grid):
            vals = [getattr(curves[t][i], key) for t in T1_SET]
            if None not in vals and not vals[0] <= vals[1] <= vals[2]:
                bad.append(th / math.pi)
        if bad:
            violations[key] = (len(bad), min(bad))
    monotone = not violations
    ok = sel_beats_ign and monotone and agree <= 1e-3 and crossing and elapsed < 60
    detail = (
        f"F_qed>F_ign at 0: {sel_beats_ign}; R1X~R1Y {agree:.1e}; QEC above F_qed past pi/2: {crossing}; "
        f"monotone in T1: {monotone}"
    )
    if violations:
        detail += " (" + ", ".join(f"{k} fails at {n} points from 2theta={lo:.3f}pi" for k, (n, lo) in violations.items())
        detail += "; near a full flip the ideal output lies below the mixed-state value, so decoherence raises it)"
    record(acceptance_log, 7, "decohered protocol properties", ok, f"{detail}; {elapsed:.0f} s")


# -- 8 ---------------------------------------------------------------------------------------------


def test_criterion_08_storage(acceptance_log):
    grid = np.linspace(0, 1, 21)
    base = ProtocolConfig(protocol="fig7b", error="storage")
    dev = max(
        abs(protocol_fidelities(replace(base, storage_p=float(p))).f_qed_weighted - an.f_qed_2q_weighted(p, p))
        for p in grid
    )
    margins = []
    for t in T1_SET:
        for p in np.linspace(0.025, 0.5, 20):
            r = protocol_fidelities(replace(base, storage_p=float(p), t1=(t, t)))
            margins.append(r.f_qed_weighted - r.f_ign)
    ok = dev <= 1e-6 and min(margins) > 0
    record(acceptance_log, 8, "storage regime", ok, f"ideal-gate deviation {dev:.1e}; min F_qed-F_ign {min(margins):.3e}")


# -- 9 ----------------------------------------------------------------------------------------------


def test_criterion_09_multicycle(acceptance_log):
    x = 0.2
    worst_rel, worst_scale, worst_sel = 0.0, 0.0, 0.0
    for n in (2, 3):
        infid = {}
        for m in (2, 4, 8):
            sim = sc.multicycle_simulate(n, m, x, 1.0)
            infid[m] = 1 - sim["fidelity"]
            est = m * (x / m) ** n / 3
            worst_rel = max(worst_rel, abs(infid[m] / est - 1))
            worst_sel = max(worst_sel, abs(sim["p_select"] / math.exp(-x * n / 2) - 1))
        for m in (2, 4):
            worst_scale = max(worst_scale, abs((infid[2 * m] / infid[m]) / 2.0 ** (1 - n) - 1))
    ok = worst_rel <= 0.2 and worst_scale <= 0.1 and worst_sel <= 0.02
    detail = f"infidelity vs estimate {worst_rel:.1%}, doubling-M scaling {worst_scale:.1%}, selection {worst_sel:.2%}"
    record(acceptance_log, 9, "repeated QED cycles", ok, detail)


# -- 10 -----------------------------------------------------------------------------------------------

_EXACT = {
    "ignore": an.f_ign_nq,
    "qed_uniform": an.f_qed_nq,
    "qed_weighted": an.f_qed_nq_weighted,
    "qec_optimal": an.f_qec_nq_per_syndrome,
}


def test_criterion_10_monte_carlo(acceptance_log):
    rng = np.random.default_rng(1010)
    cases = [
        (int(rng.integers(2, 5)), float(rng.uniform(0.05, 0.95)), str(rng.choice(sc.MC_MODES)), int(rng.integers(0, 2**31)))
        for _ in range(10)
    ]
    zs = []
    for n, p, mode, seed in cases:
        r = sc.monte_carlo_fidelity(n, p, mode, 10**6, seed=seed)
        zs.append(abs(r["estimate"] - _EXACT[mode](n, p)) / r["std_error"])
    n, p, mode, seed = cases[0]
    again = sc.monte_carlo_fidelity(n, p, mode, 10**6, seed=seed)
    first = sc.monte_carlo_fidelity(n, p, mode, 10**6, seed=seed)
    identical = again == first
    ok = max(zs) < 4 and identical
    record(acceptance_log, 10, "Monte Carlo consistency", ok, f"max |z| {max(zs):.2f} over 10 cases; same seed identical: {identical}")


# -- 11 -------------------------------------------------------------------------------------------------


def test_criterion_11_numerical_hygiene(acceptance_log, tmp_path):
    configs = [ProtocolConfig(error=e, theta2=th, t1=(t, t)) for e in ("R1X", "R2Z") for th in (0.0, 1.3, math.pi) for t in T1_SET]
    configs += [ProtocolConfig(protocol="fig7a", error="R1Y", theta2=0.9, t1=(500.0, 500.0))]
    configs += [ProtocolConfig(protocol="fig7b", error="storage", storage_p=p, t1=(t, t)) for p in (0.1, 0.5) for t in T1_SET]
    trace_err, min_eig = 0.0, 0.0
    for cfg in configs:
        res = run_protocol(cfg)
        trace_err = max(trace_err, res.max_trace_error)
        min_eig = min(min_eig, res.min_eigenvalue)
    halving = 0.0
    for cfg in configs[::3]:
        a = protocol_fidelities(cfg)
        b = protocol_fidelities(replace(cfg, dt=cfg.dt / 2))
        halving = max(halving, max(abs(x - y) for x, y in zip(a.values(), b.values()) if x is not None))
    cfg_file = tmp_path / "verify.cfg"
    cfg_file.write_text("command = verify\n")
    exe = shutil.which("repqed")
    cmd = [exe] if exe else [sys.executable, "-m", "repqed.cli"]
    proc = subprocess.run(cmd + ["verify", "--config", str(cfg_file)], capture_output=True, text=True)
    ok = trace_err <= 1e-10 and min_eig >= -1e-10 and halving < 1e-6 and proc.returncode == 0
    detail = (
        f"trace error {trace_err:.1e}, min eigenvalue {min_eig:.1e}, dt-halving {halving:.1e}, "
        f"repqed verify exit {proc.returncode}"
    )
    record(acceptance_log, 11, "numerical hygiene", ok, detail)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
