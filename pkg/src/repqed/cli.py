"""``repqed <command> --config <path> [--out <path>] [--jobs N] [--seed S]``

Exit codes: 0 ok, 1 verification failure, 2 usage or config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import io
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import replace
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import analytic as an
from . import scenario as sc
from .config import COMMANDS, ConfigError, SweepConfig, parse_config
from .protocol import ProtocolConfig, protocol_fidelities
from .verify import run_verify

log = logging.getLogger("repqed")

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

COLUMNS = {
    "analytic": ("p", "f_1q", "f_ign", "f_qed_uniform", "f_qed_weighted", "f_qec"),
    "nqubit": ("n", "p", "f_1q", "f_ign", "f_qed_uniform", "f_qed_weighted", "f_qec", "f_qec_per_syndrome"),
    "multicycle": ("n", "m", "t_over_t1", "infidelity", "infidelity_estimate", "p_select", "p_select_estimate"),
    "protocol": ("two_theta_over_pi", "t1_ns", "error_kind", "f_ign", "f_qed_weighted", "f_qec"),
    "storage": ("p_storage", "t1_ns", "f_ign", "f_qed_weighted"),
    "verify": ("check", "deviation", "tolerance", "unit", "passed"),
}


def fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.12g}"
    return str(value)


def write_csv(stream: io.TextIOBase, columns: Sequence[str], rows: Iterable[Sequence[Any]], digest: str) -> None:
    stream.write(f"# config_hash: {digest}\n")
    stream.write(",".join(columns) + "\n")
    for row in rows:
        stream.write(",".join(fmt(v) for v in row) + "\n")


@contextmanager
def _pool(jobs: int):
    if jobs <= 1:
        yield None
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            yield ex


def _map(pool, fn: Callable, items: Sequence) -> list:
    # executor.map keeps input order regardless of completion order
    return list(pool.map(fn, items)) if pool is not None else [fn(x) for x in items]


def _grid(lo: float, hi: float, steps: int) -> np.ndarray:
    return np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])


# -- row producers --------------------------------------------------------------


def _analytic_row(p: float) -> tuple:
    r = an.report_2q(p, p)
    return (p, r.f_1q, r.f_ign, r.f_qed, r.f_qed_weighted, r.f_qec)


def rows_analytic(cfg: SweepConfig, pool=None) -> list[tuple]:
    return _map(pool, _analytic_row, list(_grid(cfg["p_min"], cfg["p_max"], cfg["p_steps"])))


def _nqubit_row(args: tuple) -> tuple:
    n, p, engine = args
    if engine == "scenario":
        r = sc.fidelity_sweep(n, p)
        per = r.f_qec
        glob = sc.oracle_fidelity(n, p, "qec_global")
    else:
        r = an.report_nq(n, p)
        per = an.f_qec_nq_per_syndrome(n, p)
        glob = r.f_qec
    return (n, p, r.f_1q, r.f_ign, r.f_qed, r.f_qed_weighted, glob, per)


def rows_nqubit(cfg: SweepConfig, pool=None) -> list[tuple]:
    ps = _grid(cfg["p_min"], cfg["p_max"], cfg["p_steps"])
    items = [(n, float(p), cfg["engine"]) for n in cfg["n_values"] for p in ps]
    return _map(pool, _nqubit_row, items)


def _multicycle_row(args: tuple) -> tuple:
    n, m, x, pulses, placement = args
    sim = sc.multicycle_simulate(n, m, x, 1.0, pi_pulses=pulses, placement=placement)
    est = an.f_qed_multicycle_estimate(n, m, x, 1.0)
    return (n, m, x, 1 - sim["fidelity"], 1 - est["fidelity"], sim["p_select"], est["p_select"])


def rows_multicycle(cfg: SweepConfig, pool=None) -> list[tuple]:
    items = [
        (n, m, cfg["t_over_t1"], cfg["pi_pulses"], cfg["placement"]) for n in cfg["n_values"] for m in cfg["m_values"]
    ]
    return _map(pool, _multicycle_row, items)


def _ns(seconds: float) -> float:
    return seconds * 1e9


def _protocol_row(args: tuple) -> tuple:
    base, t1_ns, error, theta = args
    r = protocol_fidelities(replace(base, error=error, theta2=theta))
    return (theta / math.pi, t1_ns, error, r.f_ign, r.f_qed_weighted, r.f_qec)


def _t_pairs(cfg: SweepConfig) -> list[tuple[float, float]]:
    t2s = cfg["t2_values"] or cfg["t1_values"]
    return [(_ns(a), _ns(b)) for a, b in zip(cfg["t1_values"], t2s)]


def rows_protocol(cfg: SweepConfig, pool=None) -> list[tuple]:
    thetas = _grid(0.0, math.pi, cfg["theta_steps"])
    items = []
    for t1, t2 in _t_pairs(cfg):
        base = ProtocolConfig(
            protocol=cfg["protocol"],
            error=cfg["errors"][0],
            t1=(t1, t1),
            t2=(t2, t2),
            dt=_ns(cfg["dt"]),
            decohere_during_gates=cfg["decohere_during_gates"],
        )
        for err in cfg["errors"]:
            items += [(base, t1, err, float(th)) for th in thetas]
    return _map(pool, _protocol_row, items)


def _storage_row(args: tuple) -> tuple:
    base, t1_ns, p = args
    r = protocol_fidelities(replace(base, storage_p=p))
    return (p, t1_ns, r.f_ign, r.f_qed_weighted)


def rows_storage(cfg: SweepConfig, pool=None) -> list[tuple]:
    ps = _grid(cfg["p_min"], cfg["p_max"], cfg["p_steps"])
    items = []
    for t1, t2 in _t_pairs(cfg):
        base = ProtocolConfig(protocol="fig7b", error="storage", t1=(t1, t1), t2=(t2, t2), dt=_ns(cfg["dt"]))
        items += [(base, t1, float(p)) for p in ps]
    return _map(pool, _storage_row, items)


PRODUCERS = {
    "analytic": rows_analytic,
    "nqubit": rows_nqubit,
    "multicycle": rows_multicycle,
    "protocol": rows_protocol,
    "storage": rows_storage,
}


# -- figure presets ----------------------------------------------------------------

FIGURES = {
    "fig2": "command = analytic\np_steps = 201\n",
    "fig3a": "command = nqubit\nn_values = 2, 3, 4\np_steps = 201\n",
    "fig3b": "command = nqubit\nn_values = 2, 3, 4\np_steps = 201\n",
    "fig5": "command = protocol\nerrors = R1X\nt1_values = 300ns, 500ns, 700ns\ntheta_steps = 41\n",
    "fig6": "command = protocol\nerrors = R1X, R1Y, R2Y, R2Z\nt1_values = 500ns\ntheta_steps = 41\n",
    "fig8": "command = storage\nt1_values = 300ns, 500ns, 700ns\np_steps = 51\n",
}


def run_figure(fig_id: str, out: str | os.PathLike, jobs: int = 1) -> None:
    """Write the CSV behind one figure using its preset sweep."""
    if fig_id not in FIGURES:
        raise ValueError(f"unknown figure {fig_id!r}; choose from {', '.join(FIGURES)}")
    cfg = parse_config(FIGURES[fig_id])
    with _pool(jobs) as pool:
        rows = PRODUCERS[cfg.command](cfg, pool)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        write_csv(fh, COLUMNS[cfg.command], rows, cfg.digest())


# -- entry point ---------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="repqed", description="Repetitive-code QED/QEC sweeps and cross-checks.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="sweep configuration file")
    ap.add_argument("--out", help="output CSV (default: config 'out' key, else stdout)")
    ap.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes")
    ap.add_argument("--seed", type=int, default=None, help="seed for sampled checks")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="repqed: %(message)s", stream=sys.stderr)
    if args.jobs < 1:
        print("repqed: --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"repqed: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        print(f"repqed: {args.config}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.command != args.command:
        print(f"repqed: config is for {cfg.command!r}, not {args.command!r}", file=sys.stderr)
        return EXIT_USAGE
    seed = args.seed if args.seed is not None else cfg["seed"]
    out = args.out or cfg.output_path

    if cfg.command == "verify":
        results = run_verify(cfg.params, seed=seed)
        rows = [(r.name, r.deviation, r.tolerance, r.unit, r.passed) for r in results]
        status = EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY
        if status:
            worst = max((r for r in results if not r.passed), key=lambda r: r.deviation / r.tolerance if r.tolerance else math.inf)
            print(f"repqed: verification failed; worst deviation {worst.deviation:.3e} in {worst.name}", file=sys.stderr)
        if out is None:
            return status
    else:
        with _pool(args.jobs) as pool:
            rows = PRODUCERS[cfg.command](cfg, pool)
        status = EXIT_OK

    buf = io.StringIO()
    write_csv(buf, COLUMNS[cfg.command], rows, cfg.digest(seed))
    if out is None:
        sys.stdout.write(buf.getvalue())
        return status
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        print(f"repqed: cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
