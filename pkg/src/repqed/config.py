"""Line-oriented sweep configuration: ``key = value`` pairs, ``#`` comments and
an optional ``[command]`` section header.

Times accept the suffixes ``s``, ``ms``, ``us`` (or ``µs``) and ``ns`` and are
stored in seconds; a bare number on a time key is read as nanoseconds.
"""

from __future__ import annotations

import hashlib
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable

log = logging.getLogger("repqed.config")

COMMANDS = ("analytic", "nqubit", "multicycle", "protocol", "storage", "verify")

_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9}
_NUMBER = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-]?inf)\s*([a-zµ]*)\s*$", re.IGNORECASE)


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


# -- value parsers ------------------------------------------------------------


def _number(text: str) -> tuple[float, str]:
    m = _NUMBER.match(text)
    if not m:
        raise ValueError(f"malformed number {text.strip()!r}")
    return float(m.group(1)), m.group(2)


def parse_float(text: str) -> float:
    value, unit = _number(text)
    if unit:
        raise ValueError(f"unexpected unit {unit!r}")
    return value


def parse_int(text: str) -> int:
    value = parse_float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text.strip()!r}")
    return int(value)


def parse_time(text: str) -> float:
    """Seconds; bare numbers are nanoseconds."""
    value, unit = _number(text)
    unit = unit or "ns"
    if unit not in _UNITS:
        raise ValueError(f"unknown time unit {unit!r}")
    return value * _UNITS[unit]


def parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text.strip()!r}")


def list_of(item: Callable[[str], Any]) -> Callable[[str], tuple]:
    def parse(text: str) -> tuple:
        parts = [p for p in text.split(",") if p.strip()]
        if not parts:
            raise ValueError("empty list")
        return tuple(item(p) for p in parts)

    return parse


def choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        t = text.strip()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}; got {t!r}")
        return t

    return parse


def choices(*options: str) -> Callable[[str], tuple]:
    return list_of(choice(*options))


# -- per-command schemas ------------------------------------------------------

_ERRORS = ("R1X", "R1Y", "R2Y", "R2Z", "R1Z", "R2X")

# single-value spellings of list keys
_KEY_ALIASES = {"t1": "t1_values", "t2": "t2_values"}

_COMMON = {
    "out": (str.strip, None),
    "seed": (parse_int, 0),
}

SCHEMAS: dict[str, dict[str, tuple[Callable[[str], Any], Any]]] = {
    "analytic": {
        "p_min": (parse_float, 0.0),
        "p_max": (parse_float, 1.0),
        "p_steps": (parse_int, 201),
    },
    "nqubit": {
        "n_values": (list_of(parse_int), (2, 3, 4)),
        "p_min": (parse_float, 0.0),
        "p_max": (parse_float, 1.0),
        "p_steps": (parse_int, 201),
        "engine": (choice("analytic", "scenario"), "analytic"),
    },
    "multicycle": {
        "n_values": (list_of(parse_int), (2, 3)),
        "m_values": (list_of(parse_int), (2, 4, 8)),
        "t_over_t1": (parse_float, 0.2),
        "pi_pulses": (parse_bool, True),
        "placement": (choice("after_reencode", "before_decode"), "after_reencode"),
    },
    "protocol": {
        "protocol": (choice("fig4", "fig7a", "fig7b"), "fig4"),
        "errors": (choices(*_ERRORS), ("R1X",)),
        "t1_values": (list_of(parse_time), (300e-9, 500e-9, 700e-9)),
        "t2_values": (list_of(parse_time), None),
        "theta_steps": (parse_int, 41),
        "dt": (parse_time, 0.5e-9),
        "decohere_during_gates": (parse_bool, True),
    },
    "storage": {
        "t1_values": (list_of(parse_time), (300e-9, 500e-9, 700e-9)),
        "t2_values": (list_of(parse_time), None),
        "p_min": (parse_float, 0.0),
        "p_max": (parse_float, 1.0),
        "p_steps": (parse_int, 101),
        "dt": (parse_time, 0.5e-9),
    },
    "verify": {
        "tolerance": (parse_float, None),
        "tol_closed": (parse_float, 1e-9),
        "tol_channel": (parse_float, 1e-12),
        "tol_ideal": (parse_float, 1e-9),
        "tol_storage": (parse_float, 1e-6),
        "tol_grid": (parse_float, 1e-6),
        "tol_six_state": (parse_float, 1e-9),
        "mc_sigma": (parse_float, 4.0),
        "mc_samples": (parse_int, 200_000),
    },
}


@dataclass(frozen=True)
class SweepConfig:
    command: str
    params: dict[str, Any] = field(default_factory=dict)
    output_path: str | None = None

    def __getitem__(self, key: str) -> Any:
        return self.params[key]

    def digest(self, seed: int | None = None) -> str:
        """Stable hash of the resolved parameters."""
        items = sorted(self.params.items())
        text = repr((self.command, items, seed))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def parse_config(text: str) -> SweepConfig:
    raw: dict[str, tuple[str, int]] = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("["):
            if not body.endswith("]"):
                raise ConfigError("unterminated section header", lineno)
            name = body[1:-1].strip()
            if name not in COMMANDS:
                raise ConfigError(f"unknown command section [{name}]", lineno)
            if section is not None and section != name:
                raise ConfigError("only one command section per file", lineno)
            section = name
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        if not key:
            raise ConfigError("empty key", lineno)
        key = _KEY_ALIASES.get(key, key)
        if key in raw:
            log.warning("line %d: duplicate key %r overrides line %d", lineno, key, raw[key][1])
        raw[key] = (value, lineno)

    command = section
    if "command" in raw:
        value, lineno = raw.pop("command")
        if value not in COMMANDS:
            raise ConfigError(f"unknown command {value!r}; choose from {', '.join(COMMANDS)}", lineno)
        if section is not None and value != section:
            raise ConfigError(f"command {value!r} contradicts section [{section}]", lineno)
        command = value
    if command is None:
        raise ConfigError("missing required key 'command'")

    schema = {**_COMMON, **SCHEMAS[command]}
    params = {k: default for k, (_, default) in schema.items()}
    for key, (value, lineno) in raw.items():
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} for command {command!r}", lineno)
        try:
            params[key] = schema[key][0](value)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", lineno) from None
    _check_ranges(command, params, {k: ln for k, (_, ln) in raw.items()})
    out = params.pop("out")
    return SweepConfig(command, params, out)


def _check_ranges(command: str, params: dict[str, Any], lines: dict[str, int]) -> None:
    def fail(key, msg):
        raise ConfigError(f"{key}: {msg}", lines.get(key))

    for key in ("p_min", "p_max"):
        if key in params and not 0 <= params[key] <= 1:
            fail(key, "probability outside [0, 1]")
    if "p_min" in params and params["p_min"] > params["p_max"]:
        fail("p_min", "exceeds p_max")
    for key in ("p_steps", "theta_steps"):
        if key in params and params[key] < 1:
            fail(key, "needs at least one point")
    for key in ("t1_values", "t2_values"):
        vals = params.get(key)
        if vals is not None and any(not v > 0 for v in vals):
            fail(key, "times must be positive")
    if params.get("t2_values") is not None and len(params["t2_values"]) != len(params["t1_values"]):
        fail("t2_values", "must pair one-to-one with t1_values")
    if "dt" in params and not params["dt"] > 0:
        fail("dt", "must be positive")
    if "n_values" in params and any(n < 1 for n in params["n_values"]):
        fail("n_values", "qubit counts must be positive")
    if "m_values" in params and any(m < 2 or m % 2 for m in params["m_values"]):
        fail("m_values", "cycle counts must be even and at least 2")
    if command == "verify":
        for key, val in params.items():
            if key.startswith("tol") and val is not None and not val > 0:
                fail(key, "tolerances must be positive")
        if params["mc_samples"] < 1000:
            fail("mc_samples", "at least 1000 samples")
    if math.isnan(params.get("t_over_t1", 0.0)) or params.get("t_over_t1", 1.0) <= 0:
        fail("t_over_t1", "must be positive")
