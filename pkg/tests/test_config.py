import logging

import pytest
from hypothesis import given
from hypothesis import strategies as st

from repqed.config import ConfigError, parse_config, parse_time


def test_time_units():
    assert parse_time("500ns") == pytest.approx(500e-9)
    assert parse_time("500") == pytest.approx(500e-9)
    assert parse_time("0.5 us") == pytest.approx(500e-9)
    assert parse_time("0.5µs") == pytest.approx(500e-9)
    assert parse_time("2ms") == pytest.approx(2e-3)
    assert parse_time("1e-6 s") == pytest.approx(1e-6)
    with pytest.raises(ValueError):
        parse_time("5 parsecs")


@given(st.floats(1e-3, 1e6))
def test_time_roundtrip(ns):
    assert parse_time(f"{ns!r}ns") == pytest.approx(ns * 1e-9)


def test_protocol_config():
    cfg = parse_config("command = protocol\nt1_values = 500ns, 0.7us\nerrors = R1X, R1Y\n")
    assert cfg.command == "protocol"
    assert cfg["t1_values"] == pytest.approx((500e-9, 700e-9))
    assert cfg["errors"] == ("R1X", "R1Y")
    assert cfg["theta_steps"] == 41


def test_section_header_and_comments():
    cfg = parse_config("# sweep\n[nqubit]\nn_values = 2, 5  # five qubits\nout = x.csv\n")
    assert cfg["n_values"] == (2, 5)
    assert cfg.output_path == "x.csv"


@pytest.mark.parametrize(
    "text, line",
    [
        ("command = bogus\n", 1),
        ("command = analytic\np_max = 1.5\n", 2),
        ("command = analytic\nwidth = 3\n", 2),
        ("command = analytic\np_steps = 2.5\n", 2),
        ("command = protocol\n\nt1_values = -5ns\n", 3),
        ("command = multicycle\nm_values = 3\n", 2),
        ("[analytic]\ncommand = storage\n", 2),
        ("command = analytic\nnonsense\n", 2),
    ],
)
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_missing_command():
    with pytest.raises(ConfigError):
        parse_config("p_max = 0.5\n")


def test_duplicate_key_warns(caplog):
    with caplog.at_level(logging.WARNING):
        cfg = parse_config("command = analytic\np_steps = 5\np_steps = 7\n")
    assert cfg["p_steps"] == 7
    assert "duplicate" in caplog.text


def test_t2_must_pair_with_t1():
    with pytest.raises(ConfigError):
        parse_config("command = storage\nt1_values = 300, 500\nt2_values = 300\n")


def test_digest_is_stable():
    a = parse_config("command = analytic\np_steps = 5\n")
    b = parse_config("p_steps = 5\ncommand = analytic\n")
    assert a.digest(1) == b.digest(1)
    assert a.digest(1) != a.digest(2)
    assert a.digest() != parse_config("command = analytic\np_steps = 6\n").digest()


def test_single_value_time_keys():
    cfg = parse_config("command = protocol\nt1 = 500ns\n")
    assert cfg["t1_values"] == pytest.approx((500e-9,))
    cfg = parse_config("command = analytic\np_max = 1.0\np_steps = 200\n")
    assert cfg["p_steps"] == 200
