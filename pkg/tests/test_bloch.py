import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from repqed.bloch import BlochAverager, azimuthal_spread, bloch_average, haar_states, make_rng, sample_points
from repqed.qmath import SIX_STATES


def alpha2(s):
    return np.abs(s[:, 0]) ** 2


def test_polynomial_moments():
    assert bloch_average(lambda s: alpha2(s) ** 2) == pytest.approx(1 / 3, abs=1e-10)
    assert bloch_average(lambda s: alpha2(s) * (1 - alpha2(s))) == pytest.approx(1 / 6, abs=1e-12)
    assert bloch_average(lambda s: np.ones(len(s))) == pytest.approx(1, abs=1e-15)


def test_averager_validation():
    with pytest.raises(ValueError):
        BlochAverager.quadrature(16)
    with pytest.raises(ValueError):
        BlochAverager("grid")
    with pytest.raises(ValueError):
        BlochAverager.monte_carlo(0)


def test_six_state_points():
    states, weights = sample_points(BlochAverager.six_state())
    assert len(states) == 6 and weights.sum() == pytest.approx(1)
    np.testing.assert_allclose(states, np.array(SIX_STATES))


def test_six_state_rejects_ratio_quantities():
    with pytest.raises(ValueError, match="numerator and denominator"):
        bloch_average(lambda s: alpha2(s), BlochAverager.six_state(), linear=False)


@given(st.integers(0, 2**20 - 1))
def test_six_state_exact_for_linear_functionals(seed):
    # F(psi) = <psi|M|psi> + <psi|A psi psi^dag A^dag|psi>: degree two in rho_in
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    m = rng.normal(size=(2, 2))
    m = m + m.T

    def fn(s):
        lin = np.einsum("ni,ij,nj->n", s.conj(), m, s).real
        quad = np.abs(np.einsum("ni,ij,nj->n", s.conj(), a, s)) ** 2
        return lin + quad

    assert bloch_average(fn, BlochAverager.six_state()) == pytest.approx(bloch_average(fn), abs=1e-12)


def test_haar_samples_uniform():
    s = haar_states(200_000, make_rng(7))
    z = alpha2(s) - np.abs(s[:, 1]) ** 2
    assert abs(z.mean()) < 0.01
    assert (z**2).mean() == pytest.approx(1 / 3, abs=0.01)
    np.testing.assert_allclose(np.linalg.norm(s, axis=1), 1, atol=1e-14)


def test_rng_is_reproducible():
    a = haar_states(10, make_rng(42))
    b = haar_states(10, make_rng(42))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, haar_states(10, make_rng(43)))


def test_monte_carlo_average():
    est = bloch_average(lambda s: alpha2(s) ** 2, BlochAverager.monte_carlo(100_000, seed=1))
    assert est == pytest.approx(1 / 3, abs=0.005)


def test_azimuthal_spread():
    assert azimuthal_spread(lambda s: alpha2(s) ** 2) < 1e-15
    assert azimuthal_spread(lambda s: np.real(s[:, 0].conj() * s[:, 1])) > 0.1
