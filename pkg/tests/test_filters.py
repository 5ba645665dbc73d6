import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from wavobs.assembly import Formulation, assemble
from wavobs.errors import DomainError, UnsupportedFormulationError
from wavobs.filters import DEFAULT_ALPHA, Filter, FilterKind, filtered_observation_row, mode_weights, sigma

EPS = 2.0**-52
ALL = [Filter(FilterKind.CESARO), Filter(FilterKind.LANCZOS), Filter(FilterKind.RAISED_COSINE),
       Filter(FilterKind.SHARPENED_RAISED_COSINE), Filter(FilterKind.VANDEVEN, 4),
       Filter(FilterKind.EXPONENTIAL, 4)]


def test_examples():
    assert sigma(Filter.parse("cesaro"), 0.5) == 0.5
    assert sigma(Filter.parse("raised-cosine"), 0.5) == pytest.approx(0.5, abs=1e-16)
    assert sigma(Filter.parse("exponential:2"), 1.0) == pytest.approx(EPS, rel=1e-12)
    assert sigma(Filter.parse("vandeven:1"), 0.3) == pytest.approx(0.7, abs=1e-15)
    assert sigma(Filter.parse("sharpened-raised-cosine"), 0.0) == 1.0
    assert sigma(Filter.parse("cesaro"), 1.0) == 0.0
    assert sigma(Filter.parse("vandeven:4"), 0.0) == 1.0
    assert sigma(Filter.parse("exponential:6"), 1.0) <= 2.3e-16


@pytest.mark.parametrize("f", ALL, ids=str)
def test_endpoints(f):
    assert sigma(f, 0.0) == pytest.approx(1.0, abs=1e-15)
    if f.kind is FilterKind.EXPONENTIAL:
        assert sigma(f, 1.0) <= EPS * (1 + 1e-12)
    else:
        assert abs(sigma(f, 1.0)) <= 1e-15


@pytest.mark.parametrize("name", ["cesaro", "raised-cosine", "vandeven:4", "vandeven:9", "vandeven:20",
                                  "exponential:4", "sharpened-raised-cosine", "lanczos"])
def test_monotone(name):
    s = sigma(Filter.parse(name), np.linspace(0, 1, 1001))
    assert np.all(np.diff(s) <= 1e-15)


def test_raised_cosine_order():
    f = Filter.parse("raised-cosine")
    h = 1e-4
    # second-order one-sided differences at the ends of [0, 1]
    d0 = (-3 * sigma(f, 0.0) + 4 * sigma(f, h) - sigma(f, 2 * h)) / (2 * h)
    d1 = (3 * sigma(f, 1.0) - 4 * sigma(f, 1 - h) + sigma(f, 1 - 2 * h)) / (2 * h)
    assert abs(d0) <= 1e-6 and abs(d1) <= 1e-6
    # and a central difference in the interior still sees the slope
    assert (sigma(f, 0.5 + h) - sigma(f, 0.5 - h)) / (2 * h) == pytest.approx(-math.pi / 2, rel=1e-6)


def test_sharpened_closed_form():
    f = Filter.parse("sharpened-raised-cosine")
    eta = np.linspace(0, 1, 57)
    s = 0.5 * (1 + np.cos(np.pi * eta))
    np.testing.assert_allclose(sigma(f, eta), s**4 * (35 - 84 * s + 70 * s**2 - 20 * s**3), atol=1e-13)


@pytest.mark.parametrize("p", [1, 2, 3, 5, 8, 12, 13, 16])
def test_vandeven_against_numerical_integral(p):
    # sigma(eta) = 1 - int_0^eta (t (1 - t))^(p-1) dt / B(p, p)
    beta = math.gamma(p) ** 2 / math.gamma(2 * p)
    f = Filter(FilterKind.VANDEVEN, p)
    for eta in (0.1, 0.37, 0.5, 0.8, 0.99):
        val = integrate.quad(lambda t: (t * (1 - t)) ** (p - 1), 0, eta, epsabs=1e-15, epsrel=1e-13)[0]
        assert sigma(f, eta) == pytest.approx(1 - val / beta, abs=1e-12)


@given(st.floats(0, 1), st.integers(1, 20))
@settings(max_examples=60, deadline=None)
def test_vandeven_symmetry(eta, p):
    f = Filter(FilterKind.VANDEVEN, p)
    assert sigma(f, eta) + sigma(f, 1 - eta) == pytest.approx(1.0, abs=1e-12)


@given(st.floats(0, 1))
@settings(max_examples=40, deadline=None)
def test_values_in_unit_interval(eta):
    for f in ALL:
        s = sigma(f, eta)
        assert -1e-15 <= s <= 1.0 + 1e-15


def test_domain():
    with pytest.raises(DomainError):
        sigma(Filter.parse("cesaro"), 1.1)
    with pytest.raises(DomainError):
        sigma(Filter.parse("cesaro"), np.array([0.1, -0.01]))


def test_validation_and_parse():
    with pytest.raises(ValueError):
        Filter(FilterKind.VANDEVEN)
    with pytest.raises(ValueError):
        Filter(FilterKind.EXPONENTIAL, 2, -1.0)
    with pytest.raises(ValueError):
        Filter(FilterKind.CESARO, 2)
    with pytest.raises(ValueError):
        Filter.parse("gauss")
    f = Filter.parse("exponential:6:36")
    assert f.p == 6 and f.alpha == 36.0 and str(f) == "exponential:6:36"
    assert Filter.parse("exponential:4").alpha == DEFAULT_ALPHA
    for g in ALL:
        assert Filter.parse(str(g)) == g


class TestObservationRow:
    @pytest.mark.parametrize("f", ALL, ids=str)
    def test_first_entry(self, f):
        s = assemble(Formulation.classical(), 9)
        assert filtered_observation_row(s, f)[0] == pytest.approx(-math.sqrt(1.5), rel=1e-14)

    def test_raised_cosine_n5(self):
        s = assemble(Formulation.classical(), 5)
        row = filtered_observation_row(s, Filter.parse("raised-cosine"))
        assert row[2] == pytest.approx(0.5 * -math.sqrt(3.5), rel=1e-14)

    def test_cesaro_last_mode(self):
        # weights use eta = (k - 1) / (N - 1), so the last mode k = N - 1 keeps 1 / (N - 1)
        N = 9
        s = assemble(Formulation.classical(), N)
        row = filtered_observation_row(s, Filter.parse("cesaro"))
        assert row[N - 2] == pytest.approx(-math.sqrt(N - 1 + 0.5) / (N - 1), rel=1e-14)
        assert np.all(row[N - 1:] == 0)

    def test_weights(self):
        np.testing.assert_allclose(mode_weights(Filter.parse("cesaro"), 5), [1, 0.75, 0.5, 0.25])

    def test_classical_only(self):
        with pytest.raises(UnsupportedFormulationError):
            filtered_observation_row(assemble(Formulation.mixed(), 6), Filter.parse("cesaro"))
