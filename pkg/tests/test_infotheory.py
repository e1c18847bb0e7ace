import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from expcode.infotheory import (
    LOG2E,
    DomainError,
    aen_capacity,
    bernoulli_convolve,
    binary_entropy,
    bsc_rate,
    db_to_linear,
    linear_to_db,
)

probs = st.floats(0.0, 1.0)
half = st.floats(0.0, 0.5)

# 40-digit mpmath evaluations of the defining formulas
H_Q0 = 0.8399415379831692172785940486465047694646
ONE_MINUS_H_011 = 0.5000840418354720043595004058697243373636


class TestBinaryEntropy:
    def test_max_and_degenerate(self):
        assert binary_entropy(0.5) == 1.0
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0

    def test_known_value(self):
        assert binary_entropy(1.0 / (1.0 + math.e)) == pytest.approx(H_Q0, abs=1e-14)
        assert binary_entropy(0.268941) == pytest.approx(0.8400, abs=1e-4)

    def test_matches_naive_formula_in_bulk(self):
        p = np.linspace(1e-6, 1 - 1e-6, 1001)
        naive = -(p * np.log2(p) + (1 - p) * np.log2(1 - p))
        # the naive form loses ~1e-12 relative near the ends, not this one
        np.testing.assert_allclose(binary_entropy(p), naive, rtol=1e-10)

    def test_small_p_keeps_relative_precision(self):
        # H(p) ~ p log2(e/p) as p -> 0
        p = 1e-300
        assert binary_entropy(p) == pytest.approx(p * math.log2(math.e / p), rel=1e-12)

    def test_symmetry_grid(self):
        p = np.linspace(0, 1, 2001)
        np.testing.assert_allclose(binary_entropy(p), binary_entropy(1 - p), atol=1e-15)

    @pytest.mark.parametrize("bad", [-1e-9, 1.0000001, float("nan")])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            binary_entropy(bad)


class TestConvolve:
    def test_examples(self):
        assert bernoulli_convolve(0.3, 0.0) == 0.3
        assert bernoulli_convolve(0.5, 0.123) == 0.5
        assert bernoulli_convolve(0.25, 0.25) == 0.375

    @given(probs, probs)
    def test_commutative_and_contracting(self, a, b):
        c = bernoulli_convolve(a, b)
        assert c == pytest.approx(bernoulli_convolve(b, a), abs=1e-15)
        assert 0.0 <= c <= 1.0
        assert abs(c - 0.5) <= min(abs(a - 0.5), abs(b - 0.5)) + 1e-15

    def test_domain(self):
        with pytest.raises(DomainError):
            bernoulli_convolve(1.2, 0.1)


class TestBscRate:
    def test_examples(self):
        assert bsc_rate(0.5, 0.0) == 1.0
        assert bsc_rate(0.0, 0.2) == 0.0
        assert bsc_rate(0.5, 0.11) == pytest.approx(ONE_MINUS_H_011, abs=1e-13)

    @given(half, half)
    def test_non_negative(self, p, q):
        assert bsc_rate(p, q) >= 0.0

    def test_non_increasing_in_noise(self):
        q = np.linspace(0, 0.5, 501)
        for p in np.linspace(0, 0.5, 26):
            r = bsc_rate(p, q)
            assert np.all(np.diff(r) <= 1e-15)

    @pytest.mark.parametrize("p,q", [(0.6, 0.1), (0.1, 0.51)])
    def test_rejects_above_half(self, p, q):
        with pytest.raises(DomainError):
            bsc_rate(p, q)


class TestCapacity:
    def test_examples(self):
        assert aen_capacity(1) == 1.0
        assert aen_capacity(2 ** 15 - 1) == 15.0
        assert aen_capacity(999) == pytest.approx(9.965784284662087, abs=1e-12)

    @pytest.mark.parametrize("k", range(1, 41))
    def test_power_of_two(self, k):
        assert abs(aen_capacity(2 ** k - 1) - k) <= 1e-12

    @pytest.mark.parametrize("bad", [0.0, -1.0])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            aen_capacity(bad)


def test_db_conversion():
    assert db_to_linear(0) == 1.0
    assert db_to_linear(30) == pytest.approx(1000.0, rel=1e-15)
    assert db_to_linear(10) == pytest.approx(10.0, rel=1e-15)
    x = np.linspace(-40, 60, 101)
    np.testing.assert_allclose(linear_to_db(db_to_linear(x)), x, atol=1e-12)


def test_log2e():
    assert LOG2E == pytest.approx(1.4426950408889634, rel=1e-16)
