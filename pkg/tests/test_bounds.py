import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bcsim.bounds import DomainError, compute_bounds, flood_probability, flood_rounds, format_bounds


def test_mc_threshold_example():
    r = compute_bounds(1200, Fraction(1, 10), 9)
    assert r.psi == Fraction(5, 6)
    assert r.mc_threshold == 1000


def test_stage_count_example():
    assert compute_bounds(100, Fraction(1, 2), 9).R_stages == 60


def test_rho_example():
    # 7 ln(256 / (2 (ln 256 + 12))) + 2 = 15.91..., rounded up
    value = 7 * math.log(256 / (2 * (8 * math.log(2) + 12))) + 2
    assert 15.9 < value < 15.92
    assert compute_bounds(256, Fraction(1, 2), 12).rho == 16


def test_p_mine_example():
    assert compute_bounds(100, Fraction(1, 2), 9).p_mine == Fraction(1, 5)


def test_p_flood_example_and_clamp():
    assert flood_probability(128, 0.5, 12) == pytest.approx((math.log(128) + 12) / 64)
    assert flood_probability(4, 0.5, 12) == 1.0


def test_rho_at_least_one():
    assert flood_rounds(3, 50) == 1


@given(st.fractions(min_value=Fraction(1, 10_000), max_value=1).filter(lambda e: e > 0), st.integers(3, 10_000))
def test_edge_bound_is_one_third(eps, n):
    assert compute_bounds(n, eps, 4).edge_bound == Fraction(1, 3)


@pytest.mark.parametrize("n,eps,kappa", [(2, 0.5, 1), (10, 0, 1), (10, 1.5, 1), (10, 0.5, 0)])
def test_domain_errors(n, eps, kappa):
    with pytest.raises(DomainError):
        compute_bounds(n, eps, kappa)


def test_format_contains_rows():
    text = format_bounds(compute_bounds(1200, Fraction(1, 10), 9))
    assert "mc_threshold" in text and "1000" in text
