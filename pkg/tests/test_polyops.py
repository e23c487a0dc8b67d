"""Exponent-dict polynomial arithmetic."""

from fractions import Fraction

import numpy as np

from polycycle.polyops import (
    poly_add,
    poly_diff,
    poly_eval,
    poly_from_lambda_row,
    poly_max_abs,
    poly_mul,
    poly_scale,
)


def _random_poly(rng, terms=4):
    p = {}
    for _ in range(terms):
        e = (int(rng.integers(0, 4)), int(rng.integers(0, 4)))
        c = Fraction(int(rng.integers(-5, 6)))
        if c:
            p = poly_add(p, {e: c})
    return p


def test_add_cancels_to_empty():
    assert poly_add({(1, 0): Fraction(2)}, {(1, 0): Fraction(-2)}) == {}


def test_mul_difference_of_squares():
    u_plus_v = {(1, 0): Fraction(1), (0, 1): Fraction(1)}
    u_minus_v = {(1, 0): Fraction(1), (0, 1): Fraction(-1)}
    assert poly_mul(u_plus_v, u_minus_v) == {(2, 0): Fraction(1), (0, 2): Fraction(-1)}


def test_scale_by_zero_empties():
    assert poly_scale({(2, 1): Fraction(5)}, 0) == {}
    assert poly_scale({(2, 1): Fraction(5)}, Fraction(1, 5)) == {(2, 1): Fraction(1)}


def test_diff_known():
    p = {(2, 1): Fraction(1)}  # u^2 v
    assert poly_diff(p, 0) == {(1, 1): Fraction(2)}
    assert poly_diff(p, 1) == {(2, 0): Fraction(1)}
    assert poly_diff({(0, 0): Fraction(3)}, 0) == {}


def test_diff_product_rule():
    rng = np.random.default_rng(3)
    for _ in range(15):
        p = _random_poly(rng)
        q = _random_poly(rng)
        for var in (0, 1):
            lhs = poly_diff(poly_mul(p, q), var)
            rhs = poly_add(poly_mul(poly_diff(p, var), q), poly_mul(p, poly_diff(q, var)))
            assert lhs == rhs


def test_eval_exact_and_consistent_with_arithmetic():
    rng = np.random.default_rng(5)
    for _ in range(10):
        p = _random_poly(rng)
        q = _random_poly(rng)
        u, v = Fraction(int(rng.integers(-3, 4)), 2), Fraction(int(rng.integers(-3, 4)), 3)
        assert poly_eval(poly_mul(p, q), u, v) == poly_eval(p, u, v) * poly_eval(q, u, v)
        assert poly_eval(poly_add(p, q), u, v) == poly_eval(p, u, v) + poly_eval(q, u, v)


def test_from_lambda_row():
    row = [Fraction(5), Fraction(6), Fraction(7)]
    assert poly_from_lambda_row(2, row) == {
        (2, 0): Fraction(5),
        (1, 1): Fraction(6),
        (0, 2): Fraction(7),
    }
    assert poly_from_lambda_row(2, [0, 0, 0]) == {}


def test_max_abs():
    assert poly_max_abs({}) == 0
    assert poly_max_abs({(2, 0): Fraction(-3), (0, 1): Fraction(2)}) == 3
