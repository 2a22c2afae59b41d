"""Shared corpus forms used across the test suite."""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import pytest

from primearcs.forms import Form


def lens_quadric() -> Form:
    """x1^2 + x2^2 - 2 x3^2, the running nondegenerate example."""
    return Form.from_terms(3, [((2, 0, 0), 1), ((0, 2, 0), 1), ((0, 0, 2), -2)])


def square_difference() -> Form:
    """x1^2 - x2^2."""
    return Form.from_terms(2, [((2, 0), 1), ((0, 2), -1)])


def product_quadric() -> Form:
    """x1 x2 - x3 x4."""
    return Form.from_terms(4, [((1, 1, 0, 0), 1), ((0, 0, 1, 1), -1)])


def triple_product() -> Form:
    """x1 x2 x3."""
    return Form.from_terms(3, [((1, 1, 1), 1)])


def diagonal_form(n: int, d: int, coeffs=None) -> Form:
    coeffs = coeffs or [1] * n
    raw = []
    for i, c in enumerate(coeffs):
        e = [0] * n
        e[i] = d
        raw.append((tuple(e), c))
    return Form.from_terms(n, raw)


def bilinear_form(m: int) -> Form:
    """sum_i x_i y_i in 2m variables."""
    raw = []
    for i in range(m):
        e = [0] * (2 * m)
        e[i] = 1
        e[m + i] = 1
        raw.append((tuple(e), 1))
    return Form.from_terms(2 * m, raw)


@pytest.fixture
def lens():
    return lens_quadric()


@pytest.fixture
def sqdiff():
    return square_difference()
