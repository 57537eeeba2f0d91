"""Shared random generators for the test suite.

Parameter sweeps draw numerators and denominators uniformly from small
ranges ([-9, 9], denominators [1, 9]); nonzero is enforced where a branch
constraint requires it.  Everything is seeded, so runs are reproducible.
"""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from isoforge import BivariatePoly, FamilySpec, HomogeneousPoly


def rand_fraction(rng: random.Random, nonzero: bool = False, span: int = 9) -> Fraction:
    num = rng.randint(-span, span)
    while nonzero and num == 0:
        num = rng.randint(-span, span)
    return Fraction(num, rng.randint(1, 9))


def rand_triangular_spec(rng: random.Random, k_max: int = 6) -> FamilySpec:
    k = rng.randint(2, k_max)
    c = [rand_fraction(rng) for _ in range(k - 2)] + [rand_fraction(rng, nonzero=True)]
    return FamilySpec.triangular(k, c, rand_fraction(rng))


def rand_qshear_spec(rng: random.Random, m_max: int = 5) -> FamilySpec:
    m = rng.randint(2, m_max)
    beta = [rand_fraction(rng) for _ in range(m - 1)] + [rand_fraction(rng, nonzero=True)]
    return FamilySpec.qshear(m, rand_fraction(rng, nonzero=True), beta, rand_fraction(rng))


def rand_poly(rng: random.Random, max_degree: int = 8, max_terms: int = 10,
              coeff_span: int = 9) -> BivariatePoly:
    terms = {}
    for _ in range(rng.randint(0, max_terms)):
        i = rng.randint(0, max_degree)
        j = rng.randint(0, max_degree - i)
        terms[(i, j)] = rand_fraction(rng, span=coeff_span)
    return BivariatePoly(terms)


def rand_point(rng: random.Random) -> tuple[Fraction, Fraction]:
    return rand_fraction(rng), rand_fraction(rng)


def rand_homogeneous(rng: random.Random, degree: int) -> HomogeneousPoly:
    terms = {}
    while not terms:
        for j in range(degree + 1):
            if rng.random() < 0.6:
                c = rand_fraction(rng)
                if c:
                    terms[(degree - j, j)] = c
    return HomogeneousPoly(BivariatePoly(terms), degree)


def rand_squarefree_form(rng: random.Random, degree: int) -> HomogeneousPoly:
    """Product of pairwise non-proportional linear forms: squarefree by design."""
    factors: list[tuple[int, int]] = []
    while len(factors) < degree:
        a, b = rng.randint(-5, 5), rng.randint(-5, 5)
        if (a, b) == (0, 0):
            continue
        if any(a * b2 - b * a2 == 0 for a2, b2 in factors):
            continue
        factors.append((a, b))
    poly = BivariatePoly({(0, 0): Fraction(1)})
    for a, b in factors:
        poly = poly * BivariatePoly({(1, 0): Fraction(a), (0, 1): Fraction(b)})
    return HomogeneousPoly(poly, degree)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)
