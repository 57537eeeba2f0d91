import json
import random
from fractions import Fraction

import pytest

from isoforge import (
    BivariatePoly,
    FamilySpec,
    HomogeneousPoly,
    ONE,
    PolyMap,
    TransportProblem,
    WitnessFieldError,
    X,
    Y,
    ZERO,
    build,
    build_qshear,
    build_triangular,
    check_unit_jacobian,
    compose_map,
    degeneracy_witness,
    identity_map,
    jacobian_det,
    qshear_cancellation_trace,
    solve_transport,
)
from conftest import (
    rand_fraction,
    rand_homogeneous,
    rand_qshear_spec,
    rand_squarefree_form,
    rand_triangular_spec,
)


def hpoly(p: BivariatePoly) -> HomogeneousPoly:
    return HomogeneousPoly.from_poly(p)


# -- jacobian determinant -----------------------------------------------------


def test_jacobian_of_identity():
    assert jacobian_det(identity_map()) == ONE


def test_jacobian_of_triangular_members(rng):
    for _ in range(15):
        f = build_triangular(rand_triangular_spec(rng))
        assert jacobian_det(f) == ONE


def test_jacobian_of_qshear_members(rng):
    for _ in range(15):
        f = build_qshear(rand_qshear_spec(rng, m_max=4))
        assert jacobian_det(f) == ONE


def test_unit_jacobian_rejects_scaling():
    f = PolyMap(2 * X, Y)
    assert jacobian_det(f) == BivariatePoly.constant(2)
    assert not check_unit_jacobian(f)


def test_unit_jacobian_double_shear_fails():
    # det D(x + y^2, y + x) = 1*1 - 2y*1 = 1 - 2y, not the constant 1
    f = PolyMap(X + Y**2, Y + X)
    assert jacobian_det(f) == ONE - 2 * Y
    assert not check_unit_jacobian(f)


def test_unit_jacobian_elementary_shear():
    assert check_unit_jacobian(PolyMap(X, Y + X**3))


def test_jacobian_multiplicative_under_composition(rng):
    # chain rule: compositions of unit-Jacobian maps keep det = 1
    for _ in range(6):
        f = build(rand_triangular_spec(rng, k_max=3))
        g = build(rand_qshear_spec(rng, m_max=2))
        assert check_unit_jacobian(compose_map(f, g))
        assert check_unit_jacobian(compose_map(g, f))


# -- degeneracy witness ----------------------------------------------------------


def test_witness_repeated_linear_form():
    s = X + Y
    w = degeneracy_witness(hpoly(s**2), hpoly(s**3))
    assert w is not None
    assert w.r.poly == s
    assert (w.m_prime, w.n_prime) == (2, 3)
    assert (w.c_p, w.c_q) == (1, 1)
    rp, rq = w.reconstruct()
    assert rp == s**2 and rq == s**3


def test_witness_none_for_independent_pair():
    det = jacobian_det(PolyMap(X**2, Y**2))
    assert det == 4 * X * Y  # nonzero, so no witness is expected
    assert degeneracy_witness(hpoly(X**2), hpoly(Y**2)) is None


def test_witness_monomials_with_constants():
    w = degeneracy_witness(hpoly(3 * X**4), hpoly(5 * X**2))
    assert w is not None
    assert w.r.poly == X
    assert (w.m_prime, w.n_prime) == (4, 2)
    assert (w.c_p, w.c_q) == (3, 5)


def test_witness_random_constructed_pairs(rng):
    for _ in range(20):
        r = rand_squarefree_form(rng, rng.randint(1, 3))
        a, b = rng.randint(1, 4), rng.randint(1, 4)
        c_p = rand_fraction(rng, nonzero=True)
        c_q = rand_fraction(rng, nonzero=True)
        p = HomogeneousPoly(c_p * r.poly**a, r.degree * a)
        q = HomogeneousPoly(c_q * r.poly**b, r.degree * b)
        w = degeneracy_witness(p, q)
        assert w is not None
        rp, rq = w.reconstruct()
        assert rp == p.poly and rq == q.poly
        assert (w.m_prime, w.n_prime) == (a, b)


def test_witness_random_independent_pairs(rng):
    found = 0
    while found < 20:
        p = rand_homogeneous(rng, rng.randint(2, 5))
        q = rand_homogeneous(rng, rng.randint(2, 5))
        det = p.poly.partial("x") * q.poly.partial("y") - p.poly.partial("y") * q.poly.partial("x")
        if det.is_zero():
            continue
        assert degeneracy_witness(p, q) is None
        found += 1


def test_witness_outside_squarefree_rational_form():
    # det D(p, p) = 0 always, but p = x^2 y is no rational power of its
    # squarefree part (degree 3 vs radical degree 2)
    p = hpoly(X**2 * Y)
    with pytest.raises(WitnessFieldError, match="witness outside rational field"):
        degeneracy_witness(p, p)


def test_witness_rejects_degenerate_inputs():
    with pytest.raises(ValueError):
        degeneracy_witness(HomogeneousPoly(ZERO, 2), hpoly(X))
    with pytest.raises(ValueError):
        degeneracy_witness(hpoly(ONE), hpoly(ONE))


# -- transport equation -------------------------------------------------------------


def transport_by_back_substitution(beta: Fraction, h: HomogeneousPoly) -> BivariatePoly:
    """Independent solver: coefficient matching, solved by back-substitution.

    For p of degree d+1 with p(0,y) = 0, matching x^i y^j coefficients gives
    (i+1) t[i+1,j] + beta (j+1) t[i,j+1] = h[i,j], solvable in order of
    increasing i from the normalization t[0,d+1] = 0.
    """
    d = h.degree
    t: dict[tuple[int, int], Fraction] = {(0, d + 1): Fraction(0)}
    for i in range(0, d + 1):
        j = d - i
        rhs = h.poly.coefficient(i, j) - beta * (j + 1) * t[(i, j + 1)]
        t[(i + 1, j)] = rhs / (i + 1)
    return BivariatePoly(t)


def test_transport_zero_right_side():
    p = solve_transport(TransportProblem(Fraction(2), HomogeneousPoly(ZERO, 3)))
    assert p.is_zero()
    assert p.degree == 4


def test_transport_linear_example():
    p = solve_transport(TransportProblem(Fraction(1), hpoly(X + Y)))
    assert p.poly == X * Y
    assert p.poly.partial("x") + p.poly.partial("y") == X + Y


def test_transport_zero_beta_integrates_directly():
    p = solve_transport(TransportProblem(Fraction(0), hpoly(Y**2)))
    assert p.poly == X * Y**2


def test_transport_random_problems_residual_and_normalization(rng):
    for _ in range(30):
        d = rng.randint(0, 8)
        h = rand_homogeneous(rng, d)
        beta = rand_fraction(rng)
        p = solve_transport(TransportProblem(beta, h))
        assert p.degree == d + 1
        residual = p.poly.partial("x") + beta * p.poly.partial("y") - h.poly
        assert residual == ZERO
        # p(0, y) = 0: no pure-y term survives
        assert all(i > 0 for (i, _) in p.poly.terms)


def test_transport_agrees_with_back_substitution(rng):
    for _ in range(30):
        d = rng.randint(0, 6)
        h = rand_homogeneous(rng, d)
        beta = rand_fraction(rng)
        via_shear = solve_transport(TransportProblem(beta, h)).poly
        via_matching = transport_by_back_substitution(beta, h)
        assert (via_shear - via_matching) == ZERO


# -- qshear cancellation trace ----------------------------------------------------------


def test_trace_cancelling_pairs_sum_to_zero():
    trace = qshear_cancellation_trace(FamilySpec.qshear(2, 1, [1, 1], 1))
    for pair, total in trace.pair_sums().items():
        assert total == ZERO, pair
    assert trace.total == ONE
    assert trace.is_unit()


def test_trace_lambda_zero_kills_lambda_terms():
    trace = qshear_cancellation_trace(FamilySpec.qshear(2, 1, [1, 1], 0))
    for name in ("lam*S", "lam*Qx*S^2", "-lam*S", "-lam*Qx*S^2"):
        assert trace.term(name) == ZERO
    assert trace.total == ONE


def test_trace_matches_jacobian_for_random_specs(rng):
    for _ in range(8):
        spec = rand_qshear_spec(rng, m_max=5)
        trace = qshear_cancellation_trace(spec)
        assert trace.total == jacobian_det(build_qshear(spec))
        assert trace.total == ONE


def test_trace_derivative_identities(rng):
    spec = FamilySpec.qshear(3, Fraction(5, 2), [1, 0, 2], 1)
    trace = qshear_cancellation_trace(spec)
    assert trace.qx == 5 * X
    assert trace.qy == ONE
    # S = beta_1 + 2 beta_2 Q + 3 beta_3 Q^2 with beta = (1, 0, 2)
    q = trace.q
    assert trace.s == ONE + 6 * q**2


def test_trace_json_report_structure():
    trace = qshear_cancellation_trace(FamilySpec.qshear(2, 1, [1, 1], 1))
    payload = trace.to_json_dict()
    text = json.dumps(payload)  # must be JSON-serializable
    assert '"is_unit": true' in text
    assert set(payload["terms"]) == {
        "1", "lam*S", "Qx*S", "lam*Qx*S^2", "-S*Qx", "-lam*S", "-lam*Qx*S^2",
    }
    assert len(payload["cancelling_pairs"]) == 3
    assert payload["total"] == "1x^0y^0"


def test_trace_rejects_triangular_spec():
    with pytest.raises(ValueError):
        qshear_cancellation_trace(FamilySpec.triangular(2, [1], 0))
