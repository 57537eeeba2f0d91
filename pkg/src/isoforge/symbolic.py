"""Exact symbolic verification of the defining identities.

Everything here compares term maps for equality; no numerical sampling is
ever used to certify an identity.  The three tools:

* Jacobian determinant and the unit-Jacobian check for polynomial maps.
* Degeneracy witnesses: when two nonzero homogeneous polynomials p, q have
  det D(p, q) identically zero, both are rational multiples of powers of a
  common squarefree form r; the witness (r, c_p, c_q, m', n') is extracted
  and re-verified by exact exponentiation.
* The transport equation p_x + beta * p_y = h for homogeneous h, solved by
  shearing y -> y + beta*x, integrating in x, and shearing back, pinned to
  the normalization p(0, y) = 0.

For the Q branch there is additionally an executable trace of the Jacobian
cancellation: the determinant expands into 1 plus six terms that cancel in
pairs, and the trace materializes each term and each cancelling pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .poly import (
    BivariatePoly,
    HomogeneousPoly,
    ONE,
    X,
    Y,
    ZERO,
    compose,
    radical_homogeneous,
)
from .families import FamilySpec, PolyMap, QSHEAR, build_qshear, quadratic_shear


class WitnessFieldError(ValueError):
    """det D(p,q) vanishes but no witness of the expected shape exists.

    This is reported as "witness outside rational field" rather than as a
    falsification: the common form r may fail to be expressible as a power
    of a squarefree polynomial with rational coefficients.
    """


def jacobian_det(f: PolyMap) -> BivariatePoly:
    """det Df = f1_x * f2_y - f1_y * f2_x, exactly."""
    return (
        f.f1.partial("x") * f.f2.partial("y")
        - f.f1.partial("y") * f.f2.partial("x")
    )


def check_unit_jacobian(f: PolyMap) -> bool:
    """True iff det Df is the constant polynomial 1 (exact term-map test)."""
    return jacobian_det(f) == ONE


@dataclass(frozen=True)
class DegeneracyWitness:
    """Certificate that p = c_p * r^m' and q = c_q * r^n' exactly."""

    r: HomogeneousPoly
    c_p: Fraction
    c_q: Fraction
    m_prime: int
    n_prime: int

    def __post_init__(self):
        if self.r.is_zero():
            raise ValueError("witness form r must be nonzero")
        if radical_homogeneous(self.r).poly != self.r.poly:
            raise ValueError("witness form r must be squarefree and normalized")

    def reconstruct(self) -> tuple[BivariatePoly, BivariatePoly]:
        """Rebuild (p, q) from the witness data by exact exponentiation."""
        return (
            self.c_p * self.r.poly ** self.m_prime,
            self.c_q * self.r.poly ** self.n_prime,
        )


def _power_data(p: HomogeneousPoly, r: HomogeneousPoly, name: str) -> tuple[Fraction, int]:
    """Return (c, e) with p = c * r^e exactly, or raise WitnessFieldError."""
    if p.degree % r.degree != 0:
        raise WitnessFieldError(
            f"witness outside rational field: deg {name} = {p.degree} is not a "
            f"multiple of deg r = {r.degree}"
        )
    e = p.degree // r.degree
    _, lead_p = p.poly.leading_term()
    _, lead_r = r.poly.leading_term()
    c = lead_p / lead_r ** e
    if p.poly != c * r.poly ** e:
        raise WitnessFieldError(
            f"witness outside rational field: {name} is not a rational multiple "
            f"of r^{e}"
        )
    return c, e


def degeneracy_witness(
    p: HomogeneousPoly, q: HomogeneousPoly
) -> DegeneracyWitness | None:
    """Extract the common-power witness for a degenerate homogeneous pair.

    Returns None when det D(p, q) is not identically zero.  When it is,
    computes r as the squarefree part of p, demands that q has the same
    squarefree part, reads off exponents and constants, and re-verifies the
    reconstruction exactly before returning.
    """
    if p.is_zero() or q.is_zero():
        raise ValueError("degeneracy witness requires nonzero inputs")
    if p.degree < 1 or q.degree < 1:
        raise ValueError("degeneracy witness requires degree >= 1 inputs")
    det = (
        p.poly.partial("x") * q.poly.partial("y")
        - p.poly.partial("y") * q.poly.partial("x")
    )
    if not det.is_zero():
        return None
    r = radical_homogeneous(p)
    r_q = radical_homogeneous(q)
    if r_q.poly != r.poly:
        raise WitnessFieldError(
            "witness outside rational field: squarefree parts of p and q differ"
        )
    c_p, m_prime = _power_data(p, r, "p")
    c_q, n_prime = _power_data(q, r, "q")
    witness = DegeneracyWitness(r=r, c_p=c_p, c_q=c_q, m_prime=m_prime, n_prime=n_prime)
    rp, rq = witness.reconstruct()
    assert rp == p.poly and rq == q.poly, "witness reconstruction must be exact"
    return witness


@dataclass(frozen=True)
class TransportProblem:
    """The first-order problem p_x + beta * p_y = h with homogeneous h."""

    beta: Fraction
    h: HomogeneousPoly


def solve_transport(prob: TransportProblem) -> HomogeneousPoly:
    """Unique homogeneous p of degree d+1 with p_x + beta p_y = h, p(0,y) = 0.

    Method: substitute (x, y) -> (x, y + beta*x) (the inverse of the shear
    y -> y - beta*x), integrate the transformed right side in x term by
    term, then substitute back.  The zero residual and the normalization
    are asserted before returning.
    """
    beta = Fraction(prob.beta)
    h = prob.h
    if h.is_zero():
        return HomogeneousPoly(ZERO, h.degree + 1)
    sheared = compose(h.poly, X, Y + beta * X)
    integrated = sheared.integrate_x()
    p = compose(integrated, X, Y - beta * X)

    residual = p.partial("x") + beta * p.partial("y") - h.poly
    assert residual.is_zero(), "transport solution must have exactly zero residual"
    assert compose(p, ZERO, Y).is_zero(), "transport solution must satisfy p(0,y) = 0"
    return HomogeneousPoly.from_poly(p, h.degree + 1)


@dataclass(frozen=True)
class QShearCancellationReport:
    """Executable expansion of det Df for a Q-branch map.

    With S = sum_i i * beta_i * Q^(i-1), Qx = dQ/dx and Qy = dQ/dy, the
    determinant expands as

        1 + lam*S + Qx*S + lam*Qx*S^2 - S*Qx - lam*S - lam*Qx*S^2

    and the six non-constant terms cancel in the three pairs recorded in
    ``cancelling_pairs``.  ``total`` is the exact sum of all seven terms.
    """

    q: BivariatePoly
    qx: BivariatePoly
    qy: BivariatePoly
    s: BivariatePoly
    terms: tuple[tuple[str, BivariatePoly], ...]
    cancelling_pairs: tuple[tuple[str, str], ...]
    total: BivariatePoly

    def term(self, name: str) -> BivariatePoly:
        for label, poly in self.terms:
            if label == name:
                return poly
        raise KeyError(name)

    def pair_sums(self) -> dict[tuple[str, str], BivariatePoly]:
        return {(a, b): self.term(a) + self.term(b) for a, b in self.cancelling_pairs}

    def is_unit(self) -> bool:
        return self.total == ONE

    def to_json_dict(self) -> dict:
        return {
            "legend": {
                "Q": self.q.to_string(),
                "Qx": self.qx.to_string(),
                "Qy": self.qy.to_string(),
                "S": self.s.to_string(),
            },
            "terms": {label: poly.to_string() for label, poly in self.terms},
            "cancelling_pairs": [list(pair) for pair in self.cancelling_pairs],
            "pair_sums": {
                f"{a} + {b}": poly.to_string()
                for (a, b), poly in self.pair_sums().items()
            },
            "total": self.total.to_string(),
            "is_unit": self.is_unit(),
        }


def qshear_cancellation_trace(spec: FamilySpec) -> QShearCancellationReport:
    """Materialize the pairwise cancellation behind det Df = 1 on the Q branch."""
    if spec.branch != QSHEAR:
        raise ValueError("cancellation trace is defined for qshear specs")
    spec.validate(allow_degree_drop=True)
    build_qshear(spec, allow_degree_drop=True)  # surface spec problems early

    q = quadratic_shear(spec.gamma)
    qx = q.partial("x")
    qy = q.partial("y")
    assert qx == 2 * spec.gamma * X, "dQ/dx must equal 2*gamma*x"
    assert qy == ONE, "dQ/dy must equal 1"

    s = ZERO
    qpow = ONE
    for i in range(1, spec.m + 1):
        s = s + i * spec.beta[i - 1] * qpow
        qpow = qpow * q

    lam = spec.lam
    named = (
        ("1", ONE),
        ("lam*S", lam * s),
        ("Qx*S", qx * s),
        ("lam*Qx*S^2", lam * qx * s ** 2),
        ("-S*Qx", -(s * qx)),
        ("-lam*S", -(lam * s)),
        ("-lam*Qx*S^2", -(lam * qx * s ** 2)),
    )
    pairs = (("lam*S", "-lam*S"), ("Qx*S", "-S*Qx"), ("lam*Qx*S^2", "-lam*Qx*S^2"))
    total = ZERO
    for _, poly in named:
        total = total + poly
    return QShearCancellationReport(
        q=q, qx=qx, qy=qy, s=s, terms=named, cancelling_pairs=pairs, total=total
    )
