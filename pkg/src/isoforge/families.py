"""The two families of trivial isochronous centers and their plumbing.

A *trivial* isochronous center comes from a polynomial map f = (f1, f2)
fixing the origin with unit Jacobian determinant; its Hamiltonian is
H = (f1^2 + f2^2) / 2 and every orbit of (xdot, ydot) = (-H_y, H_x) has
period 2*pi.  Two branches are constructed here:

* triangular:  f1 = x + sum c_i y^i (i = 2..k),  f2 = y + lam * f1.
  Exists at every odd system degree n = 2k - 1 >= 3.

* quadratic shear (Q branch):  with Q = y + gamma * x^2,
  f1 = x + sum beta_i Q^i (i = 1..m),  f2 = Q + lam * f1.
  Exists exactly at system degrees n = 4m - 1, i.e. n == 3 (mod 4), n >= 7.

Both maps factor into elementary shears, so exact polynomial inverses
exist; `invert_map` builds them and certifies g o f = f o g = id symbolically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .poly import (
    BivariatePoly,
    ONE,
    X,
    Y,
    ZERO,
    _compose_cached,
)


class SpecValidationError(ValueError):
    """A family parameter record violates its branch constraints."""


class InversionError(RuntimeError):
    """The constructed inverse failed its symbolic composition check."""


TRIANGULAR = "triangular"
QSHEAR = "qshear"

_RATIONAL_KIND = (int, Fraction)


def _as_fraction(value, field: str) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise SpecValidationError(f"field {field!r} must be a rational, got {type(value).__name__}")


@dataclass(frozen=True)
class FamilySpec:
    """Parameter record selecting one member of one branch.

    Triangular: k >= 2, c = (c_2, ..., c_k), lam.
    Q shear:    m >= 2, gamma != 0, beta = (beta_1, ..., beta_m), lam.
    """

    branch: str
    lam: Fraction
    k: int | None = None
    c: tuple[Fraction, ...] = ()
    m: int | None = None
    gamma: Fraction | None = None
    beta: tuple[Fraction, ...] = ()

    @classmethod
    def triangular(cls, k: int, c, lam=0) -> "FamilySpec":
        return cls(
            branch=TRIANGULAR,
            lam=_as_fraction(lam, "lambda"),
            k=int(k),
            c=tuple(_as_fraction(v, "c") for v in c),
        )

    @classmethod
    def qshear(cls, m: int, gamma, beta, lam=0) -> "FamilySpec":
        return cls(
            branch=QSHEAR,
            lam=_as_fraction(lam, "lambda"),
            m=int(m),
            gamma=_as_fraction(gamma, "gamma"),
            beta=tuple(_as_fraction(v, "beta") for v in beta),
        )

    def validate(self, allow_degree_drop: bool = False) -> None:
        if self.branch == TRIANGULAR:
            if self.k is None or self.k < 2:
                raise SpecValidationError("triangular branch requires k >= 2")
            if len(self.c) != self.k - 1:
                raise SpecValidationError(
                    f"expected {self.k - 1} coefficients c_2..c_{self.k}, got {len(self.c)}"
                )
            if not allow_degree_drop and self.c[-1] == 0:
                raise SpecValidationError(
                    f"c_{self.k} = 0 drops the degree below the nominal n = {2 * self.k - 1}"
                )
        elif self.branch == QSHEAR:
            if self.m is None or self.m < 2:
                raise SpecValidationError("qshear branch requires m >= 2")
            if self.gamma is None or self.gamma == 0:
                raise SpecValidationError(
                    "gamma must be nonzero (gamma = 0 collapses Q to a shear of y alone)"
                )
            if len(self.beta) != self.m:
                raise SpecValidationError(
                    f"expected {self.m} coefficients beta_1..beta_{self.m}, got {len(self.beta)}"
                )
            if not allow_degree_drop and self.beta[-1] == 0:
                raise SpecValidationError(
                    f"beta_{self.m} = 0 drops the degree below the nominal n = {4 * self.m - 1}"
                )
        else:
            raise SpecValidationError(f"unknown branch {self.branch!r}")

    # -- JSON wire format --------------------------------------------------

    @classmethod
    def from_json_dict(cls, data: dict) -> "FamilySpec":
        if not isinstance(data, dict):
            raise SpecValidationError("family spec must be a JSON object")
        branch = data.get("branch")
        if branch == TRIANGULAR:
            allowed = {"branch", "k", "c", "lambda"}
        elif branch == QSHEAR:
            allowed = {"branch", "m", "gamma", "beta", "lambda"}
        else:
            raise SpecValidationError(f"unknown branch {branch!r}")
        unknown = set(data) - allowed
        if unknown:
            raise SpecValidationError(f"unknown keys {sorted(unknown)} in family spec")
        missing = allowed - set(data)
        if missing:
            raise SpecValidationError(f"missing keys {sorted(missing)} in family spec")

        def rat(value, field):
            if not isinstance(value, str):
                raise SpecValidationError(
                    f"field {field!r} must be a rational string like \"-3/2\""
                )
            try:
                return Fraction(value)
            except (ValueError, ZeroDivisionError) as exc:
                raise SpecValidationError(f"field {field!r}: {exc}") from exc

        def rat_list(values, field):
            if not isinstance(values, list):
                raise SpecValidationError(f"field {field!r} must be a list of rational strings")
            return [rat(v, field) for v in values]

        lam = rat(data["lambda"], "lambda")
        if branch == TRIANGULAR:
            if not isinstance(data["k"], int) or isinstance(data["k"], bool):
                raise SpecValidationError("field 'k' must be an integer")
            spec = cls.triangular(data["k"], rat_list(data["c"], "c"), lam)
        else:
            if not isinstance(data["m"], int) or isinstance(data["m"], bool):
                raise SpecValidationError("field 'm' must be an integer")
            spec = cls.qshear(data["m"], rat(data["gamma"], "gamma"), rat_list(data["beta"], "beta"), lam)
        spec.validate()
        return spec

    def to_json_dict(self) -> dict:
        if self.branch == TRIANGULAR:
            return {
                "branch": TRIANGULAR,
                "k": self.k,
                "c": [str(v) for v in self.c],
                "lambda": str(self.lam),
            }
        return {
            "branch": QSHEAR,
            "m": self.m,
            "gamma": str(self.gamma),
            "beta": [str(v) for v in self.beta],
            "lambda": str(self.lam),
        }


@dataclass(frozen=True)
class PolyMap:
    """A polynomial map of the plane fixing the origin.

    ``spec`` records family provenance when the map came from a builder; it
    does not participate in equality.  Numerical code uses it to evaluate
    the components through their factored form, which is dramatically
    better conditioned than the expanded monomials at large coordinates.
    """

    f1: BivariatePoly
    f2: BivariatePoly
    spec: FamilySpec | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.f1.eval_exact(0, 0) != 0 or self.f2.eval_exact(0, 0) != 0:
            raise ValueError("map must fix the origin: f(0,0) = (0,0)")

    def degree(self):
        return max(self.f1.degree, self.f2.degree)

    def __str__(self) -> str:
        return f"({self.f1}, {self.f2})"


def identity_map() -> PolyMap:
    return PolyMap(X, Y)


def compose_map(outer: PolyMap, inner: PolyMap) -> PolyMap:
    """Exact composition outer(inner), sharing the inner-power cache."""
    ypow = [ONE]
    c1 = _compose_cached(outer.f1, inner.f1, inner.f2, ypow)
    c2 = _compose_cached(outer.f2, inner.f1, inner.f2, ypow)
    return PolyMap(c1, c2)


def is_identity(f: PolyMap) -> bool:
    return f.f1 == X and f.f2 == Y


@dataclass(frozen=True)
class Hamiltonian:
    """An energy function H with optional provenance map f, 2H = f1^2 + f2^2."""

    poly: BivariatePoly
    source: PolyMap | None = None

    def __post_init__(self):
        if self.poly.eval_exact(0, 0) != 0:
            raise ValueError("Hamiltonian must vanish at the origin")
        if self.source is not None:
            if 2 * self.poly != self.source.f1 ** 2 + self.source.f2 ** 2:
                raise ValueError("source map inconsistent: 2H != f1^2 + f2^2")

    @property
    def degree(self):
        return self.poly.degree


def quadratic_shear(gamma) -> BivariatePoly:
    """The shear polynomial Q = y + gamma * x^2."""
    return Y + _as_fraction(gamma, "gamma") * X ** 2


def build_triangular(spec: FamilySpec, allow_degree_drop: bool = False) -> PolyMap:
    """f1 = x + sum_{i=2}^{k} c_i y^i, f2 = y + lam * f1."""
    if spec.branch != TRIANGULAR:
        raise SpecValidationError("build_triangular requires a triangular spec")
    spec.validate(allow_degree_drop)
    f1 = X
    ypow = Y
    for i in range(2, spec.k + 1):
        ypow = ypow * Y
        f1 = f1 + spec.c[i - 2] * ypow
    f2 = Y + spec.lam * f1
    return PolyMap(f1, f2, spec=spec)


def build_qshear(spec: FamilySpec, allow_degree_drop: bool = False) -> PolyMap:
    """With Q = y + gamma x^2: f1 = x + sum beta_i Q^i, f2 = Q + lam * f1."""
    if spec.branch != QSHEAR:
        raise SpecValidationError("build_qshear requires a qshear spec")
    spec.validate(allow_degree_drop)
    q = quadratic_shear(spec.gamma)
    f1 = X
    qpow = ONE
    for i in range(1, spec.m + 1):
        qpow = qpow * q
        f1 = f1 + spec.beta[i - 1] * qpow
    f2 = q + spec.lam * f1
    return PolyMap(f1, f2, spec=spec)


def build(spec: FamilySpec, allow_degree_drop: bool = False) -> PolyMap:
    if spec.branch == TRIANGULAR:
        return build_triangular(spec, allow_degree_drop)
    if spec.branch == QSHEAR:
        return build_qshear(spec, allow_degree_drop)
    raise SpecValidationError(f"unknown branch {spec.branch!r}")


def hamiltonian_of(f: PolyMap) -> Hamiltonian:
    """H = (f1^2 + f2^2) / 2, exactly."""
    h = (f.f1 ** 2 + f.f2 ** 2) * Fraction(1, 2)
    return Hamiltonian(h, source=f)


def vector_field(h: Hamiltonian) -> tuple[BivariatePoly, BivariatePoly]:
    """The Hamiltonian field (xdot, ydot) = (-H_y, H_x)."""
    return -h.poly.partial("y"), h.poly.partial("x")


def system_degree(h: Hamiltonian) -> int:
    """Max total degree of the two vector-field components."""
    if h.poly.degree <= 0:
        raise ValueError("system degree requires a nonconstant Hamiltonian")
    fx, fy = vector_field(h)
    return int(max(fx.degree, fy.degree))


def invert_map(f: PolyMap, spec: FamilySpec, verify: bool = True) -> PolyMap:
    """Exact polynomial inverse of a family map, by undoing its shear factors.

    The inverse is global (the factors are globally invertible shears), which
    is what certifies injectivity of f on the whole plane.  With verify=True
    (the default) the compositions g o f and f o g are checked symbolically
    against the identity before returning; failure signals a construction bug.
    """
    expected = build(spec, allow_degree_drop=True)
    if expected.f1 != f.f1 or expected.f2 != f.f2:
        raise SpecValidationError("map was not produced by this spec")

    w = Y - spec.lam * X  # undo the final shear: second coordinate before it
    if spec.branch == TRIANGULAR:
        g1 = X
        wpow = w
        for i in range(2, spec.k + 1):
            wpow = wpow * w
            g1 = g1 - spec.c[i - 2] * wpow
        g = PolyMap(g1, w)
    else:
        g1 = X
        wpow = ONE
        for i in range(1, spec.m + 1):
            wpow = wpow * w
            g1 = g1 - spec.beta[i - 1] * wpow
        g2 = w - spec.gamma * g1 ** 2  # undo the Q substitution
        g = PolyMap(g1, g2)

    if verify:
        if not is_identity(compose_map(g, f)):
            raise InversionError("inverse failed check: g o f != identity")
        if not is_identity(compose_map(f, g)):
            raise InversionError("inverse failed check: f o g != identity")
    return g


@dataclass(frozen=True)
class BranchCatalogEntry:
    """Branch availability at one odd system degree n."""

    n: int
    triangular_available: bool
    triangular_k: int
    qshear_available: bool
    qshear_m: int | None

    @property
    def triangular_param_count(self) -> int:
        # c_2..c_k plus lambda
        return self.triangular_k

    @property
    def qshear_param_count(self) -> int | None:
        # gamma, beta_1..beta_m, lambda
        return self.qshear_m + 2 if self.qshear_available else None


def branch_catalog(n_max: int) -> list[BranchCatalogEntry]:
    """Catalog of available branches for every odd degree in [3, n_max].

    The triangular branch exists at every odd n with k = (n+1)/2; the Q
    branch exists exactly when n == 3 (mod 4) and n >= 7, with m = (n+1)/4.
    """
    if not isinstance(n_max, int) or n_max < 3 or n_max % 2 == 0:
        raise ValueError("n_max must be an odd integer >= 3")
    entries = []
    for n in range(3, n_max + 1, 2):
        q_ok = n % 4 == 3 and n >= 7
        entries.append(
            BranchCatalogEntry(
                n=n,
                triangular_available=True,
                triangular_k=(n + 1) // 2,
                qshear_available=q_ok,
                qshear_m=(n + 1) // 4 if q_ok else None,
            )
        )
    return entries
