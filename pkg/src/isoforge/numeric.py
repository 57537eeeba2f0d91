"""Numerical verification: orbit periods, isochrony sweeps, and evidence search.

The symbolic half of the package proves det Df = 1 exactly; this module
checks the dynamical consequence on real orbits.  Key geometric fact used
throughout: when 2H = f1^2 + f2^2 with det Df = 1, the image point
(f1, f2) moves along the flow as an exact rigid rotation (d f1/dt = -f2,
d f2/dt = f1), so the Poincare section {f2 = 0, f1 > 0} is globally
transversal and first-return times are the orbit period.

Integration is adaptive embedded Runge-Kutta (DOP853) with dense output;
section crossings are located by scanning the dense interpolant and
refining with bisection plus a secant polish.  Symplectic integration is
not needed because periods come from event times, not long-horizon
statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, least_squares

from .poly import BivariatePoly
from .families import Hamiltonian, PolyMap, identity_map, vector_field

TWO_PI = 2.0 * math.pi

_SCAN_DT = 0.02  # dense-output scan spacing; crossings are >= pi apart in f-angle

# The config tolerances state the accuracy contract of a run (drift budget,
# period accuracy); the solver is driven one decade tighter so the contract
# holds with margin even where orbit coordinates are large.
_SOLVER_SAFETY = 0.1


class IntegrationError(RuntimeError):
    """Numeric run failed: escape, step failure, missing crossing, or drift."""


@dataclass(frozen=True)
class IntegratorConfig:
    # max_step 0.05 keeps the dense-output interpolation error (which both
    # the energy-drift record and the crossing refinement see) well below
    # the drift budget of 100 * rel_tol * E.
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_step: float = 0.05
    section_refinement_tol: float = 1e-12

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "section_refinement_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


DEFAULT_CONFIG = IntegratorConfig()


# -- fast float evaluation -----------------------------------------------------


def compile_poly(p: BivariatePoly) -> Callable[[float, float], float]:
    """Compile a polynomial to a scalar float callable (nested Horner codegen)."""
    if p.is_zero():
        return lambda x, y: 0.0
    rows: dict[int, dict[int, float]] = {}
    for (i, j), c in p.terms.items():
        rows.setdefault(i, {})[j] = float(c)

    def row_expr(row: dict[int, float]) -> str:
        mj = max(row)
        expr = repr(row[mj])
        for j in range(mj - 1, -1, -1):
            expr = f"({expr})*y + {row.get(j, 0.0)!r}"
        return expr

    expr = None
    for i in range(max(rows), -1, -1):
        row = rows.get(i)
        part = row_expr(row) if row else "0.0"
        expr = part if expr is None else f"({expr})*x + ({part})"
    namespace: dict = {}
    exec(f"def _poly(x, y):\n    return {expr}\n", {"__builtins__": {}}, namespace)
    return namespace["_poly"]


def poly_term_arrays(p: BivariatePoly) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(coeffs, x-exponents, y-exponents) arrays for vectorized evaluation."""
    items = sorted(p.terms.items())
    coeffs = np.array([float(c) for _, c in items], dtype=float)
    xs = np.array([e[0] for e, _ in items], dtype=np.int64)
    ys = np.array([e[1] for e, _ in items], dtype=np.int64)
    return coeffs, xs, ys


def eval_term_arrays(arrays, x, y) -> np.ndarray:
    coeffs, xs, ys = arrays
    if coeffs.size == 0:
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (coeffs * x[..., None] ** xs * y[..., None] ** ys).sum(axis=-1)


def _triangular_functions(spec):
    """(f1, f2, field) evaluated through the factored triangular structure.

    The closures use only + and *, so they accept floats and numpy arrays
    alike.  Structured evaluation matters: the expanded monomials of f1, f2
    cancel catastrophically at large coordinates, while the factored form
    only ever meets the single intrinsic cancellation x + (y-powers).
    """
    cs = [float(v) for v in spec.c]  # c_2 .. c_k
    dcs = [i * float(v) for i, v in enumerate(spec.c, start=2)]
    lam = float(spec.lam)

    def shear(y):  # sum c_i y^i
        p = 0.0
        for c in reversed(cs):
            p = p * y + c
        return p * y * y

    def shear_dy(y):  # sum i c_i y^(i-1)
        p = 0.0
        for c in reversed(dcs):
            p = p * y + c
        return p * y

    def f1(x, y):
        return x + shear(y)

    def f2(x, y):
        return y + lam * f1(x, y)

    def field(x, y):
        u = f1(x, y)
        v = y + lam * u
        s = shear_dy(y)
        return -(u * s + v * (1.0 + lam * s)), u + lam * v

    return f1, f2, field


def _qshear_functions(spec):
    """(f1, f2, field) evaluated through Q = y + gamma x^2 first."""
    bs = [float(v) for v in spec.beta]  # beta_1 .. beta_m
    dbs = [i * float(v) for i, v in enumerate(spec.beta, start=1)]
    gam = float(spec.gamma)
    lam = float(spec.lam)

    def f1(x, y):
        q = y + gam * x * x
        a = 0.0
        for b in reversed(bs):
            a = a * q + b
        return x + a * q

    def f2(x, y):
        q = y + gam * x * x
        return q + lam * f1(x, y)

    def field(x, y):
        q = y + gam * x * x
        a = 0.0
        for b in reversed(bs):
            a = a * q + b
        u = x + a * q  # f1
        v = q + lam * u  # f2
        s = 0.0
        for b in reversed(dbs):
            s = s * q + b  # S = sum i beta_i q^(i-1)
        qx = 2.0 * gam * x
        f1x = 1.0 + qx * s
        return -(u * s + v * (1.0 + lam * s)), u * f1x + v * (qx + lam * f1x)

    return f1, f2, field


def _generic_map_functions(src: PolyMap):
    """Fallback (f1, f2, field) from the expanded polynomials."""
    f1s = compile_poly(src.f1)
    f2s = compile_poly(src.f2)
    a1 = poly_term_arrays(src.f1)
    a2 = poly_term_arrays(src.f2)
    f1xs = compile_poly(src.f1.partial("x"))
    f1ys = compile_poly(src.f1.partial("y"))
    f2xs = compile_poly(src.f2.partial("x"))
    f2ys = compile_poly(src.f2.partial("y"))

    def f1(x, y):
        if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
            return eval_term_arrays(a1, x, y)
        return f1s(x, y)

    def f2(x, y):
        if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
            return eval_term_arrays(a2, x, y)
        return f2s(x, y)

    def field(x, y):
        u, v = f1s(x, y), f2s(x, y)
        return (
            -(u * f1ys(x, y) + v * f2ys(x, y)),
            u * f1xs(x, y) + v * f2xs(x, y),
        )

    return f1, f2, field


def _map_functions(src: PolyMap):
    """(f1, f2, field) evaluators for a map, structured when provenance allows."""
    spec = src.spec
    if spec is not None:
        if spec.branch == "triangular":
            return _triangular_functions(spec)
        if spec.branch == "qshear":
            return _qshear_functions(spec)
    return _generic_map_functions(src)


def _hamiltonian_functions(h: Hamiltonian):
    """(field, energy) for a Hamiltonian; energy accepts scalars or arrays."""
    if h.source is not None:
        f1, f2, field = _map_functions(h.source)

        def energy(x, y):
            u, v = f1(x, y), f2(x, y)
            return 0.5 * (u * u + v * v)

        return field, energy
    fx_poly, fy_poly = vector_field(h)
    fx = compile_poly(fx_poly)
    fy = compile_poly(fy_poly)
    h_scalar = compile_poly(h.poly)
    h_arrays = poly_term_arrays(h.poly)

    def field(x, y):
        return fx(x, y), fy(x, y)

    def energy(x, y):
        if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
            return eval_term_arrays(h_arrays, x, y)
        return h_scalar(x, y)

    return field, energy


# -- orbit integration ---------------------------------------------------------


@dataclass(frozen=True)
class OrbitPath:
    """One integrated trajectory with the energy record along it."""

    t: np.ndarray
    states: np.ndarray  # shape (2, n)
    energies: np.ndarray
    energy: float  # H at the start point
    energy_drift: float
    steps: int
    dense: Callable  # dense-output interpolant t -> (x, y)
    t_end: float


def integrate_orbit(
    h: Hamiltonian,
    start: Sequence[float],
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    t_max: float = 60.0,
    escape_radius: float = 1e7,
) -> OrbitPath:
    """Integrate (xdot, ydot) = (-H_y, H_x) from start, recording H.

    Raises IntegrationError when the solver fails (step-size underflow) or
    the trajectory escapes the bounding circle of ``escape_radius``, which
    signals a non-closed orbit or an instability.
    """
    x0, y0 = float(start[0]), float(start[1])
    if not (math.isfinite(x0) and math.isfinite(y0)):
        raise ValueError("start point must be finite")
    if x0 == 0.0 and y0 == 0.0:
        raise ValueError("start must differ from the origin (the equilibrium)")
    field, energy_fn = _hamiltonian_functions(h)
    e0 = energy_fn(x0, y0)
    if not e0 > 0.0:
        raise ValueError(f"start must have positive energy, got H = {e0:g}")

    def rhs(t, s):
        return field(s[0], s[1])

    r2 = escape_radius * escape_radius

    def escape(t, s):
        return s[0] * s[0] + s[1] * s[1] - r2

    escape.terminal = True

    sol = solve_ivp(
        rhs,
        (0.0, float(t_max)),
        (x0, y0),
        method="DOP853",
        rtol=max(cfg.rel_tol * _SOLVER_SAFETY, 2.3e-14),
        atol=cfg.abs_tol * _SOLVER_SAFETY,
        max_step=cfg.max_step,
        dense_output=True,
        events=[escape],
    )
    if sol.status == -1:
        raise IntegrationError(f"integration failed: {sol.message}")
    if sol.status == 1:
        t_esc = float(sol.t_events[0][0])
        raise IntegrationError(
            f"orbit escaped beyond radius {escape_radius:g} at t = {t_esc:.6g}; "
            "no closed orbit at this energy"
        )
    energies = energy_fn(sol.y[0], sol.y[1])
    drift = float(np.max(np.abs(energies - e0)))
    return OrbitPath(
        t=sol.t,
        states=sol.y,
        energies=energies,
        energy=e0,
        energy_drift=drift,
        steps=len(sol.t) - 1,
        dense=sol.sol,
        t_end=float(sol.t[-1]),
    )


# -- period measurement ---------------------------------------------------------


@dataclass(frozen=True)
class PeriodReport:
    """Measured orbit period and run diagnostics."""

    energy: float
    initial_point: tuple[float, float]
    period: float
    period_abs_error_estimate: float
    energy_drift: float
    steps: int

    CSV_HEADER = "energy,period,period_error,drift,steps"

    def csv_row(self) -> str:
        return (
            f"{self.energy!r},{self.period!r},{self.period_abs_error_estimate!r},"
            f"{self.energy_drift!r},{self.steps}"
        )

    def to_json_dict(self) -> dict:
        return {
            "energy": self.energy,
            "initial_point": list(self.initial_point),
            "period": self.period,
            "period_abs_error_estimate": self.period_abs_error_estimate,
            "energy_drift": self.energy_drift,
            "steps": self.steps,
        }


def _refine_crossing(gfun, a, b, ga, gb, tol):
    """Refine a sign change (ga < 0 <= gb) by bisection plus secant polish."""
    while (b - a) > tol:
        m = 0.5 * (a + b)
        gm = gfun(m)
        if gm < 0.0:
            a, ga = m, gm
        else:
            b, gb = m, gm
    slope = (gb - ga) / (b - a) if b > a else 0.0
    t_best, g_best = (b, gb) if abs(gb) < abs(ga) else (a, ga)
    t0, g0, t1, g1 = a, ga, b, gb
    for _ in range(3):
        if g1 == g0:
            break
        t2 = t1 - g1 * (t1 - t0) / (g1 - g0)
        if not (a - 4 * tol <= t2 <= b + 4 * tol):
            break
        t0, g0, t1, g1 = t1, g1, t2, gfun(t2)
        if abs(g1) < abs(g_best):
            t_best, g_best = t1, g1
    err = (b - a) + (abs(g_best / slope) if slope else b - a)
    return t_best, err


def measure_period(
    h: Hamiltonian,
    start: Sequence[float],
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    t_max: float = 60.0,
    section_map: PolyMap | None = None,
) -> PeriodReport:
    """Period as the time between consecutive returns to {f2 = 0, f1 > 0}.

    The section lives in the coordinates of the Hamiltonian's source map
    (where the motion of a trivial center is an exact rigid rotation); an
    explicit ``section_map`` overrides it for Hamiltonians without a source.
    Raises IntegrationError when fewer than two crossings occur within
    ``t_max`` or the energy drift exceeds 100 * rel_tol * |E|.
    """
    section = section_map if section_map is not None else h.source
    if section is None:
        raise ValueError(
            "measure_period needs a source map (or explicit section_map) to "
            "define the section {f2 = 0, f1 > 0}"
        )
    f1_fn, f2_fn, _ = _map_functions(section)
    _, energy_fn = _hamiltonian_functions(h)

    # Two returns to the section need about 2.2 revolutions; integrating far
    # beyond that only accumulates energy drift, so extend in stages and stop
    # as soon as both crossings are in hand.
    spans = [s for s in (16.0, 40.0) if s < t_max] + [float(t_max)]
    orbit = None
    crossings: list[tuple[float, float]] = []
    for span in spans:
        orbit = integrate_orbit(h, start, cfg, span)
        dense = orbit.dense
        n = max(int(orbit.t_end / _SCAN_DT), 64)
        ts = np.linspace(0.0, orbit.t_end, n + 1)
        xy = dense(ts)
        vals = f2_fn(xy[0], xy[1])

        def gfun(t):
            s = dense(t)
            return f2_fn(s[0], s[1])

        arm_level = -1e-9 * float(np.max(np.abs(vals)))
        armed = False
        crossings = []
        for i in range(n):
            if vals[i] < arm_level:
                armed = True
            if armed and vals[i] < 0.0 <= vals[i + 1]:
                t_cross, err = _refine_crossing(
                    gfun, ts[i], ts[i + 1], vals[i], vals[i + 1],
                    cfg.section_refinement_tol,
                )
                s = dense(t_cross)
                if f1_fn(s[0], s[1]) > 0.0:
                    crossings.append((t_cross, err))
                    armed = False
                    if len(crossings) == 2:
                        break
        if len(crossings) == 2:
            break
    if len(crossings) < 2:
        raise IntegrationError(
            f"found {len(crossings)} section crossing(s) within t_max = {t_max:g}; "
            "cannot measure a period"
        )

    # Drift is judged on the solver's accepted trajectory points; values
    # interpolated between steps carry dense-output wiggle that says nothing
    # about the computed trajectory itself.
    drift = orbit.energy_drift
    drift_tol = 100.0 * cfg.rel_tol * abs(orbit.energy)
    if drift > drift_tol:
        raise IntegrationError(
            f"energy drift {drift:.3e} exceeds tolerance {drift_tol:.3e}"
        )

    (t1, e1), (t2, e2) = crossings
    return PeriodReport(
        energy=float(orbit.energy),
        initial_point=(float(start[0]), float(start[1])),
        period=float(t2 - t1),
        period_abs_error_estimate=float(e1 + e2),
        energy_drift=float(drift),
        steps=orbit.steps,
    )


def section_start_point(
    h: Hamiltonian, energy: float, inverse: PolyMap | None = None
) -> tuple[float, float]:
    """A start point with H = energy, preferably on the section.

    With the exact inverse map available the point is g(sqrt(2E), 0), which
    lies exactly on {f2 = 0, f1 > 0}.  Otherwise the positive x axis is
    searched for H(x, 0) = energy.
    """
    if not energy > 0:
        raise ValueError("energy must be positive")
    r = math.sqrt(2.0 * energy)
    if inverse is not None:
        return inverse.f1.eval_float(r, 0.0), inverse.f2.eval_float(r, 0.0)
    h_fn = compile_poly(h.poly)

    def g(x):
        return h_fn(x, 0.0) - energy

    hi = max(r, 1e-6)
    for _ in range(200):
        if g(hi) >= 0.0:
            break
        hi *= 2.0
    else:
        raise IntegrationError("could not bracket a start point on the x axis")
    return brentq(g, 1e-14, hi, xtol=1e-15, rtol=8.9e-16), 0.0


def isochrony_sweep(
    h: Hamiltonian,
    energies: Sequence[float],
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    inverse: PolyMap | None = None,
    t_max: float = 60.0,
) -> list[PeriodReport]:
    """Measure the period at each energy (ascending, positive)."""
    energies = [float(e) for e in energies]
    if any(e <= 0 for e in energies):
        raise ValueError("energies must be positive")
    if any(b <= a for a, b in zip(energies, energies[1:])):
        raise ValueError("energies must be strictly ascending")
    section = h.source if h.source is not None else identity_map()
    reports = []
    for e in energies:
        start = section_start_point(h, e, inverse)
        reports.append(measure_period(h, start, cfg, t_max, section_map=section))
    return reports


def rigid_rotation_defect(
    h: Hamiltonian,
    start: Sequence[float],
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    t_span: float = TWO_PI,
    n_samples: int = 400,
    fd_dt: float = 1e-3,
) -> tuple[float, float]:
    """Max finite-difference defects of (d f1/dt + f2, d f2/dt - f1) on an orbit.

    Central differences of f1, f2 along the dense trajectory are compared
    with the exact evaluations of -f2 and f1; both maxima should sit at the
    finite-difference noise floor when det Df = 1.
    """
    if h.source is None:
        raise ValueError("rigid_rotation_defect requires a Hamiltonian with source")
    orbit = integrate_orbit(h, start, cfg, t_max=t_span + 4 * fd_dt)
    dense = orbit.dense
    f1_fn, f2_fn, _ = _map_functions(h.source)
    ts = np.linspace(fd_dt, min(t_span, orbit.t_end - fd_dt), n_samples)

    def on_orbit(fn, tvec):
        xy = dense(tvec)
        return fn(xy[0], xy[1])

    d_f1 = (on_orbit(f1_fn, ts + fd_dt) - on_orbit(f1_fn, ts - fd_dt)) / (2 * fd_dt)
    d_f2 = (on_orbit(f2_fn, ts + fd_dt) - on_orbit(f2_fn, ts - fd_dt)) / (2 * fd_dt)
    defect1 = float(np.max(np.abs(d_f1 + on_orbit(f2_fn, ts))))
    defect2 = float(np.max(np.abs(d_f2 - on_orbit(f1_fn, ts))))
    return defect1, defect2


# -- injectivity sampling --------------------------------------------------------


class CollisionPair(NamedTuple):
    point_a: tuple[float, float]
    point_b: tuple[float, float]
    image_distance: float


def injectivity_sample(
    f: PolyMap,
    box_half_width: float,
    grid_points_per_axis: int,
    collision_tol: float = 1e-9,
) -> list[CollisionPair]:
    """Grid search for distinct points whose images nearly coincide.

    Sorts the image cloud and compares within a sliding window; for the
    constructed families the result must be empty (an exact inverse exists).
    This is a negative-control instrument for user-supplied maps.
    """
    if grid_points_per_axis < 2:
        raise ValueError("need at least 2 grid points per axis")
    axis = np.linspace(-box_half_width, box_half_width, grid_points_per_axis)
    gx, gy = np.meshgrid(axis, axis)
    px, py = gx.ravel(), gy.ravel()
    u = eval_term_arrays(poly_term_arrays(f.f1), px, py)
    v = eval_term_arrays(poly_term_arrays(f.f2), px, py)
    order = np.lexsort((v, u))
    uo, vo = u[order], v[order]
    collisions: list[CollisionPair] = []
    npts = len(order)
    for a in range(npts):
        b = a + 1
        while b < npts and uo[b] - uo[a] <= collision_tol:
            if abs(vo[b] - vo[a]) <= collision_tol:
                ia, ib = order[a], order[b]
                dist = math.hypot(uo[b] - uo[a], vo[b] - vo[a])
                collisions.append(
                    CollisionPair(
                        (float(px[ia]), float(py[ia])),
                        (float(px[ib]), float(py[ib])),
                        dist,
                    )
                )
            b += 1
    return collisions


# -- linear equivalence evidence search -------------------------------------------


@dataclass(frozen=True)
class EquivalenceSearchResult:
    """Outcome of the multi-start search for H_a(p) = H_b(A p)."""

    best_matrix: tuple[tuple[float, float], tuple[float, float]]
    best_residual: float
    restarts: int
    sample_count: int
    failed_restarts: int

    CSV_HEADER = "residual,restarts,sample_count,failed_restarts,a11,a12,a21,a22,det"

    @property
    def det(self) -> float:
        (a, b), (c, d) = self.best_matrix
        return a * d - b * c

    def csv_row(self) -> str:
        (a, b), (c, d) = self.best_matrix
        return (
            f"{self.best_residual!r},{self.restarts},{self.sample_count},"
            f"{self.failed_restarts},{a!r},{b!r},{c!r},{d!r},{self.det!r}"
        )

    def to_json_dict(self) -> dict:
        return {
            "best_matrix": [list(row) for row in self.best_matrix],
            "best_residual": self.best_residual,
            "det": self.det,
            "restarts": self.restarts,
            "sample_count": self.sample_count,
            "failed_restarts": self.failed_restarts,
        }


def linear_equivalence_search(
    h_a: Hamiltonian,
    h_b: Hamiltonian,
    sample_box: float = 1.0,
    restarts: int = 20,
    sample_count: int = 200,
    seed: int = 0,
    unimodular: bool = False,
    det_window: tuple[float, float] = (0.1, 10.0),
    stop_below: float | None = None,
) -> EquivalenceSearchResult:
    """Minimize the RMS of H_a(p) - H_b(A p) over 2x2 matrices A.

    Multi-start trust-region least squares with a finite-difference
    Jacobian; |det A| is confined to ``det_window`` (or to 1 with
    ``unimodular``) by a penalty row.  A residual floor that persists across
    every restart is evidence, not proof, of linear inequivalence.
    Non-convergence of a restart is counted in ``failed_restarts``, never
    raised.
    """
    if h_a.poly.degree <= 0 or h_b.poly.degree <= 0:
        raise ValueError("both Hamiltonians must be nonconstant")
    if restarts < 1:
        raise ValueError("need at least one restart")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-sample_box, sample_box, size=(int(sample_count), 2))
    targets = eval_term_arrays(poly_term_arrays(h_a.poly), pts[:, 0], pts[:, 1])
    scale = max(1.0, float(np.sqrt(np.mean(targets**2))))
    b_arrays = poly_term_arrays(h_b.poly)
    lo, hi = det_window

    def residuals(params):
        a11, a12, a21, a22 = params
        xs = a11 * pts[:, 0] + a12 * pts[:, 1]
        ys = a21 * pts[:, 0] + a22 * pts[:, 1]
        res = eval_term_arrays(b_arrays, xs, ys) - targets
        ad = abs(a11 * a22 - a12 * a21)
        if unimodular:
            pen = abs(ad - 1.0)
        else:
            pen = max(0.0, lo - ad) + max(0.0, ad - hi)
        return np.append(res, 10.0 * scale * pen)

    def feasible(params) -> bool:
        a11, a12, a21, a22 = params
        ad = abs(a11 * a22 - a12 * a21)
        if unimodular:
            return abs(ad - 1.0) <= 1e-6
        return lo * (1 - 1e-9) <= ad <= hi * (1 + 1e-9)

    best_params = None
    best_rms = math.inf
    failed = 0
    for restart in range(int(restarts)):
        if restart == 0:
            x0 = np.array([1.0, 0.0, 0.0, 1.0]) + 0.01 * rng.standard_normal(4)
        else:
            while True:
                x0 = rng.normal(0.0, 1.0, 4)
                d = abs(x0[0] * x0[3] - x0[1] * x0[2])
                if 0.25 <= d <= 4.0:
                    break
        try:
            fit = least_squares(
                residuals, x0, method="trf", jac="3-point",
                xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=4000,
            )
        except Exception:
            failed += 1
            continue
        if not feasible(fit.x):
            failed += 1
            continue
        rms = float(np.sqrt(np.mean(fit.fun[: len(pts)] ** 2)))
        if rms < best_rms:
            best_rms = rms
            best_params = fit.x
        if stop_below is not None and best_rms < stop_below:
            break
    if best_params is None:
        # every restart failed; report the identity with an infinite residual
        best_params = np.array([1.0, 0.0, 0.0, 1.0])
        best_rms = math.inf
    a11, a12, a21, a22 = (float(v) for v in best_params)
    return EquivalenceSearchResult(
        best_matrix=((a11, a12), (a21, a22)),
        best_residual=best_rms,
        restarts=int(restarts),
        sample_count=int(sample_count),
        failed_restarts=failed,
    )
