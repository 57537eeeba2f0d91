"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timings.  Criterion 4 is marked as a strict expected failure: two
of its three prescribed energies lie above the separatrix energy 1/54 of
the cubic-perturbed oscillator, where no closed orbit (hence no period)
exists; the test still executes the criterion exactly as stated.
"""

import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from isoforge import (
    FamilySpec,
    Hamiltonian,
    HomogeneousPoly,
    IntegrationError,
    IntegratorConfig,
    ONE,
    TransportProblem,
    X,
    Y,
    ZERO,
    branch_catalog,
    build,
    compose,
    compose_map,
    degeneracy_witness,
    hamiltonian_of,
    invert_map,
    is_identity,
    isochrony_sweep,
    jacobian_det,
    linear_equivalence_search,
    measure_period,
    rigid_rotation_defect,
    section_start_point,
    solve_transport,
)
from conftest import (
    rand_fraction,
    rand_homogeneous,
    rand_qshear_spec,
    rand_squarefree_form,
    rand_triangular_spec,
)

SEED = 20260810
TWO_PI = 2.0 * math.pi


def _report(name: str, ok: bool, started: float, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    elapsed = time.perf_counter() - started
    print(f"\n[criterion {name}] {status} ({elapsed:.1f}s) {detail}")


@pytest.fixture(scope="module")
def spec_pool():
    """The shared 200 + 200 random specs used by criteria 1 and 2."""
    rng = random.Random(SEED)
    triangular = [rand_triangular_spec(rng) for _ in range(200)]  # k in [2, 6]
    qshear = [rand_qshear_spec(rng) for _ in range(200)]  # m in [2, 5]
    return triangular + qshear


def test_criterion_1_unit_jacobians(spec_pool):
    started = time.perf_counter()
    for spec in spec_pool:
        det = jacobian_det(build(spec))
        assert det == ONE, f"det != 1 for {spec.to_json_dict()}"
    _report("1 symbolic-identities", True, started, "400/400 dets equal 1 exactly")


def test_criterion_2_inverse_round_trips(spec_pool):
    started = time.perf_counter()
    for spec in spec_pool:
        f = build(spec)
        g = invert_map(f, spec, verify=False)
        assert is_identity(compose_map(g, f)), f"g o f != id for {spec.to_json_dict()}"
        assert is_identity(compose_map(f, g)), f"f o g != id for {spec.to_json_dict()}"
    _report("2 inverse-round-trips", True, started, "400/400 exact identities both ways")


ISOCHRONY_CASES = [
    ("triangular k=2", FamilySpec.triangular(2, [1], 0)),
    ("triangular k=3", FamilySpec.triangular(3, [Fraction(1, 2), Fraction(-1, 3)], 2)),
    ("qshear m=2", FamilySpec.qshear(2, 1, [1, 1], 0)),
]
ISOCHRONY_ENERGIES = (1e-4, 1e-2, 1.0, 1e2)
# Accuracy-contract ladder: the default contract first; the qshear member's
# orbit at E = 100 reaches |y| ~ 5e4, where float64 cannot hold the energy
# drift under the default contract's budget, so that one run is accepted at
# a looser (still four decades inside the criterion) contract.
CONFIG_LADDER = (
    IntegratorConfig(),
    IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13),
    IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12),
)


def test_criterion_3_isochrony_desk_scale():
    started = time.perf_counter()
    details = []
    worst = 0.0
    for name, spec in ISOCHRONY_CASES:
        f = build(spec)
        h = hamiltonian_of(f)
        g = invert_map(f, spec, verify=False)
        periods = []
        for energy in ISOCHRONY_ENERGIES:
            start = section_start_point(h, energy, g)
            report = None
            for cfg in CONFIG_LADDER:
                try:
                    report = measure_period(h, start, cfg)
                    break
                except IntegrationError:
                    continue
            assert report is not None, f"{name} E={energy:g}: no config accepted the run"
            rel = abs(report.period - TWO_PI) / TWO_PI
            worst = max(worst, rel)
            periods.append(report.period)
            assert rel <= 1e-7, f"{name} E={energy:g}: relative error {rel:.3e}"
            if cfg is not CONFIG_LADDER[0]:
                details.append(f"{name} E={energy:g} at rel_tol={cfg.rel_tol:g}")
        spread = max(periods) - min(periods)
        assert spread <= 1e-7 * TWO_PI, f"{name}: period spread {spread:.3e}"
    note = f"worst rel dev {worst:.2e}" + (
        f"; loosened contract: {', '.join(details)}" if details else ""
    )
    _report("3 isochrony", True, started, note)


@pytest.mark.xfail(
    strict=True,
    reason=(
        "criterion defect: E = 0.05 and 0.1 exceed the separatrix energy "
        "1/54 of H = (x^2+y^2)/2 + x^3, so those orbits are unbounded and "
        "have no period; the integrator (the criterion's own oracle) "
        "reports escape"
    ),
)
def test_criterion_4_negative_control():
    started = time.perf_counter()
    h = Hamiltonian((X**2 + Y**2) * Fraction(1, 2) + X**3)
    periods = []
    failures = []
    for energy in (0.01, 0.05, 0.1):
        try:
            periods.append(isochrony_sweep(h, [energy])[0].period)
        except IntegrationError as exc:
            failures.append(f"E={energy:g}: {str(exc).split(';')[0]}")
    if failures:
        _report("4 negative-control", False, started, "; ".join(failures))
        pytest.fail(
            "criterion not evaluable as stated: " + "; ".join(failures)
        )
    spread = max(periods) - min(periods)
    ok = spread > 1e-3
    _report("4 negative-control", ok, started, f"max-min period {spread:.3e}")
    assert ok


def test_criterion_4_supplement_energy_dependence_below_separatrix():
    """Supplementary (not the stated criterion): the negative control's
    periods do vary by far more than 1e-3 across energies that admit
    closed orbits, and differ from 2*pi grossly."""
    started = time.perf_counter()
    h = Hamiltonian((X**2 + Y**2) * Fraction(1, 2) + X**3)
    reports = isochrony_sweep(h, [0.005, 0.01, 0.017])
    periods = [r.period for r in reports]
    spread = max(periods) - min(periods)
    ok = spread > 1e-3 and all(abs(T - TWO_PI) > 1e-3 for T in periods)
    _report(
        "4s negative-control-supplement", ok, started,
        f"periods {['%.4f' % T for T in periods]}, spread {spread:.3f}",
    )
    assert ok


def test_criterion_5_branch_catalog():
    started = time.perf_counter()
    entries = branch_catalog(19)
    by_n = {e.n: e for e in entries}
    assert sorted(by_n) == [3, 5, 7, 9, 11, 13, 15, 17, 19]
    q_present = {n for n, e in by_n.items() if e.qshear_available}
    assert q_present == {7, 11, 15, 19}
    for n, e in by_n.items():
        assert e.triangular_available and e.triangular_k == (n + 1) // 2
        if e.qshear_available:
            assert e.qshear_m == (n + 1) // 4
        else:
            assert e.qshear_m is None
    _report("5 branch-catalog", True, started, "Q branch exactly at {7, 11, 15, 19}")


def test_criterion_6_transport_solver():
    started = time.perf_counter()
    rng = random.Random(SEED + 6)
    for _ in range(100):
        degree = rng.randint(0, 8)
        h = rand_homogeneous(rng, degree)
        beta = rand_fraction(rng)
        p = solve_transport(TransportProblem(beta, h))
        residual = p.poly.partial("x") + beta * p.poly.partial("y") - h.poly
        assert residual == ZERO
        assert all(i > 0 for (i, _) in p.poly.terms), "p(0, y) must vanish"
        assert p.degree == degree + 1
    _report("6 transport-solver", True, started, "100/100 exactly zero residuals")


def test_criterion_7_degeneracy_witness():
    started = time.perf_counter()
    rng = random.Random(SEED + 7)
    for _ in range(50):
        r = rand_squarefree_form(rng, rng.randint(1, 3))
        a, b = rng.randint(1, 4), rng.randint(1, 4)
        c_p = rand_fraction(rng, nonzero=True)
        c_q = rand_fraction(rng, nonzero=True)
        p = HomogeneousPoly(c_p * r.poly**a, r.degree * a)
        q = HomogeneousPoly(c_q * r.poly**b, r.degree * b)
        w = degeneracy_witness(p, q)
        assert w is not None
        assert w.r.poly == r.poly  # the generator is already normalized
        assert (w.m_prime, w.n_prime, w.c_p, w.c_q) == (a, b, c_p, c_q)
        rp, rq = w.reconstruct()
        assert rp == p.poly and rq == q.poly
    independent = 0
    while independent < 50:
        p = rand_homogeneous(rng, rng.randint(1, 5))
        q = rand_homogeneous(rng, rng.randint(1, 5))
        det = (
            p.poly.partial("x") * q.poly.partial("y")
            - p.poly.partial("y") * q.poly.partial("x")
        )
        if det.is_zero():
            continue
        assert degeneracy_witness(p, q) is None
        independent += 1
    _report("7 degeneracy-witness", True, started,
            "50/50 reconstructed exactly; 50/50 independent pairs rejected")


def _random_planted_matrix(rng: random.Random):
    while True:
        entries = [Fraction(rng.randint(-4, 4), rng.randint(1, 2)) for _ in range(4)]
        det = entries[0] * entries[3] - entries[1] * entries[2]
        if Fraction(2, 5) <= abs(det) <= Fraction(5, 2):
            return (entries[0], entries[1]), (entries[2], entries[3])


def test_criterion_8_equivalence_search_calibration():
    started = time.perf_counter()
    rng = random.Random(SEED + 8)
    successes = 0
    worst_success = 0.0
    for trial in range(100):
        spec = rand_triangular_spec(rng, k_max=3) if trial % 2 else rand_qshear_spec(rng, m_max=2)
        h_a = hamiltonian_of(build(spec))
        planted = _random_planted_matrix(rng)
        h_b = Hamiltonian(
            compose(
                h_a.poly,
                planted[0][0] * X + planted[0][1] * Y,
                planted[1][0] * X + planted[1][1] * Y,
            )
        )
        result = linear_equivalence_search(
            h_a, h_b, sample_box=1.0, restarts=8, sample_count=150,
            seed=1000 + trial, stop_below=1e-10,
        )
        if result.best_residual < 1e-8:
            successes += 1
            worst_success = max(worst_success, result.best_residual)
    assert successes >= 95, f"only {successes}/100 planted instances recovered"

    h_tri = hamiltonian_of(build(FamilySpec.triangular(4, [0, 0, 1], 0)))
    h_q = hamiltonian_of(build(FamilySpec.qshear(2, 1, [1, 1], 0)))
    floor = linear_equivalence_search(
        h_tri, h_q, sample_box=1.0, restarts=20, sample_count=200, seed=SEED,
    )
    threshold = 1e3 * max(worst_success, 1e-15)
    ok = floor.best_residual > threshold
    _report(
        "8 equivalence-calibration", ok, started,
        f"planted {successes}/100 (worst residual {worst_success:.1e}); "
        f"degree-7 floor {floor.best_residual:.3e} > {threshold:.1e}",
    )
    assert ok


def test_criterion_9_rigid_rotation_invariant():
    started = time.perf_counter()
    cfg = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12)
    worst = 0.0
    for name, spec in ISOCHRONY_CASES:
        f = build(spec)
        h = hamiltonian_of(f)
        g = invert_map(f, spec, verify=False)
        start = section_start_point(h, 1.0, g)
        d1, d2 = rigid_rotation_defect(h, start, cfg)
        worst = max(worst, d1, d2)
        assert d1 < 1e-6, f"{name}: d(f1)/dt + f2 defect {d1:.3e}"
        assert d2 < 1e-6, f"{name}: d(f2)/dt - f1 defect {d2:.3e}"
    _report("9 rigid-rotation", True, started, f"max defect {worst:.2e} < 1e-6")
