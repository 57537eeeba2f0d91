"""Batch command-line front door (installed as ``forge``).

JSON in, JSON or CSV out, no interactive mode.  Exit codes:
0 = all checks pass, 1 = identity/verification failure, 2 = input error,
3 = numeric failure.  Outputs are byte-identical across repeated runs with
the same inputs and seed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from .families import (
    FamilySpec,
    PolyMap,
    SpecValidationError,
    branch_catalog,
    build,
    hamiltonian_of,
    invert_map,
    is_identity,
    compose_map,
    system_degree,
)
from .numeric import (
    DEFAULT_CONFIG,
    IntegratorConfig,
    IntegrationError,
    PeriodReport,
    linear_equivalence_search,
    measure_period,
    section_start_point,
)
from .poly import HomogeneousPoly, parse_poly
from .symbolic import (
    WitnessFieldError,
    check_unit_jacobian,
    degeneracy_witness,
    jacobian_det,
    qshear_cancellation_trace,
    solve_transport,
    TransportProblem,
)

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3

TWO_PI = 2.0 * math.pi


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class RunManifest:
    command: str
    spec_path: Path | None
    output_path: Path | None
    integrator: IntegratorConfig
    seed: int
    n_max: int | None = None
    energies: tuple[float, ...] | None = None


def _load_json(path: Path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"spec file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc


def _write_json(path: Path | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _write_text(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _family_from_file(path: Path) -> FamilySpec:
    data = _load_json(path)
    try:
        return FamilySpec.from_json_dict(data)
    except SpecValidationError as exc:
        raise InputError(str(exc)) from exc


def cmd_gen(manifest: RunManifest) -> int:
    spec = _family_from_file(manifest.spec_path)
    f = build(spec)
    h = hamiltonian_of(f)
    payload = spec.to_json_dict()
    payload.update(
        {
            "f1": f.f1.to_string(),
            "f2": f.f2.to_string(),
            "H": h.poly.to_string(),
            "deg_f": int(f.degree()),
            "deg_H": int(h.poly.degree),
            "n": system_degree(h),
        }
    )
    _write_json(manifest.output_path, payload)
    return EXIT_OK


def _map_from_data(data: dict) -> PolyMap:
    try:
        f1 = parse_poly(data["f1"])
        f2 = parse_poly(data["f2"])
        return PolyMap(f1, f2)
    except (ValueError, KeyError) as exc:
        raise InputError(f"bad map serialization: {exc}") from exc


def cmd_verify(manifest: RunManifest) -> int:
    data = _load_json(manifest.spec_path)
    checks: list[dict] = []
    if isinstance(data, dict) and "branch" in data:
        try:
            spec = FamilySpec.from_json_dict(data)
        except SpecValidationError as exc:
            raise InputError(str(exc)) from exc
        f = build(spec)
        det = jacobian_det(f)
        checks.append(
            {
                "check": "unit_jacobian",
                "pass": check_unit_jacobian(f),
                "det": det.to_string(),
            }
        )
        g = invert_map(f, spec, verify=False)
        gf_ok = is_identity(compose_map(g, f))
        fg_ok = is_identity(compose_map(f, g))
        checks.append({"check": "inverse_round_trip", "pass": gf_ok and fg_ok})
        if spec.branch == "qshear":
            trace = qshear_cancellation_trace(spec)
            checks.append(
                {
                    "check": "qshear_cancellation",
                    "pass": trace.is_unit(),
                    "trace": trace.to_json_dict(),
                }
            )
    elif isinstance(data, dict) and "f1" in data and "f2" in data:
        f = _map_from_data(data)
        det = jacobian_det(f)
        checks.append(
            {
                "check": "unit_jacobian",
                "pass": check_unit_jacobian(f),
                "det": det.to_string(),
            }
        )
    else:
        raise InputError(
            "verify input must be a family spec (with 'branch') or a raw map "
            "(with 'f1' and 'f2')"
        )
    all_pass = all(c["pass"] for c in checks)
    _write_json(manifest.output_path, {"checks": checks, "all_pass": all_pass})
    if not all_pass:
        for c in checks:
            if not c["pass"]:
                detail = f" det = {c['det']}" if "det" in c else ""
                print(f"FAIL {c['check']}:{detail}", file=sys.stderr)
        return EXIT_VERIFICATION
    return EXIT_OK


def cmd_period(manifest: RunManifest) -> int:
    if not manifest.energies:
        raise InputError("period command requires --energies E1,E2,...")
    energies = list(manifest.energies)
    if any(e <= 0 for e in energies) or sorted(energies) != energies:
        raise InputError("energies must be positive and ascending")
    spec = _family_from_file(manifest.spec_path)
    f = build(spec)
    h = hamiltonian_of(f)
    g = invert_map(f, spec, verify=False)
    rows = [PeriodReport.CSV_HEADER]
    failures = 0
    max_rel_dev = 0.0
    for e in energies:
        try:
            start = section_start_point(h, e, g)
            report = measure_period(h, start, manifest.integrator)
            rows.append(report.csv_row())
            max_rel_dev = max(max_rel_dev, abs(report.period - TWO_PI) / TWO_PI)
        except IntegrationError as exc:
            failures += 1
            rows.append(f"{e!r},nan,nan,nan,0")
            print(f"energy {e:g}: {exc}", file=sys.stderr)
    _write_text(manifest.output_path, "\n".join(rows) + "\n")
    print(f"max relative deviation from 2*pi: {max_rel_dev:.3e}")
    if failures:
        print(f"{failures} of {len(energies)} energies failed", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_catalog(manifest: RunManifest) -> int:
    if manifest.n_max is None:
        raise InputError("catalog command requires --n-max")
    try:
        entries = branch_catalog(manifest.n_max)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    rows = ["n,triangular_available,triangular_k,triangular_params,qshear_available,qshear_m,qshear_params"]
    for e in entries:
        qm = e.qshear_m if e.qshear_available else ""
        qp = e.qshear_param_count if e.qshear_available else ""
        rows.append(
            f"{e.n},{str(e.triangular_available).lower()},{e.triangular_k},"
            f"{e.triangular_param_count},{str(e.qshear_available).lower()},{qm},{qp}"
        )
    _write_text(manifest.output_path, "\n".join(rows) + "\n")
    return EXIT_OK


def cmd_equiv(manifest: RunManifest) -> int:
    data = _load_json(manifest.spec_path)
    if not isinstance(data, dict) or "a" not in data or "b" not in data:
        raise InputError("equiv input must carry family specs under keys 'a' and 'b'")
    try:
        spec_a = FamilySpec.from_json_dict(data["a"])
        spec_b = FamilySpec.from_json_dict(data["b"])
    except SpecValidationError as exc:
        raise InputError(str(exc)) from exc
    allowed = {"a", "b", "sample_box", "restarts", "sample_count", "unimodular"}
    unknown = set(data) - allowed
    if unknown:
        raise InputError(f"unknown keys {sorted(unknown)} in equiv input")
    h_a = hamiltonian_of(build(spec_a))
    h_b = hamiltonian_of(build(spec_b))
    result = linear_equivalence_search(
        h_a,
        h_b,
        sample_box=float(data.get("sample_box", 1.0)),
        restarts=int(data.get("restarts", 20)),
        sample_count=int(data.get("sample_count", 200)),
        seed=manifest.seed,
        unimodular=bool(data.get("unimodular", False)),
    )
    _write_json(manifest.output_path, result.to_json_dict())
    return EXIT_OK


def cmd_lemma(manifest: RunManifest) -> int:
    data = _load_json(manifest.spec_path)
    if not isinstance(data, dict):
        raise InputError("lemma input must be a JSON object")
    if set(data) == {"p", "q"}:
        try:
            p = HomogeneousPoly.from_poly(parse_poly(data["p"]))
            q = HomogeneousPoly.from_poly(parse_poly(data["q"]))
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        try:
            witness = degeneracy_witness(p, q)
        except WitnessFieldError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_VERIFICATION
        payload = {"kind": "degeneracy", "witness": None}
        if witness is not None:
            payload["witness"] = {
                "r": witness.r.to_string(),
                "c_p": str(witness.c_p),
                "c_q": str(witness.c_q),
                "m_prime": witness.m_prime,
                "n_prime": witness.n_prime,
            }
        _write_json(manifest.output_path, payload)
        return EXIT_OK
    if set(data) == {"beta", "h"}:
        try:
            from fractions import Fraction

            beta = Fraction(data["beta"])
            h_poly = parse_poly(data["h"])
            h = HomogeneousPoly.from_poly(h_poly) if not h_poly.is_zero() else HomogeneousPoly(h_poly, 0)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(str(exc)) from exc
        solution = solve_transport(TransportProblem(beta=beta, h=h))
        _write_json(
            manifest.output_path,
            {
                "kind": "transport",
                "solution": solution.to_string(),
                "degree": solution.degree,
            },
        )
        return EXIT_OK
    raise InputError(
        "lemma input must have exactly keys {'p', 'q'} (degeneracy witness) "
        "or {'beta', 'h'} (transport problem)"
    )


_COMMANDS = {
    "gen": cmd_gen,
    "verify": cmd_verify,
    "period": cmd_period,
    "catalog": cmd_catalog,
    "equiv": cmd_equiv,
    "lemma": cmd_lemma,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forge",
        description="Build and verify trivial isochronous centers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("gen", "expand a family spec into f1, f2, H"),
        ("verify", "run the exact identity checks on a spec or raw map"),
        ("period", "measure orbit periods over an energy grid (CSV)"),
        ("catalog", "tabulate branch availability per odd degree (CSV)"),
        ("equiv", "multi-start linear-equivalence evidence search"),
        ("lemma", "degeneracy witness or transport-equation solver"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--spec", type=Path, default=None, help="input JSON path")
        p.add_argument("--out", type=Path, default=None, help="output path (stdout if omitted)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--n-max", type=int, default=None, dest="n_max")
        p.add_argument("--energies", type=str, default=None)
        p.add_argument("--rel-tol", type=float, default=DEFAULT_CONFIG.rel_tol, dest="rel_tol")
        p.add_argument("--abs-tol", type=float, default=DEFAULT_CONFIG.abs_tol, dest="abs_tol")
    return parser


def _manifest_from_args(args) -> RunManifest:
    energies = None
    if args.energies is not None:
        try:
            energies = tuple(float(tok) for tok in args.energies.split(",") if tok)
        except ValueError as exc:
            raise InputError(f"bad --energies list: {exc}") from exc
    try:
        integrator = IntegratorConfig(rel_tol=args.rel_tol, abs_tol=args.abs_tol)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.command in ("gen", "verify", "period", "equiv", "lemma") and args.spec is None:
        raise InputError(f"{args.command} requires --spec")
    return RunManifest(
        command=args.command,
        spec_path=args.spec,
        output_path=args.out,
        integrator=integrator,
        seed=args.seed,
        n_max=args.n_max,
        energies=energies,
    )


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        manifest = _manifest_from_args(args)
        return _COMMANDS[manifest.command](manifest)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except IntegrationError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
