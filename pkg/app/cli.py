#!/usr/bin/env python3
"""
Command-line front end: membership, gauge, automorphisms, geodesic sampling,
left inverses, lifting, pair bounds and the verification suites.

Complex numbers are written 're,im' or as bare reals. Arguments starting with
a minus sign and containing a comma must follow a '--' separator:

    python -m app.cli member --domain tetrablock -- -0.5,0.1 0 0
"""
from typing import Dict, List, Optional, Tuple
import argparse
import json
import logging
import sys

import numpy as np
import pandas as pd

from app.api.schemas import dump_geodesic_spec, left_inverse_to_model, parse_geodesic_spec
from app.config import LOG_LEVEL, default_seed, resolve_tolerances
from app.exceptions import ConfigError, ParameterError, TetraError
from app.services.domains import MEMBERSHIP_DOMAINS, check_membership, rho, tetrablock_margin
from app.services.geodesic_factory import evaluate_geodesic, geodesic_disc
from app.services.left_inverse import LeftInverse, build_left_inverse, verify_left_inverse
from app.services.lifting import lift_avoiding_T, lift_through_T_origin
from app.services.transforms import TetraAutParams, aut_tetrablock, aut_tetrablock_inverse
from app.services.verification_pipeline import SUITES, VerificationPipeline
from app.services.verification_service import find_nonconvexity_witness, pair_sandwich
from app.utils.formatting import atomic_write, parse_complex, parse_complex_list, to_jsonable

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
GOLDEN = (np.sqrt(5) - 1) / 2
LEFT_INVERSE_LIMIT = 1e-8


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Master seed (default: TETRA_SEED or 0).")
    common.add_argument("--samples", type=int, default=None, help="Sample count for the command.")
    common.add_argument("--format", choices=["json", "csv"], default="json", help="Output format.")
    common.add_argument("--out", type=str, default=None, help="Write output to this path (atomically).")
    common.add_argument("--workers", type=int, default=1, help="Worker processes for suites.")
    common.add_argument("--no-progress", action="store_true", help="Disable the progress bar.")
    common.add_argument("--archive", action="store_true", help="Archive suite runs in the database.")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    p = argparse.ArgumentParser(
        prog="tetra",
        description="Tetrablock Lempert machinery. Tolerances: --tol.NAME=VALUE.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    member = sub.add_parser("member", parents=[common], help="Membership verdict and margin.")
    member.add_argument("--domain", choices=MEMBERSHIP_DOMAINS, default="tetrablock")
    member.add_argument("values", nargs="+", help="Coordinates (3), (s, p) or 4 matrix entries row-major.")

    gauge = sub.add_parser("rho", parents=[common], help="Gauge rho of a point of C^3.")
    gauge.add_argument("values", nargs=3)

    aut = sub.add_parser("aut", parents=[common], help="Apply a tetrablock automorphism.")
    aut.add_argument("values", nargs=3)
    aut.add_argument("--a1", type=str, default="0")
    aut.add_argument("--a2", type=str, default="0")
    aut.add_argument("--theta", type=float, default=0.0)
    aut.add_argument("--eta", type=float, default=0.0)
    aut.add_argument("--swap", action="store_true")
    aut.add_argument("--inverse", action="store_true")

    for name, text in (
        ("geodesic", "Sample a geodesic on a golden-angle spiral."),
        ("leftinv", "Construct and certify a left inverse."),
        ("lift", "Lift a geodesic through pi."),
    ):
        cmd = sub.add_parser(name, parents=[common], help=text)
        cmd.add_argument("--spec", required=True, help="GeodesicSpec JSON, or @path to a JSON file.")
        if name == "lift":
            cmd.add_argument("--branch", type=int, choices=[1, -1], default=1)
            cmd.add_argument("--n", type=int, default=None)
            cmd.add_argument("--m", type=int, default=None)

    verify = sub.add_parser("verify", parents=[common], help="Run a verification suite.")
    verify.add_argument("--suite", required=True)
    verify.add_argument("--n", type=int, default=20, help="Number of tasks.")
    verify.add_argument("--budget", type=int, default=100_000, help="Witness search budget per task.")

    witness = sub.add_parser("witness", parents=[common], help="Search for a non-convexity witness.")
    witness.add_argument("--budget", type=int, default=1_000_000)
    witness.add_argument("--domain", choices=["tetrablock", "polydisc"], default="tetrablock")

    sandwich = sub.add_parser("sandwich", parents=[common], help="Caratheodory and lifted upper bounds for a pair.")
    sandwich.add_argument("values", nargs=6, help="w1 w2 w3 z1 z2 z3")
    return p


def parse_args(argv: Optional[List[str]] = None) -> Tuple[argparse.Namespace, Dict[str, float]]:
    """Parse argv; leftover --tol.NAME=VALUE options become tolerance overrides"""
    args, extra = build_parser().parse_known_args(argv)
    overrides: Dict[str, float] = {}
    for item in extra:
        if not item.startswith("--tol.") or "=" not in item:
            raise ConfigError(f"Unrecognized argument: {item}")
        name, _, value = item[len("--tol."):].partition("=")
        try:
            overrides[name] = float(value)
        except ValueError as e:
            raise ConfigError(f"Tolerance {name} is not a number: {value!r}") from e
    resolve_tolerances(overrides)
    return args, overrides


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _emit_json(payload, out: Optional[str]) -> None:
    _emit(json.dumps(to_jsonable(payload), sort_keys=True) + "\n", out)


def _load_spec(text: str):
    if text.startswith("@"):
        with open(text[1:], "r") as f:
            text = f.read()
    return parse_geodesic_spec(text)


def spiral_samples(n: int, radius: float = 0.95) -> np.ndarray:
    """lam_k = radius (k / n) e^{2 pi i k g}, g the golden ratio conjugate; lam_0 = 0"""
    k = np.arange(n)
    return radius * (k / n) * np.exp(2j * np.pi * k * GOLDEN)


def cmd_member(args, tolerances) -> int:
    """Membership verdict and margin; exit 1 when the point is outside"""
    report = check_membership(args.domain, parse_complex_list(args.values))
    _emit_json({"domain": args.domain, "inside": report.inside, "margin": report.margin,
                "boundary": report.boundary}, args.out)
    return EXIT_OK if report.inside else EXIT_FAIL


def cmd_rho(args, tolerances) -> int:
    """Gauge of a point of C^3"""
    _emit_json({"rho": float(rho(parse_complex_list(args.values)))}, args.out)
    return EXIT_OK


def cmd_aut(args, tolerances) -> int:
    """Image of a point under an automorphism or its inverse"""
    params = TetraAutParams(parse_complex(args.a1), parse_complex(args.a2), args.theta, args.eta, args.swap)
    transform = aut_tetrablock_inverse if args.inverse else aut_tetrablock
    _emit_json({"point": list(transform(params, parse_complex_list(args.values)))}, args.out)
    return EXIT_OK


def cmd_geodesic(args, tolerances) -> int:
    """Spiral samples of a geodesic with their membership margins"""
    spec = _load_spec(args.spec)
    lam = spiral_samples(args.samples or 16)
    values = evaluate_geodesic(spec, lam)
    margins = np.atleast_1d(tetrablock_margin(values))
    rows = []
    for k, (l, v, m) in enumerate(zip(lam, values, margins)):
        row = {"k": k, "lam_re": l.real, "lam_im": l.imag}
        for j in range(3):
            row[f"f{j + 1}_re"] = v[j].real
            row[f"f{j + 1}_im"] = v[j].imag
        row["margin"] = float(m)
        rows.append(row)
    if args.format == "csv":
        _emit(pd.DataFrame(rows).to_csv(index=False, float_format="%.17g"), args.out)
    else:
        _emit("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows), args.out)
    return EXIT_OK if np.all(margins > 0) else EXIT_FAIL


def cmd_leftinv(args, tolerances) -> int:
    """Build a left inverse and report its residual on Halton samples"""
    spec = _load_spec(args.spec)
    li_spec = build_left_inverse(spec)
    samples = args.samples or 64
    residual = verify_left_inverse(
        lambda lam: evaluate_geodesic(spec, lam), LeftInverse(li_spec, tolerances["tol_fix"]), n_samples=samples
    )
    _emit_json({
        "spec": dump_geodesic_spec(spec),
        "left_inverse": left_inverse_to_model(li_spec).model_dump(mode="json"),
        "residual": residual,
        "samples": samples,
    }, args.out)
    return EXIT_OK if residual <= LEFT_INVERSE_LIMIT else EXIT_FAIL


def cmd_lift(args, tolerances) -> int:
    """Certificate of a matrix lift; --n or --m selects the through-origin lift"""
    f = geodesic_disc(_load_spec(args.spec))
    samples = args.samples or 256
    if args.n is not None or args.m is not None:
        result = lift_through_T_origin(f, args.n, args.m, n_samples=samples)
    else:
        result = lift_avoiding_T(f, branch=args.branch, n_samples=samples)
    _emit_json(result.certificate(), args.out)
    return EXIT_OK


def cmd_verify(args, tolerances) -> int:
    """Run a suite; JSON lines on stdout or a report file plus summary with --out"""
    if args.suite not in SUITES:
        print(f"Unknown suite {args.suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_USAGE
    seed = default_seed() if args.seed is None else args.seed
    pipeline = VerificationPipeline(
        seed, tolerances, workers=args.workers, progress=not args.no_progress,
        samples=args.samples or 512, budget=args.budget,
    )
    report = pipeline.run_suite(args.suite, args.n)
    if args.out:
        pipeline.save_reports(report, args.out, args.format)
        pipeline.print_summary(report)
    else:
        records = to_jsonable(report["reports"])
        if args.format == "csv":
            _emit(pd.json_normalize(records).to_csv(index=False, float_format="%.17g"), None)
        else:
            _emit("".join(json.dumps(r, sort_keys=True) + "\n" for r in records), None)
    if args.archive:
        from app.database.database import SessionLocal, create_tables

        create_tables()
        db = SessionLocal()
        try:
            pipeline.archive_run(report, db)
        finally:
            db.close()
    return EXIT_OK if pipeline.all_passed(report) else EXIT_FAIL


def cmd_witness(args, tolerances) -> int:
    """Randomized search for a pair whose midpoint leaves the domain"""
    seed = default_seed() if args.seed is None else args.seed
    report = find_nonconvexity_witness(seed, args.budget, domain=args.domain)
    _emit_json(report.to_dict(), args.out)
    return EXIT_OK if report.found else EXIT_FAIL


def cmd_sandwich(args, tolerances) -> int:
    """Bounds [lower, upper] for an arbitrary pair; no pass/fail verdict"""
    values = parse_complex_list(args.values)
    sandwich = pair_sandwich(values[:3], values[3:])
    _emit_json({"w": list(values[:3]), "z": list(values[3:]), **sandwich.to_dict()}, args.out)
    return EXIT_OK


COMMANDS = {
    "member": cmd_member,
    "rho": cmd_rho,
    "aut": cmd_aut,
    "geodesic": cmd_geodesic,
    "leftinv": cmd_leftinv,
    "lift": cmd_lift,
    "verify": cmd_verify,
    "witness": cmd_witness,
    "sandwich": cmd_sandwich,
}


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    try:
        args, overrides = parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        return COMMANDS[args.command](args, resolve_tolerances(overrides))
    except (ParameterError, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except TetraError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAIL
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
