"""Command line: classify, integrate, verify-example, scan.

Exit codes: 0 all checks pass, 1 a verification failed, 2 usage or schema error.
"""
import argparse
import csv
import json
import math
import sys

import numpy as np

from . import pipelines as PL
from .errors import (DomainError, PkeLabError, SchemaError, SeedExhaustionError, SingularStateError,
                     UndefinedPatternError)
from .quartic_weyl import (DEFAULT_EPS, QuarticCoefficients, classify_by_roots, classify_real, invariants,
                           weyl_from_theta)
from .symmetry_cases.keyfunc import base_point, local_key_function
from .symmetry_cases.params import ModelParams, normalize_tag, parse_case_document, validate
from .symmetry_cases.seeds import DEFAULT_BOXES, seed_to_state

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CLASSIFY_KEYS = ("I", "J", "D", "P", "R", "tag", "margin", "oracle_pattern")
POINT_COLUMNS = ("q", "p", "x", "w", "max_traceless_ricci", "scalar_defect", "K1", "K2", "K3", "warning")


class UsageError(Exception):
    pass


# argument parsing -----------------------------------------------------------------

def _floats(text, n=None, name="value"):
    try:
        vals = [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{name} must be comma-separated reals, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"{name} needs {n} values, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{name} must be finite")
    return vals


def _mapping(text, name):
    """'a=1,b=2' or a JSON object."""
    text = text.strip()
    if text.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{name} is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError(f"{name} must be an object")
        return {k: float(v) for k, v in doc.items()}
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise UsageError(f"{name} entries must look like key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = _floats(v, 1, f"{name}.{k.strip()}")[0]
    return out


def _box(text):
    """'F=-1:1,w=-1:1'."""
    out = {}
    for part in text.split(","):
        try:
            k, rng = part.split("=", 1)
            lo, hi = (float(v) for v in rng.split(":"))
        except ValueError:
            raise UsageError(f"box entries must look like name=lo:hi, got {part!r}") from None
        out[k.strip()] = (lo, hi)
    return out


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--case", help="algebra tag (a32, a33, a34, a35, a35half, a36, a37) or 'example'")
    common.add_argument("--doc", help="case document: JSON text or a path to a JSON file")
    common.add_argument("--lambda", dest="lam", default="1.0", help="cosmological constant (lists allowed in scan)")
    common.add_argument("--z0", type=float, help="example constant z0")
    common.add_argument("--m0", help="A35 exponent m0 (lists allowed in scan)")
    common.add_argument("--alpha0", help="A37 constant alpha0 (lists allowed in scan)")
    common.add_argument("--zeta0", default="0", help="A35Half constant zeta0 (lists allowed in scan)")
    common.add_argument("--F0", type=float, help="A33 constant F0")
    common.add_argument("--G0", type=float, default=0.0, help="A33 constant G0")
    common.add_argument("--seed", default=None, help="'auto', key=value pairs or a JSON object; an integer RNG seed for verify-example")
    common.add_argument("--span", help="lo,hi of the independent variable")
    common.add_argument("--tol", type=float, help="tolerance override for the command's main check")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="output path (default: stdout)")

    p = argparse.ArgumentParser(prog="pke-lab", description="Para-Kaehler Einstein toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common], help="classify a Weyl quartic")
    c.add_argument("--coeffs", help="c5,c4,c3,c2,c1")
    c.add_argument("--eps", type=float, default=DEFAULT_EPS)

    i = sub.add_parser("integrate", parents=[common], help="integrate a reduced equation")
    i.add_argument("--samples", type=int, default=60)
    i.add_argument("--d-tol", type=float, default=PL.DEFAULT_D_TOL)

    v = sub.add_parser("verify-example", parents=[common], help="verify the explicit example")
    v.add_argument("--samples", type=int, default=100)
    v.add_argument("--type-samples", type=int, default=300)
    v.add_argument("--strict-landmarks", action="store_true",
                   help="require 1e-3 relative agreement without allowing for printed rounding")

    s = sub.add_parser("scan", parents=[common], help="scan seeds or parameters")
    s.add_argument("--grid", type=int, default=21)
    s.add_argument("--box", help="name=lo:hi,... for case scans")
    s.add_argument("--x", type=float, default=1.0, help="x coordinate for example scans")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--eps", type=float, default=DEFAULT_EPS)
    return p


# parameter handling ---------------------------------------------------------------

def _opt(text):
    return None if text is None else _floats(text, 1)[0]


def params_from_args(args):
    return ModelParams(lam=_floats(args.lam, 1, "--lambda")[0], m0=_opt(args.m0), alpha0=_opt(args.alpha0),
                       zeta0=_floats(args.zeta0, 1, "--zeta0")[0], z0=args.z0, F0=args.F0, G0=args.G0)


def _load_doc(text):
    if text.strip().startswith("{"):
        return parse_case_document(text)
    try:
        with open(text) as fh:
            return parse_case_document(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read case document {text!r}: {exc}") from None


def case_and_params(args):
    """(tag, params, seed, span) from --doc or the individual flags."""
    if args.doc:
        doc = _load_doc(args.doc)
        return doc.tag, doc.params, doc.seed, doc.span
    if not args.case:
        raise UsageError("--case or --doc is required")
    params = params_from_args(args)
    tag = validate(args.case, params)
    seed = "auto" if args.seed in (None, "auto") else _mapping(args.seed, "--seed")
    span = tuple(_floats(args.span, 2, "--span")) if args.span else None
    return tag, params, seed, span


# output -------------------------------------------------------------------------------

def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def write_json(obj, path=None):
    text = json.dumps(PL.clean(obj), indent=2, sort_keys=False)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def write_csv(rows, columns, path=None):
    fh = _open_out(path)
    try:
        w = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(r.get(k)) for k in columns})
    finally:
        if path:
            fh.close()


def _cell(v):
    if isinstance(v, dict):
        return json.dumps(PL.clean(v), sort_keys=True)
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


# commands -------------------------------------------------------------------------

def oracle_pattern(q):
    try:
        rp = classify_by_roots(q)
    except UndefinedPatternError:
        return "undefined"
    return f"{rp.tag}[{','.join(str(m) for m in rp.signature)}]"


def classification_record(q, eps=DEFAULT_EPS):
    inv = invariants(q)
    pt = classify_real(inv, eps)
    return {"I": inv.I, "J": inv.J, "D": inv.D, "P": inv.P, "R": inv.R, "tag": pt.tag,
            "margin": pt.margin, "oracle_pattern": oracle_pattern(q)}


def cmd_classify(args):
    if args.coeffs:
        q = QuarticCoefficients.from_sequence(_floats(args.coeffs, 5, "--coeffs"))
        rec = classification_record(q, args.eps)
    else:
        tag, params, seed, _ = case_and_params(args)
        if seed == "auto":
            raise UsageError("classify from a case needs an explicit --seed point")
        if tag == "A33":
            raise UsageError("A33 has no seed variables; its discriminant vanishes identically")
        t0, state = seed_to_state(tag, params, seed)
        field_ = local_key_function(tag, params, t0, state)
        x, y = base_point(tag, params, t0)
        ft = field_.classify(x, y, args.eps)
        inv = ft.invariants
        # invariants from the better conditioned frame; the oracle's root pattern is frame independent
        rec = {"I": inv.I, "J": inv.J, "D": inv.D, "P": inv.P, "R": inv.R, "tag": ft.tag,
               "margin": ft.petrov.margin, "oracle_pattern": oracle_pattern(weyl_from_theta(field_.jet(x, y)))}
    if args.format == "csv":
        write_csv([rec], CLASSIFY_KEYS, args.out)
    else:
        write_json({k: rec[k] for k in CLASSIFY_KEYS}, args.out)
    return EXIT_OK


def cmd_integrate(args):
    tag, params, seed, span = case_and_params(args)
    tol = args.tol if args.tol is not None else PL.DEFAULT_RESIDUAL_TOL
    try:
        res = PL.integrate_case(tag, params, seed, span, samples=args.samples, tol=tol, d_tol=args.d_tol)
    except (SeedExhaustionError, SingularStateError, DomainError) as exc:
        failure = {"case": tag, "params": params.as_dict(), "seed": seed, "ok": False,
                   "failure": {"type": type(exc).__name__, "message": str(exc),
                               "best_normalized_D": getattr(exc, "best", None)}}
        write_json(failure)
        return EXIT_FAIL
    if args.out:
        if args.format == "csv":
            write_csv(res.rows, PL.TRAJECTORY_COLUMNS, args.out)
        else:
            write_json(res.rows, args.out)
    write_json(res.summary())
    return EXIT_OK if res.ok else EXIT_FAIL


def cmd_verify_example(args):
    params = params_from_args(args)
    if params.z0 is None:
        raise UsageError("verify-example needs --z0")
    if params.z0 == 0 or params.lam == 0:
        raise SchemaError("verify-example needs nonzero --lambda and --z0")
    try:
        rng_seed = 0 if args.seed in (None, "auto") else int(args.seed)
    except ValueError:
        raise UsageError("--seed for verify-example is an integer RNG seed") from None
    tol = args.tol if args.tol is not None else PL.DEFAULT_EINSTEIN_TOL
    rep = PL.verify_example(params, samples=args.samples, seed=rng_seed, tol=tol,
                            type_samples=args.type_samples, strict_landmarks=args.strict_landmarks)
    if args.format == "csv":
        rows = []
        for r in rep["einstein"]["points"]:
            q, p, x, w = r["point"]
            k = list(r["killing"].values())
            rows.append({"q": q, "p": p, "x": x, "w": w, "max_traceless_ricci": r["max_traceless_ricci"],
                         "scalar_defect": r["scalar_defect"], "K1": k[0], "K2": k[1], "K3": k[2],
                         "warning": r["warning"]})
        write_csv(rows, POINT_COLUMNS, args.out)
    else:
        write_json(rep, args.out)
    return EXIT_OK if rep["ok"] else EXIT_FAIL


def _list_opt(text):
    return [None] if text is None else _floats(text, None)


def cmd_scan(args):
    if not args.case:
        raise UsageError("scan needs --case (an algebra tag or 'example')")
    if args.case.strip().lower() == "example":
        params = params_from_args(args)
        if params.z0 is None or params.z0 == 0:
            raise UsageError("example scans need a nonzero --z0")
        lm = PL.example_landmarks(params)
        span = tuple(_floats(args.span, 2, "--span")) if args.span else (lm.boundary, 60.0 * abs(params.lam))
        rows = PL.scan_example(params, span, grid=args.grid, x=args.x, eps=args.eps, jobs=args.jobs)
    else:
        tag = normalize_tag(args.case)
        if tag == "A33":
            raise UsageError("A33 has no seed variables to scan")
        grid_params = [ModelParams(lam=lam, m0=m0, alpha0=a0, zeta0=z, z0=args.z0, F0=args.F0, G0=args.G0)
                       for lam in _list_opt(args.lam) for m0 in _list_opt(args.m0)
                       for a0 in _list_opt(args.alpha0) for z in _list_opt(args.zeta0)]
        box = _box(args.box) if args.box else DEFAULT_BOXES[tag]
        rows = PL.scan_case(tag, grid_params, box, grid=args.grid, eps=args.eps, jobs=args.jobs)
    if args.format == "csv":
        write_csv(rows, PL.SCAN_COLUMNS, args.out)
    else:
        write_json(rows, args.out)
    return EXIT_OK


COMMANDS = {"classify": cmd_classify, "integrate": cmd_integrate, "verify-example": cmd_verify_example,
            "scan": cmd_scan}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (UsageError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE if args.command in ("classify", "scan") else EXIT_FAIL
    except PkeLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
