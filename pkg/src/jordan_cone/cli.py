"""Command-line interface: ``jordan-cone <group> <command> ...``.

Every command writes a JSON payload to stdout and a one-line human summary
to stderr (suppressed by ``--json``). Exit codes: 0 success, 1 a
verification, factorization or property failure, 2 a usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import AlgebraDescriptor, Element, descriptor_from_json, parse_algebra, unit
from .cone import hilbert_distance, inversion_is_linear_up_to_scale, ray_of
from .dual import (Functional, dual_norm, extreme_point_check, orthogonal_decomposition,
                   support_projection)
from .errors import (FactorizationFailed, JordanConeError, NotAnIsometry, UnknownSuite,
                     VerificationError)
from .isometry import (AffineVariationIsometry, HilbertIsometry, JordanIsomorphism,
                       VariationIsometry, classify_isometry_group, factor_hilbert_isometry,
                       factor_variation_isometry, factorization_residual, hamhalter_decompose,
                       has_atom_with_atomic_complement, jordan_iso_defect, ray_distance)
from .sampling import derive_seed, make_rng, sample_interior, sample_jordan_iso
from .spectral import quotient_norm, variation_seminorm
from .suite import PRECISIONS, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# documented tolerances scaled by --tol-scale
TOL_JORDAN = 1e-9
TOL_HILBERT = 1e-8
TOL_VARIATION = 1e-10


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- input helpers


def _load_json(arg: str):
    """A JSON document given inline, as a file path, or ``-`` for stdin."""
    if arg == "-":
        text = sys.stdin.read()
    elif arg.lstrip().startswith(("{", "[")):
        text = arg
    else:
        path = Path(arg)
        if not path.is_file():
            raise UsageError(f"no such file: {arg}")
        text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid JSON in {arg}: {exc}") from exc


def _load_algebra(arg: str) -> AlgebraDescriptor:
    text = arg.strip()
    if text.startswith("{") or Path(text).is_file():
        return descriptor_from_json(_load_json(text))
    return parse_algebra(text)


def _load_element(arg: str) -> Element:
    return Element.from_json(_load_json(arg))


def _load_functional(arg: str) -> Functional:
    obj = _load_json(arg)
    if isinstance(obj, dict) and "representer" in obj:
        return Functional.from_json(obj)
    return Functional(Element.from_json(obj))


def _load_map(arg: str):
    """Classify an isometry or linear-map document by its keys."""
    obj = _load_json(arg)
    if not isinstance(obj, dict):
        raise UsageError("map JSON must be an object")
    if "matrix" in obj:
        source = descriptor_from_json(obj.get("source", obj.get("algebra")))
        target = descriptor_from_json(obj.get("target", obj.get("source", obj.get("algebra"))))
        return VariationIsometry.from_matrix(obj["matrix"], source, target)
    if "phi" in obj:
        return AffineVariationIsometry.from_json(obj)
    if "y" in obj:
        return HilbertIsometry.from_json(obj)
    if "algebra" in obj:
        return JordanIsomorphism.from_json(obj)
    raise UsageError("unrecognized map JSON (expected jordan_iso, hilbert, affine or matrix)")


def _samples(args, default: int) -> int:
    return default if args.samples is None else int(args.samples)


def _tol(args, tol: float) -> float:
    return tol * args.tol_scale


# ---------------------------------------------------------------- commands


def cmd_algebra_info(args):
    alg = _load_algebra(args.algebra)
    out = {"algebra": alg.to_json(), "name": alg.short_name(), "dim": alg.dim, "rank": alg.rank,
           "unit": unit(alg).to_json()["coords"], "weights": alg.weights().tolist(),
           "isometry_group": classify_isometry_group(alg)}
    return out, f"{alg.short_name()}: dim {alg.dim}, rank {alg.rank}", EXIT_OK


def cmd_metric_hilbert(args):
    x, y = _load_element(args.x), _load_element(args.y)
    d = float(hilbert_distance(x, y))
    return {"distance": d}, f"d_H = {d:.12g}", EXIT_OK


def cmd_metric_variation(args):
    x = _load_element(args.x)
    v, q = float(variation_seminorm(x)), float(quotient_norm(x))
    return {"variation": v, "quotient_norm": q}, f"||x||_v = {v:.12g}", EXIT_OK


def cmd_dual_decompose(args):
    phi = _load_functional(args.phi)
    plus, minus = orthogonal_decomposition(phi)
    out = {"plus": plus.to_json(), "minus": minus.to_json(), "norm": float(dual_norm(phi)),
           "norm_plus": float(dual_norm(plus)), "norm_minus": float(dual_norm(minus))}
    return out, f"||phi|| = {out['norm']:.12g}", EXIT_OK


def cmd_dual_support(args):
    p = support_projection(_load_functional(args.phi))
    return {"support": p.to_json(), "rank": p.rank}, f"support of rank {p.rank}", EXIT_OK


def cmd_dual_extreme(args):
    ok = extreme_point_check(_load_functional(args.phi))
    return {"extreme": ok}, "extreme point" if ok else "not an extreme point", EXIT_OK


def cmd_iso_make(args):
    alg = _load_algebra(args.algebra)
    rng = make_rng(derive_seed(args.seed, f"cli.iso.make/{alg.short_name()}"))
    J = sample_jordan_iso(alg, rng)
    eps = args.epsilon if args.epsilon is not None else int(rng.choice([-1, 1]))
    if args.kind == "jordan":
        out = J.to_json()
    elif args.kind == "hilbert":
        out = HilbertIsometry(eps, sample_interior(alg, rng), J).to_json()
    else:
        phi = Functional(Element(alg, rng.standard_normal(alg.dim)))
        out = AffineVariationIsometry(eps, J, phi).to_json()
    return out, f"random {args.kind} isometry of {alg.short_name()}", EXIT_OK


def cmd_iso_apply(args):
    f, x = _load_map(args.map), _load_element(args.x)
    if isinstance(f, HilbertIsometry):
        out = f(ray_of(x)).to_json()
    else:
        out = f(x).to_json()
    return out, "applied", EXIT_OK


def _verify_hilbert(f: HilbertIsometry, n: int, seed: int, dtype):
    rng = make_rng(derive_seed(seed, "cli.iso.verify"))
    x = ray_of(sample_interior(f.source, rng, n, dtype=dtype))
    y = ray_of(sample_interior(f.source, rng, n, dtype=dtype))
    d0 = np.asarray(hilbert_distance(x.representative, y.representative))
    d1 = np.asarray(hilbert_distance(f(x).representative, f(y).representative))
    return float(np.max(np.abs(d1 - d0))), TOL_HILBERT


def _verify_variation(S, n: int, seed: int):
    rng = make_rng(derive_seed(seed, "cli.iso.verify"))
    x = rng.standard_normal((n, S.source.dim))
    v0 = np.asarray(variation_seminorm(Element(S.source, x)))
    v1 = np.asarray(variation_seminorm(Element(S.target, S.apply_coords(x))))
    return float(np.max(np.abs(v1 - v0) / np.maximum(1.0, v0))), TOL_VARIATION


def cmd_iso_verify(args):
    f = _load_map(args.map)
    n = _samples(args, 1000)
    if isinstance(f, JordanIsomorphism):
        unit_err, mult_err = jordan_iso_defect(f, n, args.seed)
        resid, tol, kind = max(unit_err, mult_err), TOL_JORDAN, "jordan"
    elif isinstance(f, HilbertIsometry):
        (resid, tol), kind = _verify_hilbert(f, n, args.seed, PRECISIONS[args.precision]), "hilbert"
    else:
        (resid, tol), kind = _verify_variation(f, n, args.seed), "variation"
    tol = _tol(args, tol)
    ok = resid <= tol
    out = {"kind": kind, "samples": n, "max_residual": resid, "tolerance": tol, "pass": ok}
    summary = f"{'PASS' if ok else 'FAIL'}  {kind}: residual {resid:.3e} <= {tol:.1e}"
    return out, summary, EXIT_OK if ok else EXIT_FAIL


def cmd_iso_factor(args):
    f = _load_map(args.map)
    n = _samples(args, 1000)
    if isinstance(f, HilbertIsometry):
        dtype = PRECISIONS[args.precision]
        rec = factor_hilbert_isometry(f, samples=n, seed=args.seed, dtype=dtype)
        rng = make_rng(derive_seed(args.seed, "cli.iso.factor"))
        rays = ray_of(sample_interior(f.source, rng, n, dtype=dtype))
        resid = float(np.max(ray_distance(rec(rays), f(rays))))
        out = {"isometry": rec.to_json(), "max_residual": resid}
        return out, f"factored with epsilon {rec.epsilon:+d}, residual {resid:.3e}", EXIT_OK
    if isinstance(f, JordanIsomorphism):
        f = VariationIsometry.canonical(1, f)
    m = f.matrix()
    source = f.source
    target = f.target
    eps, J = factor_variation_isometry(m, source, target, samples=n, seed=args.seed)
    resid = factorization_residual(m, source, target, eps, J, n, args.seed + 1)
    out = {"epsilon": eps, "J": J.to_json(), "max_residual": resid}
    return out, f"factored with epsilon {eps:+d}, residual {resid:.3e}", EXIT_OK


def cmd_iso_hamhalter(args):
    f = _load_map(args.map)
    if isinstance(f, HilbertIsometry):
        raise UsageError("hamhalter takes a linear map, not a Hilbert isometry")
    if isinstance(f, JordanIsomorphism):
        f = VariationIsometry.canonical(1, f)
    T = hamhalter_decompose(f.matrix(), f.source, f.target, samples=_samples(args, 1000),
                            seed=args.seed, tol=_tol(args, 1e-7))
    return T.to_json(), f"T = {T.epsilon:+d} J + phi(.) e", EXIT_OK


def cmd_group_classify(args):
    alg = _load_algebra(args.algebra)
    verdict = classify_isometry_group(alg)
    linear = inversion_is_linear_up_to_scale(alg, samples=_samples(args, 16), seed=args.seed)
    atom = has_atom_with_atomic_complement(alg, seed=args.seed)
    agree = (verdict == "ProjectivitiesOnly") == linear == atom
    out = {"algebra": alg.to_json(), "classification": verdict, "inversion_linear": linear,
           "atom_with_atomic_complement": atom, "agree": agree}
    return out, f"{alg.short_name()}: {verdict}", EXIT_OK if agree else EXIT_FAIL


def cmd_verify(args):
    algebras = None
    if args.algebras:
        algebras = [_load_algebra(a) for a in args.algebras.split(",")]
    report = run_suite(args.suite, algebras=algebras, samples=args.samples, seed=args.seed,
                       tol_scale=args.tol_scale, precision=args.precision)
    return report.to_json(), report.summary(), EXIT_OK if report.passed else EXIT_FAIL


# ---------------------------------------------------------------- parser


def _default_seed() -> int:
    env = os.environ.get("JORDAN_CONE_SEED")
    if env is None or env.strip() == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"JORDAN_CONE_SEED must be an integer, got {env!r}") from None


def _global_options(parser: argparse.ArgumentParser, suppress: bool):
    def d(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--seed", type=int, default=d(None),
                        help="master seed (default: $JORDAN_CONE_SEED or 0)")
    parser.add_argument("--samples", type=int, default=d(None), help="override sample counts")
    parser.add_argument("--tol-scale", type=float, default=d(1.0),
                        help="multiply every documented tolerance by this factor")
    parser.add_argument("--json", action="store_true", default=d(False),
                        help="JSON on stdout only; no summary on stderr")
    parser.add_argument("--precision", choices=sorted(PRECISIONS), default=d("extended"),
                        help="floating-point precision for metric-sensitive checks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jordan-cone",
                                     description="Euclidean Jordan algebras, Hilbert's projective "
                                                 "metric and their isometries.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    groups = parser.add_subparsers(dest="group", required=True, metavar="GROUP")

    def group(name, help_):
        g = groups.add_parser(name, help=help_, parents=[common])
        return g.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(sub, name, func, help_, *positional):
        c = sub.add_parser(name, help=help_, parents=[common])
        for arg, arg_help in positional:
            c.add_argument(arg, help=arg_help)
        c.set_defaults(func=func)
        return c

    elem = "element JSON (file, inline, or - for stdin)"
    func = "functional JSON {'representer': element} or a bare element"
    mapj = "jordan_iso, hilbert, affine or {'source','target','matrix'} JSON"
    alg = "algebra shorthand (diag3, spin2, sym3, diag2+spin3) or descriptor JSON"

    sub = group("algebra", "algebra descriptors")
    command(sub, "info", cmd_algebra_info, "dimension, rank, unit and weights", ("algebra", alg))

    sub = group("metric", "Hilbert metric and variation seminorm")
    command(sub, "hilbert", cmd_metric_hilbert, "Hilbert projective distance", ("x", elem), ("y", elem))
    command(sub, "variation", cmd_metric_variation, "variation seminorm", ("x", elem))

    sub = group("dual", "functionals and the dual ball")
    command(sub, "decompose", cmd_dual_decompose, "orthogonal decomposition", ("phi", func))
    command(sub, "support", cmd_dual_support, "support projection", ("phi", func))
    command(sub, "extreme", cmd_dual_extreme, "extreme point of the dual slice", ("phi", func))

    sub = group("iso", "isometries")
    make = command(sub, "make", cmd_iso_make, "random isometry", ("algebra", alg))
    make.add_argument("--kind", choices=["jordan", "hilbert", "affine"], default="hilbert")
    make.add_argument("--epsilon", type=int, choices=[-1, 1], default=None)
    command(sub, "apply", cmd_iso_apply, "apply a map to an element", ("map", mapj), ("x", elem))
    command(sub, "verify", cmd_iso_verify, "sampled isometry check", ("map", mapj))
    command(sub, "factor", cmd_iso_factor, "recover (epsilon, y, J) or (epsilon, J)", ("map", mapj))
    command(sub, "hamhalter", cmd_iso_hamhalter, "affine form epsilon J x + phi(x) e", ("map", mapj))

    sub = group("group", "isometry groups")
    command(sub, "classify", cmd_group_classify, "classify the isometry group", ("algebra", alg))

    v = groups.add_parser("verify", help="run a property suite", parents=[common])
    v.add_argument("suite", help="algebra|spectral|cone|dual|isometry|acceptance|all or a property name")
    v.add_argument("--algebras", default=None, help="comma-separated algebras (default set if omitted)")
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        if args.seed is None:
            args.seed = _default_seed()
        payload, summary, code = args.func(args)
    except (UsageError, UnknownSuite) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"jordan-cone: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except (FactorizationFailed, NotAnIsometry, VerificationError) as exc:
        print(f"jordan-cone: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except JordanConeError as exc:
        print(f"jordan-cone: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(json.dumps(payload, indent=2))
    if not args.json:
        print(summary, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
