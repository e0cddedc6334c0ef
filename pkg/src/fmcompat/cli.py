"""Command-line entry point: ``fmcompat <subcommand> ...``.

Exit codes: 0 success or Compatible, 1 Incompatible, 2 Degenerate or
Ambiguous, 3 input or I/O error (with a JSON error object on stdout).
"""
from __future__ import annotations

import argparse
import json
import sys
from itertools import combinations

from . import __version__
from .classify import AMBIGUOUS, QuadClass, TripleClass, all_epipoles_coincide, classify_quadruple, classify_triple
from .compatibility import COMPATIBLE, DEGENERATE, INCOMPATIBLE, check_multiview, check_quadruple
from .errors import GeometryError, NotCompatible
from .jsonio import camera_document, dumps, parse_cameras, parse_set, set_document
from .reconstruction import reconstruct, verify_solution
from .synth import CaseSpec, generate_cameras, perturb_set, scramble_interior, set_from_cameras

EXIT_OK, EXIT_INCOMPATIBLE, EXIT_DEGENERATE, EXIT_INPUT = 0, 1, 2, 3
VERDICT_EXIT = {COMPATIBLE: EXIT_OK, INCOMPATIBLE: EXIT_INCOMPATIBLE, DEGENERATE: EXIT_DEGENERATE}
CASE_NAMES = {
    "case1": "Case1", "case2": "Case2", "case3": "Case3", "case4": "Case4",
    "generic": "GenericN", "collinear": "CollinearN",
}


class InputError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError("UsageError", message)


def _read_json(path):
    try:
        if path in (None, "-"):
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise InputError("IOError", str(exc)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError("InvalidJSON", f"{path or '<stdin>'}: {exc}") from None


def _write(text, path=None):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError("IOError", str(exc)) from None


def _load_set(path):
    try:
        return parse_set(_read_json(path))
    except GeometryError as exc:
        raise InputError(exc.code, str(exc)) from None


def _classification(cls):
    if isinstance(cls, QuadClass):
        return cls.as_dict()
    if isinstance(cls, TripleClass):
        return {"label": cls.label, "coincidence": list(cls.coincidence)}
    return {"label": str(cls)}


def report_document(report):
    return {
        "version": __version__,
        "verdict": report.verdict,
        "classification": _classification(report.classification),
        "residuals": dict(report.residuals),
        "tolerance": report.tolerance,
        "diagnostics": list(report.diagnostics),
        "details": report.details,
    }


def cmd_classify(args):
    fset, tol = _load_set(args.set)
    if fset.n == 2:
        doc, label = {"label": "Pair"}, "Pair"
    elif fset.n == 3:
        doc = _classification(classify_triple(fset, tol.tol_classify))
        label = doc["label"]
    elif fset.n == 4:
        doc = classify_quadruple(fset, tol.tol_classify).as_dict()
        label = doc["label"]
    else:
        subsets = []
        for views in combinations(fset.views(), 4):
            c = classify_quadruple(fset.subset(views), tol.tol_classify)
            subsets.append({"views": list(views), "label": c.label})
        if all_epipoles_coincide(fset, tol.tol_classify):
            label = "CollinearN"
        elif any(s["label"] == AMBIGUOUS for s in subsets):
            label = AMBIGUOUS
        else:
            label = "Multiview"
        doc = {"label": label, "subsets": subsets}
    doc["version"] = __version__
    _write(dumps(doc), args.output)
    return EXIT_DEGENERATE if label == AMBIGUOUS else EXIT_OK


def cmd_check(args):
    fset, tol = _load_set(args.set)
    tol_compat = tol.tol_compat if args.tol is None else args.tol
    if fset.n == 4:
        report = check_quadruple(fset, tol_compat, args.aux_strategy, args.draws, args.seed)
    else:
        report = check_multiview(fset, tol_compat, args.aux_strategy, args.draws, args.seed)
    _write(dumps(report_document(report)), args.output)
    return VERDICT_EXIT[report.verdict]


def cmd_reconstruct(args):
    fset, tol = _load_set(args.set)
    try:
        sol = reconstruct(fset, tol.tol_compat, args.seed)
    except NotCompatible as exc:
        _write(dumps({"error": exc.code, "message": str(exc)}))
        return EXIT_INCOMPATIBLE
    except GeometryError as exc:
        _write(dumps({"error": exc.code, "message": str(exc)}))
        return EXIT_DEGENERATE
    cert = {f"{i},{j}": r for (i, j), r in sol.certificate.items()}
    doc = camera_document(sol.cameras, certificate=cert, unique=sol.unique, version=__version__)
    _write(dumps(doc), args.output)
    return EXIT_OK


def cmd_generate(args):
    try:
        spec = CaseSpec(CASE_NAMES[args.case], args.n, args.seed)
    except ValueError as exc:
        raise InputError("UsageError", str(exc)) from None
    cameras = generate_cameras(spec)
    fset = set_from_cameras(cameras)
    _write(dumps(set_document(fset)), args.output)
    if args.cameras:
        _write(dumps(camera_document(cameras)), args.cameras)
    return EXIT_OK


def _pair(text):
    try:
        i, j = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"pair must look like 1,2 (got {text!r})") from None
    return i, j


def cmd_perturb(args):
    fset, tol = _load_set(args.set)
    i, j = args.pair
    if i == j or not (1 <= i <= fset.n and 1 <= j <= fset.n):
        raise InputError("UsageError", f"pair ({i},{j}) is not a pair of views in 1..{fset.n}")
    try:
        if args.keep_epipoles:
            out = scramble_interior(fset, (i, j), args.seed)
        else:
            out = perturb_set(fset, (i, j), args.eps, args.seed)
    except ValueError as exc:
        code = exc.code if isinstance(exc, GeometryError) else "UsageError"
        raise InputError(code, str(exc)) from None
    _write(dumps(set_document(out, tol)), args.output)
    return EXIT_OK


def cmd_verify(args):
    try:
        cameras = parse_cameras(_read_json(args.cameras))
    except GeometryError as exc:
        raise InputError(exc.code, str(exc)) from None
    fset, tol = _load_set(args.set)
    if len(cameras) != fset.n:
        raise InputError("InvalidDocument", f"{len(cameras)} cameras for a {fset.n}-view set")
    tol_compat = tol.tol_compat if args.tol is None else args.tol
    try:
        ok, cert = verify_solution(cameras, fset, tol_compat)
    except GeometryError as exc:
        _write(dumps({"error": exc.code, "message": str(exc)}))
        return EXIT_DEGENERATE
    doc = {
        "version": __version__,
        "verdict": COMPATIBLE if ok else INCOMPATIBLE,
        "certificate": {f"{i},{j}": r for (i, j), r in cert.items()},
        "tolerance": tol_compat,
    }
    _write(dumps(doc), args.output)
    return EXIT_OK if ok else EXIT_INCOMPATIBLE


def build_parser():
    p = _Parser(prog="fmcompat", description="Compatibility of fundamental matrices.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def out(sp):
        sp.add_argument("-o", "--output", default=None, help="output path (default stdout)")

    c = sub.add_parser("classify", help="classify the camera-center geometry")
    c.add_argument("set", nargs="?", default="-")
    out(c)
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("check", help="decide compatibility")
    c.add_argument("set", nargs="?", default="-")
    c.add_argument("--tol", type=float, default=None)
    c.add_argument("--aux-strategy", choices=("random", "remark49"), default="random")
    c.add_argument("--draws", type=int, default=3)
    c.add_argument("--seed", type=int, default=0)
    out(c)
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("reconstruct", help="build witness cameras")
    c.add_argument("set", nargs="?", default="-")
    c.add_argument("--seed", type=int, default=0)
    out(c)
    c.set_defaults(func=cmd_reconstruct)

    c = sub.add_parser("generate", help="synthesize a compatible set")
    c.add_argument("--case", choices=sorted(CASE_NAMES), required=True)
    c.add_argument("--n", type=int, default=4)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--cameras", default=None, help="also write the generating cameras here")
    out(c)
    c.set_defaults(func=cmd_generate)

    c = sub.add_parser("perturb", help="corrupt one fundamental matrix")
    c.add_argument("set", nargs="?", default="-")
    c.add_argument("--pair", type=_pair, required=True)
    c.add_argument("--eps", type=float, default=1e-3)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--keep-epipoles", action="store_true",
                   help="change F(i,j) while keeping every epipole fixed")
    out(c)
    c.set_defaults(func=cmd_perturb)

    c = sub.add_parser("verify", help="certify cameras against a set")
    c.add_argument("cameras")
    c.add_argument("set")
    c.add_argument("--tol", type=float, default=None)
    out(c)
    c.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.command in ("check", "verify") and args.tol is not None and not args.tol > 0:
            raise InputError("UsageError", "--tol must be positive")
        if args.command == "check" and args.draws < 1:
            raise InputError("UsageError", "--draws must be at least 1")
        return args.func(args)
    except InputError as exc:
        sys.stdout.write(dumps({"error": exc.code, "message": str(exc)}))
        return EXIT_INPUT
    except GeometryError as exc:
        sys.stdout.write(dumps({"error": exc.code, "message": str(exc)}))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
