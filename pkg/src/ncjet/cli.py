"""Command line front end: ``ncjet validate | jets | spencer | tor | diffop | report``.

All output is canonical JSON (sorted keys, rationals as strings).  Exit codes:
0 on success, 1 when an input violates the axioms (or a computation is refused
by the dimension cap), 2 when an input does not parse.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from flint import fmpq, fmpq_mat

from . import diffops as do
from . import exterior as ex
from . import homology as hom
from . import jets as jt
from . import linalg as la
from .algebra import Algebra, AlgebraError, Module, free_module, validate_algebra
from .calculus import Calculus, CalculusError, CalculusSpecError, calculus_from_json, validate_calculus
from .reports import REPORTS

EXIT_OK, EXIT_INVALID, EXIT_MALFORMED = 0, 1, 2


class MalformedInput(Exception):
    pass


class InvalidInput(Exception):
    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}


# ---------------------------------------------------------------- JSON

def jsonable(x):
    """Recursively convert flint values to JSON-native ones (rationals as strings)."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, fmpq):
        return la.format_scalar(x)
    if isinstance(x, fmpq_mat):
        return [[la.format_scalar(v) for v in row] for row in x.tolist()]
    if isinstance(x, la.Subspace):
        return {"dim": x.dim, "ambient": x.ambient}
    return x


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def _read_json(ref: str) -> dict:
    """A JSON file path, or the stem of a shipped spec (e.g. ``quaternions``)."""
    path = Path(ref)
    try:
        if path.is_file():
            text = path.read_text()
        else:
            data = resources.files("ncjet") / "data" / f"{ref}.json"
            if not data.is_file():
                raise MalformedInput(f"no such file or shipped spec: {ref}")
            text = data.read_text()
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{ref}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise MalformedInput(f"{ref}: {exc}") from exc


# ---------------------------------------------------------------- loading

def load_algebra(ref: str) -> Algebra:
    try:
        A = Algebra.from_json(_read_json(ref))
    except (AlgebraError, ValueError, TypeError, ZeroDivisionError) as exc:
        raise MalformedInput(f"algebra: {exc}") from exc
    report = validate_algebra(A)
    if report["failures"]:
        raise InvalidInput("algebra axioms fail", {"algebra": report})
    return A


def load_calculus(A: Algebra, ref: str) -> Calculus:
    try:
        c = calculus_from_json(A, _read_json(ref))
    except (CalculusSpecError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, CalculusError) and not isinstance(exc, CalculusSpecError):
            raise InvalidInput(f"calculus: {exc}", {"calculus": {"error": str(exc)}}) from exc
        raise MalformedInput(f"calculus: {exc}") from exc
    report = validate_calculus(c)
    if not report["valid"]:
        raise InvalidInput("calculus axioms fail", {"calculus": report})
    return c


def load_module(A: Algebra, ref: str | None, c: Calculus | None = None, name: str = "E") -> Module:
    """``regular`` (the algebra itself), ``free:r``, or a module JSON file."""
    if ref is None or ref == "regular":
        return c.A_module if c is not None else free_module(A, 1)
    if ref.startswith("free:"):
        try:
            return free_module(A, int(ref[5:]))
        except ValueError as exc:
            raise MalformedInput(f"module: {exc}") from exc
    try:
        M = Module.from_json(A, _read_json(ref), name=name)
    except (AlgebraError, ValueError, TypeError) as exc:
        raise MalformedInput(f"module {ref}: {exc}") from exc
    fails = M.validate()
    if fails:
        raise InvalidInput(f"module {ref} axioms fail", {"module": {"failures": fails}})
    return M


def load_operator(data: dict, E: Module, F: Module) -> fmpq_mat:
    try:
        rows = data["matrix"]
        m = la.from_rows(rows, E.dim)
    except (KeyError, TypeError, ValueError, la.DimensionError) as exc:
        raise MalformedInput(f"operator: {exc}") from exc
    if (m.nrows(), m.ncols()) != (F.dim, E.dim):
        raise MalformedInput(f"operator must be {F.dim} x {E.dim}")
    return m


# ---------------------------------------------------------------- commands

def cmd_validate(args) -> dict:
    A = load_algebra(args.algebra)
    out = {"algebra": {"name": A.name, "dim": A.dim, "valid": True}, "valid": True}
    c = None
    if args.calculus:
        c = load_calculus(A, args.calculus)
        out["calculus"] = {"dim_Omega1": c.dim, "dim_N": c.N.dim, "valid": True}
        ext = ex.ExteriorAlgebra(c, args.truncate)
        v = ext.validate()
        out["exterior"] = {"dims": ext.dims(), "valid": v["valid"], "failures": v["failures"]}
        if not v["valid"]:
            raise InvalidInput("exterior algebra axioms fail", out)
    for ref in args.module or []:
        M = load_module(A, ref, c)
        out.setdefault("modules", {})[ref] = {"dim": M.dim, "valid": True}
    return out


def _session(args):
    A = load_algebra(args.algebra)
    c = load_calculus(A, args.calculus)
    E = load_module(A, (args.module or [None])[0], c)
    return A, c, E


def cmd_jets(args) -> dict:
    A, c, E = _session(args)
    ext = ex.maximal_exterior(c, args.truncate)
    dims = [jt.jet_space(args.flavor, c, ext, E, n).dim for n in range(args.order + 1)]
    seqs = []
    for n in range(1, args.order + 1):
        r = jt.exactness_report(args.flavor, c, ext, E, n)
        seqs.append({"order": n, "dims": r["dims"],
                     **{k: r[k] for k in ("left_exact", "mid_exact", "right_exact", "exact")}})
    return {"flavor": args.flavor, "order": args.order, "dims": dims, "sequences": seqs}


def cmd_spencer(args) -> dict:
    A, c, E = _session(args)
    ext = ex.maximal_exterior(c, args.truncate)
    return {"truncation": ext.N, "exterior_dims": ext.dims(),
            "symmetric_dims": [ex.symmetric_forms(ext, n, E).dim for n in range(ext.N + 1)],
            "cohomology": ex.spencer_report(ext, ext.N, E)}


def cmd_tor(args) -> dict:
    A = load_algebra(args.algebra)
    if not args.M or not args.N:
        raise MalformedInput("tor needs --M (right module) and --N (left module)")
    M = load_module(A, args.M, name="M")
    N = load_module(A, args.N, name="N")
    if M.right is None or N.left is None:
        raise MalformedInput("tor needs a right action on M and a left action on N")
    res = hom.free_resolution(M.as_left_over_opposite(), args.depth + 1, args.strategy)
    dims = [hom.tor(M, N, k, resolution=res)["dim"] for k in range(args.depth + 1)]
    return {"depth": args.depth, "dims": dims, "resolution_ranks": res.ranks,
            "strategy": args.strategy}


def cmd_diffop(args) -> dict:
    """The operator file holds a 'matrix' and optional 'domain'/'codomain' module refs;
    --module and --codomain take precedence over the refs in the file."""
    if not args.op:
        raise MalformedInput("diffop needs --op")
    spec = _read_json(args.op)
    if not isinstance(spec, dict):
        raise MalformedInput("operator file must be a JSON object")
    A = load_algebra(args.algebra)
    c = load_calculus(A, args.calculus)
    E = load_module(A, (args.module or [spec.get("domain")])[0], c)
    codomain = args.codomain or spec.get("codomain")
    F = load_module(A, codomain, c, name="F") if codomain else E
    delta = load_operator(spec, E, F)
    ext = ex.maximal_exterior(c, args.truncate)
    n = do.order(c, ext, delta, E, F, args.max_order, args.flavor)
    out = {"flavor": args.flavor, "max_order": args.max_order, "order": n}
    if n is not None:
        cert = do.order_at_most(c, ext, delta, E, F, n, args.flavor)
        out["lift"] = cert.lift
        out["lift_solution_dim"] = cert.solution_dim
    out["first_order_criterion"] = do.first_order_criterion(c, delta, E, F)
    return out


def cmd_report(args) -> dict:
    return REPORTS[args.example]()


COMMANDS = {"validate": cmd_validate, "jets": cmd_jets, "spencer": cmd_spencer, "tor": cmd_tor,
            "diffop": cmd_diffop, "report": cmd_report}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ncjet", description="Noncommutative jets and differential "
                                "operators over finite-dimensional algebras.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, calculus=True):
        sp.add_argument("--algebra", default="quaternions",
                        help="algebra JSON file or shipped spec name")
        if calculus:
            sp.add_argument("--calculus", default="quaternion_calculus",
                            help="calculus JSON file or shipped spec name")
        sp.add_argument("--module", action="append",
                        help="module JSON file, 'regular' or 'free:r' (repeatable for validate)")
        sp.add_argument("--truncate", type=int, default=3, help="exterior algebra grade N")
        sp.add_argument("--out", "--report", dest="out",
                        help="also write the JSON report to this path")

    common(sub.add_parser("validate", help="check algebra, calculus and module axioms"))
    sj = sub.add_parser("jets", help="jet dimensions and exact sequences")
    common(sj)
    sj.add_argument("--flavor", choices=jt.FLAVORS, default="holonomic")
    sj.add_argument("--order", type=int, default=2)
    common(sub.add_parser("spencer", help="symmetric forms and Spencer cohomology"))
    st = sub.add_parser("tor", help="Tor dimensions")
    common(st, calculus=False)
    st.add_argument("--M", help="right module (JSON file)")
    st.add_argument("--N", help="left module (JSON file)")
    st.add_argument("--depth", type=int, default=3)
    st.add_argument("--strategy", choices=hom.STRATEGIES, default="basis")
    sd = sub.add_parser("diffop", help="order of a linear map and its lift")
    common(sd)
    sd.add_argument("--op", help="JSON file with a 'matrix' (codomain x domain rows)")
    sd.add_argument("--codomain", help="codomain module (default: the --module)")
    sd.add_argument("--flavor", choices=jt.FLAVORS, default="holonomic")
    sd.add_argument("--max-order", type=int, default=3)
    sr = sub.add_parser("report", help="full report for a worked example")
    sr.add_argument("example", choices=sorted(REPORTS))
    sr.add_argument("--out", "--report", dest="out",
                    help="also write the JSON report to this path")
    return p


def _check_args(args) -> None:
    for flag in ("order", "truncate", "depth", "max_order"):
        value = getattr(args, flag, None)
        if value is not None and value < 0:
            raise MalformedInput(f"--{flag.replace('_', '-')} must be non-negative")
    if getattr(args, "truncate", None) is not None and args.truncate < 2:
        raise MalformedInput("--truncate must be at least 2")


def _emit(payload: dict, out: str | None) -> None:
    text = dumps(payload)
    sys.stdout.write(text)
    if out:
        Path(out).write_text(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_MALFORMED
    out = getattr(args, "out", None)
    try:
        _check_args(args)
        payload = COMMANDS[args.command](args)
    except MalformedInput as exc:
        _emit({"error": str(exc), "status": "malformed"}, None)
        return EXIT_MALFORMED
    except InvalidInput as exc:
        _emit({"error": str(exc), "status": "invalid", **exc.report}, out)
        return EXIT_INVALID
    except la.CarrierTooLarge as exc:
        _emit({"error": str(exc), "status": "refused"}, out)
        return EXIT_INVALID
    except la.DimensionError as exc:
        _emit({"error": str(exc), "status": "malformed"}, None)
        return EXIT_MALFORMED
    _emit(payload, out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
