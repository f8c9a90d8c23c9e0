"""``traceforge`` command line.

Exit codes: 0 pass / equivalent / similar, 1 fail / inequivalent, 2 unknown,
64 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .arith import FieldDescriptor, QuadElement, parse_rational
from .examples import run_delta5, run_qsqrt2_family, run_rational_prime_family
from .forms import DiagonalForm, equivalent_q, similar_q
from .gluing import InconsistencyError, PlanError, plan_from_json, trace_field
from .local import hasse_profile
from .report import Report
from .twist import (
    TwistConditionError,
    assemble,
    build_odd_twist,
    build_quadfield_twist,
    certificate_from_json,
    reproduce_even_table,
    search_blocks,
    verify_twist_conditions,
)

EXIT_OK, EXIT_FAIL, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 64
_STATUS_EXIT = {"pass": EXIT_OK, "fail": EXIT_FAIL, "unknown": EXIT_UNKNOWN}
_VERDICT_EXIT = {"equivalent": 0, "similar": 0, "inequivalent": 1, "unknown": 2}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _load_form(path: str) -> DiagonalForm:
    try:
        return DiagonalForm.from_json(_load_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad form file {path}: {exc}") from None


def _emit(args, obj, text: str) -> None:
    print(_dump(obj) if args.json else text)


def _emit_report(args, rep: Report) -> int:
    _emit(args, rep.to_json(), rep.to_text())
    return _STATUS_EXIT[rep.status]


# -- forms -------------------------------------------------------------------


def cmd_invariants(args) -> int:
    path = args.form_file or args.form
    if not path:
        raise UsageError("invariants needs a form file")
    f = _load_form(path)
    prof = hasse_profile(f)
    out = prof.to_json()
    print(_dump(out))
    return EXIT_OK


def _two_forms(args):
    return _load_form(args.f), _load_form(args.g)


def cmd_equiv(args) -> int:
    f, g = _two_forms(args)
    v = equivalent_q(f, g)
    _emit(args, v.to_json(), f"{v.result}" + (f": {v.witness}" if v.witness else "") +
          (f" ({v.reason})" if v.reason else ""))
    return _VERDICT_EXIT[v.result]


def cmd_similar(args) -> int:
    f, g = _two_forms(args)
    v = similar_q(f, g)
    text = v.result + (f" with scale {v.scale}" if v.scale is not None else "") + \
        (f" ({v.reason})" if v.reason else "")
    _emit(args, v.to_json(), text)
    return _VERDICT_EXIT[v.result]


# -- gluing --------------------------------------------------------------------


def cmd_trace_field(args) -> int:
    path = args.plan_file or args.plan
    if not path:
        raise UsageError("trace-field needs a plan file")
    obj = _load_json(path)
    try:
        plan = plan_from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad plan file {path}: {exc}") from None
    try:
        v = trace_field(plan)
    except (InconsistencyError, TwistConditionError) as exc:
        _emit(args, {"error": type(exc).__name__, "message": str(exc)}, f"error: {exc}")
        return EXIT_FAIL
    _emit(args, v.to_json(), f"trace field {v.trace_field}, degree {v.degree_over_base}: "
          f"{v.arithmeticity} ({v.rule})")
    return EXIT_OK


def cmd_delta5(args) -> int:
    return _emit_report(args, run_delta5())


# -- twists --------------------------------------------------------------------


def _cert_output(args, cert) -> int:
    _emit(args, cert.to_json(),
          f"certificate: f0 = {cert.f0}, a = {cert.a}, field {cert.resulting_field}"
          + "".join(f"\n  note: {n}" for n in cert.notes))
    return EXIT_OK


def _twist_failure(args, exc: TwistConditionError) -> int:
    _emit(args, {"checks": exc.checks, "failures": exc.failures}, f"twist conditions fail: {exc}")
    return EXIT_FAIL


def cmd_twist_verify(args) -> int:
    obj = _load_json(args.cert)
    try:
        f0, a, A0 = certificate_from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad certificate file {args.cert}: {exc}") from None
    try:
        return _cert_output(args, verify_twist_conditions(f0, a, A0))
    except TwistConditionError as exc:
        return _twist_failure(args, exc)


def cmd_twist_search(args) -> int:
    blocks = search_blocks(args.d, args.coeff_bound, args.entry_bound, args.mixed_signs)
    out = {"d": args.d, "blocks": [
        {"q": [c.to_json() for c in b.q.entries], "A": [[v.to_json() for v in row] for row in b.A]}
        for b in blocks
    ]}
    lines = [f"{len(blocks)} blocks for d = {args.d}"]
    lines += [f"  q = {b.q}, A = {[[str(v) for v in row] for row in b.A]}" for b in blocks]
    if args.dim is not None:
        cert = _assemble_dim(blocks, args.dim)
        out["certificate"] = cert.to_json() if cert else None
        lines.append(f"dimension {args.dim}: " + (
            f"certificate with f0 = {cert.f0}, field {cert.resulting_field}" if cert else "no certificate"))
    _emit(args, out, "\n".join(lines))
    return EXIT_OK if args.dim is None or out["certificate"] else EXIT_FAIL


def _assemble_dim(blocks, dim: int):
    """One indefinite block plus positive definite blocks, filling ``dim`` variables."""
    if dim < 2 or dim % 2:
        raise UsageError("--dim must be even and >= 2")
    neg = [b for b in blocks if sum(c.sign() < 0 for c in b.q.entries) == 1]
    pos = [b for b in blocks if all(c.sign() > 0 for c in b.q.entries)]
    for first in neg:
        if dim > 2 and not pos:
            break
        for fill in pos or [None]:
            parts = [first] + ([fill] * (dim // 2 - 1) if fill else [])
            try:
                f0, A0 = assemble(parts)
                return verify_twist_conditions(f0, first.d, A0)
            except (ValueError, TwistConditionError):
                continue
    return None


def cmd_twist_table(args) -> int:
    rows = reproduce_even_table()
    passed = sum(r.passed for r in rows)
    lines = [f"even table: {passed}/{len(rows)} rows pass"]
    for r in rows:
        lines.append(f"  d = {r.d:>2}: {'pass' if r.passed else 'FAIL'}  field {r.field}")
        lines += [f"      {k}: {v}" for k, v in r.checks.items() if not v]
    _emit(args, {"passed": passed, "rows": [r.to_json() for r in rows]}, "\n".join(lines))
    return EXIT_OK if passed == len(rows) else EXIT_FAIL


def cmd_twist_build_odd(args) -> int:
    try:
        cert = build_odd_twist(args.d, args.n)
    except TwistConditionError as exc:
        return _twist_failure(args, exc)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return _cert_output(args, cert)


def cmd_twist_build_quad(args) -> int:
    try:
        fld = FieldDescriptor(args.m)
        b = QuadElement(parse_rational(args.x), parse_rational(args.y), fld)
        cert = build_quadfield_twist(b, args.n)
    except TwistConditionError as exc:
        return _twist_failure(args, exc)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return _cert_output(args, cert)


# -- examples --------------------------------------------------------------------


def _run_example(args, fn, *a) -> int:
    try:
        rep = fn(*a)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return _emit_report(args, rep)


def cmd_ex_rational(args) -> int:
    return _run_example(args, run_rational_prime_family, args.r, args.n)


def cmd_ex_qsqrt2(args) -> int:
    return _run_example(args, run_qsqrt2_family, args.r, args.n, args.norm_bound)


def cmd_version(args) -> int:
    print(__version__)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")

    p = _Parser(prog="traceforge", description="Trace fields of gluings of arithmetic hyperbolic pieces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("invariants", parents=[common], help="Hasse profile of a form over Q")
    s.add_argument("form_file", nargs="?")
    s.add_argument("--form")
    s.set_defaults(func=cmd_invariants)

    for name, fn, text in (("equiv", cmd_equiv, "equivalence"), ("similar", cmd_similar, "similarity")):
        s = sub.add_parser(name, parents=[common], help=f"{text} of two forms over Q")
        s.add_argument("f")
        s.add_argument("g")
        s.set_defaults(func=fn)

    s = sub.add_parser("trace-field", parents=[common], help="trace field of a gluing plan")
    s.add_argument("plan_file", nargs="?")
    s.add_argument("--plan")
    s.set_defaults(func=cmd_trace_field)

    s = sub.add_parser("delta5", parents=[common], help="Delta_5 obstruction")
    s.set_defaults(func=cmd_delta5)

    tw = sub.add_parser("twist", help="twist certificates").add_subparsers(
        dest="twist_command", required=True, parser_class=_Parser)
    s = tw.add_parser("verify", parents=[common])
    s.add_argument("cert")
    s.set_defaults(func=cmd_twist_verify)
    s = tw.add_parser("search", parents=[common])
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--coeff-bound", type=int, default=3)
    s.add_argument("--entry-bound", type=int, default=3)
    s.add_argument("--dim", type=int)
    s.add_argument("--mixed-signs", action="store_true", help="only forms <c1, c2> with c1 c2 < 0")
    s.set_defaults(func=cmd_twist_search)
    s = tw.add_parser("table", parents=[common], help="re-verify the even-d twist table")
    s.set_defaults(func=cmd_twist_table)
    s = tw.add_parser("build-odd", parents=[common])
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--n", type=int, default=4)
    s.set_defaults(func=cmd_twist_build_odd)
    s = tw.add_parser("build-quad", parents=[common], help="b = x + y sqrt(m)")
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--n", type=int, default=4)
    s.set_defaults(func=cmd_twist_build_quad)

    ex = sub.add_parser("examples", help="worked constructions").add_subparsers(
        dest="example", required=True, parser_class=_Parser)
    s = ex.add_parser("primes-1mod4", parents=[common])
    s.add_argument("--r", type=int, default=3)
    s.add_argument("--n", type=int, default=4)
    s.set_defaults(func=cmd_ex_rational)
    s = ex.add_parser("qsqrt2-split", parents=[common])
    s.add_argument("--r", type=int, default=2)
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--norm-bound", type=int, default=500)
    s.set_defaults(func=cmd_ex_qsqrt2)
    s = ex.add_parser("delta5", parents=[common])
    s.set_defaults(func=cmd_delta5)

    s = sub.add_parser("version")
    s.set_defaults(func=cmd_version, json=False)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, PlanError, ValueError) as exc:
        print(f"traceforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
