"""Command-line interface: ``dbc <subcommand> ...``.

Exit codes: 0 success, 1 a verification came out negative, 2 bad input.
Output is JSON unless ``--pretty`` asks for text.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import cusps, modgen
from .bunch import DecoratedBunch
from .canon import BandData, StringData, build_band, build_string
from .linalg import tpoly_parse
from .reduce import certify, decompose, isomorphic
from .reps import Representation, random_conjugate
from .scalars import BaseField, function_field
from .words import Cycle, Word, is_decorated, parse


class InputError(Exception):
    pass


def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--field", default=d("Q"), help="Q or Fp:<p> (default Q)")
    p.add_argument("--seed", type=int, default=d(0), help="seed for randomized output")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", default=d(False), help="JSON output (the default)")
    fmt.add_argument("--pretty", action="store_true", default=d(False), help="human-readable text output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dbc", description="Decorated bunches of chains: canonical forms, "
                                     "reduction, cusp bunches and matrix factorizations.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check the bunch axioms")
    p.add_argument("bunch")

    p = sub.add_parser("string", parents=[common], help="build the string representation of a word")
    p.add_argument("bunch")
    p.add_argument("--word", required=True)
    p.add_argument("--scramble", type=int, default=0, metavar="MOVES",
                   help="apply this many random admissible moves (uses --seed)")

    p = sub.add_parser("band", parents=[common], help="build a band representation")
    p.add_argument("bunch")
    p.add_argument("--cycle", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--phi", required=True, help="polynomial in t, e.g. 't-5' or 't^2+1'")
    p.add_argument("--scramble", type=int, default=0, metavar="MOVES")

    p = sub.add_parser("decompose", parents=[common], help="split a representation into strings and bands")
    p.add_argument("bunch")
    p.add_argument("rep")

    p = sub.add_parser("iso", parents=[common], help="decide isomorphism of two representations")
    p.add_argument("bunch")
    p.add_argument("repA")
    p.add_argument("repB")

    p = sub.add_parser("cusp", parents=[common], help="bunches and combinatorics of a cusp type")
    p.add_argument("--type", required=True, dest="ctype", help='e.g. "(1,0)" or "(2,1),(1,0)"')
    p.add_argument("--atype", action="store_true", help="use the A-type encoding")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--emit-bunch", action="store_true")
    g.add_argument("--emit-pi", action="store_true")
    g.add_argument("--emit-hj", action="store_true")

    p = sub.add_parser("catalog", parents=[common], help="equations of the irreducible cusp cases")
    p.add_argument("--case", type=int, required=True)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--a", default=None, help="comma-separated a_1..a_e for case 5")

    p = sub.add_parser("mf", parents=[common], help="matrix factorizations")
    mf_sub = p.add_subparsers(dest="mf_command", required=True)
    v = mf_sub.add_parser("verify", parents=[common], help='check {"phi", "psi", "f"}')
    v.add_argument("file")

    p = sub.add_parser("family", parents=[common], help="emit a module family with its checks")
    p.add_argument("--ring", required=True, choices=["T23", "XYZ", "XYUV", "t23", "xyz", "xyuv"])
    p.add_argument("--id", required=True, dest="fid")
    for name in ("m", "n", "l", "p", "q"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--lam")
    p.add_argument("--omega")
    p.add_argument("--perm")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    return parser


# ---------------------------------------------------------------------------
# helpers


def _field(args):
    try:
        base = BaseField.from_spec(args.field)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return base, function_field(base)


def _load_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _load_bunch(path: str, check: bool = True) -> DecoratedBunch:
    data = _load_json(path)
    if isinstance(data, dict) and "bunch" in data and "E" not in data:
        data = data["bunch"]
    try:
        b = DecoratedBunch.from_json(data)
    except (ValueError, TypeError, KeyError) as exc:
        raise InputError(str(exc)) from exc
    if check and b.validate():
        raise InputError("invalid bunch: " + "; ".join(str(v) for v in b.validate()))
    return b


def _load_rep(path: str, b: DecoratedBunch, K) -> Representation:
    data = _load_json(path)
    try:
        return Representation.from_json(data, K, bunch=b)
    except (ValueError, TypeError, KeyError, ZeroDivisionError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _band_json(band: BandData, b: DecoratedBunch, base, K) -> dict:
    ring = base if is_decorated(b, band.cycle) else K
    return {"cycle": str(band.cycle), "m": band.m, "phi": band.phi_str(ring)}


def _report_json(report, b, base, K) -> dict:
    return {"strings": [str(s.word) for s in report.strings],
            "bands": [_band_json(x, b, base, K) for x in report.bands],
            "steps": report.steps}


def _emit(args, payload, text: str | None = None):
    if args.pretty and text is not None:
        print(text)
    else:
        print(json.dumps(payload, indent=2 if args.pretty else None, sort_keys=False, default=str))


def _maybe_scramble(args, rep):
    if args.scramble:
        rep, _ = random_conjugate(rep, args.seed, args.scramble)
    return rep


def _rep_text(rep: Representation) -> str:
    lines = ["sizes: " + ", ".join(f"{x}={rep.size(x)}" for x in rep.bunch.elements)]
    for (x, y), m in rep.blocks.items():
        if m.nrows and m.ncols:
            lines.append(f"{x}|{y}: {m}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    b = _load_bunch(args.bunch, check=False)
    bad = b.validate()
    _emit(args, {"valid": not bad, "violations": [v.to_json() for v in bad]},
          "valid" if not bad else "\n".join(str(v) for v in bad))
    return 0 if not bad else 1


def cmd_string(args) -> int:
    base, K = _field(args)
    b = _load_bunch(args.bunch)
    try:
        w = parse(args.word)
        if isinstance(w, Cycle):
            raise InputError("string needs a word, not a cycle")
        rep = _maybe_scramble(args, build_string(b, K, w))
    except (ValueError,) as exc:
        raise InputError(str(exc)) from exc
    _emit(args, rep.to_json(include_bunch=False), _rep_text(rep))
    return 0


def cmd_band(args) -> int:
    base, K = _field(args)
    b = _load_bunch(args.bunch)
    try:
        W = parse(args.cycle)
        if not isinstance(W, Cycle):
            raise InputError("band needs a cycle: cycle(WORD ; [d])")
        ring = base if is_decorated(b, W) else K
        phi = tpoly_parse(ring, args.phi)
        rep = _maybe_scramble(args, build_band(b, K, W, args.m, phi))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    _emit(args, rep.to_json(include_bunch=False), _rep_text(rep))
    return 0


def cmd_decompose(args) -> int:
    base, K = _field(args)
    b = _load_bunch(args.bunch)
    rep = _load_rep(args.rep, b, K)
    bad = rep_violations(rep)
    if bad:
        raise InputError("invalid representation: " + "; ".join(bad))
    report = decompose(rep)
    ok = certify(report)
    payload = _report_json(report, b, base, K) | {"certified": ok}
    text = "\n".join([f"string {s.word}" for s in report.strings]
                     + [f"band {x['cycle']} m={x['m']} phi={x['phi']}" for x in payload["bands"]]
                     + [f"certified: {ok}"])
    _emit(args, payload, text)
    return 0 if ok else 1


def rep_violations(rep: Representation) -> list[str]:
    from .reps import validate_rep
    return [str(v) for v in validate_rep(rep)]


def cmd_iso(args) -> int:
    base, K = _field(args)
    b = _load_bunch(args.bunch)
    A, B = _load_rep(args.repA, b, K), _load_rep(args.repB, b, K)
    for r in (A, B):
        bad = rep_violations(r)
        if bad:
            raise InputError("invalid representation: " + "; ".join(bad))
    same = isomorphic(A, B)
    _emit(args, {"isomorphic": same}, "isomorphic" if same else "not isomorphic")
    return 0 if same else 1


def cmd_cusp(args) -> int:
    try:
        T = cusps.check_type(cusps.parse_type(args.ctype))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.emit_pi:
        payload = [cusps.pi_poset(n, m).to_json() for n, m in T]
        text = "\n".join(f"Pi({p['n']},{p['m']}): bar {p['bar']}, y-order {p['order_y']}" for p in payload)
    elif args.emit_hj:
        payload = [cusps.hj_expansion(n, m).to_json() for n, m in T]
        text = "\n".join(f"({h['n']},{h['m']}): a={h['a']} c={h['c']} d={h['d']}" for h in payload)
    else:
        b = cusps.atype_bunch(T) if args.atype else cusps.cusp_bunch(T)
        payload = b.to_json()
        text = f"E: {' '.join(b.E)}\nF: {' '.join(b.F)}\n~: {b.sim_pairs}\n-: {b.dash_pairs}"
    _emit(args, payload, text)
    return 0


def cmd_catalog(args) -> int:
    a = None
    if args.a:
        try:
            a = tuple(int(v) for v in args.a.split(","))
        except ValueError as exc:
            raise InputError("--a needs comma-separated integers") from exc
    try:
        entry = cusps.equation_catalog(args.case, args.p, args.q, args.r, a=a)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    payload = entry.to_json()
    text = "\n".join([f"case {entry.case} {entry.params}"] + [f"  {r} = 0" for r in entry.relations]
                     + [f"verified: {entry.verified}"] + [f"  failure: {f}" for f in entry.failures])
    _emit(args, payload, text)
    return 0 if entry.verified else 1


def cmd_mf(args) -> int:
    base, _ = _field(args)
    data = _load_json(args.file)
    try:
        ring, phi, psi, f = modgen.parse_mf(data, base)
        check = modgen.verify_mf(ring, phi, psi, f)
    except (modgen.PolyParseError, modgen.ShapeMismatch, ValueError, SyntaxError) as exc:
        raise InputError(str(exc)) from exc
    payload = check.to_json()
    s, ok = modgen.det_unit_power(ring, phi, f)
    payload["det_phi"] = {"s": s, "unit_ok": ok}
    text = ("PASS" if check.ok else "FAIL") + "".join(f"\n  {d}" for d in check.defects)
    _emit(args, payload, text)
    return 0 if check.ok else 1


def cmd_family(args) -> int:
    base, _ = _field(args)
    params = {k: getattr(args, k) for k in ("m", "n", "l", "p", "q", "omega", "perm") if getattr(args, k) is not None}
    if args.lam is not None:
        params["lam"] = args.lam
    for item in args.param:
        if "=" not in item:
            raise InputError(f"--param needs KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        params[k.strip()] = v.strip()
    try:
        if "lam" in params:
            Fraction(str(params["lam"]))
        em = modgen.family(args.ring, args.fid, params, base)
    except (modgen.BadFamily, modgen.BadParams, ValueError, ZeroDivisionError) as exc:
        raise InputError(str(exc)) from exc
    payload = em.to_json()
    lines = [f"{em.ring_name} {em.family} {payload['params']}", f"f = {payload['f']}"]
    if payload["generators"]:
        lines.append("generators: " + ", ".join(str(g) for g in payload["generators"]))
    if payload["matrix"]:
        lines += ["matrix:"] + ["  [" + ", ".join(r) + "]" for r in payload["matrix"]]
    lines += [f"check {k}: {'ok' if v.get('ok') else 'FAIL'}" for k, v in em.checks.items()]
    lines += [f"flag: {x}" for x in em.flags]
    _emit(args, payload, "\n".join(lines))
    return 0 if em.ok else 1


COMMANDS = {
    "validate": cmd_validate, "string": cmd_string, "band": cmd_band, "decompose": cmd_decompose,
    "iso": cmd_iso, "cusp": cmd_cusp, "catalog": cmd_catalog, "mf": cmd_mf, "family": cmd_family,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"dbc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
