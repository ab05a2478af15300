"""Command-line front end: ``odelie <subcommand> --eq E1 ...``.

Exit status: 0 on PASS/success, 1 on FAIL (or INCONCLUSIVE), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from odelie import catalog as cat
from odelie.conslaw import NotAMultiplier, association_table, association_value, classify_equivalence, extract_multiplier
from odelie.equations import DifferenceEquation, PreconditionViolated, iterate_orbit
from odelie.integrals import FirstIntegral, find_integrals_ansatz, verify_first_integral
from odelie.nullspace import InsufficientSamples
from odelie.numeric import NonFinite, ZeroTestConfig, default_seed, is_zero
from odelie.parser import ParseError, parse
from odelie.symmetry import Characteristic, deteq_residual, find_symmetries_ansatz, verify_symmetry


class UsageError(Exception):
    pass


def _config(args) -> ZeroTestConfig:
    seed = default_seed() if args.seed is None else int(args.seed, 0)
    return ZeroTestConfig(samples=args.samples, tol=args.tol, seed=seed, min_finite=max(1, min(30, args.samples)))


def _equation(args):
    """Return (entry or None, equation) for --eq NAME|FILE."""
    if args.eq is None:
        raise UsageError("--eq is required")
    if args.eq in cat.catalog():
        entry = cat.get(args.eq)
        return entry, entry.equation
    path = Path(args.eq)
    if not path.exists():
        raise UsageError(f"unknown equation {args.eq!r} (use E1, E2, E3 or a JSON file)")
    try:
        return None, DifferenceEquation.load(path)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad equation file {path}: {exc}") from exc


def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _report_out(args, rep) -> int:
    d = rep.to_json()
    _emit(args, d, f"{d['verdict']}  {rep.claim}  (max residual {rep.max_residual:.3g}, seed {d['seed']})")
    return 0 if d["verdict"] == "PASS" else 1


def _basis(args, default):
    if args.basis:
        return [parse(s) for s in args.basis.split(";") if s.strip()]
    if not default:
        raise UsageError("--basis is required for this equation")
    return default


def _characteristic(entry, text) -> Characteristic:
    Q, label = cat.resolve_expr(entry, text, "q")
    return Characteristic(Q, label)


def cmd_verify_symmetry(args) -> int:
    entry, eq = _equation(args)
    return _report_out(args, verify_symmetry(eq, _characteristic(entry, args.q), _config(args)))


def cmd_verify_integral(args) -> int:
    entry, eq = _equation(args)
    phi, _ = cat.resolve_expr(entry, args.phi, "phi")
    return _report_out(args, verify_first_integral(eq, phi, _config(args)))


def cmd_deteq(args) -> int:
    entry, eq = _equation(args)
    c = _characteristic(entry, args.q)
    rep = is_zero(deteq_residual(eq, c), _config(args), eq.domain, claim=f"{c.label} solves the determining equation", width=eq.order)
    return _report_out(args, rep)


def _ansatz_out(args, res, kind: str) -> int:
    payload = {
        "dimension": res.dimension,
        "basis": [str(b) for b in res.basis],
        "vectors": res.vectors.tolist(),
        "singularValues": res.singular_values.tolist(),
        "reports": [r.to_json() for r in res.reports],
    }
    lines = [f"{kind} nullspace dimension {res.dimension}"]
    for i, r in enumerate(res.reports):
        coeffs = ", ".join(f"{c:+.6g}" for c in res.vectors[i])
        lines.append(f"  [{r.verdict}] ({coeffs})")
    _emit(args, payload, "\n".join(lines))
    return 0 if res.all_verified() else 1


def cmd_find_symmetries(args) -> int:
    entry, eq = _equation(args)
    basis = _basis(args, entry.symmetry_basis if entry else None)
    return _ansatz_out(args, find_symmetries_ansatz(eq, basis, _config(args)), "symmetry")


def cmd_find_integrals(args) -> int:
    entry, eq = _equation(args)
    basis = _basis(args, entry.integral_basis if entry else None)
    return _ansatz_out(args, find_integrals_ansatz(eq, basis, _config(args)), "first-integral")


def cmd_multiplier(args) -> int:
    entry, eq = _equation(args)
    phi, label = cat.resolve_expr(entry, args.phi, "phi")
    try:
        m = extract_multiplier(eq, phi, _config(args))
    except NotAMultiplier as exc:
        _emit(args, {"claim": f"multiplier of {label}", "verdict": "FAIL", "error": str(exc)}, f"FAIL  {exc}")
        return 1
    _emit(args, {"integral": label, "equation": eq.name, "multiplier": str(m.lam)}, str(m.lam))
    return 0


def cmd_associate(args) -> int:
    entry, eq = _equation(args)
    cfg = _config(args)
    if args.q and args.phi:
        Q, ql = cat.resolve_expr(entry, args.q, "q")
        phi, pl = cat.resolve_expr(entry, args.phi, "phi")
        av = association_value(Q, phi, eq.order, eq, cfg)
        _emit(args, {"symmetry": ql, "integral": pl, "value": str(av), "constant": av.is_constant}, str(av))
        return 0
    if entry is None:
        raise UsageError("associate needs --q and --phi for equation files")
    table = association_table(eq, entry.symmetries, entry.integrals, cfg)
    shown = [[str(e) if e.is_constant or e.same else "(varies)" for e in row] for row in table.entries]
    width = max(len(c) for c in table.cols + [s for row in shown for s in row]) + 2
    lines = [" " * 6 + "".join(f"{c:>{width}}" for c in table.cols)]
    for label, row in zip(table.rows, shown):
        lines.append(f"{label:<6}" + "".join(f"{s:>{width}}" for s in row))
    _emit(args, table.to_json(), "\n".join(lines))
    return 0


def cmd_classify(args) -> int:
    entry, eq = _equation(args)
    if args.phi:
        integrals = [cat.resolve_expr(entry, s.strip(), "phi")[0] for s in args.phi.split(";") if s.strip()]
        labels = [s.strip() for s in args.phi.split(";") if s.strip()]
        integrals = [FirstIntegral(p, lab) for p, lab in zip(integrals, labels)]
    elif entry is not None:
        integrals = entry.integrals
    else:
        raise UsageError("classify needs --phi for equation files")
    try:
        cl = classify_equivalence(integrals, eq, _config(args))
    except NotAMultiplier as exc:
        _emit(args, {"verdict": "FAIL", "error": str(exc)}, f"FAIL  {exc}")
        return 1
    payload = {"rank": cl.rank, "groups": cl.groups, "multipliers": [str(m.lam) for m in cl.multipliers]}
    _emit(args, payload, f"rank {cl.rank}; classes: " + " | ".join("{" + ", ".join(g) + "}" for g in cl.groups))
    return 0


def cmd_orbit(args) -> int:
    entry, eq = _equation(args)
    try:
        init = [float(x) for x in args.init.split(",")]
    except ValueError as exc:
        raise UsageError(f"--init must be comma-separated numbers: {exc}") from exc
    if len(init) != eq.order:
        raise UsageError(f"--init needs {eq.order} values")
    if eq.n0_min is not None and args.n0 < eq.n0_min:
        raise UsageError(f"{eq.name} orbits need n0 >= {eq.n0_min} (coefficient poles)")
    try:
        orb = iterate_orbit(eq, init, args.n0, args.steps)
    except NonFinite as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    vals = [float(v) for v in orb.values]
    _emit(args, {"equation": eq.name, "n0": orb.n0, "values": vals}, ",".join(f"{v:.15g}" for v in vals))
    return 0


def cmd_catalog(args) -> int:
    cfg = _config(args)
    if args.dump:
        print(json.dumps({k: e.to_json() for k, e in cat.catalog().items()}, indent=2))
        return 0
    entries = [cat.get(args.eq)] if args.eq else None
    reports = cat.run_catalog(entries, cfg, discovery=not args.no_discovery)
    if args.json:
        print(json.dumps([r.to_json() for r in reports], indent=2))
    else:
        for r in reports:
            d = r.to_json()
            print(f"{d['verdict']:<13} {r.claim}")
        failed = sum(r.to_json()["verdict"] != "PASS" for r in reports)
        print(f"{len(reports) - failed}/{len(reports)} passed")
    return 0 if all(r.to_json()["verdict"] == "PASS" for r in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eq", help="catalog name (E1, E2, E3) or equation JSON file")
    common.add_argument("--samples", type=int, default=50)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--seed", default=None, help="PRNG seed (default 0x5EED or $ODELIE_SEED)")
    common.add_argument("--json", action="store_true", help="emit JSON reports")

    p = argparse.ArgumentParser(prog="odelie", description="Symmetries and first integrals of difference equations")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    add("verify-symmetry", cmd_verify_symmetry, "check a characteristic Q").add_argument("--q", required=True)
    add("verify-integral", cmd_verify_integral, "check a first integral").add_argument("--phi", required=True)
    add("deteq", cmd_deteq, "zero-test the determining equation").add_argument("--q", required=True)
    add("find-symmetries", cmd_find_symmetries, "ansatz search for characteristics").add_argument(
        "--basis", help="';'-separated basis expressions"
    )
    add("find-integrals", cmd_find_integrals, "ansatz search for first integrals").add_argument(
        "--basis", help="';'-separated basis expressions"
    )
    add("multiplier", cmd_multiplier, "extract the multiplier of a first integral").add_argument("--phi", required=True)
    sp = add("associate", cmd_associate, "X phi values")
    sp.add_argument("--q")
    sp.add_argument("--phi")
    add("classify", cmd_classify, "equivalence classes of first integrals").add_argument(
        "--phi", help="';'-separated integrals (labels or expressions)"
    )
    sp = add("orbit", cmd_orbit, "iterate an orbit")
    sp.add_argument("--init", required=True)
    sp.add_argument("--steps", type=int, default=10)
    sp.add_argument("--n0", type=int, default=1)
    sp = add("catalog", cmd_catalog, "verify every catalogued claim")
    sp.add_argument("--dump", action="store_true", help="print the catalog as JSON")
    sp.add_argument("--no-discovery", action="store_true", help="skip the ansatz searches")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError, PreconditionViolated, InsufficientSamples) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    np.seterr(all="ignore")
    raise SystemExit(main())
