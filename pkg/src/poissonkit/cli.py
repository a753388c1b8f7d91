"""Command-line front end.

Exit codes: 0 every check passed, 1 some check failed, 2 input error,
3 nothing failed but some check was inconclusive.
"""

from __future__ import annotations

import argparse
import functools
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import catalog as cat
from . import expr as E
from .expr import Verdict
from .fields import (VectorField, divergence, is_divergence_free, is_first_integral,
                     is_inverse_jacobi_multiplier, lie_derivative, multiplier_residual, numeric_check)
from .focus import center_conditions_check, complexify, focus_quantities
from .level import LEVEL, ReductionError, branch_eigenvalues, restrict_to_level
from .numeric import (Annulus, Box, PiecewiseExpr, PiecewiseField, integrate,
                      invariant_curve_check, measure_preservation_check, random_bumps,
                      weak_multiplier_residual)
from .poisson import StructureMatrix, cross_product_field, verify_poisson

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class InputError(Exception):
    pass


# -- system specs ------------------------------------------------------------------

@dataclass
class SystemSpec:
    vars: tuple[str, ...]
    free: tuple[str, ...]
    fixed: dict[str, Fraction]
    field: VectorField | PiecewiseField
    known: dict[str, E.Expr] = field(default_factory=dict)

    def expr(self, text: str, extra_params: Sequence[str] = ()) -> E.Expr:
        e = E.parse(text, self.vars, tuple(self.free) + tuple(self.fixed) + tuple(extra_params))
        if self.fixed:
            e = E.subs(e, {k: E.const(v) for k, v in self.fixed.items()})
        return e

    @property
    def smooth(self) -> VectorField:
        if isinstance(self.field, PiecewiseField):
            raise InputError("this command needs a smooth field, the spec is piecewise")
        return self.field


def _parse_params(raw) -> tuple[tuple[str, ...], dict[str, Fraction]]:
    free, fixed = [], {}
    items = raw.items() if isinstance(raw, dict) else ((p, "free") for p in raw or ())
    for name, val in items:
        if val == "free":
            free.append(name)
        else:
            try:
                fixed[name] = Fraction(str(val))
            except (ValueError, ZeroDivisionError):
                raise InputError(f"parameter {name!r}: expected 'free' or a rational, got {val!r}") from None
    return tuple(free), fixed


def spec_from_dict(d: dict) -> SystemSpec:
    try:
        vars_ = tuple(d["vars"])
    except KeyError:
        raise InputError("spec needs a 'vars' list") from None
    free, fixed = _parse_params(d.get("params", {}))
    allp = free + tuple(fixed)
    fixmap = {k: E.const(v) for k, v in fixed.items()}

    def vf(comps):
        if len(comps) != len(vars_):
            raise InputError(f"field has {len(comps)} components for {len(vars_)} variables")
        Y = VectorField.parse(list(comps), vars_, allp)
        return Y.subs(fixmap) if fixmap else Y

    if "pieces" in d:
        pc = d["pieces"]
        gamma = E.subs(E.parse(pc["gamma"], vars_, allp), fixmap)
        F: VectorField | PiecewiseField = PiecewiseField(gamma, vf(pc["plus"]), vf(pc["minus"]))
    elif "field" in d:
        F = vf(d["field"])
    else:
        raise InputError("spec needs 'field' or 'pieces'")
    spec = SystemSpec(vars_, free, fixed, F)
    for name, text in (d.get("known") or {}).items():
        spec.known[name] = spec.expr(text)
    return spec


def load_spec(ref: str) -> SystemSpec:
    """A JSON file path, or catalog:NAME for a catalog field."""
    if ref.startswith("catalog:"):
        entry = cat.get(ref.split(":", 1)[1])
        F = entry.field
        known = {k: v.value for k, v in entry.known.items() if isinstance(v.value, E.Expr)}
        return SystemSpec(tuple(F.vars), tuple(F.params), {}, F, known)
    try:
        with open(ref) as fh:
            d = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read spec {ref!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"spec {ref!r} is not valid JSON: {exc}") from None
    return spec_from_dict(d)


# -- reports ---------------------------------------------------------------------------

@dataclass
class Report:
    command: list[str]
    verdicts: dict[str, str] = field(default_factory=dict)
    values: dict[str, object] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)
    seed: int | None = None
    notes: list[str] = field(default_factory=list)
    timing: float = 0.0

    def verdict(self, name: str, v) -> None:
        if isinstance(v, Verdict):
            v = v.value
        elif isinstance(v, bool):
            v = "true" if v else "false"
        self.verdicts[name] = v

    def exit_code(self) -> int:
        vs = set(self.verdicts.values())
        if "false" in vs:
            return EXIT_FAIL
        if "inconclusive" in vs:
            return EXIT_INCONCLUSIVE
        return EXIT_PASS

    def as_json(self) -> str:
        d = {"command": self.command, "verdicts": self.verdicts, "values": self.values,
             "tolerances": self.tolerances, "seed": self.seed, "notes": self.notes,
             "timing": round(self.timing, 6), "exit_code": self.exit_code()}
        return json.dumps(d, indent=2, sort_keys=True, default=str)

    def text(self) -> str:
        lines = []
        for k, v in self.values.items():
            if isinstance(v, (list, tuple)):
                lines.append(f"{k}:")
                lines += [f"  {x}" for x in v]
            elif isinstance(v, dict):
                lines.append(f"{k}:")
                lines += [f"  {a} = {b}" for a, b in v.items()]
            else:
                lines.append(f"{k} = {v}")
        for k, v in self.verdicts.items():
            tag = {"true": "PASS", "false": "FAIL"}.get(v, "INCONCLUSIVE")
            lines.append(f"[{tag}] {k}")
        if self.tolerances:
            lines.append("tolerances: " + ", ".join(f"{k}={v:g}" for k, v in self.tolerances.items()))
        if self.seed is not None:
            lines.append(f"seed: {self.seed}")
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines)


def _floats(text: str, n: int | None = None, what: str = "value list") -> list[float]:
    try:
        out = [float(Fraction(x.strip())) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad {what}: {text!r}") from None
    if n is not None and len(out) != n:
        raise InputError(f"{what} needs {n} numbers, got {len(out)}")
    return out


def _box(text: str, dim: int) -> Box:
    parts = [p for p in text.split(";") if p.strip()]
    if len(parts) == 1 and dim > 1:
        parts = parts * dim
    if len(parts) != dim:
        raise InputError(f"box needs {dim} intervals 'lo,hi' separated by ';'")
    return Box(tuple(tuple(_floats(p, 2, "interval")) for p in parts))


def _param_values(spec: SystemSpec, assignments: Sequence[str]) -> dict[str, float]:
    vals = {}
    for a in assignments or ():
        if "=" not in a:
            raise InputError(f"expected NAME=VALUE, got {a!r}")
        k, v = a.split("=", 1)
        vals[k.strip()] = float(Fraction(v.strip()))
    F = spec.field
    needed = set(F.params)
    missing = needed - set(vals)
    if missing:
        raise InputError(f"numeric commands need values for free parameters {sorted(missing)} (use --param)")
    return vals


def _with_numeric_fallback(report: Report, name: str, verdict: Verdict, residual: E.Expr, args) -> None:
    report.verdict(name, verdict)
    if verdict is Verdict.INCONCLUSIVE:
        ok, n = numeric_check(residual, points=args.numeric_points, tol=args.numeric_tol, seed=args.seed)
        report.notes.append(f"{name}: symbolic test inconclusive; numeric fallback on {n} points "
                            f"{'vanishes' if ok else 'does not vanish'} (tol {args.numeric_tol:g})")
        report.tolerances["numeric"] = args.numeric_tol


# -- commands -----------------------------------------------------------------------------

def cmd_check(args, report: Report):
    spec = load_spec(args.spec)
    Y = spec.smooth
    if args.multiplier:
        V = spec.expr(args.multiplier)
        _with_numeric_fallback(report, "multiplier", is_inverse_jacobi_multiplier(Y, V),
                               multiplier_residual(Y, V), args)
    if args.integral:
        f = spec.expr(args.integral)
        _with_numeric_fallback(report, "first-integral", is_first_integral(Y, f), lie_derivative(Y, f), args)
    if args.divfree:
        _with_numeric_fallback(report, "divergence-free", is_divergence_free(Y), divergence(Y), args)
    if not report.verdicts:
        raise InputError("check needs --multiplier, --integral or --divfree")


def cmd_reduce(args, report: Report):
    spec = load_spec(args.spec)
    Y = spec.smooth
    D = spec.expr(args.integral)
    Z = restrict_to_level(Y, D, args.order)
    report.values["phi"] = str(Z.level.as_expr())
    report.values["exact"] = Z.exact
    report.values["order"] = args.order
    comps = Z.as_field().components
    report.values["Z_h"] = [str(c) for c in comps]
    try:
        br = branch_eigenvalues(Z)
        report.values["omega(h)"] = str(br.omega.poly)
        report.values["re(h)"] = str(br.real_part.poly)
    except ReductionError as exc:
        report.notes.append(f"branch eigenvalues unavailable: {exc}")
    report.verdict("reduction", True)


def _subs_map(spec: SystemSpec, items: Sequence[str]) -> dict[str, E.Expr]:
    out = {}
    for a in items or ():
        if "=" not in a:
            raise InputError(f"expected NAME=EXPR, got {a!r}")
        k, v = a.split("=", 1)
        out[k.strip()] = spec.expr(v.strip(), (LEVEL,))
    return out


def cmd_focus(args, report: Report):
    spec = load_spec(args.spec)
    Y = spec.smooth
    if Y.dim == 3:
        if not args.integral:
            raise InputError("3D systems need --integral to reduce first")
        Z = restrict_to_level(Y, spec.expr(args.integral), args.order)
        if not Z.exact:
            report.notes.append(f"reduced family truncated at order {args.order}")
    elif Y.dim == 2:
        Z = Y
    else:
        raise InputError("focus needs a planar or 3D system")
    subs = _subs_map(spec, args.subs)
    if subs:
        verdict, rep = center_conditions_check(Z, subs, args.k)
        report.values["conditions"] = {k: str(v) for k, v in subs.items()}
        report.values["summary"] = verdict
    else:
        rep = focus_quantities(complexify(Z), args.k)
    report.values["g"] = {f"g_{j}": str(g) for j, g in enumerate(rep.quantities, start=1)}
    report.values["vanishing"] = rep.vanishing()
    report.notes.append(rep.note)
    report.verdict("computed", True)


def _matrix_from_json(path: str, spec: SystemSpec) -> StructureMatrix:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read structure matrix {path!r}: {exc}") from None
    rows = d["entries"] if isinstance(d, dict) else d
    return StructureMatrix(spec.vars, tuple(tuple(spec.expr(x) for x in r) for r in rows))


def cmd_poisson(args, report: Report):
    if args.action == "build":
        vars_ = tuple(v.strip() for v in args.vars.split(","))
        ps = tuple(p.strip() for p in (args.params or "").split(",") if p.strip())
        H1, H2, eta = (E.parse(t, vars_, ps) for t in (args.h1, args.h2, args.eta))
        Y = cross_product_field(H1, H2, eta, vars_, ps)
        report.values["field"] = [str(c) for c in Y.components]
        report.verdict("first-integral H1", is_first_integral(Y, H1))
        report.verdict("first-integral H2", is_first_integral(Y, H2))
        return
    if not args.spec:
        raise InputError("poisson verify needs a spec")
    spec = load_spec(args.spec)
    Y = spec.smooth
    casimirs = [spec.expr(c) for c in args.casimir or ()]
    if args.catalog:
        entry = cat.get(args.catalog)
        name = args.known or next((k for k, v in entry.known.items() if v.kind == "poisson"), None)
        if name is None or entry.known[name].kind != "poisson":
            raise InputError(f"{args.catalog} has no structure matrix {args.known or ''}".strip())
        item = entry.known[name]
        m = entry.substitutions(item.requires)
        fix = {k: E.const(v) for k, v in spec.fixed.items()}
        J = StructureMatrix(item.value.vars, tuple(tuple(E.subs(E.subs(x, m), fix) for x in r)
                                                    for r in item.value.entries))
        H = E.subs(spec.expr(args.H), m) if args.H else E.subs(E.subs(entry.known[item.refs["H"]].value, m), fix)
        if not casimirs:
            casimirs = [E.subs(E.subs(entry.known[c].value, m), fix) for c in item.refs.get("casimirs", ())]
        if m:
            Y = Y.subs(m)
            report.notes.append("parameter predicate applied: " + ", ".join(item.requires))
    elif args.J:
        J = _matrix_from_json(args.J, spec)
        if not args.H:
            raise InputError("--H is required with --J")
        H = spec.expr(args.H)
    else:
        raise InputError("poisson verify needs --J FILE or --catalog NAME")
    cert = verify_poisson(J, H, Y, casimirs)
    report.values["H"] = str(H)
    for k, v in cert.checks.items():
        report.verdict(k, v)


def cmd_measure(args, report: Report):
    spec = load_spec(args.spec)
    Y = spec.smooth
    V = spec.expr(args.multiplier)
    pv = _param_values(spec, args.param)
    if args.annulus:
        cx, cy, r0, r1 = _floats(args.annulus, 4, "annulus")
        region = Annulus((cx, cy), r0, r1)
    elif args.box:
        region = _box(args.box, Y.dim)
    else:
        raise InputError("measure needs --box or --annulus")
    rep = measure_preservation_check(Y, V, region, args.t, args.samples, args.tol, args.seed, pv)
    report.seed = args.seed
    report.values.update({"drift": rep.drift, "I0": rep.initial, "It": rep.transported,
                          "samples": rep.samples, "t": rep.t})
    report.tolerances.update({"rk_tol": args.tol, "threshold": args.threshold})
    report.verdict("measure-preserved", rep.drift <= args.threshold)


def cmd_weak(args, report: Report):
    spec = load_spec(args.spec)
    F = spec.field
    pv = _param_values(spec, args.param)
    if args.W:
        W = spec.expr(args.W)
    elif args.W_plus and args.W_minus:
        if args.gamma:
            gamma = spec.expr(args.gamma)
        elif isinstance(F, PiecewiseField):
            gamma = F.gamma
        else:
            raise InputError("a piecewise W on a smooth field needs --gamma")
        W = PiecewiseExpr(gamma, spec.expr(args.W_plus), spec.expr(args.W_minus))
    else:
        raise InputError("weak needs --W or both --W-plus and --W-minus")
    box = _box(args.box, 2).bounds
    rlo, rhi = _floats(args.radius, 2, "radius range")
    bumps = random_bumps(args.bumps, box, (rlo, rhi), args.seed)
    res = []
    for b in bumps:
        res.append(weak_multiplier_residual(F, W, b, args.quad_tol, pv))
    report.seed = args.seed
    report.values["residuals"] = [f"center=({b.center[0]:.6f}, {b.center[1]:.6f}) radius={b.radius:.6f} "
                                  f"residual={r:.3e}" for b, r in zip(bumps, res)]
    report.values["max_residual"] = max(abs(r) for r in res)
    report.tolerances.update({"quad_tol": args.quad_tol, "threshold": args.threshold})
    report.verdict("weak-multiplier", max(abs(r) for r in res) <= args.threshold)
    if isinstance(F, PiecewiseField) or isinstance(W, PiecewiseExpr):
        gamma = F.gamma if isinstance(F, PiecewiseField) else W.gamma
        report.verdict("gamma-invariant", invariant_curve_check(F, gamma, box=box, params=pv))


def cmd_simulate(args, report: Report):
    spec = load_spec(args.spec)
    pv = _param_values(spec, args.param)
    x0 = _floats(args.x0, len(spec.vars), "initial point")
    tr = integrate(spec.field, x0, args.t, args.tol, pv)
    report.values["final"] = [float(v) for v in tr.final]
    report.values["steps"] = tr.steps
    report.values["events"] = [f"t={e.t:.12g} x={np.array2string(e.x, precision=10)} {e.from_side:+d}->{e.to_side:+d}"
                               for e in tr.events]
    report.tolerances["tol"] = args.tol
    if args.dump:
        np.savetxt(args.dump, np.column_stack([tr.t, tr.x]), header="t " + " ".join(spec.vars))
        report.notes.append(f"trajectory written to {args.dump}")
    report.verdict("integrated", True)


def cmd_catalog(args, report: Report):
    if args.action == "list":
        report.values["entries"] = cat.names()
        return
    if not args.name:
        raise InputError("catalog show needs a name")
    try:
        entry = cat.get(args.name)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from None
    F = entry.field
    report.values["vars"] = list(F.vars)
    report.values["params"] = list(F.params)
    if isinstance(F, PiecewiseField):
        report.values["gamma"] = str(F.gamma)
        report.values["plus"] = [str(c) for c in F.plus.components]
        report.values["minus"] = [str(c) for c in F.minus.components]
    else:
        report.values["field"] = [str(c) for c in F.components]
    report.values["predicates"] = {k: ", ".join(f"{a} = {b}" for a, b in p.subs.items())
                                   for k, p in entry.predicates.items()}
    objs = {}
    for k, item in entry.known.items():
        val = item.value
        if isinstance(val, tuple):
            val = "(" + ", ".join(str(x) for x in val) + ")"
        tags = [item.kind] + ([f"requires {'+'.join(item.requires)}"] if item.requires else [])
        tags += [f"region {item.region}"] if item.region else []
        objs[k] = f"{val}  [{'; '.join(tags)}]"
    report.values["known"] = objs
    report.notes += list(entry.notes)
    for k, item in entry.known.items():
        if item.note:
            report.notes.append(f"{k}: {item.note}")
    if args.verify:
        for k in entry.known:
            report.verdict(k, entry.verify(k))


# -- argument parsing ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="FILE", help="write the machine-readable report to FILE ('-' for stdout)")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--quiet", action="store_true", help="suppress the human-readable report")
    p = argparse.ArgumentParser(prog="poissonkit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    add = functools.partial(sub.add_parser, parents=[common])

    def numeric_flags(sp):
        sp.add_argument("--numeric-points", type=int, default=200)
        sp.add_argument("--numeric-tol", type=float, default=1e-9)

    c = add("check", help="multiplier, first integral or divergence-free checks")
    c.add_argument("spec")
    c.add_argument("--multiplier", metavar="EXPR")
    c.add_argument("--integral", metavar="EXPR")
    c.add_argument("--divfree", action="store_true")
    numeric_flags(c)
    c.set_defaults(func=cmd_check)

    r = add("reduce", help="restrict a 3D field to the level sets of a first integral")
    r.add_argument("spec")
    r.add_argument("--integral", required=True, metavar="EXPR")
    r.add_argument("--order", type=int, default=8)
    r.set_defaults(func=cmd_reduce)

    f = add("focus", help="focus quantities g_1..g_k")
    f.add_argument("spec")
    f.add_argument("--k", type=int, default=3)
    f.add_argument("--integral", metavar="EXPR")
    f.add_argument("--order", type=int, default=8)
    f.add_argument("--subs", nargs="*", metavar="NAME=EXPR")
    f.set_defaults(func=cmd_focus)

    q = add("poisson", help="verify or build Poisson structures")
    q.add_argument("action", choices=["verify", "build"])
    q.add_argument("spec", nargs="?")
    q.add_argument("--J", metavar="FILE")
    q.add_argument("--H", metavar="EXPR")
    q.add_argument("--casimir", action="append", metavar="EXPR")
    q.add_argument("--catalog", metavar="NAME")
    q.add_argument("--known", metavar="NAME", help="structure matrix name inside the catalog entry")
    q.add_argument("--h1")
    q.add_argument("--h2")
    q.add_argument("--eta", default="1")
    q.add_argument("--vars", default="x1,x2,x3")
    q.add_argument("--params", default="")
    q.set_defaults(func=cmd_poisson)

    m = add("measure", help="Monte-Carlo transport of the measure dx/V")
    m.add_argument("spec")
    m.add_argument("--multiplier", required=True, metavar="EXPR")
    m.add_argument("--box", metavar="LO,HI;LO,HI;...")
    m.add_argument("--annulus", metavar="CX,CY,RIN,ROUT")
    m.add_argument("--t", type=float, default=1.0)
    m.add_argument("--samples", type=int, default=10_000)
    m.add_argument("--tol", type=float, default=1e-10)
    m.add_argument("--threshold", type=float, default=1e-5)
    m.add_argument("--param", action="append", metavar="NAME=VALUE")
    m.set_defaults(func=cmd_measure)

    w = add("weak", help="weak multiplier residuals on random bumps")
    w.add_argument("spec")
    w.add_argument("--W", metavar="EXPR")
    w.add_argument("--W-plus", dest="W_plus", metavar="EXPR")
    w.add_argument("--W-minus", dest="W_minus", metavar="EXPR")
    w.add_argument("--gamma", metavar="EXPR")
    w.add_argument("--bumps", type=int, default=10)
    w.add_argument("--box", default="-1,1;-1,1")
    w.add_argument("--radius", default="0.2,0.8")
    w.add_argument("--quad-tol", dest="quad_tol", type=float, default=1e-10)
    w.add_argument("--threshold", type=float, default=1e-6)
    w.add_argument("--param", action="append", metavar="NAME=VALUE")
    w.set_defaults(func=cmd_weak)

    s = add("simulate", help="integrate one trajectory")
    s.add_argument("spec")
    s.add_argument("--x0", required=True)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--param", action="append", metavar="NAME=VALUE")
    s.add_argument("--dump", metavar="FILE")
    s.set_defaults(func=cmd_simulate)

    k = add("catalog", help="list or show built-in example systems")
    k.add_argument("action", choices=["list", "show"])
    k.add_argument("name", nargs="?")
    k.add_argument("--verify", action="store_true")
    k.set_defaults(func=cmd_catalog)
    return p


_VALUE_FLAGS = {"--box", "--annulus", "--x0", "--radius", "--t", "--eta", "--h1", "--h2", "--H", "--W",
                "--W-plus", "--W-minus", "--gamma", "--multiplier", "--integral", "--casimir"}


def _join_negative_values(argv: list[str]) -> list[str]:
    """Let values such as '-1,1;-1,1' or '-x2' follow a flag without '='."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    report = Report(command=argv)
    start = time.perf_counter()
    try:
        args.func(args, report)
    except (InputError, E.ParseError, ReductionError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    report.timing = time.perf_counter() - start
    if not args.quiet:
        print(report.text())
    if args.json:
        if args.json == "-":
            print(report.as_json())
        else:
            with open(args.json, "w") as fh:
                fh.write(report.as_json() + "\n")
    return report.exit_code()


if __name__ == "__main__":
    sys.exit(main())
