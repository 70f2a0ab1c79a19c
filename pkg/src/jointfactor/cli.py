"""Command-line harness.

Exit codes: 0 success, 1 mathematical failure (witness or violated bound),
2 input error, 3 solver did not converge.
"""

import argparse
import csv
from fractions import Fraction
import io
import sys
import time
import warnings

from . import generators
from .duality import (
    diag_offdiag_constants, dual_value, feasibility_violations, primal_solve,
    reduce_to_q1, expand_tables, symmetrize_tables, achieved_value,
)
from .errors import AuditError, ConvergenceError, DegenerateError, InputError, SaturationError
from .factorisation import (
    FactorCertificate, MultiCertificate, factorise, multijoint_factorise, verify_certificate,
    verify_multi,
)
from .fields import GF, parse_field
from .heavy import build_S, estimate_constant, lightness_audit, main_estimate_ratio, verify_admissibility
from .joints import joint_summary, zhang_report
from .serialize import (
    InstanceFile, certificate_to_json, digest, dump_instance, dumps, encode_line, encode_point,
    frac, load_certificate, loads_json, multi_certificate_to_json, parse_instance, read_text,
)

# frozen CSV value columns per command, after command,seed,d,p and before pass
CSV_COLUMNS = {
    "gen": ["kind", "size"],
    "joints": ["joints", "lines", "max_N"],
    "zhang": ["lhs", "rhs", "ratio", "joints"],
    "heavy-s": ["chain_dims", "worst_product", "ratio", "instance_bound", "B_d"],
    "duality": ["primal", "dual", "gap", "exact_value"],
    "factor": ["constant", "bound", "norm", "lines", "checked"],
    "factor-multi": ["constant", "bound", "norm", "checked"],
    "verify": ["constant", "checked"],
    "diag-offdiag": ["diag_constant", "offdiag_constant", "within_bound"],
}


class Outcome:
    def __init__(self, outputs, ok=True, seed=None, d=None, p=None):
        self.outputs = outputs
        self.ok = ok
        self.seed = seed
        self.d = d
        self.p = p


def _radical(r):
    return {"exact": r.to_json(), "value": float(r)}


def _field_p(field):
    return field.p if field.is_finite else "Q"


def _read_instance(path):
    text = read_text(path)
    return parse_instance(loads_json(text, path or "<stdin>")), digest(text)


# ------------------------------------------------------------------ commands


def cmd_gen(args):
    field = parse_field(args.field) if args.field else GF(args.p)
    d = args.d
    inst = InstanceFile(field, d, seed=args.seed)
    if args.kind == "grid":
        inst.meta = {"generator": "grid", "n": args.n}
        if args.multi:
            inst.families = generators.grid_multifamily(args.n, d, field)
        else:
            inst.lines = generators.grid_family(args.n, d, field)
        inst.points = {p: 1 for p in generators.grid_points(args.n, d, field)}
        size = args.n
    elif args.seed is None:
        raise InputError(f"gen {args.kind} needs --seed")
    elif args.kind == "random-lines":
        inst.meta = {"generator": "random-lines", "count": args.count}
        inst.lines = generators.random_lines(args.seed, field, d, args.count)
        size = args.count
    elif args.kind == "random-weights":
        inst.meta = {"generator": "random-weights", "count": args.count, "max_weight": args.max_weight}
        make = generators.planted_heavy_weights if args.planted else generators.random_weights
        inst.directions = make(args.seed, field, d, args.count, args.max_weight)
        size = args.count
    else:  # random-duality
        inst.meta = {"generator": "random-duality", "nx": args.nx, "ny": args.ny}
        inst.duality = generators.random_instance(args.seed, d, args.nx, args.ny, symmetric=args.symmetric,
                                                  random_density=not args.unit_density)
        size = args.nx
    return Outcome({"instance": dump_instance(inst), "kind": args.kind, "size": size},
                   seed=args.seed, d=d, p=_field_p(field))


def cmd_joints(args, inst):
    source = inst.families if args.multi else inst.lines
    if source is None:
        inst.need("families" if args.multi else "lines")
    summary = joint_summary(source)
    counts = summary.counts
    joints = [{"point": encode_point(inst.field, x), "N": n} for x, n in counts.items()]
    lines = len(source) if not args.multi else sum(len(f) for f in source)
    return Outcome({"joints": len(counts), "lines": lines, "max_N": max(counts.values(), default=0),
                    "points": joints})


def cmd_zhang(args, inst):
    source = inst.families if args.multi else inst.lines
    if source is None:
        inst.need("families" if args.multi else "lines")
    r = zhang_report(source)
    return Outcome({"lhs": r.lhs, "rhs": r.rhs, "ratio": r.ratio, "joints": r.joints})


def cmd_heavy_s(args, inst):
    inst.need("directions")
    f = inst.directions
    S = build_S(f)
    adm = verify_admissibility(S, f)
    ratio = main_estimate_ratio(S, f)
    ledger = lightness_audit(f, S.chain)
    chain = S.chain
    out = {
        "chain_dims": "-".join(str(k) for k in chain.dims) or "empty",
        "layer_masses": [frac(F) for F in chain.layer_masses],
        "rho": [_radical(r) for r in S.rho],
        "S": [{"line": encode_line(l), "value": _radical(v)} for l, v in sorted(S.values.items())],
        "all_in_hyperplane": S.all_in_hyperplane,
        "worst_product": _radical(S.worst_product()) if S.values else None,
        "admissible": adm.ok,
        "checked": adm.checked,
        "witness": [encode_line(l) for l in adm.witness] if adm.witness else None,
        "ratio": ratio,
        "lemma_factors": [frac(a.lemma_factor) if a.lemma_factor is not None else None for a in ledger.levels],
        "worst_factors": [frac(a.worst_factor) if a.worst_factor is not None else None for a in ledger.levels],
        "betas": [frac(b) for b in ledger.betas],
        "instance_bound": ledger.instance_bound,
        "B_d": estimate_constant(f.d),
    }
    ok = adm.ok and ratio <= out["B_d"]
    return Outcome(out, ok=ok)


def cmd_duality(args, inst):
    inst.need("duality")
    original = inst.duality
    work = reduce_to_q1(original) if original.q != 1 else original
    tables, report = primal_solve(work)
    if not report.converged:
        raise ConvergenceError("primal solver did not converge", report.lower_bound, report.primal)
    exact_value = tables.value
    out = {}
    if args.symmetrize:
        ml = work.as_multilinear()
        if not ml.is_symmetric_kernel():
            raise InputError("--symmetrize needs a symmetric kernel")
        ml_tables, _ = primal_solve(ml)
        sym = symmetrize_tables(ml, ml_tables)
        out["multilinear_value"] = ml_tables.value
        out["symmetrized_value"] = sym.value
        out["symmetrized_feasible"] = not feasibility_violations(ml, sym, limit=1)
    dual = dual_value(work)
    gap = (report.primal - dual.value) / report.primal if report.primal else 0.0
    out.update({
        "primal": report.primal,
        "primal_lower": report.lower_bound,
        "dual": dual.value,
        "gap": gap,
        "exact_value": exact_value,
        "iterations": report.iterations,
        "weak_duality": all(lo <= up * (1 + 1e-12) for lo, up in report.history) and dual.value <= report.primal * (1 + 1e-9),
        "q": original.q,
    })
    if original.q != 1:
        out["norm_used"] = work.norm_used
        expanded = expand_tables(original, work, tables)
        out["original_value"] = achieved_value(original, expanded)
    ok = out["weak_duality"] and gap <= args.gap_tol
    return Outcome(out, ok=ok, d=original.d, p="")


def _cert_outputs(cert: FactorCertificate, ver):
    return {
        "constant": _radical(cert.constant),
        "bound": cert.bound,
        "norm": _radical(cert.norm),
        "lines": len(cert.lines),
        "support": len(cert.M),
        "mode": cert.mode,
        "checked": ver.checked if ver else 0,
        "verified": ver.ok if ver else None,
        "witness": _witness(cert.field, ver.witness) if ver and ver.witness else None,
    }


def _witness(field, w):
    out = {}
    for k, v in w.items():
        if k in ("x",):
            out[k] = encode_point(field, v)
        elif k == "points":
            out[k] = [encode_point(field, p) for p in v]
        elif k == "lines":
            out[k] = [encode_line(l) for l in v]
        elif k == "line":
            out[k] = encode_line(v)
        else:
            out[k] = v
    return out


def _save(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def cmd_factor(args, inst):
    inst.need("points")
    family = None
    if args.explicit:
        inst.need("lines")
        family = inst.lines
    cert = factorise(inst.points, inst.field, inst.d, family=family)
    if args.cert_out:
        _save(args.cert_out, certificate_to_json(cert))
    ver = None if args.no_verify else verify_certificate(cert, scope=args.scope, jobs=args.jobs)
    return Outcome(_cert_outputs(cert, ver), ok=ver is None or ver.ok)


def cmd_factor_multi(args, inst):
    inst.need("points", "families")
    cert = multijoint_factorise(inst.points, inst.families)
    if args.cert_out:
        _save(args.cert_out, multi_certificate_to_json(cert))
    ver = None if args.no_verify else verify_multi(cert)
    out = _cert_outputs(cert.base, ver)
    out.pop("lines")
    return Outcome(out, ok=ver is None or ver.ok)


def cmd_verify(args, _inst):
    cert = load_certificate(args.cert)
    if isinstance(cert, MultiCertificate):
        ver = verify_multi(cert)
        base = cert.base
    else:
        ver = verify_certificate(cert, scope=args.scope, jobs=args.jobs)
        base = cert
    return Outcome({"constant": _radical(base.constant), "checked": ver.checked, "verified": ver.ok,
                    "witness": _witness(base.field, ver.witness) if ver.witness else None},
                   ok=ver.ok, d=base.d, p=_field_p(base.field))


def cmd_diag_offdiag(args, inst):
    inst.need("duality")
    r = diag_offdiag_constants(inst.duality, seed=args.seed or 0, restarts=args.restarts)
    return Outcome({"diag_constant": r.diag_constant, "offdiag_constant": r.offdiag_constant,
                    "within_bound": r.within_bound}, ok=r.within_bound, d=inst.duality.d, p="")


COMMANDS = {
    "joints": cmd_joints, "zhang": cmd_zhang, "heavy-s": cmd_heavy_s, "duality": cmd_duality,
    "factor": cmd_factor, "factor-multi": cmd_factor_multi, "verify": cmd_verify,
    "diag-offdiag": cmd_diag_offdiag,
}


# ------------------------------------------------------------------ parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--timing", action="store_true", help="include wall-clock runtime")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for verification")
    common.add_argument("--seed", type=int)

    parser = argparse.ArgumentParser(prog="jointfactor", description="Joints, factorisation and duality tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate an instance")
    g.add_argument("kind", choices=["grid", "random-lines", "random-weights", "random-duality"])
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--p", type=int, default=5)
    g.add_argument("--field", help="field descriptor, overrides --p (e.g. Q, F7)")
    g.add_argument("--count", type=int, default=10)
    g.add_argument("--max-weight", type=int, default=100)
    g.add_argument("--planted", action="store_true", help="random weights concentrated near a subspace")
    g.add_argument("--multi", action="store_true", help="grid split into d direction families")
    g.add_argument("--nx", type=int, default=3)
    g.add_argument("--ny", type=int, default=3)
    g.add_argument("--symmetric", action="store_true")
    g.add_argument("--unit-density", action="store_true", help="M = 1 on every point")

    def with_input(name, help_):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("input", nargs="?", default="-", help="instance file (default stdin)")
        return s

    s = with_input("joints", "joint counts N(x)")
    s.add_argument("--multi", action="store_true", help="use the 'families' section")
    s = with_input("zhang", "both sides of the joints inequality")
    s.add_argument("--multi", action="store_true")
    with_input("heavy-s", "heavy chain, S weights, admissibility and main-estimate ratio")
    s = with_input("duality", "primal, dual and gap of a duality instance")
    s.add_argument("--gap-tol", type=float, default=1e-4)
    s.add_argument("--symmetrize", action="store_true")
    helps = {"factor": "factorisation certificate for point weights",
             "factor-multi": "per-family certificates for multijoints of the 'families' section"}
    for name in ("factor", "factor-multi"):
        s = with_input(name, helps[name])
        s.add_argument("--cert-out", help="save the certificate")
        s.add_argument("--no-verify", action="store_true")
        s.add_argument("--scope", choices=["exhaustive", "sampled"], default="exhaustive")
        if name == "factor":
            s.add_argument("--explicit", action="store_true", help="use the 'lines' section as the family")
    s = sub.add_parser("verify", parents=[common], help="re-check a saved certificate")
    s.add_argument("cert")
    s.add_argument("--scope", choices=["exhaustive", "sampled"], default="exhaustive")
    s = with_input("diag-offdiag", "diagonal and off-diagonal constants")
    s.add_argument("--restarts", type=int, default=20)
    return parser


# ------------------------------------------------------------------ output


def _csv_value(v):
    if isinstance(v, dict) and "value" in v:
        v = v["value"]
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return frac(v)
    return str(v)


def render(command, outcome, args, input_digest, runtime):
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = CSV_COLUMNS[command]
        writer.writerow(["command", "seed", "d", "p", *cols, "pass"])
        writer.writerow([command, "" if outcome.seed is None else outcome.seed,
                         "" if outcome.d is None else outcome.d,
                         "" if outcome.p is None else outcome.p,
                         *[_csv_value(outcome.outputs.get(c)) for c in cols],
                         "true" if outcome.ok else "false"])
        return buf.getvalue()
    if command == "gen" and not args.timing:
        # gen output is itself an instance file so it can be piped on
        return dumps(outcome.outputs["instance"])
    report = {"command": command, "input_sha256": input_digest, "seed": outcome.seed,
              "d": outcome.d, "p": outcome.p, "outputs": outcome.outputs, "pass": outcome.ok}
    if args.timing:
        report["runtime_s"] = round(runtime, 6)
    return dumps(report)


def _emit(text, args):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run_command(argv=None):
    """Parse, run and report; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            if args.command == "gen":
                outcome, input_digest = cmd_gen(args), None
            elif args.command == "verify":
                outcome, input_digest = cmd_verify(args, None), digest(read_text(args.cert))
            else:
                inst, input_digest = _read_instance(args.input)
                outcome = COMMANDS[args.command](args, inst)
                if outcome.d is None:
                    outcome.d = inst.d
                if outcome.p is None:
                    outcome.p = _field_p(inst.field)
                if outcome.seed is None:
                    outcome.seed = inst.seed
            if args.seed is not None:
                outcome.seed = args.seed
    except (InputError, SaturationError, DegenerateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return 3
    except AuditError as exc:
        print(f"audit failed: {exc}", file=sys.stderr)
        return 1
    runtime = time.perf_counter() - start
    text = render(args.command, outcome, args, input_digest, runtime)
    _emit(text, args)
    return 0 if outcome.ok else 1


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
