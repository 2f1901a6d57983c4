"""Command-line interface.

Every command prints a JSON run report (``command``, ``scenario``,
``input_hash``, ``results``, ``timing``). Inequalities travel in the
catalogue text format; behaviours as JSON ``{"scenario": "3,2,2,2",
"coords": ["1/2", ...]}``. Exit codes: 0 success, 1 usage or parse error,
2 resource or convergence failure.
"""

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import time
from fractions import Fraction

import numpy as np

from . import catalog, finemodel, polytope, quantum, symmetry
from .errors import BellscopeError, NonConvergence, ParseError, ResourceError
from .scenario import CGVector, Scenario

log = logging.getLogger("bellscope")


# serialisation -------------------------------------------------------------------

def fmt_float(x):
    return float(f"{x:.12g}")


def fmt_rational(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _jsonable(x):
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return fmt_rational(x)
    if isinstance(x, (float, np.floating)):
        return fmt_float(float(x))
    if isinstance(x, complex):
        return [fmt_float(x.real), fmt_float(x.imag)]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Scenario):
        return f"{x.mA},{x.mB},{x.nA},{x.nB}"
    raise TypeError(f"cannot serialise {type(x).__name__}")


def behavior_to_json(v):
    return {"scenario": _jsonable(v.scenario), "coords": [fmt_rational(c) for c in v.coords]}


def behavior_from_json(data):
    try:
        s = Scenario.parse(data["scenario"])
        coords = tuple(Fraction(c) for c in data["coords"])
        return CGVector(s, coords)
    except (KeyError, ValueError, TypeError, ZeroDivisionError) as exc:
        raise ParseError(f"bad behaviour file: {exc}") from None


def inequality_summary(q):
    return {"label": q.label, "scenario": q.scenario, "bound": q.bound,
            "coeffs": list(q.coeffs), "text": catalog.emit(q)}


def run_report(command, scenario, inputs, results, seconds):
    digest = hashlib.sha256(json.dumps(_jsonable(inputs), sort_keys=True).encode()).hexdigest()
    return {"command": command, "scenario": _jsonable(scenario), "input_hash": digest[:16],
            "results": _jsonable(results), "timing": {"seconds": round(seconds, 3)}}


def _emit_report(report, out=None):
    out = out or sys.stdout
    out.write(json.dumps(report, indent=2, sort_keys=True) + "\n")


# argument helpers --------------------------------------------------------------

def _scenario(text):
    try:
        return Scenario.parse(text)
    except (ValueError, BellscopeError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _dims(text):
    try:
        dims = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}") from None
    if len(dims) != 2:
        raise argparse.ArgumentTypeError("dims take the form dA,dB")
    return dims


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _load_inequality(args):
    if getattr(args, "family", None):
        return catalog.make(args.family)
    if getattr(args, "file", None):
        return catalog.parse(_read(args.file))
    raise ParseError("give --family or --file")


# commands --------------------------------------------------------------------------

def cmd_enumerate(args):
    t = time.monotonic()
    facets = polytope.enumerate_facets(args.scenario, cap_seconds=args.cap_seconds)
    text = "\n".join(catalog.emit(q) for q in facets)
    if args.out == "-":
        sys.stdout.write(text)
        report_out = sys.stderr
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
        report_out = sys.stdout
    _emit_report(run_report("enumerate", args.scenario, {"scenario": args.scenario},
                            {"facets": len(facets), "output": args.out},
                            time.monotonic() - t), report_out)


def cmd_classify(args):
    t = time.monotonic()
    facets = catalog.parse_many(_read(args.file))
    if not facets:
        raise ParseError("no inequalities in input")
    rep = symmetry.classify_orbits(facets, labeler=catalog.identify)
    classes = [{"label": c.label, "size": c.size, "canonical": catalog.emit(c.canonical)}
               for c in rep.classes]
    results = {"total": rep.total, "group_order": rep.group_order, "classes": classes,
               "family_sizes": rep.family_sizes()}
    if args.table:
        for c in rep.classes:
            print(f"{c.label:<14} {c.size:>7}")
        print(f"{'total':<14} {rep.total:>7}")
        return
    _emit_report(run_report("classify", rep.scenario,
                            {"facets": [list(q.coeffs) + [q.bound] for q in facets]},
                            results, time.monotonic() - t))


def _measurement_payload(M):
    out = {"a": [[np.round(p, 12) for p in s] for s in M.a],
           "b": [[np.round(p, 12) for p in s] for s in M.b]}
    if M.dims == (2, 2):
        out["bloch"] = M.bloch_vectors()
    return out


def cmd_qmax(args):
    t = time.monotonic()
    q = _load_inequality(args)
    inputs = {"coeffs": list(q.coeffs), "dims": args.dims, "restarts": args.restarts,
              "seed": args.seed, "rank_one": args.rank_one}
    try:
        res = quantum.seesaw_maximize(q, args.dims, args.restarts, args.seed,
                                      rank_one=args.rank_one, threads=args.threads)
        status = 0
    except NonConvergence as exc:
        res = exc.result
        status = 2
    state = res.state.matrix
    results = {"value": res.value, "violation": res.value - q.bound, "converged": res.converged,
               "restart": res.restart, "iterations": res.iterations,
               "state": np.round(state, 12),
               "measurements": _measurement_payload(res.measurements)}
    _emit_report(run_report("qmax", q.scenario, inputs, results, time.monotonic() - t))
    return status


def cmd_lhv_bound(args):
    t = time.monotonic()
    q = _load_inequality(args)
    value = polytope.lhv_bound(q.coeffs, q.scenario)
    _emit_report(run_report("lhv-bound", q.scenario, {"coeffs": list(q.coeffs)},
                            {"lhv_bound": value, "stated_bound": q.bound,
                             "tight": value == q.bound}, time.monotonic() - t))


def cmd_facet_check(args):
    t = time.monotonic()
    qs = catalog.parse_many(_read(args.file))
    if not qs:
        raise ParseError("no inequalities in input")
    rows = []
    for q in qs:
        lhv = polytope.lhv_bound(q.coeffs, q.scenario)
        row = {"label": q.label, "scenario": q.scenario, "lhv_bound": lhv, "valid": lhv <= q.bound}
        if lhv <= q.bound:
            cert = polytope.is_facet(q)
            row.update(facet=cert.is_facet, affine_rank=cert.affineRank,
                       tight_vertices=len(cert.tightVertexIndices))
        else:
            row["facet"] = False
        rows.append(row)
    _emit_report(run_report("facet-check", qs[0].scenario,
                            {"inequalities": [list(q.coeffs) + [q.bound] for q in qs]},
                            {"checked": rows, "all_facets": all(r["facet"] for r in rows)},
                            time.monotonic() - t))


def cmd_fine_certify(args):
    t = time.monotonic()
    try:
        v = behavior_from_json(json.loads(_read(args.file)))
    except json.JSONDecodeError as exc:
        raise ParseError(f"behaviour file is not JSON: {exc}") from None
    local, witness = finemodel.certify_local(v)
    if local:
        results = {"local": True, "distribution": {
            "".join(map(str, k)): p for k, p in sorted(witness.probs.items())}}
    else:
        results = {"local": False,
                   "witness": inequality_summary(witness) if witness is not None else None}
    _emit_report(run_report("fine-certify", v.scenario, behavior_to_json(v), results,
                            time.monotonic() - t))


def cmd_werner_scan(args):
    t = time.monotonic()
    results = {}
    for name in ("CHSH", "I3322"):
        results[name] = quantum.violation_onset(
            catalog.make(name), quantum.werner, (2, 2), 0.5, 1.0, restarts=args.restarts,
            seed=args.seed, tol=args.tol, rank_one=args.rank_one, threads=args.threads)
    _emit_report(run_report("werner-scan", Scenario(3, 3, 2, 2),
                            {"restarts": args.restarts, "seed": args.seed, "tol": args.tol,
                             "rank_one": args.rank_one}, {"onset": results},
                            time.monotonic() - t))


def theta_grid(points):
    """``points`` equally spaced interior angles of (0, pi/2)."""
    return [(k + 1) * (np.pi / 2) / (points + 1) for k in range(points)]


def fig1_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "i_chsh_tilde", "i3322_tilde"])
    for theta, c, i in rows:
        w.writerow([f"{theta:.12g}", f"{c:.12g}", f"{i:.12g}"])
    return buf.getvalue()


def cmd_fig1(args):
    t = time.monotonic()
    rows = quantum.fig1_scan(theta_grid(args.points), args.restarts, args.seed,
                             rank_one=not args.degenerate, threads=args.threads)
    if args.csv:
        sys.stdout.write(fig1_csv(rows))
        return
    _emit_report(run_report("fig1", Scenario(3, 3, 2, 2),
                            {"points": args.points, "restarts": args.restarts, "seed": args.seed,
                             "degenerate": args.degenerate},
                            {"rows": [list(r) for r in rows]}, time.monotonic() - t))


def cmd_sharing(args):
    t = time.monotonic()
    q = catalog.make("I3322")
    ab, ac = quantum.sharing_values(q, args.mu, quantum.sharing_angles(literal=args.literal))
    _emit_report(run_report("sharing", q.scenario, {"mu": args.mu, "literal": args.literal},
                            {"AB": ab, "AC": ac}, time.monotonic() - t))


def cmd_family(args):
    t = time.monotonic()
    q = catalog.make(args.name)
    if args.emit:
        sys.stdout.write(catalog.emit(q))
        return
    payload = inequality_summary(q)
    payload["lhv_bound"] = polytope.lhv_bound(q.coeffs, q.scenario)
    _emit_report(run_report("family", q.scenario, {"name": args.name}, payload,
                            time.monotonic() - t))


# parser ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="bellscope", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("enumerate", help="all facets of a local polytope")
    e.add_argument("--scenario", type=_scenario, required=True, help="mA,mB,nA,nB")
    e.add_argument("--out", default="-", help="facet file (default: stdout, report to stderr)")
    e.add_argument("--cap-seconds", type=float, default=None)
    e.set_defaults(func=cmd_enumerate)

    c = sub.add_parser("classify", help="orbit classes of a facet file")
    c.add_argument("file")
    c.add_argument("--table", action="store_true", help="plain table instead of JSON")
    c.set_defaults(func=cmd_classify)

    def source(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--family", help="catalogue name, e.g. I3322 or Imm22:4")
        g.add_argument("--file", help="inequality file ('-' for stdin)")

    q = sub.add_parser("qmax", help="see-saw maximum of the quantum value")
    source(q)
    q.add_argument("--dims", type=_dims, default=(2, 2))
    q.add_argument("--restarts", type=int, default=quantum.DEFAULT_RESTARTS)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--threads", type=int, default=None)
    q.add_argument("--rank-one", action="store_true", help="non-degenerate measurements only")
    q.set_defaults(func=cmd_qmax)

    lb = sub.add_parser("lhv-bound", help="maximum over deterministic strategies")
    source(lb)
    lb.set_defaults(func=cmd_lhv_bound)

    fc = sub.add_parser("facet-check", help="verify validity and facet property")
    fc.add_argument("file", nargs="?", default="-")
    fc.set_defaults(func=cmd_facet_check)

    fn = sub.add_parser("fine-certify", help="Fine model for an (m,2,2,2) behaviour")
    fn.add_argument("file")
    fn.set_defaults(func=cmd_fine_certify)

    w = sub.add_parser("werner-scan", help="violation onsets on Werner states")
    w.add_argument("--restarts", type=int, default=30)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--tol", type=float, default=1e-3)
    w.add_argument("--threads", type=int, default=None)
    w.add_argument("--rank-one", action="store_true")
    w.set_defaults(func=cmd_werner_scan)

    f = sub.add_parser("fig1", help="I3322 versus CHSH on the rho_theta family")
    f.add_argument("--csv", action="store_true")
    f.add_argument("--points", type=int, default=25)
    f.add_argument("--restarts", type=int, default=quantum.DEFAULT_RESTARTS)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--threads", type=int, default=None)
    f.add_argument("--degenerate", action="store_true", help="allow degenerate measurements")
    f.set_defaults(func=cmd_fig1)

    sh = sub.add_parser("sharing", help="I3322 on both pairs of the three-qubit state")
    sh.add_argument("--mu", type=float, default=0.852)
    sh.add_argument("--literal", action="store_true", help="published angle lists as printed")
    sh.set_defaults(func=cmd_sharing)

    fa = sub.add_parser("family", help="a catalogue inequality")
    fa.add_argument("name")
    fa.add_argument("--emit", action="store_true", help="print in the text format")
    fa.set_defaults(func=cmd_family)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args) or 0
    except (ResourceError, NonConvergence) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BellscopeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
