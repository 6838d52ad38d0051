"""Command-line front end.

JSON reports go to stdout and diagnostics to stderr.  Exit status: 0 ok,
2 parse or validation error, 3 refusal (pattern does not qualify),
4 oracle contradiction, 5 numerical failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

import numpy as np

from . import __version__
from .certificate import LAMBDAS, build_certificate
from .generate import format_edge_list, random_pattern
from .graph import BETA, PatternError, decide_structural_avg_ctrl, node_label, skeleton
from .io import GraphFileError, parse_dot, parse_edge_list
from .reduction import NotStructurallyAvgControllable, reduce
from .simulator import (
    DISCLAIMER,
    SingularGramian,
    discretize,
    simulate,
    synthesize_control,
    verify_target,
    write_trajectory_csv,
)
from .verification import (
    RANK_TOL,
    OracleContradiction,
    PolynomialEnsemble,
    RankDeficient,
    certify_rank,
    cross_validate,
    oracle_sample,
)

SCHEMA = "avgctrl-report/1"
EXIT_OK, EXIT_INPUT, EXIT_REFUSED, EXIT_CONTRADICTION, EXIT_NUMERIC = 0, 2, 3, 4, 5


class CommandError(Exception):
    def __init__(self, code, kind, message, payload=None, line=None):
        super().__init__(message)
        self.code, self.kind, self.payload, self.line = code, kind, payload, line


def _labels(nodes):
    return [node_label(v) for v in nodes]


def _edges(edges):
    return [[node_label(u), node_label(v)] for u, v in sorted(edges)]


def _load(args):
    if args.file == "-":
        data = sys.stdin.buffer.read()
    else:
        try:
            with open(args.file, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise CommandError(EXIT_INPUT, "FileError", str(exc)) from None
    parser = parse_dot if args.format == "dot" else parse_edge_list
    try:
        g = parser(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise CommandError(EXIT_INPUT, "FileError", f"not UTF-8 text: {exc}") from None
    except GraphFileError as exc:
        raise CommandError(EXIT_INPUT, exc.kind, str(exc), line=exc.line) from None
    except PatternError as exc:
        raise CommandError(EXIT_INPUT, type(exc).__name__, str(exc)) from None
    return g, hashlib.sha256(data).hexdigest()


def _decision_dict(g, d):
    sk = skeleton(g, d.scc)
    return {
        "n": g.n,
        "edges": len(g.edges),
        "components": [
            {"nodes": _labels(c), "cyclic": bool(cyc)}
            for c, cyc in zip(d.scc.components, d.scc.nontrivial)
        ],
        "skeleton_edges": [[i, j] for i, j in sorted(sk.edges)],
        "core": _labels(d.core.sorted_nodes()),
        "topological_order": _labels(d.topological_order),
        "verdict": d.verdict,
        "witness": _labels(d.witness) if d.witness else None,
        "obstruction": _labels(d.obstruction) if d.obstruction else None,
        "unreachable": _labels(d.unreachable),
    }


def _refuse(g, d):
    reasons = []
    if d.obstruction:
        reasons.append("core nodes {} and {} are not joined by an edge".format(*_labels(d.obstruction)))
    if d.unreachable:
        reasons.append("nodes unreachable from b: " + ", ".join(_labels(d.unreachable)))
    raise CommandError(EXIT_REFUSED, "NotStructurallyAvgControllable",
                       "pattern is not structurally averaged controllable ("
                       + "; ".join(reasons) + "); run 'analyze' for details",
                       payload={"analysis": _decision_dict(g, d)})


def _certify(g, lam, tol, tie_break="min"):
    d = decide_structural_avg_ctrl(g)
    if not d.verdict:
        _refuse(g, d)
    try:
        red, trace = reduce(g, d, tie_break)
    except NotStructurallyAvgControllable as exc:
        raise CommandError(EXIT_REFUSED, type(exc).__name__, str(exc)) from None
    cert = build_certificate(red, lam)
    rank = certify_rank(cert.graph, cert.weighting, tol)
    return d, red, trace, cert, rank


def cmd_analyze(args):
    g, digest = _load(args)
    d = decide_structural_avg_ctrl(g)
    return digest, _decision_dict(g, d), None


def cmd_certify(args):
    g, digest = _load(args)
    lam = LAMBDAS[args.lambda_]
    _, red, trace, cert, rank = _certify(g, lam, args.tolerance, args.tie_break)
    inv = cert.labeling.inverse
    w = cert.weighting
    # weights indexed by the input's node names
    nu = [
        {"edge": [node_label(inv[u]), node_label(inv[v])], "rat": x.rat, "irr": x.irr,
         "denom": x.denom, "nu": x.format(lam)}
        for (u, v), x in sorted(w.nu.items(), key=lambda kv: (inv[kv[0][0]], inv[kv[0][1]]))
    ]
    result = {
        "verdict": rank.verdict,
        "lambda": lam.tag,
        "reduced_edges": _edges(red.pattern.edges),
        "removed_edges": _edges(g.edges - red.pattern.edges),
        "relabeling": {node_label(old): node_label(new) for old, new in enumerate(cert.labeling.perm)
                       if old != BETA},
        "L": w.L,
        "ell_max": w.ell_max,
        "nu": nu,
        "rank_certificate": rank.to_dict(),
    }
    if args.emit_weights:
        ens = cert.original_ensemble()
        result["ensemble"] = {
            "f": ens.f,
            "measure": ens.measure,
            "a": [{"row": i, "col": j, "exponent": x.format(lam)} for (i, j), x in sorted(ens.a.items())],
            "b": [{"row": i, "exponent": x.format(lam)} for i, x in sorted(ens.b.items())],
        }
    if not rank.verdict:
        raise CommandError(EXIT_NUMERIC, "RankDeficient",
                           f"selected columns have numeric rank {rank.rank} of {rank.n}",
                           payload=result)
    return digest, result, trace.to_dict()


def cmd_oracle(args):
    g, digest = _load(args)
    try:
        rep = cross_validate(g, args.samples, args.degree, args.seed, args.columns)
    except OracleContradiction as exc:
        raise CommandError(EXIT_CONTRADICTION, "OracleContradiction", str(exc),
                           payload=exc.report.to_dict()) from None
    return digest, rep.to_dict(), None


def _parse_target(text, n):
    text = text.strip()
    if text.lower().startswith("e") and text[1:].isdigit():
        k = int(text[1:])
        if not 1 <= k <= n:
            raise CommandError(EXIT_INPUT, "ValueError", f"target e{k} outside 1..{n}")
        out = np.zeros(n)
        out[k - 1] = 1.0
        return out
    try:
        vals = [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise CommandError(EXIT_INPUT, "ValueError", f"cannot parse target {text!r}") from None
    if len(vals) != n:
        raise CommandError(EXIT_INPUT, "ValueError", f"target needs {n} entries, got {len(vals)}")
    return np.array(vals)


def cmd_simulate(args):
    g, digest = _load(args)
    target = _parse_target(args.target, g.n)
    info = {"ensemble": args.ensemble}
    if args.ensemble_file:
        with open(args.ensemble_file) as fh:
            ens = PolynomialEnsemble.from_dict(json.load(fh))
        if not ens.pattern().edges <= g.edges or ens.n != g.n:
            raise CommandError(EXIT_INPUT, "ValueError", "ensemble file does not comply with the pattern")
        info["ensemble"] = "file"
    elif args.ensemble == "certificate":
        _, _, _, cert, rank = _certify(g, LAMBDAS[args.lambda_], RANK_TOL)
        ens = cert.original_ensemble()
        info["certified_rank"] = rank.rank
    elif args.ensemble == "constant":
        ens = PolynomialEnsemble(g.n, 0, {(j, i): (1,) for i, j in g.edges if i != BETA},
                                 {j: (1,) for i, j in g.edges if i == BETA})
    else:
        ens = oracle_sample(g, args.degree, args.seed)
        info.update(degree=args.degree, seed=args.seed)

    de = discretize(ens, args.nodes)
    x0 = np.zeros(g.n)
    try:
        u = synthesize_control(de, x0, target, args.time, args.panels)
    except SingularGramian as exc:
        raise CommandError(EXIT_NUMERIC, "SingularGramian", str(exc),
                           payload={"factor_condition": exc.condition, **info}) from None
    res = simulate(de, u, x0, args.time, target=target)
    ok, rep = verify_target(res, target, args.tol)
    if args.out:
        write_trajectory_csv(res, args.out)
    result = {
        **info,
        "nodes": args.nodes,
        "T": args.time,
        "panels": len(u.t) - 1,
        "gramian_condition": u.gramian_condition,
        "factor_condition": u.factor_condition,
        "max_abs_control": float(np.max(np.abs(u.u))),
        "csv": args.out,
        **rep,
    }
    if not ok:
        raise CommandError(EXIT_NUMERIC, "TargetMissed",
                           f"terminal error {rep['terminal_error']:.3e} exceeds {args.tol:g}",
                           payload=result)
    return digest, result, None


def cmd_generate(args):
    g = random_pattern(args.n, args.qualifying, args.seed)
    header = f"random pattern n={args.n} qualifying={str(args.qualifying).lower()} seed={args.seed}"
    sys.stdout.write(format_edge_list(g, header))
    return None


def _bool(text):
    t = text.strip().lower()
    if t in ("true", "yes", "1"):
        return True
    if t in ("false", "no", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def build_parser():
    p = argparse.ArgumentParser(prog="avgctrl", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def with_file(sp):
        sp.add_argument("file", help="edge-list file, or - for stdin")
        sp.add_argument("--format", choices=("edges", "dot"), default="edges", help="input format")
        sp.add_argument("--trace", action="store_true", help="include the reduction trace")
        return sp

    with_file(sub.add_parser("analyze", help="decide structural averaged controllability"))

    sp = with_file(sub.add_parser("certify", help="build and check an explicit ensemble"))
    sp.add_argument("--lambda", dest="lambda_", choices=sorted(LAMBDAS), default="sqrt2",
                    help="irrational used in the exponents")
    sp.add_argument("--tolerance", type=float, default=RANK_TOL,
                    help="smallest/largest singular value threshold")
    sp.add_argument("--emit-weights", action="store_true", help="add the ensemble entries")
    sp.add_argument("--tie-break", choices=("min", "max"), default="min",
                    help="edge chosen at each reduction step")

    sp = with_file(sub.add_parser("oracle", help="exact ranks of random polynomial ensembles"))
    sp.add_argument("--samples", type=int, default=50, help="number of random ensembles")
    sp.add_argument("--degree", type=int, default=None, help="polynomial degree, default n")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--columns", type=int, default=None, help="matrix columns, default 2n")

    sp = with_file(sub.add_parser("simulate", help="steer the ensemble average"))
    sp.add_argument("--target", required=True, help="comma separated values, or eK")
    sp.add_argument("--time", type=float, default=5.0, help="horizon T")
    sp.add_argument("--nodes", type=int, default=64, help="quadrature nodes N")
    sp.add_argument("--panels", type=int, default=1000, help="control grid intervals")
    sp.add_argument("--out", default=None, help="trajectory CSV path")
    sp.add_argument("--tol", type=float, default=1e-6, help="terminal error accepted")
    sp.add_argument("--ensemble", choices=("certificate", "constant", "random"), default="certificate",
                    help="ensemble to steer")
    sp.add_argument("--ensemble-file", default=None, help="polynomial ensemble JSON")
    sp.add_argument("--lambda", dest="lambda_", choices=sorted(LAMBDAS), default="sqrt2",
                    help="irrational used in the exponents")
    sp.add_argument("--degree", type=int, default=2, help="degree for --ensemble random")
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("generate", help="print a random pattern with a known verdict")
    sp.add_argument("--n", type=int, required=True, help="number of state nodes")
    sp.add_argument("--qualifying", type=_bool, required=True, help="true or false")
    sp.add_argument("--seed", type=int, default=0)
    return p


COMMANDS = {
    "analyze": cmd_analyze,
    "certify": cmd_certify,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
    "generate": cmd_generate,
}


def _emit(report):
    sys.stdout.write(json.dumps(report, indent=2, allow_nan=True) + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "generate":
        try:
            cmd_generate(args)
        except ValueError as exc:
            print(f"avgctrl: {exc}", file=sys.stderr)
            return EXIT_INPUT
        return EXIT_OK

    t0 = time.perf_counter()
    report = {"schema": SCHEMA, "command": args.command, "input_hash": None}
    code = EXIT_OK
    try:
        digest, result, trace = COMMANDS[args.command](args)
        report["input_hash"] = digest
        report["result"] = result
        if getattr(args, "trace", False) and trace is not None:
            report["trace"] = trace
    except CommandError as exc:
        code = exc.code
        report["error"] = {"type": exc.kind, "message": str(exc), "line": exc.line}
        if exc.payload is not None:
            report["result"] = exc.payload
        print(f"avgctrl {args.command}: {exc}", file=sys.stderr)
    except RankDeficient as exc:
        code = EXIT_NUMERIC
        report["error"] = {"type": "RankDeficient", "message": str(exc), "line": None}
        print(f"avgctrl {args.command}: {exc}", file=sys.stderr)
    if report["input_hash"] is None and args.file != "-":
        try:
            with open(args.file, "rb") as fh:
                report["input_hash"] = hashlib.sha256(fh.read()).hexdigest()
        except OSError:
            pass
    if args.command == "simulate":
        report["disclaimer"] = DISCLAIMER
    report["timings"] = {"total_s": time.perf_counter() - t0}
    _emit(report)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
