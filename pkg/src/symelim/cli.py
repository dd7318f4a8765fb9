"""Command-line driver.

Exit codes: 0 analysis done (and every checked invariant held), 1 a trace
check failed, 2 usage or input error, 3 a resource cap stopped an analysis
early (what was found is still printed, flagged as partial).
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass, field

from . import __version__
from .folinv import AxiomWarning, SaturationLimits, first_order_invariants, ground_check, tptp_dump
from .groebner import ResourceCapExceeded
from .loopspec import (
    Inputs, LoopRuntimeError, LoopSpecError, UFInterpretation, format_program, interpret,
    parse_file, random_traces,
)
from .polyinv import (
    InsufficientTraceData, PolyInvConfig, ansatz_oracle, format_invariant, invariant_fixed_point,
    verify_on_traces,
)
from .recsolve import UnsupportedRecurrence

OK, VALIDATION_FAILED, USAGE, CAPPED = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    path: str
    modes: tuple
    max_degree: int = 3
    L_max: int = 3
    trace_check: int = 0
    trace_length: int = 20
    bound: int = 20
    uf: str = "random"
    seed: int = 0
    format: str = "text"
    caps: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"input": self.path, "modes": list(self.modes), "max_degree": self.max_degree,
                "L_max": self.L_max, "trace_check": self.trace_check,
                "trace_length": self.trace_length, "bound": self.bound, "uf": self.uf,
                "seed": self.seed, "format": self.format, "caps": self.caps}


def _load(path: str):
    try:
        return parse_file(path)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror}") from None
    except LoopSpecError as err:
        raise UsageError(f"{path}: {err}") from None


def _traces(program, cfg: RunConfig, count: int):
    return random_traces(program, count, length=cfg.trace_length, seed=cfg.seed, uf=cfg.uf)


# -- analyze ------------------------------------------------------------------------


def analyze(cfg: RunConfig) -> tuple[dict, int]:
    program = _load(cfg.path)
    report: dict = {"config": cfg.as_dict(), "version": __version__}
    status = OK
    traces = _traces(program, cfg, cfg.trace_check) if cfg.trace_check else []

    ideal = None
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            ideal, pr = invariant_fixed_point(program, PolyInvConfig(L_max=cfg.L_max))
    except ResourceCapExceeded as err:
        report["poly"] = {"error": f"resource cap: {err}"}
        return report, CAPPED
    poly = {
        "invariants": ideal.display(),
        "stabilized_at": pr.stabilized_at,
        "possibly_incomplete": pr.possibly_incomplete,
        "closed_forms": {str(k): v for k, v in pr.closed_forms.items()},
        "exponential_relations": {str(k): v for k, v in pr.exponential_relations.items()},
        "rounds": [{"L": r["L"], "basis_size": r["basis_size"]} for r in pr.rounds],
        "notes": pr.notes + [str(w.message) for w in caught],
    }
    if pr.possibly_incomplete:
        status = CAPPED
    if traces:
        verdicts = verify_on_traces(ideal, traces)
        failed = [v.describe() for v in verdicts if not v.passed]
        poly["trace_check"] = {"traces": len(traces), "failed": failed}
        if failed:
            status = VALIDATION_FAILED
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", InsufficientTraceData)
            oracle = ansatz_oracle(traces, ideal.variables, cfg.max_degree, ideal.initial_symbols)
        missing = [format_invariant(p) for p in oracle if not ideal.contains(p)]
        poly["oracle"] = {"degree": cfg.max_degree, "found": len(oracle), "not_in_ideal": missing}
    if "poly" in cfg.modes:
        report["poly"] = poly

    if "fol" in cfg.modes:
        limits = SaturationLimits(**cfg.caps)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AxiomWarning)
            res = first_order_invariants(program, ideal, limits)
        sat = res.saturation
        fol = {
            "invariants": res.formulas,
            "clauses": [str(c) for c in res.emitted],
            "existential_attempt": [e.text for e in res.existential],
            "saturation": {"status": sat.reason, "partial": sat.partial, "retained": len(sat.clauses),
                           "generated": sat.generated, "iterations": sat.iterations,
                           "discarded": sat.discarded},
            "notes": res.notes,
        }
        if sat.partial and status == OK:
            status = CAPPED
        if traces:
            failed = []
            for c, text in zip(res.emitted, res.formulas):
                for i, tr in enumerate(traces):
                    v = ground_check(c, tr, cfg.bound, res.signature)
                    if not v.passed:
                        failed.append(f"{text}: trace {i} at {v.counterexample}")
                        break
            fol["trace_check"] = {"traces": len(traces), "bound": cfg.bound, "failed": failed}
            if failed:
                status = VALIDATION_FAILED
        report["fol"] = fol
        report["_tptp"] = tptp_dump(sat.log.values(), res.signature)
    return report, status


def _text_report(report: dict, status: int) -> str:
    cfg = report["config"]
    lines = [f"input: {cfg['input']}  modes: {','.join(cfg['modes'])}  seed: {cfg['seed']}"]
    poly = report.get("poly")
    if poly and "error" in poly:
        lines.append(f"polynomial analysis stopped: {poly['error']}")
    elif poly:
        where = (f"stabilized at L={poly['stabilized_at']}" if not poly["possibly_incomplete"]
                 else f"not stable by L={cfg['L_max']}, possibly incomplete")
        lines.append(f"polynomial invariants ({where}):")
        lines += [f"  {s}" for s in poly["invariants"]] or ["  (none)"]
        lines.append("closed forms:")
        for pid, forms in poly["closed_forms"].items():
            lines += [f"  path {pid}: {f}" for f in forms]
        _check_lines(lines, poly.get("trace_check"))
        if "oracle" in poly:
            o = poly["oracle"]
            lines.append(f"oracle (degree <= {o['degree']}): {o['found']} polynomials, "
                         f"{len(o['not_in_ideal'])} outside the ideal")
            lines += [f"  not in ideal: {p}" for p in o["not_in_ideal"]]
    fol = report.get("fol")
    if fol:
        s = fol["saturation"]
        flag = " (partial)" if s["partial"] else ""
        lines.append(f"quantified invariants{flag}:")
        lines += [f"  {f}" for f in fol["invariants"]] or ["  (none)"]
        if fol["existential_attempt"]:
            lines.append("existential invariants (attempted):")
            lines += [f"  {f}" for f in fol["existential_attempt"]]
        lines.append(f"saturation: {s['status']}, {s['retained']} retained, "
                     f"{s['generated']} generated")
        lines += [f"  note: {n}" for n in fol["notes"]]
        _check_lines(lines, fol.get("trace_check"))
    lines.append({OK: "ok", VALIDATION_FAILED: "validation failed",
                  CAPPED: "partial results (resource cap)"}[status])
    return "\n".join(lines) + "\n"


def _check_lines(lines: list, check) -> None:
    if not check:
        return
    if check["failed"]:
        lines.append(f"trace check FAILED on {check['traces']} traces:")
        lines += [f"  {f}" for f in check["failed"]]
    else:
        lines.append(f"trace check: all passed on {check['traces']} traces")


def _structured(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"


# -- other subcommands ----------------------------------------------------------------


def _cmd_parse(args) -> int:
    program = _load(args.file)
    sys.stdout.write(format_program(program) + "\n")
    return OK


def _parse_assignments(items, what):
    out = {}
    for item in items or []:
        name, _, value = item.partition("=")
        if not name or not value:
            raise UsageError(f"bad {what} {item!r}, expected NAME=VALUE")
        try:
            out[name] = [int(v) for v in value.split(",")] if what == "array" else int(value)
        except ValueError:
            raise UsageError(f"bad {what} {item!r}: integers expected") from None
    return out


def _cmd_trace(args) -> int:
    program = _load(args.file)
    arrays = _parse_assignments(args.array, "array")
    params = _parse_assignments(args.param, "parameter")
    if arrays or params:
        inputs = Inputs(arrays, params, UFInterpretation(args.uf, args.seed),
                        step_cap=args.length)
        trace = interpret(program, inputs)
    else:
        trace = random_traces(program, 1, length=args.length, seed=args.seed, uf=args.uf)[0]
    snaps = [{"k": s.k, "path": s.path,
              "scalars": {k: str(v) for k, v in sorted(s.scalars.items())},
              "arrays": {a: {str(i): str(v) for i, v in sorted(c.items())}
                         for a, c in sorted(s.arrays.items())}}
             for s in trace.snapshots]
    if args.format == "structured":
        sys.stdout.write(_structured({"input": args.file, "seed": args.seed,
                                      "uf": trace.uf.describe(), "capped": trace.capped,
                                      "snapshots": snaps}))
        return OK
    print(f"input: {args.file}  seed: {args.seed}  uf: {trace.uf.describe()}")
    for s in snaps:
        vals = " ".join(f"{k}={v}" for k, v in s["scalars"].items())
        arrs = " ".join(f"{a}=[{', '.join(c.values())}]" for a, c in s["arrays"].items())
        path = "-" if s["path"] is None else s["path"]
        print(f"k={s['k']:<3} path={path}  {vals}  {arrs}".rstrip())
    if trace.capped:
        print("stopped at the step cap")
    return OK


def _cmd_oracle(args) -> int:
    program = _load(args.file)
    traces = []
    # concrete-init loops repeat the same run, so vary the length too
    for i in range(args.traces):
        traces += random_traces(program, 1, length=args.length + i % 7, seed=args.seed + i,
                                uf=args.uf)
    names = list(program.scalars)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        basis = ansatz_oracle(traces, names, args.degree)
    polys = [format_invariant(p) for p in basis]
    if args.format == "structured":
        sys.stdout.write(_structured({"input": args.file, "seed": args.seed, "degree": args.degree,
                                      "traces": args.traces, "polynomials": polys,
                                      "warnings": [str(w.message) for w in caught]}))
        return OK
    print(f"input: {args.file}  degree: {args.degree}  traces: {args.traces}  seed: {args.seed}")
    for w in caught:
        print(f"warning: {w.message}")
    for p in polys:
        print(f"  {p}")
    if not polys:
        print("  (none)")
    return OK


def _cmd_analyze(args) -> int:
    modes = tuple(m for m in ("poly", "fol") if getattr(args, m)) or ("poly",)
    caps = {k: v for k, v in (("max_retained", args.max_retained),
                              ("max_generated", args.max_generated),
                              ("max_seconds", args.max_seconds)) if v is not None}
    cfg = RunConfig(args.file, modes, args.max_degree, args.L_max, args.trace_check,
                    args.trace_length, args.bound, args.uf, args.seed, args.format, caps)
    for name in ("max_degree", "L_max", "trace_length"):
        if getattr(cfg, name) < 1:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    if cfg.trace_check < 0 or cfg.bound < 0:
        raise UsageError("--trace-check and --bound must be non-negative")
    report, status = analyze(cfg)
    tptp = report.pop("_tptp", None)
    if args.tptp and tptp is not None:
        with open(args.tptp, "w") as fh:
            fh.write(tptp)
    report["exit"] = status
    out = _structured(report) if cfg.format == "structured" else _text_report(report, status)
    sys.stdout.write(out)
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symelim", description="Loop invariants by symbol elimination.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=True):
        sp.add_argument("file", help="loop program")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--uf", choices=("zero", "identity", "random"), default="random",
                        help="meaning of uninterpreted functions in traces")
        if fmt:
            sp.add_argument("--format", choices=("text", "structured"), default="text")

    a = sub.add_parser("analyze", help="compute invariants")
    common(a)
    a.add_argument("--poly", action="store_true", help="polynomial invariants (default)")
    a.add_argument("--fol", action="store_true", help="quantified invariants (runs --poly first)")
    a.add_argument("--max-degree", type=int, default=3, help="degree for the oracle cross-check")
    a.add_argument("--L-max", dest="L_max", type=int, default=3, help="longest path sequence")
    a.add_argument("--trace-check", type=int, default=0, metavar="N",
                   help="validate the results on N random traces")
    a.add_argument("--trace-length", type=int, default=20)
    a.add_argument("--bound", type=int, default=20, help="variable range for quantified checks")
    a.add_argument("--max-retained", type=int)
    a.add_argument("--max-generated", type=int)
    a.add_argument("--max-seconds", type=float)
    a.add_argument("--tptp", metavar="PATH", help="write the clause set as TPTP to PATH")
    a.set_defaults(run=_cmd_analyze)

    pp = sub.add_parser("parse", help="check syntax and print the normalized program")
    pp.add_argument("file")
    pp.set_defaults(run=_cmd_parse)

    t = sub.add_parser("trace", help="run the interpreter")
    common(t)
    t.add_argument("--length", type=int, default=10)
    t.add_argument("--param", action="append", metavar="X=V")
    t.add_argument("--array", action="append", metavar="A=v0,v1,...")
    t.set_defaults(run=_cmd_trace)

    o = sub.add_parser("oracle", help="invariants fitted to traces")
    common(o)
    o.add_argument("--degree", type=int, default=3)
    o.add_argument("--traces", type=int, default=50)
    o.add_argument("--length", type=int, default=20)
    o.set_defaults(run=_cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE
    except LoopRuntimeError as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE
    except UnsupportedRecurrence as err:
        print(f"unsupported loop: {err}", file=sys.stderr)
        return USAGE
    except ResourceCapExceeded as err:
        print(f"resource cap: {err}", file=sys.stderr)
        return CAPPED


if __name__ == "__main__":
    sys.exit(main())
