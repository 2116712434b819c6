"""Command-line front end.

Exit status: 0 when every check or golden comparison passes, 1 when one
fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import failure, montecarlo, verify
from .builders import build_encoded_gate, build_encoded_zero_prep, build_syndrome_bit_extraction, build_syndrome_extraction
from .calibration import Calibration, load_calibration, load_golden
from .errors import UsageError
from .network import count_locations, exclude_second_cat_attempt

GATE_CLASSES = ("two_qubit", "pi8")


def _dump(data, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(data, indent=2, sort_keys=True) + "\n"
    rows = data if isinstance(data, list) else [data]
    out = io.StringIO()
    keys = list(rows[0].keys()) if rows else []
    w = csv.DictWriter(out, fieldnames=keys, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: (json.dumps(v) if isinstance(v, (dict, list)) else v) for k, v in row.items()})
    return out.getvalue()


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, newline="\n")
    else:
        sys.stdout.write(text)


# -- verify ------------------------------------------------------------------------


def cmd_verify(args) -> int:
    report = verify.run_all()
    if args.format == "json":
        text = _dump(report, "json")
    else:
        rows = [{"check": c["name"], "passed": c["passed"], "detail": c["detail"]} for c in report["checks"]]
        rows += [
            {"check": f"table: {r['identity']}", "passed": r["oracle_agrees"], "detail": f"{r['verdict']} (computed {r['computed']})"}
            for r in report["propagation_table"]
        ]
        text = _dump(rows, "csv")
    _emit(text, args.output)
    return 0 if report["passed"] else 1


# -- count ---------------------------------------------------------------------------


def built_tallies() -> dict[str, tuple[int, int]]:
    keep = exclude_second_cat_attempt
    return {
        "bit_extraction": count_locations(build_syndrome_bit_extraction(1), keep),
        "syndrome_extraction": count_locations(build_syndrome_extraction(), keep),
        "prep_extraction": count_locations(build_syndrome_extraction(with_a1=True), keep),
        "encoded_cnot": count_locations(build_encoded_gate(), keep),
        "encoded_zero_prep": count_locations(build_encoded_zero_prep(), keep),
    }


def calibration_diffs(cal: Calibration, built: dict) -> list[str]:
    """Tallies the built networks must reproduce exactly."""
    diffs = []
    for name in ("bit_extraction", "syndrome_extraction"):
        if tuple(getattr(cal, name)) != tuple(built[name]):
            diffs.append(f"{name}: calibration {getattr(cal, name)} vs built {built[name]}")
    return diffs


def cmd_count(args) -> int:
    cal = load_calibration(args.calibration)
    built = built_tallies()
    rows = []
    for name, (ops, mem) in built.items():
        calibrated = getattr(cal, name, None)
        rows.append(
            {
                "network": name,
                "operational": ops,
                "memory": mem,
                "calibrated": list(calibrated) if calibrated else None,
            }
        )
    _emit(_dump(rows, args.format), args.output)
    diffs = calibration_diffs(cal, built)
    for d in diffs:
        print(f"calibration mismatch: {d}", file=sys.stderr)
    return 1 if diffs else 0


# -- threshold ------------------------------------------------------------------------


def threshold_report(gate_class: str, with_memory: bool, cal: Calibration) -> dict:
    counts = failure.pair_counts(gate_class, with_memory, cal)
    th = failure.threshold(counts.total_f)
    return {
        "gate_class": gate_class,
        "with_memory": with_memory,
        "components": {"recovery_pairs": counts.recovery_pairs, "post_recovery_pairs": counts.post_recovery_pairs},
        "f": counts.total_f,
        "threshold_exact": str(th.threshold_exact),
        "threshold": th.threshold,
        "threshold_rounded": th.threshold_rounded,
        "threshold_2sf": th.threshold_2sf,
        "model": th.model,
    }


def golden_rows(cal: Calibration) -> list[dict]:
    golden = load_golden()
    built = built_tallies()
    L_ops, L_mem = cal.extraction_size(False), cal.extraction_size(True)
    P_ops, P_mem = cal.extraction_size(False, prep=True), cal.extraction_size(True, prep=True)
    two = {m: failure.pair_counts("two_qubit", m, cal) for m in (False, True)}
    pi8 = {m: failure.pair_counts("pi8", m, cal) for m in (False, True)}
    got = {
        "bit_extraction": list(built["bit_extraction"]),
        "syndrome_extraction": list(built["syndrome_extraction"]),
        "recovery_pairs_ops": failure.count_recovery_pairs(L_ops),
        "recovery_pairs_memory": failure.count_recovery_pairs(L_mem),
        "prep_recovery_pairs_ops": failure.count_recovery_pairs(P_ops),
        "prep_recovery_pairs_memory": failure.count_recovery_pairs(P_mem),
        "post_recovery_pairs_ops": two[False].post_recovery_pairs,
        "post_recovery_pairs_memory": two[True].post_recovery_pairs,
        "f_two_qubit_ops": two[False].total_f,
        "f_two_qubit_memory": two[True].total_f,
        "pi8_recovery_ops": pi8[False].recovery_pairs,
        "pi8_recovery_memory": pi8[True].recovery_pairs,
        "pi8_nonrecovery_ops": pi8[False].post_recovery_pairs,
        "pi8_nonrecovery_memory": pi8[True].post_recovery_pairs,
    }
    rows = []
    for name, entry in golden["counts"].items():
        rows.append(
            {
                "quantity": name,
                "golden": entry["value"],
                "computed": got[name],
                "pass": entry["value"] == got[name],
                "note": entry.get("note", ""),
            }
        )
    fs = {
        "two_qubit_ops": two[False].total_f,
        "two_qubit_memory": two[True].total_f,
        "pi8_ops": pi8[False].total_f,
        "pi8_memory": pi8[True].total_f,
    }
    for name, entry in golden["thresholds"].items():
        value = failure.threshold(fs[name]).threshold_rounded
        ok = Fraction(value).limit_denominator(10**9) == Fraction(entry["value"]).limit_denominator(10**9)
        rows.append({"quantity": f"threshold_{name}", "golden": entry["value"], "computed": value, "pass": ok, "note": ""})
    return rows


def cmd_threshold(args) -> int:
    cal = load_calibration(args.calibration)
    diffs = calibration_diffs(cal, built_tallies())
    if args.golden:
        rows = golden_rows(cal)
        _emit(_dump(rows, args.format), args.output)
        for d in diffs:
            print(f"calibration mismatch: {d}", file=sys.stderr)
        return 0 if all(r["pass"] for r in rows) and not diffs else 1
    classes = GATE_CLASSES if args.gate == "all" else (args.gate,)
    reports = [threshold_report(g, args.memory, cal) for g in classes]
    _emit(_dump(reports if len(reports) > 1 else reports[0], args.format), args.output)
    for d in diffs:
        print(f"calibration mismatch: {d}", file=sys.stderr)
    return 1 if diffs else 0


# -- concat ---------------------------------------------------------------------------


def cmd_concat(args) -> int:
    plan = failure.plan_concatenation(args.n, args.q, args.p, args.f, 2**args.log2k)
    data = plan.to_json()
    if args.format == "json":
        text = _dump(data, "json")
    else:
        rows = [{**lvl, "overhead": plan.K ** lvl["level"]} for lvl in plan.levels] or [{"level": None, "feasible": False}]
        text = _dump(rows, "csv")
    _emit(text, args.output)
    return 0 if plan.feasible else 1


# -- mc -------------------------------------------------------------------------------

_MC_FIELDS = {"p_values", "trials", "gate_class", "seed", "with_memory"}


def load_sweep(path: str) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc
    if not isinstance(cfg, dict):
        raise UsageError(f"{path}: expected a JSON object")
    unknown = set(cfg) - _MC_FIELDS
    if unknown:
        raise UsageError(f"{path}: unknown field(s) {', '.join(sorted(unknown))}")
    for key in ("p_values", "trials", "gate_class"):
        if key not in cfg:
            raise UsageError(f"{path}: missing field {key!r}")
    if not isinstance(cfg["p_values"], list) or not all(isinstance(p, (int, float)) for p in cfg["p_values"]):
        raise UsageError(f"{path}: field 'p_values' must be a list of numbers")
    if not isinstance(cfg["trials"], int) or cfg["trials"] < 1:
        raise UsageError(f"{path}: field 'trials' must be a positive integer")
    return cfg


def cmd_mc(args) -> int:
    if args.config:
        cfg = load_sweep(args.config)
    else:
        if not args.p:
            raise UsageError("give --config or at least one --p")
        cfg = {"p_values": args.p, "trials": args.trials, "gate_class": args.gate}
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    with_memory = bool(cfg.get("with_memory", args.memory))
    text = montecarlo.sweep_csv(cfg["gate_class"], cfg["p_values"], cfg["trials"], seed, with_memory, args.workers)
    _emit(text, args.output)
    return 0


# -- entry point ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ftlab", description="Fault-tolerance counting, verification and sampling.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--calibration", help="calibration JSON (default: shipped file)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    common.add_argument("--output", help="write here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", parents=[common], help="run the oracle-backed checks")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("count", parents=[common], help="location tallies of the built networks")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("threshold", parents=[common], help="pair counts and threshold bounds")
    p.add_argument("--gate", choices=GATE_CLASSES + ("all",), default="two_qubit")
    p.add_argument("--memory", action="store_true", help="include memory locations")
    p.add_argument("--golden", action="store_true", help="compare against the published constants")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("concat", parents=[common], help="concatenation levels and overhead")
    p.add_argument("--n", type=float, default=1e9, help="computational gates")
    p.add_argument("--q", type=float, default=1e-3, help="target failure probability")
    p.add_argument("--p", type=float, default=1e-7, help="physical error probability")
    p.add_argument("--f", type=int, default=337195)
    p.add_argument("--log2k", type=int, default=failure.LOG2_K)
    p.set_defaults(func=cmd_concat)

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo sweep (CSV)")
    p.add_argument("--config", help="JSON sweep {p_values, trials, gate_class, seed}")
    p.add_argument("--p", type=float, action="append", help="error probability (repeatable)")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--gate", choices=("two_qubit", "recovery"), default="two_qubit")
    p.add_argument("--memory", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_mc)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("ftlab: error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ftlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
