"""Command-line front end: lock, simulate, verify, attack, and report.

Every artifact written (locked netlists, manifests, trace CSVs, reports) is
byte-deterministic for a fixed argv and input files. Exit codes: 0 success,
1 analytic failure (validation, equivalence, budget) with a one-line JSON
diagnostic on stderr, 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .analysis import (
    BudgetExceededError,
    brute_force_attack,
    check_equivalence_exhaustive,
    check_equivalence_random,
    overhead_report,
    static_key_attack,
)
from .behavioral import BehLockConfig, BehManifest, lock_behavioral
from .circuit import BenchFormatError, parse_bench, validate, write_bench
from .fsm import FsmError, Kiss2FormatError, parse_kiss2, write_kiss2
from .keys import (
    KeySchedule,
    from_binary,
    generate_key_schedule,
    parse_key_list,
    schedule_from_text,
    split_inputs,
)
from .sim import KeyPolicy, Stimulus, simulate
from .structural import LockConfig, LockManifest, lock_structural


def _fail(kind: str, detail: str) -> int:
    print(json.dumps({"error": kind, "detail": detail}), file=sys.stderr)
    return 1


def _load_bench(path: str):
    text = Path(path).read_text(encoding="utf-8")
    return parse_bench(text, name=Path(path).stem)


def _schedule_from_args(args, num_keys: int | None, key_bits: int | None) -> KeySchedule:
    sources = [s for s in (args.keys, args.keys_file) if s]
    if len(sources) > 1:
        raise ValueError("give at most one of --keys and --keys-file")
    if args.keys:
        schedule = parse_key_list(args.keys)
    elif args.keys_file:
        schedule = schedule_from_text(Path(args.keys_file).read_text(encoding="utf-8"))
    else:
        if num_keys is None or key_bits is None:
            raise ValueError("--k and --ki are required to generate a schedule")
        return generate_key_schedule(num_keys, key_bits, args.seed)
    if num_keys is not None and schedule.period != num_keys:
        raise ValueError(f"schedule has {schedule.period} keys, --k says {num_keys}")
    if key_bits is not None and schedule.width != key_bits:
        raise ValueError(f"schedule width {schedule.width}, --ki says {key_bits}")
    return schedule


def _cmd_lock_str(args) -> int:
    netlist = _load_bench(args.infile)
    schedule = _schedule_from_args(args, args.k, args.ki)
    config = LockConfig(
        num_keys=args.k,
        key_bits=args.ki,
        num_locked_ffs=args.ffs,
        seed=args.seed,
        explicit_targets=tuple(args.targets.split(",")) if args.targets else None,
        explicit_schedule=schedule,
    )
    locked, manifest = lock_structural(netlist, config)
    Path(args.out).write_text(write_bench(locked), encoding="utf-8")
    Path(args.manifest).write_text(manifest.to_json(), encoding="utf-8")
    print(f"locked {len(manifest.locked_ffs)} flip-flop(s); wrote {args.out} and {args.manifest}")
    return 0


def _cmd_lock_beh(args) -> int:
    fsm = parse_kiss2(Path(args.infile).read_text(encoding="utf-8"))
    schedule = _schedule_from_args(args, args.k, args.ki)
    config = BehLockConfig(
        num_keys=args.k, key_bits=args.ki, seed=args.seed, explicit_schedule=schedule
    )
    locked, manifest = lock_behavioral(fsm, config)
    Path(args.out).write_text(write_kiss2(locked), encoding="utf-8")
    Path(args.manifest).write_text(manifest.to_json(), encoding="utf-8")
    print(f"locked machine: {len(locked.states)} states; wrote {args.out} and {args.manifest}")
    return 0


def _key_policy_from_args(args, netlist) -> KeyPolicy:
    _, key_inputs = split_inputs(netlist)
    schedule = None
    if args.manifest:
        manifest = LockManifest.from_json(Path(args.manifest).read_text(encoding="utf-8"))
        schedule = manifest.schedule
    elif args.keys or args.keys_file:
        schedule = _schedule_from_args(args, None, None)
    if getattr(args, "static_key", None) is not None:
        if schedule is not None:
            raise ValueError("--static-key conflicts with --keys/--manifest")
        return KeyPolicy.static(from_binary(args.static_key))
    if schedule is None:
        if key_inputs:
            raise ValueError("netlist has key inputs; give --manifest, --keys, or --static-key")
        return KeyPolicy.none()
    overrides = {}
    for item in getattr(args, "override", None) or []:
        cycle, _, bits = item.partition("=")
        overrides[int(cycle)] = from_binary(bits)
    if overrides:
        return KeyPolicy.tampered(schedule, overrides)
    return KeyPolicy.correct(schedule)


def _cmd_sim(args) -> int:
    netlist = _load_bench(args.infile)
    policy = _key_policy_from_args(args, netlist)
    non_key, _ = split_inputs(netlist)
    if args.stimulus:
        rows = [
            line.strip()
            for line in Path(args.stimulus).read_text(encoding="utf-8").splitlines()
            if line.strip() and not line.startswith("#")
        ]
    else:
        rng = random.Random(args.random_seed)
        rows = [
            "".join(str(rng.randint(0, 1)) for _ in non_key) for _ in range(args.cycles)
        ]
    stimulus = Stimulus.from_strings(rows, policy)
    watch = tuple(args.watch.split(",")) if args.watch else ()
    trace = simulate(netlist, stimulus, init=args.init, watch=watch)
    csv = trace.to_csv()
    if args.trace:
        Path(args.trace).write_text(csv, encoding="utf-8")
        print(f"wrote {trace.cycles}-cycle trace to {args.trace}")
    else:
        sys.stdout.write(csv)
    return 0


def _cmd_verify(args) -> int:
    orig = _load_bench(args.orig)
    locked = _load_bench(args.locked)
    policy = _key_policy_from_args(args, locked)
    if args.mode == "exhaustive":
        verdict = check_equivalence_exhaustive(
            orig,
            locked,
            depth=args.depth,
            key_policy=policy,
            init=args.init,
            sequence_budget=args.budget,
        )
    else:
        verdict = check_equivalence_random(
            orig,
            locked,
            sequences=args.sequences,
            cycles=args.cycles,
            seed=args.seed,
            key_policy=policy,
            init=args.init,
        )
    doc = {"equivalent": verdict.equivalent, "mode": verdict.mode, "depth": verdict.depth}
    if verdict.counterexample:
        cex = verdict.counterexample
        doc["counterexample"] = {
            "cycle": cex.cycle,
            "output": cex.output,
            "left_value": "x" if cex.left_value is None else cex.left_value,
            "right_value": "x" if cex.right_value is None else cex.right_value,
            "inputs": ["".join(str(b) for b in row) for row in cex.inputs],
        }
    print(json.dumps(doc, indent=2))
    if not verdict.equivalent:
        return _fail("not-equivalent", f"first divergence at cycle {verdict.counterexample.cycle}")
    return 0


def _cmd_attack(args) -> int:
    orig = _load_bench(args.orig)
    locked = _load_bench(args.locked)
    if args.manifest:
        manifest = LockManifest.from_json(Path(args.manifest).read_text(encoding="utf-8"))
        num_keys, key_bits = manifest.num_keys, manifest.key_bits
    elif args.k and args.ki:
        num_keys, key_bits = args.k, args.ki
    else:
        raise ValueError("give --manifest or both --k and --ki")
    if args.mode == "bruteforce":
        result = brute_force_attack(
            locked,
            orig,
            num_keys=num_keys,
            key_bits=key_bits,
            depth=args.depth,
            candidate_budget=args.budget,
            seed=args.seed,
        )
        survivors = [
            ",".join(KeySchedule(keys=s, width=key_bits).binary_strings())
            for s in result.survivors
        ]
    else:
        result = static_key_attack(
            locked,
            orig,
            key_bits=key_bits,
            depth=args.depth,
            candidate_budget=args.budget,
            seed=args.seed,
        )
        survivors = [KeySchedule(keys=(v,), width=key_bits).binary_strings()[0] for v in result.survivors]
    doc = {
        "mode": args.mode,
        "search_space_size": result.search_space_size,
        "equivalence": result.mode,
        "depth": result.depth,
        "survivors": survivors,
    }
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    print(f"enumerated {result.search_space_size} candidates in {result.elapsed:.2f}s", file=sys.stderr)
    return 0


def _cmd_report(args) -> int:
    orig = _load_bench(args.orig)
    locked = _load_bench(args.locked)
    manifest = LockManifest.from_json(Path(args.manifest).read_text(encoding="utf-8"))
    report = overhead_report(orig, locked, manifest)
    doc = {
        "original": vars(report.original),
        "locked": vars(report.locked),
        "delta": vars(report.delta),
        "per_ff_mux_count": report.per_ff_mux_count,
        "key_inputs": report.key_inputs,
        "schedule_bits": report.schedule_bits,
        "layers": report.layers,
        "relative_gate_overhead": round(report.relative_gate_overhead, 6),
    }
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.csv:
        header = [
            "circuit", "orig_gates", "locked_gates", "added_gates", "added_dffs",
            "added_inputs", "per_ff_mux_count", "relative_gate_overhead",
        ]
        row = [
            orig.name, report.original.gates, report.locked.gates, report.delta.gates,
            report.delta.dffs, report.delta.inputs, report.per_ff_mux_count,
            round(report.relative_gate_overhead, 6),
        ]
        Path(args.csv).write_text(
            ",".join(header) + "\n" + ",".join(str(v) for v in row) + "\n",
            encoding="utf-8",
        )
    return 0


def _add_schedule_options(parser, with_static: bool = False) -> None:
    parser.add_argument("--keys", help="comma-separated binary key values, MSB first")
    parser.add_argument("--keys-file", help="schedule file, one binary key per line")
    if with_static:
        parser.add_argument("--static-key", help="hold one binary key value every cycle")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tklock", description="Time-keyed multi-key logic locking toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lock-str", help="lock a .bench netlist")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--k", type=int, required=True, help="number of key values (power of two)")
    p.add_argument("--ki", type=int, required=True, help="bits per key value")
    p.add_argument("--ffs", type=int, default=1, help="number of flip-flops to lock")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--targets", help="comma-separated DFF output nets to lock")
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", required=True)
    _add_schedule_options(p)
    p.set_defaults(func=_cmd_lock_str)

    p = sub.add_parser("lock-beh", help="lock a KISS2 state machine")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--k", type=int, required=True, help="number of key values (any >= 2)")
    p.add_argument("--ki", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", required=True)
    _add_schedule_options(p)
    p.set_defaults(func=_cmd_lock_beh)

    p = sub.add_parser("sim", help="simulate a netlist and export a trace CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--cycles", type=int, default=16)
    p.add_argument("--stimulus", help="file with one row of non-key input bits per cycle")
    p.add_argument("--random-seed", type=int, default=0, help="seed for generated stimulus")
    p.add_argument("--manifest", help="drive key inputs with the manifest's schedule")
    p.add_argument("--override", action="append", help="CYCLE=BITS wrong-key injection")
    p.add_argument("--init", choices=("zero", "x"), default="zero")
    p.add_argument("--watch", help="comma-separated internal nets to record")
    p.add_argument("--trace", help="output CSV path (default: stdout)")
    _add_schedule_options(p, with_static=True)
    p.set_defaults(func=_cmd_sim)

    p = sub.add_parser("verify", help="check locked-vs-original equivalence")
    p.add_argument("--orig", required=True)
    p.add_argument("--locked", required=True)
    p.add_argument("--manifest")
    p.add_argument("--mode", choices=("exhaustive", "random"), default="exhaustive")
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--budget", type=int, default=2**20, help="exhaustive sequence budget")
    p.add_argument("--sequences", type=int, default=1000)
    p.add_argument("--cycles", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", choices=("zero", "x"), default="zero")
    _add_schedule_options(p, with_static=True)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("attack", help="enumerate key sequences or static keys")
    p.add_argument("--orig", required=True)
    p.add_argument("--locked", required=True)
    p.add_argument("--mode", choices=("bruteforce", "static"), default="bruteforce")
    p.add_argument("--manifest", help="read k and ki from a manifest")
    p.add_argument("--k", type=int)
    p.add_argument("--ki", type=int)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--budget", type=int, default=2**20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the attack report JSON here")
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("report", help="overhead report for a locked netlist")
    p.add_argument("--orig", required=True)
    p.add_argument("--locked", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="write the report JSON here (default: stdout)")
    p.add_argument("--csv", help="also write a one-row CSV summary")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BenchFormatError, Kiss2FormatError) as exc:
        return _fail("parse-error", str(exc))
    except BudgetExceededError as exc:
        return _fail("budget-exceeded", str(exc))
    except (FsmError, ValueError) as exc:
        return _fail("invalid-input", str(exc))
    except OSError as exc:
        return _fail("io-error", str(exc))


if __name__ == "__main__":
    sys.exit(main())
