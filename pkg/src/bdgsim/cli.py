"""Command-line entry point: ``bdgsim {generate,run,sweep,oracle,verify}``.

Exit codes: 0 success, 1 usage or input errors, 2 validation/verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .engine import read_trace, run, verify_trace, write_trace
from .metrics import compute_report, write_cdf_csv, write_sweep_csv
from .offline import OracleLimitError, benchmark_offline, brute_force_optimal
from .policies import POLICY_NAMES, make_policy
from .seqio import SequenceParseError, read_sequence, validate_sequence, write_sequence
from .sweep import SweepConfig, run_sweep
from .traffic import AdversarySpec, VideoScenario, gen_lower_bound, gen_token_bucket_lower_bound, gen_video

EXIT_OK, EXIT_USAGE, EXIT_INVALID = 0, 1, 2


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_config(text: str) -> dict[str, str]:
    """Flat ``key=value`` pairs separated by whitespace or newlines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        for token in raw.split("#", 1)[0].split():
            key, sep, value = token.partition("=")
            if not sep or not key:
                raise ConfigError(f"line {lineno}: expected key=value, got {token!r}")
            out[key] = value
    return out


def _int(cfg: dict, key: str, default=None) -> int:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing required field {key!r}")
        return default
    try:
        return int(cfg[key])
    except ValueError:
        raise ConfigError(f"field {key!r}: not an integer: {cfg[key]!r}") from None


def _ints(cfg: dict, key: str, default: tuple[int, ...]) -> tuple[int, ...]:
    if key not in cfg:
        return default
    try:
        return tuple(int(x) for x in cfg[key].split(",") if x)
    except ValueError:
        raise ConfigError(f"field {key!r}: expected comma-separated integers, got {cfg[key]!r}") from None


def _check_keys(cfg: dict, allowed: set[str]) -> None:
    unknown = sorted(set(cfg) - allowed - {"kind"})
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(unknown)}")


def video_from_config(cfg: dict) -> VideoScenario:
    _check_keys(cfg, {"k", "d", "streams", "frames_per_stream", "frame_interval", "jitter", "seed"})
    spec = VideoScenario(
        k=_int(cfg, "k"),
        d=_int(cfg, "d"),
        streams=_int(cfg, "streams", 50),
        frames_per_stream=_int(cfg, "frames_per_stream", 3600),
        frame_interval=_int(cfg, "frame_interval") if "frame_interval" in cfg else None,
        jitter_max=_int(cfg, "jitter", 5),
        seed=_int(cfg, "seed", 0),
    )
    try:
        spec.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return spec


def adversary_from_config(cfg: dict) -> tuple[AdversarySpec, str, int]:
    _check_keys(cfg, {"b", "d", "k", "n", "variant", "policy", "seed"})
    spec = AdversarySpec(
        b=_int(cfg, "b"),
        d=_int(cfg, "d"),
        k=_int(cfg, "k"),
        n=_int(cfg, "n"),
        variant=cfg.get("variant", "burst_bounded"),
    )
    policy = cfg.get("policy", "greedy")
    if policy not in POLICY_NAMES:
        raise ConfigError(f"field 'policy': unknown policy {policy!r}; valid names: {', '.join(POLICY_NAMES)}")
    try:
        spec.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return spec, policy, _int(cfg, "seed", 0)


def sweep_from_config(cfg: dict) -> SweepConfig:
    _check_keys(
        cfg,
        {"policies", "k", "d", "dk", "jitter", "reps", "seed", "streams", "frames_per_stream", "workers", "verify"},
    )
    policies = tuple(p for p in cfg.get("policies", "greedy,greedy-slack,opportunistic").split(",") if p)
    for p in policies:
        if p not in POLICY_NAMES:
            raise ConfigError(f"field 'policies': unknown policy {p!r}; valid names: {', '.join(POLICY_NAMES)}")
    sc = SweepConfig(
        policies=policies,
        k=_ints(cfg, "k", (6,)),
        d=_ints(cfg, "d", ()),
        dk=_ints(cfg, "dk", ()),
        jitter=_ints(cfg, "jitter", (5,)),
        reps=_int(cfg, "reps", 5),
        seed=_int(cfg, "seed", 0),
        streams=_int(cfg, "streams", 50),
        frames_per_stream=_int(cfg, "frames_per_stream", 3600),
        workers=_int(cfg, "workers", 1),
        verify=cfg.get("verify", "0") in ("1", "true", "yes"),
    )
    if not sc.d and not sc.dk:
        raise ConfigError("missing required field 'd' (or 'dk')")
    return sc


def _load_config(path: str) -> dict:
    try:
        return parse_config(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None


def cmd_generate(args) -> int:
    cfg = _load_config(args.config)
    kind = cfg.get("kind")
    if kind == "video":
        seq = gen_video(video_from_config(cfg))
        sidecar = None
    elif kind == "adversary":
        spec, policy, seed = adversary_from_config(cfg)
        gen = gen_lower_bound if spec.variant == "burst_bounded" else gen_token_bucket_lower_bound
        inst = gen(spec, policy, seed)
        seq = inst.sequence
        sidecar = {
            "policy": inst.policy,
            "adversary_frames": sorted(inst.adversary_frames),
            "adversary_schedule": [[t, f, i] for t, (f, i) in sorted(inst.adversary_schedule.items())],
            "stages": inst.stages,
        }
    else:
        raise ConfigError(f"field 'kind': expected video or adversary, got {kind!r}")
    write_sequence(seq, args.out)
    if sidecar is not None:
        Path(str(args.out) + ".adversary.json").write_text(json.dumps(sidecar, indent=1) + "\n")
    problems = validate_sequence(seq)
    n_packets = sum(len(f.packets) for f in seq.frames)
    print(f"wrote {args.out}: {len(seq.frames)} frames, {n_packets} packets, k={seq.k} d={seq.d} b={seq.b}")
    if problems:
        print(f"INVALID: {len(problems)} violation(s)")
        for p in problems[:20]:
            print(f"  {p}")
        return EXIT_INVALID
    print("valid")
    return EXIT_OK


def cmd_run(args) -> int:
    seq = read_sequence(args.seq)
    tie = tuple(args.tie_break.split(",")) if args.tie_break else None
    policy = make_policy(args.policy, args.seed, tie, args.provisional_rule)
    trace = run(seq, policy, args.seed)
    bench = benchmark_offline(seq)
    report = compute_report(trace, bench)
    if args.out:
        write_trace(trace, args.out)
    report_path = args.report or (str(args.out) + ".report.json" if args.out else None)
    if report_path:
        Path(report_path).write_text(json.dumps(report.as_dict(), indent=1, sort_keys=True) + "\n")
    if args.cdf:
        write_cdf_csv(report, args.cdf)
    print(f"policy={trace.policy} seed={args.seed}")
    print(f"goodput={report.goodput} benchmark={report.benchmark_goodput} ratio={report.goodput_ratio:.4f}")
    print(f"packets delivered={report.delivered_packets}/{report.total_packets}")
    for reason, n in report.drops_by_reason.items():
        if n:
            print(f"  dropped {reason}: {n}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    if cfg.get("kind", "sweep") != "sweep":
        raise ConfigError(f"field 'kind': expected sweep, got {cfg['kind']!r}")
    sc = sweep_from_config(cfg)
    if args.workers is not None:
        sc = SweepConfig(**{**sc.__dict__, "workers": args.workers})
    rows, errors = run_sweep(sc)
    write_sweep_csv(rows, args.out)
    print(f"wrote {args.out}: {len(rows)} rows")
    if errors:
        Path(str(args.out) + ".errors").write_text("\n".join(errors) + "\n")
        print(f"{len(errors)} cell(s) failed, see {args.out}.errors", file=sys.stderr)
    return EXIT_OK


def cmd_oracle(args) -> int:
    seq = read_sequence(args.seq)
    try:
        opt = brute_force_optimal(seq, args.max_frames)
    except OracleLimitError as exc:
        print(f"refusing: {exc} (raise --max-frames to override)", file=sys.stderr)
        return EXIT_INVALID
    bench = benchmark_offline(seq)
    out = {
        "optimal": {
            "goodput": opt.goodput,
            "accepted_frames": sorted(opt.accepted_frames),
            "schedule": [[t, f, i] for t, (f, i) in sorted(opt.schedule.items())],
        },
        "benchmark": {
            "goodput": bench.goodput,
            "accepted_frames": sorted(bench.accepted_frames),
            "schedule": [[t, f, i] for t, (f, i) in sorted(bench.schedule.items())],
        },
    }
    text = json.dumps(out, indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    print(f"optimal goodput={opt.goodput} benchmark goodput={bench.goodput}")
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    seq = read_sequence(args.seq)
    trace = read_trace(args.trace)
    problems = verify_trace(seq, trace)
    if problems:
        print(f"{len(problems)} violation(s):")
        for p in problems:
            print(f"  {p}")
        return EXIT_INVALID
    print("trace ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bdgsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="generate a sequence file from a scenario config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="simulate one policy on a sequence file")
    p.add_argument("--seq", required=True)
    p.add_argument("--policy", default="greedy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="trace output (JSON lines)")
    p.add_argument("--report", help="metrics report output (JSON)")
    p.add_argument("--cdf", help="per-stream completion CSV output")
    p.add_argument("--tie-break", help="comma-separated tie-break chain")
    p.add_argument("--provisional-rule", default="slot_count", choices=("slot_count", "literal"))
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a parameter sweep and write CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exact optimum and offline benchmark for a small sequence")
    p.add_argument("--seq", required=True)
    p.add_argument("--max-frames", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="check a trace against its sequence")
    p.add_argument("--seq", required=True)
    p.add_argument("--trace", required=True)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SequenceParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
