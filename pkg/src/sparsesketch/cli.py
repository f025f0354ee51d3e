"""Command-line entry point: ``sparsesketch <subcommand> [options]``.

Exit codes: 0 success, 1 a statistical check missed its target (suppressed
by --soft-stats), 2 usage or configuration error, 3 a hard assertion failed.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from .errors import SketchError
from .fourier import event_frequencies
from .harness import (
    GENERATORS, FourierTask, IdentifyTask, PruneTask, RecoverTask, SetQueryTask, SignalSpec,
    TailTask, emit_report, generate, read_stream, run_trials, summarize,
)
from .hashing import biased_walk_return_freq, gaussian_tail_bounds_check
from .oracle import naive_dft
from .profiles import get_profile, parse_value, read_config
from .signal_io import read_signal, read_support

EXIT_STATS = 1
EXIT_USAGE = 2
EXIT_HARD = 3


class _Output:
    def __init__(self, args):
        self.fmt = args.format
        self.fh = open(args.out, "w") if args.out else sys.stdout
        self.comments: list[str] = []

    def record(self, rec: dict) -> None:
        if self.fmt == "json":
            self.fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
        else:
            self.comments.append(json.dumps(rec, separators=(",", ":")))

    def trials(self, reports) -> None:
        if self.fmt == "json":
            for r in reports:
                self.fh.write(json.dumps({"type": "trial", **r.as_record()}, separators=(",", ":")) + "\n")
        else:
            self.fh.write(emit_report(reports, "csv", self.comments))
            self.comments = []

    def close(self) -> None:
        for c in self.comments:
            self.fh.write(f"# {c}\n")
        if self.fh is not sys.stdout:
            self.fh.close()


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("common")
    g.add_argument("--input", help="signal file (text, or .bin/.cbin binary)")
    g.add_argument("--signal", choices=GENERATORS, help="synthetic signal generator")
    g.add_argument("--n", type=int, default=1 << 12, help="signal length for generators")
    g.add_argument("--k", type=int, default=4)
    g.add_argument("--eps", type=float, default=0.5)
    g.add_argument("--delta", type=float, default=None)
    g.add_argument("--p", type=int, default=2, choices=(1, 2))
    g.add_argument("--magnitude", type=float, default=None, help="absolute spike magnitude")
    g.add_argument("--spike-factor", type=float, default=10.0,
                   help="spike magnitude as a multiple of sqrt(eps/k)*||tail||")
    g.add_argument("--noise", type=float, default=None, help="noise scale for the generator")
    g.add_argument("--ratio", type=float, default=0.5, help="geometric-decay ratio")
    g.add_argument("--profile", default=None, help="constant profile: paper or desk (default $SKETCH_PROFILE or desk)")
    g.add_argument("--config", help="key = value file of profile overrides")
    g.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one profile constant")
    g.add_argument("--seed", type=int, default=0, help="master seed (u64)")
    g.add_argument("--trials", type=int, default=1)
    g.add_argument("--jobs", type=int, default=1)
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--out", help="write the report here instead of stdout")
    g.add_argument("--soft-stats", action="store_true", help="exit 0 even if a statistical target is missed")
    g.add_argument("--timings", action="store_true", help="include wall-clock timings in trial records")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsesketch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        _common(p)
        return p

    add("tail-est", "tail-energy estimate V and its bracket")
    add("identify", "candidate list from the interval forest")
    p = add("prune", "prune a candidate list to beta*k indices")
    p.add_argument("--list", help="file of candidate indices L (default: run identification)")
    p.add_argument("--dump-estimates", action="store_true")
    p = add("set-query", "estimate values on a known support")
    p.add_argument("--stream", help="file of 'i,delta' updates")
    p.add_argument("--support", help="file of support indices")
    p = add("fourier-sq", "Fourier set query from time samples")
    p.add_argument("--support", help="file of frequency indices")
    add("recover", "full l2/l2 recovery pipeline")
    p = add("events", "collision / offset / noise event rates")
    p.add_argument("--buckets", type=int, default=256)
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--support", help="file of frequency indices")
    p = add("filter-check", "build a flat-window filter and verify it")
    p.add_argument("--buckets", type=int, default=64)
    p.add_argument("--alpha", type=float, default=0.25)
    p = add("oracle-check", "compare every linear sketch against its dense matrix")
    p.add_argument("--seeds", type=int, default=20)
    p = add("walk", "biased random-walk return frequency")
    p.add_argument("--p-right", type=float, default=0.9)
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--first-step", choices=("right", "random"), default="right")
    p = add("gaussian-fact", "Gaussian small-ball and band probabilities")
    p.add_argument("--t", type=float, default=0.5)
    p = sub.add_parser("acceptance", help="run acceptance criteria")
    p.add_argument("-c", "--criterion", type=int, action="append", choices=sorted(acceptance.CRITERIA))
    p.add_argument("--seed", type=int, default=acceptance.DEFAULT_SEED)
    p.add_argument("--out", help="write JSON results here")
    return parser


def _profile(args):
    overrides = read_config(args.config) if args.config else {}
    for item in args.set:
        if "=" not in item:
            raise SketchError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = parse_value(value)
    return get_profile(args.profile, overrides)


def _spec(args, default_generator: str, default_noise: float = 1.0) -> SignalSpec:
    noise = default_noise if args.noise is None else args.noise
    if args.input:
        return SignalSpec("custom-file", n=0, k=args.k, path=args.input,
                          support_path=getattr(args, "support", None))
    return SignalSpec(args.signal or default_generator, n=args.n, k=args.k, magnitude=args.magnitude,
                      spike_factor=args.spike_factor, eps=args.eps, noise=noise, ratio=args.ratio)


def _header(out, args, profile, config: dict) -> None:
    out.record({"type": "header", "command": args.command, "seed": args.seed, "trials": args.trials,
                "profile": profile.as_dict(), "config": config})


def _run_statistical(args, out, task, target) -> int:
    reports = run_trials(task, args.trials, args.seed, args.jobs)
    out.trials(reports)
    summary = summarize(reports, target)
    out.record(summary)
    return 0 if summary.get("passed", True) or args.soft_stats else EXIT_STATS


def _support_arg(args):
    return tuple(read_support(args.support).tolist()) if getattr(args, "support", None) else None


def cmd_tail_est(args, out, profile):
    delta = args.delta if args.delta is not None else 0.05
    task = TailTask(_spec(args, "ones"), args.k, args.p, delta, profile)
    _header(out, args, profile, {"k": args.k, "p": args.p, "delta": delta, "signal": task.spec.generator})
    return _run_statistical(args, out, task, 1 - delta)


def cmd_identify(args, out, profile):
    task = IdentifyTask(_spec(args, "spikes+gaussian-tail"), args.k, args.eps, profile, args.timings)
    _header(out, args, profile, {"k": args.k, "eps": args.eps, "signal": task.spec.generator})
    return _run_statistical(args, out, task, 0.9)


def cmd_prune(args, out, profile):
    L = tuple(read_support(args.list).tolist()) if args.list else None
    task = PruneTask(_spec(args, "spikes+gaussian-tail"), args.k, args.eps, profile, L, args.dump_estimates)
    _header(out, args, profile, {"k": args.k, "eps": args.eps, "signal": task.spec.generator})
    return _run_statistical(args, out, task, 0.9)


def cmd_set_query(args, out, profile):
    support = _support_arg(args)
    if args.stream:
        task = SetQueryTask(None, args.k, args.eps, profile, n=args.n if args.signal is None else None,
                            stream=tuple(read_stream(args.stream)), support=support)
    else:
        task = SetQueryTask(_spec(args, "spikes+gaussian-tail"), args.k, args.eps, profile, support=support)
    _header(out, args, profile, {"k": args.k, "eps": args.eps, "stream": args.stream})
    code = _run_statistical(args, out, task, 0.9)
    return code


def cmd_fourier_sq(args, out, profile):
    delta = args.delta if args.delta is not None else 1e-6
    task = FourierTask(_spec(args, "tones", 0.01), args.k, args.eps, delta, profile, _support_arg(args))
    _header(out, args, profile, {"k": args.k, "eps": args.eps, "delta": delta, "signal": task.spec.generator})
    return _run_statistical(args, out, task, 0.9)


def cmd_recover(args, out, profile):
    task = RecoverTask(_spec(args, "spikes+gaussian-tail"), args.k, args.eps, profile, timings=args.timings)
    _header(out, args, profile, {"k": args.k, "eps": args.eps, "signal": task.spec.generator})
    return _run_statistical(args, out, task, 0.75)


def cmd_events(args, out, profile):
    spec = _spec(args, "tones", 0.01)
    g = generate(spec, args.seed)
    x = np.asarray(g.x, dtype=np.complex128)
    S = read_support(args.support) if args.support else g.support
    trials = max(args.trials, 1000)
    _header(out, args, profile, {"B": args.buckets, "alpha": args.alpha, "size_S": int(S.size), "trials": trials})
    r = event_frequencies(naive_dft(x), S, args.buckets, args.alpha, trials, args.seed)
    ok = True
    for name in ("collision", "offset", "noise"):
        e = r[name]
        passed = e["frequency"] <= e["bound"] + 3 * e["stderr"]
        ok &= passed
        out.record({"type": "event", "event": name, "profile": profile.name, **e, "passed": passed})
    return 0 if ok or args.soft_stats else EXIT_STATS


def cmd_filter_check(args, out, profile):
    delta = args.delta if args.delta is not None else 1e-6
    r = acceptance.filter_report(args.n, args.buckets, args.alpha, delta)
    _header(out, args, profile, {"B": args.buckets, "alpha": args.alpha, "delta": delta})
    ok = r["flat_exact"] and r["stop_exact"] and r["in_unit_interval"] and r["delta_ok"]
    out.record({"type": "filter", "profile": profile.name, **r, "passed": bool(ok)})
    return 0 if ok else EXIT_HARD


def cmd_oracle_check(args, out, profile):
    _header(out, args, profile, {"n": args.n, "seeds": args.seeds})
    ok = True
    for s in range(args.seeds):
        res = acceptance.oracle_equivalence(args.n, args.seed + s, profile)
        ok &= all(res.values())
        out.record({"type": "oracle", "profile": profile.name, "seed": args.seed + s, **res})
    return 0 if ok else EXIT_HARD


def cmd_walk(args, out, profile):
    _header(out, args, profile, {"p_right": args.p_right, "steps": args.steps})
    r = biased_walk_return_freq(args.p_right, args.steps, max(args.trials, 1), args.seed, args.first_step)
    passed = r["frequency"] <= r["bound"] + 3 * r["stderr"]
    out.record({"type": "walk", **r, "passed": passed})
    return 0 if passed or args.soft_stats else EXIT_STATS


def cmd_gaussian_fact(args, out, profile):
    _header(out, args, profile, {"t": args.t})
    r = gaussian_tail_bounds_check(args.t, max(args.trials, 1), args.seed)
    passed = (r["p_small"] <= r["p_small_bound"] + 3 * r["p_small_stderr"]
              and r["p_band"] >= r["p_band_bound"] - 3 * r["p_band_stderr"])
    out.record({"type": "gaussian-fact", **r, "passed": passed})
    return 0 if passed or args.soft_stats else EXIT_STATS


def cmd_acceptance(args) -> int:
    chosen = args.criterion or sorted(acceptance.CRITERIA)
    results = []
    for number in chosen:
        fn = acceptance.CRITERIA[number]
        res = fn(seed=args.seed) if "seed" in fn.__code__.co_varnames else fn()
        print(res.line(), flush=True)
        results.append(res)
    if args.out:
        Path(args.out).write_text("".join(json.dumps(r.as_dict()) + "\n" for r in results))
    return 0 if all(r.passed for r in results) else EXIT_STATS


COMMANDS = {
    "tail-est": cmd_tail_est, "identify": cmd_identify, "prune": cmd_prune, "set-query": cmd_set_query,
    "fourier-sq": cmd_fourier_sq, "recover": cmd_recover, "events": cmd_events,
    "filter-check": cmd_filter_check, "oracle-check": cmd_oracle_check, "walk": cmd_walk,
    "gaussian-fact": cmd_gaussian_fact,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "acceptance":
            return cmd_acceptance(args)
        if not (0 <= args.seed < 1 << 64):
            raise SketchError("--seed must be an unsigned 64-bit integer")
        profile = _profile(args)
        out = _Output(args)
        try:
            return COMMANDS[args.command](args, out, profile)
        finally:
            out.close()
    except AssertionError as exc:
        print(f"hard assertion failed: {exc}", file=sys.stderr)
        return EXIT_HARD
    except (SketchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
