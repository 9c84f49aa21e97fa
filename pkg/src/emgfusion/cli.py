"""``emgfusion`` command line: data generation, benchmarks, simulations and
the arm control server/client/REPL."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from . import harness, net, synth
from .classifiers import Kind
from .config import AppConfig, load_config
from .errors import EmgFusionError
from .evaluation import cross_validate_10fold
from .labels import GestureLabel, SpeechCommand

log = logging.getLogger("emgfusion")


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # Subcommand copies use SUPPRESS so they never clobber values given
    # before the subcommand name.
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=d(0), help="master random seed (default 0)")
    g.add_argument("--config", default=d(None), help="JSON config file")
    g.add_argument("--out", default=d(None), help="write output here instead of stdout")
    g.add_argument("--port", type=int, default=d(net.DEFAULT_PORT), help="control server port")
    g.add_argument("--threshold", type=float, default=d(None), help="gesture confidence threshold")
    g.add_argument("--window-ms", type=int, default=d(None), help="speech suppression window after a gesture")
    g.add_argument("-v", "--verbose", action="store_true", default=d(False))
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emgfusion", parents=[_global_flags(False)],
                                     description=__doc__)
    common = [_global_flags(True)]
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("gen-data", parents=common, help="write a synthetic feature dataset as CSV")
    p.add_argument("--per-class", type=int, default=synth.DEFAULT_PER_CLASS)

    p = sub.add_parser("train-eval", parents=common, help="tenfold CV of all six classifiers")
    p.add_argument("--data", help="CSV from gen-data (default: generate with --seed)")
    p.add_argument("--per-class", type=int, default=synth.DEFAULT_PER_CLASS)
    p.add_argument("--kinds", default=",".join(k.value for k in Kind))

    p = sub.add_parser("sim-unimodal", parents=common, help="Monte-Carlo error trials for one modality")
    p.add_argument("--target", help="gesture label or speech command (default: all ten)")
    p.add_argument("--blocks", type=int, default=10)
    p.add_argument("--block", type=int, default=100)

    p = sub.add_parser("sim-fusion", parents=common, help="Monte-Carlo priority-fusion trials")
    p.add_argument("--pair", help="'<speech command>,<gesture>' (default: all five pairs)")
    p.add_argument("--blocks", type=int, default=4)
    p.add_argument("--block", type=int, default=50)

    p = sub.add_parser("metrics", parents=common, help="error %% and variance from block counts")
    p.add_argument("--counts", required=True, help="comma-separated error counts per block")
    p.add_argument("--block", type=int, required=True, help="trials per block")

    p = sub.add_parser("serve", parents=common, help="run the arm control server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--once", action="store_true", help="exit after the first session ends")

    p = sub.add_parser("client", parents=common, help="send request lines to a server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("messages", nargs="*", help="request lines (default: read stdin)")

    sub.add_parser("repl", parents=common, help="drive the arm interactively")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def cmd_gen_data(args, cfg: AppConfig) -> int:
    data = synth.generate_dataset(args.per_class, args.seed)
    if args.out:
        synth.save_csv(data, args.out)
        print(f"wrote {len(data)} rows to {args.out}", file=sys.stderr)
    else:
        synth.write_csv(data, sys.stdout)
    return 0


def cmd_train_eval(args, cfg: AppConfig) -> int:
    data = synth.load_csv(args.data) if args.data else synth.generate_dataset(args.per_class, args.seed)
    reports = []
    print(f"{'classifier':<20}{'accuracy':>9}{'precision':>10}{'recall':>8}{'f1':>7}", file=sys.stderr)
    for name in args.kinds.split(","):
        kind = Kind(name.strip())
        t0 = time.perf_counter()
        rep = cross_validate_10fold(kind, data, args.seed)
        p, r, f = rep.macro()
        print(f"{kind.value:<20}{rep.accuracy:>9.4f}{p:>10.4f}{r:>8.4f}{f:>7.4f}"
              f"   ({time.perf_counter() - t0:.1f}s)", file=sys.stderr)
        reports.append(rep.to_dict())
    _emit(json.dumps({"seed": args.seed, "rows": len(data), "reports": reports}, indent=2), args.out)
    return 0


def _parse_target(text: str):
    try:
        return GestureLabel.parse(text)
    except KeyError:
        return SpeechCommand.parse(text)


def cmd_sim_unimodal(args, cfg: AppConfig) -> int:
    targets = [_parse_target(args.target)] if args.target else [*GestureLabel, *SpeechCommand]
    reports = [harness.run_unimodal_trial(t, cfg.rates, args.blocks, args.block, args.seed).to_dict()
               for t in targets]
    _emit(json.dumps(reports[0] if args.target else reports, indent=2), args.out)
    return 0


def cmd_sim_fusion(args, cfg: AppConfig) -> int:
    if args.pair:
        cmd_text, gesture_text = args.pair.split(",", 1)
        pairs = [(SpeechCommand.parse(cmd_text), GestureLabel.parse(gesture_text))]
    else:
        pairs = cfg.correspondence.pairs()
    reports = [harness.run_fusion_trial(pair, cfg.rates, args.blocks, args.block, args.seed,
                                        cfg.correspondence) for pair in pairs]
    doc = {
        "reports": [r.to_dict() for r in reports],
        "mean_error_percent": harness.mean_error([r.error_percent for r in reports]),
        "config": cfg.echo(),
    }
    _emit(json.dumps(doc, indent=2), args.out)
    return 0


def cmd_metrics(args, cfg: AppConfig) -> int:
    try:
        counts = [int(c) for c in args.counts.split(",")]
    except ValueError:
        print("emgfusion metrics: --counts must be comma-separated integers", file=sys.stderr)
        return 2
    lines = [f"error_percent {harness.error_percent(counts, args.block):.4g}"]
    if len(counts) >= 2:
        lines.append(f"variance {harness.sample_variance(counts):.4f}")
    _emit("\n".join(lines), args.out)
    return 0


def cmd_serve(args, cfg: AppConfig) -> int:
    net.serve((args.host, args.port), cfg.server_config(), once=args.once)
    return 0


def cmd_client(args, cfg: AppConfig) -> int:
    messages = args.messages or [line.rstrip("\n") for line in sys.stdin if line.strip()]
    for reply in net.client_send((args.host, args.port), messages):
        print(reply)
    return 0


REPL_HELP = """commands:
  gesture <label> <confidence>   e.g. gesture FIST 0.9
  say <text>                     e.g. say move up
  state                          print servo angles
  quit"""


def run_repl(cfg: AppConfig, stdin=None, stdout=None, clock=None) -> int:
    """Interactive loop over a private server state; timestamps are wall-clock ms."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    t0 = time.monotonic()
    clock = clock or (lambda: int((time.monotonic() - t0) * 1000))
    session = net.Session(net.ArmServerState(cfg.server_config()))
    interactive = stdin.isatty() if hasattr(stdin, "isatty") else False
    if interactive:
        print(REPL_HELP, file=stdout)
    while True:
        if interactive:
            stdout.write("> ")
            stdout.flush()
        line = stdin.readline()
        if not line:
            break
        words = line.split()
        if not words:
            continue
        verb = words[0].lower()
        if verb in ("quit", "exit"):
            break
        if verb == "help":
            print(REPL_HELP, file=stdout)
            continue
        if verb == "state":
            print(session.handle("STATE"), file=stdout)
            continue
        if verb == "gesture" and len(words) == 3:
            request = f"EVT GESTURE {clock()} {words[1]} {words[2]}"
        elif verb == "say" and len(words) > 1:
            request = f"EVT SPEECH {clock()} {' '.join(words[1:])}"
        else:
            print("?? try 'help'", file=stdout)
            continue
        reply = session.handle(request)
        print(reply, file=stdout)
        if reply.startswith("DEC"):
            print(session.handle("STATE"), file=stdout)
    return 0


def cmd_repl(args, cfg: AppConfig) -> int:
    return run_repl(cfg)


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train-eval": cmd_train_eval,
    "sim-unimodal": cmd_sim_unimodal,
    "sim-fusion": cmd_sim_fusion,
    "metrics": cmd_metrics,
    "serve": cmd_serve,
    "client": cmd_client,
    "repl": cmd_repl,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.threshold, args.window_ms)
        return COMMANDS[args.command](args, cfg)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"emgfusion {args.command}: {exc}", file=sys.stderr)
        return 1
    except (EmgFusionError, ValueError, KeyError) as exc:
        print(f"emgfusion {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
