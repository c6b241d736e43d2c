"""Command-line interface: ``rfg <command> ...``.

Exit codes: 0 success, 1 negative verdict (only where an expectation was
given), 2 input or protocol error.
"""
from __future__ import annotations

import argparse
import csv
import io as _stdio
import sys
from pathlib import Path

from . import coordinator as coord
from .core import maxmin, nash_equilibria, pareto_frontier
from .errors import RFGError
from .evolution import evolve, summary_csv
from .io import (
    format_rational,
    load_game,
    load_profile,
    load_reactions,
    parse_config,
    parse_events,
    serialize_profile,
    parse_label,
    read_file,
)
from .reaction import (
    construct_isolation,
    construct_promise_threat,
    construct_sequential,
    fixed_point_report,
    is_rfe,
)

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT = 0, 1, 2


def _fmt_outcome(o) -> str:
    return "(" + ", ".join(map(str, o)) + ")"


def _fmt_value(x) -> str:
    return format_rational(x) if hasattr(x, "denominator") else str(x)


def _csv_text(rows) -> str:
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def cmd_analyze(args) -> int:
    game = load_game(args.game)
    nash = sorted(nash_equilibria(game), key=game.index)
    mm = [maxmin(game, i) for i in range(game.n)]
    front = sorted(pareto_frontier(game, game.outcomes()), key=game.index)
    if args.csv:
        rows = [("section", "item", "value")]
        rows += [("nash", _fmt_outcome(a), " ".join(_fmt_value(x) for x in game.payoff(a))) for a in nash]
        for p, m in zip(game.players, mm):
            safe = " ".join(str(a) for a in game.actions[game.player_index(p)] if a in m.safe_actions)
            rows.append(("maxmin", p, f"{_fmt_value(m.value)} safe={safe}"))
        rows += [("pareto", _fmt_outcome(a), " ".join(_fmt_value(x) for x in game.payoff(a))) for a in front]
        sys.stdout.write(_csv_text(rows))
        return EXIT_OK
    out = [f"players: {' '.join(map(str, game.players))}"]
    out.append("nash: " + (", ".join(map(_fmt_outcome, nash)) if nash else "none"))
    for p, m in zip(game.players, mm):
        safe = " ".join(str(a) for a in game.actions[game.player_index(p)] if a in m.safe_actions)
        out.append(f"maxmin {p}: {_fmt_value(m.value)} (safe: {safe})")
    out.append("pareto: " + ", ".join(map(_fmt_outcome, front)))
    print("\n".join(out))
    return EXIT_OK


def cmd_check(args) -> int:
    game = load_game(args.game)
    profile = load_profile(args.profile, game)
    verdict = is_rfe(game, profile)
    rep = fixed_point_report(game, profile)
    if args.csv:
        rows = [("verdict", str(verdict))]
        rows += [("fixed_point", _fmt_outcome(a)) for a in rep.ordered]
        rows.append(("top", _fmt_outcome(rep.top) if rep.top else ""))
        rows.append(("values", " ".join(_fmt_value(v) for v in rep.values)))
        sys.stdout.write(_csv_text(rows))
    else:
        print(f"verdict: {verdict}")
        print("fixed points: " + (", ".join(map(_fmt_outcome, rep.ordered)) or "none"))
        print(f"top: {_fmt_outcome(rep.top) if rep.top else 'none'}")
        print("values: " + " ".join(_fmt_value(v) for v in rep.values))
    if args.expect == "rfe" and not verdict:
        return EXIT_NEGATIVE
    if args.expect == "not-rfe" and verdict:
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_construct(args) -> int:
    game = load_game(args.game)
    target = tuple(parse_label(t) for t in args.target) if args.target else None
    if args.method == "sequential":
        profile = construct_sequential(game)
    else:
        if target is None:
            print(f"error: --target is required for {args.method}", file=sys.stderr)
            return EXIT_INPUT
        build = construct_promise_threat if args.method == "promise-threat" else construct_isolation
        profile = build(game, target)
    text = serialize_profile(profile)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_coordinate(args) -> int:
    path = Path(args.script)
    script = parse_events(read_file(path), str(path))
    state, events = script.resolve(path.parent)
    state = coord.run_events(state, events)
    sys.stdout.write(coord.dump(state))
    if args.trace:
        Path(args.trace).write_text(coord.trace_csv(state))
    return EXIT_OK


def cmd_evolve(args) -> int:
    path = Path(args.config)
    config = parse_config(read_file(path), str(path), seed=args.seed)
    result = evolve(config)
    text = summary_csv(result.summary, args.digits)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_digest(args) -> int:
    game = load_game(args.game)
    reactions = load_reactions([args.reaction], game)
    if len(reactions) != 1:
        print("error: reaction file must hold exactly one reaction", file=sys.stderr)
        return EXIT_INPUT
    print(coord.digest(game, reactions[0], bytes.fromhex(args.salt)).hex())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rfg", description="Reaction-function games toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="Nash equilibria, maxmin values and Pareto frontier")
    p.add_argument("game")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("check", help="equilibrium verdict and fixed points of a profile")
    p.add_argument("game")
    p.add_argument("profile", nargs="+", help="reaction files (one or more blocks each)")
    p.add_argument("--expect", choices=("rfe", "not-rfe"))
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("construct", help="build an equilibrium profile")
    p.add_argument("game")
    p.add_argument("--method", required=True, choices=("sequential", "promise-threat", "isolation"))
    p.add_argument("--target", nargs="+", help="target outcome, one label per player")
    p.add_argument("--out")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("coordinate", help="replay a coordinator event script")
    p.add_argument("script")
    p.add_argument("--trace", help="write the search trace CSV here")
    p.set_defaults(func=cmd_coordinate)

    p = sub.add_parser("evolve", help="run the evolutionary study and print the summary CSV")
    p.add_argument("config", help="JSON config")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--digits", type=int, default=4, help="decimal places for rational columns")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("digest", help="commitment digest of a reaction with a salt")
    p.add_argument("game")
    p.add_argument("reaction")
    p.add_argument("salt", help="64 hex digits")
    p.set_defaults(func=cmd_digest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RFGError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
