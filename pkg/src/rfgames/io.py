"""Plain-text file formats.

Game file::

    players 1 2
    actions 1 C D
    actions 2 C D
    payoffs
    C C : 2 2
    C D : 0 3
    ...

or a single ``kind weakest-link|public-good <n> <H> <lambda>`` line.

Reaction (profile) file: one or more blocks, each starting with
``owner <player>`` followed either by ``others... -> own`` lines covering the
whole domain or by one builtin line (``br``, ``rstar``, ``constant <a>``,
``match-min``, ``promise-threat <target...>``).

Event script: ``game <file>``, ``deadline <t>`` and then one event per line
(``commit <player> <hex>``, ``connect <player> <reaction-file> <salt-hex> <max>
<deposit>``, ``tick``, ``search``). Paths are relative to the script.

``#`` starts a comment everywhere. Labels that look like integers are read
as integers.
"""
from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .core import StrategicGame, as_fraction
from .errors import ParseError, RFGError
from .evolution import EvolutionConfig
from .investment import PUBLIC_GOOD, WEAKEST_LINK, InvestmentGame, br_reaction, rstar_reaction
from .reaction import (
    Profile,
    ReactionFunction,
    best_reply_reaction,
    construct_promise_threat,
    match_min_reaction,
)

_INT = re.compile(r"^-?\d+$")


def _lines(text: str):
    for k, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield k, line


def parse_label(tok: str):
    return int(tok) if _INT.match(tok) else tok


def _rational(tok: str, line, source) -> Fraction:
    try:
        return as_fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"not a rational: {tok!r}", line, source) from None


def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# games
# ---------------------------------------------------------------------------


def parse_game(text: str, source: Optional[str] = None) -> StrategicGame:
    players = None
    actions = {}
    payoffs = {}
    in_payoffs = False
    for k, line in _lines(text):
        toks = line.split()
        if toks[0] == "kind" and players is None and not actions:
            if len(toks) != 5:
                raise ParseError("expected: kind <weakest-link|public-good> <n> <H> <lambda>", k, source)
            kind = toks[1]
            if kind not in (WEAKEST_LINK, PUBLIC_GOOD):
                raise ParseError(f"unknown game kind {kind!r}", k, source)
            if not (_INT.match(toks[2]) and _INT.match(toks[3])):
                raise ParseError("n and H must be integers", k, source)
            lam = _rational(toks[4], k, source)
            try:
                return InvestmentGame(int(toks[2]), int(toks[3]), kind, lam)
            except RFGError as e:
                raise ParseError(str(e), k, source) from None
        if in_payoffs:
            if ":" not in line:
                raise ParseError("payoff line needs 'actions : payoffs'", k, source)
            left, right = line.split(":", 1)
            outcome = tuple(parse_label(t) for t in left.split())
            vals = [_rational(t, k, source) for t in right.split()]
            if len(outcome) != len(players) or len(vals) != len(players):
                raise ParseError(f"expected {len(players)} actions and {len(players)} payoffs", k, source)
            for i, a in enumerate(outcome):
                if a not in actions[players[i]]:
                    raise ParseError(f"{a!r} is not an action of player {players[i]}", k, source)
            if outcome in payoffs:
                raise ParseError(f"duplicate outcome {outcome!r}", k, source)
            payoffs[outcome] = vals
        elif toks[0] == "players":
            players = tuple(toks[1:])
        elif toks[0] == "actions":
            if players is None:
                raise ParseError("'actions' before 'players'", k, source)
            if len(toks) < 2 or toks[1] not in players:
                raise ParseError("expected: actions <player> <labels...>", k, source)
            actions[toks[1]] = tuple(parse_label(t) for t in toks[2:])
        elif toks[0] == "payoffs":
            if players is None or set(actions) != set(players):
                raise ParseError("'payoffs' needs players and every action list first", k, source)
            in_payoffs = True
        else:
            raise ParseError(f"unexpected line {line!r}", k, source)
    if not in_payoffs:
        raise ParseError("missing payoff block", None, source)
    try:
        return StrategicGame(players, [actions[p] for p in players], payoffs)
    except RFGError as e:
        raise ParseError(str(e), None, source) from None


def serialize_game(game: StrategicGame) -> str:
    if isinstance(game, InvestmentGame) and game.kind in (WEAKEST_LINK, PUBLIC_GOOD):
        return f"kind {game.kind} {game.n} {game.H} {format_rational(game.lam)}\n"
    out = ["players " + " ".join(map(str, game.players))]
    for p, acts in zip(game.players, game.actions):
        out.append(f"actions {p} " + " ".join(map(str, acts)))
    out.append("payoffs")
    for o in game.outcomes():
        out.append(" ".join(map(str, o)) + " : " + " ".join(format_rational(x) for x in game.payoff(o)))
    return "\n".join(out) + "\n"


def load_game(path) -> StrategicGame:
    path = Path(path)
    return parse_game(read_file(path), str(path))


def read_file(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as e:
        raise ParseError(f"cannot read file: {e.strerror}", None, str(path)) from None


# ---------------------------------------------------------------------------
# reactions and profiles
# ---------------------------------------------------------------------------


def _builtin(game: StrategicGame, i: int, toks, k, source) -> ReactionFunction:
    name, args = toks[0], toks[1:]
    try:
        if name == "br":
            return br_reaction(game, i) if isinstance(game, InvestmentGame) else best_reply_reaction(game, i)
        if name == "rstar":
            return rstar_reaction(game, i)
        if name == "constant" and len(args) == 1:
            return ReactionFunction.constant(game, i, parse_label(args[0]))
        if name == "match-min" and not args:
            return match_min_reaction(game, i)
        if name == "promise-threat" and len(args) == game.n:
            return construct_promise_threat(game, tuple(parse_label(t) for t in args))[i]
    except RFGError as e:
        raise ParseError(str(e), k, source) from None
    raise ParseError(f"unknown builtin {' '.join(toks)!r}", k, source)


def parse_reactions(text: str, game: StrategicGame, source: Optional[str] = None) -> list:
    """Every reaction block in ``text``, in file order."""
    blocks = []
    for k, line in _lines(text):
        toks = line.split()
        if toks[0] == "owner":
            if len(toks) != 2:
                raise ParseError("expected: owner <player>", k, source)
            if toks[1] not in game.players:
                raise ParseError(f"unknown player {toks[1]!r}", k, source)
            i = game.players.index(toks[1])
            blocks.append([i, k, None, {}])
            continue
        if not blocks:
            raise ParseError("reaction lines before 'owner'", k, source)
        blk = blocks[-1]
        i = blk[0]
        if "->" in line:
            left, right = line.split("->", 1)
            others = tuple(parse_label(t) for t in left.split())
            own = right.split()
            if len(others) != game.n - 1 or len(own) != 1:
                raise ParseError(f"expected {game.n - 1} labels before '->' and one after", k, source)
            cols = [j for j in range(game.n) if j != i]
            for j, a in zip(cols, others):
                if a not in game.actions[j]:
                    raise ParseError(f"{a!r} is not an action of player {game.players[j]}", k, source)
            if parse_label(own[0]) not in game.actions[i]:
                raise ParseError(f"{own[0]!r} is not an action of player {game.players[i]}", k, source)
            if others in blk[3]:
                raise ParseError(f"duplicate entry for {others!r}", k, source)
            blk[3][others] = parse_label(own[0])
        else:
            if blk[2] is not None or blk[3]:
                raise ParseError("a builtin must be the only line of its block", k, source)
            blk[2] = _builtin(game, i, toks, k, source)
    out = []
    for i, k, builtin, mapping in blocks:
        if builtin is not None:
            out.append(builtin)
            continue
        missing = [o for o in game.others_profiles(i) if o not in mapping]
        if missing:
            raise ParseError(f"reaction of player {game.players[i]} undefined at {missing[0]!r}", k, source)
        out.append(ReactionFunction.from_mapping(game, i, mapping))
    return out


def serialize_reaction(game: StrategicGame, reaction: ReactionFunction) -> str:
    out = [f"owner {game.players[reaction.owner]}"]
    for others, own in reaction.items(game):
        out.append(" ".join(map(str, others)) + f" -> {own}")
    return "\n".join(out) + "\n"


def serialize_profile(profile: Profile) -> str:
    return "".join(serialize_reaction(profile.game, r) for r in profile)


def load_reactions(paths, game: StrategicGame) -> list:
    out = []
    for p in paths:
        p = Path(p)
        out.extend(parse_reactions(read_file(p), game, str(p)))
    return out


def load_profile(paths, game: StrategicGame) -> Profile:
    reactions = load_reactions(paths, game)
    try:
        return Profile(game, reactions)
    except RFGError as e:
        raise ParseError(str(e), None, ", ".join(map(str, paths))) from None


# ---------------------------------------------------------------------------
# coordinator event scripts
# ---------------------------------------------------------------------------


@dataclass
class EventScript:
    game_path: str
    deadline: int
    events: list  # tuples of raw tokens (strings), see module docstring

    def resolve(self, base: Path):
        """Load the game and turn raw events into coordinator events."""
        from .coordinator import new_state

        game = load_game(base / self.game_path)
        evs = []
        for ev in self.events:
            kind = ev[0]
            if kind == "commit":
                evs.append(("commit", ev[1], bytes.fromhex(ev[2])))
            elif kind == "connect":
                player = ev[1]
                rs = [r for r in load_reactions([base / ev[2]], game) if game.players[r.owner] == player]
                if len(rs) != 1:
                    raise ParseError(f"{ev[2]} must hold exactly one reaction of player {player}", None, ev[2])
                evs.append(("connect", player, rs[0], bytes.fromhex(ev[3]), int(ev[4]), int(ev[5])))
            else:
                evs.append((kind,))
        return new_state(game, self.deadline), evs


_EVENT_ARITY = {"commit": 2, "connect": 5, "tick": 0, "search": 0}
_HEX = re.compile(r"^[0-9a-fA-F]*$")


def parse_events(text: str, source: Optional[str] = None) -> EventScript:
    game_path, deadline, events = None, None, []
    for k, line in _lines(text):
        toks = line.split()
        head = toks[0]
        if head == "game" and len(toks) == 2:
            game_path = toks[1]
        elif head == "deadline" and len(toks) == 2 and _INT.match(toks[1]):
            deadline = int(toks[1])
        elif head in _EVENT_ARITY:
            if len(toks) - 1 != _EVENT_ARITY[head]:
                raise ParseError(f"'{head}' takes {_EVENT_ARITY[head]} arguments", k, source)
            if head == "commit" and not (_HEX.match(toks[2]) and len(toks[2]) == 64):
                raise ParseError("commit digest must be 64 hex digits", k, source)
            if head == "connect":
                if not (_HEX.match(toks[3]) and len(toks[3]) % 2 == 0):
                    raise ParseError("salt must be hex", k, source)
                if not (_INT.match(toks[4]) and _INT.match(toks[5])):
                    raise ParseError("max investment and deposit must be integers", k, source)
            events.append(tuple(toks))
        else:
            raise ParseError(f"unexpected line {line!r}", k, source)
    if game_path is None or deadline is None:
        raise ParseError("script needs 'game <file>' and 'deadline <t>' lines", None, source)
    return EventScript(game_path, deadline, events)


def serialize_events(script: EventScript) -> str:
    out = [f"game {script.game_path}", f"deadline {script.deadline}"]
    out += [" ".join(ev) for ev in script.events]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# evolution config (JSON)
# ---------------------------------------------------------------------------


def parse_config(text: str, source: Optional[str] = None, seed: Optional[int] = None) -> EvolutionConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, source) from None
    if not isinstance(raw, dict):
        raise ParseError("config must be a JSON object", None, source)
    known = {f.name for f in fields(EvolutionConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ParseError(f"unknown config keys {unknown}", None, source)
    if seed is not None:
        raw["seed"] = seed
    if "lam" in raw:
        raw["lam"] = as_fraction(str(raw["lam"]))
    try:
        return EvolutionConfig(**raw)
    except (TypeError, RFGError, ValueError) as e:
        raise ParseError(str(e), None, source) from None


def serialize_config(config: EvolutionConfig) -> str:
    d = asdict(config)
    d["lam"] = format_rational(config.lam)
    return json.dumps(d, indent=2, sort_keys=True) + "\n"
