"""Deterministic simulation of a commit-reveal coordinator.

Players commit to a salted digest of their reaction, reveal it together with
a deposit, and the coordinator searches for a fixed point starting from the
profile of declared maximum investments. Investments are taken from the
deposits and the rest is refunded.

States are immutable values; every operation returns a new state.
"""
from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping, Optional, Sequence

from .core import StrategicGame
from .errors import InvalidReaction, ProtocolError, UnknownPlayer
from .reaction import ReactionFunction

SALT_BYTES = 32


class Phase(enum.Enum):
    COMMIT = "COMMIT"
    CONNECT = "CONNECT"
    SEARCH = "SEARCH"
    SETTLED = "SETTLED"
    REFUNDED = "REFUNDED"


@dataclass(frozen=True)
class Connection:
    reaction: ReactionFunction
    max_investment: int
    deposit: int


def _frozen(d: Mapping) -> Mapping:
    return MappingProxyType(dict(d))


@dataclass(frozen=True, eq=False)
class CoordinatorState:
    game: StrategicGame
    deadline: int
    phase: Phase = Phase.COMMIT
    commitments: Mapping = field(default_factory=lambda: _frozen({}))
    connections: Mapping = field(default_factory=lambda: _frozen({}))
    trace: tuple = ()
    result: Optional[tuple] = None
    ledger: Mapping = field(default_factory=lambda: _frozen({}))
    clock: int = 0

    @property
    def roster(self) -> tuple:
        return self.game.players

    def __eq__(self, other):
        if not isinstance(other, CoordinatorState):
            return NotImplemented
        return dump(self) == dump(other) and self.game == other.game


def new_state(game: StrategicGame, deadline: int) -> CoordinatorState:
    for i, acts in enumerate(game.actions):
        if tuple(acts) != tuple(range(len(acts))):
            raise InvalidReaction(f"player {game.players[i]} must have investment levels 0..H")
    return CoordinatorState(game, int(deadline))


def digest(game: StrategicGame, reaction: ReactionFunction, salt: bytes) -> bytes:
    """SHA-256 of the reaction's canonical bytes followed by the salt."""
    if len(salt) != SALT_BYTES:
        raise ProtocolError(f"salt must be {SALT_BYTES} bytes", code="BAD_SALT")
    return hashlib.sha256(reaction.canonical_bytes(game) + salt).digest()


def _require(state: CoordinatorState, *phases: Phase) -> None:
    if state.phase not in phases:
        raise ProtocolError(f"not allowed in phase {state.phase.value}", code="WRONG_PHASE")


def _known(state: CoordinatorState, player) -> None:
    if player not in state.roster:
        raise UnknownPlayer(f"no player {player!r}")


def commit(state: CoordinatorState, player, commitment: bytes) -> CoordinatorState:
    _require(state, Phase.COMMIT)
    _known(state, player)
    if player in state.commitments:
        raise ProtocolError(f"player {player} already committed", code="DUPLICATE_COMMIT")
    if len(commitment) != 32:
        raise ProtocolError("commitment must be a 32-byte digest", code="BAD_DIGEST")
    commitments = dict(state.commitments)
    commitments[player] = bytes(commitment)
    phase = Phase.CONNECT if len(commitments) == len(state.roster) else Phase.COMMIT
    return replace(state, commitments=_frozen(commitments), phase=phase)


def connect(state: CoordinatorState, player, reaction: ReactionFunction, salt: bytes,
            max_investment: int, deposit: int) -> CoordinatorState:
    _require(state, Phase.CONNECT)
    _known(state, player)
    if player in state.connections:
        raise ProtocolError(f"player {player} already connected", code="DUPLICATE_CONNECT")
    i = state.game.player_index(player)
    if reaction.owner != i:
        raise ProtocolError(f"reaction is not owned by player {player}", code="COMMITMENT_MISMATCH")
    reaction.check(state.game)
    if digest(state.game, reaction, salt) != state.commitments[player]:
        raise ProtocolError(f"reaction of player {player} differs from the commitment", code="COMMITMENT_MISMATCH")
    max_investment, deposit = int(max_investment), int(deposit)
    if not 0 <= max_investment < state.game.shape[i]:
        raise ProtocolError(f"max investment {max_investment} outside 0..{state.game.shape[i] - 1}",
                            code="BAD_MAX_INVESTMENT")
    if deposit < max_investment:
        raise ProtocolError(f"deposit {deposit} below max investment {max_investment}", code="INSUFFICIENT_DEPOSIT")
    conns = dict(state.connections)
    conns[player] = Connection(reaction, max_investment, deposit)
    phase = Phase.SEARCH if len(conns) == len(state.roster) else Phase.CONNECT
    return replace(state, connections=_frozen(conns), phase=phase)


def _step(state: CoordinatorState, a: tuple) -> tuple:
    out = []
    for i, p in enumerate(state.roster):
        c = state.connections[p]
        others = tuple(x for j, x in enumerate(a) if j != i)
        out.append(min(int(c.reaction.table[others]), c.max_investment))
    return tuple(out)


def search(state: CoordinatorState) -> tuple:
    """``(trace, result, cycled)`` of the capped iteration from the max profile."""
    a = tuple(state.connections[p].max_investment for p in state.roster)
    trace = [a]
    seen = {a}
    while True:
        b = _step(state, a)
        if b == a:
            return tuple(trace), a, False
        if b in seen:
            return tuple(trace), (0,) * len(a), True
        trace.append(b)
        seen.add(b)
        a = b


def run_search(state: CoordinatorState) -> CoordinatorState:
    _require(state, Phase.SEARCH)
    trace, result, _ = search(state)
    return settle(replace(state, trace=trace, result=result))


def settle(state: CoordinatorState) -> CoordinatorState:
    _require(state, Phase.SEARCH)
    if state.result is None:
        raise ProtocolError("no search result to settle", code="WRONG_PHASE")
    ledger = {}
    for p, x in zip(state.roster, state.result):
        dep = state.connections[p].deposit
        ledger[p] = (x, dep - x)
    return replace(state, ledger=_frozen(ledger), phase=Phase.SETTLED)


def tick(state: CoordinatorState) -> CoordinatorState:
    """Advance the clock; at the deadline an unfinished setup refunds everyone."""
    if state.phase in (Phase.SETTLED, Phase.REFUNDED):
        return state
    clock = state.clock + 1
    if clock >= state.deadline and state.phase in (Phase.COMMIT, Phase.CONNECT):
        ledger = {p: (0, state.connections[p].deposit if p in state.connections else 0) for p in state.roster}
        return replace(state, clock=clock, phase=Phase.REFUNDED, ledger=_frozen(ledger))
    return replace(state, clock=clock)


def deposits(state: CoordinatorState) -> dict:
    return {p: (c.deposit if (c := state.connections.get(p)) else 0) for p in state.roster}


def ledger_conserved(state: CoordinatorState) -> bool:
    if state.phase not in (Phase.SETTLED, Phase.REFUNDED):
        return True
    dep = deposits(state)
    return all(inv + ref == dep[p] and inv >= 0 and ref >= 0 for p, (inv, ref) in state.ledger.items())


# ---------------------------------------------------------------------------
# text output
# ---------------------------------------------------------------------------


def trace_csv(state: CoordinatorState) -> str:
    head = "step," + ",".join(f"a_{p}" for p in state.roster)
    rows = [head] + [f"{k}," + ",".join(str(x) for x in a) for k, a in enumerate(state.trace)]
    return "\n".join(rows) + "\n"


def dump(state: CoordinatorState) -> str:
    """Canonical text rendering of everything except the game itself."""
    lines = [
        f"phase {state.phase.value}",
        f"clock {state.clock}",
        f"deadline {state.deadline}",
        "roster " + " ".join(str(p) for p in state.roster),
    ]
    for p in state.roster:
        if p in state.commitments:
            lines.append(f"commitment {p} {state.commitments[p].hex()}")
    for p in state.roster:
        if p in state.connections:
            c = state.connections[p]
            body = ",".join(str(int(k)) for k in c.reaction.table.ravel())
            lines.append(f"connection {p} max={c.max_investment} deposit={c.deposit} reaction={body}")
    for k, a in enumerate(state.trace):
        lines.append(f"trace {k} " + " ".join(map(str, a)))
    if state.result is not None:
        lines.append("result " + " ".join(map(str, state.result)))
    for p in state.roster:
        if p in state.ledger:
            inv, ref = state.ledger[p]
            lines.append(f"ledger {p} invested={inv} refunded={ref}")
    return "\n".join(lines) + "\n"


def run_events(state: CoordinatorState, events: Sequence) -> CoordinatorState:
    """Apply parsed events: ``("commit", p, digest)``, ``("connect", p, R, salt, max, dep)``,
    ``("tick",)``, ``("search",)``."""
    for ev in events:
        kind = ev[0]
        if kind == "commit":
            state = commit(state, ev[1], ev[2])
        elif kind == "connect":
            state = connect(state, *ev[1:])
        elif kind == "tick":
            state = tick(state)
        elif kind == "search":
            state = run_search(state)
        else:
            raise ProtocolError(f"unknown event {kind!r}", code="UNKNOWN_EVENT")
    return state
