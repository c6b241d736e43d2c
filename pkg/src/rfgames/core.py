"""Finite strategic games with exact rational payoffs."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import IncompleteProfile, InvalidGame, UnknownPlayer

Outcome = tuple  # one action label per player, in player order

_INT_LIMIT = 1 << 62


def as_fraction(x) -> Fraction:
    """Exact conversion of ints, Fractions, ``"p/q"`` and decimal strings."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot read {x!r} as a rational")


@dataclass(frozen=True)
class Layout:
    """Flat integer view of a game consumed by :mod:`rfgames.kernels`."""

    shape: tuple
    act: np.ndarray  # (M, n)
    oth: np.ndarray  # (M, n)
    pay: np.ndarray  # (n, M), payoffs * scale
    scale: int
    table_sizes: tuple

    @property
    def kmax(self) -> int:
        return max(self.table_sizes)


class StrategicGame:
    """Players, ordered action lists and an exact payoff table.

    ``payoffs`` is either a mapping from outcome (tuple of labels) to a
    sequence of ``n`` rationals, or an array-like of shape ``(n, *sizes)``
    indexed by action positions.
    """

    def __init__(self, players: Sequence[Hashable], actions: Sequence[Sequence[Hashable]], payoffs):
        players = tuple(players)
        actions = tuple(tuple(a) for a in actions)
        n = len(players)
        if n < 2:
            raise InvalidGame("a game needs at least two players")
        if len(set(players)) != n:
            raise InvalidGame("player ids must be distinct")
        if len(actions) != n:
            raise InvalidGame(f"expected {n} action lists, got {len(actions)}")
        for p, acts in zip(players, actions):
            if len(acts) < 2:
                raise InvalidGame(f"player {p} needs at least two actions")
            if len(set(acts)) != len(acts):
                raise InvalidGame(f"player {p} has duplicate action labels")
        self.players = players
        self.actions = actions
        self.shape = tuple(len(a) for a in actions)
        self._action_pos = [{a: k for k, a in enumerate(acts)} for acts in actions]
        self._player_pos = {p: k for k, p in enumerate(players)}

        table = np.empty((n,) + self.shape, dtype=object)
        if isinstance(payoffs, Mapping):
            expected = math.prod(self.shape)
            if len(payoffs) != expected:
                raise InvalidGame(f"payoff table has {len(payoffs)} entries, expected {expected}")
            seen = np.zeros(self.shape, dtype=bool)
            for outcome, vec in payoffs.items():
                idx = self.index(outcome)
                if seen[idx]:
                    raise InvalidGame(f"duplicate payoff entry for {outcome!r}")
                seen[idx] = True
                vec = tuple(vec)
                if len(vec) != n:
                    raise InvalidGame(f"outcome {outcome!r} needs {n} payoffs")
                for i, x in enumerate(vec):
                    table[(i,) + idx] = as_fraction(x)
        else:
            arr = np.asarray(payoffs, dtype=object)
            if arr.shape != (n,) + self.shape:
                raise InvalidGame(f"payoff array has shape {arr.shape}, expected {(n,) + self.shape}")
            for pos in np.ndindex(arr.shape):
                table[pos] = as_fraction(arr[pos])
        self._payoffs = table

    # -- identity ---------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, StrategicGame):
            return NotImplemented
        return (
            self.players == other.players
            and self.actions == other.actions
            and bool(np.all(self._payoffs == other._payoffs))
        )

    def __hash__(self):
        return hash((self.players, self.actions))

    def __repr__(self):
        dims = "x".join(map(str, self.shape))
        return f"StrategicGame(players={self.players!r}, shape={dims})"

    # -- indexing ---------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.players)

    @property
    def num_outcomes(self) -> int:
        return math.prod(self.shape)

    def player_index(self, player) -> int:
        if player in self._player_pos:
            return self._player_pos[player]
        if isinstance(player, (int, np.integer)) and not isinstance(player, bool) and 0 <= player < self.n:
            return int(player)
        raise UnknownPlayer(f"no player {player!r}")

    def action_index(self, player: int, label) -> int:
        try:
            return self._action_pos[player][label]
        except KeyError:
            raise InvalidGame(f"{label!r} is not an action of player {self.players[player]}") from None

    def index(self, outcome: Sequence) -> tuple:
        """Outcome labels to action positions."""
        outcome = tuple(outcome)
        if len(outcome) != self.n:
            raise InvalidGame(f"outcome {outcome!r} must name one action per player")
        return tuple(self.action_index(i, a) for i, a in enumerate(outcome))

    def labels(self, idx: Sequence[int]) -> Outcome:
        return tuple(self.actions[i][int(k)] for i, k in enumerate(idx))

    def flat_index(self, outcome: Sequence) -> int:
        return int(np.ravel_multi_index(self.index(outcome), self.shape))

    def outcome_at(self, flat: int) -> Outcome:
        return self.labels(np.unravel_index(int(flat), self.shape))

    def outcomes(self) -> Iterator[Outcome]:
        """All outcomes in row-major order."""
        return itertools.product(*self.actions)

    def others_shape(self, player: int) -> tuple:
        return tuple(m for j, m in enumerate(self.shape) if j != player)

    def others_profiles(self, player: int) -> Iterator[tuple]:
        """All ``a_{-i}`` (labels, others in player order), row-major."""
        return itertools.product(*(a for j, a in enumerate(self.actions) if j != player))

    # -- payoffs ----------------------------------------------------------

    def payoff(self, outcome: Sequence) -> tuple:
        idx = self.index(outcome)
        return tuple(self._payoffs[(i,) + idx] for i in range(self.n))

    def u(self, player, outcome: Sequence) -> Fraction:
        i = self.player_index(player)
        return self._payoffs[(i,) + self.index(outcome)]

    def payoff_array(self) -> np.ndarray:
        """Copy of the ``(n, *shape)`` object array of Fractions."""
        return self._payoffs.copy()

    @cached_property
    def scale(self) -> int:
        den = 1
        for x in self._payoffs.flat:
            den = math.lcm(den, x.denominator)
        return den

    @cached_property
    def scaled_payoffs(self) -> np.ndarray:
        """Integer array ``(n, *shape)`` equal to payoffs times :attr:`scale`."""
        s = self.scale
        vals = [x.numerator * (s // x.denominator) for x in self._payoffs.flat]
        if any(abs(v) >= _INT_LIMIT for v in vals):
            raise InvalidGame("payoffs too large for exact integer scaling")
        return np.array(vals, dtype=np.int64).reshape(self._payoffs.shape)

    @cached_property
    def layout(self) -> Layout:
        n, shape = self.n, self.shape
        grids = np.indices(shape).reshape(n, -1).T.astype(np.int64)
        oth = np.empty_like(grids)
        sizes = []
        for i in range(n):
            oshape = self.others_shape(i)
            sizes.append(math.prod(oshape))
            cols = [j for j in range(n) if j != i]
            oth[:, i] = np.ravel_multi_index(tuple(grids[:, cols].T), oshape)
        pay = self.scaled_payoffs.reshape(n, -1)
        return Layout(shape, np.ascontiguousarray(grids), np.ascontiguousarray(oth), np.ascontiguousarray(pay), self.scale, tuple(sizes))


# ---------------------------------------------------------------------------
# solution concepts of the strategic game
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MaxminResult:
    value: Fraction
    safe_actions: frozenset


def nash_equilibria(game: StrategicGame) -> set:
    """All pure Nash equilibria (possibly none)."""
    pay = game.scaled_payoffs
    ok = np.ones(game.shape, dtype=bool)
    for i in range(game.n):
        ok &= pay[i] == pay[i].max(axis=i, keepdims=True)
    return {game.labels(idx) for idx in zip(*np.nonzero(ok))}


def maxmin(game: StrategicGame, player) -> MaxminResult:
    i = game.player_index(player)
    pay = np.moveaxis(game.scaled_payoffs[i], i, 0).reshape(game.shape[i], -1)
    worst = pay.min(axis=1)
    v = worst.max()
    safe = frozenset(game.actions[i][k] for k in np.flatnonzero(worst == v))
    return MaxminResult(Fraction(int(v), game.scale), safe)


def _others_index(game: StrategicGame, i: int, others) -> list:
    if isinstance(others, Mapping):
        pos = {}
        for p, label in others.items():
            pos[game.player_index(p)] = label
        missing = [game.players[j] for j in range(game.n) if j != i and j not in pos]
        if missing:
            raise IncompleteProfile(f"no action given for players {missing}")
        if i in pos:
            raise IncompleteProfile(f"others must exclude player {game.players[i]}")
        return [game.action_index(j, pos[j]) for j in range(game.n) if j != i]
    others = tuple(others)
    if len(others) != game.n - 1:
        raise IncompleteProfile(f"expected {game.n - 1} actions for the other players, got {len(others)}")
    cols = [j for j in range(game.n) if j != i]
    return [game.action_index(j, a) for j, a in zip(cols, others)]


def best_replies(game: StrategicGame, player, others) -> set:
    """Argmax set of ``u_i(., a_{-i})``.

    ``others`` is a mapping from player id to action, or a sequence with one
    action per other player in player order.
    """
    i = game.player_index(player)
    rest = _others_index(game, i, others)
    idx = list(rest)
    idx.insert(i, slice(None))
    col = game.scaled_payoffs[i][tuple(idx)]
    return {game.actions[i][k] for k in np.flatnonzero(col == col.max())}


def pareto_dominates(game: StrategicGame, a: Sequence, b: Sequence) -> bool:
    """Weak dominance: ``u_i(a) >= u_i(b)`` for every player."""
    pa, pb = game.payoff(a), game.payoff(b)
    return all(x >= y for x, y in zip(pa, pb))


def pareto_frontier(game: StrategicGame, outcomes: Iterable[Sequence]) -> set:
    """Members of ``outcomes`` that no other member strictly improves upon."""
    pts = {tuple(a): game.payoff(a) for a in outcomes}
    front = set()
    for a, pa in pts.items():
        dominated = any(
            all(y >= x for x, y in zip(pa, pb)) and any(y > x for x, y in zip(pa, pb))
            for b, pb in pts.items()
            if b != a
        )
        if not dominated:
            front.add(a)
    return front
