"""Reaction functions, profiles and their fixed points.

A reaction function is stored as an integer table over the other players'
action positions (row-major, others in player order). A :class:`Profile`
binds one reaction per player to a game.
"""
from __future__ import annotations

import enum
import functools
import graphlib
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from . import kernels
from .core import StrategicGame, maxmin, pareto_dominates, pareto_frontier
from .errors import (
    BudgetExceeded,
    InvalidReaction,
    NonMonotoneProfile,
    NotImprovement,
    NotSafeRFE,
    NotTwoPlayer,
    TargetBelowMaxmin,
    UnsupportedDimensions,
)

MAX_OUTCOMES = 10**6
MAX_PROFILES = 10**7


@functools.total_ordering
class _NoFixedPoint:
    """Value of a profile without fixed points; below every number."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NO_FIXED_POINT"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("NO_FIXED_POINT")

    def __lt__(self, other):
        return other is not self

    def __reduce__(self):
        return (_NoFixedPoint, ())


NO_FIXED_POINT = _NoFixedPoint()


class ReactionFunction:
    """Total map from others-profiles to the owner's action.

    ``table[k_1, ..., k_{n-1}]`` is the owner's action position when the other
    players (in player order) take positions ``k_1, ..., k_{n-1}``.
    """

    __slots__ = ("owner", "table")

    def __init__(self, owner: int, table):
        table = np.array(table, dtype=np.int64)
        table.setflags(write=False)
        self.owner = int(owner)
        self.table = table

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_callable(cls, game: StrategicGame, player, fn: Callable) -> "ReactionFunction":
        """``fn(others)`` maps a tuple of the others' labels to an own label."""
        i = game.player_index(player)
        shape = game.others_shape(i)
        flat = [game.action_index(i, fn(others)) for others in game.others_profiles(i)]
        return cls(i, np.array(flat, dtype=np.int64).reshape(shape))

    @classmethod
    def from_mapping(cls, game: StrategicGame, player, mapping) -> "ReactionFunction":
        i = game.player_index(player)
        missing = [o for o in game.others_profiles(i) if o not in mapping]
        if missing:
            raise InvalidReaction(f"reaction of {game.players[i]} undefined at {missing[0]!r}")
        return cls.from_callable(game, i, mapping.__getitem__)

    @classmethod
    def constant(cls, game: StrategicGame, player, action) -> "ReactionFunction":
        i = game.player_index(player)
        k = game.action_index(i, action)
        return cls(i, np.full(game.others_shape(i), k, dtype=np.int64))

    # -- evaluation -------------------------------------------------------

    def check(self, game: StrategicGame) -> None:
        i = self.owner
        if not 0 <= i < game.n:
            raise InvalidReaction(f"owner {i} outside the game")
        if self.table.shape != game.others_shape(i):
            raise InvalidReaction(
                f"table of player {game.players[i]} has shape {self.table.shape}, expected {game.others_shape(i)}"
            )
        if self.table.size and (self.table.min() < 0 or self.table.max() >= game.shape[i]):
            raise InvalidReaction(f"table of player {game.players[i]} names an unknown action")

    def react(self, game: StrategicGame, others: Sequence):
        """Own label in reaction to the others' labels (player order)."""
        cols = [j for j in range(game.n) if j != self.owner]
        idx = tuple(game.action_index(j, a) for j, a in zip(cols, others))
        return game.actions[self.owner][int(self.table[idx])]

    def items(self, game: StrategicGame):
        """``(others_labels, own_label)`` pairs in row-major order."""
        acts = game.actions[self.owner]
        for others, k in zip(game.others_profiles(self.owner), self.table.ravel()):
            yield others, acts[int(k)]

    def is_constant(self) -> bool:
        return bool(np.all(self.table == self.table.flat[0]))

    def is_monotone(self) -> bool:
        """Non-decreasing in every coordinate under the declared action orders."""
        return all(np.all(np.diff(self.table, axis=ax) >= 0) for ax in range(self.table.ndim))

    def depends_on(self) -> list:
        """Axes (positions among the others) the table is not constant along."""
        return [ax for ax in range(self.table.ndim) if np.any(np.diff(self.table, axis=ax) != 0)]

    def with_entry(self, others_idx: Sequence[int], action_idx: int) -> "ReactionFunction":
        t = self.table.copy()
        t[tuple(others_idx)] = action_idx
        return ReactionFunction(self.owner, t)

    def canonical_bytes(self, game: StrategicGame) -> bytes:
        self.check(game)
        shape = "x".join(str(m) for m in self.table.shape)
        body = ",".join(str(int(k)) for k in self.table.ravel())
        return f"reaction owner={game.players[self.owner]} shape={shape}\n{body}\n".encode("ascii")

    def __eq__(self, other):
        if not isinstance(other, ReactionFunction):
            return NotImplemented
        return self.owner == other.owner and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.owner, self.table.shape, self.table.tobytes()))

    def __repr__(self):
        return f"ReactionFunction(owner={self.owner}, table={self.table.tolist()!r})"


class Profile:
    """One reaction function per player of ``game``."""

    __slots__ = ("game", "reactions")

    def __init__(self, game: StrategicGame, reactions: Sequence[ReactionFunction]):
        reactions = sorted(reactions, key=lambda r: r.owner)
        owners = [r.owner for r in reactions]
        if owners != list(range(game.n)):
            raise InvalidReaction(f"profile owners {owners} do not cover players 0..{game.n - 1} exactly once")
        for r in reactions:
            r.check(game)
        self.game = game
        self.reactions = tuple(reactions)

    def __getitem__(self, player) -> ReactionFunction:
        return self.reactions[self.game.player_index(player)]

    def __iter__(self):
        return iter(self.reactions)

    def __eq__(self, other):
        if not isinstance(other, Profile):
            return NotImplemented
        return self.game == other.game and self.reactions == other.reactions

    def __hash__(self):
        return hash(self.reactions)

    def __repr__(self):
        return f"Profile({list(self.reactions)!r})"

    def replace(self, reaction: ReactionFunction) -> "Profile":
        rs = list(self.reactions)
        rs[reaction.owner] = reaction
        return Profile(self.game, rs)

    def tables(self) -> np.ndarray:
        lay = self.game.layout
        out = np.zeros((self.game.n, lay.kmax), dtype=np.int64)
        for r in self.reactions:
            out[r.owner, : r.table.size] = r.table.ravel()
        return out

    def canonical_bytes(self) -> bytes:
        head = "profile players=" + ",".join(str(p) for p in self.game.players) + "\n"
        return head.encode("ascii") + b"".join(r.canonical_bytes(self.game) for r in self.reactions)


def constant_profile(game: StrategicGame, outcome: Sequence) -> Profile:
    return Profile(game, [ReactionFunction.constant(game, i, a) for i, a in enumerate(outcome)])


def best_reply_reaction(game: StrategicGame, player) -> ReactionFunction:
    """Best reply, ties broken toward the earliest declared action."""
    i = game.player_index(player)
    pay = np.moveaxis(game.scaled_payoffs[i], i, -1)
    return ReactionFunction(i, np.argmax(pay, axis=-1))


def match_min_reaction(game: StrategicGame, player) -> ReactionFunction:
    """Take the action at the lowest position any other player takes.

    With two players this is "match the other".
    """
    i = game.player_index(player)
    shape = game.others_shape(i)
    if any(m != game.shape[i] for m in shape):
        raise InvalidReaction("match-min needs equally many actions for every player")
    grids = np.indices(shape)
    return ReactionFunction(i, grids.min(axis=0))


# ---------------------------------------------------------------------------
# fixed points
# ---------------------------------------------------------------------------


def _check_profile(game: StrategicGame, profile: Profile) -> None:
    if profile.game is not game and profile.game != game:
        raise InvalidReaction("profile belongs to a different game")


def evaluate(profile: Profile, a: Sequence) -> tuple:
    """``R(a)``: every player's reaction to the others' components of ``a``."""
    game = profile.game
    idx = game.index(a)
    out = []
    for r in profile.reactions:
        others = tuple(k for j, k in enumerate(idx) if j != r.owner)
        out.append(int(r.table[others]))
    return game.labels(out)


@dataclass(frozen=True)
class FixedPointReport:
    fixed_points: frozenset
    ordered: tuple  # fixed points in row-major order
    values: tuple  # per player: Fraction, or NO_FIXED_POINT
    unambiguous: bool
    top: Optional[tuple]


def _budget_outcomes(game: StrategicGame, budget: int) -> None:
    if game.num_outcomes > budget:
        raise BudgetExceeded(f"{game.num_outcomes} outcomes exceed the budget of {budget}")


def fixed_point_mask(game: StrategicGame, profile: Profile) -> np.ndarray:
    lay = game.layout
    return kernels.happy(profile.tables(), lay.act, lay.oth).all(axis=1)


def fixed_point_report(game: StrategicGame, profile: Profile, budget: int = MAX_OUTCOMES) -> FixedPointReport:
    _check_profile(game, profile)
    _budget_outcomes(game, budget)
    lay = game.layout
    flat = np.flatnonzero(fixed_point_mask(game, profile))
    ordered = tuple(game.outcome_at(o) for o in flat)
    if flat.size == 0:
        return FixedPointReport(frozenset(), (), (NO_FIXED_POINT,) * game.n, False, None)
    sub = lay.pay[:, flat]
    best = sub.max(axis=1)
    values = tuple(Fraction(int(b), lay.scale) for b in best)
    tops = np.flatnonzero((sub == best[:, None]).all(axis=0))
    top = ordered[int(tops[0])] if tops.size else None
    return FixedPointReport(frozenset(ordered), ordered, values, top is not None, top)


def payoff_extension(game: StrategicGame, profile: Profile) -> tuple:
    """``U_i(R)`` for every player."""
    return fixed_point_report(game, profile).values


def dependency_graph(profile: Profile) -> frozenset:
    """Edges ``(i, j)`` (player ids) where ``R_i`` is not constant in ``a_j``."""
    game = profile.game
    edges = set()
    for r in profile.reactions:
        cols = [j for j in range(game.n) if j != r.owner]
        for ax in r.depends_on():
            edges.add((game.players[r.owner], game.players[cols[ax]]))
    return frozenset(edges)


def has_unique_fixed_point_guarantee(profile: Profile) -> bool:
    """True when the dependency graph is acyclic."""
    graph = {p: set() for p in profile.game.players}
    for i, j in dependency_graph(profile):
        graph[i].add(j)
    try:
        tuple(graphlib.TopologicalSorter(graph).static_order())
    except graphlib.CycleError:
        return False
    return True


def monotone_iteration(game: StrategicGame, profile: Profile, direction: str = "top") -> list:
    """The chain ``a^0, R(a^0), ...`` up to the first repeat, from the top or bottom."""
    _check_profile(game, profile)
    bad = [game.players[r.owner] for r in profile.reactions if not r.is_monotone()]
    if bad:
        raise NonMonotoneProfile(f"reactions of players {bad} are not monotone")
    if direction == "top":
        idx = tuple(m - 1 for m in game.shape)
    elif direction == "bottom":
        idx = (0,) * game.n
    else:
        raise ValueError("direction must be 'top' or 'bottom'")
    chain = [idx]
    while True:
        nxt = tuple(
            int(r.table[tuple(k for j, k in enumerate(idx) if j != r.owner)]) for r in profile.reactions
        )
        if nxt == idx:
            return [game.labels(c) for c in chain]
        idx = nxt
        chain.append(idx)


def monotone_fixed_point(game: StrategicGame, profile: Profile, direction: str = "top") -> tuple:
    """Greatest (``top``) or least (``bottom``) fixed point of a monotone profile."""
    return monotone_iteration(game, profile, direction)[-1]


# ---------------------------------------------------------------------------
# equilibrium checks
# ---------------------------------------------------------------------------


class VerdictKind(enum.Enum):
    RFE = "RFE"
    NOT_UNAMBIGUOUS = "NOT_UNAMBIGUOUS"
    DEVIATION = "DEVIATION"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    player: object = None  # deviating player id
    action: object = None  # constant the player deviates to
    top: Optional[tuple] = None  # supported outcome when RFE
    gain_outcome: Optional[tuple] = None  # fixed point reached by the deviation

    def __bool__(self):
        return self.kind is VerdictKind.RFE

    def __str__(self):
        if self.kind is VerdictKind.DEVIATION:
            return f"DEVIATION({self.player}, {self.action})"
        return self.kind.value


def is_rfe(game: StrategicGame, profile: Profile, budget: int = MAX_OUTCOMES) -> Verdict:
    """Unambiguous, and no constant deviation strictly raises ``U_i``."""
    _check_profile(game, profile)
    _budget_outcomes(game, budget)
    lay = game.layout
    code, i, o = kernels.verdict(profile.tables(), lay.act, lay.oth, lay.pay)
    if code == kernels.NOT_UNAMBIGUOUS:
        return Verdict(VerdictKind.NOT_UNAMBIGUOUS)
    outcome = game.outcome_at(o)
    if code == kernels.DEVIATION:
        return Verdict(VerdictKind.DEVIATION, game.players[i], outcome[i], gain_outcome=outcome)
    return Verdict(VerdictKind.RFE, top=outcome)


def is_supported(game: StrategicGame, a: Sequence, profile: Profile) -> bool:
    """``profile`` is an RFE, ``a`` is a fixed point and weakly dominates all of them."""
    a = tuple(a)
    if not is_rfe(game, profile):
        return False
    rep = fixed_point_report(game, profile)
    if a not in rep.fixed_points:
        return False
    return all(pareto_dominates(game, a, b) for b in rep.fixed_points)


class ScanResult(NamedTuple):
    supported: set
    n_rfe: int
    n_profiles: int


def scan_rfe(game: StrategicGame, entry_choices=None, budget: int = MAX_PROFILES) -> ScanResult:
    """Enumerate profiles and collect supported outcomes.

    ``entry_choices[i]`` restricts player ``i``'s table: an iterable, per
    others-profile in row-major order, of allowed action positions. ``None``
    allows every action everywhere.
    """
    lay = game.layout
    owner, slot, options = [], [], []
    for i in range(game.n):
        K = lay.table_sizes[i]
        per = None if entry_choices is None else list(entry_choices[i])
        if per is not None and len(per) != K:
            raise InvalidReaction(f"player {game.players[i]} needs choices for {K} entries")
        for k in range(K):
            opts = list(range(game.shape[i])) if per is None else sorted(set(int(x) for x in per[k]))
            if not opts:
                return ScanResult(set(), 0, 0)
            owner.append(i)
            slot.append(k)
            options.append(opts)
    n_profiles = math.prod(len(o) for o in options)
    if n_profiles > budget:
        raise BudgetExceeded(f"{n_profiles} profiles exceed the budget of {budget}")
    width = max(len(o) for o in options)
    choices = np.zeros((len(options), width), dtype=np.int64)
    for t, o in enumerate(options):
        choices[t, : len(o)] = o
    nchoices = np.array([len(o) for o in options], dtype=np.int64)
    mask, n_rfe, n_prof = kernels.scan_profiles(
        lay.act, lay.oth, lay.pay,
        np.array(owner, dtype=np.int64), np.array(slot, dtype=np.int64),
        choices, nchoices, lay.kmax,
    )
    return ScanResult({game.outcome_at(o) for o in np.flatnonzero(mask)}, n_rfe, n_prof)


def brute_force_supported_set(game: StrategicGame, budget: int = MAX_PROFILES) -> set:
    """Every outcome supported by some RFE, by enumerating all profiles."""
    return scan_rfe(game, budget=budget).supported


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------


def construct_sequential(game: StrategicGame, order: Optional[Sequence] = None) -> Profile:
    """Backward-induction profile for the move order ``order``.

    Each player reacts only to the players moving before them; ties go to
    the earliest declared action.
    """
    n = game.n
    order = list(range(n)) if order is None else [game.player_index(p) for p in order]
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the players")
    pay = game.scaled_payoffs
    choice = {}

    @functools.lru_cache(maxsize=None)
    def path(prefix):
        k = len(prefix)
        if k == n:
            out = [0] * n
            for pos, a in zip(order, prefix):
                out[pos] = a
            return tuple(out)
        p = order[k]
        best, best_out = None, None
        for a in range(game.shape[p]):
            out = path(prefix + (a,))
            v = pay[(p,) + out]
            if best is None or v > best:
                best, best_out = v, out
                choice[prefix] = a
        return best_out

    path(())
    reactions = []
    for k, p in enumerate(order):
        preds = order[:k]
        cols = [j for j in range(n) if j != p]
        shape = game.others_shape(p)
        table = np.empty(shape, dtype=np.int64)
        for idx in np.ndindex(*shape):
            full = dict(zip(cols, idx))
            prefix = tuple(full[j] for j in preds)
            if prefix not in choice:
                path(prefix)
            table[idx] = choice[prefix]
        reactions.append(ReactionFunction(p, table))
    return Profile(game, reactions)


def construct_promise_threat(game: StrategicGame, target: Sequence) -> Profile:
    """Two-player profile supporting ``target``: play it if the other does, else punish."""
    if game.n != 2:
        raise NotTwoPlayer(f"promise-and-threat needs two players, game has {game.n}")
    target = tuple(target)
    tidx = game.index(target)
    for i in range(2):
        mm = maxmin(game, i)
        if game.u(i, target) < mm.value:
            raise TargetBelowMaxmin(
                f"player {game.players[i]} gets {game.u(i, target)} at {target}, below maxmin {mm.value}"
            )
    pay = game.scaled_payoffs
    reactions = []
    for i in range(2):
        j = 1 - i
        table = np.empty(game.shape[j], dtype=np.int64)
        for aj in range(game.shape[j]):
            if aj == tidx[j]:
                table[aj] = tidx[i]
            else:
                col = pay[j, :, aj] if i == 0 else pay[j, aj, :]
                table[aj] = int(np.argmin(col))
        reactions.append(ReactionFunction(i, table))
    return Profile(game, reactions)


def construct_isolation(game: StrategicGame, target: Sequence) -> Profile:
    """Profile whose only fixed point is ``target``, even after any unilateral deviation.

    Needs four or more players, or three players with three or more actions
    each. Actions are relabelled so ``target`` becomes all zeros.
    """
    n = game.n
    if not (n >= 4 or (n == 3 and min(game.shape) >= 3)):
        raise UnsupportedDimensions(
            f"needs n >= 4, or n = 3 with at least 3 actions each; got n={n}, actions={game.shape}"
        )
    tidx = game.index(target)
    # perm[i][c] = actual action position carrying canonical label c
    perm = [[t] + [k for k in range(m) if k != t] for t, m in zip(tidx, game.shape)]
    canon = [{a: c for c, a in enumerate(p)} for p in perm]
    reactions = []
    for i in range(n):
        cols = [j for j in range(n) if j != i]
        shape = game.others_shape(i)
        table = np.empty(shape, dtype=np.int64)
        for idx in np.ndindex(*shape):
            c = {j: canon[j][k] for j, k in zip(cols, idx)}
            if n >= 4:
                prev, nxt = c[(i - 1) % n], c[(i + 1) % n]
                out = 1 if prev == 0 and nxt != 0 else 0
            elif all(v == 0 for v in c.values()):
                out = 0
            else:
                out = (i - sum(c.values())) % 3
            table[idx] = perm[i][out]
        reactions.append(ReactionFunction(i, table))
    return Profile(game, reactions)


# ---------------------------------------------------------------------------
# safety
# ---------------------------------------------------------------------------


class Check(NamedTuple):
    ok: bool
    witness: object = None

    def __bool__(self):
        return self.ok


def is_safe_reaction(game: StrategicGame, player, reaction: ReactionFunction) -> Check:
    """Every reaction earns at least the maxmin payoff; else a witnessing ``a_{-i}``."""
    i = game.player_index(player)
    if reaction.owner != i:
        raise InvalidReaction("reaction belongs to another player")
    reaction.check(game)
    v = maxmin(game, i).value * game.scale
    pay = np.moveaxis(game.scaled_payoffs[i], i, -1)
    got = np.take_along_axis(pay, reaction.table[..., None], axis=-1)[..., 0]
    bad = np.argwhere(got < v)
    if bad.size:
        cols = [j for j in range(game.n) if j != i]
        return Check(False, tuple(game.actions[j][int(k)] for j, k in zip(cols, bad[0])))
    return Check(True)


def safe_action_choices(game: StrategicGame, player) -> list:
    """Per others-profile (row-major), the actions a safe reaction may take."""
    i = game.player_index(player)
    v = maxmin(game, i).value * game.scale
    pay = np.moveaxis(game.scaled_payoffs[i], i, -1).reshape(-1, game.shape[i])
    return [np.flatnonzero(row >= v).tolist() for row in pay]


def _is_safe_rfe(game: StrategicGame, profile: Profile) -> Verdict:
    v = is_rfe(game, profile)
    if not v:
        raise NotSafeRFE(f"profile is not an RFE ({v})")
    for r in profile.reactions:
        chk = is_safe_reaction(game, r.owner, r)
        if not chk:
            raise NotSafeRFE(f"reaction of player {game.players[r.owner]} is unsafe at {chk.witness}")
    return v


def pareto_improve_safe_rfe(game: StrategicGame, profile: Profile, better: Sequence) -> Profile:
    """Redirect each player to ``better`` when the others play it."""
    _check_profile(game, profile)
    current = fixed_point_report(game, profile).top
    _is_safe_rfe(game, profile)
    better = tuple(better)
    bidx = game.index(better)
    if not pareto_dominates(game, better, current):
        raise NotImprovement(f"{better} does not weakly Pareto-dominate {current}")
    reactions = []
    for r in profile.reactions:
        others = tuple(k for j, k in enumerate(bidx) if j != r.owner)
        reactions.append(r.with_entry(others, bidx[r.owner]))
    return Profile(game, reactions)


def pareto_efficient_safe_rfe(game: StrategicGame, profile: Profile) -> Profile:
    """Safe RFE supporting a Pareto-efficient outcome that dominates the current one."""
    current = fixed_point_report(game, profile).top
    _is_safe_rfe(game, profile)
    ups = [a for a in game.outcomes() if pareto_dominates(game, a, current)]
    front = pareto_frontier(game, ups)
    if current in front:
        return profile
    pick = next(a for a in ups if a in front)
    return pareto_improve_safe_rfe(game, profile, pick)
