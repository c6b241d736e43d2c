"""Symmetric investment games and the reaction classes defined on them.

Actions are the integers ``0..H``; ``u_i(a) = v(a) - a_i`` with ``v``
symmetric and non-decreasing. Two named kinds fix ``v``: weakest-link
(``lam * min``) and public-good (``lam * sum``).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, NamedTuple, Optional

import numpy as np

from .core import StrategicGame, as_fraction, maxmin
from .errors import BudgetExceeded, InvalidGame, InvalidReaction, ParameterOutOfRange, WrongKind
from .reaction import MAX_PROFILES, Check, ReactionFunction, best_reply_reaction, is_safe_reaction

WEAKEST_LINK = "weakest-link"
PUBLIC_GOOD = "public-good"
CUSTOM = "custom"


class InvestmentGame(StrategicGame):
    """A :class:`StrategicGame` over investments ``0..H`` with extra metadata."""

    def __init__(self, n: int, H: int, kind: str, lam=None, value: Optional[Callable] = None):
        n, H = int(n), int(H)
        if n < 2:
            raise ParameterOutOfRange("need n >= 2")
        if H < 1:
            raise ParameterOutOfRange("need H >= 1")
        self.kind = kind
        self.H = H
        self.lam = None if lam is None else as_fraction(lam)
        grids = np.indices((H + 1,) * n).reshape(n, -1).T
        if kind == WEAKEST_LINK:
            if self.lam <= 1:
                raise ParameterOutOfRange(f"weakest-link needs lambda > 1, got {self.lam}")
            vals = [self.lam * int(row.min()) for row in grids]
        elif kind == PUBLIC_GOOD:
            if not Fraction(1, n) < self.lam < 1:
                raise ParameterOutOfRange(f"public-good needs 1/{n} < lambda < 1, got {self.lam}")
            vals = [self.lam * int(row.sum()) for row in grids]
        elif kind == CUSTOM:
            if value is None:
                raise ParameterOutOfRange("custom games need a value function")
            vals = [as_fraction(value(tuple(int(x) for x in row))) for row in grids]
        else:
            raise ParameterOutOfRange(f"unknown kind {kind!r}")
        v = np.array(vals, dtype=object).reshape((H + 1,) * n)
        if kind == CUSTOM:
            _check_value(v, n, H)
        pay = np.empty((n,) + v.shape, dtype=object)
        for i in range(n):
            own = np.indices(v.shape)[i]
            pay[i] = v - own
        diag = [v[(a,) * n] - a for a in range(H + 1)]
        if any(x >= y for x, y in zip(diag, diag[1:])):
            raise ParameterOutOfRange("coordinated payoffs must increase with the common level")
        super().__init__(tuple(str(k + 1) for k in range(n)), (tuple(range(H + 1)),) * n, pay)
        self._value = v

    def __repr__(self):
        lam = f", lam={self.lam}" if self.lam is not None else ""
        return f"InvestmentGame(kind={self.kind!r}, n={self.n}, H={self.H}{lam})"

    def value(self, outcome) -> Fraction:
        return self._value[tuple(outcome)]

    def is_high_risk(self) -> bool:
        """Weakest-link: ``lam < H/(H-1)``; public-good: ``lam < H/(nH-1)``."""
        if self.kind == WEAKEST_LINK:
            return self.H == 1 or self.lam < Fraction(self.H, self.H - 1)
        if self.kind == PUBLIC_GOOD:
            return self.lam < Fraction(self.H, self.n * self.H - 1)
        raise WrongKind("high risk is defined for weakest-link and public-good games only")


def _check_value(v: np.ndarray, n: int, H: int) -> None:
    for idx in np.ndindex(v.shape):
        if v[idx] != v[tuple(sorted(idx))]:
            raise InvalidGame(f"value is not symmetric at {idx}")
    for ax in range(n):
        if np.any(np.diff(v, axis=ax) < 0):
            raise InvalidGame("value must be non-decreasing in every coordinate")


def make_weakest_link(n: int, H: int, lam) -> InvestmentGame:
    return InvestmentGame(n, H, WEAKEST_LINK, lam)


def make_public_good(n: int, H: int, lam) -> InvestmentGame:
    return InvestmentGame(n, H, PUBLIC_GOOD, lam)


def make_custom(n: int, H: int, value: Callable) -> InvestmentGame:
    return InvestmentGame(n, H, CUSTOM, value=value)


# ---------------------------------------------------------------------------
# named reactions
# ---------------------------------------------------------------------------


def _others_grid(game: StrategicGame, i: int) -> np.ndarray:
    return np.indices(game.others_shape(i))


def br_reaction(game: InvestmentGame, player) -> ReactionFunction:
    """Match the minimum (weakest-link), free-ride (public-good), else lowest argmax."""
    i = game.player_index(player)
    if game.kind == WEAKEST_LINK:
        return ReactionFunction(i, _others_grid(game, i).min(axis=0))
    if game.kind == PUBLIC_GOOD:
        return ReactionFunction(i, np.zeros(game.others_shape(i), dtype=np.int64))
    return best_reply_reaction(game, i)


def rstar_reaction(game: InvestmentGame, player) -> ReactionFunction:
    """Average of the others, rounded down."""
    if getattr(game, "kind", None) != PUBLIC_GOOD:
        raise WrongKind("the rounded-down average is defined for public-good games")
    i = game.player_index(player)
    return ReactionFunction(i, _others_grid(game, i).sum(axis=0) // (game.n - 1))


def constant_reaction(game: InvestmentGame, player, level: int) -> ReactionFunction:
    return ReactionFunction.constant(game, player, level)


# ---------------------------------------------------------------------------
# monotone / symmetric reaction spaces
# ---------------------------------------------------------------------------


def _monotone_maps(elements, preds, H) -> Iterator[list]:
    """All maps ``elements -> 0..H`` non-decreasing along ``preds``.

    ``elements`` must be listed in a linear extension of the order;
    ``preds[k]`` lists positions of the immediate predecessors of element k.
    """
    K = len(elements)
    vals = [0] * K

    def rec(k):
        if k == K:
            yield list(vals)
            return
        lo = max((vals[p] for p in preds[k]), default=0)
        for v in range(lo, H + 1):
            vals[k] = v
            yield from rec(k + 1)

    yield from rec(0)


def monotone_tables(n_others: int, H: int) -> Iterator[np.ndarray]:
    """Every monotone table ``{0..H}^n_others -> {0..H}``, row-major order."""
    shape = (H + 1,) * n_others
    elems = list(np.ndindex(*shape))
    pos = {e: k for k, e in enumerate(elems)}
    preds = [[pos[e[:d] + (e[d] - 1,) + e[d + 1:]] for d in range(n_others) if e[d] > 0] for e in elems]
    for vals in _monotone_maps(elems, preds, H):
        yield np.array(vals, dtype=np.int64).reshape(shape)


def monotone_reactions(game: InvestmentGame, player) -> Iterator[ReactionFunction]:
    i = game.player_index(player)
    for t in monotone_tables(game.n - 1, game.H):
        yield ReactionFunction(i, t)


def count_monotone_reactions(n_others: int, H: int) -> int:
    return sum(1 for _ in monotone_tables(n_others, H))


@dataclass(frozen=True)
class SymmetricReaction:
    """Reaction stored on sorted multisets of the others' investments."""

    n: int
    H: int
    values: tuple  # aligned with multisets(n, H)

    @staticmethod
    def multisets(n: int, H: int) -> list:
        return list(itertools.combinations_with_replacement(range(H + 1), n - 1))

    def __call__(self, others) -> int:
        key = tuple(sorted(int(x) for x in others))
        return self.values[self.multisets(self.n, self.H).index(key)]

    def as_dict(self) -> dict:
        return dict(zip(self.multisets(self.n, self.H), self.values))

    def dense(self, player: int) -> ReactionFunction:
        """Expand to a full table for ``player`` (a position 0..n-1)."""
        lookup = self.as_dict()
        shape = (self.H + 1,) * (self.n - 1)
        table = np.empty(shape, dtype=np.int64)
        for idx in np.ndindex(*shape):
            table[idx] = lookup[tuple(sorted(idx))]
        return ReactionFunction(player, table)

    @classmethod
    def from_dense(cls, reaction: ReactionFunction, n: int, H: int) -> "SymmetricReaction":
        return cls(n, H, tuple(int(reaction.table[m]) for m in cls.multisets(n, H)))


def monotone_symmetric_reactions(n: int, H: int) -> Iterator[SymmetricReaction]:
    """All symmetric monotone reactions: the shared-norm space."""
    elems = SymmetricReaction.multisets(n, H)
    pos = {e: k for k, e in enumerate(elems)}
    preds = []
    for e in elems:
        ps = []
        for d in range(len(e)):
            if e[d] > 0 and (d == 0 or e[d - 1] <= e[d] - 1):
                ps.append(pos[e[:d] + (e[d] - 1,) + e[d + 1:]])
        preds.append(ps)
    for vals in _monotone_maps(elems, preds, H):
        yield SymmetricReaction(n, H, tuple(vals))


# ---------------------------------------------------------------------------
# fixed-point helpers shared by the checkers
# ---------------------------------------------------------------------------


def _happy_rows(game: StrategicGame, i: int, tables: np.ndarray) -> np.ndarray:
    """``out[c, o]``: reaction ``c`` of player ``i`` agrees with outcome ``o``."""
    lay = game.layout
    return tables.reshape(len(tables), -1)[:, lay.oth[:, i]] == lay.act[None, :, i]


_NEG = np.iinfo(np.int64).min


def _best(pay_i: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.where(mask, pay_i, _NEG).max(axis=-1)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


class ReactionClassReport(NamedTuple):
    monotone: Check
    symmetric: Check
    payoff_consistent: Check
    conditional_collaboration: Check
    safe: Check
    norm_proof: Check

    def flags(self) -> dict:
        return {k: bool(v) for k, v in self._asdict().items()}


def _labels_of(game, i, idx):
    cols = [j for j in range(game.n) if j != i]
    return tuple(game.actions[j][int(k)] for j, k in zip(cols, idx))


def check_monotone(game: StrategicGame, reaction: ReactionFunction) -> Check:
    t = reaction.table
    for ax in range(t.ndim):
        bad = np.argwhere(np.diff(t, axis=ax) < 0)
        if bad.size:
            lo = tuple(int(x) for x in bad[0])
            hi = lo[:ax] + (lo[ax] + 1,) + lo[ax + 1:]
            i = reaction.owner
            return Check(False, (_labels_of(game, i, lo), _labels_of(game, i, hi)))
    return Check(True)


def check_symmetric(game: StrategicGame, reaction: ReactionFunction) -> Check:
    t = reaction.table
    for ax in range(t.ndim - 1):
        perm = list(range(t.ndim))
        perm[ax], perm[ax + 1] = perm[ax + 1], perm[ax]
        if t.shape[ax] != t.shape[ax + 1]:
            return Check(False, "others have different action sets")
        bad = np.argwhere(t != t.transpose(perm))
        if bad.size:
            x = tuple(int(v) for v in bad[0])
            y = list(x)
            y[ax], y[ax + 1] = y[ax + 1], y[ax]
            i = reaction.owner
            return Check(False, (_labels_of(game, i, x), _labels_of(game, i, y)))
    return Check(True)


def payoff_classes(game: StrategicGame, player) -> dict:
    """Group others-profiles (position tuples) by their payoff slice for ``player``."""
    i = game.player_index(player)
    pay = np.moveaxis(game.scaled_payoffs[i], i, -1)
    groups = {}
    for idx in np.ndindex(*game.others_shape(i)):
        groups.setdefault(pay[idx].tobytes(), []).append(idx)
    return groups


def check_payoff_consistent(game: StrategicGame, reaction: ReactionFunction) -> Check:
    i = reaction.owner
    for members in payoff_classes(game, i).values():
        first = members[0]
        for other in members[1:]:
            if reaction.table[first] != reaction.table[other]:
                return Check(False, (_labels_of(game, i, first), _labels_of(game, i, other)))
    return Check(True)


def check_conditional_collaboration(game: StrategicGame, reaction: ReactionFunction, strict: bool = False) -> Check:
    """Match any coordinated positive level; otherwise stay in ``[min, max)``.

    With ``strict`` the all-zero others-profile must be matched as well.
    """
    i = reaction.owner
    for idx in np.ndindex(*reaction.table.shape):
        r = int(reaction.table[idx])
        lo, hi = min(idx), max(idx)
        if lo == hi:
            if (lo >= 1 or strict) and r != lo:
                return Check(False, _labels_of(game, i, idx))
        elif not lo <= r < hi:
            return Check(False, _labels_of(game, i, idx))
    return Check(True)


def _norm_tables(game: InvestmentGame, budget: int):
    norms = list(monotone_symmetric_reactions(game.n, game.H))
    if len(norms) > budget:
        raise BudgetExceeded(f"{len(norms)} norms exceed the budget of {budget}")
    return norms


class NormData(NamedTuple):
    norms: list  # SymmetricReaction
    others_ok: np.ndarray  # (N, M): all players but i follow the norm at o
    conform: np.ndarray  # (N,): U_i when everyone follows the norm (scaled)


def norm_data(game: InvestmentGame, player, budget: int = MAX_PROFILES) -> NormData:
    i = game.player_index(player)
    norms = _norm_tables(game, budget)
    lay = game.layout
    others_ok = np.ones((len(norms), lay.act.shape[0]), dtype=bool)
    own = None
    for j in range(game.n):
        tabs = np.stack([s.dense(j).table for s in norms])
        h = _happy_rows(game, j, tabs)
        if j == i:
            own = h
        else:
            others_ok &= h
    conform = _best(lay.pay[i][None, :], others_ok & own)
    return NormData(norms, others_ok, conform)


def check_norm_proof(game: InvestmentGame, reaction: ReactionFunction, data: Optional[NormData] = None,
                     budget: int = MAX_PROFILES) -> Check:
    """``U_i(R_i, norm_{-i}) >= U_i(norm)`` for every shared symmetric monotone norm."""
    i = reaction.owner
    mono = check_monotone(game, reaction)
    if not mono:
        return Check(False, ("not monotone", mono.witness))
    data = data or norm_data(game, i, budget)
    own = _happy_rows(game, i, reaction.table[None])[0]
    got = _best(game.layout.pay[i][None, :], data.others_ok & own[None, :])
    bad = np.flatnonzero(got < data.conform)
    if bad.size:
        return Check(False, data.norms[int(bad[0])])
    return Check(True)


def classify_reaction(game: InvestmentGame, player, reaction: ReactionFunction, strict: bool = False,
                      budget: int = MAX_PROFILES, norms: Optional[NormData] = None) -> ReactionClassReport:
    i = game.player_index(player)
    if reaction.owner != i:
        raise InvalidReaction("reaction belongs to another player")
    reaction.check(game)
    return ReactionClassReport(
        monotone=check_monotone(game, reaction),
        symmetric=check_symmetric(game, reaction),
        payoff_consistent=check_payoff_consistent(game, reaction),
        conditional_collaboration=check_conditional_collaboration(game, reaction, strict),
        safe=is_safe_reaction(game, i, reaction),
        norm_proof=check_norm_proof(game, reaction, norms, budget),
    )


# ---------------------------------------------------------------------------
# dominance against monotone play
# ---------------------------------------------------------------------------


class MonotoneOpponents(NamedTuple):
    tables: list  # per other player j: array (C_j, *shape)
    happy: list  # per other player j: (C_j, M)
    players: list  # other player positions


def monotone_opponents(game: InvestmentGame, player, budget: int = MAX_PROFILES) -> MonotoneOpponents:
    i = game.player_index(player)
    others = [j for j in range(game.n) if j != i]
    base = np.stack(list(monotone_tables(game.n - 1, game.H)))
    total = len(base) ** len(others)
    if total > budget:
        raise BudgetExceeded(f"{total} monotone opponent profiles exceed the budget of {budget}")
    tabs, happy = [], []
    for j in others:
        tabs.append(base)
        happy.append(_happy_rows(game, j, base))
    return MonotoneOpponents(tabs, happy, others)


def is_weakly_dominant_vs_monotone(game: InvestmentGame, player, reaction: ReactionFunction,
                                   budget: int = MAX_PROFILES,
                                   opponents: Optional[MonotoneOpponents] = None) -> Check:
    """No reaction does better than ``reaction`` against any monotone ``R_{-i}``.

    Deviations are reduced to constants: a constant ``a'_i`` makes every
    outcome where the others are happy available. Witness on failure:
    ``(R_{-i} as reactions, a'_i)``.
    """
    i = game.player_index(player)
    reaction.check(game)
    opp = opponents or monotone_opponents(game, i, budget)
    pay_i = game.layout.pay[i]
    own = _happy_rows(game, i, reaction.table[None])[0]
    head, last = opp.happy[:-1], opp.happy[-1]
    for combo in itertools.product(*(range(len(h)) for h in head)):
        ok = np.ones_like(own)
        for h, c in zip(head, combo):
            ok = ok & h[c]
        ok = ok[None, :] & last  # (C_last, M)
        dev = _best(pay_i[None, :], ok)
        mine = _best(pay_i[None, :], ok & own[None, :])
        bad = np.flatnonzero(mine < dev)
        if bad.size:
            cl = int(bad[0])
            o = int(np.argmax(np.where(ok[cl], pay_i, _NEG)))
            rs = [ReactionFunction(j, opp.tables[k][c]) for k, (j, c) in enumerate(zip(opp.players, combo + (cl,)))]
            return Check(False, (tuple(rs), game.outcome_at(o)[i]))
    return Check(True)


# ---------------------------------------------------------------------------
# welfare subject to safety, and the dominance conditions
# ---------------------------------------------------------------------------


def _welfare_table(game: InvestmentGame, i: int):
    """``(welfare, own_payoff)`` with the own action moved to the last axis."""
    pay = game.scaled_payoffs
    welfare = np.moveaxis(pay.sum(axis=0), i, -1)
    own = np.moveaxis(pay[i], i, -1)
    return welfare, own


def welfare_safe_reaction(game: InvestmentGame, player) -> ReactionFunction:
    """Highest-welfare action among those keeping ``u_i`` at its maxmin; ties go up."""
    i = game.player_index(player)
    welfare, own = _welfare_table(game, i)
    v = maxmin(game, i).value * game.scale
    masked = np.where(own >= v, welfare, _NEG)
    # argmax of the reversed axis picks the largest maximizer
    m = masked.shape[-1]
    return ReactionFunction(i, m - 1 - np.argmax(masked[..., ::-1], axis=-1))


def is_welfare_max_conditional_safe(game: InvestmentGame, player, reaction: ReactionFunction) -> Check:
    i = game.player_index(player)
    welfare, own = _welfare_table(game, i)
    v = maxmin(game, i).value * game.scale
    masked = np.where(own >= v, welfare, _NEG)
    best = masked.max(axis=-1)
    got = np.take_along_axis(masked, reaction.table[..., None], axis=-1)[..., 0]
    bad = np.argwhere(got != best)
    if bad.size:
        return Check(False, _labels_of(game, i, bad[0]))
    return Check(True)


class DominanceConditions(NamedTuple):
    nondecreasing_in_others: bool
    best_reply_monotone: bool
    no_gain_above_best_reply: bool


def general_dominance_conditions(game: InvestmentGame, player) -> DominanceConditions:
    i = game.player_index(player)
    pay = game.scaled_payoffs[i]
    a = all(np.all(np.diff(pay, axis=ax) >= 0) for ax in range(game.n) if ax != i)
    br = best_reply_reaction(game, i)
    b = br.is_monotone()
    zero = pay[(0,) * game.n]
    moved = np.moveaxis(pay, i, -1)
    own = np.arange(game.shape[i])
    above = own[None, :] > br.table.reshape(-1, 1)
    c = bool(np.all(moved.reshape(-1, game.shape[i])[above] <= zero))
    return DominanceConditions(bool(a), bool(b), c)
