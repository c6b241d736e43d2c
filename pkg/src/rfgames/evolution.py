"""Evolutionary selection of monotone reactions in a symmetric public-good game.

A reaction here depends only on the total the others invest, so it is a
non-decreasing vector indexed by ``alpha = 0..(n-1)H``. Pools start as pure
free-riders; after each batch of random games the worst members are replaced
by mutated copies of strong ones, with both the number replaced and the
mutation rate decaying exponentially.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .core import as_fraction
from .errors import EmptyPools, InvalidReaction, ParameterOutOfRange
from .kernels import play_batch
from .reaction import ReactionFunction


@dataclass(frozen=True)
class CompactReaction:
    values: tuple
    H: int

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if any(v < 0 or v > self.H for v in vals):
            raise InvalidReaction(f"contributions must lie in 0..{self.H}")
        if any(x > y for x, y in zip(vals, vals[1:])):
            raise InvalidReaction("compact reactions must be non-decreasing")

    def __call__(self, alpha: int) -> int:
        return self.values[alpha]

    @classmethod
    def zeros(cls, n: int, H: int) -> "CompactReaction":
        return cls((0,) * ((n - 1) * H + 1), H)

    @classmethod
    def rstar(cls, n: int, H: int) -> "CompactReaction":
        return cls(tuple(a // (n - 1) for a in range((n - 1) * H + 1)), H)

    def dense(self, n: int, player: int) -> ReactionFunction:
        """Full table over the others' investments for a game with ``n`` players."""
        grid = np.indices((self.H + 1,) * (n - 1)).sum(axis=0)
        return ReactionFunction(player, np.asarray(self.values, dtype=np.int64)[grid])


def greatest_fixed_point(reactions: Sequence[CompactReaction], H: int) -> tuple:
    """Downward iteration from all-``H``; reactions must be monotone."""
    a = [H] * len(reactions)
    while True:
        total = sum(a)
        nxt = [r(total - x) for r, x in zip(reactions, a)]
        if nxt == a:
            return tuple(a)
        a = nxt


def play_game(reactions: Sequence[CompactReaction], H: int, lam) -> tuple:
    """``(actions, payoffs)`` at the greatest fixed point; payoffs are exact."""
    lam = as_fraction(lam)
    a = greatest_fixed_point(reactions, H)
    total = sum(a)
    return a, tuple(H - x + lam * total for x in a)


def mutate(reaction: CompactReaction, intensity: float, rng: np.random.Generator) -> CompactReaction:
    out = mutate_array(np.asarray(reaction.values, dtype=np.int64)[None, :], intensity, reaction.H, rng)
    return CompactReaction(tuple(out[0]), reaction.H)


def mutate_array(values: np.ndarray, intensity: float, H: int, rng: np.random.Generator) -> np.ndarray:
    """Row-wise: add +-1 where a coin with bias ``intensity`` lands, then repair."""
    hit = rng.random(values.shape) < intensity
    sign = rng.integers(0, 2, size=values.shape) * 2 - 1
    raw = values + np.where(hit, sign, 0)
    return np.clip(np.maximum.accumulate(raw, axis=1), 0, H)


@dataclass
class EvolutionConfig:
    runs: int
    batches: int
    games_per_batch: int
    pool_size: int
    n: int = 4
    H: int = 20
    lam: Fraction = Fraction(2, 5)
    seed: int = 0
    # replacement count k(t) = ceil(k0 * rho**t), rho chosen so k reaches k_final at k_at * batches
    k0: float = 7
    k_final: float = 1
    k_at: float = 0.8
    # mutation intensity i(t) = i0 * sigma**t; i_final defaults to one change per reaction
    i0: float = 0.2
    i_final: Optional[float] = None
    i_at: float = 0.8
    top_fraction: float = 0.5
    reset_replaced: bool = False

    def __post_init__(self):
        self.lam = as_fraction(self.lam)
        for name in ("runs", "batches", "games_per_batch", "pool_size", "n", "H"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ParameterOutOfRange(f"{name} must be a non-negative integer")
            setattr(self, name, int(v))
        if self.runs < 1 or self.pool_size < 1:
            raise ParameterOutOfRange("runs and pool_size must be positive")
        if self.n < 2 or self.H < 1:
            raise ParameterOutOfRange("need n >= 2 and H >= 1")
        if self.pool_size < self.n:
            raise ParameterOutOfRange("pool_size must be at least n")
        if not 0 <= self.i0 <= 1:
            raise ParameterOutOfRange("i0 must lie in [0, 1]")
        if self.k0 < 0 or not 0 < self.top_fraction <= 1:
            raise ParameterOutOfRange("need k0 >= 0 and 0 < top_fraction <= 1")
        if not self.seed == int(self.seed) or not 0 <= self.seed < 2**64:
            raise ParameterOutOfRange("seed must be a 64-bit unsigned integer")
        self.seed = int(self.seed)

    @property
    def alphas(self) -> int:
        return (self.n - 1) * self.H + 1

    def _decay(self, start: float, final: float, at: float) -> float:
        span = at * self.batches
        if start <= 0 or final <= 0 or span <= 0 or final >= start:
            return 1.0
        return (final / start) ** (1.0 / span)

    def replacements(self, t: int) -> int:
        rho = self._decay(self.k0, self.k_final, self.k_at)
        k = math.ceil(self.k0 * rho**t - 1e-9)
        return max(0, min(k, self.pool_size - self.n_sources))

    def intensity(self, t: int) -> float:
        final = self.i_final if self.i_final is not None else 1.0 / self.alphas
        sigma = self._decay(self.i0, final, self.i_at)
        return self.i0 * sigma**t

    @property
    def n_sources(self) -> int:
        return max(1, math.ceil(self.top_fraction * self.pool_size))


@dataclass
class PoolState:
    values: np.ndarray  # (pool_size, alphas)
    averages: np.ndarray = None  # per-member latest batch average payoff
    plays: np.ndarray = None  # per-member games played in the latest batch

    def __post_init__(self):
        P = len(self.values)
        if self.averages is None:
            self.averages = np.zeros(P)
        if self.plays is None:
            self.plays = np.zeros(P, dtype=np.int64)

    @classmethod
    def free_riders(cls, config: EvolutionConfig) -> "PoolState":
        return cls(np.zeros((config.pool_size, config.alphas), dtype=np.int64))

    def reactions(self, H: int) -> list:
        return [CompactReaction(tuple(row), H) for row in self.values]


def run_batch(pool: PoolState, config: EvolutionConfig, rng: np.random.Generator) -> PoolState:
    """Play ``games_per_batch`` games; sampled members get their batch average."""
    G = config.games_per_batch
    if G == 0:
        return PoolState(pool.values, pool.averages.copy(), np.zeros_like(pool.plays))
    picks = rng.integers(0, config.pool_size, size=(G, config.n))
    lam = config.lam
    _, sums, counts = play_batch(pool.values, picks, config.H, lam.numerator, lam.denominator)
    avg = pool.averages.copy()
    played = counts > 0
    avg[played] = sums[played] / (counts[played] * lam.denominator)
    return PoolState(pool.values, avg, counts)


def replace_worst(pool: PoolState, config: EvolutionConfig, t: int, rng: np.random.Generator) -> PoolState:
    k = config.replacements(t)
    if k == 0 or config.games_per_batch == 0:
        return pool
    # random secondary key breaks ties in the ranking
    order = np.lexsort((rng.random(config.pool_size), pool.averages))
    worst, top = order[:k], order[-config.n_sources:]
    src = top[rng.integers(0, len(top), size=k)]
    values = pool.values.copy()
    values[worst] = mutate_array(pool.values[src], config.intensity(t), config.H, rng)
    avg = pool.averages.copy()
    avg[worst] = 0.0 if config.reset_replaced else pool.averages[src]
    return PoolState(values, avg, pool.plays)


def run_stream(config: EvolutionConfig, run: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(run,)))


def evolve_run(config: EvolutionConfig, run: int) -> PoolState:
    rng = run_stream(config, run)
    pool = PoolState.free_riders(config)
    for t in range(config.batches):
        pool = run_batch(pool, config, rng)
        pool = replace_worst(pool, config, t, rng)
    return pool


@dataclass
class EvolutionResult:
    config: EvolutionConfig
    pools: list = field(default_factory=list)

    @property
    def summary(self) -> list:
        return summarize(self.pools, self.config.n, self.config.H)


def evolve(config: EvolutionConfig) -> EvolutionResult:
    return EvolutionResult(config, [evolve_run(config, r) for r in range(config.runs)])


@dataclass(frozen=True)
class SummaryRow:
    alpha: int
    match_average: Fraction
    rstar: int
    mean: Fraction
    median: int


def summarize(pools: Sequence, n: int, H: int) -> list:
    """One row per ``alpha`` over every reaction of every pool (lower median)."""
    arrays = [p.values if isinstance(p, PoolState) else np.asarray(p) for p in pools]
    arrays = [a for a in arrays if len(a)]
    if not arrays:
        raise EmptyPools("no reactions to summarize")
    allv = np.concatenate(arrays, axis=0)
    N = len(allv)
    srt = np.sort(allv, axis=0)
    rows = []
    for alpha in range((n - 1) * H + 1):
        col = allv[:, alpha]
        rows.append(SummaryRow(
            alpha,
            Fraction(alpha, n - 1),
            alpha // (n - 1),
            Fraction(int(col.sum()), N),
            int(srt[(N - 1) // 2, alpha]),
        ))
    return rows


def _decimal(x: Fraction, digits: int) -> str:
    q = round(x * 10**digits)
    sign = "-" if q < 0 else ""
    q = abs(q)
    if digits == 0:
        return f"{sign}{q}"
    return f"{sign}{q // 10**digits}.{q % 10**digits:0{digits}d}"


def summary_csv(rows: Sequence[SummaryRow], digits: int = 4) -> str:
    out = ["alpha,match_average,rstar,mean,median"]
    for r in rows:
        out.append(f"{r.alpha},{_decimal(r.match_average, digits)},{r.rstar},{_decimal(r.mean, digits)},{r.median}")
    return "\n".join(out) + "\n"
