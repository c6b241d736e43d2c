import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rfgames.errors import EmptyPools, InvalidReaction, ParameterOutOfRange
from rfgames.evolution import (
    CompactReaction,
    EvolutionConfig,
    PoolState,
    evolve,
    greatest_fixed_point,
    mutate,
    mutate_array,
    play_game,
    replace_worst,
    run_batch,
    run_stream,
    summarize,
    summary_csv,
)
from rfgames.investment import make_public_good, rstar_reaction
from rfgames.reaction import Profile, fixed_point_report

LAM = Fraction(2, 5)


def compact(values, H):
    return CompactReaction(tuple(values), H)


def random_compact(rng, n, H):
    return compact(np.maximum.accumulate(rng.integers(0, H + 1, size=(n - 1) * H + 1)), H)


# -- single games ------------------------------------------------------------------


def test_four_rstar():
    a, u = play_game([CompactReaction.rstar(4, 20)] * 4, 20, LAM)
    assert a == (20,) * 4 and u == (32,) * 4


def test_free_riders():
    a, u = play_game([CompactReaction.zeros(4, 20)] * 4, 20, LAM)
    assert a == (0,) * 4 and u == (20,) * 4


def test_three_free_riders_and_rstar():
    rs = [CompactReaction.zeros(4, 20)] * 3 + [CompactReaction.rstar(4, 20)]
    a, u = play_game(rs, 20, LAM)
    assert a == (0,) * 4 and u == (20,) * 4


def test_compact_validation():
    with pytest.raises(InvalidReaction):
        compact([0, 2, 1], 2)
    with pytest.raises(InvalidReaction):
        compact([0, 3, 3], 2)


def test_dense_rstar_matches_table():
    g = make_public_good(3, 3, Fraction(1, 2))
    assert CompactReaction.rstar(3, 3).dense(3, 0) == rstar_reaction(g, 0)


def _exhaustive_fixed_points(reactions, n, H):
    out = []
    for a in itertools.product(range(H + 1), repeat=n):
        s = sum(a)
        if all(r(s - x) == x for r, x in zip(reactions, a)):
            out.append(a)
    return out


@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(1, 4))
def test_greatest_fixed_point_is_greatest(seed, n, H):
    rng = np.random.default_rng(seed)
    rs = [random_compact(rng, n, H) for _ in range(n)]
    top = greatest_fixed_point(rs, H)
    fps = _exhaustive_fixed_points(rs, n, H)
    assert top in fps
    assert all(all(x <= y for x, y in zip(b, top)) for b in fps)


@given(st.integers(0, 2**32 - 1), st.integers(2, 3), st.integers(1, 3))
def test_play_game_matches_engine_top(seed, n, H):
    """The greatest fixed point is the top fixed point of the dense public-good profile."""
    rng = np.random.default_rng(seed)
    rs = [random_compact(rng, n, H) for _ in range(n)]
    g = make_public_good(n, H, Fraction(3, 4) if n == 2 else Fraction(1, 2))
    rep = fixed_point_report(g, Profile(g, [r.dense(n, i) for i, r in enumerate(rs)]))
    a, _ = play_game(rs, H, g.lam)
    assert a == max(rep.fixed_points, key=sum)


@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(1, 6),
       st.fractions(Fraction(1, 5), Fraction(1)))
def test_payoff_identity(seed, n, H, lam):
    rng = np.random.default_rng(seed)
    a, u = play_game([random_compact(rng, n, H) for _ in range(n)], H, lam)
    assert sum(u) == n * H + (n * lam - 1) * sum(a)


# -- mutation ------------------------------------------------------------------------


def test_mutation_examples(rng):
    r = random_compact(rng, 4, 5)
    assert mutate(r, 0.0, rng) == r
    top = compact([5] * 16, 5)
    for _ in range(20):
        m = mutate(top, 1.0, rng)
        assert min(m.values) >= 4
    # raw (..., 5, 4, ...) is repaired by the running max
    raw = np.array([[3, 5, 4, 6]])
    assert np.array_equal(np.clip(np.maximum.accumulate(raw, axis=1), 0, 6), [[3, 5, 5, 6]])


@given(st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_mutation_keeps_invariants(seed, intensity):
    rng = np.random.default_rng(seed)
    vals = np.maximum.accumulate(rng.integers(0, 5, size=(6, 13)), axis=1)
    out = mutate_array(vals, intensity, 4, rng)
    assert out.min() >= 0 and out.max() <= 4
    assert np.all(np.diff(out, axis=1) >= 0)
    assert np.all(np.abs(out - vals) <= 1)


def test_mutation_rate(rng):
    vals = np.full((4000, 5), 3)
    out = mutate_array(vals, 0.3, 6, rng)
    # the running max never touches the first entry, so it shows the raw rate
    assert abs(np.mean(out[:, 0] != 3) - 0.3) < 0.03


# -- schedules and config ----------------------------------------------------------------


def test_schedules_decay():
    c = EvolutionConfig(runs=1, batches=100, games_per_batch=10, pool_size=50)
    ks = [c.replacements(t) for t in range(100)]
    assert ks[0] == 7 and ks[-1] == 1
    assert all(x >= y for x, y in zip(ks, ks[1:]))
    its = [c.intensity(t) for t in range(100)]
    assert its[0] == pytest.approx(0.2)
    assert its[80] == pytest.approx(1 / 61)
    assert all(x > y for x, y in zip(its, its[1:]))


def test_replacements_leave_room_for_sources():
    c = EvolutionConfig(runs=1, batches=10, games_per_batch=10, pool_size=8, k0=50)
    assert c.replacements(0) == 8 - c.n_sources


@pytest.mark.parametrize("kw", [
    dict(pool_size=3), dict(runs=0), dict(i0=1.5), dict(top_fraction=0), dict(seed=-1), dict(n=1),
])
def test_config_validation(kw):
    base = dict(runs=1, batches=1, games_per_batch=1, pool_size=10)
    base.update(kw)
    with pytest.raises(ParameterOutOfRange):
        EvolutionConfig(**base)


# -- batches and runs -----------------------------------------------------------------------


def small(**kw):
    base = dict(runs=2, batches=30, games_per_batch=60, pool_size=20, n=4, H=5, seed=11)
    base.update(kw)
    return EvolutionConfig(**base)


def test_free_rider_batch_averages_endowment():
    c = small(H=20)
    pool = run_batch(PoolState.free_riders(c), c, run_stream(c, 0))
    played = pool.plays > 0
    assert played.any() and np.all(pool.averages[played] == 20)


def test_identical_members_have_equal_averages():
    c = small()
    pool = PoolState(np.tile(CompactReaction.rstar(4, 5).values, (c.pool_size, 1)))
    pool = run_batch(pool, c, run_stream(c, 0))
    assert len(set(pool.averages[pool.plays > 0])) == 1


def test_zero_games_skip_replacement():
    c = small(games_per_batch=0)
    res = evolve(c)
    for p in res.pools:
        assert not p.values.any()


def test_no_batches_returns_free_riders():
    res = evolve(small(batches=0))
    assert all(not p.values.any() for p in res.pools)
    assert all(r.mean == 0 and r.median == 0 for r in res.summary)


def test_no_replacements_keep_pool():
    res = evolve(small(k0=0))
    assert all(not p.values.any() for p in res.pools)


def test_replace_worst_targets_the_lowest():
    c = small(k0=3, k_final=3, top_fraction=0.25)
    vals = np.zeros((20, c.alphas), dtype=np.int64)
    vals[:, -1] = np.arange(20) % 6
    pool = PoolState(vals, averages=np.arange(20, dtype=float))
    out = replace_worst(pool, c, 0, np.random.default_rng(0))
    changed = {i for i in range(20) if not np.array_equal(out.values[i], vals[i])}
    assert changed <= {0, 1, 2}
    assert all(out.averages[i] >= 15 for i in range(3))


def test_pools_stay_valid_and_runs_are_deterministic():
    c = small()
    a, b = evolve(c), evolve(c)
    for p, q in zip(a.pools, b.pools):
        assert np.array_equal(p.values, q.values)
        assert np.all(np.diff(p.values, axis=1) >= 0) and p.values.max() <= c.H
    assert summary_csv(a.summary) == summary_csv(b.summary)
    assert not np.array_equal(a.pools[0].values, a.pools[1].values)


def test_run_streams_are_independent_of_run_count():
    one = evolve(small(runs=1))
    two = evolve(small(runs=2))
    assert np.array_equal(one.pools[0].values, two.pools[0].values)


# -- summary ------------------------------------------------------------------------------


def test_summary_columns():
    rows = summarize([np.zeros((3, 61), dtype=np.int64)], 4, 20)
    assert len(rows) == 61
    assert rows[60].rstar == 20 and rows[59].rstar == 19
    assert rows[59].match_average == Fraction(59, 3)
    assert all(r.mean == 0 and r.median == 0 for r in rows)


def test_lower_median():
    pools = [np.array([[0, 1], [0, 2], [0, 3], [0, 4]])]
    rows = summarize(pools, 2, 1)
    assert rows[1].median == 2 and rows[1].mean == Fraction(5, 2)


def test_empty_pools():
    with pytest.raises(EmptyPools):
        summarize([], 4, 20)


def test_summary_csv_format():
    rows = summarize([np.array([[0, 1, 1], [0, 0, 2]])], 3, 1)
    text = summary_csv(rows, digits=2)
    assert text == ("alpha,match_average,rstar,mean,median\n"
                    "0,0.00,0,0.00,0\n1,0.50,0,0.50,0\n2,1.00,1,1.50,1\n")
    assert "\r" not in text
