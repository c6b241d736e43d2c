from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from rfgames import catalog
from rfgames.core import (
    StrategicGame,
    as_fraction,
    best_replies,
    maxmin,
    nash_equilibria,
    pareto_dominates,
    pareto_frontier,
)
from rfgames.errors import IncompleteProfile, InvalidGame, UnknownPlayer
from rfgames.investment import make_weakest_link


def test_nash_examples():
    assert nash_equilibria(catalog.prisoners_dilemma()) == {("D", "D")}
    assert nash_equilibria(catalog.matching_pennies()) == set()
    assert nash_equilibria(catalog.battle_of_the_sexes()) == {("x", "x"), ("y", "y")}


def test_maxmin_examples():
    pd = catalog.prisoners_dilemma()
    r = maxmin(pd, "1")
    assert r.value == 1 and r.safe_actions == {"D"}
    ex2 = catalog.no_safe_equilibrium_game()
    assert maxmin(ex2, "1").value == 1 and maxmin(ex2, "2").value == 1
    for n, H, lam in [(2, 3, 2), (3, 2, Fraction(11, 10)), (4, 1, 3)]:
        g = make_weakest_link(n, H, lam)
        for i in range(n):
            r = maxmin(g, i)
            assert r.value == 0 and r.safe_actions == {0}


def test_maxmin_unknown_player():
    with pytest.raises(UnknownPlayer):
        maxmin(catalog.prisoners_dilemma(), "9")


def test_best_replies_examples():
    g = catalog.best_reply_deviation_game()
    assert best_replies(g, "1", {"2": "x"}) == {"a"}
    assert best_replies(g, "1", ["y"]) == {"b"}
    assert best_replies(catalog.prisoners_dilemma(), "1", {"2": "C"}) == {"D"}
    flat = StrategicGame(("1", "2"), (("p", "q"), ("p", "q")), np.zeros((2, 2, 2), dtype=int))
    assert best_replies(flat, "1", ["q"]) == {"p", "q"}


def test_best_replies_incomplete():
    g = StrategicGame(("1", "2", "3"), ((0, 1),) * 3, np.zeros((3, 2, 2, 2), dtype=int))
    with pytest.raises(IncompleteProfile):
        best_replies(g, "1", {"2": 0})


def test_pareto_examples():
    pd = catalog.prisoners_dilemma()
    assert pareto_dominates(pd, ("C", "C"), ("D", "D"))
    assert pareto_dominates(pd, ("C", "D"), ("C", "D"))
    bos = catalog.battle_of_the_sexes()
    assert pareto_frontier(bos, {("x", "x"), ("y", "y")}) == {("x", "x"), ("y", "y")}


def test_invalid_games():
    with pytest.raises(InvalidGame):
        StrategicGame(("1",), (("a", "b"),), [[1, 2]])
    with pytest.raises(InvalidGame):
        StrategicGame(("1", "2"), (("a",), ("a", "b")), np.zeros((2, 1, 2)))
    with pytest.raises(InvalidGame):
        StrategicGame(("1", "2"), (("a", "b"), ("a", "b")), {("a", "a"): (1, 1)})
    with pytest.raises(InvalidGame):
        StrategicGame(("1", "2"), (("a", "a"), ("a", "b")), np.zeros((2, 2, 2)))


def test_exact_rationals():
    assert as_fraction("0.1") == Fraction(1, 10)
    assert as_fraction("7/25") == Fraction(7, 25)
    g = StrategicGame(("1", "2"), ((0, 1), (0, 1)), [[["1/3", "1/3"], [0, 0]], [["0.3333", 0], [0, 0]]])
    # 1/3 and 0.3333 are distinct, and no float rounding makes them tie
    assert g.u("1", (0, 0)) > g.u("2", (0, 0))
    assert g.scale == 30000
    assert best_replies(g, "2", [0]) == {0}


@given(st.integers(0, 10**6), st.sampled_from([(2, 2), (2, 3), (3, 2), (2, 2, 2)]))
def test_nash_and_maxmin_match_oracle(seed, sizes):
    g = catalog.random_game(np.random.default_rng(seed), sizes, -3, 3)
    assert nash_equilibria(g) == oracles.nash(g)
    for i in range(g.n):
        r = maxmin(g, i)
        assert r.value == oracles.maxmin_value(g, i)
        vals = [g.u(i, a) for a in g.outcomes()]
        assert min(vals) <= r.value <= max(vals)
        for ai in r.safe_actions:
            worst = min(g.u(i, a) for a in g.outcomes() if a[i] == ai)
            assert worst == r.value


@given(st.integers(0, 10**6))
def test_best_replies_attain_same_value(seed):
    g = catalog.random_game(np.random.default_rng(seed), (3, 3), 0, 2)
    for other in g.actions[1]:
        brs = best_replies(g, "1", [other])
        assert brs
        vals = {g.u("1", (b, other)) for b in brs}
        assert len(vals) == 1
        assert vals.pop() == max(g.u("1", (b, other)) for b in g.actions[0])
