"""Named example games and random game generators."""
import itertools

import numpy as np

from .core import StrategicGame


def _bimatrix(rows, cols, cells):
    return StrategicGame(
        ("1", "2"),
        (rows, cols),
        {(r, c): cells[k] for k, (r, c) in enumerate(itertools.product(rows, cols))},
    )


def prisoners_dilemma():
    return _bimatrix(("C", "D"), ("C", "D"), [(2, 2), (0, 3), (3, 0), (1, 1)])


def matching_pennies():
    return _bimatrix(("H", "T"), ("H", "T"), [(1, -1), (-1, 1), (-1, 1), (1, -1)])


def battle_of_the_sexes():
    return _bimatrix(("x", "y"), ("x", "y"), [(1, 2), (0, 0), (0, 0), (2, 1)])


def stag_hunt():
    return _bimatrix(("x", "y"), ("x", "y"), [(3, 3), (0, 2), (2, 0), (2, 2)])


def best_reply_deviation_game():
    """Player 1 picks a/b, player 2 picks x/y; best replies are not an equilibrium."""
    return _bimatrix(("a", "b"), ("x", "y"), [(1, 1), (0, 0), (0, 3), (1, 2)])


def no_safe_equilibrium_game():
    """3x3 game with maxmin 1 for both players and no safe equilibrium."""
    acts = ("x", "y", "z")
    cells = [
        (1, 1), (1, 0), (1, 3),
        (0, 1), (2, 2), (0, 1),
        (3, 1), (1, 0), (0, 0),
    ]
    return _bimatrix(acts, acts, cells)


def random_game(rng: np.random.Generator, sizes, low=0, high=5, players=None):
    """Integer payoffs drawn uniformly from ``low..high`` inclusive."""
    sizes = tuple(int(m) for m in sizes)
    n = len(sizes)
    players = players or tuple(str(k + 1) for k in range(n))
    actions = tuple(tuple(range(m)) for m in sizes)
    pay = rng.integers(low, high + 1, size=(n,) + sizes)
    return StrategicGame(players, actions, pay.tolist())


def worst_at_all_ones(rng: np.random.Generator, low=1, high=5):
    """Three players, actions {0, 1}, with (1,1,1) strictly worst for everyone."""
    pay = rng.integers(low, high + 1, size=(3, 2, 2, 2))
    pay[:, 1, 1, 1] = low - 1
    return StrategicGame(("1", "2", "3"), ((0, 1),) * 3, pay.tolist())
