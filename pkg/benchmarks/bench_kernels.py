"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each kernel is run once untimed so JIT compilation is excluded, then the
best of ``--repeat`` runs is reported. Outputs are compared before timing.
"""
import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rfgames import catalog, kernels  # noqa: E402
from rfgames.reaction import Profile, ReactionFunction  # noqa: E402


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def scan_inputs(game):
    lay = game.layout
    owner, slot = [], []
    for i in range(game.n):
        owner += [i] * lay.table_sizes[i]
        slot += list(range(lay.table_sizes[i]))
    width = max(game.shape)
    choices = np.zeros((len(owner), width), dtype=np.int64)
    nchoices = np.zeros(len(owner), dtype=np.int64)
    for t, i in enumerate(owner):
        choices[t, : game.shape[i]] = np.arange(game.shape[i])
        nchoices[t] = game.shape[i]
    return (lay.act, lay.oth, lay.pay, np.array(owner, dtype=np.int64), np.array(slot, dtype=np.int64),
            choices, nchoices, lay.kmax)


def cases(rng):
    g = catalog.random_game(rng, (4, 4, 4, 4))
    prof = Profile(g, [ReactionFunction(i, rng.integers(0, 4, size=g.others_shape(i))) for i in range(g.n)])
    lay, tabs = g.layout, prof.tables()
    yield ("happy 4x4x4x4", lambda: kernels._happy_nb(tabs, lay.act, lay.oth),
           lambda: kernels._happy_np(tabs, lay.act, lay.oth))
    yield ("verdict 4x4x4x4", lambda: kernels._verdict_nb(tabs, lay.act, lay.oth, lay.pay),
           lambda: kernels._verdict_np(tabs, lay.act, lay.oth, lay.pay))

    scan = scan_inputs(catalog.random_game(rng, (2, 2, 2)))
    yield ("scan 2x2x2 (4096 profiles)", lambda: kernels._scan_nb(*scan), lambda: kernels._scan_np(*scan))

    n, H, P = 4, 20, 100
    values = np.maximum.accumulate(rng.integers(0, H + 1, size=(P, (n - 1) * H + 1)), axis=1)
    picks = rng.integers(0, P, size=(1000, n))
    yield ("play_batch 1000 games", lambda: kernels._play_batch_nb(values, picks, H, 2, 5),
           lambda: kernels._play_batch_np(values, picks, H, 2, 5))


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    print(f"{'kernel':30s} {'numba us':>10s} {'numpy us':>10s} {'speedup':>8s}")
    for name, nb, np_ in cases(np.random.default_rng(args.seed)):
        if not same(nb(), np_()):
            print(f"{name}: outputs differ", file=sys.stderr)
            return 1
        t_nb, t_np = best_of(nb, args.repeat), best_of(np_, args.repeat)
        print(f"{name:30s} {t_nb * 1e6:10.1f} {t_np * 1e6:10.1f} {t_np / t_nb:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
