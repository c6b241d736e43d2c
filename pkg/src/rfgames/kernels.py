"""Hot loops over flattened games.

A game with ``n`` players and action counts ``m`` is flattened to ``M``
outcomes in row-major order. Every kernel takes the same precomputed layout:

``act[o, i]``
    action index of player ``i`` at outcome ``o``.
``oth[o, i]``
    row-major index of ``o`` with player ``i`` removed, i.e. the entry of
    player ``i``'s reaction table that is consulted at ``o``.
``pay[i, o]``
    payoff of player ``i`` at ``o``, scaled to a common integer denominator
    so every comparison is exact.
``tables[i, k]``
    reaction of player ``i`` to others-profile ``k`` (rows padded to the
    longest table).

Each kernel exists twice: a loop version compiled with numba and a
vectorized numpy version. The public names dispatch on ``USE_NUMBA``.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

RFE = 0
NOT_UNAMBIGUOUS = 1
DEVIATION = 2

_I64_MIN = np.iinfo(np.int64).min


# ---------------------------------------------------------------------------
# happiness / fixed points
# ---------------------------------------------------------------------------


@njit
def _happy_nb(tables, act, oth):
    M, n = act.shape
    out = np.empty((M, n), dtype=np.bool_)
    for o in range(M):
        for i in range(n):
            out[o, i] = tables[i, oth[o, i]] == act[o, i]
    return out


def _happy_np(tables, act, oth):
    n = act.shape[1]
    return tables[np.arange(n)[None, :], oth] == act


def happy(tables, act, oth):
    """``out[o, i]`` is true when player ``i``'s reaction agrees with ``o``."""
    if USE_NUMBA:
        return _happy_nb(tables, act, oth)
    return _happy_np(tables, act, oth)


# ---------------------------------------------------------------------------
# single-profile RFE verdict
# ---------------------------------------------------------------------------


@njit
def _verdict_nb(tables, act, oth, pay):
    M, n = act.shape
    unhappy = np.zeros(M, dtype=np.int64)
    last_unhappy = np.full(M, -1, dtype=np.int64)
    for o in range(M):
        for i in range(n):
            if tables[i, oth[o, i]] != act[o, i]:
                unhappy[o] += 1
                last_unhappy[o] = i
    best = np.full(n, _I64_MIN, dtype=np.int64)
    nfix = 0
    for o in range(M):
        if unhappy[o] == 0:
            nfix += 1
            for i in range(n):
                if pay[i, o] > best[i]:
                    best[i] = pay[i, o]
    if nfix == 0:
        return NOT_UNAMBIGUOUS, -1, -1
    top = -1
    for o in range(M):
        if unhappy[o] == 0:
            ok = True
            for i in range(n):
                if pay[i, o] != best[i]:
                    ok = False
                    break
            if ok:
                top = o
                break
    if top < 0:
        return NOT_UNAMBIGUOUS, -1, -1
    # i deviates to the constant act[o, i] whenever everyone else is happy at o
    for i in range(n):
        dev = -1
        dev_pay = best[i]
        for o in range(M):
            u = unhappy[o]
            if u == 0 or (u == 1 and last_unhappy[o] == i):
                if pay[i, o] > dev_pay:
                    dev_pay = pay[i, o]
                    dev = o
        if dev >= 0:
            return DEVIATION, i, dev
    return RFE, -1, top


def _verdict_np(tables, act, oth, pay):
    h = _happy_np(tables, act, oth)
    fixed = h.all(axis=1)
    if not fixed.any():
        return NOT_UNAMBIGUOUS, -1, -1
    fpay = pay[:, fixed]
    best = fpay.max(axis=1)
    tops = np.flatnonzero(fixed & (pay == best[:, None]).all(axis=0))
    if tops.size == 0:
        return NOT_UNAMBIGUOUS, -1, -1
    n = act.shape[1]
    unhappy = (~h).sum(axis=1)
    for i in range(n):
        others_ok = (unhappy == 0) | ((unhappy == 1) & ~h[:, i])
        cand = np.where(others_ok, pay[i], _I64_MIN)
        o = int(np.argmax(cand))
        if cand[o] > best[i]:
            return DEVIATION, i, o
    return RFE, -1, int(tops[0])


def verdict(tables, act, oth, pay):
    """Return ``(code, player, outcome)``.

    ``code`` is ``RFE`` (``outcome`` is the first top fixed point),
    ``NOT_UNAMBIGUOUS`` or ``DEVIATION`` (``player`` gains by switching to the
    constant ``act[outcome, player]``).
    """
    if USE_NUMBA:
        code, i, o = _verdict_nb(tables, act, oth, pay)
        return int(code), int(i), int(o)
    return _verdict_np(tables, act, oth, pay)


# ---------------------------------------------------------------------------
# exhaustive profile scan
# ---------------------------------------------------------------------------


@njit
def _scan_nb(act, oth, pay, owner, slot, choices, nchoices, kmax):
    M, n = act.shape
    T = owner.shape[0]
    digits = np.zeros(T, dtype=np.int64)
    tables = np.zeros((n, kmax), dtype=np.int64)
    for t in range(T):
        tables[owner[t], slot[t]] = choices[t, 0]
    supported = np.zeros(M, dtype=np.bool_)
    n_rfe = 0
    n_profiles = 0
    unhappy = np.zeros(M, dtype=np.int64)
    last_unhappy = np.zeros(M, dtype=np.int64)
    best = np.zeros(n, dtype=np.int64)
    while True:
        n_profiles += 1
        for o in range(M):
            unhappy[o] = 0
            last_unhappy[o] = -1
            for i in range(n):
                if tables[i, oth[o, i]] != act[o, i]:
                    unhappy[o] += 1
                    last_unhappy[o] = i
        for i in range(n):
            best[i] = _I64_MIN
        nfix = 0
        for o in range(M):
            if unhappy[o] == 0:
                nfix += 1
                for i in range(n):
                    if pay[i, o] > best[i]:
                        best[i] = pay[i, o]
        is_rfe = False
        if nfix > 0:
            has_top = False
            for o in range(M):
                if unhappy[o] == 0:
                    ok = True
                    for i in range(n):
                        if pay[i, o] != best[i]:
                            ok = False
                            break
                    if ok:
                        has_top = True
                        break
            if has_top:
                is_rfe = True
                for i in range(n):
                    for o in range(M):
                        u = unhappy[o]
                        if u == 0 or (u == 1 and last_unhappy[o] == i):
                            if pay[i, o] > best[i]:
                                is_rfe = False
                                break
                    if not is_rfe:
                        break
        if is_rfe:
            n_rfe += 1
            for o in range(M):
                if unhappy[o] == 0:
                    ok = True
                    for i in range(n):
                        if pay[i, o] != best[i]:
                            ok = False
                            break
                    if ok:
                        supported[o] = True
        # odometer
        t = 0
        while t < T:
            digits[t] += 1
            if digits[t] < nchoices[t]:
                tables[owner[t], slot[t]] = choices[t, digits[t]]
                break
            digits[t] = 0
            tables[owner[t], slot[t]] = choices[t, 0]
            t += 1
        if t == T:
            break
    return supported, n_rfe, n_profiles


def _scan_np(act, oth, pay, owner, slot, choices, nchoices, kmax, chunk=1 << 14):
    M, n = act.shape
    T = owner.shape[0]
    total = int(np.prod(nchoices)) if T else 1
    supported = np.zeros(M, dtype=bool)
    n_rfe = 0
    radix = np.concatenate(([1], np.cumprod(nchoices)[:-1])).astype(np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        C = idx.size
        digits = (idx[:, None] // radix[None, :]) % nchoices[None, :]
        tables = np.zeros((C, n, kmax), dtype=np.int64)
        tables[:, owner, slot] = choices[np.arange(T)[None, :], digits]
        # react[c, o, i] = tables[c, i, oth[o, i]]
        react = tables[:, np.arange(n)[None, :], oth]
        h = react == act[None, :, :]
        unhappy = (~h).sum(axis=2)
        fixed = unhappy == 0
        masked = np.where(fixed[:, None, :], pay[None, :, :], _I64_MIN)
        best = masked.max(axis=2)
        is_top = fixed & (pay[None, :, :] == best[:, :, None]).all(axis=1)
        ok = is_top.any(axis=1)
        for i in range(n):
            others_ok = (unhappy == 0) | ((unhappy == 1) & ~h[:, :, i])
            dev = np.where(others_ok, pay[i][None, :], _I64_MIN).max(axis=1)
            ok &= dev <= best[:, i]
        n_rfe += int(ok.sum())
        supported |= is_top[ok].any(axis=0)
    return supported, n_rfe, total


def scan_profiles(act, oth, pay, owner, slot, choices, nchoices, kmax):
    """Enumerate every profile whose table entries range over ``choices``.

    Table entry ``t`` is ``tables[owner[t], slot[t]]`` and takes the values
    ``choices[t, :nchoices[t]]``. Returns ``(supported_mask, n_rfe,
    n_profiles)`` where ``supported_mask`` flags every outcome that is a top
    fixed point of some RFE among the enumerated profiles.
    """
    if USE_NUMBA:
        s, r, p = _scan_nb(act, oth, pay, owner, slot, choices, nchoices, kmax)
        return s, int(r), int(p)
    return _scan_np(act, oth, pay, owner, slot, choices, nchoices, kmax)


# ---------------------------------------------------------------------------
# evolution: batches of public-good games between compact reactions
# ---------------------------------------------------------------------------


@njit
def _play_batch_nb(values, picks, H, lam_num, lam_den):
    G, n = picks.shape
    P = values.shape[0]
    actions = np.empty((G, n), dtype=np.int64)
    sums = np.zeros(P, dtype=np.int64)
    counts = np.zeros(P, dtype=np.int64)
    a = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    for g in range(G):
        for i in range(n):
            a[i] = H
        while True:
            total = 0
            for i in range(n):
                total += a[i]
            changed = False
            for i in range(n):
                nxt[i] = values[picks[g, i], total - a[i]]
                if nxt[i] != a[i]:
                    changed = True
            if not changed:
                break
            for i in range(n):
                a[i] = nxt[i]
        total = 0
        for i in range(n):
            total += a[i]
            actions[g, i] = a[i]
        for i in range(n):
            p = picks[g, i]
            sums[p] += lam_den * (H - a[i]) + lam_num * total
            counts[p] += 1
    return actions, sums, counts


def _play_batch_np(values, picks, H, lam_num, lam_den):
    G, n = picks.shape
    P = values.shape[0]
    a = np.full((G, n), H, dtype=np.int64)
    while True:
        others = a.sum(axis=1, keepdims=True) - a
        nxt = values[picks, others]
        if np.array_equal(nxt, a):
            break
        a = nxt
    total = a.sum(axis=1, keepdims=True)
    scaled = lam_den * (H - a) + lam_num * total
    sums = np.zeros(P, dtype=np.int64)
    counts = np.zeros(P, dtype=np.int64)
    np.add.at(sums, picks.ravel(), scaled.ravel())
    np.add.at(counts, picks.ravel(), 1)
    return a, sums, counts


def play_batch(values, picks, H, lam_num, lam_den):
    """Play one game per row of ``picks`` and accumulate payoffs per member.

    ``values[p, s]`` is member ``p``'s contribution when the others' total is
    ``s``. Every game settles at its greatest fixed point, reached by
    iterating downward from all-``H``. Payoffs are ``lam_den`` times
    ``H - a_i + (lam_num / lam_den) * sum(a)``, so they stay integral.
    Returns ``(actions, payoff_sums, play_counts)``.
    """
    if USE_NUMBA:
        return _play_batch_nb(values, picks, int(H), int(lam_num), int(lam_den))
    return _play_batch_np(values, picks, int(H), int(lam_num), int(lam_den))
