import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rfgames import catalog
from rfgames.cli import main
from rfgames.errors import ParseError
from rfgames.evolution import EvolutionConfig
from rfgames.investment import make_public_good, make_weakest_link
from rfgames.io import (
    parse_config,
    parse_events,
    parse_game,
    parse_reactions,
    serialize_config,
    serialize_events,
    serialize_game,
    serialize_profile,
)
from rfgames.reaction import Profile, ReactionFunction

DATA = Path(__file__).resolve().parent.parent / "data"


# -- round trips ------------------------------------------------------------------------


@pytest.mark.parametrize("game", [
    catalog.prisoners_dilemma(), catalog.matching_pennies(), catalog.no_safe_equilibrium_game(),
    make_weakest_link(3, 4, Fraction(3, 2)), make_public_good(4, 20, Fraction(2, 5)),
])
def test_game_round_trip(game):
    text = serialize_game(game)
    again = parse_game(text)
    assert again == game and serialize_game(again) == text


@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2), (3, 2), (2, 2, 2)]))
def test_random_game_and_profile_round_trip(seed, sizes):
    rng = np.random.default_rng(seed)
    g = catalog.random_game(rng, sizes, -3, 3)
    g2 = parse_game(serialize_game(g))
    assert g2 == g
    prof = Profile(g, [ReactionFunction(i, rng.integers(0, sizes[i], size=g.others_shape(i))) for i in range(g.n)])
    text = serialize_profile(prof)
    assert Profile(g, parse_reactions(text, g)) == prof


def test_event_and_config_round_trip():
    script = parse_events((DATA / "coordinate" / "golden.txt").read_text())
    assert parse_events(serialize_events(script)) == script
    cfg = EvolutionConfig(runs=3, batches=4, games_per_batch=5, pool_size=6, lam=Fraction(3, 7), seed=9)
    assert parse_config(serialize_config(cfg)) == cfg


def test_fractional_and_decimal_payoffs():
    g = parse_game("players a b\nactions a 0 1\nactions b 0 1\npayoffs\n"
                   "0 0 : 1/2 0.25\n0 1 : 0 0\n1 0 : 0 0\n1 1 : -1 3\n")
    assert g.u("a", (0, 0)) == Fraction(1, 2) and g.u("b", (0, 0)) == Fraction(1, 4)


def test_builtins():
    g = make_public_good(3, 2, Fraction(1, 2))
    rs = parse_reactions("owner 1\nrstar\nowner 2\nconstant 2\nowner 3\nbr\n", g)
    assert rs[0].react(g, (0, 2)) == 1
    assert rs[1].is_constant() and rs[2].react(g, (2, 2)) == 0


# -- parse errors ---------------------------------------------------------------------------


@pytest.mark.parametrize("text,line", [
    ("players 1 2\nactions 1 C D\nactions 2 C D\npayoffs\nC C : 1 1\nC D 0 0\n", 6),
    ("players 1 2\nactions 3 C D\n", 2),
    ("kind weakest-link 3 4 1\n", 1),
    ("kind tug-of-war 3 4 2\n", 1),
    ("players 1 2\nactions 1 C\nactions 2 C\npayoffs\nC C : x 1\n", 5),
])
def test_game_parse_errors_have_lines(text, line):
    with pytest.raises(ParseError) as e:
        parse_game(text, "g.txt")
    assert f"g.txt:{line}:" in str(e.value)


def test_incomplete_payoffs():
    with pytest.raises(ParseError):
        parse_game("players 1 2\nactions 1 C D\nactions 2 C\npayoffs\nC C : 1 1\n")


@pytest.mark.parametrize("text,line", [
    ("C -> C\n", 1),
    ("owner 1\nC -> C\n", 1),  # incomplete block points at its owner line
    ("owner 1\nC -> C\nD -> X\n", 3),
    ("owner 9\n", 1),
    ("owner 1\nC -> C\nC -> D\n", 3),
    ("owner 1\nteleport\n", 2),
])
def test_reaction_parse_errors(text, line):
    g = catalog.prisoners_dilemma()
    with pytest.raises(ParseError) as e:
        parse_reactions(text, g, "r.txt")
    assert f"r.txt:{line}:" in str(e.value)


def test_event_and_config_errors():
    with pytest.raises(ParseError) as e:
        parse_events("game g.txt\ndeadline 3\ncommit 1 abc\n", "s.txt")
    assert "s.txt:3:" in str(e.value)
    with pytest.raises(ParseError):
        parse_events("commit 1 " + "0" * 64 + "\n")
    with pytest.raises(ParseError):
        parse_config('{"runs": 1, "colour": 2}')
    with pytest.raises(ParseError):
        parse_config('{"runs": 1,')


# -- command line --------------------------------------------------------------------------


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_pd(capsys):
    code, out, _ = run(capsys, "analyze", DATA / "pd.txt")
    assert code == 0
    assert "nash: (D, D)" in out and "maxmin 1: 1" in out and "maxmin 2: 1" in out


def test_analyze_pennies_csv(capsys):
    code, out, _ = run(capsys, "analyze", DATA / "pennies.txt", "--csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "section,item,value"
    assert not any(l.startswith("nash") for l in lines)
    assert "\r" not in out


def test_check_verdicts_and_exit_codes(capsys):
    code, out, _ = run(capsys, "check", DATA / "pd.txt", DATA / "pd_match_other.txt", "--expect", "rfe")
    assert code == 0 and "verdict: RFE" in out and "top: (C, C)" in out
    code, out, _ = run(capsys, "check", DATA / "deviation.txt", DATA / "best_replies.txt", "--expect", "rfe")
    assert code == 1 and "DEVIATION(2, y)" in out
    code, _, _ = run(capsys, "check", DATA / "deviation.txt", DATA / "best_replies.txt", "--expect", "not-rfe")
    assert code == 0


def test_check_bos_is_ambiguous(capsys, tmp_path):
    bos = catalog.battle_of_the_sexes()
    (tmp_path / "bos.txt").write_text(serialize_game(bos))
    acts = bos.actions
    lines = []
    for p in bos.players:
        lines.append(f"owner {p}")
        lines += [f"{a} -> {a}" for a in acts[0]]
    (tmp_path / "match.txt").write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "check", tmp_path / "bos.txt", tmp_path / "match.txt", "--expect", "rfe")
    assert code == 1 and "NOT_UNAMBIGUOUS" in out


def test_construct_promise_threat_round_trips(capsys, tmp_path):
    out_file = tmp_path / "prof.txt"
    code, _, _ = run(capsys, "construct", DATA / "pd.txt", "--method", "promise-threat",
                     "--target", "C", "C", "--out", out_file)
    assert code == 0
    assert out_file.read_text() == (DATA / "pd_match_other.txt").read_text()
    code, out, _ = run(capsys, "check", DATA / "pd.txt", out_file, "--expect", "rfe")
    assert code == 0


def test_construct_errors(capsys, tmp_path):
    code, _, err = run(capsys, "construct", DATA / "pd.txt", "--method", "isolation")
    assert code == 2 and "--target" in err
    g = tmp_path / "g.txt"
    g.write_text(serialize_game(catalog.random_game(np.random.default_rng(0), (2, 2, 2))))
    code, _, err = run(capsys, "construct", g, "--method", "isolation", "--target", "0", "0", "0")
    assert code == 2 and "UNSUPPORTED_DIMENSIONS" in err


def test_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("players 1 2\nactions 1 C D\nactions 2 C D\npayoffs\nC C : 1\n")
    code, _, err = run(capsys, "analyze", bad)
    assert code == 2 and "bad.txt:5:" in err
    code, _, err = run(capsys, "analyze", tmp_path / "missing.txt")
    assert code == 2


def test_coordinate_golden(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    code, out, _ = run(capsys, "coordinate", DATA / "coordinate" / "golden.txt", "--trace", trace)
    assert code == 0
    assert trace.read_bytes() == b"step,a_1,a_2,a_3\n0,2,3,4\n1,2,2,2\n"
    assert "result 2 2 2" in out
    assert "ledger 2 invested=2 refunded=1" in out and "ledger 3 invested=2 refunded=2" in out


def test_coordinate_mismatch_and_deadline(capsys):
    code, _, err = run(capsys, "coordinate", DATA / "coordinate" / "mismatch.txt")
    assert code == 2 and "COMMITMENT_MISMATCH" in err
    code, out, _ = run(capsys, "coordinate", DATA / "coordinate" / "deadline.txt")
    assert code == 0 and "phase REFUNDED" in out and "ledger 1 invested=0 refunded=5" in out


def test_digest_command(capsys):
    salt = "11" * 32
    code, out, _ = run(capsys, "digest", DATA / "coordinate" / "wl3.txt", DATA / "coordinate" / "br1.txt", salt)
    assert code == 0
    assert out.strip() in (DATA / "coordinate" / "golden.txt").read_text()
    code, _, err = run(capsys, "digest", DATA / "coordinate" / "wl3.txt", DATA / "coordinate" / "br1.txt", "11")
    assert code == 2 and "BAD_SALT" in err


def test_evolve_rows_and_determinism(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"runs": 1, "batches": 20, "games_per_batch": 50, "pool_size": 20, "lam": "2/5"}))
    code, a, _ = run(capsys, "evolve", cfg, "--seed", 5)
    assert code == 0
    rows = a.splitlines()
    assert rows[0] == "alpha,match_average,rstar,mean,median" and len(rows) == 62
    _, b, _ = run(capsys, "evolve", cfg, "--seed", 5)
    assert a == b


def test_evolve_zero_batches(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"runs": 2, "batches": 0, "games_per_batch": 5, "pool_size": 8}))
    out_file = tmp_path / "s.csv"
    code, _, _ = run(capsys, "evolve", cfg, "--seed", 1, "--digits", "2", "--out", out_file)
    assert code == 0
    for line in out_file.read_text().splitlines()[1:]:
        alpha, _, _, mean, median = line.split(",")
        assert mean == "0.00" and median == "0"


def test_evolve_requires_seed(capsys):
    with pytest.raises(SystemExit) as e:
        main(["evolve", str(DATA / "evolve_small.json")])
    assert e.value.code == 2
