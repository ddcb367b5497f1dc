import random

import pytest

from incmark import syntax as S
from incmark.oracle import mark_program
from incmark.engine import Doc
from incmark import actions as A
from helpers import random_bare

GOLDEN_SOURCE = "(lam x (arrow bool num) (ap (var x) (num 1)))"


def test_erase_golden_term():
    p = mark_program(S.parse_expr(GOLDEN_SOURCE))
    assert S.print_expr(S.erase(p)) == GOLDEN_SOURCE


def test_erase_initial_program():
    assert S.erase(mark_program(S.HOLE)) == S.HOLE


def test_erase_round_trip_random():
    rng = random.Random(1)
    for _ in range(500):
        e = random_bare(rng, rng.randrange(1, 200))
        assert S.erase(mark_program(e)) == e


def test_erase_commutes_with_strip_dirty():
    rng = random.Random(2)
    for _ in range(50):
        e = random_bare(rng, 40)
        p = mark_program(e)
        assert S.erase(p) == S.erase(S.strip_dirty(p))


def test_strip_dirty_identity_on_clean():
    p = mark_program(S.parse_expr(GOLDEN_SOURCE))
    assert S.strip_dirty(p) == p


def test_strip_dirty_clears_engine_frontier():
    d = Doc(S.HOLE)
    d.apply_action(A.parse_action_line("insert-var x @ ."))
    snap = d.snapshot()
    assert not S.is_quiescent(snap)
    assert S.is_quiescent(S.strip_dirty(snap))


def test_parse_golden():
    e = S.parse_expr(GOLDEN_SOURCE)
    assert e == S.Lam("x", S.Arrow(S.BOOL, S.NUM), S.Ap(S.Var("x"), S.NumLit(1)))


def test_parse_hole():
    assert S.parse_expr("?") == S.HOLE


def test_parse_print_round_trip_random():
    rng = random.Random(3)
    for _ in range(1000):
        e = random_bare(rng, rng.randrange(1, 60))
        text = S.print_expr(e)
        assert S.parse_expr(text) == e
        assert S.print_expr(S.parse_expr(text)) == text


def test_parse_error_reports_position():
    with pytest.raises(S.ParseError) as exc:
        S.parse_expr("(lam x bogus ?)")
    assert "offset" in str(exc.value)
    with pytest.raises(S.ParseError):
        S.parse_expr("(ap ?)")
    with pytest.raises(S.ParseError):
        S.parse_expr("? ?")


def test_expr_equal_trivial_and_dirty_difference():
    p = mark_program(S.parse_expr(GOLDEN_SOURCE))
    assert S.expr_equal(p, p)
    # replay the worked trace and keep the last two propagation states: they
    # differ only in the final dirty bit
    d = Doc(S.HOLE)
    for line in ["insert-var x @ .", "wrap-ap one @ .", "insert-num 1 @ 2",
                 "wrap-fun @ .", "set-ann (arrow bool num) @ .",
                 "insert-binder x @ ."]:
        d.apply_action(A.parse_action_line(line))
    snaps = [d.snapshot()]
    while d.step() is not None:
        snaps.append(d.snapshot())
    before_last, last = snaps[-2], snaps[-1]
    assert not S.expr_equal(before_last, last)
    assert S.expr_equal(S.strip_dirty(before_last), S.strip_dirty(last))


def test_expr_equal_agrees_with_canonical_text():
    rng = random.Random(4)
    for _ in range(1000):
        a = random_bare(rng, 20)
        b = random_bare(rng, 20)
        assert (a == b) == (S.print_expr(a) == S.print_expr(b))


def test_program_shape_invariant():
    rng = random.Random(5)
    for _ in range(100):
        p = mark_program(random_bare(rng, 30))
        S.check_program_shape(p)


def test_decorated_round_trip():
    rng = random.Random(6)
    for _ in range(200):
        p = mark_program(random_bare(rng, 30))
        text = S.print_decorated(p)
        assert S.parse_decorated(text) == p


def test_decorated_round_trip_with_dirty_bits():
    d = Doc(S.HOLE)
    for line in ["insert-var x @ .", "wrap-ap one @ .", "insert-num 1 @ 2"]:
        d.apply_action(A.parse_action_line(line))
    snap = d.snapshot()
    assert S.parse_decorated(S.print_decorated(snap)) == snap
