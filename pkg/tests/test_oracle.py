import random
from dataclasses import replace

from incmark import actions as A
from incmark import oracle, syntax as S
from incmark.engine import Doc
from incmark.syntax import Arrow, UNKNOWN, NUM, BOOL, OK, ERR
from helpers import random_bare, random_trace_step


def test_mark_nonfunction_application():
    p = oracle.mark_program(S.parse_expr("(ap (num 1) (var x))"))
    ap = p.con
    assert isinstance(ap, S.DAp)
    assert ap.mark is ERR                       # number in function position
    assert isinstance(ap.arg.con, S.DVar) and ap.arg.con.mark is ERR  # free
    assert p.syn == UNKNOWN
    assert S.count_errors(p) == 2


def test_mark_free_var_application():
    p = oracle.mark_program(S.parse_expr("(ap (var x) (num 1))"))
    ap = p.con
    assert isinstance(ap.fun.con, S.DVar) and ap.fun.con.mark is ERR
    assert ap.mark is OK
    assert ap.arg.mark is OK                    # ? is consistent with num
    assert p.syn == UNKNOWN


def test_mark_golden_lambda():
    p = oracle.mark_program(S.parse_expr("(lam x (arrow bool num) (ap (var x) (num 1)))"))
    assert S.count_errors(p) == 1
    lam = p.con
    arg = lam.body.con.arg
    assert arg.mark is ERR                      # bool expected, num synthesized
    assert p.syn == Arrow(Arrow(BOOL, NUM), NUM)


def test_marking_unicity_and_idempotence():
    rng = random.Random(31)
    for _ in range(500):
        e = random_bare(rng, rng.randrange(1, 50))
        p1 = oracle.mark_program(e)
        p2 = oracle.mark_program(e)
        assert p1 == p2
        assert oracle.is_well_marked(p1)


def test_well_formed_quiescent():
    rng = random.Random(32)
    for _ in range(100):
        p = oracle.mark_program(random_bare(rng, 30))
        assert oracle.is_well_formed(p)


def test_well_formed_rejects_flipped_mark():
    p = oracle.mark_program(S.parse_expr("(lam x (arrow bool num) (ap (var x) (num 1)))"))
    lam = p.con
    bad_arg = replace(lam.body.con.arg, mark=OK)
    bad = replace(p, con=replace(lam, body=replace(lam.body, con=replace(lam.body.con, arg=bad_arg))))
    assert not oracle.is_well_formed(bad)


def test_well_formed_through_trace():
    # preserved across random actions and steps (small-scale check; the
    # acceptance suite runs the full fuzz)
    rng = random.Random(33)
    for _ in range(20):
        e = S.HOLE
        d = Doc(S.HOLE)
        for _ in range(20):
            la, e = random_trace_step(rng, e)
            if la is None:
                continue
            d.apply_action(la)
            assert oracle.is_well_formed(d.snapshot())
            if d.step() is not None:
                assert oracle.is_well_formed(d.snapshot())


def test_zipper_edit_and_root():
    z = oracle.Zipper(S.parse_expr("(ap (var x) ?)"))
    z.move_to((2,))
    z.edit(A.InsertNumLit(5))
    assert z.root() == S.parse_expr("(ap (var x) (num 5))")
    z.move_to(())
    assert z.focus == S.parse_expr("(ap (var x) (num 5))")


def test_baseline_check_agrees():
    rng = random.Random(34)
    for _ in range(50):
        e = random_bare(rng, 40)
        marked, elapsed = oracle.baseline_check(e)
        assert marked == oracle.mark_program(e)
        assert elapsed >= 0.0


def test_baseline_hole_near_zero():
    marked, elapsed = oracle.baseline_check(S.HOLE)
    assert S.count_errors(marked) == 0
    assert elapsed < 0.1
