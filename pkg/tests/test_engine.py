import random

import pytest

from incmark import actions as A
from incmark import oracle, syntax as S
from incmark.engine import ANA, SYN, Doc, NotDirty
from incmark.syntax import (
    Arrow, DecExpr, DAp, DHole, DLam, DNum, DVar,
    UNKNOWN, NUM, BOOL, OK, ERR,
)
from helpers import check_binder_index, random_trace_step

BN = Arrow(BOOL, NUM)


def act(d, line):
    return d.apply_action(A.parse_action_line(line))


def dec(ana, adirty, mark, con, syn, sdirty):
    return DecExpr(ana, adirty, mark, con, syn, sdirty)


# the worked edit trace, state by state ------------------------------------

TERM_1 = dec(None, False, OK, DHole(), UNKNOWN, False)
TERM_2 = dec(None, True, OK, DVar("x", ERR), UNKNOWN, True)
TERM_4 = dec(None, False, OK, DVar("x", ERR), UNKNOWN, False)
TERM_5 = dec(None, True, OK,
             DAp(OK,
                 dec(None, True, OK, DVar("x", ERR), UNKNOWN, True),
                 dec(None, True, OK, DNum(1), NUM, True)),
             None, True)
TERM_8_AP = DAp(OK,
                dec(None, False, OK, DVar("x", ERR), UNKNOWN, False),
                dec(UNKNOWN, False, OK, DNum(1), NUM, False))
TERM_8 = dec(None, False, OK, TERM_8_AP, UNKNOWN, False)
TERM_9 = dec(None, True, OK,
             DLam(None, UNKNOWN, False, OK, OK,
                  dec(None, True, OK, TERM_8_AP, UNKNOWN, False)),
             None, True)
TERM_10 = dec(None, True, OK,
              DLam(None, BN, True, OK, OK,
                   dec(None, True, OK, TERM_8_AP, UNKNOWN, False)),
              None, True)
TERM_11_AP = DAp(OK,
                 dec(None, False, OK, DVar("x", OK), BN, True),
                 dec(UNKNOWN, False, OK, DNum(1), NUM, False))
TERM_11 = dec(None, True, OK,
              DLam("x", BN, True, OK, OK,
                   dec(None, True, OK, TERM_11_AP, UNKNOWN, False)),
              None, True)
TERM_15 = dec(None, False, OK,
              DLam("x", BN, False, OK, OK,
                   dec(None, False, OK,
                       DAp(OK,
                           dec(None, False, OK, DVar("x", OK), BN, False),
                           dec(BOOL, False, ERR, DNum(1), NUM, False)),
                       NUM, False)),
              Arrow(BN, NUM), False)


def test_worked_trace_states():
    d = Doc(S.HOLE)

    def here(expected):
        snap = d.snapshot()
        assert snap == expected
        assert oracle.is_well_formed(snap)

    here(TERM_1)
    act(d, "insert-var x @ .")
    here(TERM_2)
    d.run_to_quiescence()
    here(TERM_4)
    act(d, "wrap-ap one @ .")
    act(d, "insert-num 1 @ 2")
    here(TERM_5)
    d.run_to_quiescence()
    here(TERM_8)
    act(d, "wrap-fun @ .")
    here(TERM_9)
    act(d, "set-ann (arrow bool num) @ .")
    here(TERM_10)
    act(d, "insert-binder x @ .")
    here(TERM_11)
    d.run_to_quiescence()
    here(TERM_15)
    assert oracle.is_well_marked(d.snapshot())


def test_load_initial_and_quiescence():
    d = Doc(S.HOLE)
    assert d.is_quiescent()
    assert d.snapshot() == TERM_1
    assert d.run_to_quiescence().steps_taken == 0


def test_load_is_well_marked():
    rng = random.Random(61)
    from helpers import random_bare
    for _ in range(100):
        e = random_bare(rng, 60)
        d = Doc(e)
        assert d.is_quiescent()
        snap = d.snapshot()
        assert S.is_quiescent(snap)
        assert oracle.is_well_marked(snap)


def test_first_step_from_term_2_is_consistency_recheck():
    d = Doc(S.HOLE)
    act(d, "insert-var x @ .")
    report = d.step()
    assert report.rule == "step-ana"
    assert len(d.dirty_set) == 1  # nothing new dirtied
    report = d.step()
    assert report.rule == "top-step"
    assert d.is_quiescent()
    assert d.step() is None


def test_function_position_step_dirties_argument():
    d = Doc(S.HOLE)
    act(d, "insert-var x @ .")
    d.run_to_quiescence()
    act(d, "wrap-ap one @ .")
    act(d, "insert-num 1 @ 2")
    # settle the two analyzed slots first (priority order), then the
    # function-position synthesized type must flow through the application
    assert d.step().rule == "step-ana"
    assert d.step().rule == "step-ana"
    arg = d.root.children[1]
    arg_ana_before = arg.ana
    report = d.step()
    assert report.rule == "step-ap"
    assert arg.ana == UNKNOWN and arg_ana_before is None
    assert arg.ana_dirty and d.root.syn_dirty


def test_wrap_ap_two_folds_in_propagation():
    d = Doc(S.NumLit(1))
    act(d, "wrap-ap two @ .")
    snap = d.snapshot()
    con = snap.con
    assert isinstance(con, DAp)
    assert con.fun == dec(None, False, OK, DHole(), UNKNOWN, False)  # clean hole
    assert con.arg.ana == UNKNOWN and con.arg.ana_dirty
    assert not con.arg.syn_dirty
    assert snap.syn == UNKNOWN and snap.syn_dirty
    d.run_to_quiescence()
    assert S.strip_dirty(d.snapshot()) == oracle.mark_program(S.parse_expr("(ap ? (num 1))"))


def test_ascription_step_flows_type():
    d = Doc(S.NumLit(1))
    act(d, "wrap-asc @ .")
    act(d, "set-asc bool @ .")
    d.run_to_quiescence()
    snap = d.snapshot()
    assert snap.con.body.ana == BOOL
    assert snap.con.body.mark is ERR  # bool vs num
    assert snap.syn == BOOL


def test_apply_action_returns_replacement():
    d = Doc(S.HOLE)
    n = act(d, "insert-var x @ .")
    assert n.kind == "var"
    w = d.apply_simple(n, A.WrapAp(1))
    assert w.kind == "ap" and w.children[0] is n
    h = d.apply_simple(w, A.Delete())
    assert h.kind == "hole" and d.root is h


def test_errors_leave_document_unchanged():
    d = Doc(S.parse_expr("(ap (var x) (num 1))"))
    before = d.snapshot()
    with pytest.raises(A.PathInvalid):
        d.apply_action(A.parse_action_line("delete @ 3"))
    with pytest.raises(A.ActionInapplicable):
        d.apply_action(A.parse_action_line("insert-var y @ 1"))
    with pytest.raises(A.ActionInapplicable):
        d.apply_action(A.parse_action_line("delete-binder @ ."))
    assert d.snapshot() == before


def test_variable_update_empty_is_noop():
    d = Doc(S.parse_expr("(lam ? num (num 2))"))
    act(d, "insert-binder x @ .")  # captures nothing
    snap = d.snapshot()
    assert snap.con.binder == "x"
    assert not snap.con.body.syn_dirty


def test_action_induced_update_dirties_even_unchanged_type():
    # binder annotation ?: bound and free occurrences both synthesize ?, so
    # deleting the binder changes the mark but not the type; the occurrence
    # must be dirtied anyway because the edit rebound it
    d = Doc(S.parse_expr("(lam x ? (var x))"))
    var = d.root.children[0]
    assert var.syn == UNKNOWN and not var.syn_dirty
    act(d, "delete-binder @ .")
    assert var.syn == UNKNOWN and var.syn_dirty
    assert var.var_mark is ERR


def test_step_update_skips_unchanged_type():
    # rewriting the annotation to the same type must not dirty the bound
    # occurrence during the annotation step
    d = Doc(S.parse_expr("(lam x num (var x))"))
    var = d.root.children[0]
    act(d, "set-ann num @ .")
    assert d.root.surface_dirty
    report = d.step()  # surface slot has the highest priority here
    assert report.rule == "step-ann-fun"
    assert not var.syn_dirty
    assert d.root.ana_dirty  # control re-dirty always happens
    d.run_to_quiescence()
    assert d.snapshot() == Doc(S.parse_expr("(lam x num (var x))")).snapshot()


def test_tombstones_are_skipped_lazily():
    d = Doc(S.parse_expr("(ap ? ?)"))
    act(d, "insert-num 1 @ 2")  # dirties slots inside the argument
    act(d, "delete @ .")        # tombstones the whole application
    stats = d.run_to_quiescence()
    assert stats.skipped_tombstones >= 1
    assert d.is_quiescent()
    assert S.strip_dirty(d.snapshot()) == oracle.mark_program(S.HOLE)


def test_no_duplicate_queue_entries():
    d = Doc(S.HOLE)
    act(d, "insert-var x @ .")
    assert len(d.heap) == len(d.dirty_set) == 2
    d.dirty(d.root, ANA)  # re-dirtying is a no-op
    d.dirty(d.root, SYN)
    assert len(d.heap) == 2
    d.check_coherence()


def test_step_at_single_dirty_equals_step():
    def prepared():
        d = Doc(S.HOLE)
        act(d, "insert-var x @ .")
        d.step()
        return d
    d1, d2 = prepared(), prepared()
    d1.step()
    (n, slot), = d2.dirty_set
    d2.step_at(n, slot)
    assert d1.snapshot() == d2.snapshot()


def test_step_at_rejects_clean_slot():
    d = Doc(S.HOLE)
    with pytest.raises(NotDirty):
        d.step_at(d.root, SYN)


def test_interleaving_reaches_same_quiescent_state():
    lines = ["insert-var x @ .", "wrap-ap one @ .", "insert-num 1 @ 2",
             "wrap-fun @ .", "set-ann (arrow bool num) @ .", "insert-binder x @ ."]
    eager = Doc(S.HOLE)
    for line in lines:
        act(eager, line)
        eager.run_to_quiescence()
    for seed in range(5):
        rng = random.Random(seed)
        d = Doc(S.HOLE)
        for line in lines:
            act(d, line)
            for _ in range(rng.randrange(4)):
                locs = d.dirty_locations()
                if not locs:
                    break
                d.step_at(*rng.choice(locs))
        d.run_to_quiescence()
        assert d.snapshot() == eager.snapshot()


def test_queue_flag_coherence_through_edits():
    rng = random.Random(62)
    e = S.HOLE
    d = Doc(e)
    for _ in range(200):
        la, e = random_trace_step(rng, e)
        if la is None:
            continue
        d.apply_action(la)
        d.check_coherence()
        if rng.random() < 0.5 and d.step() is not None:
            d.check_coherence()
    d.run_to_quiescence()
    d.check_coherence()
    d.check_timestamps()
    check_binder_index(d)


def test_case_scrutinee_type_flows_to_bound_occurrences():
    d = Doc(S.parse_expr("(case ? nil h t (cons (var h) (var t)))"))
    hd_var = d.root.children[2].children[0]
    assert hd_var.syn == UNKNOWN
    act(d, "insert-nil @ 1")
    d.run_to_quiescence()
    assert hd_var.syn == UNKNOWN  # list of unknown: heads synthesize ?
    act(d, "delete @ 1")
    act(d, "wrap-asc @ 1")
    act(d, "set-asc (list num) @ 1")
    d.run_to_quiescence()
    assert hd_var.syn == NUM
    tl_var = d.root.children[2].children[1]
    assert tl_var.syn == S.ListOf(NUM)
    assert S.strip_dirty(d.snapshot()) == oracle.mark_program(S.erase(d.snapshot()))
