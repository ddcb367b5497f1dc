"""The from-scratch checker: recursive bidirectional marking, well-markedness,
the local well-formedness invariant on dirty-annotated programs, and the
zipper-maintained baseline used by the benchmark.

Everything here is a pure function over value trees and deliberately
non-incremental; the engine is tested against it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from . import sidecond as sc
from . import syntax as S
from .actions import PathInvalid, bare_children, _with_child
from .sidecond import Ctx, EMPTY_CTX
from .syntax import (
    Ap, Asc, BareExpr, BoolLit, Case, Cons, DecCon, DecExpr, Fst, Hole, Lam,
    Nil, NumLit, Pair, Snd, TypeOpt, Var,
    DAp, DAsc, DBool, DCase, DCons, DFst, DHole, DLam, DNil, DNum, DPair,
    DSnd, DVar, UNKNOWN, OK,
)


@dataclass(frozen=True)
class SynResult:
    """A constructor node paired with the type it synthesizes."""
    con: DecCon
    syn: TypeOpt


def mark_synthetic(ctx: Ctx, e: BareExpr) -> SynResult:
    """Mark a bare expression in synthetic mode (not analyzed against anything)."""
    if isinstance(e, Hole):
        return SynResult(DHole(), UNKNOWN)
    if isinstance(e, Var):
        m, ty = sc.ctx_lookup(e.name, ctx)
        return SynResult(DVar(e.name, m), ty)
    if isinstance(e, Asc):
        body = mark_analytic(ctx, e.ty, e.body)
        return SynResult(DAsc(body, e.ty, False), e.ty)
    if isinstance(e, Ap):
        fun = mark_analytic(ctx, None, e.fun)
        m, dom, cod = sc.matched_arrow(fun.syn)
        arg = mark_analytic(ctx, dom, e.arg)
        return SynResult(DAp(m, fun, arg), cod)
    if isinstance(e, NumLit):
        return SynResult(DNum(e.value), S.NUM)
    if isinstance(e, BoolLit):
        return SynResult(DBool(e.value), S.BOOL)
    if isinstance(e, Nil):
        return SynResult(DNil(), S.ListOf(UNKNOWN))
    if isinstance(e, Fst):
        item = mark_analytic(ctx, None, e.item)
        m, left, _ = sc.matched_prod(item.syn)
        return SynResult(DFst(m, item), left)
    if isinstance(e, Snd):
        item = mark_analytic(ctx, None, e.item)
        m, _, right = sc.matched_prod(item.syn)
        return SynResult(DSnd(m, item), right)
    raise TypeError(f"not a subsumable form: {e!r}")


def mark_analytic(ctx: Ctx, ana: TypeOpt, e: BareExpr) -> DecExpr:
    """Mark a bare expression against an optional expected type."""
    if isinstance(e, Lam):
        m1, dom, cod = sc.matched_arrow(ana)
        m2 = sc.consistency(dom, e.ann)
        body = mark_analytic(sc.ctx_extend(ctx, e.binder, e.ann), cod, e.body)
        syn = sc.fun_syn(ana, e.ann, body.syn)
        con: DecCon = DLam(e.binder, e.ann, False, m1, m2, body)
    elif isinstance(e, Pair):
        m, left_ty, right_ty = sc.matched_prod(ana)
        left = mark_analytic(ctx, left_ty, e.left)
        right = mark_analytic(ctx, right_ty, e.right)
        syn = sc.pair_syn(ana, left.syn, right.syn)
        con = DPair(m, left, right)
    elif isinstance(e, Cons):
        m, _ = sc.matched_list(ana)
        head_ana, _ = sc.cons_child_ana(ana, None)
        head = mark_analytic(ctx, head_ana, e.head)
        _, tail_ana = sc.cons_child_ana(ana, head.syn)
        tail = mark_analytic(ctx, tail_ana, e.tail)
        syn = sc.cons_syn(ana, head.syn)
        con = DCons(m, head, tail)
    elif isinstance(e, Case):
        scrut = mark_analytic(ctx, None, e.scrut)
        m, elem = sc.matched_list(scrut.syn)
        nil_body = mark_analytic(ctx, ana, e.nil_body)
        ctx2 = sc.ctx_extend(ctx, e.hd_binder, elem)
        ctx2 = sc.ctx_extend(ctx2, e.tl_binder, sc.listof_opt(elem))
        cons_body = mark_analytic(ctx2, sc.case_cons_ana(ana, nil_body.syn), e.cons_body)
        syn = sc.case_syn(ana, nil_body.syn)
        con = DCase(m, scrut, nil_body, e.hd_binder, e.tl_binder, cons_body)
    else:
        res = mark_synthetic(ctx, e)
        con, syn = res.con, res.syn
    return DecExpr(ana, False, sc.consistency(ana, syn), con, syn, False)


def mark_program(e: BareExpr) -> DecExpr:
    """Check a whole program: synthetic marking in the empty context under the
    fixed (no expected type, OK) program wrapper."""
    return mark_analytic(EMPTY_CTX, None, e)


def is_well_marked(p: DecExpr) -> bool:
    """True iff re-checking the erased program reproduces p up to dirty bits."""
    return mark_program(S.erase(p)) == S.strip_dirty(p)


# ---------------------------------------------------------------------------
# Well-formedness
#
# The local invariant preserved by every action and update step: at each
# information-flow edge, either some input to the edge is dirty or the stored
# output equals the recomputed one. Context entries carry the dirty bit of the
# binder type they came from.

def _succ(dirty: bool, computed, stored) -> bool:
    return dirty or computed == stored


def is_well_formed(p: DecExpr) -> bool:
    if p.ana is not None or p.mark is not OK:
        return False
    return _wf(EMPTY_CTX, p)


def _wf(ctx: Ctx, n: DecExpr) -> bool:
    con = n.con
    abit = n.ana_dirty
    sbit = n.syn_dirty

    # Wrapper consistency holds uniformly: the distributing forms synthesize
    # nothing when analyzed, which makes their stored mark OK by the same rule.
    if not _succ(abit or sbit, sc.consistency(n.ana, n.syn), n.mark):
        return False

    if isinstance(con, DHole):
        return _succ(False, UNKNOWN, n.syn)
    if isinstance(con, DNum):
        return _succ(False, S.NUM, n.syn)
    if isinstance(con, DBool):
        return _succ(False, S.BOOL, n.syn)
    if isinstance(con, DNil):
        return _succ(False, S.ListOf(UNKNOWN), n.syn)
    if isinstance(con, DVar):
        m, ty, entry_dirty = sc.ctx_lookup_entry(con.name, ctx)
        return m is con.mark and _succ(entry_dirty, ty, n.syn)
    if isinstance(con, DAsc):
        tbit = con.ty_dirty
        body = con.body
        return (_succ(tbit, con.ty, body.ana)
                and _succ(tbit, con.ty, n.syn)
                and _wf(ctx, body))
    if isinstance(con, DAp):
        fun, arg = con.fun, con.arg
        fbit = fun.syn_dirty
        m, dom, cod = sc.matched_arrow(fun.syn)
        return (fun.ana is None
                and _succ(fbit, m, con.mark)
                and _succ(fbit, dom, arg.ana)
                and _succ(fbit, cod, n.syn)
                and _wf(ctx, fun) and _wf(ctx, arg))
    if isinstance(con, DFst) or isinstance(con, DSnd):
        item = con.item
        ibit = item.syn_dirty
        m, left, right = sc.matched_prod(item.syn)
        want = left if isinstance(con, DFst) else right
        return (item.ana is None
                and _succ(ibit, m, con.mark)
                and _succ(ibit, want, n.syn)
                and _wf(ctx, item))
    if isinstance(con, DLam):
        body = con.body
        tbit = con.ann_dirty
        m1, dom, cod = sc.matched_arrow(n.ana)
        m2 = sc.consistency(dom, con.ann)
        syn = sc.fun_syn(n.ana, con.ann, body.syn)
        ctx2 = sc.ctx_extend(ctx, con.binder, con.ann, tbit)
        return (_succ(abit, m1, con.arrow_mark)
                and _succ(abit or tbit, m2, con.dom_mark)
                and _succ(abit, cod, body.ana)
                and _succ(abit or tbit or body.syn_dirty, syn, n.syn)
                and _wf(ctx2, body))
    if isinstance(con, DPair):
        left, right = con.left, con.right
        m, lty, rty = sc.matched_prod(n.ana)
        syn = sc.pair_syn(n.ana, left.syn, right.syn)
        return (_succ(abit, m, con.mark)
                and _succ(abit, lty, left.ana)
                and _succ(abit, rty, right.ana)
                and _succ(abit or left.syn_dirty or right.syn_dirty, syn, n.syn)
                and _wf(ctx, left) and _wf(ctx, right))
    if isinstance(con, DCons):
        head, tail = con.head, con.tail
        m, _ = sc.matched_list(n.ana)
        head_ana, _ = sc.cons_child_ana(n.ana, None)
        _, tail_ana = sc.cons_child_ana(n.ana, head.syn)
        syn = sc.cons_syn(n.ana, head.syn)
        return (_succ(abit, m, con.mark)
                and _succ(abit, head_ana, head.ana)
                and _succ(abit or head.syn_dirty, tail_ana, tail.ana)
                and _succ(abit or head.syn_dirty, syn, n.syn)
                and _wf(ctx, head) and _wf(ctx, tail))
    if isinstance(con, DCase):
        scrut, nil_body, cons_body = con.scrut, con.nil_body, con.cons_body
        ssbit = scrut.syn_dirty
        m, elem = sc.matched_list(scrut.syn)
        cons_ana = sc.case_cons_ana(n.ana, nil_body.syn)
        syn = sc.case_syn(n.ana, nil_body.syn)
        ctx2 = sc.ctx_extend(ctx, con.hd_binder, elem, ssbit)
        ctx2 = sc.ctx_extend(ctx2, con.tl_binder, sc.listof_opt(elem), ssbit)
        return (scrut.ana is None
                and _succ(ssbit, m, con.mark)
                and _succ(abit, n.ana, nil_body.ana)
                and _succ(abit or nil_body.syn_dirty, cons_ana, cons_body.ana)
                and _succ(abit or nil_body.syn_dirty, syn, n.syn)
                and _wf(ctx, scrut) and _wf(ctx, nil_body) and _wf(ctx2, cons_body))
    raise TypeError(f"not a decorated node: {con!r}")


# ---------------------------------------------------------------------------
# Zipper baseline

class Zipper:
    """A bare syntax tree with a movable focus.

    The benchmark edits at the focus and re-checks from scratch; keeping the
    context as a crumb stack makes each edit O(depth) instead of rebuilding
    through a path-indexed functional update.
    """

    def __init__(self, root: BareExpr):
        self.focus = root
        self.crumbs: list[tuple[BareExpr, int]] = []

    def move_to(self, path) -> None:
        while self.crumbs:
            self.up()
        for ix in path:
            self.down(ix)

    def down(self, ix: int) -> None:
        kids = bare_children(self.focus)
        if not 1 <= ix <= len(kids):
            raise PathInvalid(f"no child {ix} under {type(self.focus).__name__}")
        self.crumbs.append((self.focus, ix))
        self.focus = kids[ix - 1]

    def up(self) -> None:
        parent, ix = self.crumbs.pop()
        self.focus = _with_child(parent, ix, self.focus)

    def root(self) -> BareExpr:
        e = self.focus
        for parent, ix in reversed(self.crumbs):
            e = _with_child(parent, ix, e)
        return e

    def edit(self, action) -> None:
        from .actions import perform_simple
        self.focus = perform_simple(self.focus, action)


def baseline_check(e: BareExpr) -> tuple[DecExpr, float]:
    """From-scratch marking plus elapsed seconds."""
    t0 = time.perf_counter()
    marked = mark_program(e)
    return marked, time.perf_counter() - t0
