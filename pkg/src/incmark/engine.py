"""The live document: a mutable decorated tree under fine-grained edits.

Edits mutate the tree, update binding structure atomically through the scope
index, and mark the stored types whose downstream ramifications are now stale.
Update steps pop one dirty location at a time from a priority queue (pre-order
position for analyzed and surface types, post-order for synthesized types),
recompute the local information flow, and dirty only what changed. Between
edits the document converges to exactly the from-scratch marking; the queue
order is a performance heuristic, never a correctness requirement.

Deleted subtrees are tombstoned: their queue entries are skipped lazily at pop
time, which is the only reason deletion traverses the removed subtree.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Optional

from . import actions as A
from . import sidecond as sc
from . import syntax as S
from .binder_index import BinderRecord, NameIndex
from .oracle import mark_program
from .order_maintenance import OmOrder
from .syntax import Mark, TypeOpt, UNKNOWN, OK, ERR

ANA = "ana"
SYN = "syn"
ANN = "ann"  # lam annotation
ASC = "asc"  # ascription type

_SLOT_RANK = {ANN: 0, ASC: 0, ANA: 1, SYN: 2}

_CHILD_COUNTS = {"hole": 0, "var": 0, "num": 0, "bool": 0, "nil": 0,
                 "lam": 1, "asc": 1, "fst": 1, "snd": 1,
                 "ap": 2, "pair": 2, "cons": 2, "case": 3}


class NotDirty(ValueError):
    pass


class StepBudgetExceeded(RuntimeError):
    pass


class ResultMismatch(RuntimeError):
    pass


class Node:
    __slots__ = (
        "kind", "parent", "child_ix", "children",
        "name", "binder", "binder2", "value",
        "surface", "surface_dirty",
        "mark1", "mark2", "var_mark", "wmark",
        "ana", "ana_dirty", "syn", "syn_dirty",
        "pre", "post", "brackets",
        "owner", "splay_node", "rec1", "rec2",
        "deleted",
    )

    def __init__(self, kind: str):
        self.kind = kind
        self.parent: Optional[Node] = None
        self.child_ix = 0
        self.children: list[Node] = []
        self.name: Optional[str] = None       # var
        self.binder: S.Binding = None         # lam binder / case head binder
        self.binder2: S.Binding = None        # case tail binder
        self.value = None                     # num / bool literal
        self.surface: Optional[S.Type] = None  # lam annotation / ascribed type
        self.surface_dirty = False
        self.mark1: Mark = OK
        self.mark2: Mark = OK
        self.var_mark: Mark = OK
        self.wmark: Mark = OK                 # wrapper consistency mark
        self.ana: TypeOpt = None
        self.ana_dirty = False
        self.syn: TypeOpt = None
        self.syn_dirty = False
        self.pre = None
        self.post = None
        self.brackets = None                  # case binder scope brackets
        self.owner: Optional[BinderRecord] = None  # var: binding site
        self.splay_node = None                # var: membership in owner's set
        self.rec1: Optional[BinderRecord] = None   # lam / case head
        self.rec2: Optional[BinderRecord] = None   # case tail
        self.deleted = False

    # scope interval, used by the binder index
    @property
    def lo(self):
        return self.pre

    @property
    def hi(self):
        return self.post

    def __repr__(self):
        return f"<node {self.kind}{' deleted' if self.deleted else ''}>"


@dataclass(frozen=True)
class StepReport:
    rule: str
    node: Node
    slot: str


@dataclass(frozen=True)
class RunStats:
    steps_taken: int
    skipped_tombstones: int


class Doc:
    """One live document. All operations require exclusive access."""

    def __init__(self, program: S.BareExpr, instrument: bool = False):
        self.order = OmOrder()
        self.index = NameIndex()
        self.heap: list = []
        self.dirty_set: set = set()
        self.seq = 0
        self.node_count = 0
        self.revision = 0
        self.visits = 0
        self.instrument = instrument
        self.measure_violations = 0
        self.steps_total = 0
        self._skipped = 0
        self._last_elem = None
        self._stepping = False
        self._step_floor = None
        marked = mark_program(program)
        self.root = self._build(marked, None, 0)
        self._index_binders(self.root)
        self._bind_vars(self.root)

    # ------------------------------------------------------------------
    # construction

    def _next_elem(self):
        if self._last_elem is None:
            self._last_elem = self.order.insert_first()
        else:
            self._last_elem = self.order.insert_after(self._last_elem)
        return self._last_elem

    def _build(self, dec: S.DecExpr, parent, child_ix) -> Node:
        con = dec.con
        if isinstance(con, S.DHole):
            n = Node("hole")
        elif isinstance(con, S.DVar):
            n = Node("var")
            n.name = con.name
            n.var_mark = con.mark
        elif isinstance(con, S.DLam):
            n = Node("lam")
            n.binder = con.binder
            n.surface = con.ann
            n.mark1, n.mark2 = con.arrow_mark, con.dom_mark
        elif isinstance(con, S.DAp):
            n = Node("ap")
            n.mark1 = con.mark
        elif isinstance(con, S.DAsc):
            n = Node("asc")
            n.surface = con.ty
        elif isinstance(con, S.DNum):
            n = Node("num")
            n.value = con.value
        elif isinstance(con, S.DBool):
            n = Node("bool")
            n.value = con.value
        elif isinstance(con, S.DPair):
            n = Node("pair")
            n.mark1 = con.mark
        elif isinstance(con, S.DFst):
            n = Node("fst")
            n.mark1 = con.mark
        elif isinstance(con, S.DSnd):
            n = Node("snd")
            n.mark1 = con.mark
        elif isinstance(con, S.DNil):
            n = Node("nil")
        elif isinstance(con, S.DCons):
            n = Node("cons")
            n.mark1 = con.mark
        elif isinstance(con, S.DCase):
            n = Node("case")
            n.mark1 = con.mark
            n.binder = con.hd_binder
            n.binder2 = con.tl_binder
        else:
            raise TypeError(f"unknown decorated node {con!r}")
        n.parent = parent
        n.child_ix = child_ix
        n.ana, n.wmark, n.syn = dec.ana, dec.mark, dec.syn
        n.pre = self._next_elem()
        kids = S.dec_children(con)
        if n.kind == "case":
            n.children.append(self._build(kids[0], n, 1))
            n.children.append(self._build(kids[1], n, 2))
            hd_lo = self._next_elem()
            tl_lo = self._next_elem()
            n.children.append(self._build(kids[2], n, 3))
            tl_hi = self._next_elem()
            hd_hi = self._next_elem()
            n.brackets = (hd_lo, tl_lo, tl_hi, hd_hi)
        else:
            for i, kid in enumerate(kids, 1):
                n.children.append(self._build(kid, n, i))
        n.post = self._next_elem()
        self.node_count += 1
        return n

    def _make_case_record(self, n: Node, which: str) -> BinderRecord:
        hd_lo, tl_lo, tl_hi, hd_hi = n.brackets
        if which == "hd":
            return BinderRecord("hd", n, n.binder, hd_lo, hd_hi)
        return BinderRecord("tl", n, n.binder2, tl_lo, tl_hi)

    def _index_binders(self, n: Node) -> None:
        stack = [n]
        while stack:
            cur = stack.pop()
            if cur.kind == "lam" and cur.binder is not None:
                cur.rec1 = BinderRecord("lam", cur, cur.binder, cur.pre, cur.post)
                self.index.binder_set(cur.binder).insert(cur.rec1)
            elif cur.kind == "case":
                if cur.binder is not None:
                    cur.rec1 = self._make_case_record(cur, "hd")
                    self.index.binder_set(cur.binder).insert(cur.rec1)
                if cur.binder2 is not None:
                    cur.rec2 = self._make_case_record(cur, "tl")
                    self.index.binder_set(cur.binder2).insert(cur.rec2)
            stack.extend(cur.children)

    def _bind_vars(self, n: Node) -> None:
        stack = [n]
        while stack:
            cur = stack.pop()
            if cur.kind == "var":
                self.index.bind_variable(cur)
            stack.extend(cur.children)

    # ------------------------------------------------------------------
    # dirty bookkeeping

    def _flag(self, n: Node, slot: str) -> bool:
        if slot == ANA:
            return n.ana_dirty
        if slot == SYN:
            return n.syn_dirty
        return n.surface_dirty

    def _set_flag(self, n: Node, slot: str, value: bool) -> None:
        if slot == ANA:
            n.ana_dirty = value
        elif slot == SYN:
            n.syn_dirty = value
        else:
            n.surface_dirty = value

    def _priority_elem(self, n: Node, slot: str):
        return n.post if slot == SYN else n.pre

    @staticmethod
    def _slots_of(n: Node) -> tuple[str, ...]:
        if n.kind == "lam":
            return (ANA, SYN, ANN)
        if n.kind == "asc":
            return (ANA, SYN, ASC)
        return (ANA, SYN)

    def dirty(self, n: Node, slot: str) -> None:
        """Put a location on the update frontier (no-op if already there)."""
        if self._flag(n, slot):
            return
        self._set_flag(n, slot, True)
        tag, local = self._priority_elem(n, slot).sort_key()
        self.seq += 1
        key = (tag, local, _SLOT_RANK[slot], self.seq)
        heapq.heappush(self.heap, (key, n, slot))
        self.dirty_set.add((n, slot))
        if self.instrument and self._stepping and self._step_floor is not None:
            if key[:3] <= self._step_floor:
                self.measure_violations += 1

    def _set_step(self, n: Node, slot: str, value) -> None:
        """Store a recomputed type during an update step, dirtying only on change."""
        if slot == ANA:
            if value == n.ana:
                return
            n.ana = value
        elif slot == SYN:
            if value == n.syn:
                return
            n.syn = value
        else:
            raise ValueError(slot)
        self.dirty(n, slot)

    def _set_action(self, n: Node, slot: str, value) -> None:
        """Store a type during an action; action-induced locations are always
        dirtied even when the value is unchanged."""
        if slot == ANA:
            n.ana = value
        elif slot == SYN:
            n.syn = value
        self.dirty(n, slot)

    # ------------------------------------------------------------------
    # paths and snapshots

    def resolve(self, path) -> Node:
        n = self.root
        for ix in path:
            if not 1 <= ix <= len(n.children):
                raise A.PathInvalid(f"no child {ix} under {n.kind}")
            n = n.children[ix - 1]
        return n

    @staticmethod
    def path_of(n: Node) -> tuple[int, ...]:
        parts = []
        while n.parent is not None:
            parts.append(n.child_ix)
            n = n.parent
        return tuple(reversed(parts))

    def snapshot(self, n: Optional[Node] = None) -> S.DecExpr:
        n = n if n is not None else self.root
        k = n.kind
        if k == "hole":
            con: S.DecCon = S.DHole()
        elif k == "var":
            con = S.DVar(n.name, n.var_mark)
        elif k == "lam":
            con = S.DLam(n.binder, n.surface, n.surface_dirty, n.mark1, n.mark2,
                         self.snapshot(n.children[0]))
        elif k == "ap":
            con = S.DAp(n.mark1, self.snapshot(n.children[0]), self.snapshot(n.children[1]))
        elif k == "asc":
            con = S.DAsc(self.snapshot(n.children[0]), n.surface, n.surface_dirty)
        elif k == "num":
            con = S.DNum(n.value)
        elif k == "bool":
            con = S.DBool(n.value)
        elif k == "pair":
            con = S.DPair(n.mark1, self.snapshot(n.children[0]), self.snapshot(n.children[1]))
        elif k == "fst":
            con = S.DFst(n.mark1, self.snapshot(n.children[0]))
        elif k == "snd":
            con = S.DSnd(n.mark1, self.snapshot(n.children[0]))
        elif k == "nil":
            con = S.DNil()
        elif k == "cons":
            con = S.DCons(n.mark1, self.snapshot(n.children[0]), self.snapshot(n.children[1]))
        elif k == "case":
            con = S.DCase(n.mark1, self.snapshot(n.children[0]), self.snapshot(n.children[1]),
                          n.binder, n.binder2, self.snapshot(n.children[2]))
        else:
            raise TypeError(f"unknown node kind {k!r}")
        return S.DecExpr(n.ana, n.ana_dirty, n.wmark, con, n.syn, n.syn_dirty)

    def dirty_locations(self) -> list[tuple[Node, str]]:
        locs = list(self.dirty_set)
        locs.sort(key=lambda loc: (self._priority_elem(*loc).sort_key(),
                                   _SLOT_RANK[loc[1]]))
        return locs

    # ------------------------------------------------------------------
    # binding helpers

    def _owner_info(self, rec: BinderRecord) -> tuple[Mark, TypeOpt]:
        """The mark and synthesized type an occurrence owned by rec carries."""
        if rec.kind == "free":
            return ERR, UNKNOWN
        if rec.kind == "lam":
            return OK, rec.node.surface
        elem = sc.matched_list(rec.node.children[0].syn)[1]
        if rec.kind == "hd":
            return OK, elem
        return OK, sc.listof_opt(elem)

    def variable_update(self, occurrences, m: Mark, ty: TypeOpt,
                        from_action: bool = True) -> None:
        """Set the free-variable mark and synthesized type of the given
        occurrences, dirtying each one's synthesized slot."""
        for v in occurrences:
            self.visits += 1
            v.var_mark = m
            if from_action:
                v.syn = ty
                self.dirty(v, SYN)
            else:
                self._set_step(v, SYN, ty)

    def _register(self, rec: BinderRecord) -> None:
        captured = self.index.register_binder(rec)
        m, ty = self._owner_info(rec)
        self.variable_update(captured, m, ty, from_action=True)

    def _unregister(self, rec: BinderRecord) -> None:
        released, outer = self.index.unregister_binder(rec)
        m, ty = self._owner_info(outer)
        self.variable_update(released, m, ty, from_action=True)

    # ------------------------------------------------------------------
    # structural helpers

    def _fresh_leaf(self, kind: str, pre, post) -> Node:
        n = Node(kind)
        n.pre, n.post = pre, post
        self.node_count += 1
        self.visits += 1
        return n

    def _splice_over(self, old: Node, new: Node) -> None:
        """Install `new` at old's position in the tree."""
        new.parent = old.parent
        new.child_ix = old.child_ix
        if old.parent is None:
            self.root = new
        else:
            old.parent.children[old.child_ix - 1] = new

    def _take_wrapper(self, src: Node, dst: Node) -> None:
        """Move the analytic wrapper (analyzed type + consistency mark) from
        src to dst, re-dirtying the analyzed slot at its new home: the edit
        happened under this wrapper, so its ramifications must be recomputed."""
        dst.ana = src.ana
        dst.wmark = src.wmark
        if src is not dst and src.ana_dirty:
            # the pending frontier entry stays queued at src; hand the flag over
            self.dirty_set.discard((src, ANA))
            src.ana_dirty = False
        self._set_action(dst, ANA, dst.ana)

    def _tombstone(self, top: Node) -> None:
        """Discard a subtree: unbind its variables, drop its binder records,
        free its order elements, and leave deleted markers so stale queue
        entries can be skipped."""
        nodes = []
        stack = [top]
        while stack:
            cur = stack.pop()
            nodes.append(cur)
            stack.extend(cur.children)
        for cur in nodes:
            if cur.kind == "var" and cur.owner is not None:
                self.index.unbind_variable(cur)
        for cur in nodes:
            for rec in (cur.rec1, cur.rec2):
                if rec is not None:
                    self.index.drop_binder(rec)
            cur.rec1 = cur.rec2 = None
        for cur in nodes:
            self.visits += 1
            for slot in self._slots_of(cur):
                if self._flag(cur, slot):
                    self._set_flag(cur, slot, False)
                    self.dirty_set.discard((cur, slot))
            self.order.delete(cur.pre)
            self.order.delete(cur.post)
            if cur.brackets is not None:
                for e in cur.brackets:
                    self.order.delete(e)
                cur.brackets = None
            cur.deleted = True
            self.node_count -= 1

    # ------------------------------------------------------------------
    # actions

    def apply_action(self, la: A.LocalizedAction) -> Node:
        """Perform a localized edit. The document is unchanged on error.
        Returns the node now occupying the edited position."""
        n = self.resolve(la.path)
        return self.apply_simple(n, la.action)

    def apply_simple(self, n: Node, a: A.Action) -> Node:
        self._check_applicable(n, a)
        self.revision += 1
        self.visits += 1
        result = n
        if isinstance(a, A.InsertVar):
            n.kind = "var"
            n.name = a.name
            owner = self.index.bind_variable(n)
            m, ty = self._owner_info(owner)
            n.var_mark = m
            self._set_action(n, SYN, ty)
            self._set_action(n, ANA, n.ana)
        elif isinstance(a, A.InsertNumLit):
            n.kind = "num"
            n.value = a.value
            self._set_action(n, SYN, S.NUM)
            self._set_action(n, ANA, n.ana)
        elif isinstance(a, A.InsertBoolLit):
            n.kind = "bool"
            n.value = a.value
            self._set_action(n, SYN, S.BOOL)
            self._set_action(n, ANA, n.ana)
        elif isinstance(a, A.InsertNil):
            n.kind = "nil"
            self._set_action(n, SYN, S.ListOf(UNKNOWN))
            self._set_action(n, ANA, n.ana)
        elif isinstance(a, A.WrapFun):
            w = result = self._wrap_one(n, "lam")
            w.surface = UNKNOWN
            self._set_action(n, ANA, None)
            self._set_action(w, SYN, None)
        elif isinstance(a, A.WrapAp):
            w = result = self._wrap_two(n, "ap", a.child)
            if a.child == 1:
                self._set_action(n, ANA, None)
                self._set_action(n, SYN, n.syn)  # feeds the matched-arrow step
                self._set_action(w, SYN, None)
            else:
                self._set_action(n, ANA, UNKNOWN)
                self._set_action(w, SYN, UNKNOWN)
        elif isinstance(a, A.WrapAsc):
            w = result = self._wrap_one(n, "asc")
            w.surface = UNKNOWN
            self._set_action(n, ANA, UNKNOWN)
            self._set_action(w, SYN, UNKNOWN)
        elif isinstance(a, A.WrapPair):
            w = result = self._wrap_two(n, "pair", a.child)
            self._set_action(n, ANA, None)
            self._set_action(w, SYN, None)
        elif isinstance(a, (A.WrapFst, A.WrapSnd)):
            w = result = self._wrap_one(n, "fst" if isinstance(a, A.WrapFst) else "snd")
            self._set_action(n, ANA, None)
            self._set_action(n, SYN, n.syn)  # feeds the matched-product step
            self._set_action(w, SYN, None)
        elif isinstance(a, A.WrapCons):
            w = result = self._wrap_two(n, "cons", a.child)
            self._set_action(n, ANA, None)
            self._set_action(w, SYN, None)
            if a.child == 1:
                self._set_action(n, SYN, n.syn)  # head type feeds the tail's expectation
        elif isinstance(a, A.WrapCase):
            w = result = self._wrap_case(n, a.child)
            self._set_action(n, ANA, None)
            self._set_action(w, SYN, None)
            scrut = w.children[0]
            self._set_action(scrut, SYN, scrut.syn)  # scrutinee feeds the case mark
        elif isinstance(a, A.Delete):
            hole = result = self._fresh_leaf("hole",
                                             self.order.insert_before(n.pre),
                                             self.order.insert_after(n.post))
            self._take_wrapper(n, hole)
            self._set_action(hole, SYN, UNKNOWN)
            self._splice_over(n, hole)
            self._tombstone(n)
        elif isinstance(a, A.Unwrap):
            result = self._unwrap(n, a.child)
        elif isinstance(a, A.SetAnn):
            n.surface = a.ty
            self.dirty(n, ANN)
            self._set_action(n, ANA, n.ana)
        elif isinstance(a, A.SetAsc):
            n.surface = a.ty
            self.dirty(n, ASC)
            self._set_action(n, ANA, n.ana)
        elif isinstance(a, A.InsertBinder):
            n.binder = a.binding
            n.rec1 = BinderRecord("lam", n, a.binding, n.pre, n.post)
            self._register(n.rec1)
            self._set_action(n, ANA, n.ana)
        elif isinstance(a, A.DeleteBinder):
            self._unregister(n.rec1)
            n.rec1 = None
            n.binder = None
            self._set_action(n, ANA, n.ana)
        elif isinstance(a, A.InsertCaseBinder):
            if a.which == "hd":
                n.binder = a.binding
                n.rec1 = self._make_case_record(n, "hd")
                self._register(n.rec1)
            else:
                n.binder2 = a.binding
                n.rec2 = self._make_case_record(n, "tl")
                self._register(n.rec2)
            self._set_action(n, ANA, n.ana)
        elif isinstance(a, A.DeleteCaseBinder):
            if a.which == "hd":
                self._unregister(n.rec1)
                n.rec1 = None
                n.binder = None
            else:
                self._unregister(n.rec2)
                n.rec2 = None
                n.binder2 = None
            self._set_action(n, ANA, n.ana)
        else:
            raise TypeError(f"unknown action {a!r}")
        return result

    def _check_applicable(self, n: Node, a: A.Action) -> None:
        k = n.kind
        if isinstance(a, (A.InsertVar, A.InsertNumLit, A.InsertBoolLit, A.InsertNil)):
            if k != "hole":
                raise A.ActionInapplicable(f"insertion requires a hole, found {k}")
        elif isinstance(a, A.Unwrap):
            if not 1 <= a.child <= _CHILD_COUNTS[k]:
                raise A.ActionInapplicable(f"cannot unwrap child {a.child} of {k}")
        elif isinstance(a, A.SetAnn):
            if k != "lam":
                raise A.ActionInapplicable("set-ann requires an abstraction")
        elif isinstance(a, A.SetAsc):
            if k != "asc":
                raise A.ActionInapplicable("set-asc requires an ascription")
        elif isinstance(a, A.InsertBinder):
            if k != "lam" or n.binder is not None:
                raise A.ActionInapplicable("insert-binder requires an abstraction with a binder hole")
        elif isinstance(a, A.DeleteBinder):
            if k != "lam" or n.binder is None:
                raise A.ActionInapplicable("delete-binder requires a named binder")
        elif isinstance(a, A.InsertCaseBinder):
            if k != "case" or a.which not in ("hd", "tl"):
                raise A.ActionInapplicable("insert-case-binder requires a case")
            if (n.binder if a.which == "hd" else n.binder2) is not None:
                raise A.ActionInapplicable(f"{a.which} binder already present")
        elif isinstance(a, A.DeleteCaseBinder):
            if k != "case" or a.which not in ("hd", "tl"):
                raise A.ActionInapplicable("delete-case-binder requires a case")
            if (n.binder if a.which == "hd" else n.binder2) is None:
                raise A.ActionInapplicable(f"no {a.which} binder to delete")
        elif isinstance(a, (A.WrapAp, A.WrapPair, A.WrapCons)):
            if a.child not in (1, 2):
                raise A.ActionInapplicable(f"bad child {a.child}")
        elif isinstance(a, A.WrapCase):
            if a.child not in (1, 2, 3):
                raise A.ActionInapplicable(f"bad child {a.child}")

    def _wrap_one(self, n: Node, kind: str) -> Node:
        """Wrap n as the only child of a new node (lam/asc/fst/snd)."""
        w = Node(kind)
        self.node_count += 1
        self.visits += 1
        w.pre = self.order.insert_before(n.pre)
        w.post = self.order.insert_after(n.post)
        self._take_wrapper(n, w)
        n.ana = None
        n.wmark = OK
        self._splice_over(n, w)
        w.children = [n]
        n.parent = w
        n.child_ix = 1
        return w

    def _wrap_two(self, n: Node, kind: str, child: int) -> Node:
        """Wrap n as child `child` of a new two-child node, a hole filling the
        other position."""
        w = Node(kind)
        self.node_count += 1
        self.visits += 1
        w.pre = self.order.insert_before(n.pre)
        w.post = self.order.insert_after(n.post)
        if child == 1:
            hp = self.order.insert_after(n.post)
            hq = self.order.insert_after(hp)
            hole = self._fresh_leaf("hole", hp, hq)
        else:
            hq = self.order.insert_before(n.pre)
            hp = self.order.insert_before(hq)
            hole = self._fresh_leaf("hole", hp, hq)
        hole.syn = UNKNOWN
        self._take_wrapper(n, w)
        n.ana = None
        n.wmark = OK
        self._splice_over(n, w)
        kids = [n, hole] if child == 1 else [hole, n]
        w.children = kids
        for i, kid in enumerate(kids, 1):
            kid.parent = w
            kid.child_ix = i
        return w

    def _wrap_case(self, n: Node, child: int) -> Node:
        w = Node("case")
        self.node_count += 1
        self.visits += 1
        w.pre = self.order.insert_before(n.pre)
        w.post = self.order.insert_after(n.post)
        self._take_wrapper(n, w)
        n.ana = None
        n.wmark = OK
        self._splice_over(n, w)
        n.parent = w

        def fresh_before(anchor):
            q = self.order.insert_before(anchor)
            p = self.order.insert_before(q)
            h = self._fresh_leaf("hole", p, q)
            h.syn = UNKNOWN
            h.parent = w
            return h

        def fresh_after(anchor):
            p = self.order.insert_after(anchor)
            q = self.order.insert_after(p)
            h = self._fresh_leaf("hole", p, q)
            h.syn = UNKNOWN
            h.parent = w
            return h

        if child == 1:
            cons = fresh_after(n.post)
            nil = fresh_after(n.post)
            kids = [n, nil, cons]
        elif child == 2:
            scrut = fresh_before(n.pre)
            cons = fresh_after(n.post)
            kids = [scrut, n, cons]
        else:
            nil = fresh_before(n.pre)
            scrut = fresh_before(nil.pre)
            kids = [scrut, nil, n]
        w.children = kids
        for i, kid in enumerate(kids, 1):
            kid.parent = w
            kid.child_ix = i
        cons_body = kids[2]
        hd_lo = self.order.insert_before(cons_body.pre)
        tl_lo = self.order.insert_after(hd_lo)
        tl_hi = self.order.insert_after(cons_body.post)
        hd_hi = self.order.insert_after(tl_hi)
        w.brackets = (hd_lo, tl_lo, tl_hi, hd_hi)
        return w

    def _unwrap(self, n: Node, child: int) -> Node:
        kept = n.children[child - 1]
        for i, kid in enumerate(n.children, 1):
            if i != child:
                self._tombstone(kid)
        if n.kind == "lam" and n.rec1 is not None:
            self._unregister(n.rec1)
            n.rec1 = None
        if n.kind == "case":
            for rec_attr in ("rec1", "rec2"):
                rec = getattr(n, rec_attr)
                if rec is not None:
                    self._unregister(rec)
                    setattr(n, rec_attr, None)
        self._take_wrapper(n, kept)
        self._set_action(kept, SYN, kept.syn)
        self._splice_over(n, kept)
        # discard the unwrapped node itself
        n.children = []
        for slot in self._slots_of(n):
            if self._flag(n, slot):
                self._set_flag(n, slot, False)
                self.dirty_set.discard((n, slot))
        self.order.delete(n.pre)
        self.order.delete(n.post)
        if n.brackets is not None:
            for e in n.brackets:
                self.order.delete(e)
            n.brackets = None
        n.deleted = True
        self.node_count -= 1
        return kept

    # ------------------------------------------------------------------
    # update propagation

    def step(self) -> Optional[StepReport]:
        """Pop the highest-priority dirty location and propagate it.
        Returns None when the document is quiescent."""
        popped = self._pop()
        if popped is None:
            return None
        _, n, slot = popped
        return self._do_step(n, slot)

    def step_at(self, n: Node, slot: str) -> StepReport:
        """Propagate a caller-chosen dirty location."""
        if n.deleted or not self._flag(n, slot):
            raise NotDirty(f"{slot} slot is not on the frontier")
        return self._do_step(n, slot)

    def run_to_quiescence(self) -> RunStats:
        budget = 64 * max(self.node_count, 1) + 64
        steps = 0
        skipped0 = self._skipped
        while True:
            if self.step() is None:
                break
            steps += 1
            if steps > budget:
                raise StepBudgetExceeded(f"no quiescence after {steps} steps")
        return RunStats(steps, self._skipped - skipped0)

    def is_quiescent(self) -> bool:
        return not self.dirty_set

    def _pop(self):
        while self.heap:
            key, n, slot = heapq.heappop(self.heap)
            if n.deleted:
                self._skipped += 1
                continue
            if not self._flag(n, slot):
                continue  # consumed by step_at
            return key, n, slot
        return None

    def _do_step(self, n: Node, slot: str) -> StepReport:
        self._set_flag(n, slot, False)
        self.dirty_set.discard((n, slot))
        self.revision += 1
        self.steps_total += 1
        self.visits += 1
        self._stepping = True
        # surface-type steps consume a surface dirty bit: the termination
        # measure allows them to push non-descending locations
        if slot in (ANA, SYN) and self.instrument:
            tag, local = self._priority_elem(n, slot).sort_key()
            self._step_floor = (tag, local, _SLOT_RANK[slot])
        else:
            self._step_floor = None
        try:
            rule = self._dispatch(n, slot)
        finally:
            self._stepping = False
            self._step_floor = None
        return StepReport(rule, n, slot)

    def _dispatch(self, n: Node, slot: str) -> str:
        if slot == ANN:
            occs = n.rec1.bound.entries() if n.rec1 is not None else []
            self.variable_update(occs, OK, n.surface, from_action=False)
            self.dirty(n, ANA)
            return "step-ann-fun"
        if slot == ASC:
            body = n.children[0]
            self._set_step(body, ANA, n.surface)
            self._set_step(n, SYN, n.surface)
            return "step-asc"
        if slot == ANA:
            return self._step_ana(n)
        return self._step_syn(n)

    def _step_ana(self, n: Node) -> str:
        k = n.kind
        if k == "lam":
            body = n.children[0]
            m1, dom, cod = sc.matched_arrow(n.ana)
            n.mark1 = m1
            n.mark2 = sc.consistency(dom, n.surface)
            self._set_step(body, ANA, cod)
            self._set_step(n, SYN, sc.fun_syn(n.ana, n.surface, body.syn))
            n.wmark = sc.consistency(n.ana, n.syn)
            return "step-ana-fun"
        if k == "pair":
            left, right = n.children
            m, lt, rt = sc.matched_prod(n.ana)
            n.mark1 = m
            self._set_step(left, ANA, lt)
            self._set_step(right, ANA, rt)
            self._set_step(n, SYN, sc.pair_syn(n.ana, left.syn, right.syn))
            n.wmark = sc.consistency(n.ana, n.syn)
            return "step-ana-pair"
        if k == "cons":
            head, tail = n.children
            m, _ = sc.matched_list(n.ana)
            n.mark1 = m
            head_ana, tail_ana = sc.cons_child_ana(n.ana, head.syn)
            self._set_step(head, ANA, head_ana)
            self._set_step(tail, ANA, tail_ana)
            self._set_step(n, SYN, sc.cons_syn(n.ana, head.syn))
            n.wmark = sc.consistency(n.ana, n.syn)
            return "step-ana-cons"
        if k == "case":
            _, nil_body, cons_body = n.children
            self._set_step(nil_body, ANA, n.ana)
            self._set_step(cons_body, ANA, sc.case_cons_ana(n.ana, nil_body.syn))
            self._set_step(n, SYN, sc.case_syn(n.ana, nil_body.syn))
            n.wmark = sc.consistency(n.ana, n.syn)
            return "step-ana-case"
        # subsumable forms: recompute the wrapper consistency mark only
        n.wmark = sc.consistency(n.ana, n.syn)
        return "step-ana"

    def _step_syn(self, n: Node) -> str:
        p = n.parent
        if p is None:
            return "top-step"
        if n.ana is not None:
            n.wmark = sc.consistency(n.ana, n.syn)
            return "step-syn"
        k, ix = p.kind, n.child_ix
        if k == "ap" and ix == 1:
            m, dom, cod = sc.matched_arrow(n.syn)
            p.mark1 = m
            self._set_step(p.children[1], ANA, dom)
            self._set_step(p, SYN, cod)
            return "step-ap"
        if k == "lam" and ix == 1:
            n.wmark = sc.consistency(n.ana, n.syn)
            self._set_step(p, SYN, sc.fun_syn(p.ana, p.surface, n.syn))
            return "step-syn-fun"
        if k == "pair":
            left, right = p.children
            self._set_step(p, SYN, sc.pair_syn(p.ana, left.syn, right.syn))
            return "step-syn-pair"
        if k in ("fst", "snd") and ix == 1:
            m, lt, rt = sc.matched_prod(n.syn)
            p.mark1 = m
            self._set_step(p, SYN, lt if k == "fst" else rt)
            return "step-proj"
        if k == "cons" and ix == 1:
            _, tail_ana = sc.cons_child_ana(p.ana, n.syn)
            self._set_step(p.children[1], ANA, tail_ana)
            self._set_step(p, SYN, sc.cons_syn(p.ana, n.syn))
            return "step-cons-head"
        if k == "case" and ix == 1:
            m, elem = sc.matched_list(n.syn)
            p.mark1 = m
            if p.rec1 is not None:
                self.variable_update(p.rec1.bound.entries(), OK, elem, from_action=False)
            if p.rec2 is not None:
                self.variable_update(p.rec2.bound.entries(), OK, sc.listof_opt(elem),
                                     from_action=False)
            return "step-case-scrut"
        if k == "case" and ix == 2:
            self._set_step(p.children[2], ANA, sc.case_cons_ana(p.ana, n.syn))
            self._set_step(p, SYN, sc.case_syn(p.ana, n.syn))
            return "step-case-nil"
        # positions whose synthesized type feeds nothing: ap/cons second child,
        # case cons branch, asc body (its analyzed slot is always present)
        return "step-noflow"

    # ------------------------------------------------------------------
    # invariants (test support)

    def check_coherence(self) -> None:
        """Dirty flags and the queue must describe the same frontier."""
        flagged = set()
        stack = [self.root]
        while stack:
            cur = stack.pop()
            for slot in self._slots_of(cur):
                if self._flag(cur, slot):
                    flagged.add((cur, slot))
            stack.extend(cur.children)
        assert flagged == self.dirty_set, "dirty flags out of sync with the frontier set"
        queued = {(n, slot) for _, n, slot in self.heap if not n.deleted and self._flag(n, slot)}
        assert flagged == queued, "frontier set out of sync with the queue"

    def check_timestamps(self) -> None:
        """Pre/post nesting and sibling disjointness on a full traversal."""
        def key(e):
            return e.sort_key()

        def walk(n):
            assert key(n.pre) < key(n.post)
            prev_post = n.pre
            for kid in n.children:
                assert key(prev_post) < key(kid.pre), "sibling overlap"
                assert key(n.pre) < key(kid.pre) and key(kid.post) < key(n.post), "nesting"
                walk(kid)
                prev_post = kid.post
        walk(self.root)


def load_program(e: S.BareExpr, instrument: bool = False) -> Doc:
    """Build a quiescent document for a program, checked from scratch."""
    return Doc(e, instrument=instrument)
