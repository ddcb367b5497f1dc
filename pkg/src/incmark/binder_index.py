"""Timestamped scope indexing.

Every tree node carries a (pre, post) pair of order elements forming a nesting
interval, so ancestry is interval containment. Binders keep their bound
variables in splay sets ordered by pre timestamp and augmented with the
subtree-maximum post timestamp; a global map from names to splay sets of
binder records answers "innermost binder containing this position" in
amortized logarithmic time. Inserting or deleting a binder splits or merges
the enclosing owner's variable set in three pieces instead of walking the
tree.

Entries are arbitrary objects exposing ``lo``/``hi`` (order elements) and a
writable ``splay_node`` back-link; keys are read from the entry at comparison
time, so relabeling inside the order structure never touches these trees.
"""

from __future__ import annotations

from typing import Optional

from .order_maintenance import OmElement


class IndexInconsistent(RuntimeError):
    pass


class JoinOrderViolation(RuntimeError):
    pass


def _key(e: OmElement) -> tuple[int, int]:
    return (e.bucket.tag, e.local)


def _lt(a: OmElement, b: OmElement) -> bool:
    return _key(a) < _key(b)


def interval_contains(a, b) -> bool:
    """Does a's interval strictly contain b's? Both arguments expose lo/hi."""
    return _lt(a.lo, b.lo) and _lt(b.hi, a.hi)


class _SplayNode:
    __slots__ = ("entry", "left", "right", "parent", "max_hi")

    def __init__(self, entry):
        self.entry = entry
        self.left: Optional[_SplayNode] = None
        self.right: Optional[_SplayNode] = None
        self.parent: Optional[_SplayNode] = None
        self.max_hi: OmElement = entry.hi


def _update(n: _SplayNode) -> None:
    m = n.entry.hi
    if n.left is not None and _lt(m, n.left.max_hi):
        m = n.left.max_hi
    if n.right is not None and _lt(m, n.right.max_hi):
        m = n.right.max_hi
    n.max_hi = m


class SplaySet:
    """Splay tree of interval entries keyed by lo, augmented with max hi."""

    __slots__ = ("root",)

    def __init__(self, root: Optional[_SplayNode] = None):
        self.root = root

    def __bool__(self):
        return self.root is not None

    def __len__(self):
        return sum(1 for _ in self.entries())

    # -- rotations ---------------------------------------------------------

    def _rotate(self, x: _SplayNode) -> None:
        p = x.parent
        g = p.parent
        if p.left is x:
            p.left = x.right
            if x.right is not None:
                x.right.parent = p
            x.right = p
        else:
            p.right = x.left
            if x.left is not None:
                x.left.parent = p
            x.left = p
        p.parent = x
        x.parent = g
        if g is not None:
            if g.left is p:
                g.left = x
            else:
                g.right = x
        else:
            self.root = x
        _update(p)
        _update(x)

    def _splay(self, x: _SplayNode) -> None:
        while x.parent is not None:
            p = x.parent
            g = p.parent
            if g is None:
                self._rotate(x)
            elif (g.left is p) == (p.left is x):
                self._rotate(p)
                self._rotate(x)
            else:
                self._rotate(x)
                self._rotate(x)

    # -- basic operations ----------------------------------------------------

    def insert(self, entry) -> None:
        node = _SplayNode(entry)
        entry.splay_node = node
        if self.root is None:
            self.root = node
            return
        t = self.root
        while True:
            if _lt(entry.lo, t.entry.lo):
                if t.left is None:
                    t.left = node
                    break
                t = t.left
            else:
                if t.right is None:
                    t.right = node
                    break
                t = t.right
        node.parent = t
        walk = t
        while walk is not None:
            _update(walk)
            walk = walk.parent
        self._splay(node)

    def remove(self, entry) -> None:
        node = entry.splay_node
        if node is None:
            raise IndexInconsistent("entry is not in a set")
        self._splay(node)
        entry.splay_node = None
        left, right = node.left, node.right
        if left is not None:
            left.parent = None
        if right is not None:
            right.parent = None
        node.left = node.right = None
        self.root = self._join_trees(left, right)

    def _join_trees(self, left, right):
        if left is None:
            return right
        if right is None:
            return left
        m = left
        while m.right is not None:
            m = m.right
        # splay within the detached left tree
        saved, self.root = self.root, left
        self._splay(m)
        self.root = saved
        m.right = right
        right.parent = m
        _update(m)
        return m

    def entries(self) -> list:
        out = []
        stack = []
        t = self.root
        while stack or t is not None:
            while t is not None:
                stack.append(t)
                t = t.left
            t = stack.pop()
            out.append(t.entry)
            t = t.right
        return out

    # -- split / join ---------------------------------------------------------

    def split(self, key: OmElement) -> tuple["SplaySet", "SplaySet"]:
        """Partition into (entries with lo < key, entries with lo >= key).

        Consumes self; use the returned sets.
        """
        if self.root is None:
            return SplaySet(), SplaySet()
        # find the leftmost entry with lo >= key
        t = self.root
        pivot = None
        while t is not None:
            if _lt(t.entry.lo, key):
                t = t.right
            else:
                pivot = t
                t = t.left
        if pivot is None:
            root, self.root = self.root, None
            return SplaySet(root), SplaySet()
        self._splay(pivot)
        left = pivot.left
        if left is not None:
            left.parent = None
            pivot.left = None
            _update(pivot)
        self.root = None
        return SplaySet(left), SplaySet(pivot)

    def join(self, other: "SplaySet") -> "SplaySet":
        """Concatenate: every key in self must precede every key in other.

        Consumes both; use the returned set.
        """
        if self.root is not None and other.root is not None:
            last = self.root
            while last.right is not None:
                last = last.right
            first = other.root
            while first.left is not None:
                first = first.left
            if not _lt(last.entry.lo, first.entry.lo):
                raise JoinOrderViolation("join arguments overlap")
        joined = SplaySet(self._join_trees(self.root, other.root))
        self.root = None
        other.root = None
        return joined

    # -- queries ---------------------------------------------------------------

    def find_containing(self, lo: OmElement, hi: OmElement):
        """The entry with the largest lo whose interval strictly contains
        (lo, hi), or None. The found entry is splayed to the root."""
        best = None
        stack = [(self.root, 0)]
        while stack:
            t, phase = stack.pop()
            if t is None or not _lt(hi, t.max_hi):
                continue
            if not _lt(t.entry.lo, lo):
                stack.append((t.left, 0))
                continue
            if phase == 0:
                stack.append((t, 1))
                stack.append((t.right, 0))
            else:
                if _lt(hi, t.entry.hi):
                    best = t
                    break
                stack.append((t.left, 0))
        if best is None:
            return None
        self._splay(best)
        return best.entry

    def check_augmentation(self) -> None:
        """Verify max_hi fields bottom-up (test helper)."""
        def go(t):
            if t is None:
                return None
            lm = go(t.left)
            rm = go(t.right)
            m = t.entry.hi
            for cand in (lm, rm):
                if cand is not None and _lt(m, cand):
                    m = cand
            assert _key(t.max_hi) == _key(m), "stale max_hi augmentation"
            if t.left is not None:
                assert t.left.parent is t
            if t.right is not None:
                assert t.right.parent is t
            return m
        go(self.root)


def splay_split(s: SplaySet, key: OmElement) -> tuple[SplaySet, SplaySet]:
    return s.split(key)


def splay_join(left: SplaySet, right: SplaySet) -> SplaySet:
    return left.join(right)


# ---------------------------------------------------------------------------
# Binder records and the name index

class BinderRecord:
    """One binding site: a lam binder, one of the two case binders, or the
    per-name free set at the program root."""

    __slots__ = ("kind", "node", "name", "lo", "hi", "bound", "splay_node")

    def __init__(self, kind: str, node, name: str, lo, hi):
        self.kind = kind  # "lam" | "hd" | "tl" | "free"
        self.node = node
        self.name = name
        self.lo = lo
        self.hi = hi
        self.bound = SplaySet()
        self.splay_node = None

    def __repr__(self):
        return f"<binder {self.kind} {self.name}>"


class NameIndex:
    def __init__(self):
        self.binders: dict[str, SplaySet] = {}
        self.free: dict[str, BinderRecord] = {}

    def binder_set(self, name: str) -> SplaySet:
        s = self.binders.get(name)
        if s is None:
            s = self.binders[name] = SplaySet()
        return s

    def free_record(self, name: str) -> BinderRecord:
        r = self.free.get(name)
        if r is None:
            r = self.free[name] = BinderRecord("free", None, name, None, None)
        return r

    def lowest_containing_binder(self, name: str, lo, hi) -> Optional[BinderRecord]:
        s = self.binders.get(name)
        if s is None:
            return None
        return s.find_containing(lo, hi)

    def owner_at(self, name: str, lo, hi) -> BinderRecord:
        """The binding site governing position (lo, hi): the innermost binder
        for the name containing it, else the root free set."""
        rec = self.lowest_containing_binder(name, lo, hi)
        return rec if rec is not None else self.free_record(name)

    # -- binder registration -------------------------------------------------

    def register_binder(self, rec: BinderRecord) -> list:
        """Add a binder: carve its scope out of the enclosing owner's variable
        set and return the captured variable nodes (now owned by rec)."""
        outer = self.owner_at(rec.name, rec.lo, rec.hi)
        before, rest = outer.bound.split(rec.lo)
        middle, after = rest.split(rec.hi)
        rec.bound = middle
        captured = middle.entries()
        for v in captured:
            v.owner = rec
        outer.bound = before.join(after)
        self.binder_set(rec.name).insert(rec)
        return captured

    def unregister_binder(self, rec: BinderRecord) -> tuple[list, BinderRecord]:
        """Remove a binder: merge its variable set back into the enclosing
        owner. Returns (released variable nodes, their new owner)."""
        self.binder_set(rec.name).remove(rec)
        outer = self.owner_at(rec.name, rec.lo, rec.hi)
        before, after = outer.bound.split(rec.lo)
        released = rec.bound.entries()
        outer.bound = before.join(rec.bound).join(after)
        rec.bound = SplaySet()
        for v in released:
            v.owner = outer
        return released, outer

    def drop_binder(self, rec: BinderRecord) -> None:
        """Forget a binder whose whole scope is being deleted (its variable set
        must already be empty; nothing is released)."""
        if rec.bound.root is not None:
            raise IndexInconsistent("dropping a binder that still owns variables")
        self.binder_set(rec.name).remove(rec)

    # -- variable binding -----------------------------------------------------

    def bind_variable(self, v) -> BinderRecord:
        owner = self.owner_at(v.name, v.lo, v.hi)
        owner.bound.insert(v)
        v.owner = owner
        return owner

    def unbind_variable(self, v) -> None:
        if v.owner is None:
            raise IndexInconsistent("variable is not bound in the index")
        v.owner.bound.remove(v)
        v.owner = None
