"""Shared generators and oracles for the test suite."""

from __future__ import annotations

import random

from incmark import actions as A
from incmark import syntax as S
from incmark.engine import Doc
from incmark.syntax import UNKNOWN, NUM, BOOL

NAMES = ["x", "y", "z", "f", "g"]


def random_type(rng: random.Random, depth: int = 3) -> S.Type:
    if depth <= 0:
        return rng.choice([UNKNOWN, NUM, BOOL])
    k = rng.randrange(6)
    if k == 0:
        return UNKNOWN
    if k == 1:
        return NUM
    if k == 2:
        return BOOL
    if k == 3:
        return S.Arrow(random_type(rng, depth - 1), random_type(rng, depth - 1))
    if k == 4:
        return S.Prod(random_type(rng, depth - 1), random_type(rng, depth - 1))
    return S.ListOf(random_type(rng, depth - 1))


def random_binding(rng: random.Random) -> S.Binding:
    return None if rng.random() < 0.25 else rng.choice(NAMES)


def random_bare(rng: random.Random, size: int) -> S.BareExpr:
    """A random bare expression with roughly `size` nodes."""
    if size <= 1:
        k = rng.randrange(5)
        if k == 0:
            return S.HOLE
        if k == 1:
            return S.Var(rng.choice(NAMES))
        if k == 2:
            return S.NumLit(rng.randrange(10))
        if k == 3:
            return S.BoolLit(rng.random() < 0.5)
        return S.NIL

    def split2():
        n = 1 + rng.randrange(max(size - 2, 1))
        return n, size - 1 - n

    k = rng.randrange(8)
    if k == 0:
        return S.Lam(random_binding(rng), random_type(rng, 2), random_bare(rng, size - 1))
    if k == 1:
        n, m = split2()
        return S.Ap(random_bare(rng, n), random_bare(rng, m))
    if k == 2:
        return S.Asc(random_bare(rng, size - 1), random_type(rng, 2))
    if k == 3:
        n, m = split2()
        return S.Pair(random_bare(rng, n), random_bare(rng, m))
    if k == 4:
        kind = S.Fst if rng.random() < 0.5 else S.Snd
        return kind(random_bare(rng, size - 1))
    if k in (5, 6):
        n, m = split2()
        return S.Cons(random_bare(rng, n), random_bare(rng, m))
    n = max(1, (size - 1) // 3)
    return S.Case(random_bare(rng, n), random_bare(rng, n),
                  random_binding(rng), random_binding(rng),
                  random_bare(rng, size - 1 - 2 * n))


def all_paths(e: S.BareExpr, prefix=()) -> list[tuple]:
    out = [prefix]
    for i, kid in enumerate(A.bare_children(e), 1):
        out.extend(all_paths(kid, prefix + (i,)))
    return out


def random_action_for(rng: random.Random, e: S.BareExpr, path: tuple,
                      max_nodes: int, node_count: int):
    """An applicable localized action at `path` inside `e`, or None."""
    target = A.resolve_path(e, path)
    choices = []
    growing = node_count < max_nodes
    if isinstance(target, S.Hole):
        choices += [A.InsertVar(rng.choice(NAMES)), A.InsertNumLit(rng.randrange(10)),
                    A.InsertBoolLit(rng.random() < 0.5), A.InsertNil()]
    if growing:
        choices += [A.WrapFun(), A.WrapAp(rng.randrange(1, 3)), A.WrapAsc(),
                    A.WrapPair(rng.randrange(1, 3)), A.WrapFst(), A.WrapSnd(),
                    A.WrapCons(rng.randrange(1, 3)), A.WrapCase(rng.randrange(1, 4))]
    if not isinstance(target, S.Hole):
        choices.append(A.Delete())
    kids = A.bare_children(target)
    if kids:
        choices.append(A.Unwrap(rng.randrange(1, len(kids) + 1)))
    if isinstance(target, S.Lam):
        choices.append(A.SetAnn(random_type(rng, 2)))
        if target.binder is None:
            choices.append(A.InsertBinder(rng.choice(NAMES)))
        else:
            choices.append(A.DeleteBinder())
    if isinstance(target, S.Asc):
        choices.append(A.SetAsc(random_type(rng, 2)))
    if isinstance(target, S.Case):
        which = rng.choice(["hd", "tl"])
        present = target.hd_binder if which == "hd" else target.tl_binder
        if present is None:
            choices.append(A.InsertCaseBinder(which, rng.choice(NAMES)))
        else:
            choices.append(A.DeleteCaseBinder(which))
    if not choices:
        return None
    return A.LocalizedAction(rng.choice(choices), path)


def random_trace_step(rng: random.Random, e: S.BareExpr, max_nodes: int = 200):
    paths = all_paths(e)
    node_count = len(paths)
    for _ in range(20):
        path = rng.choice(paths)
        la = random_action_for(rng, e, path, max_nodes, node_count)
        if la is None:
            continue
        try:
            e2 = A.bare_perform(e, la)
        except (A.PathInvalid, A.ActionInapplicable):
            continue
        return la, e2
    return None, e


# ---------------------------------------------------------------------------
# naive binding resolution (ground truth for the scope index)

def naive_resolution(doc: Doc) -> dict:
    """Map each live variable node to its lexical binding site: the owning
    (node, which) pair or None for free, by a plain scoped walk."""
    result = {}

    def walk(n, env):
        if n.kind == "var":
            result[n] = env.get(n.name)
        if n.kind == "lam":
            env2 = dict(env)
            if n.binder is not None:
                env2[n.binder] = (n, "lam")
            walk(n.children[0], env2)
        elif n.kind == "case":
            walk(n.children[0], env)
            walk(n.children[1], env)
            env2 = dict(env)
            if n.binder is not None:
                env2[n.binder] = (n, "hd")
            if n.binder2 is not None:
                env2[n.binder2] = (n, "tl")
            walk(n.children[2], env2)
        else:
            for kid in n.children:
                walk(kid, env)

    walk(doc.root, {})
    return result


def engine_resolution(doc: Doc) -> dict:
    result = {}

    def walk(n):
        if n.kind == "var":
            rec = n.owner
            result[n] = None if rec.kind == "free" else (rec.node, {"lam": "lam", "hd": "hd", "tl": "tl"}[rec.kind])
        for kid in n.children:
            walk(kid)

    walk(doc.root)
    return result


def check_binder_index(doc: Doc) -> None:
    want = naive_resolution(doc)
    got = engine_resolution(doc)
    assert want == got, "scope index disagrees with naive lexical resolution"
    # ownership sets match the per-variable owners
    owners = {}
    for v, site in got.items():
        owners.setdefault(v.owner, set()).add(v)
    for name, bset in doc.index.binders.items():
        for rec in bset.entries():
            assert set(rec.bound.entries()) == owners.get(rec, set())
        bset.check_augmentation()
    for name, rec in doc.index.free.items():
        assert set(rec.bound.entries()) == owners.get(rec, set())


def frontier_of(doc: Doc):
    return doc.dirty_locations()


# ---------------------------------------------------------------------------
# shadow order oracle: a doubly linked list whose nodes carry exact dyadic
# labels (numerator, denominator-exponent), so order queries are O(1)

class _ShadowNode:
    __slots__ = ("label", "prev", "next")


def _mid(a, b):
    (n1, d1), (n2, d2) = a, b
    d = max(d1, d2) + 1
    return ((n1 << (d - d1)) + (n2 << (d - d2))) // 2, d


def _label_less(a, b):
    (n1, d1), (n2, d2) = a, b
    return (n1 << d2) < (n2 << d1)


class ShadowOrder:
    def __init__(self, first_key):
        node = _ShadowNode()
        node.label = (0, 0)
        node.prev = node.next = None
        self.nodes = {first_key: node}

    def insert_after(self, key, new_key):
        at = self.nodes[key]
        node = _ShadowNode()
        node.label = (_mid(at.label, at.next.label) if at.next
                      else (at.label[0] + 1, at.label[1]))
        node.prev, node.next = at, at.next
        if at.next:
            at.next.prev = node
        at.next = node
        self.nodes[new_key] = node
        return new_key

    def insert_before(self, key, new_key):
        at = self.nodes[key]
        node = _ShadowNode()
        node.label = (_mid(at.prev.label, at.label) if at.prev
                      else (at.label[0] - 1, at.label[1]))
        node.next, node.prev = at, at.prev
        if at.prev:
            at.prev.next = node
        at.prev = node
        self.nodes[new_key] = node
        return new_key

    def delete(self, key):
        node = self.nodes.pop(key)
        if node.prev:
            node.prev.next = node.next
        if node.next:
            node.next.prev = node.prev

    def compare(self, a, b):
        if a is b:
            return 0
        return -1 if _label_less(self.nodes[a].label, self.nodes[b].label) else 1
