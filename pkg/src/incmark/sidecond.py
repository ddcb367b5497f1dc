"""Total side-condition functions shared by the from-scratch checker and the
incremental engine.

Everything here is defined on optional types (None meaning "no type") and
never fails: failure cases return an error mark plus unknown types so checking
can proceed.
"""

from __future__ import annotations

from .syntax import (
    Arrow, Binding, Bool, ListOf, Mark, Num, Prod, TypeOpt, Unknown,
    UNKNOWN, OK, ERR,
)

# Contexts are tuples of (name, type-option, dirty) entries, most recent last.
# The dirty flag on an entry mirrors the dirty bit of the binder annotation the
# entry came from; plain marking always passes False.
CtxEntry = tuple[str, TypeOpt, bool]
Ctx = tuple[CtxEntry, ...]

EMPTY_CTX: Ctx = ()


def ctx_extend(ctx: Ctx, binder: Binding, ty: TypeOpt, dirty: bool = False) -> Ctx:
    if binder is None:  # a binding hole binds nothing
        return ctx
    return ctx + ((binder, ty, dirty),)


def ctx_lookup(name: str, ctx: Ctx) -> tuple[Mark, TypeOpt]:
    for entry_name, ty, _ in reversed(ctx):
        if entry_name == name:
            return OK, ty
    return ERR, UNKNOWN


def ctx_lookup_entry(name: str, ctx: Ctx) -> tuple[Mark, TypeOpt, bool]:
    """Like ctx_lookup but also reporting the entry's dirty flag (misses are clean)."""
    for entry_name, ty, dirty in reversed(ctx):
        if entry_name == name:
            return OK, ty, dirty
    return ERR, UNKNOWN, False


def ctx_lookup_binding(b: Binding, ctx: Ctx) -> tuple[Mark, TypeOpt]:
    """Context lookup accepting a binding.

    The hole case is unused by callers (a hole binds nothing), so it returns a
    fixed (ERR, ?) to stay deterministic and total.
    """
    if b is None:
        return ERR, UNKNOWN
    return ctx_lookup(b, ctx)


def mark_meet(m1: Mark, m2: Mark) -> Mark:
    return OK if (m1 is OK and m2 is OK) else ERR


def matched_arrow(t: TypeOpt) -> tuple[Mark, TypeOpt, TypeOpt]:
    if t is None:
        return OK, None, None
    if isinstance(t, Unknown):
        return OK, UNKNOWN, UNKNOWN
    if isinstance(t, Arrow):
        return OK, t.dom, t.cod
    return ERR, UNKNOWN, UNKNOWN


def matched_prod(t: TypeOpt) -> tuple[Mark, TypeOpt, TypeOpt]:
    if t is None:
        return OK, None, None
    if isinstance(t, Unknown):
        return OK, UNKNOWN, UNKNOWN
    if isinstance(t, Prod):
        return OK, t.left, t.right
    return ERR, UNKNOWN, UNKNOWN


def matched_list(t: TypeOpt) -> tuple[Mark, TypeOpt]:
    if t is None:
        return OK, None
    if isinstance(t, Unknown):
        return OK, UNKNOWN
    if isinstance(t, ListOf):
        return OK, t.elem
    return ERR, UNKNOWN


def consistency(t1: TypeOpt, t2: TypeOpt) -> Mark:
    """Gradual consistency on optional types.

    No type on either side is consistent with anything (a term checked against
    nothing cannot be wrong), and the unknown type is consistent with every
    type.
    """
    if t1 is None or t2 is None:
        return OK
    if isinstance(t1, Unknown) or isinstance(t2, Unknown):
        return OK
    if isinstance(t1, Num) and isinstance(t2, Num):
        return OK
    if isinstance(t1, Bool) and isinstance(t2, Bool):
        return OK
    if isinstance(t1, Arrow) and isinstance(t2, Arrow):
        return mark_meet(consistency(t1.dom, t2.dom), consistency(t1.cod, t2.cod))
    if isinstance(t1, Prod) and isinstance(t2, Prod):
        return mark_meet(consistency(t1.left, t2.left), consistency(t1.right, t2.right))
    if isinstance(t1, ListOf) and isinstance(t2, ListOf):
        return consistency(t1.elem, t2.elem)
    return ERR


def fun_syn(ana: TypeOpt, ann: TypeOpt, body_syn: TypeOpt) -> TypeOpt:
    """What a function abstraction synthesizes.

    Analyzed abstractions synthesize nothing; otherwise the arrow from the
    annotation to the body's type, when both are available.
    """
    if ana is not None:
        return None
    if body_syn is None or ann is None:
        return None
    return Arrow(ann, body_syn)


def listof_opt(t: TypeOpt) -> TypeOpt:
    return None if t is None else ListOf(t)


def pair_syn(ana: TypeOpt, left_syn: TypeOpt, right_syn: TypeOpt) -> TypeOpt:
    """What a pair synthesizes: the product of its children's types when it is
    not being analyzed, nothing otherwise (mirroring fun_syn)."""
    if ana is not None:
        return None
    if left_syn is None or right_syn is None:
        return None
    return Prod(left_syn, right_syn)


def cons_child_ana(ana: TypeOpt, head_syn: TypeOpt) -> tuple[TypeOpt, TypeOpt]:
    """Analyzed types for the two children of a cons cell."""
    if ana is not None:
        _, elem = matched_list(ana)
        return elem, listof_opt(elem)
    return None, listof_opt(head_syn)


def cons_syn(ana: TypeOpt, head_syn: TypeOpt) -> TypeOpt:
    if ana is not None:
        return None
    return listof_opt(head_syn)


def case_cons_ana(ana: TypeOpt, nil_syn: TypeOpt) -> TypeOpt:
    """Analyzed type for the cons branch: the expected type when there is one,
    otherwise the nil branch's synthesis."""
    return ana if ana is not None else nil_syn


def case_syn(ana: TypeOpt, nil_syn: TypeOpt) -> TypeOpt:
    return None if ana is not None else nil_syn


def subsumable_kind(kind: str) -> bool:
    """Forms whose analytic behavior is synthesize-then-compare.

    The distributing forms (lam, pair, cons, case) instead decompose the
    expected type into their children.
    """
    return kind not in ("lam", "pair", "cons", "case")
