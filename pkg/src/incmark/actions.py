"""Structural edit actions: their syntax, performance on bare expressions, the
constructive any-to-any edit sequence, and the one-action-per-line trace
format.

Child positions are 1-based throughout (1, 2, 3), matching the text format
``insert-var x @ 1.2``.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import syntax as S
from .syntax import (
    Ap, Asc, BareExpr, BoolLit, Case, Cons, Fst, Hole, Lam, NumLit,
    Pair, Snd, Type, Var, HOLE, NIL,
)

Path = tuple[int, ...]


class PathInvalid(ValueError):
    pass


class ActionInapplicable(ValueError):
    pass


class Action:
    __slots__ = ()


@dataclass(frozen=True)
class InsertVar(Action):
    name: str


@dataclass(frozen=True)
class InsertNumLit(Action):
    value: int


@dataclass(frozen=True)
class InsertBoolLit(Action):
    value: bool


@dataclass(frozen=True)
class InsertNil(Action):
    pass


@dataclass(frozen=True)
class WrapFun(Action):
    pass


@dataclass(frozen=True)
class WrapAp(Action):
    child: int  # 1: existing term becomes the function, 2: the argument


@dataclass(frozen=True)
class WrapAsc(Action):
    pass


@dataclass(frozen=True)
class WrapPair(Action):
    child: int


@dataclass(frozen=True)
class WrapFst(Action):
    pass


@dataclass(frozen=True)
class WrapSnd(Action):
    pass


@dataclass(frozen=True)
class WrapCons(Action):
    child: int


@dataclass(frozen=True)
class WrapCase(Action):
    child: int  # 1: scrutinee, 2: nil branch, 3: cons branch


@dataclass(frozen=True)
class Delete(Action):
    pass


@dataclass(frozen=True)
class Unwrap(Action):
    child: int  # which child survives


@dataclass(frozen=True)
class SetAnn(Action):
    ty: Type


@dataclass(frozen=True)
class SetAsc(Action):
    ty: Type


@dataclass(frozen=True)
class InsertBinder(Action):
    binding: str


@dataclass(frozen=True)
class DeleteBinder(Action):
    pass


@dataclass(frozen=True)
class InsertCaseBinder(Action):
    which: str  # "hd" or "tl"
    binding: str


@dataclass(frozen=True)
class DeleteCaseBinder(Action):
    which: str


@dataclass(frozen=True)
class LocalizedAction:
    action: Action
    path: Path


def bare_children(e: BareExpr) -> tuple[BareExpr, ...]:
    if isinstance(e, Lam):
        return (e.body,)
    if isinstance(e, Ap):
        return (e.fun, e.arg)
    if isinstance(e, Asc):
        return (e.body,)
    if isinstance(e, Pair):
        return (e.left, e.right)
    if isinstance(e, (Fst, Snd)):
        return (e.item,)
    if isinstance(e, Cons):
        return (e.head, e.tail)
    if isinstance(e, Case):
        return (e.scrut, e.nil_body, e.cons_body)
    return ()


def _with_child(e: BareExpr, ix: int, c: BareExpr) -> BareExpr:
    if isinstance(e, Lam) and ix == 1:
        return Lam(e.binder, e.ann, c)
    if isinstance(e, Ap) and ix in (1, 2):
        return Ap(c, e.arg) if ix == 1 else Ap(e.fun, c)
    if isinstance(e, Asc) and ix == 1:
        return Asc(c, e.ty)
    if isinstance(e, Pair) and ix in (1, 2):
        return Pair(c, e.right) if ix == 1 else Pair(e.left, c)
    if isinstance(e, (Fst, Snd)) and ix == 1:
        return type(e)(c)
    if isinstance(e, Cons) and ix in (1, 2):
        return Cons(c, e.tail) if ix == 1 else Cons(e.head, c)
    if isinstance(e, Case) and ix in (1, 2, 3):
        if ix == 1:
            return Case(c, e.nil_body, e.hd_binder, e.tl_binder, e.cons_body)
        if ix == 2:
            return Case(e.scrut, c, e.hd_binder, e.tl_binder, e.cons_body)
        return Case(e.scrut, e.nil_body, e.hd_binder, e.tl_binder, c)
    raise PathInvalid(f"no child {ix} in {type(e).__name__}")


def perform_simple(e: BareExpr, a: Action) -> BareExpr:
    """Apply a simple action directly at a bare expression."""
    if isinstance(a, InsertVar):
        if not isinstance(e, Hole):
            raise ActionInapplicable("insert-var requires a hole")
        return Var(a.name)
    if isinstance(a, InsertNumLit):
        if not isinstance(e, Hole):
            raise ActionInapplicable("insert-num requires a hole")
        return NumLit(a.value)
    if isinstance(a, InsertBoolLit):
        if not isinstance(e, Hole):
            raise ActionInapplicable("insert-bool requires a hole")
        return BoolLit(a.value)
    if isinstance(a, InsertNil):
        if not isinstance(e, Hole):
            raise ActionInapplicable("insert-nil requires a hole")
        return NIL
    if isinstance(a, WrapFun):
        return Lam(None, S.UNKNOWN, e)
    if isinstance(a, WrapAp):
        if a.child == 1:
            return Ap(e, HOLE)
        if a.child == 2:
            return Ap(HOLE, e)
        raise ActionInapplicable(f"wrap-ap child {a.child}")
    if isinstance(a, WrapAsc):
        return Asc(e, S.UNKNOWN)
    if isinstance(a, WrapPair):
        if a.child == 1:
            return Pair(e, HOLE)
        if a.child == 2:
            return Pair(HOLE, e)
        raise ActionInapplicable(f"wrap-pair child {a.child}")
    if isinstance(a, WrapFst):
        return Fst(e)
    if isinstance(a, WrapSnd):
        return Snd(e)
    if isinstance(a, WrapCons):
        if a.child == 1:
            return Cons(e, HOLE)
        if a.child == 2:
            return Cons(HOLE, e)
        raise ActionInapplicable(f"wrap-cons child {a.child}")
    if isinstance(a, WrapCase):
        if a.child == 1:
            return Case(e, HOLE, None, None, HOLE)
        if a.child == 2:
            return Case(HOLE, e, None, None, HOLE)
        if a.child == 3:
            return Case(HOLE, HOLE, None, None, e)
        raise ActionInapplicable(f"wrap-case child {a.child}")
    if isinstance(a, Delete):
        return HOLE
    if isinstance(a, Unwrap):
        kids = bare_children(e)
        if isinstance(e, (Hole, Var, NumLit, BoolLit)) or not kids:
            raise ActionInapplicable(f"cannot unwrap {type(e).__name__}")
        if not 1 <= a.child <= len(kids):
            raise ActionInapplicable(f"no child {a.child} to unwrap in {type(e).__name__}")
        return kids[a.child - 1]
    if isinstance(a, SetAnn):
        if not isinstance(e, Lam):
            raise ActionInapplicable("set-ann requires a function abstraction")
        return Lam(e.binder, a.ty, e.body)
    if isinstance(a, SetAsc):
        if not isinstance(e, Asc):
            raise ActionInapplicable("set-asc requires an ascription")
        return Asc(e.body, a.ty)
    if isinstance(a, InsertBinder):
        if not isinstance(e, Lam) or e.binder is not None:
            raise ActionInapplicable("insert-binder requires an abstraction with a binder hole")
        return Lam(a.binding, e.ann, e.body)
    if isinstance(a, DeleteBinder):
        if not isinstance(e, Lam) or e.binder is None:
            raise ActionInapplicable("delete-binder requires a named binder")
        return Lam(None, e.ann, e.body)
    if isinstance(a, InsertCaseBinder):
        if not isinstance(e, Case):
            raise ActionInapplicable("insert-case-binder requires a case")
        if a.which == "hd":
            if e.hd_binder is not None:
                raise ActionInapplicable("head binder already present")
            return Case(e.scrut, e.nil_body, a.binding, e.tl_binder, e.cons_body)
        if a.which == "tl":
            if e.tl_binder is not None:
                raise ActionInapplicable("tail binder already present")
            return Case(e.scrut, e.nil_body, e.hd_binder, a.binding, e.cons_body)
        raise ActionInapplicable(f"case binder position {a.which!r}")
    if isinstance(a, DeleteCaseBinder):
        if not isinstance(e, Case):
            raise ActionInapplicable("delete-case-binder requires a case")
        if a.which == "hd":
            if e.hd_binder is None:
                raise ActionInapplicable("no head binder to delete")
            return Case(e.scrut, e.nil_body, None, e.tl_binder, e.cons_body)
        if a.which == "tl":
            if e.tl_binder is None:
                raise ActionInapplicable("no tail binder to delete")
            return Case(e.scrut, e.nil_body, e.hd_binder, None, e.cons_body)
        raise ActionInapplicable(f"case binder position {a.which!r}")
    raise TypeError(f"unknown action {a!r}")


def bare_perform(e: BareExpr, la: LocalizedAction) -> BareExpr:
    """Perform a localized action in a bare expression."""
    if not la.path:
        return perform_simple(e, la.action)
    ix = la.path[0]
    kids = bare_children(e)
    if not 1 <= ix <= len(kids):
        raise PathInvalid(f"no child {ix} under {type(e).__name__}")
    sub = bare_perform(kids[ix - 1], LocalizedAction(la.action, la.path[1:]))
    return _with_child(e, ix, sub)


def bare_perform_all(e: BareExpr, actions) -> BareExpr:
    for la in actions:
        e = bare_perform(e, la)
    return e


def resolve_path(e: BareExpr, path: Path) -> BareExpr:
    for ix in path:
        kids = bare_children(e)
        if not 1 <= ix <= len(kids):
            raise PathInvalid(f"no child {ix} under {type(e).__name__}")
        e = kids[ix - 1]
    return e


def all_paths_of(e: BareExpr, prefix: Path = ()) -> list[Path]:
    out = [prefix]
    for i, kid in enumerate(bare_children(e), 1):
        out.extend(all_paths_of(kid, prefix + (i,)))
    return out


def _build_actions(e: BareExpr, path: Path, out: list[LocalizedAction]) -> None:
    # Emit the actions that grow `e` at `path`, assuming a hole sits there.
    def at(a: Action):
        out.append(LocalizedAction(a, path))

    if isinstance(e, Hole):
        return
    if isinstance(e, Var):
        at(InsertVar(e.name))
    elif isinstance(e, NumLit):
        at(InsertNumLit(e.value))
    elif isinstance(e, BoolLit):
        at(InsertBoolLit(e.value))
    elif isinstance(e, S.Nil):
        at(InsertNil())
    elif isinstance(e, Lam):
        at(WrapFun())
        at(SetAnn(e.ann))
        if e.binder is not None:
            at(InsertBinder(e.binder))
        _build_actions(e.body, path + (1,), out)
    elif isinstance(e, Ap):
        at(WrapAp(1))  # the hole becomes the function position
        _build_actions(e.fun, path + (1,), out)
        _build_actions(e.arg, path + (2,), out)
    elif isinstance(e, Asc):
        at(WrapAsc())
        at(SetAsc(e.ty))
        _build_actions(e.body, path + (1,), out)
    elif isinstance(e, Pair):
        at(WrapPair(1))
        _build_actions(e.left, path + (1,), out)
        _build_actions(e.right, path + (2,), out)
    elif isinstance(e, Fst):
        at(WrapFst())
        _build_actions(e.item, path + (1,), out)
    elif isinstance(e, Snd):
        at(WrapSnd())
        _build_actions(e.item, path + (1,), out)
    elif isinstance(e, Cons):
        at(WrapCons(1))
        _build_actions(e.head, path + (1,), out)
        _build_actions(e.tail, path + (2,), out)
    elif isinstance(e, Case):
        at(WrapCase(1))
        if e.hd_binder is not None:
            at(InsertCaseBinder("hd", e.hd_binder))
        if e.tl_binder is not None:
            at(InsertCaseBinder("tl", e.tl_binder))
        _build_actions(e.scrut, path + (1,), out)
        _build_actions(e.nil_body, path + (2,), out)
        _build_actions(e.cons_body, path + (3,), out)
    else:
        raise TypeError(f"not a bare expression: {e!r}")


def action_sequence_between(e1: BareExpr, e2: BareExpr) -> list[LocalizedAction]:
    """A sequence of localized actions taking e1 to e2.

    Constructive: tear e1 down to a hole, then rebuild e2 top-down. Returns []
    when the terms are already equal.
    """
    if e1 == e2:
        return []
    out: list[LocalizedAction] = []
    if not isinstance(e1, Hole):
        out.append(LocalizedAction(Delete(), ()))
    _build_actions(e2, (), out)
    return out


# ---------------------------------------------------------------------------
# Trace file format: one action per line, `<name> <args> @ <path>`, with the
# path as dot-separated 1-based child indices and `.` for the root.

_CHILD_NAMES = {1: "one", 2: "two", 3: "three"}
_CHILD_VALUES = {v: k for k, v in _CHILD_NAMES.items()}


def format_path(path: Path) -> str:
    return ".".join(str(i) for i in path) if path else "."


def parse_path(text: str) -> Path:
    if text == ".":
        return ()
    try:
        return tuple(int(part) for part in text.split("."))
    except ValueError:
        raise PathInvalid(f"bad path {text!r}") from None


def format_action(la: LocalizedAction) -> str:
    a = la.action
    if isinstance(a, InsertVar):
        head = f"insert-var {a.name}"
    elif isinstance(a, InsertNumLit):
        head = f"insert-num {a.value}"
    elif isinstance(a, InsertBoolLit):
        head = f"insert-bool {'true' if a.value else 'false'}"
    elif isinstance(a, InsertNil):
        head = "insert-nil"
    elif isinstance(a, WrapFun):
        head = "wrap-fun"
    elif isinstance(a, WrapAp):
        head = f"wrap-ap {_CHILD_NAMES[a.child]}"
    elif isinstance(a, WrapAsc):
        head = "wrap-asc"
    elif isinstance(a, WrapPair):
        head = f"wrap-pair {_CHILD_NAMES[a.child]}"
    elif isinstance(a, WrapFst):
        head = "wrap-fst"
    elif isinstance(a, WrapSnd):
        head = "wrap-snd"
    elif isinstance(a, WrapCons):
        head = f"wrap-cons {_CHILD_NAMES[a.child]}"
    elif isinstance(a, WrapCase):
        head = f"wrap-case {_CHILD_NAMES[a.child]}"
    elif isinstance(a, Delete):
        head = "delete"
    elif isinstance(a, Unwrap):
        head = f"unwrap {_CHILD_NAMES[a.child]}"
    elif isinstance(a, SetAnn):
        head = f"set-ann {S.print_type(a.ty)}"
    elif isinstance(a, SetAsc):
        head = f"set-asc {S.print_type(a.ty)}"
    elif isinstance(a, InsertBinder):
        head = f"insert-binder {a.binding}"
    elif isinstance(a, DeleteBinder):
        head = "delete-binder"
    elif isinstance(a, InsertCaseBinder):
        head = f"insert-case-binder {a.which} {a.binding}"
    elif isinstance(a, DeleteCaseBinder):
        head = f"delete-case-binder {a.which}"
    else:
        raise TypeError(f"unknown action {a!r}")
    return f"{head} @ {format_path(la.path)}"


class TraceParseError(ValueError):
    pass


def _split_trace_line(line: str) -> tuple[str, str]:
    if "@" not in line:
        raise TraceParseError(f"missing '@': {line!r}")
    head, _, path = line.rpartition("@")
    return head.strip(), path.strip()


def parse_action_line(line: str) -> LocalizedAction:
    head, path_text = _split_trace_line(line)
    parts = head.split(None, 1)
    name = parts[0]
    rest = parts[1] if len(parts) > 1 else ""
    path = parse_path(path_text)

    def child_of(text):
        if text not in _CHILD_VALUES:
            raise TraceParseError(f"bad child {text!r} in {line!r}")
        return _CHILD_VALUES[text]

    a: Action
    if name == "insert-var":
        a = InsertVar(rest)
    elif name == "insert-num":
        a = InsertNumLit(int(rest))
    elif name == "insert-bool":
        a = InsertBoolLit(rest == "true")
    elif name == "insert-nil":
        a = InsertNil()
    elif name == "wrap-fun":
        a = WrapFun()
    elif name == "wrap-ap":
        a = WrapAp(child_of(rest))
    elif name == "wrap-asc":
        a = WrapAsc()
    elif name == "wrap-pair":
        a = WrapPair(child_of(rest))
    elif name == "wrap-fst":
        a = WrapFst()
    elif name == "wrap-snd":
        a = WrapSnd()
    elif name == "wrap-cons":
        a = WrapCons(child_of(rest))
    elif name == "wrap-case":
        a = WrapCase(child_of(rest))
    elif name == "delete":
        a = Delete()
    elif name == "unwrap":
        a = Unwrap(child_of(rest))
    elif name == "set-ann":
        a = SetAnn(S.parse_type(rest))
    elif name == "set-asc":
        a = SetAsc(S.parse_type(rest))
    elif name == "insert-binder":
        a = InsertBinder(rest)
    elif name == "delete-binder":
        a = DeleteBinder()
    elif name == "insert-case-binder":
        which, _, b = rest.partition(" ")
        a = InsertCaseBinder(which, b.strip())
    elif name == "delete-case-binder":
        a = DeleteCaseBinder(rest)
    else:
        raise TraceParseError(f"unknown action {name!r}")
    return LocalizedAction(a, path)


def parse_trace(text: str) -> list[LocalizedAction]:
    actions = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            actions.append(parse_action_line(line))
        except (TraceParseError, PathInvalid, S.ParseError, ValueError) as exc:
            raise TraceParseError(f"line {lineno}: {exc}") from None
    return actions


def format_trace(actions) -> str:
    return "\n".join(format_action(la) for la in actions) + "\n"
