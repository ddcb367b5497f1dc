"""Value-level syntax: types, bare expressions, decorated expressions.

Three layers of program representation share this module:

  * bare expressions -- the plain terms a user edits;
  * decorated expressions (``DecExpr``) -- each node wrapped with an analyzed
    type, a consistency mark, a synthesized type, per-form error marks, and a
    dirty bit next to every stored or surface type;
  * a fully-checked ("marked") program is simply an all-clean decorated
    program, so one hierarchy serves both roles and ``strip_dirty`` converts.

Also home to the canonical s-expression text format used by the CLI, the
tests, and the session protocol.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional, Union


# ---------------------------------------------------------------------------
# Types and marks

class Type:
    """Base class for gradual types."""
    __slots__ = ()


@dataclass(frozen=True)
class Unknown(Type):
    pass


@dataclass(frozen=True)
class Num(Type):
    pass


@dataclass(frozen=True)
class Bool(Type):
    pass


@dataclass(frozen=True)
class Arrow(Type):
    dom: Type
    cod: Type


@dataclass(frozen=True)
class Prod(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class ListOf(Type):
    elem: Type


UNKNOWN = Unknown()
NUM = Num()
BOOL = Bool()

# None is the "no type" option (a term not analyzed against any type /
# not synthesizing a type).
TypeOpt = Optional[Type]


class Mark(enum.Enum):
    OK = "ok"
    ERR = "err"

    def __repr__(self):
        return f"Mark.{self.name}"


OK = Mark.OK
ERR = Mark.ERR

# A binding position is either a hole (None) or an identifier.
Binding = Optional[str]


# ---------------------------------------------------------------------------
# Bare expressions

class BareExpr:
    __slots__ = ()


@dataclass(frozen=True)
class Hole(BareExpr):
    pass


@dataclass(frozen=True)
class Var(BareExpr):
    name: str


@dataclass(frozen=True)
class Lam(BareExpr):
    binder: Binding
    ann: Type
    body: BareExpr


@dataclass(frozen=True)
class Ap(BareExpr):
    fun: BareExpr
    arg: BareExpr


@dataclass(frozen=True)
class Asc(BareExpr):
    body: BareExpr
    ty: Type


@dataclass(frozen=True)
class NumLit(BareExpr):
    value: int


@dataclass(frozen=True)
class BoolLit(BareExpr):
    value: bool


@dataclass(frozen=True)
class Pair(BareExpr):
    left: BareExpr
    right: BareExpr


@dataclass(frozen=True)
class Fst(BareExpr):
    item: BareExpr


@dataclass(frozen=True)
class Snd(BareExpr):
    item: BareExpr


@dataclass(frozen=True)
class Nil(BareExpr):
    pass


@dataclass(frozen=True)
class Cons(BareExpr):
    head: BareExpr
    tail: BareExpr


@dataclass(frozen=True)
class Case(BareExpr):
    scrut: BareExpr
    nil_body: BareExpr
    hd_binder: Binding
    tl_binder: Binding
    cons_body: BareExpr


HOLE = Hole()
NIL = Nil()


# ---------------------------------------------------------------------------
# Decorated expressions

class DecCon:
    """A constructor node carrying its per-form marks and decorated children."""
    __slots__ = ()


@dataclass(frozen=True)
class DecExpr:
    """Analytic wrapper: analyzed type + consistency mark around a synthesizing node.

    A whole program is a DecExpr whose ``ana`` is None and whose ``mark`` is OK.
    Dirty bits sit beside every stored type; an all-clean tree is a plain
    marked program.
    """
    ana: TypeOpt
    ana_dirty: bool
    mark: Mark
    con: DecCon
    syn: TypeOpt
    syn_dirty: bool


@dataclass(frozen=True)
class DHole(DecCon):
    pass


@dataclass(frozen=True)
class DVar(DecCon):
    name: str
    mark: Mark  # free-variable mark


@dataclass(frozen=True)
class DLam(DecCon):
    binder: Binding
    ann: Type
    ann_dirty: bool
    arrow_mark: Mark  # analyzed against a non-function type
    dom_mark: Mark    # annotation inconsistent with the expected domain
    body: DecExpr


@dataclass(frozen=True)
class DAp(DecCon):
    mark: Mark  # function child synthesized a non-function type
    fun: DecExpr
    arg: DecExpr


@dataclass(frozen=True)
class DAsc(DecCon):
    body: DecExpr
    ty: Type
    ty_dirty: bool


@dataclass(frozen=True)
class DNum(DecCon):
    value: int


@dataclass(frozen=True)
class DBool(DecCon):
    value: bool


@dataclass(frozen=True)
class DPair(DecCon):
    mark: Mark  # analyzed against a non-product type
    left: DecExpr
    right: DecExpr


@dataclass(frozen=True)
class DFst(DecCon):
    mark: Mark  # child synthesized a non-product type
    item: DecExpr


@dataclass(frozen=True)
class DSnd(DecCon):
    mark: Mark
    item: DecExpr


@dataclass(frozen=True)
class DNil(DecCon):
    pass


@dataclass(frozen=True)
class DCons(DecCon):
    mark: Mark  # analyzed against a non-list type
    head: DecExpr
    tail: DecExpr


@dataclass(frozen=True)
class DCase(DecCon):
    mark: Mark  # scrutinee synthesized a non-list type
    scrut: DecExpr
    nil_body: DecExpr
    hd_binder: Binding
    tl_binder: Binding
    cons_body: DecExpr


def dec_children(con: DecCon) -> tuple[DecExpr, ...]:
    if isinstance(con, DLam):
        return (con.body,)
    if isinstance(con, DAp):
        return (con.fun, con.arg)
    if isinstance(con, DAsc):
        return (con.body,)
    if isinstance(con, DPair):
        return (con.left, con.right)
    if isinstance(con, (DFst, DSnd)):
        return (con.item,)
    if isinstance(con, DCons):
        return (con.head, con.tail)
    if isinstance(con, DCase):
        return (con.scrut, con.nil_body, con.cons_body)
    return ()


def erase(p: Union[DecExpr, DecCon]) -> BareExpr:
    """Drop marks, stored types, and dirty bits, recovering the bare expression."""
    if isinstance(p, DecExpr):
        return erase(p.con)
    if isinstance(p, DHole):
        return HOLE
    if isinstance(p, DVar):
        return Var(p.name)
    if isinstance(p, DLam):
        return Lam(p.binder, p.ann, erase(p.body))
    if isinstance(p, DAp):
        return Ap(erase(p.fun), erase(p.arg))
    if isinstance(p, DAsc):
        return Asc(erase(p.body), p.ty)
    if isinstance(p, DNum):
        return NumLit(p.value)
    if isinstance(p, DBool):
        return BoolLit(p.value)
    if isinstance(p, DPair):
        return Pair(erase(p.left), erase(p.right))
    if isinstance(p, DFst):
        return Fst(erase(p.item))
    if isinstance(p, DSnd):
        return Snd(erase(p.item))
    if isinstance(p, DNil):
        return NIL
    if isinstance(p, DCons):
        return Cons(erase(p.head), erase(p.tail))
    if isinstance(p, DCase):
        return Case(erase(p.scrut), erase(p.nil_body),
                    p.hd_binder, p.tl_binder, erase(p.cons_body))
    raise TypeError(f"not a decorated node: {p!r}")


def strip_dirty(p: DecExpr) -> DecExpr:
    """The same tree with every dirty bit cleared (a plain marked program)."""
    con = p.con
    if isinstance(con, DLam):
        con = replace(con, ann_dirty=False, body=strip_dirty(con.body))
    elif isinstance(con, DAp):
        con = replace(con, fun=strip_dirty(con.fun), arg=strip_dirty(con.arg))
    elif isinstance(con, DAsc):
        con = replace(con, ty_dirty=False, body=strip_dirty(con.body))
    elif isinstance(con, DPair):
        con = replace(con, left=strip_dirty(con.left), right=strip_dirty(con.right))
    elif isinstance(con, (DFst, DSnd)):
        con = replace(con, item=strip_dirty(con.item))
    elif isinstance(con, DCons):
        con = replace(con, head=strip_dirty(con.head), tail=strip_dirty(con.tail))
    elif isinstance(con, DCase):
        con = replace(con, scrut=strip_dirty(con.scrut), nil_body=strip_dirty(con.nil_body),
                      cons_body=strip_dirty(con.cons_body))
    return replace(p, ana_dirty=False, syn_dirty=False, con=con)


def is_quiescent(p: DecExpr) -> bool:
    if p.ana_dirty or p.syn_dirty:
        return False
    con = p.con
    if isinstance(con, DLam) and con.ann_dirty:
        return False
    if isinstance(con, DAsc) and con.ty_dirty:
        return False
    return all(is_quiescent(c) for c in dec_children(con))


def count_errors(p: DecExpr) -> int:
    """Number of error marks anywhere in the tree (wrapper and per-form marks)."""
    n = 1 if p.mark is ERR else 0
    con = p.con
    for m in form_marks(con):
        if m is ERR:
            n += 1
    for c in dec_children(con):
        n += count_errors(c)
    return n


def form_marks(con: DecCon) -> tuple[Mark, ...]:
    if isinstance(con, DVar):
        return (con.mark,)
    if isinstance(con, DLam):
        return (con.arrow_mark, con.dom_mark)
    if isinstance(con, (DAp, DPair, DFst, DSnd, DCons, DCase)):
        return (con.mark,)
    return ()


def expr_equal(a, b) -> bool:
    """Structural equality, including marks, stored types, and dirty bits."""
    return a == b


def check_program_shape(p: DecExpr) -> None:
    """Raise if the root wrapper is not the fixed program wrapper (no analyzed
    type, consistency mark OK)."""
    if p.ana is not None or p.mark is not OK:
        raise ValueError("program root must be analyzed against nothing with mark ok")


# ---------------------------------------------------------------------------
# Text format

class ParseError(ValueError):
    def __init__(self, msg, pos):
        super().__init__(f"at offset {pos}: {msg}")
        self.pos = pos


def _tokenize(text):
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "(){}[]=,":
            toks.append((c, i))
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "(){}[]=,":
                j += 1
            toks.append((text[i:j], i))
            i = j
    toks.append((None, n))  # end marker
    return toks


class _Reader:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.toks[self.k][0]

    def next(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, want):
        tok, pos = self.next()
        if tok != want:
            raise ParseError(f"expected {want!r}, found {tok!r}", pos)
        return tok

    def done(self):
        tok, pos = self.toks[self.k]
        if tok is not None:
            raise ParseError(f"trailing input {tok!r}", pos)


_IDENT_BAD = {"lam", "ap", "asc", "var", "num", "bool", "pair", "fst", "snd",
              "nil", "cons", "case", "arrow", "prod", "list", "true", "false", "?"}


def _is_ident(tok):
    if not tok or tok in _IDENT_BAD:
        return False
    if not (tok[0].isalpha() or tok[0] == "_"):
        return False
    return all(ch.isalnum() or ch in "_'" for ch in tok)


def parse_type(text: str) -> Type:
    r = _Reader(text)
    t = _read_type(r)
    r.done()
    return t


def _read_type(r: _Reader) -> Type:
    tok, pos = r.next()
    if tok == "?":
        return UNKNOWN
    if tok == "num":
        return NUM
    if tok == "bool":
        return BOOL
    if tok == "(":
        head, hpos = r.next()
        if head == "arrow":
            t = Arrow(_read_type(r), _read_type(r))
        elif head == "prod":
            t = Prod(_read_type(r), _read_type(r))
        elif head == "list":
            t = ListOf(_read_type(r))
        else:
            raise ParseError(f"expected arrow/prod/list, found {head!r}", hpos)
        r.expect(")")
        return t
    raise ParseError(f"expected a type, found {tok!r}", pos)


def _read_binding(r: _Reader) -> Binding:
    tok, pos = r.next()
    if tok == "?":
        return None
    if _is_ident(tok):
        return tok
    raise ParseError(f"expected a binding (? or identifier), found {tok!r}", pos)


def parse_expr(text: str) -> BareExpr:
    r = _Reader(text)
    e = _read_expr(r)
    r.done()
    return e


def _read_expr(r: _Reader) -> BareExpr:
    tok, pos = r.next()
    if tok == "?":
        return HOLE
    if tok == "nil":
        return NIL
    if tok != "(":
        raise ParseError(f"expected an expression, found {tok!r}", pos)
    head, hpos = r.next()
    if head == "var":
        name, npos = r.next()
        if not _is_ident(name):
            raise ParseError(f"expected identifier, found {name!r}", npos)
        e: BareExpr = Var(name)
    elif head == "lam":
        e = Lam(_read_binding(r), _read_type(r), _read_expr(r))
    elif head == "ap":
        e = Ap(_read_expr(r), _read_expr(r))
    elif head == "asc":
        e = Asc(_read_expr(r), _read_type(r))
    elif head == "num":
        tok2, p2 = r.next()
        try:
            e = NumLit(int(tok2))
        except (TypeError, ValueError):
            raise ParseError(f"expected integer, found {tok2!r}", p2) from None
    elif head == "bool":
        tok2, p2 = r.next()
        if tok2 not in ("true", "false"):
            raise ParseError(f"expected true/false, found {tok2!r}", p2)
        e = BoolLit(tok2 == "true")
    elif head == "pair":
        e = Pair(_read_expr(r), _read_expr(r))
    elif head == "fst":
        e = Fst(_read_expr(r))
    elif head == "snd":
        e = Snd(_read_expr(r))
    elif head == "cons":
        e = Cons(_read_expr(r), _read_expr(r))
    elif head == "case":
        e = Case(_read_expr(r), _read_expr(r), _read_binding(r), _read_binding(r),
                 _read_expr(r))
    else:
        raise ParseError(f"unknown form {head!r}", hpos)
    r.expect(")")
    return e


def print_type(t: Type) -> str:
    if isinstance(t, Unknown):
        return "?"
    if isinstance(t, Num):
        return "num"
    if isinstance(t, Bool):
        return "bool"
    if isinstance(t, Arrow):
        return f"(arrow {print_type(t.dom)} {print_type(t.cod)})"
    if isinstance(t, Prod):
        return f"(prod {print_type(t.left)} {print_type(t.right)})"
    if isinstance(t, ListOf):
        return f"(list {print_type(t.elem)})"
    raise TypeError(f"not a type: {t!r}")


def print_binding(b: Binding) -> str:
    return "?" if b is None else b


def print_expr(e: BareExpr) -> str:
    if isinstance(e, Hole):
        return "?"
    if isinstance(e, Var):
        return f"(var {e.name})"
    if isinstance(e, Lam):
        return f"(lam {print_binding(e.binder)} {print_type(e.ann)} {print_expr(e.body)})"
    if isinstance(e, Ap):
        return f"(ap {print_expr(e.fun)} {print_expr(e.arg)})"
    if isinstance(e, Asc):
        return f"(asc {print_expr(e.body)} {print_type(e.ty)})"
    if isinstance(e, NumLit):
        return f"(num {e.value})"
    if isinstance(e, BoolLit):
        return f"(bool {'true' if e.value else 'false'})"
    if isinstance(e, Pair):
        return f"(pair {print_expr(e.left)} {print_expr(e.right)})"
    if isinstance(e, Fst):
        return f"(fst {print_expr(e.item)})"
    if isinstance(e, Snd):
        return f"(snd {print_expr(e.item)})"
    if isinstance(e, Nil):
        return "nil"
    if isinstance(e, Cons):
        return f"(cons {print_expr(e.head)} {print_expr(e.tail)})"
    if isinstance(e, Case):
        return (f"(case {print_expr(e.scrut)} {print_expr(e.nil_body)} "
                f"{print_binding(e.hd_binder)} {print_binding(e.tl_binder)} "
                f"{print_expr(e.cons_body)})")
    raise TypeError(f"not a bare expression: {e!r}")


# ---------------------------------------------------------------------------
# Decorated text format
#
# node  := ( <con> {ana=<topt>, mark=ok|err, syn=<topt>, dirty=[slot,...]} )
# con   := ? | nil | (num N) | (bool true|false)
#        | (var[m] x) | (lam[m,m] b t node) | (ap[m] node node) | (asc node t)
#        | (pair[m] node node) | (fst[m] node) | (snd[m] node)
#        | (cons[m] node node) | (case[m] node node b b node)
# topt  := none | <type> ; slots drawn from ana, syn, ann, asc in that order.

def _mark_str(m: Mark) -> str:
    return "ok" if m is OK else "err"


def _topt_str(t: TypeOpt) -> str:
    return "none" if t is None else print_type(t)


def print_decorated(p: DecExpr) -> str:
    con = p.con
    if isinstance(con, DHole):
        cs = "?"
    elif isinstance(con, DNil):
        cs = "nil"
    elif isinstance(con, DNum):
        cs = f"(num {con.value})"
    elif isinstance(con, DBool):
        cs = f"(bool {'true' if con.value else 'false'})"
    elif isinstance(con, DVar):
        cs = f"(var[{_mark_str(con.mark)}] {con.name})"
    elif isinstance(con, DLam):
        cs = (f"(lam[{_mark_str(con.arrow_mark)},{_mark_str(con.dom_mark)}] "
              f"{print_binding(con.binder)} {print_type(con.ann)} "
              f"{print_decorated(con.body)})")
    elif isinstance(con, DAp):
        cs = f"(ap[{_mark_str(con.mark)}] {print_decorated(con.fun)} {print_decorated(con.arg)})"
    elif isinstance(con, DAsc):
        cs = f"(asc {print_decorated(con.body)} {print_type(con.ty)})"
    elif isinstance(con, DPair):
        cs = f"(pair[{_mark_str(con.mark)}] {print_decorated(con.left)} {print_decorated(con.right)})"
    elif isinstance(con, DFst):
        cs = f"(fst[{_mark_str(con.mark)}] {print_decorated(con.item)})"
    elif isinstance(con, DSnd):
        cs = f"(snd[{_mark_str(con.mark)}] {print_decorated(con.item)})"
    elif isinstance(con, DCons):
        cs = f"(cons[{_mark_str(con.mark)}] {print_decorated(con.head)} {print_decorated(con.tail)})"
    elif isinstance(con, DCase):
        cs = (f"(case[{_mark_str(con.mark)}] {print_decorated(con.scrut)} "
              f"{print_decorated(con.nil_body)} {print_binding(con.hd_binder)} "
              f"{print_binding(con.tl_binder)} {print_decorated(con.cons_body)})")
    else:
        raise TypeError(f"not a decorated node: {con!r}")
    dirty = []
    if p.ana_dirty:
        dirty.append("ana")
    if p.syn_dirty:
        dirty.append("syn")
    if isinstance(con, DLam) and con.ann_dirty:
        dirty.append("ann")
    if isinstance(con, DAsc) and con.ty_dirty:
        dirty.append("asc")
    return (f"({cs} {{ana={_topt_str(p.ana)}, mark={_mark_str(p.mark)}, "
            f"syn={_topt_str(p.syn)}, dirty=[{','.join(dirty)}]}})")


def parse_decorated(text: str) -> DecExpr:
    r = _Reader(text)
    p = _read_decorated(r)
    r.done()
    return p


def _read_mark(tok, pos) -> Mark:
    if tok == "ok":
        return OK
    if tok == "err":
        return ERR
    raise ParseError(f"expected ok/err, found {tok!r}", pos)


def _read_head_marks(r: _Reader, n: int) -> list[Mark]:
    r.expect("[")
    marks = []
    for i in range(n):
        if i:
            r.expect(",")
        marks.append(_read_mark(*r.next()))
    r.expect("]")
    return marks


def _read_topt(r: _Reader) -> TypeOpt:
    if r.peek() == "none":
        r.next()
        return None
    return _read_type(r)


def _read_decorated(r: _Reader) -> DecExpr:
    r.expect("(")
    tok, pos = r.next()
    dirty_slots: set[str] = set()

    def node(con_builder):
        # con_builder(dirty_slots) is called after the {...} block is read so
        # surface dirty bits can be threaded into the constructor.
        r.expect("{")
        r.expect("ana")
        r.expect("=")
        ana = _read_topt(r)
        r.expect(",")
        r.expect("mark")
        r.expect("=")
        mark = _read_mark(*r.next())
        r.expect(",")
        r.expect("syn")
        r.expect("=")
        syn = _read_topt(r)
        r.expect(",")
        r.expect("dirty")
        r.expect("=")
        r.expect("[")
        while r.peek() != "]":
            slot, spos = r.next()
            if slot == ",":
                continue
            if slot not in ("ana", "syn", "ann", "asc"):
                raise ParseError(f"unknown dirty slot {slot!r}", spos)
            dirty_slots.add(slot)
        r.expect("]")
        r.expect("}")
        r.expect(")")
        return DecExpr(ana, "ana" in dirty_slots, mark, con_builder(),
                       syn, "syn" in dirty_slots)

    if tok == "?":
        return node(lambda: DHole())
    if tok == "nil":
        return node(lambda: DNil())
    if tok != "(":
        raise ParseError(f"expected a decorated node, found {tok!r}", pos)
    head, hpos = r.next()
    if head == "num":
        v = int(r.next()[0])
        r.expect(")")
        return node(lambda: DNum(v))
    if head == "bool":
        b = r.next()[0] == "true"
        r.expect(")")
        return node(lambda: DBool(b))
    if head == "var":
        (m,) = _read_head_marks(r, 1)
        name = r.next()[0]
        r.expect(")")
        return node(lambda: DVar(name, m))
    if head == "lam":
        m1, m2 = _read_head_marks(r, 2)
        b = _read_binding(r)
        ann = _read_type(r)
        body = _read_decorated(r)
        r.expect(")")
        return node(lambda: DLam(b, ann, "ann" in dirty_slots, m1, m2, body))
    if head == "ap":
        (m,) = _read_head_marks(r, 1)
        fun = _read_decorated(r)
        arg = _read_decorated(r)
        r.expect(")")
        return node(lambda: DAp(m, fun, arg))
    if head == "asc":
        body = _read_decorated(r)
        ty = _read_type(r)
        r.expect(")")
        return node(lambda: DAsc(body, ty, "asc" in dirty_slots))
    if head == "pair":
        (m,) = _read_head_marks(r, 1)
        left = _read_decorated(r)
        right = _read_decorated(r)
        r.expect(")")
        return node(lambda: DPair(m, left, right))
    if head in ("fst", "snd"):
        (m,) = _read_head_marks(r, 1)
        item = _read_decorated(r)
        r.expect(")")
        return node(lambda: DFst(m, item) if head == "fst" else DSnd(m, item))
    if head == "cons":
        (m,) = _read_head_marks(r, 1)
        hd = _read_decorated(r)
        tl = _read_decorated(r)
        r.expect(")")
        return node(lambda: DCons(m, hd, tl))
    if head == "case":
        (m,) = _read_head_marks(r, 1)
        scrut = _read_decorated(r)
        nil_body = _read_decorated(r)
        hb = _read_binding(r)
        tb = _read_binding(r)
        cons_body = _read_decorated(r)
        r.expect(")")
        return node(lambda: DCase(m, scrut, nil_body, hb, tb, cons_body))
    raise ParseError(f"unknown form {head!r}", hpos)
