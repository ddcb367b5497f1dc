"""Stress benchmark: build a tower of nested mergesort layers by edit trace,
apply randomized change+revert edits throughout it, and compare incremental
re-checking against from-scratch re-checking on a zipper-maintained bare tree.

Tower shape (documented here because only its binding structure matters):
each layer n introduces three let-bindings, encoded as ((lam f ty body) ap
impl):

    split_n : (list num) -> (prod (list num) (list num))
    merge_n : (prod (list num) (list num)) -> (list num)
    mergesort : (list num) -> (list num)          -- shadowed by every layer

split_n and merge_n carry the layer number in their name; mergesort reuses one
name so each layer shadows the previous. Every implementation reuses the local
names x/h/t, and each sort body calls one split copy and one merge copy chosen
uniformly at random among those in scope. Recursive calls are ascribed holes
(asc ? ty) since the language has no recursion construct. Children of each
node are constructed in random order, so binders frequently capture
already-built occurrences.

Timing uses time.perf_counter_ns (no portable cycle counter exists here);
"moving" to an edit site is untimed, matching a cursor-based editor.
"""

from __future__ import annotations

import random
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

from . import actions as A
from . import syntax as S
from .engine import Doc
from .oracle import Zipper, mark_program
from .syntax import Arrow, ListOf, Prod, NUM

LT = ListOf(NUM)
PT = Prod(LT, LT)
SPLIT_TY = Arrow(LT, PT)
MERGE_TY = Arrow(PT, LT)
SORT_TY = Arrow(LT, LT)


class BenchError(RuntimeError):
    pass


@dataclass
class BenchConfig:
    layers: int = 20
    edit_count: int = 200  # change+revert pairs; rows = 2 * edit_count
    seed: int = 7
    timer: str = "monotonic-ns"
    output_path: Optional[str] = None

    def __post_init__(self):
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if self.edit_count < 0:
            raise ValueError("edit_count must be >= 0")


@dataclass
class EditRow:
    kind: str
    inc_ns: int
    scratch_ns: int
    node_count: int
    steps: int
    visits: int


@dataclass
class BenchReport:
    config: BenchConfig
    rows: list[EditRow] = field(default_factory=list)
    total_inc_ns: int = 0
    total_scratch_ns: int = 0

    @property
    def speedup(self) -> float:
        return self.total_scratch_ns / self.total_inc_ns if self.total_inc_ns else 0.0

    def to_csv(self) -> str:
        lines = ["edit_kind,inc_time,scratch_time,node_count,steps"]
        for r in self.rows:
            lines.append(f"{r.kind},{r.inc_ns},{r.scratch_ns},{r.node_count},{r.steps}")
        lines.append(f"# total_speedup={self.speedup:.4f}")
        lines.append(f"# timer={self.config.timer}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# tower program

def _conses(*items: S.BareExpr, tail: S.BareExpr = S.NIL) -> S.BareExpr:
    e = tail
    for item in reversed(items):
        e = S.Cons(item, e)
    return e


# Case-ladder depth for the three implementations: lists up to LADDER elements
# are handled by explicit cases before recursing, as a real mergesort over a
# language without integer comparison would spell out its base cases.
LADDER = 6


def _hname(i: int) -> str:
    return "h" if i == 1 else f"h{i}"


def _tname(i: int) -> str:
    return "t" if i == 1 else f"t{i}"


def _heads(upto: int, step: int = 1, start: int = 1) -> list[S.BareExpr]:
    return [S.Var(_hname(i)) for i in range(start, upto + 1, step)]


def _ladder(scrut0: S.BareExpr, base, deepest: S.BareExpr) -> S.BareExpr:
    """case scrut0 of nil -> base(0) | h::t -> case t of nil -> base(1) | ...,
    with `deepest` as the final cons branch at depth LADDER."""
    body = deepest
    for k in range(LADDER, 1, -1):
        body = S.Case(S.Var(_tname(k - 1)), base(k - 1), _hname(k), _tname(k), body)
    return S.Case(scrut0, base(0), "h", "t", body)


def _split_impl() -> S.BareExpr:
    # split xs into two halves, alternating elements; recursion via ascribed hole
    v = S.Var
    def base(k):
        return S.Pair(_conses(*_heads(k, 2, 1)), _conses(*_heads(k, 2, 2)))
    rebuild = S.Pair(_conses(*_heads(LADDER, 2, 1), tail=S.Fst(v("r"))),
                     _conses(*_heads(LADDER, 2, 2), tail=S.Snd(v("r"))))
    deepest = S.Ap(S.Lam("r", PT, rebuild),
                   S.Ap(S.Asc(S.HOLE, SPLIT_TY), v(_tname(LADDER))))
    return S.Lam("x", LT, _ladder(v("x"), base, deepest))


def _merge_impl() -> S.BareExpr:
    # interleave both halves; no comparison operators exist in the language,
    # so ordering is by construction
    v = S.Var
    def base(k):
        if k == 0:
            return S.Snd(v("p"))
        return _conses(*_heads(k), tail=v("q"))
    rec = S.Ap(S.Asc(S.HOLE, MERGE_TY), S.Pair(v(_tname(LADDER)), v("q")))
    deepest = _conses(*_heads(LADDER), tail=rec)
    ladder = _ladder(S.Fst(v("p")), base, deepest)
    with_q = S.Ap(S.Lam("q", LT, ladder), S.Snd(v("p")))
    return S.Lam("p", PT, with_q)


def _sort_impl(split_name: str, merge_name: str) -> S.BareExpr:
    v = S.Var
    def sorted_half(proj):
        return S.Ap(S.Asc(S.HOLE, SORT_TY), proj(S.Ap(v(split_name), v("x"))))
    merged = S.Ap(v(merge_name), S.Pair(sorted_half(S.Fst), sorted_half(S.Snd)))
    def base(k):
        return _conses(*_heads(k))
    return S.Lam("x", LT, _ladder(v("x"), base, merged))


def _let(name: str, ty: S.Type, impl: S.BareExpr, body: S.BareExpr) -> S.BareExpr:
    return S.Ap(S.Lam(name, ty, body), impl)


def tower_program(layers: int, rng: random.Random) -> S.BareExpr:
    """The complete tower as a bare expression (innermost layer last)."""
    body: S.BareExpr = S.Ap(S.Var("mergesort"), S.Cons(S.NumLit(1), S.NIL))
    for n in range(layers, 0, -1):
        split_i = rng.randrange(1, n + 1)
        merge_j = rng.randrange(1, n + 1)
        sort = _sort_impl(f"split_{split_i}", f"merge_{merge_j}")
        body = _let("mergesort", SORT_TY, sort, body)
        body = _let(f"merge_{n}", MERGE_TY, _merge_impl(), body)
        body = _let(f"split_{n}", SPLIT_TY, _split_impl(), body)
    return body


def _build_trace(e: S.BareExpr, path: tuple, rng: random.Random,
                 out: list[A.LocalizedAction]) -> None:
    """Emit actions constructing e at a hole, children in random order."""
    def at(a):
        out.append(A.LocalizedAction(a, path))

    tasks = []
    if isinstance(e, S.Hole):
        return
    if isinstance(e, S.Var):
        at(A.InsertVar(e.name))
    elif isinstance(e, S.NumLit):
        at(A.InsertNumLit(e.value))
    elif isinstance(e, S.BoolLit):
        at(A.InsertBoolLit(e.value))
    elif isinstance(e, S.Nil):
        at(A.InsertNil())
    elif isinstance(e, S.Lam):
        at(A.WrapFun())
        tasks.append(lambda: at(A.SetAnn(e.ann)))
        if e.binder is not None:
            tasks.append(lambda: at(A.InsertBinder(e.binder)))
        tasks.append(lambda: _build_trace(e.body, path + (1,), rng, out))
    elif isinstance(e, S.Ap):
        at(A.WrapAp(1))
        tasks.append(lambda: _build_trace(e.fun, path + (1,), rng, out))
        tasks.append(lambda: _build_trace(e.arg, path + (2,), rng, out))
    elif isinstance(e, S.Asc):
        at(A.WrapAsc())
        tasks.append(lambda: at(A.SetAsc(e.ty)))
        tasks.append(lambda: _build_trace(e.body, path + (1,), rng, out))
    elif isinstance(e, S.Pair):
        at(A.WrapPair(1))
        tasks.append(lambda: _build_trace(e.left, path + (1,), rng, out))
        tasks.append(lambda: _build_trace(e.right, path + (2,), rng, out))
    elif isinstance(e, S.Fst):
        at(A.WrapFst())
        tasks.append(lambda: _build_trace(e.item, path + (1,), rng, out))
    elif isinstance(e, S.Snd):
        at(A.WrapSnd())
        tasks.append(lambda: _build_trace(e.item, path + (1,), rng, out))
    elif isinstance(e, S.Cons):
        at(A.WrapCons(1))
        tasks.append(lambda: _build_trace(e.head, path + (1,), rng, out))
        tasks.append(lambda: _build_trace(e.tail, path + (2,), rng, out))
    elif isinstance(e, S.Case):
        at(A.WrapCase(1))
        if e.hd_binder is not None:
            tasks.append(lambda: at(A.InsertCaseBinder("hd", e.hd_binder)))
        if e.tl_binder is not None:
            tasks.append(lambda: at(A.InsertCaseBinder("tl", e.tl_binder)))
        tasks.append(lambda: _build_trace(e.scrut, path + (1,), rng, out))
        tasks.append(lambda: _build_trace(e.nil_body, path + (2,), rng, out))
        tasks.append(lambda: _build_trace(e.cons_body, path + (3,), rng, out))
    else:
        raise TypeError(f"not a bare expression: {e!r}")
    rng.shuffle(tasks)
    for task in tasks:
        task()


def gen_tower(layers: int, seed: int) -> list[A.LocalizedAction]:
    """A deterministic action trace that builds the tower from a single hole."""
    rng = random.Random(seed)
    program = tower_program(layers, rng)
    trace: list[A.LocalizedAction] = []
    _build_trace(program, (), rng, trace)
    return trace


# ---------------------------------------------------------------------------
# randomized change+revert edits

@dataclass(frozen=True)
class EditPair:
    kind: str
    path: tuple
    change: tuple
    revert: tuple


def gen_random_edits(root: S.BareExpr, count: int, seed: int) -> list[EditPair]:
    """Seeded change+revert pairs over a complete program. Each pair leaves the
    program exactly as it found it, so all pairs are generated against the same
    tree."""
    rng = random.Random(seed)
    paths = A.all_paths_of(root)
    pairs: list[EditPair] = []
    while len(pairs) < count:
        path = rng.choice(paths)
        target = A.resolve_path(root, path)
        kind = rng.choice(["leaf", "binder", "wrap", "unwrap"])
        if kind == "leaf":
            if isinstance(target, S.Var):
                change = (A.Delete(), A.InsertNumLit(9))
                revert = (A.Delete(), A.InsertVar(target.name))
            elif isinstance(target, S.NumLit):
                change = (A.Delete(), A.InsertVar("x"))
                revert = (A.Delete(), A.InsertNumLit(target.value))
            elif isinstance(target, S.Nil):
                change = (A.Delete(), A.InsertBoolLit(True))
                revert = (A.Delete(), A.InsertNil())
            elif isinstance(target, S.Hole):
                change = (A.InsertNumLit(3),)
                revert = (A.Delete(),)
            else:
                continue
        elif kind == "binder":
            if isinstance(target, S.Lam) and target.binder is not None:
                change = (A.DeleteBinder(), A.InsertBinder("tmp_" + target.binder))
                revert = (A.DeleteBinder(), A.InsertBinder(target.binder))
            elif isinstance(target, S.Case) and target.hd_binder is not None:
                change = (A.DeleteCaseBinder("hd"), A.InsertCaseBinder("hd", "tmp_h"))
                revert = (A.DeleteCaseBinder("hd"), A.InsertCaseBinder("hd", target.hd_binder))
            else:
                continue
        elif kind == "wrap":
            wrap = rng.choice([
                (A.WrapAp(1), A.Unwrap(1)), (A.WrapAp(2), A.Unwrap(2)),
                (A.WrapAsc(), A.Unwrap(1)), (A.WrapFun(), A.Unwrap(1)),
                (A.WrapPair(1), A.Unwrap(1)), (A.WrapCons(2), A.Unwrap(2)),
                (A.WrapFst(), A.Unwrap(1)),
            ])
            change = (wrap[0],)
            revert = (wrap[1],)
        else:  # unwrap a single-child constructor (no subexpressions deleted)
            if isinstance(target, S.Asc):
                change = (A.Unwrap(1),)
                revert = (A.WrapAsc(), A.SetAsc(target.ty))
            elif isinstance(target, (S.Fst, S.Snd)):
                change = (A.Unwrap(1),)
                revert = ((A.WrapFst() if isinstance(target, S.Fst) else A.WrapSnd()),)
            elif isinstance(target, S.Lam):
                rebuild = [A.WrapFun(), A.SetAnn(target.ann)]
                if target.binder is not None:
                    rebuild.append(A.InsertBinder(target.binder))
                change = (A.Unwrap(1),)
                revert = tuple(rebuild)
            else:
                continue
        pairs.append(EditPair(kind, path, change, revert))
    return pairs


# ---------------------------------------------------------------------------
# runner

def build_tower_doc(layers: int, seed: int) -> Doc:
    doc = Doc(S.HOLE)
    for la in gen_tower(layers, seed):
        doc.apply_action(la)
        doc.run_to_quiescence()
    return doc


def run_benchmark(cfg: BenchConfig, progress=None) -> BenchReport:
    sys.setrecursionlimit(200000)
    report = BenchReport(cfg)
    doc = build_tower_doc(cfg.layers, cfg.seed)
    root = S.erase(doc.snapshot())
    zipper = Zipper(root)
    pairs = gen_random_edits(root, cfg.edit_count, cfg.seed + 1)
    clock = time.perf_counter_ns

    for i, pair in enumerate(pairs):
        for phase, acts in (("", pair.change), ("-revert", pair.revert)):
            # move (untimed)
            node = doc.resolve(pair.path)
            zipper.move_to(pair.path)
            steps0 = doc.steps_total
            visits0 = doc.visits
            t0 = clock()
            for a in acts:
                node = doc.apply_simple(node, a)
            doc.run_to_quiescence()
            t1 = clock()
            for a in acts:
                zipper.edit(a)
            bare = zipper.root()
            scratch = mark_program(bare)
            t2 = clock()
            snap = doc.snapshot()
            if S.strip_dirty(snap) != scratch:
                raise BenchError(
                    f"incremental and from-scratch results differ on pair {i}{phase} "
                    f"({pair.kind} at {A.format_path(pair.path)})")
            report.rows.append(EditRow(pair.kind + phase, t1 - t0, t2 - t1,
                                       doc.node_count, doc.steps_total - steps0,
                                       doc.visits - visits0))
            report.total_inc_ns += t1 - t0
            report.total_scratch_ns += t2 - t1
        if progress is not None:
            progress(i + 1, len(pairs))
    if cfg.output_path:
        with open(cfg.output_path, "w") as f:
            f.write(report.to_csv())
    return report
