"""incmark: an incremental bidirectional type checker for a gradually-typed
lambda calculus with holes."""

from .syntax import (
    Arrow, Bool, ListOf, Num, Prod, Type, Unknown, UNKNOWN, NUM, BOOL,
    Mark, OK, ERR,
    BareExpr, Hole, Var, Lam, Ap, Asc, NumLit, BoolLit, Pair, Fst, Snd, Nil,
    Cons, Case, HOLE, NIL,
    DecExpr, erase, strip_dirty, expr_equal, is_quiescent, count_errors,
    parse_expr, print_expr, parse_type, print_type,
    parse_decorated, print_decorated,
)
from .actions import (
    LocalizedAction, bare_perform, bare_perform_all, action_sequence_between,
    parse_trace, format_trace, parse_action_line, format_action,
    PathInvalid, ActionInapplicable,
)
from .oracle import mark_program, mark_synthetic, mark_analytic, is_well_marked, is_well_formed
from .engine import Doc, load_program, StepReport, RunStats

__all__ = [name for name in dir() if not name.startswith("_")]
