"""Deterministic call-by-name small-step evaluator and observations.

``step`` decomposes a closed term into an evaluation context around
the unique redex by an iterative context search; ``step_rd`` is an
independent recursive-descent implementation used to cross-check
determinism.  Reduction ignores type annotations entirely; ``erase``
strips annotations and ascriptions so the reduction rules apply to
the bare grammar.

Redexes: projections of pairs, case-of-in, beta, unfold-of-fold,
prev with a non-empty substitution, prev-of-next, next<*>next,
unbox-of-box, boxp with a non-empty substitution, boxp-of-in, and the
delta rules for saturated primitives on numerals.

Evaluation contexts: hole, succ E, fst E, snd E, case E, E t,
unfold E, prev E, E <*> t, v <*> E, unbox E, boxp E, and primitive
arguments left to right.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

from .errors import FuelExhaustedError, StuckError
from .syntax import (
    Abort,
    App,
    Ascribe,
    Box,
    BoxI,
    BoxSum,
    Case,
    Fold,
    In1,
    In2,
    Lam,
    LaterApp,
    Next,
    Pair,
    Prev,
    Prim,
    Proj1,
    Proj2,
    Succ,
    Sum,
    Term,
    Unbox,
    Unfold,
    UnitVal,
    Var,
    Zero,
    numeral,
    numeral_value,
    subst,
)

# Substitution and term traversals recurse over deep spines (numerals,
# long reduction results); the default CPython limit is far too small.
sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))

DEFAULT_FUEL = 10**6


# ---------------------------------------------------------------------------
# Values and outcomes


_VALUE_CLASSES = frozenset(
    (Zero, UnitVal, Pair, In1, In2, Lam, Fold, Next, BoxI)
)


def is_value(t: Term) -> bool:
    c = t.__class__
    if c in _VALUE_CLASSES:
        return True
    if c is Succ:
        return numeral_value(t) is not None
    return False


@dataclass(frozen=True)
class EvalOutcome:
    term: Term
    steps: int


class Value(EvalOutcome):
    pass


class FuelExhausted(EvalOutcome):
    pass


class Stuck(EvalOutcome):
    """Irreducible non-value; unreachable for well-typed closed input."""


# ---------------------------------------------------------------------------
# Annotation erasure


def erase(t: Term) -> Term:
    """Strip ascriptions and all type annotations.

    Subtrees that are already bare are returned unchanged, so erasing
    an erased term is the identity (and preserves sharing).
    """
    match t:
        case Var(_) | Zero() | UnitVal():
            return t
        case Ascribe(b, _):
            return erase(b)
        case Succ(b):
            b2 = erase(b)
            return t if b2 is b else Succ(b2)
        case Pair(l, r):
            l2, r2 = erase(l), erase(r)
            return t if l2 is l and r2 is r else Pair(l2, r2)
        case Proj1(b):
            b2 = erase(b)
            return t if b2 is b else Proj1(b2)
        case Proj2(b):
            b2 = erase(b)
            return t if b2 is b else Proj2(b2)
        case Abort(a, b):
            b2 = erase(b)
            return t if a is None and b2 is b else Abort(None, b2)
        case In1(a, b):
            b2 = erase(b)
            return t if a is None and b2 is b else In1(None, b2)
        case In2(a, b):
            b2 = erase(b)
            return t if a is None and b2 is b else In2(None, b2)
        case Case(s, x1, a1, x2, a2):
            s2, a1n, a2n = erase(s), erase(a1), erase(a2)
            if s2 is s and a1n is a1 and a2n is a2:
                return t
            return Case(s2, x1, a1n, x2, a2n)
        case Lam(x, a, b):
            b2 = erase(b)
            return t if a is None and b2 is b else Lam(x, None, b2)
        case App(f, a):
            f2, a2 = erase(f), erase(a)
            return t if f2 is f and a2 is a else App(f2, a2)
        case Fold(a, b):
            b2 = erase(b)
            return t if a is None and b2 is b else Fold(None, b2)
        case Unfold(b):
            b2 = erase(b)
            return t if b2 is b else Unfold(b2)
        case Next(b):
            b2 = erase(b)
            return t if b2 is b else Next(b2)
        case Prev(sig, b):
            sig2, b2 = _erase_sig(sig), erase(b)
            return t if sig2 is sig and b2 is b else Prev(sig2, b2)
        case LaterApp(f, a):
            f2, a2 = erase(f), erase(a)
            return t if f2 is f and a2 is a else LaterApp(f2, a2)
        case BoxI(sig, b):
            sig2, b2 = _erase_sig(sig), erase(b)
            return t if sig2 is sig and b2 is b else BoxI(sig2, b2)
        case Unbox(b):
            b2 = erase(b)
            return t if b2 is b else Unbox(b2)
        case BoxSum(sig, b):
            sig2, b2 = _erase_sig(sig), erase(b)
            return t if sig2 is sig and b2 is b else BoxSum(sig2, b2)
        case Prim(name, args):
            args2 = tuple(erase(a) for a in args)
            return t if all(x is y for x, y in zip(args2, args)) else Prim(name, args2)
        case _:
            raise TypeError(f"not a term: {t!r}")


def _erase_sig(sig):
    out = tuple((x, erase(u)) for x, u in sig)
    if all(u2 is u for (_, u2), (_, u) in zip(out, sig)):
        return sig
    return out


# ---------------------------------------------------------------------------
# Root reduction rules

_DELTA = {"addN": lambda a, b: a + b, "mulN": lambda a, b: a * b}


def _c_proj1(t):
    b = t.body
    return b.left if b.__class__ is Pair else None


def _c_proj2(t):
    b = t.body
    return b.right if b.__class__ is Pair else None


def _c_case(t):
    s = t.scrut
    if s.__class__ is In1:
        return subst(t.arm1, {t.var1: s.body})
    if s.__class__ is In2:
        return subst(t.arm2, {t.var2: s.body})
    return None


def _c_app(t):
    f = t.fun
    if f.__class__ is Lam:
        return subst(f.body, {f.var: t.arg})
    return None


def _c_unfold(t):
    b = t.body
    return b.body if b.__class__ is Fold else None


def _c_prev(t):
    if t.subst:
        return Prev((), subst(t.body, dict(t.subst)))
    b = t.body
    return b.body if b.__class__ is Next else None


def _c_laterapp(t):
    if t.fun.__class__ is Next and t.arg.__class__ is Next:
        return Next(App(t.fun.body, t.arg.body))
    return None


def _c_unbox(t):
    b = t.body
    return subst(b.body, dict(b.subst)) if b.__class__ is BoxI else None


def _c_boxsum(t):
    if t.subst:
        return BoxSum((), subst(t.body, dict(t.subst)))
    b = t.body
    if b.__class__ is In1:
        return In1(_box_sum_ann(b.annot), BoxI((), b.body))
    if b.__class__ is In2:
        return In2(_box_sum_ann(b.annot), BoxI((), b.body))
    return None


def _c_prim(t):
    vals = []
    for a in t.args:
        n = numeral_value(a)
        if n is None:
            return None
        vals.append(n)
    return numeral(_DELTA[t.name](*vals))


_CONTRACT = {
    Proj1: _c_proj1,
    Proj2: _c_proj2,
    Case: _c_case,
    App: _c_app,
    Unfold: _c_unfold,
    Prev: _c_prev,
    LaterApp: _c_laterapp,
    Unbox: _c_unbox,
    BoxSum: _c_boxsum,
    Prim: _c_prim,
}


def _contract(t: Term):
    """Apply a reduction rule at the root, or return None."""
    h = _CONTRACT.get(t.__class__)
    return h(t) if h is not None else None


def _box_sum_ann(ann):
    if isinstance(ann, Sum):
        return Sum(Box(ann.left), Box(ann.right))
    return None


# ---------------------------------------------------------------------------
# Context search (primary step implementation)


def step(t: Term):
    """One call-by-name step, or None if no decomposition exists.

    None on a value means normal form; None on a non-value means the
    term is stuck (ill-typed or open).
    """
    frames = []  # (parent node, field name) or (parent, ("args", i))
    cur = t
    while True:
        red = _contract(cur)
        if red is not None:
            return _plug(frames, red)
        desc = _descend(cur)
        if desc is None:
            return None
        frames.append((cur, desc))
        cur = cur.args[desc[1]] if isinstance(desc, tuple) else getattr(cur, desc)


def _d_body(t):
    return None if is_value(t.body) else "body"


def _d_case(t):
    return None if is_value(t.scrut) else "scrut"


def _d_app(t):
    return None if is_value(t.fun) else "fun"


def _d_binder(t):
    if t.subst:
        return None  # non-empty substitution is a redex, not a context
    return None if is_value(t.body) else "body"


def _d_laterapp(t):
    if not is_value(t.fun):
        return "fun"
    if not is_value(t.arg):
        return "arg"
    return None


def _d_prim(t):
    for i, a in enumerate(t.args):
        if not is_value(a):
            return ("args", i)
    return None


_DESCEND = {
    Succ: _d_body,
    Proj1: _d_body,
    Proj2: _d_body,
    Unfold: _d_body,
    Unbox: _d_body,
    Case: _d_case,
    App: _d_app,
    Prev: _d_binder,
    BoxSum: _d_binder,
    LaterApp: _d_laterapp,
    Prim: _d_prim,
}


def _descend(t: Term):
    """The evaluation-context position at the root of t: the unique
    non-value child the strategy evaluates next, if any."""
    h = _DESCEND.get(t.__class__)
    return h(t) if h is not None else None


# Frames only ever hold evaluation-context nodes, so the rebuild table
# is small.  The binder frames always carry an empty substitution.
_REBUILD = {
    (Succ, "body"): lambda p, c: Succ(c),
    (Proj1, "body"): lambda p, c: Proj1(c),
    (Proj2, "body"): lambda p, c: Proj2(c),
    (Unfold, "body"): lambda p, c: Unfold(c),
    (Unbox, "body"): lambda p, c: Unbox(c),
    (Prev, "body"): lambda p, c: Prev((), c),
    (BoxSum, "body"): lambda p, c: BoxSum((), c),
    (Case, "scrut"): lambda p, c: Case(c, p.var1, p.arm1, p.var2, p.arm2),
    (App, "fun"): lambda p, c: App(c, p.arg),
    (LaterApp, "fun"): lambda p, c: LaterApp(c, p.arg),
    (LaterApp, "arg"): lambda p, c: LaterApp(p.fun, c),
}


def _set_child(parent: Term, fld, child: Term) -> Term:
    if isinstance(fld, tuple):
        args = list(parent.args)
        args[fld[1]] = child
        return Prim(parent.name, tuple(args))
    return _REBUILD[(parent.__class__, fld)](parent, child)


def _plug(frames, t: Term) -> Term:
    for parent, fld in reversed(frames):
        t = _set_child(parent, fld, t)
    return t


def _run(t: Term, fuel: int):
    """Drive the step relation to a normal form without re-searching
    from the root after every contraction.

    Performs exactly the call-by-name reduction sequence of ``step``
    (the context stack is kept across contractions) and returns
    (final term, steps, outcome class).
    """
    frames = []
    steps = 0
    cur = t
    contract = _CONTRACT.get
    descend = _DESCEND.get
    while True:
        h = contract(cur.__class__)
        red = h(cur) if h is not None else None
        if red is not None:
            if steps >= fuel:
                return _plug(frames, cur), steps, FuelExhausted
            steps += 1
            cur = red
            continue
        h = descend(cur.__class__)
        desc = h(cur) if h is not None else None
        if desc is not None:
            frames.append((cur, desc))
            cur = cur.args[desc[1]] if isinstance(desc, tuple) else getattr(cur, desc)
            continue
        if not is_value(cur):
            return _plug(frames, cur), steps, Stuck
        if not frames:
            return cur, steps, Value
        parent, fld = frames.pop()
        cur = _set_child(parent, fld, cur)


# ---------------------------------------------------------------------------
# Recursive descent (independent cross-check implementation)


def step_rd(t: Term):
    """One step by structural recursion on the evaluation-context grammar."""
    red = _contract(t)
    if red is not None:
        return red
    match t:
        case Succ(b):
            if numeral_value(t) is not None:
                return None
            r = step_rd(b)
            return None if r is None else Succ(r)
        case Proj1(b):
            r = step_rd(b)
            return None if r is None else Proj1(r)
        case Proj2(b):
            r = step_rd(b)
            return None if r is None else Proj2(r)
        case Case(s, x1, a1, x2, a2):
            r = step_rd(s)
            return None if r is None else Case(r, x1, a1, x2, a2)
        case App(f, a):
            r = step_rd(f)
            return None if r is None else App(r, a)
        case Unfold(b):
            r = step_rd(b)
            return None if r is None else Unfold(r)
        case Prev((), b):
            r = step_rd(b)
            return None if r is None else Prev((), r)
        case LaterApp(f, a):
            if not is_value(f):
                r = step_rd(f)
                return None if r is None else LaterApp(r, a)
            if not is_value(a):
                r = step_rd(a)
                return None if r is None else LaterApp(f, r)
            return None
        case Unbox(b):
            r = step_rd(b)
            return None if r is None else Unbox(r)
        case BoxSum((), b):
            r = step_rd(b)
            return None if r is None else BoxSum((), r)
        case Prim(name, args):
            for i, a in enumerate(args):
                if not is_value(a):
                    r = step_rd(a)
                    if r is None:
                        return None
                    out = list(args)
                    out[i] = r
                    return Prim(name, tuple(out))
            return None
        case _:
            return None


# ---------------------------------------------------------------------------
# Drivers


def eval_term(t: Term, fuel: int = DEFAULT_FUEL, pre_erase: bool = True) -> EvalOutcome:
    """Iterate step until a value or the fuel runs out."""
    if pre_erase:
        t = erase(t)
    out, steps, cls = _run(t, fuel)
    return cls(out, steps)


def trace(t: Term, max_steps: int = DEFAULT_FUEL, pre_erase: bool = True):
    """The deterministic reduction sequence prefix, starting at t."""
    if pre_erase:
        t = erase(t)
    out = [t]
    while len(out) <= max_steps:
        nxt = step(t)
        if nxt is None:
            break
        t = nxt
        out.append(t)
    return out


def _force_value(t: Term, fuel: int, pre_erase: bool = True) -> Term:
    out = eval_term(t, fuel, pre_erase)
    if isinstance(out, Stuck):
        from .frontend import pretty

        raise StuckError(f"stuck term: {pretty(out.term)}")
    if isinstance(out, FuelExhausted):
        raise FuelExhaustedError(f"no value after {out.steps} steps")
    return out.term


def observe_nat(t: Term, fuel: int = DEFAULT_FUEL, pre_erase: bool = True) -> int:
    """Evaluate a closed term of type Nat and decode the numeral."""
    v = _force_value(t, fuel, pre_erase)
    n = numeral_value(v)
    if n is None:
        from .frontend import pretty

        raise StuckError(f"value is not a numeral: {pretty(v)}")
    return n


def take_stream(t: Term, n: int, fuel: int = DEFAULT_FUEL):
    """First n elements of a closed guarded stream of naturals.

    A #-ed (coinductive) stream is unboxed automatically.  Heads are
    read as fst (unfold s); the closed-term prev moves to the tail.
    """
    cur = _force_value(erase(t), fuel, pre_erase=False)
    if isinstance(cur, BoxI):
        cur = _force_value(Unbox(cur), fuel, pre_erase=False)
    out = []
    for _ in range(n):
        out.append(observe_nat(Proj1(Unfold(cur)), fuel, pre_erase=False))
        cur = _force_value(Prev((), Proj2(Unfold(cur))), fuel, pre_erase=False)
    return out


def observe_conat(t: Term, limit: int, fuel: int = DEFAULT_FUEL):
    """Decode a closed guarded conatural: (n, finished).

    finished is False when the budget ran out with the conatural still
    unfolding (e.g. infinity).
    """
    cur = erase(t)
    if isinstance(_force_value(cur, fuel, pre_erase=False), BoxI):
        cur = Unbox(cur)
    n = 0
    while n < limit:
        v = _force_value(Unfold(cur), fuel, pre_erase=False)
        if isinstance(v, In1):
            return n, True
        if not isinstance(v, In2):
            raise StuckError("conatural unfolding is not an injection")
        cur = Prev((), v.body)
        n += 1
    return n, False
