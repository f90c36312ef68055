import pytest

import corpus
from glam.bde import (
    HeadOp,
    HeadVar,
    TailCall,
    TailVar,
    compile_bde,
    host_const,
    host_nats,
    host_toggle,
    host_zeros,
    oracle_eval,
    parse_bde,
    validate_bde,
)
from glam.errors import BadVariable, BdeError, ForwardReference, ParseError, UnknownSymbol
from glam.machine import erase, take_stream
from glam.syntax import App, Next, alpha_eq
from glam.typecheck import check

SRC = """
bde zeros(0) { head = 0; tail = zeros; }
bde five(0)  { head = 5; tail = zeros; }
bde plus(2)  { head = x1 + x2; tail = plus(z1, z2); }
bde times(2) { head = x1 * x2; tail = plus(times(z1, y2), times(x1, z2)); }
"""

DEFS = parse_bde(SRC)


def _compiled(name):
    return compile_bde(DEFS, name)


def _toggle():
    return corpus.term("toggle")


# ---------------------------------------------------------------------------
# Parsing


def test_parse_zeros_block():
    d = DEFS[0]
    assert d.name == "zeros" and d.arity == 0
    assert d.head.n == 0
    assert d.tail == TailCall("zeros", ())


def test_parse_plus_block():
    d = next(x for x in DEFS if x.name == "plus")
    assert d.arity == 2
    assert d.head == HeadOp("addN", HeadVar("x1"), HeadVar("x2"))
    assert d.tail == TailCall("plus", (TailVar("z", 1), TailVar("z", 2)))


def test_parse_times_block():
    d = next(x for x in DEFS if x.name == "times")
    assert d.head == HeadOp("mulN", HeadVar("x1"), HeadVar("x2"))
    assert d.tail == TailCall(
        "plus",
        (
            TailCall("times", (TailVar("z", 1), TailVar("y", 2))),
            TailCall("times", (TailVar("x", 1), TailVar("z", 2))),
        ),
    )
    assert d.deps == ("plus",)


def test_parse_syntax_error():
    with pytest.raises(ParseError):
        parse_bde("bde broken(1) { head = ; }")


# ---------------------------------------------------------------------------
# Validation


def test_validate_ok():
    validate_bde(DEFS)


def test_validate_bad_variable():
    defs = parse_bde("bde f(2) { head = x1; tail = w3; }")
    with pytest.raises(BadVariable):
        validate_bde(defs)
    defs = parse_bde("bde f(2) { head = x1; tail = z3; }")
    with pytest.raises(BadVariable):
        validate_bde(defs)


def test_validate_head_variable_discipline():
    defs = parse_bde("bde f(1) { head = y1; tail = z1; }")
    with pytest.raises(BadVariable):
        validate_bde(defs)


def test_validate_forward_reference():
    defs = parse_bde(
        "bde f(1) { head = x1; tail = g(z1); }\n"
        "bde g(1) { head = x1; tail = z1; }"
    )
    with pytest.raises(ForwardReference):
        validate_bde(defs)


def test_validate_arity_mismatch():
    defs = parse_bde("bde zeros(0) { head = 0; tail = zeros; }\n"
                     "bde f(1) { head = x1; tail = zeros(z1); }")
    with pytest.raises(BdeError):
        validate_bde(defs)


def test_validate_plus_requires_earlier_definition():
    defs = parse_bde("bde f(2) { head = x1; tail = z1 + z2; }")
    with pytest.raises(UnknownSymbol):
        validate_bde(defs)


# ---------------------------------------------------------------------------
# Compilation


def test_compiled_zeros_alpha_eq_prelude_zeros():
    got = erase(_compiled("zeros").guarded)
    want = erase(corpus.PRELUDE.lookup("zeros").resolved())
    assert alpha_eq(got, want)


def test_compiled_types():
    for name, k in (("zeros", 0), ("five", 0), ("plus", 2), ("times", 2)):
        out = _compiled(name)
        check({}, out.guarded, out.guarded_type)
        check({}, out.lifted, out.lifted_type)
        assert corpus.glam_arity(out.guarded_type) == k


def test_compiled_plus_values():
    t = App(App(_compiled("plus").guarded, _toggle()), _toggle())
    assert take_stream(t, 6) == [2, 0, 2, 0, 2, 0]


def test_compiled_times_values():
    t = App(App(_compiled("times").guarded, _toggle()), _toggle())
    assert take_stream(t, 6) == [1, 0, 2, 0, 3, 0]


def test_compiled_constant_stream():
    assert take_stream(_compiled("five").guarded, 4) == [5, 0, 0, 0]


def test_lifted_term_runs_on_boxed_streams():
    out = _compiled("plus")
    t = App(App(out.lifted, corpus.term("box toggle")), corpus.term("box toggle"))
    assert take_stream(t, 4) == [2, 0, 2, 0]


# ---------------------------------------------------------------------------
# Oracle


def test_oracle_zeros():
    assert oracle_eval(DEFS, "zeros", [], 3) == [0, 0, 0]


def test_oracle_plus():
    assert oracle_eval(DEFS, "plus", [host_toggle(), host_toggle()], 4) == [2, 0, 2, 0]


def test_oracle_times_convolution():
    assert oracle_eval(DEFS, "times", [host_toggle(), host_toggle()], 5) == [1, 0, 2, 0, 3]
    # convolution of nats with ones: partial sums 0,1,3,6,...
    ones = host_const(1)
    assert oracle_eval(DEFS, "times", [host_nats(), ones], 5) == [0, 1, 3, 6, 10]


def test_oracle_arity_check():
    with pytest.raises(BdeError):
        oracle_eval(DEFS, "plus", [host_zeros()], 3)


# ---------------------------------------------------------------------------
# Compiled-vs-oracle and the unfolding law


def test_compiled_agrees_with_oracle_sampled():
    hosts = {"zeros": host_zeros, "toggle": host_toggle, "nats": host_nats}
    terms = {
        "zeros": corpus.term("zeros"),
        "toggle": corpus.term("toggle"),
        "nats": corpus.term("iterate' (\\x. succ x) 0"),
    }
    for name, tup in (("zeros", ()), ("plus", ("toggle", "nats")), ("times", ("nats", "toggle"))):
        out = _compiled(name)
        t = out.guarded
        for a in tup:
            t = App(t, terms[a])
        assert take_stream(t, 8) == oracle_eval(DEFS, name, [hosts[a]() for a in tup], 8)


def test_unfolding_law_observable():
    # compiled f^g and Phi^g(next f^g) agree on applied observations
    for name, args in (("zeros", ()), ("plus", ("toggle", "toggle")), ("times", ("toggle", "nats"))):
        out = _compiled(name)
        phi = out.guarded.arg  # guarded = fix_term(T) applied to Phi
        lhs = out.guarded
        rhs = App(phi, Next(out.guarded))
        for a in args:
            src = "iterate' (\\x. succ x) 0" if a == "nats" else a
            lhs = App(lhs, corpus.term(src))
            rhs = App(rhs, corpus.term(src))
        assert take_stream(lhs, 5) == take_stream(rhs, 5), name


def test_modularity_uses_earlier_equation():
    defs = parse_bde(
        "bde zeros(0) { head = 0; tail = zeros; }\n"
        "bde one(0)   { head = 1; tail = zeros; }\n"
        "bde nats(0)  { head = 0; tail = nats + one; }\n"
        "bde plus(2)  { head = x1 + x2; tail = plus(z1, z2); }\n"
    )
    # 'nats + one' needs plus, which is defined later: rejected
    with pytest.raises(ForwardReference):
        validate_bde(defs)
