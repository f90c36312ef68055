import pytest

import corpus
from glam.errors import TypingError
from glam.frontend import parse_term, parse_type
from glam.machine import observe_conat, observe_nat, take_stream
from glam.prelude import load_extras, load_prelude
from glam.syntax import In1, In2, type_alpha_eq
from glam.typecheck import check, check_program

SG = "mu a. Nat * |>a"
SS = "mu a. #(mu b. Nat * |>b) * |>a"
CN = "mu a. Unit + |>a"

# The pinned table: every prelude definition at its declared type.
PINNED_TYPES = {
    "consg": f"Nat -> |>({SG}) -> {SG}",
    "hdg": f"({SG}) -> Nat",
    "tlg": f"({SG}) -> |>({SG})",
    "secondg": f"({SG}) -> |>Nat",
    "thirdg": f"({SG}) -> |>|>Nat",
    "zeros": SG,
    "mapg": f"(Nat -> Nat) -> ({SG}) -> {SG}",
    "iterate": f"|>(Nat -> Nat) -> Nat -> {SG}",
    "iterate'": f"(Nat -> Nat) -> Nat -> {SG}",
    "interleave": f"({SG}) -> |>({SG}) -> {SG}",
    "interleave'": f"({SG}) -> ({SG}) -> {SG}",
    "toggle": SG,
    "paperfolds": SG,
    "initial": f"((Nat * |>Nat) -> Nat) -> ({SG}) -> Nat",
    "final": f"(Nat -> Nat * |>Nat) -> Nat -> {SG}",
    "cons": f"Nat -> #({SG}) -> #({SG})",
    "hd": f"#({SG}) -> Nat",
    "tl": f"#({SG}) -> #({SG})",
    "second": f"#({SG}) -> Nat",
    "lim": f"#(({SG}) -> {SG}) -> #({SG}) -> #({SG})",
    "lift1": "(Nat -> Nat) -> #Nat -> #Nat",
    "lift2": f"#(({SG}) -> ({SG}) -> {SG}) -> #({SG}) -> #({SG}) -> #({SG})",
    "mapConst": f"(Nat -> Nat) -> #({SG}) -> #({SG})",
    "every2nd": f"#({SG}) -> {SG}",
    "hdS": f"#({SS}) -> #({SG})",
    "tlS": f"#({SS}) -> #({SS})",
    "diag": f"#({SS}) -> {SG}",
    "cozero": CN,
    "cosucc": f"({CN}) -> {CN}",
    "infinity": CN,
    "predg": f"({CN}) -> Unit + |>({CN})",
    "pred": f"#({CN}) -> Unit + #({CN})",
}


def test_prelude_typechecks():
    check_program(load_prelude())


def test_pinned_type_table():
    p = load_prelude()
    names = [d.name for d in p]
    assert names == list(PINNED_TYPES)
    for d in p:
        assert type_alpha_eq(d.ty, parse_type(PINNED_TYPES[d.name])), d.name


def test_every_definition_checks_at_declared_type():
    for d in load_prelude():
        check({}, d.body, d.ty)


def test_interleave_general_typing():
    assert type_alpha_eq(
        load_prelude().lookup("interleave").ty,
        parse_type(f"({SG}) -> |>({SG}) -> {SG}"),
    )


def test_pred_typing():
    assert type_alpha_eq(
        load_prelude().lookup("pred").ty, parse_type(f"#({CN}) -> Unit + #({CN})")
    )


# ---------------------------------------------------------------------------
# Behaviour


def test_iterate_prime_equals_iterate_of_next():
    for f, x in (("(\\x. succ x)", "0"), ("(\\x. addN x x)", "1"), ("(\\x. mulN x x)", "2")):
        a = corpus.term(f"iterate' {f} {x}")
        b = corpus.term(f"iterate (next {f}) {x}")
        assert take_stream(a, 5) == take_stream(b, 5)


def test_map_succ_zeros():
    assert take_stream(corpus.term("mapg (\\x. succ x) zeros"), 4) == [1, 1, 1, 1]


def test_map_const_relates_to_map():
    for s in ("toggle", "paperfolds"):
        boxed = corpus.term(f"mapConst (\\x. succ x) (box {s})")
        plain = corpus.term(f"mapg (\\x. succ x) {s}")
        assert take_stream(boxed, 5) == take_stream(plain, 5)


def test_cons_head_tail_roundtrip():
    t = corpus.term("tl (cons 9 (box toggle))")
    assert take_stream(t, 3) == [1, 0, 1]
    assert observe_nat(corpus.term("hd (cons 9 (box toggle))")) == 9


def test_pred_of_cozero():
    from glam.machine import eval_term

    out = eval_term(corpus.term("pred (box cozero)"))
    assert isinstance(out.term, In1)


def test_pred_of_infinity():
    out_t = corpus.term("pred (box infinity)")
    from glam.machine import eval_term

    v = eval_term(out_t).term
    assert isinstance(v, In2)
    # the payload is again a conatural that keeps unfolding
    assert observe_conat(corpus.term("case (pred (box infinity)) of inl u -> cozero | inr m -> unbox m"), 4) == (4, False)


def test_conat_observations():
    assert observe_conat(corpus.term("cozero"), 5) == (0, True)
    assert observe_conat(corpus.term("cosucc (cosucc cozero)"), 5) == (2, True)
    assert observe_conat(corpus.term("infinity"), 5) == (5, False)


# ---------------------------------------------------------------------------
# Documentation extras (Thue-Morse, Fibonacci word)


def test_extras_typecheck():
    check_program(load_extras())


def test_thuemorse_prefix():
    t = parse_term("toNat thuemorse", env=load_extras().env(), strict=True)
    assert take_stream(t, 8) == [0, 1, 1, 0, 1, 0, 0, 1]


def test_fibonacci_word_prefix():
    t = parse_term("toNat fibonacci", env=load_extras().env(), strict=True)
    assert take_stream(t, 8) == [0, 1, 0, 0, 1, 0, 1, 0]


def test_original_thuemorse_is_ill_typed():
    # thuemorse = 0 :: tl (h thuemorse): the self-reference sits under
    # two laters where one is required
    env = load_extras().env()
    src = (
        "fix[mu a. (Unit + Unit) * |>a] (\\t. consB false "
        "((next tlB) <*> ((next morse_h) <*> t)))"
    )
    t = parse_term(src, env=env, strict=True)
    with pytest.raises(TypingError):
        check({}, t, parse_type("mu a. (Unit + Unit) * |>a"))


def test_original_fibonacci_is_ill_typed():
    env = load_extras().env()
    src = (
        "fix[mu a. (Unit + Unit) * |>a] (\\t. consB false "
        "((next tlB) <*> ((next fib_f) <*> t)))"
    )
    t = parse_term(src, env=env, strict=True)
    with pytest.raises(TypingError):
        check({}, t, parse_type("mu a. (Unit + Unit) * |>a"))
