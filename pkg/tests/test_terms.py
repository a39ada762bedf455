import random

import pytest

from deskbot.terms import (
    Atom, ListTerm, Num, ParseError, Struct, Var,
    is_ground, lst, parse_statements, parse_term, print_term, struct,
    substitute, unify,
)


def test_parse_class_clause():
    t = parse_term("class(top,none,[],[],[])")
    assert t == Struct("class", (Atom("top"), Atom("none"),
                                 ListTerm(()), ListTerm(()), ListTerm(())))


def test_parse_variable_and_anon():
    assert parse_term("X") == Var("X")
    a, b = parse_term("[_,_]").items
    assert a == b  # anonymous variables compare alike
    assert unify(parse_term("f(_,_)"), parse_term("f(1,2)")) is not None


def test_parse_expectation_list():
    t = parse_term("[get(day,Day), apply(f(X),[In_Arg])]")
    assert isinstance(t, ListTerm) and len(t.items) == 2
    assert all(isinstance(x, Struct) for x in t.items)


def test_quoted_atoms_keep_spaces():
    t = parse_term("screen('Good Bye')")
    assert t.args[0] == Atom("Good Bye")
    assert print_term(t) == "screen('Good Bye')"
    assert print_term(t, quoted=False) == "screen(Good Bye)"


def test_comments_and_whitespace():
    t = parse_term("f( a ,\n% a comment\n b )")
    assert t == struct("f", Atom("a"), Atom("b"))


def test_operator_shapes():
    t = parse_term("work=>'-'=>>live=>>'-'")
    assert t.functor == "=>>"
    ant, cons = t.args
    assert ant == Struct("=>", (Atom("work"), Atom("-")))
    assert cons == Struct("=>>", (Atom("live"), Atom("-")))

    t = parse_term("[back_from_work,tired]=>>found_in=>living_room")
    assert t.functor == "=>>"
    assert isinstance(t.args[0], ListTerm)
    assert t.args[1] == Struct("=>", (Atom("found_in"), Atom("living_room")))

    t = parse_term("In_Arg=='monday'")
    assert t == Struct("==", (Var("In_Arg"), Atom("monday")))


def test_print_examples():
    assert print_term(Struct("==>", (Atom("day"), Atom("monday")))) == "day ==> monday"
    assert print_term(ListTerm(())) == "[]"
    assert print_term(Struct("not", (Atom("fly"),))) == "not(fly)"


def test_arc_context_parse():
    text = """
    diag_mod(m,
     [
      [id ==> is, type ==> speech,
       arcs ==> [finish:screen('Good Bye') => fs,
                 [day(X)]:[date(get(day,Y))] => is]],
      [id ==> fs, type ==> final]
     ],
     []).
    """
    (dm,) = parse_statements(text)
    assert dm.functor == "diag_mod"
    sits = dm.args[1].items
    arcs = None
    for pair in sits[0].items:
        if pair.args[0] == Atom("arcs"):
            arcs = pair.args[1]
    arc1 = arcs.items[0]
    assert arc1.functor == "=>"
    head, nxt = arc1.args
    assert head.functor == ":"
    assert head.args[0] == Atom("finish")
    assert nxt == Atom("fs")
    # printed form re-parses to the same structure without arc context
    assert parse_term(print_term(arc1)) == arc1


def test_global_vars_statement():
    stmts = parse_statements("Global_Vars = [g ==> 0].")
    assert stmts[0].functor == "="
    assert stmts[0].args[1].items[0] == Struct("==>", (Atom("g"), Num(0)))


def test_parse_error_position():
    with pytest.raises(ParseError) as err:
        parse_term("f(a,,b)")
    assert err.value.line == 1
    assert err.value.col == 5


def test_unify_examples():
    env = unify(parse_term("day(X)"), parse_term("day(tuesday)"))
    assert env is not None
    assert substitute(Var("X"), env) == Atom("tuesday")

    ground = parse_term("f(a,[b,1])")
    assert unify(ground, ground) == {}

    assert unify(parse_term("f(X,X)"), parse_term("f(a,b)")) is None


def test_unify_occurs_check():
    assert unify(Var("X"), parse_term("f(X)")) is None


def _random_term(rng, depth=0):
    kinds = ["atom", "num", "quoted"]
    if depth < 3:
        kinds += ["struct", "list", "op"]
    kind = rng.choice(kinds)
    if kind == "atom":
        return Atom(rng.choice(["a", "b", "loc", "shelf_food", "x1"]))
    if kind == "quoted":
        return Atom(rng.choice(["Good Bye", "not ok", "-", "welcome point"]))
    if kind == "num":
        return Num(rng.randint(-20, 99))
    if kind == "list":
        return lst(*[_random_term(rng, depth + 1) for _ in range(rng.randint(0, 3))])
    if kind == "op":
        op = rng.choice(["==>", ":", "==", "=>>", "=>", "->"])
        return Struct(op, (_random_term(rng, depth + 1), _random_term(rng, depth + 1)))
    return Struct(rng.choice(["f", "g", "take", "move"]),
                  tuple(_random_term(rng, depth + 1) for _ in range(rng.randint(1, 3))))


def test_roundtrip_random_ground_terms():
    rng = random.Random(20260809)
    for _ in range(300):
        t = _random_term(rng)
        assert is_ground(t)
        once = print_term(t)
        again = print_term(parse_term(once))
        assert once == again
        assert parse_term(once) == t


def test_unify_symmetry_and_application():
    rng = random.Random(7)
    for i in range(200):
        a = _random_term(rng)
        b = _random_term(rng) if i % 3 else a
        fwd = unify(a, b)
        rev = unify(b, a)
        assert (fwd is None) == (rev is None)
        if fwd is not None:
            assert substitute(a, fwd) == substitute(b, fwd)
