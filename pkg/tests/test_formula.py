import math
import random

import pytest

from conftest import corpus_formula
from stpl import corpus, fuzz
from stpl.formula import (
    ParseError, desugar, expand_intervals, free_ids, free_times, is_aan, is_core, parse, parse_term, pretty_print,
    rename_apart, stats, validate_aan,
)
from stpl.formula.syntax import (
    BB, And, Cap, Const, Eventually, Exists, Fn, Forall, Freeze, FrameConstraint, FuncAtom, IdCompare, Interval,
    Not, SpatialExists, TimeConstraint, TrueF, Until, UntilS, walk,
)
from stpl.spatial import Anchor

CORPUS = sorted(p.name for p in corpus.path("").iterdir() if p.suffix == ".stpl")


def test_same_class_pair_ast():
    f = parse("eventually exists id1. exists id2. (id1 != id2 and CLASS(id1) == CLASS(id2))")
    assert f == Eventually(Exists("id1", None, Exists("id2", None, And(
        IdCompare("id1", "id2", False),
        FuncAtom(Fn("CLASS", ("id1",)), "==", Fn("CLASS", ("id2",))),
    ))))


def test_true_and_false():
    assert parse("true") == TrueF()
    assert parse("false") == Not(TrueF())


def test_freeze_quantifier_binds_both_variables():
    f = parse("exists id1 @ x. always (CTIME - x <= 1 implies PROB(id1) >= 0.7)")
    assert isinstance(f, Exists) and f.freeze == "x"
    assert not free_ids(f) and not free_times(f)
    assert parse(pretty_print(f)) == f


def test_intervals_and_units():
    f = parse("eventually[0, 1.5)t SE(BB(1) UNTILS[2,inf]f BB(2))")
    assert f.interval == Interval(0, 1.5, True, False, "time")
    term = f.arg.term
    assert isinstance(term, UntilS) and term.interval == Interval(2, math.inf, True, False, "frame")


def test_modulo_frame_constraint():
    f = parse("freeze x. always ((CFRAME - x) % 2 == 0 implies true)")
    atom = f.body.arg.left
    assert atom == FrameConstraint("x", "==", 0, 2)


def test_function_forms():
    f = parse('exists id1. exists id2. (DIST(id1, CT, UNIVERSE, CT) < 3 and PROB(id1) >= 0.5 * PROB(id2) '
              'and RATIO(AREA(BB(id1) CAP BB(id2)), AREA(id2)) >= 0.1 and CLASS(id1) == "pedestrian" '
              'and VISIBLE(EGO, CT, id1, id2) and EMPTY(id1))')
    kinds = {n.name for n in walk(f) if isinstance(n, Fn)}
    assert kinds == {"DIST", "PROB", "RATIO", "AREA", "CLASS", "VISIBLE", "EMPTY"}
    assert parse(pretty_print(f)) == f


def test_spatial_precedence():
    t = parse_term("BB(1) CAP BB(2) CUP BB(3)")
    assert t.__class__.__name__ == "Cup" and isinstance(t.left, Cap)


def test_literal_ids():
    f = parse("SE(BB(1) CAP BB(2)) and PROB(3) > 0.5")
    assert f.left == SpatialExists(Cap(BB(1), BB(2)))
    assert f.right == FuncAtom(Fn("PROB", (3,)), ">", Const(0.5))


@pytest.mark.parametrize(
    "text, line, col",
    [
        ("always (exists id1. PROB(id1) >> 2)", 1, 32),
        ("always\n  PROB(id9) > 2", 2, 8),
        ("exists id1 . (", 1, 15),
        ("eventually[1,0] true", 1, 11),
        ("SE(BB(1) CUP)", 1, 13),
        ("CTIME - x > 1", 1, 9),
    ],
)
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(ParseError) as e:
        parse(text)
    assert (e.value.line, e.value.col) == (line, col)
    assert str(e.value).startswith(f"{line}:{col}:")


def test_parse_error_lists_expected_tokens():
    with pytest.raises(ParseError) as e:
        parse("exists id1 PROB(id1) > 1")
    assert "." in e.value.expected


@pytest.mark.parametrize("name", CORPUS)
def test_corpus_round_trip(name):
    f = corpus_formula(name)
    assert parse(pretty_print(f)) == f


@pytest.mark.parametrize("seed", range(200))
def test_fuzz_round_trip(seed):
    f = fuzz.FormulaGen(random.Random(seed)).formula()
    assert parse(pretty_print(f)) == f


def test_nested_quantifiers_are_parenthesised():
    f = parse("always forall id1 @ x. (exists id2. id1 == id2) implies true")
    text = pretty_print(f)
    assert "(exists id2. id1 == id2)" in text
    assert parse(text) == f


# AAN


@pytest.mark.parametrize("name", ["nested_freeze_ok.stpl", "freeze_quantifier_ok.stpl"])
def test_aan_accepts(name):
    assert is_aan(corpus_formula(name))


def test_freeze_hides_time_flags_outer_time_variable():
    (v,) = validate_aan(corpus_formula("freeze_hides_time.stpl"))
    assert (v.variable, v.kind) == ("x1", "time")


def test_freeze_hides_id_flags_outer_id_variable():
    vs = validate_aan(corpus_formula("freeze_hides_id.stpl"))
    assert {(v.variable, v.kind) for v in vs} == {("id1", "id")}


def test_aan_on_requirement_corpus():
    names = [e["file"] for e in corpus.manifest()["formulas"]]
    rejected = {n for n in names if not is_aan(corpus_formula(n))}
    assert rejected == {"single_right_shift.stpl"}


def test_variable_free_formula_is_aan():
    assert is_aan(parse("always SE(BB(1))"))


# statistics


def test_stats_relative_position_formula():
    s = stats(corpus_formula("box_unchanged_quantified.stpl"))
    assert (s.n_temporal, s.n_spatial, s.n_time_vars) == (9, 8, 1)


def test_stats_in_bounds_formula():
    s = stats(corpus_formula("boxes_in_image.stpl"))
    assert (s.n_temporal, s.n_spatial) == (9, 0)


def test_stats_true():
    assert stats(TrueF()).as_dict() == {"n_temporal": 1, "n_spatial": 0, "n_time_vars": 0, "max_id_scope": 0}


# desugaring


def test_interval_eventually_becomes_freeze_guard():
    f = expand_intervals(parse("eventually[0,1] SE(BB(1))"))
    assert isinstance(f, Freeze)
    x = f.tvar
    assert f.body == Eventually(And(And(TimeConstraint(x, ">=", 0), TimeConstraint(x, "<=", 1)), SpatialExists(BB(1))))


def test_forall_becomes_not_exists_not():
    p = SpatialExists(BB("id"))
    assert desugar(Forall("id", None, p)) == Not(Exists("id", None, Not(p)))


def test_fresh_variables_do_not_capture():
    f = parse("freeze _x1. eventually[0,1] CTIME - _x1 > 0")
    g = expand_intervals(f)
    assert g.tvar == "_x1" and g.body.tvar != "_x1"


@pytest.mark.parametrize("seed", range(200))
def test_desugar_reaches_core(seed):
    f = fuzz.FormulaGen(random.Random(seed)).formula()
    assert is_core(desugar(f))


def test_rename_apart_makes_binders_unique():
    f = rename_apart(parse("(exists id1. SE(BB(id1))) and (exists id1. SE(BB(id1)))"))
    names = [n.var for n in walk(f) if isinstance(n, Exists)]
    assert len(set(names)) == 2


def test_anchor_enum_is_shared():
    f = parse("exists id1. LAT(id1, TM) > 0")
    assert f.body.lhs.args[1] is Anchor.TM


def test_until_binds_tighter_than_and():
    f = parse("true and true until true")
    assert isinstance(f, And) and isinstance(f.right, Until)
