import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omegarm.guards import (
    FALSE,
    TRUE,
    GuardExpr,
    GuardSyntaxError,
    UnknownAtomError,
    and_,
    ap,
    eval_guard,
    guard_atoms,
    guard_to_text,
    not_,
    or_,
    parse_guard,
)

APS = ("a", "b", "c", "d", "e", "f")


def guard_trees(names=APS, depth=4):
    leaves = st.sampled_from([TRUE, FALSE] + [ap(n) for n in names])
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            st.builds(not_, sub),
            st.builds(and_, sub, sub),
            st.builds(or_, sub, sub),
        ),
        max_leaves=depth * 4,
    )


def reference_eval(g: GuardExpr, label) -> bool:
    """Independent recursive evaluator used as the truth-table oracle."""
    match g.kind:
        case "true":
            return True
        case "false":
            return False
        case "ap":
            return g.name in label
        case "not":
            return not reference_eval(g.args[0], label)
        case "and":
            return reference_eval(g.args[0], label) and reference_eval(g.args[1], label)
        case "or":
            return reference_eval(g.args[0], label) or reference_eval(g.args[1], label)
    raise AssertionError(g.kind)


def all_labels(names):
    for r in range(len(names) + 1):
        for combo in itertools.combinations(names, r):
            yield frozenset(combo)


def test_parse_true_constant():
    assert parse_guard("true", ["a"]) == TRUE


def test_conjunction_with_negation_truth_table():
    g = parse_guard("a & !b", ["a", "b"])
    expected = {
        frozenset(): False,
        frozenset({"a"}): True,
        frozenset({"b"}): False,
        frozenset({"a", "b"}): False,
    }
    for label, want in expected.items():
        assert eval_guard(g, label) is want


def test_unknown_ap_is_reported_by_name():
    with pytest.raises(UnknownAtomError) as exc:
        parse_guard("a & c", ["a", "b"])
    assert exc.value.name == "c"


def test_precedence_or_binds_loosest():
    assert parse_guard("a | b & c", APS) == or_(ap("a"), and_(ap("b"), ap("c")))
    assert parse_guard("!a & b", APS) == and_(not_(ap("a")), ap("b"))
    assert parse_guard("!(a | b)", APS) == not_(or_(ap("a"), ap("b")))


def test_left_associative_chains():
    assert parse_guard("a & b & c", APS) == and_(and_(ap("a"), ap("b")), ap("c"))


def test_eval_basics():
    assert eval_guard(FALSE, frozenset()) is False
    assert eval_guard(not_(ap("a")), frozenset()) is True


@pytest.mark.parametrize(
    "text,offset",
    [("", 0), ("a &", 3), ("(a", 2), ("a b", 2), ("&", 0), ("a @ b", 2)],
)
def test_syntax_errors_carry_positions(text, offset):
    with pytest.raises(GuardSyntaxError) as exc:
        parse_guard(text, APS)
    assert exc.value.position == offset


@given(guard_trees())
@settings(max_examples=200, deadline=None)
def test_rendering_round_trips(tree):
    assert parse_guard(guard_to_text(tree), APS) == tree


@given(guard_trees(names=APS[:4]))
@settings(max_examples=150, deadline=None)
def test_eval_matches_truth_table(tree):
    names = sorted(guard_atoms(tree)) or list(APS[:4])
    for label in all_labels(names):
        assert eval_guard(tree, label) == reference_eval(tree, label)


def test_atoms_collects_names():
    g = parse_guard("a & (b | !c)", APS)
    assert guard_atoms(g) == frozenset({"a", "b", "c"})
