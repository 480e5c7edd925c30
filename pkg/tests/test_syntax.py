import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoglue.extensions import extend
from geoglue.gluing import projective_line_localic, glue_localic
from geoglue.library import builtin, loc, ring_theory
from geoglue.syntax import (
    FALSE, TRUE, And, App, Eq, Exists, Or, RelAtom, SchemaOr, Sequent, Signature,
    SortMismatch, Theory, Var, canonical_sequent, canonical_text, check_wellformed, flatten,
    free_vars, normalize, normalize_formula, show, show_sequent, substitute,
)

from strategies import TOY, formulas, sequents, theories

A = Signature.make(("A", "B"), {"R": ("A",)}, {"f": (("A",), "A"), "c": ((), "A")})
x, y, z = Var("x", "A"), Var("y", "A"), Var("z", "A")
b = Var("b", "B")


def test_ring_theory_is_wellformed():
    assert check_wellformed(ring_theory()) == []


def test_unknown_sort_reported_once():
    t = Theory(A, (Sequent((Var("q", "Q"),), TRUE, TRUE),))
    diags = check_wellformed(t)
    assert len(diags) == 1
    assert "unknown sort Q" in diags[0].message
    assert diags[0].path.startswith("axiom[0]")


def test_sort_mismatch_in_equation():
    t = Theory(A, (Sequent((x, b), TRUE, Eq(x, b)),))
    diags = check_wellformed(t)
    assert [d.message for d in diags] == ["sort mismatch: A = B"]


def test_unbound_variable_and_arity():
    t = Theory(A, (Sequent((), RelAtom("R", (x,)), RelAtom("R", ())),))
    msgs = sorted(d.message for d in check_wellformed(t))
    assert msgs == ["arity mismatch: R expects 1 arguments, got 0", "unbound variable x"]


def test_substitute_constant():
    f = Eq(App("f", (x,)), y)
    assert substitute(f, {x: App("c")}) == Eq(App("f", (App("c"),)), y)


def test_substitute_avoids_capture():
    f = Exists(y, Eq(App("f", (x,)), y))
    out = substitute(f, {x: y})
    assert isinstance(out, Exists)
    assert out.var != y
    assert out.body == Eq(App("f", (y,)), out.var)
    assert free_vars(out) == {y}


def test_substitute_identity():
    f = Exists(y, And((RelAtom("R", (x,)), Eq(x, y))))
    assert substitute(f, {}) == f
    assert substitute(f, {x: x}) == f


def test_substitute_checks_sorts():
    with pytest.raises(SortMismatch):
        substitute(RelAtom("R", (x,)), {x: b})


def test_truth_conjunct_is_dropped():
    t = Theory(A, (Sequent((x,), And((RelAtom("R", (x,)), TRUE)), RelAtom("R", (App("f", (x,)),))),))
    (ax,) = normalize(t).axioms
    assert show_sequent(ax) == "[x1:A] R(x1) |- R(f(x1))"


def test_flatten_units():
    r = RelAtom("R", (x,))
    assert flatten(And((r, TRUE))) == r
    assert flatten(Or((r, FALSE))) == r
    assert flatten(Or((r, TRUE))) == TRUE
    assert flatten(And((r, FALSE))) == FALSE


def test_permuted_axioms_same_normal_form():
    t = extend(ring_theory(), loc("finite"))
    rng = random.Random(7)
    axs = list(t.axioms)
    rng.shuffle(axs)
    assert normalize(Theory(t.signature, tuple(axs))) == normalize(t)


def test_glued_theory_text_is_stable():
    spec = projective_line_localic()
    assert canonical_text(glue_localic(spec)) == canonical_text(glue_localic(spec))


def test_schema_disjunction_printing():
    f = SchemaOr("pow_zero", ("A",), (x,), "max_size")
    assert "bigor pow_zero" in show(f)


@pytest.mark.parametrize("stack", [
    (), ("Ideal",), ("Ideal", "PD"), ("loc",), ("Ideal", "nil"), ("PDIdeal",), ("Ideal", "PD", "nil"),
])
def test_library_stacks_wellformed(stack):
    t = ring_theory()
    for name in stack:
        t = extend(t, builtin(name))
    assert check_wellformed(t) == []
    assert check_wellformed(normalize(t)) == []


@settings(max_examples=100, deadline=None)
@given(theories())
def test_normalize_idempotent(t):
    once = normalize(t)
    assert normalize(once) == once
    assert check_wellformed(once) == []


@settings(max_examples=200, deadline=None)
@given(sequents(), st.permutations(["x", "y", "z", "w"]))
def test_canonical_form_ignores_variable_names(s, perm):
    ren = dict(zip(["x", "y", "z", "w"], perm))
    renamed = Sequent(tuple(Var(ren[v.name], v.sort) for v in s.context),
                      substitute(s.antecedent, {Var(k, "A"): Var(v, "A") for k, v in ren.items()}),
                      substitute(s.consequent, {Var(k, "A"): Var(v, "A") for k, v in ren.items()}))
    assert canonical_sequent(renamed) == canonical_sequent(s)


@settings(max_examples=1000, deadline=None)
@given(formulas((x, y), 3), st.sampled_from([App("c"), App("f", (y,)), z, y]))
def test_substitute_commutes_with_normalization(f, t):
    lhs = normalize_formula(substitute(f, {x: t}))
    rhs = normalize_formula(substitute(normalize_formula(f), {x: t}))
    assert lhs == rhs


@settings(max_examples=200, deadline=None)
@given(formulas((x,), 3))
def test_substitution_leaves_no_dangling_variables(f):
    out = substitute(f, {x: y})
    assert free_vars(out) <= {y} | (free_vars(f) - {x})
    assert check_wellformed(Theory(TOY, (Sequent((y,), out, TRUE),))) == []
