import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoglue.extensions import (
    EMPTY, ExtensionError, Quotient, Subobject, TheoryExtension, add_sum, apply_extension,
    conditional, conditional_system, desugar_functions, extend, extension_by_definitions,
    make_system, materialize, proposition, simplex_poset,
)
from geoglue.library import ideal, inv, loc, mul, pd, ring_theory
from geoglue.semantics import enumerate_extensions, set_model, zmod_ring_model
from geoglue.syntax import (
    FALSE, TRUE, And, App, Eq, Or, RelAtom, Sequent, Signature, Theory, Var, check_wellformed,
    normalize, show_sequent,
)

from corpus import props

P, Q, R = RelAtom("p", ()), RelAtom("q", ()), RelAtom("r", ())
x, y = Var("x", "A"), Var("y", "A")


def texts(ext):
    return sorted(show_sequent(a) for a in ext.axioms)


def test_ring_plus_loc_is_local_rings():
    t = apply_extension(ring_theory(), loc("finite"))
    assert len(t.axioms) == len(normalize(ring_theory()).axioms) + 2
    assert check_wellformed(t) == []


def test_empty_extension_is_identity():
    t = extend(ring_theory(), ideal())
    assert apply_extension(t, EMPTY) == normalize(t)


def test_ring_ideal_pd_wellformed():
    t = apply_extension(extend(ring_theory(), ideal()), pd())
    assert check_wellformed(t) == []


@pytest.mark.parametrize("bad", [
    TheoryExtension(relations=(("mul", ("A",)),)),
    TheoryExtension(relations=(("R", ("Q",)),)),
])
def test_extension_errors(bad):
    with pytest.raises(ExtensionError):
        extend(ring_theory(), bad)


def test_base_mismatch():
    ext = TheoryExtension(base=props("p"), relations=(("t", ()),))
    with pytest.raises(ExtensionError, match="base mismatch"):
        extend(props("q"), ext)


def test_sum_equals_sequential_application():
    base = ring_theory()
    summed = apply_extension(base, add_sum(ideal(), pd()))
    assert summed == normalize(extend(extend(base, ideal()), pd()))


def test_sum_with_empty():
    assert add_sum(ideal(), EMPTY) == ideal()


def test_two_proposition_symbols():
    e = add_sum(proposition("p"), proposition("q"))
    assert e.relations == (("p", ()), ("q", ()))
    with pytest.raises(ExtensionError, match="name clash"):
        add_sum(e, proposition("p"))


def test_desugar_constant():
    e = desugar_functions(TheoryExtension(functions=(("c", (), "A"),)))
    assert e.functions == ()
    assert e.relations == (("R_c", ("A", )),)
    assert texts(e) == ["[] true |- (exists x:A. R_c(x))", "[x:A, x':A] (R_c(x) & R_c(x')) |- x = x'"]


def test_desugar_nested_application():
    z = Var("z", "A")
    ax = Sequent((x, z), TRUE, Eq(App("g", (App("f", (x,)),)), z))
    e = desugar_functions(TheoryExtension(functions=(("f", ("A",), "A"), ("g", ("A",), "A")), axioms=(ax,)))
    last = e.axioms[-1]
    assert show_sequent(last) == "[x:A, z:A] true |- (exists y':A. (R_f(x, y') & R_g(y', z)))"


def test_desugar_function_free_unchanged():
    assert desugar_functions(ideal()) == ideal()


@pytest.mark.parametrize("fiber", [1, 2, 3])
def test_desugar_preserves_model_counts(fiber):
    # involutions on a set of size `fiber`, as a function and as its graph
    f = TheoryExtension(functions=(("f", ("A",), "A"),),
                        axioms=(Sequent((x,), TRUE, Eq(App("f", (App("f", (x,)),)), x)),))
    M = set_model({"A": tuple(range(fiber))})
    assert len(enumerate_extensions(M, f)) == len(enumerate_extensions(M, desugar_functions(f)))


def test_partial_constant():
    e = conditional(desugar_functions(TheoryExtension(functions=(("c", (), "A"),))), P)
    shown = texts(e)
    assert "[] (true & p) |- (exists x:A. R_c(x))" in shown
    assert "[x1:A] R_c(x1) |- p" in shown


def test_condition_true_is_identity():
    e = add_sum(ideal(), TheoryExtension(relations=(("s", ()),)))
    base = ring_theory()
    assert apply_extension(base, conditional(e, TRUE)) == apply_extension(base, e)


def test_conditional_rejects_functions_and_open_conditions():
    with pytest.raises(ExtensionError, match="desugar_functions"):
        conditional(TheoryExtension(functions=(("c", (), "A"),)), P)
    with pytest.raises(ExtensionError, match="not closed"):
        conditional(ideal(), RelAtom("I", (x,)))


def test_conditional_keeps_names():
    e = add_sum(ideal(), TheoryExtension(sorts=("S",), relations=(("U", ("S",)),)))
    c = conditional(e, P)
    assert c.functions == ()
    assert c.sorts == e.sorts and c.relations == e.relations


def test_system_over_simplices_accepts_conjunctions():
    elems, order = simplex_poset([1, 2, 3])
    sys_ = make_system(elems, order, {S: EMPTY for S in elems})
    phis = {S: And(tuple(RelAtom(f"p{i}", ()) for i in sorted(S))) for S in elems}
    out = conditional_system(sys_, phis)
    assert len(out.elements) == 7


def test_system_incomparable_indices():
    sys_ = make_system(["a", "b"], [], {"a": proposition("s"), "b": proposition("t")})
    conditional_system(sys_, {"a": P, "b": Q})


def test_system_rejects_missing_witness():
    sys_ = make_system(["1", "12"], [("1", "12")], {"1": EMPTY, "12": EMPTY})
    phis = {"1": Q, "12": And((RelAtom("p1", ()), RelAtom("p2", ())))}
    with pytest.raises(ExtensionError, match="monotonicity"):
        conditional_system(sys_, phis)
    conditional_system(sys_, phis, assume=[("1", "12")])


def test_definition_of_invertibility():
    ring = ring_theory()
    e = extension_by_definitions(ring, {"Inv": ((x,), inv(x))})
    assert texts(e) == sorted([
        "[x:A] Inv(x) |- (exists u:A. mul(x, u) = one)",
        "[x:A] (exists u:A. mul(x, u) = one) |- Inv(x)",
    ])
    assert len(enumerate_extensions(zmod_ring_model(4), e)) == 1


def test_definition_of_proposition_by_truth():
    e = extension_by_definitions(Theory(), {"p": ((), TRUE)})
    assert texts(e) == ["[] p |- true", "[] true |- p"]


def test_definition_context_mismatch():
    with pytest.raises(ExtensionError, match="context mismatch"):
        extension_by_definitions(ring_theory(), {"Inv": ((), inv(x))})


def test_function_definition_has_obligations():
    z = Var("z", "A")
    e = extension_by_definitions(ring_theory(), fun_defs={"sq": ((x, z), Eq(mul(x, x), z))})
    assert e.functions == (("sq", ("A",), "A"),)
    assert len(e.obligations) == 2
    assert len(enumerate_extensions(zmod_ring_model(3), e, 3)) == 1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_quotient_by_equality_is_bijective(n):
    base = Theory(Signature(("A",)))
    a, a2 = Var("a", "A"), Var("a'", "A")
    e = materialize(base, Quotient("A", a, a2, Eq(a, a2)))
    M = set_model({"A": tuple(range(n))})
    exts = enumerate_extensions(M, e, 3)
    assert len(exts) == 1
    assert len(exts[0].sorts["Q_A"]["*"]) == n


def test_quotient_counts_classes():
    base = Theory(Signature(("A",), (("E", ("A", "A")),)))
    a, a2 = Var("a", "A"), Var("a'", "A")
    e = materialize(base, Quotient("A", a, a2, RelAtom("E", (a, a2))))
    classes = {(0, 0), (1, 1), (2, 2), (0, 1), (1, 0)}
    M = set_model({"A": (0, 1, 2)}, {"E": classes})
    (N,) = enumerate_extensions(M, e, 3)
    assert len(N.sorts["Q_A"]["*"]) == 2


def test_subobject_by_truth():
    base = Theory(Signature(("A",)))
    e = materialize(base, Subobject("A", x, TRUE))
    M = set_model({"A": (0, 1)})
    (N,) = enumerate_extensions(M, e, 2)
    assert len(N.sorts["S_A"]["*"]) == 2


def test_materialize_context_mismatch():
    with pytest.raises(ExtensionError):
        materialize(ring_theory(), Subobject("A", x, Eq(x, y)))


# random propositional instances of the two conditional-extension laws

ATOMS = [P, Q, R]
closed = st.recursive(
    st.sampled_from(ATOMS + [TRUE, FALSE]),
    lambda inner: st.one_of(st.lists(inner, max_size=3).map(lambda ps: And(tuple(ps))),
                            st.lists(inner, max_size=3).map(lambda ps: Or(tuple(ps)))),
    max_leaves=4)


def small_ext(names):
    atoms = ATOMS + [RelAtom(n, ()) for n in names]
    seq = st.tuples(st.sampled_from(atoms + [TRUE]), st.sampled_from(atoms + [FALSE])).map(
        lambda ab: Sequent((), *ab))
    return st.lists(seq, max_size=3).map(
        lambda axs: TheoryExtension(relations=tuple((n, ()) for n in names), axioms=tuple(axs)))


@settings(max_examples=150, deadline=None)
@given(closed, small_ext(["s"]))
def test_law_condition_then_assert(phi, e):
    base = props("p", "q", "r")
    fact = TheoryExtension(axioms=(Sequent((), TRUE, phi),))
    lhs = normalize(extend(extend(base, conditional(e, phi)), fact))
    rhs = normalize(extend(extend(base, fact), e))
    assert lhs == rhs


@settings(max_examples=150, deadline=None)
@given(closed, small_ext(["s"]), small_ext(["t"]))
def test_law_condition_distributes_over_sums(phi, e1, e2):
    base = props("p", "q", "r")
    lhs = normalize(extend(base, conditional(add_sum(e1, e2), phi)))
    rhs = normalize(extend(base, add_sum(conditional(e1, phi), conditional(e2, phi))))
    assert lhs == rhs
