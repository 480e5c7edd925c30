import pytest

from geoglue.extensions import extend, theory_as_extension
from geoglue.library import (
    PDRingData, ZZ, alg, alg_alg, alg_alg_base, alg_quot, builtin, compound, crystalline_base,
    ideal, ideal_ik, import_set, loc, pd, poly_ring, ring_theory, surj, zmod,
)
from geoglue.semantics import (
    POINT, check_theory, empty_model, enumerate_extensions, zmod_ring_model,
)
from geoglue.syntax import check_wellformed, normalize, schema_axioms, show_sequent


def shown(axioms):
    return {show_sequent(a) for a in axioms}


def test_ring_signature():
    sig = builtin("Ring").signature
    assert sig.sorts == ("A",)
    assert sorted(n for n, _, _ in sig.functions) == ["add", "mul", "neg", "one", "zero"]


def test_pd_has_gamma_one_identity():
    assert "[x:S_I] true |- gamma1(x) = x" in shown(builtin("PD").axioms)


def test_finite_loc_axioms():
    assert shown(builtin("loc").axioms) == {
        "[] zero = one |- false",
        "[x:A] true |- ((exists u:A. mul(x, u) = one) | (exists u:A. mul(add(one, neg(x)), u) = one))",
    }


def test_schematic_loc_first_instances():
    (sc,) = builtin("loc", "schematic").schemas
    first = [show_sequent(a) for a in schema_axioms(sc, 3)]
    assert first[0] == "[] zero = one |- false"
    assert first[1] == "[x1:A] (exists y1:A. mul(x1, y1) = one) |- (exists u:A. mul(x1, u) = one)"


def test_economical_polynomial_ring():
    e = alg(poly_ring("X"))
    assert e.functions == (("c_X", (), "A"),)
    assert e.axioms == ()


def test_integers_add_nothing():
    e = alg(ZZ)
    assert e.functions == () and e.axioms == () and e.schemas == ()


def test_schematic_z6_tables():
    e = alg(zmod(6), "schematic")
    assert len(e.functions) == 6
    assert len(e.axioms) == 2 + 36 + 36
    M = zmod_ring_model(6)
    (N,) = enumerate_extensions(M, e)
    assert N.functions["c_5"]["*"][()] == 5


def test_economical_relation_axiom():
    K = poly_ring("X", relations=("X**2 - 2",))
    (ax,) = alg(K).axioms
    assert show_sequent(ax) == "[] true |- add(mul(c_X, c_X), neg(add(one, one))) = zero"


def test_alg_quot_is_alg_alg_plus_surj():
    K, R = zmod(4), zmod(2)
    lhs = normalize(extend(alg_alg_base(), alg_quot(K, R)))
    rhs = normalize(extend(extend(alg_alg_base(), alg_alg(K, R)), surj()))
    assert lhs == rhs


def test_zero_ideal():
    e = ideal_ik(ZZ, [0])
    assert len(e.axioms) == len(ideal().axioms) + 1
    assert show_sequent(e.axioms[-1]) == "[] true |- I(zero)"


def test_pd_gamma_requires_vanishing():
    data = PDRingData(zmod(4), (2,), tuple((n, 2, v) for n, v in zip(range(1, 5), (2, 2, 0, 2))))
    compound("PD_gamma", data, R=zmod(2))
    with pytest.raises(ValueError):
        compound("PD_gamma", data, R=zmod(4))


def test_crystalline_base_wellformed():
    assert check_wellformed(crystalline_base()) == []


def test_import_two_points():
    t = import_set({0, 1})
    assert [n for n, _, _ in t.signature.functions] == ["c_0", "c_1"]
    assert shown(t.axioms) == {"[] c_0 = c_1 |- false", "[x:Abar] true |- (x = c_0 | x = c_1)"}


def test_import_empty_set():
    t = import_set(set())
    assert shown(t.axioms) == {"[x:Abar] true |- false"}


def test_import_identity_function():
    t = import_set({0, 1}, functions={"f": (1, lambda a: a)})
    assert {"[] true |- f(c_0) = c_0", "[] true |- f(c_1) = c_1"} <= shown(t.axioms)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_import_has_one_model(n):
    t = import_set(set(range(n)), relations={"E": (1, {(0,)})})
    models = enumerate_extensions(empty_model(POINT), theory_as_extension(t), n + 1)
    assert len(models) == 1
    assert len(models[0].sorts["Abar"]["*"]) == n


@pytest.mark.parametrize("m", [2, 3, 4, 5, 7, 8, 9])
def test_local_rings_are_prime_powers(m):
    t = extend(ring_theory(), loc("finite"))
    assert check_theory(zmod_ring_model(m), t).holds


@pytest.mark.parametrize("m", [6, 10, 12])
def test_non_local_rings(m):
    t = extend(ring_theory(), loc("finite"))
    assert not check_theory(zmod_ring_model(m), t).holds


def test_every_generator_wellformed():
    base = ring_theory()
    for e in (ideal(), loc("schematic"), alg(zmod(6), "schematic"), alg(poly_ring("X", "Y"))):
        assert check_wellformed(extend(base, e)) == []
    assert check_wellformed(extend(extend(base, ideal()), pd())) == []
    assert check_wellformed(extend(alg_alg_base(), alg_quot(zmod(4), zmod(2)))) == []
