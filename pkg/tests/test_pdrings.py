from fractions import Fraction
from math import factorial

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from geoglue.library import PDRingData, zmod
from geoglue.pdrings import (
    BasePD, PDError, PDIdealHandle, PDMonomial, TruncatedPDAlgebra, arith, check_pd_axioms,
    composition_coefficient, gamma, localization_map, localize, modular_pd_data, nil_bound,
    nil_coefficient, nil_witness, parse_element, pd_saturate, show_element, universal_nil_index,
)

QQ_ALG = TruncatedPDAlgebra(BasePD("QQ", (1,)), ("X",), (), 6)
Z4 = BasePD.from_data(modular_pd_data(4, 2))
Z4_ALG = TruncatedPDAlgebra(Z4, ("X",), ("Y",), 4)


# arithmetic

def test_gamma_one_squared():
    X = QQ_ALG.x("X")
    assert X * X == 2 * QQ_ALG.x("X", 2)


def test_binomial_product():
    assert QQ_ALG.x("X", 2) * QQ_ALG.x("X", 3) == 10 * QQ_ALG.x("X", 5)


def test_product_past_truncation_vanishes():
    assert (QQ_ALG.x("X", 4) * QQ_ALG.x("X", 3)).is_zero()


def test_unit_law():
    e = QQ_ALG.parse("3*X + g2(X)")
    assert arith("mul", e, QQ_ALG.one()) == e
    assert arith("scalar", 2, e) == e + e


def test_algebra_mismatch():
    with pytest.raises(PDError):
        QQ_ALG.x("X") + Z4_ALG.x("X")


@pytest.mark.parametrize("a,b", [(1, 1), (1, 3), (2, 2), (2, 4), (3, 3)])
def test_binomial_symmetry(a, b):
    assert QQ_ALG.x("X", a) * QQ_ALG.x("X", b) == QQ_ALG.x("X", b) * QQ_ALG.x("X", a)


def test_parse_and_show_round_trip():
    for text in ["0", "1", "X", "2*X + g3(X)", "3 + g2(X)*Y^2"]:
        e = parse_element(Z4_ALG, text)
        assert parse_element(Z4_ALG, show_element(e)) == e


def test_parse_rejects_unknown_variable():
    with pytest.raises(PDError, match="unknown variable"):
        parse_element(Z4_ALG, "Z + 1")


# gamma

def test_gamma_of_gamma_two():
    assert gamma(2, QQ_ALG.x("X", 2)) == 3 * QQ_ALG.x("X", 4)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_gamma_of_zero(n):
    assert gamma(n, QQ_ALG.zero()).is_zero()


def test_sum_rule_with_base_ideal():
    e = Z4_ALG.x("X") + 2
    out = gamma(2, e)
    assert out == Z4_ALG.parse("g2(X) + 2*X + 2")
    # the QQ-lift (X + 2)^2 / 2 = X^2/2 + 2X + 2 agrees term by term
    assert len(out.terms) == 3


def test_gamma_outside_ideal():
    with pytest.raises(PDError, match="not in the PD ideal"):
        gamma(2, Z4_ALG.one())
    with pytest.raises(PDError):
        gamma(0, Z4_ALG.x("X"))


def test_composition_coefficients():
    assert [composition_coefficient(m, 2) for m in (1, 2, 3)] == [1, 3, 15]
    assert composition_coefficient(2, 3) == 10


# QQ oracle: gamma_n(e) = e^n / n! on the lift X_i^(a) -> X_i^a / a!

SX, SZ, SY = sympy.symbols("X Z Y")
MULTI = {d: TruncatedPDAlgebra(BasePD("QQ", (1,)), ("X", "Z"), ("Y",), d) for d in range(1, 7)}


def lift(e):
    out = 0
    for mono, c in e.terms:
        (a, b), (k,) = mono.x, mono.y
        out += sympy.Rational(c.numerator, c.denominator) * SX ** a / factorial(a) * SZ ** b / factorial(b) * SY ** k
    return sympy.expand(out)


def reduce_lift(alg, expr):
    terms = []
    for (a, b, k), c in sympy.Poly(expr, SX, SZ, SY).terms():
        if a <= alg.degree and b <= alg.degree:
            terms.append((PDMonomial((a, b), (k,)), Fraction(int(c.p), int(c.q)) * factorial(a) * factorial(b)))
    return alg.element(terms)


@st.composite
def qq_elements(draw):
    d = draw(st.integers(1, 6))
    alg = MULTI[d]
    mono = st.tuples(st.integers(0, d), st.integers(0, d), st.integers(0, 2))
    coeff = st.fractions(min_value=-4, max_value=4, max_denominator=3)
    terms = draw(st.lists(st.tuples(mono, coeff), max_size=4))
    return alg.element([(PDMonomial((a, b), (k,)), c) for (a, b, k), c in terms])


@settings(max_examples=500, deadline=None)
@given(qq_elements(), st.integers(1, 6))
def test_gamma_matches_rational_lift(e, n):
    expected = reduce_lift(e.alg, lift(e) ** n / factorial(n))
    assert gamma(n, e) == expected


@settings(max_examples=200, deadline=None)
@given(qq_elements(), st.integers(1, 6))
def test_gamma_independent_of_expansion_order(e, n):
    assert gamma(n, e) == gamma(n, e, reverse=True)


@st.composite
def z4_ideal_elements(draw):
    terms = draw(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 2), st.integers(0, 3)), max_size=4))
    out = [(PDMonomial((a,), (k,)), c if a > 0 else 2 * c) for a, k, c in terms]
    return Z4_ALG.element(out)


@settings(max_examples=200, deadline=None)
@given(z4_ideal_elements(), st.integers(1, 4))
def test_modular_gamma_independent_of_order(e, n):
    assert gamma(n, e) == gamma(n, e, reverse=True)


# localization

def test_localized_gamma():
    L = localize(Z4_ALG, "Y")
    assert gamma(2, L.parse("X*Y^-1")) == L.parse("g2(X)*Y^-2")


def test_inverse_cancels():
    L = localize(Z4_ALG, "Y")
    assert L.parse("Y*Y^-1") == L.one()


def test_cannot_localize_at_divided_power_variable():
    with pytest.raises(PDError, match="divided-power"):
        localize(Z4_ALG, "X")


def test_negative_exponent_needs_localization():
    with pytest.raises(PDError, match="not inverted"):
        Z4_ALG.parse("Y^-1")


@settings(max_examples=50, deadline=None)
@given(z4_ideal_elements(), z4_ideal_elements(), st.integers(1, 4))
def test_localization_is_a_pd_homomorphism(a, b, n):
    L = localize(Z4_ALG, "Y")
    f = lambda e: localization_map(e, L)
    assert f(a * b) == f(a) * f(b)
    assert f(a + b) == f(a) + f(b)
    assert f(gamma(n, a)) == gamma(n, f(a))


# saturation

def test_saturate_variable():
    A = TruncatedPDAlgebra(BasePD("QQ", (1,)), ("X",), (), 4)
    gens = pd_saturate(PDIdealHandle(A, (A.x("X"),))).generators
    assert [show_element(g) for g in gens] == ["X", "g2(X)", "g3(X)", "g4(X)"]


def test_saturate_zero_ideal():
    assert pd_saturate(PDIdealHandle(QQ_ALG, ())).generators == ()


def test_saturate_base_generator():
    two = Z4_ALG.const(2)
    sat = pd_saturate(PDIdealHandle(Z4_ALG, (two,)))
    # gamma_K(2) takes the values 2, 2, 0, 2, all already in (2)
    assert sat.generators == (two,)


def test_saturate_rejects_non_ideal_generator():
    with pytest.raises(PDError):
        PDIdealHandle(Z4_ALG, (Z4_ALG.one(),))


# nilpotence

F2 = TruncatedPDAlgebra(BasePD("ZZ/2"), ("X",), (), 8)


def test_nil_witness_square_zero():
    X = F2.x("X")
    assert (X * X).is_zero()
    w = nil_witness(X, 2, 2)
    assert w.bound == 3 and w.coefficient == 3 and w.certified
    assert (gamma(2, X) ** 3).is_zero()
    assert w.k == 2


def test_nil_coefficient_rational_check():
    x = sympy.Symbol("x")
    assert sympy.expand((x ** 2 / 2) ** 3 - nil_coefficient(2, 2, 3) * x ** 2 * x ** 4 / 24) == 0


def test_nil_witness_first_gamma():
    X = F2.x("X")
    assert nil_witness(X, 2, 1).k == 2


def test_nil_witness_zero():
    assert nil_witness(F2.zero(), 1, 3).k == 1


def test_nil_witness_requires_nilpotence():
    with pytest.raises(PDError):
        nil_witness(QQ_ALG.x("X"), 2, 2)


@pytest.mark.parametrize("n", range(1, 6))
@pytest.mark.parametrize("e", range(1, 6))
def test_nil_index_within_bound(n, e):
    k = universal_nil_index(n, e)
    assert k <= nil_bound(n, e)
    assert nil_coefficient(n, e, nil_bound(n, e)).denominator == 1


# axiom checking

def test_modular_table_passes():
    assert check_pd_axioms(modular_pd_data(4, 2), range(4)).ok


def test_square_axiom_catches_bad_gamma_two():
    bad = PDRingData(zmod(4), (2,), ((1, 2, 2), (2, 2, 1), (3, 2, 0), (4, 2, 0)))
    report = check_pd_axioms(bad, range(4))
    assert not report.ok
    assert any(f.axiom == "product" and f.witness == "m=1, n=1, x=2" and (f.lhs, f.rhs) == ("0", "2")
               for f in report.failures)


def test_truncated_table_fails_only_composition():
    # gamma_4(2) = 0 instead of the induced value 2
    table = PDRingData(zmod(4), (2,), ((1, 2, 2), (2, 2, 2), (3, 2, 0), (4, 2, 0)))
    report = check_pd_axioms(table, range(4))
    assert [(f.axiom, f.witness) for f in report.failures] == [("composition", "m=2, n=2, x=2")]


def test_trivial_pd_on_zero_ideal():
    assert check_pd_axioms(PDRingData(zmod(4)), range(4)).ok


def test_free_algebra_passes():
    A = TruncatedPDAlgebra(BasePD("ZZ"), ("X",), ("Y",), 4)
    samples = [A.x("X"), A.parse("X*Y"), A.parse("g2(X) + 3*X"), A.y("Y"), A.const(5)]
    assert check_pd_axioms(A, samples).ok
