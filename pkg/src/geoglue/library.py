"""Generators for the named theories and extensions.

Rings use the sort ``A`` with function symbols ``zero, one, neg, add, mul``;
a ring structure on another sort ``S`` uses the same names suffixed ``_S``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import sympy

from .extensions import (
    ExtensionError, TheoryExtension, add_sum, desugar_formula, extend, make_extension,
)
from .syntax import (
    AXIOM_SCHEMAS, And, App, AxiomSchema, BOUNDS, Eq, Exists, FALSE, FORMULA_SCHEMAS,
    Or, RelAtom, SchemaOr, Sequent, Signature, TRUE, Theory, Var,
)


# ---------------------------------------------------------------------------
# ring vocabulary

def ring_names(sort: str = "A") -> dict:
    suffix = "" if sort == "A" else "_" + sort
    return {op: op + suffix for op in ("zero", "one", "neg", "add", "mul")}


def zero(sort="A"):
    return App(ring_names(sort)["zero"])


def one(sort="A"):
    return App(ring_names(sort)["one"])


def neg(t, sort="A"):
    return App(ring_names(sort)["neg"], (t,))


def add(a, b, sort="A"):
    return App(ring_names(sort)["add"], (a, b))


def mul(a, b, sort="A"):
    return App(ring_names(sort)["mul"], (a, b))


def add_all(terms, sort="A"):
    terms = list(terms)
    if not terms:
        return zero(sort)
    out = terms[0]
    for t in terms[1:]:
        out = add(out, t, sort)
    return out


def numeral(n: int, sort="A"):
    """The closed term 1 + 1 + ... + 1 (n summands), negated for n < 0."""
    if n < 0:
        return neg(numeral(-n, sort), sort)
    if n == 0:
        return zero(sort)
    return add_all([one(sort)] * n, sort)


def power(t, n: int, sort="A"):
    if n == 0:
        return one(sort)
    out = t
    for _ in range(n - 1):
        out = mul(t, out, sort)
    return out


def inv(t, sort="A", name="u"):
    """inv(t) := exists u. t * u = 1."""
    from .syntax import term_vars
    taken = {v.name for v in term_vars(t)}
    while name in taken:
        name += "'"
    u = Var(name, sort)
    return Exists(u, Eq(mul(t, u, sort), one(sort)))


def _eqs(ctx, *pairs):
    return tuple(Sequent(tuple(ctx), TRUE, Eq(a, b)) for a, b in pairs)


def ring_extension(sort: str = "A") -> TheoryExtension:
    """A commutative unitary ring structure on a new sort."""
    n = ring_names(sort)
    x, y, z = Var("x", sort), Var("y", sort), Var("z", sort)
    ad = lambda a, b: add(a, b, sort)
    mu = lambda a, b: mul(a, b, sort)
    axioms = (
        _eqs((x, y, z), (ad(ad(x, y), z), ad(x, ad(y, z))))
        + _eqs((x, y), (ad(x, y), ad(y, x)))
        + _eqs((x,), (ad(x, zero(sort)), x))
        + _eqs((x,), (ad(x, neg(x, sort)), zero(sort)))
        + _eqs((x, y, z), (mu(mu(x, y), z), mu(x, mu(y, z))))
        + _eqs((x, y), (mu(x, y), mu(y, x)))
        + _eqs((x,), (mu(x, one(sort)), x))
        + _eqs((x, y, z), (mu(x, ad(y, z)), ad(mu(x, y), mu(x, z))))
    )
    funs = {
        n["zero"]: ((), sort), n["one"]: ((), sort), n["neg"]: ((sort,), sort),
        n["add"]: ((sort, sort), sort), n["mul"]: ((sort, sort), sort),
    }
    return make_extension(None, (sort,), None, funs, axioms)


def ring_theory(sort: str = "A") -> Theory:
    return extend(Theory(), ring_extension(sort))


# ---------------------------------------------------------------------------
# schematic families

def _pow_zero(k, params, args):
    sort = params[0]
    return Eq(power(args[0], k + 1, sort), zero(sort))


def _loc_instance(k, params):
    sort = params[0]
    xs = tuple(Var(f"x{i + 1}", sort) for i in range(k))
    ys = tuple(Var(f"y{i + 1}", sort) for i in range(k))
    total = add_all([mul(a, b, sort) for a, b in zip(xs, ys)], sort)
    ante = Eq(total, one(sort))
    for v in reversed(ys):
        ante = Exists(v, ante)
    cons = Or(tuple(inv(a, sort) for a in xs))
    return Sequent(xs, ante, cons)


def _int_units(k, params):
    sort = params[0]
    u = Var("u", sort)
    return Sequent((), TRUE, Exists(u, Eq(mul(numeral(k + 1, sort), u, sort), one(sort))))


FORMULA_SCHEMAS["pow_zero"] = _pow_zero
AXIOM_SCHEMAS["loc"] = _loc_instance
AXIOM_SCHEMAS["int_units"] = _int_units
# In a commutative ring a failing instance of (loc) with n generators yields a
# failing instance with n = 2 (if a + b is a unit u, then a/u + b/u = 1), so
# the family's truth is decided by its first three members.
BOUNDS["loc_stable"] = lambda sizes: 3


# ---------------------------------------------------------------------------
# builtin theories

def loc(variant: str = "finite", sort: str = "A") -> TheoryExtension:
    if variant == "schematic":
        return TheoryExtension(schemas=(AxiomSchema("loc", (sort,), "loc_stable"),))
    if variant != "finite":
        raise ValueError(f"unknown loc variant {variant}")
    x = Var("x", sort)
    nontrivial = Sequent((), Eq(zero(sort), one(sort)), FALSE)
    split = Sequent((x,), TRUE, Or((inv(x, sort), inv(add(one(sort), neg(x, sort), sort), sort))))
    return TheoryExtension(axioms=(nontrivial, split))


def ideal(sort: str = "A", name: str = "I") -> TheoryExtension:
    x, y, lam = Var("x", sort), Var("y", sort), Var("lambda", sort)
    mem = lambda t: RelAtom(name, (t,))
    axioms = (
        Sequent((), TRUE, mem(zero(sort))),
        Sequent((x, y), And((mem(x), mem(y))), mem(add(x, y, sort))),
        Sequent((lam, x), mem(x), mem(mul(lam, x, sort))),
    )
    return make_extension(None, (), {name: (sort,)}, None, axioms)


def ideal_member(name: str = "I"):
    return lambda t: RelAtom(name, (t,))


def kernel_member(f: str = "f", target: str = "B"):
    """x in I abbreviates f(x) = 0 when the ideal is the kernel of f."""
    return lambda t: Eq(App(f, (t,)), zero(target))


def nil(member=None, sort: str = "A") -> TheoryExtension:
    member = member or ideal_member()
    x = Var("x", sort)
    return TheoryExtension(axioms=(Sequent((x,), member(x), SchemaOr("pow_zero", (sort,), (x,), "max_size")),))


PD_DEGREE = 4


def gamma_name(n: int) -> str:
    return f"gamma{n}"


def pd_ideal(degree: int = PD_DEGREE, sort: str = "A", sub: str = "S_I") -> TheoryExtension:
    """Sort S_I with an A-module embedding iota and divided powers gamma1..gamma_d.

    The gamma family is truncated at ``degree``; axiom instances mentioning an
    index above the truncation are omitted.
    """
    iota = lambda t: App("iota", (t,))
    sadd = lambda a, b: App("sadd", (a, b))
    smul = lambda a, b: App("smul", (a, b))
    szero = App("szero")
    g = lambda n, t: App(gamma_name(n), (t,))
    x, y = Var("x", sub), Var("y", sub)
    a = Var("a", sort)
    axioms = [
        Sequent((x, y), Eq(iota(x), iota(y)), Eq(x, y)),
        Sequent((), TRUE, Eq(iota(szero), zero(sort))),
        Sequent((x, y), TRUE, Eq(iota(sadd(x, y)), add(iota(x), iota(y), sort))),
        Sequent((a, x), TRUE, Eq(iota(smul(a, x)), mul(a, iota(x), sort))),
        Sequent((x,), TRUE, Eq(g(1, x), x)),
    ]
    for n in range(1, degree + 1):
        terms = [g(n, x), g(n, y)] + [smul(iota(g(i, x)), g(n - i, y)) for i in range(1, n)]
        rhs = terms[0]
        for t in terms[1:]:
            rhs = sadd(rhs, t)
        axioms.append(Sequent((x, y), TRUE, Eq(g(n, sadd(x, y)), rhs)))
    for n in range(1, degree + 1):
        axioms.append(Sequent((a, x), TRUE, Eq(g(n, smul(a, x)), smul(power(a, n, sort), g(n, x)))))
    for m in range(1, degree + 1):
        for n in range(1, degree + 1 - m):
            k = math.comb(m + n, m)
            axioms.append(Sequent((x,), TRUE, Eq(smul(iota(g(m, x)), g(n, x)),
                                                smul(numeral(k, sort), g(m + n, x)))))
    for m in range(1, degree + 1):
        for n in range(1, degree + 1):
            if m * n > degree:
                continue
            k = math.factorial(m * n) // (math.factorial(m) * math.factorial(n) ** m)
            axioms.append(Sequent((x,), TRUE, Eq(g(m, g(n, x)), smul(numeral(k, sort), g(m * n, x)))))
    funs = {"iota": ((sub,), sort), "szero": ((), sub), "sadd": ((sub, sub), sub),
            "smul": ((sort, sub), sub)}
    for n in range(1, degree + 1):
        funs[gamma_name(n)] = ((sub,), sub)
    return make_extension(None, (sub,), None, funs, axioms)


def pd(member=None, degree: int = PD_DEGREE, sort: str = "A", sub: str = "S_I") -> TheoryExtension:
    """PD-Ideal plus: exists x : S_I. iota(x) = y  -||-  y in I."""
    member = member or ideal_member()
    base = pd_ideal(degree, sort, sub)
    x, y = Var("x", sub), Var("y", sort)
    hit = Exists(x, Eq(App("iota", (x,)), y))
    return add_sum(base, TheoryExtension(axioms=(Sequent((y,), hit, member(y)), Sequent((y,), member(y), hit))))


def ring_hom(f: str = "f", source: str = "A", target: str = "B") -> TheoryExtension:
    x, y = Var("x", source), Var("y", source)
    fa = lambda t: App(f, (t,))
    axioms = _eqs((), (fa(zero(source)), zero(target)), (fa(one(source)), one(target))) + _eqs(
        (x, y), (fa(add(x, y, source)), add(fa(x), fa(y), target)),
        (fa(mul(x, y, source)), mul(fa(x), fa(y), target)))
    return make_extension(None, (), None, {f: ((source,), target)}, axioms)


def surj(f: str = "f", source: str = "A", target: str = "B") -> TheoryExtension:
    x, y = Var("x", source), Var("y", target)
    return TheoryExtension(axioms=(Sequent((y,), TRUE, Exists(x, Eq(App(f, (x,)), y))),))


def builtin(name: str, variant: str = "finite", degree: int = PD_DEGREE):
    """Ring | Ideal | PD | PDIdeal | nil | surj | loc."""
    if name == "Ring":
        return ring_theory()
    if name == "Ideal":
        return ideal()
    if name == "PD":
        return pd(degree=degree)
    if name == "PDIdeal":
        return pd_ideal(degree)
    if name == "nil":
        return nil()
    if name == "surj":
        return surj()
    if name == "loc":
        return loc(variant)
    raise ValueError(f"unknown builtin {name}")


# ---------------------------------------------------------------------------
# presented rings

@dataclass(frozen=True)
class PresentedRing:
    """A ring Z[gens]/(relations), Q[gens]/(relations) or (Z/m)[gens]/(relations).

    Elements are polynomial expressions in the generators (strings, integers
    or sympy expressions).  ``equal`` may supply an equality oracle; the
    default decides equality by reduction modulo a Groebner basis of the
    relations, which is exact over Q and over Z/p and sufficient elsewhere
    when no relations are present.
    """
    base: str = "ZZ"
    generators: tuple = ()
    relations: tuple = ()
    equal: Callable | None = field(default=None, compare=False, hash=False)

    @property
    def modulus(self) -> int:
        return int(self.base[3:]) if self.base.startswith("ZZ/") else 0

    def symbols(self):
        return sympy.symbols(self.generators) if self.generators else ()

    def expr(self, e):
        if isinstance(e, sympy.Basic):
            return e
        if isinstance(e, Fraction):
            return sympy.Rational(e.numerator, e.denominator)
        loc = {g: sympy.Symbol(g) for g in self.generators}
        return sympy.sympify(e, locals=loc)

    def _reduce_coeffs(self, poly: dict) -> dict:
        m = self.modulus
        if m:
            poly = {k: int(v) % m for k, v in poly.items()}
        return {k: v for k, v in poly.items() if v != 0}

    def coefficients(self, e) -> dict:
        """Polynomial of ``e`` as exponent tuple -> coefficient, lexicographic."""
        gens = [sympy.Symbol(g) for g in self.generators]
        ex = sympy.expand(self.expr(e))
        if gens:
            p = sympy.Poly(ex, *gens)
            d = dict(p.terms())
        else:
            d = {(): ex}
        return self._reduce_coeffs({k: sympy.nsimplify(v) for k, v in d.items()})

    def eq(self, a, b) -> bool:
        if self.equal is not None:
            return bool(self.equal(a, b))
        diff = sympy.expand(self.expr(a) - self.expr(b))
        if self.relations:
            gens = [sympy.Symbol(g) for g in self.generators]
            rels = [self.expr(r) for r in self.relations]
            m = self.modulus
            if m and sympy.isprime(m):
                G = sympy.groebner(rels, *gens, modulus=m)
                _, rem = G.reduce(diff)
                return sympy.Poly(rem, *gens, modulus=m).is_zero
            G = sympy.groebner(rels, *gens, domain="QQ")
            _, diff = G.reduce(diff)
        return not self.coefficients(diff)

    def is_finite(self) -> bool:
        return bool(self.modulus) and not self.generators

    def elements(self) -> list:
        if not self.is_finite():
            raise ExtensionError(f"ring {self.base}[{', '.join(self.generators)}] has no finite element list")
        return list(range(self.modulus))

    def normal(self, e):
        """Canonical representative when available (finite rings)."""
        if self.is_finite():
            return int(self.expr(e)) % self.modulus
        return e


def element_term(ring: PresentedRing, e, prefix: str = "c_", sort: str = "A"):
    """The closed term for ``e`` built from generator constants."""
    coeffs = ring.coefficients(e)
    summands = []
    for mono, c in coeffs.items():
        if isinstance(c, sympy.Rational) and not isinstance(c, sympy.Integer):
            raise ExtensionError(f"coefficient {c} is not integral; use the schematic flavor")
        c = int(c)
        factors = []
        for g, k in zip(ring.generators, mono):
            factors += [App(prefix + g)] * int(k)
        if not factors:
            summands.append(numeral(c, sort))
            continue
        t = factors[0]
        for fct in factors[1:]:
            t = mul(t, fct, sort)
        if c == 1:
            summands.append(t)
        elif c == -1:
            summands.append(neg(t, sort))
        else:
            summands.append(mul(numeral(c, sort), t, sort))
    return add_all(summands, sort)


def _rel_const(prefix, e):
    return f"{prefix}{e}"


def alg_structure(ring: PresentedRing, flavor: str = "economical", sort: str = "A",
                  prefix: str = "c_") -> TheoryExtension:
    """AlgStr_K on ``sort``: constants for K and their compatibility axioms."""
    if flavor == "economical":
        funs = {prefix + g: ((), sort) for g in ring.generators}
        axioms = []
        if ring.modulus:
            axioms.append(Sequent((), TRUE, Eq(numeral(ring.modulus, sort), zero(sort))))
        for r in ring.relations:
            axioms.append(Sequent((), TRUE, Eq(element_term(ring, r, prefix, sort), zero(sort))))
        schemas = ()
        if ring.base == "QQ":
            schemas = (AxiomSchema("int_units", (sort,), "max_size"),)
        return make_extension(None, (), None, funs, axioms, schemas)
    if flavor == "schematic":
        elems = ring.elements()
        m = ring.modulus
        c = lambda v: App(_rel_const(prefix, v % m))
        funs = {_rel_const(prefix, v): ((), sort) for v in elems}
        axioms = [Sequent((), TRUE, Eq(c(0), zero(sort))), Sequent((), TRUE, Eq(c(1 % m), one(sort)))]
        for a in elems:
            for b in elems:
                axioms.append(Sequent((), TRUE, Eq(add(c(a), c(b), sort), c(a + b))))
        for a in elems:
            for b in elems:
                axioms.append(Sequent((), TRUE, Eq(mul(c(a), c(b), sort), c(a * b))))
        return make_extension(None, (), None, funs, axioms)
    raise ValueError(f"unknown flavor {flavor}")


def alg(ring: PresentedRing, flavor: str = "economical", prefix: str = "c_") -> TheoryExtension:
    """AlgStr_K as an extension of Ring; Alg_K = Ring + alg(K)."""
    return alg_structure(ring, flavor, "A", prefix)


def constant_funs(ext: TheoryExtension) -> dict:
    return {n: (a, r) for n, a, r in ext.functions}


def element_formula(ring: PresentedRing, e, x: Var, flavor: str = "economical",
                    prefix: str = "c_"):
    """The relational formula 'x = c_e' after desugaring the constants."""
    if flavor == "schematic":
        return RelAtom("R_" + _rel_const(prefix, ring.normal(e)), (x,))
    ext = alg_structure(ring, flavor, x.sort, prefix)
    return desugar_formula(Eq(element_term(ring, e, prefix, x.sort), x), constant_funs(ext))


# ---------------------------------------------------------------------------
# compound theories over K

@dataclass(frozen=True)
class PDRingData:
    """(K, I_K, gamma_K): ideal generators and gamma values on them."""
    ring: PresentedRing
    ideal: tuple = ()
    gamma: tuple = ()   # ((n, generator, value), ...)
    degree: int = PD_DEGREE

    def gamma_of(self, n, g):
        for (k, h, v) in self.gamma:
            if k == n and self.ring.eq(h, g):
                return v
        raise ExtensionError(f"gamma_{n}({g}) not supplied")


def alg_alg_base() -> Theory:
    """AlgAlg(Z, Z): rings A and B with a ring homomorphism f : A -> B."""
    return extend(extend(ring_theory("A"), ring_extension("B")), ring_hom())


def algstr_over(K: PresentedRing, R: PresentedRing, flavor: str = "economical",
                prefix_k: str = "c_", prefix_r: str = "b_") -> TheoryExtension:
    """AlgStr_R over K on sort B, compatible with f and the K-structure on A.

    R is presented as Z[K's generators, further generators]/(relations); the
    generators shared with K are identified along f.
    """
    missing = [g for g in K.generators if g not in R.generators]
    if missing:
        raise ExtensionError(f"R must list K's generators: missing {missing}")
    if K.modulus and R.modulus and K.modulus % R.modulus:
        raise ExtensionError("R is not a K-algebra: characteristic mismatch")
    b = alg_structure(R, flavor, "B", prefix_r)
    if flavor == "economical":
        compat = tuple(Sequent((), TRUE, Eq(App("f", (App(prefix_k + g),)), App(prefix_r + g)))
                       for g in K.generators)
    else:
        compat = tuple(Sequent((), TRUE, Eq(App("f", (App(_rel_const(prefix_k, v)),)),
                                             App(_rel_const(prefix_r, v % R.modulus))))
                       for v in K.elements())
    return add_sum(b, TheoryExtension(axioms=compat))


def alg_alg(K: PresentedRing, R: PresentedRing, flavor="economical") -> TheoryExtension:
    """AlgAlg(K, R) as an extension of AlgAlg(Z, Z)."""
    return add_sum(alg_structure(K, flavor, "A", "c_"), algstr_over(K, R, flavor))


def alg_quot(K: PresentedRing, R: PresentedRing, flavor="economical") -> TheoryExtension:
    """AlgQuot(K, R) = AlgAlg(K, R) + (surj), over AlgAlg(Z, Z)."""
    return add_sum(alg_alg(K, R, flavor), surj())


def ideal_ik(K: PresentedRing, gens, flavor="economical", prefix="c_", member=None) -> TheoryExtension:
    """Ideal plus c_lambda in I for the given generators of I_K."""
    member = member or ideal_member()
    axioms = tuple(Sequent((), TRUE, member(_elem_term(K, g, flavor, prefix))) for g in gens)
    return add_sum(ideal(), TheoryExtension(axioms=axioms))


def _elem_term(K, e, flavor, prefix, sort="A"):
    if flavor == "schematic":
        return App(_rel_const(prefix, K.normal(e)))
    return element_term(K, e, prefix, sort)


def pd_gamma(data: PDRingData, flavor="economical", prefix="c_", sub="S_I") -> TheoryExtension:
    """iota(x) = c_lambda |- iota(gamma_n(x)) = c_{gamma_{K,n}(lambda)} for ideal generators.

    By the sum and scalar rules the gamma values on generators determine
    gamma_K on all of I_K, so the generator instances suffice.
    """
    K = data.ring
    x = Var("x", sub)
    axioms = []
    for g in data.ideal:
        for n in range(1, data.degree + 1):
            val = data.gamma_of(n, g)
            axioms.append(Sequent((x,), Eq(App("iota", (x,)), _elem_term(K, g, flavor, prefix)),
                                  Eq(App("iota", (App(gamma_name(n), (x,)),)),
                                     _elem_term(K, val, flavor, prefix))))
    return TheoryExtension(axioms=tuple(axioms))


def vanishes_in(data: PDRingData, R: PresentedRing) -> bool:
    """I_K maps to zero in R (generators read in R)."""
    return all(R.eq(g, 0) for g in data.ideal)


def compound(name: str, *args, **kw) -> TheoryExtension:
    if name == "AlgAlg":
        return alg_alg(*args, **kw)
    if name == "AlgQuot":
        return alg_quot(*args, **kw)
    if name == "Ideal_IK":
        return ideal_ik(*args, **kw)
    if name == "PD_gamma":
        data = args[0]
        R = kw.pop("R", None)
        if R is not None and not vanishes_in(data, R):
            raise ExtensionError("I_K does not vanish in R")
        return pd_gamma(data, **kw)
    if name == "AlgStr_R_over_K":
        return algstr_over(*args, **kw)
    raise ValueError(f"unknown compound {name}")


def crystalline_base(degree: int = PD_DEGREE) -> Theory:
    """AlgQuot(Z, Z) + PD + (nil) + (loc) with the kernel of f as the ideal."""
    member = kernel_member()
    t = extend(alg_alg_base(), surj())
    t = extend(t, pd(member, degree))
    t = extend(t, nil(member))
    return extend(t, loc("finite"))


# ---------------------------------------------------------------------------
# importing a finite set

def import_set(elements, functions: dict = None, relations: dict = None, sort: str = "Abar") -> Theory:
    """Sort, constants c_a, distinctness, covering, and the graphs of imported data.

    ``functions`` maps a name to (arity, python function); ``relations`` maps
    a name to (arity, set of tuples).
    """
    elems = sorted(elements, key=repr)
    c = lambda a: App(f"c_{a}")
    funs = {f"c_{a}": ((), sort) for a in elems}
    axioms = []
    for i, a in enumerate(elems):
        for b in elems[i + 1:]:
            axioms.append(Sequent((), Eq(c(a), c(b)), FALSE))
    x = Var("x", sort)
    axioms.append(Sequent((x,), TRUE, Or(tuple(Eq(x, c(a)) for a in elems))))
    rels = {}
    for name, (k, fn) in sorted((functions or {}).items()):
        funs[name] = ((sort,) * k, sort)
        for tup in itertools.product(elems, repeat=k):
            axioms.append(Sequent((), TRUE, Eq(App(name, tuple(c(a) for a in tup)), c(fn(*tup)))))
    for name, (k, members) in sorted((relations or {}).items()):
        rels[name] = (sort,) * k
        for tup in itertools.product(elems, repeat=k):
            atom = RelAtom(name, tuple(c(a) for a in tup))
            if tup in members:
                axioms.append(Sequent((), TRUE, atom))
            else:
                axioms.append(Sequent((), atom, FALSE))
    sig = Signature.make((sort,), rels, funs)
    return Theory(sig, tuple(axioms))


ZZ = PresentedRing("ZZ")
QQ = PresentedRing("QQ")


def zmod(m: int) -> PresentedRing:
    return PresentedRing(f"ZZ/{m}")


def poly_ring(*gens, base="ZZ", relations=()) -> PresentedRing:
    return PresentedRing(base, tuple(gens), tuple(relations))
