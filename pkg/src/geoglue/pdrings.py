"""Exact divided-power arithmetic.

A truncated PD polynomial algebra K<X...>[Y...] / (gamma_n(X), n > d) is free
over the base ring K with basis gamma_{n_1}(X_1)...gamma_{n_r}(X_r) Y^k.
Products of divided powers follow gamma_a(X) gamma_b(X) = C(a+b, a) gamma_{a+b}(X);
the omitted basis elements span a sub-PD-ideal, so the quotient is again a
PD ring.  Base rings are ZZ, QQ and ZZ/m, tagged as in ``library``.
"""
from __future__ import annotations

import ast
import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from math import comb, factorial, gcd


class PDError(ValueError):
    pass


def composition_coefficient(m: int, n: int) -> int:
    """(mn)! / (m! (n!)^m), the constant in gamma_m(gamma_n(x))."""
    return factorial(m * n) // (factorial(m) * factorial(n) ** m)


# --- base rings -----------------------------------------------------------

@dataclass(frozen=True)
class BasePD:
    """A base PD ring (K, I_K, gamma_K) with K in {ZZ, QQ, ZZ/m}.

    ``table`` holds ((n, generator), value) pairs.  Over QQ any nonzero
    generator makes I_K the whole field with gamma_n(c) = c^n / n!.  Indices
    above ``degree`` are read as zero, the same truncation convention as for
    the variables.
    """
    tag: str = "ZZ"
    ideal: tuple = ()
    table: tuple = ()
    degree: int = 0

    @property
    def modulus(self) -> int:
        return int(self.tag[3:]) if self.tag.startswith("ZZ/") else 0

    def norm(self, c):
        if self.tag == "QQ":
            return Fraction(c)
        if isinstance(c, Fraction):
            if c.denominator != 1:
                raise PDError(f"{c} is not in {self.tag}")
            c = c.numerator
        m = self.modulus
        return int(c) % m if m else int(c)

    def show(self, c) -> str:
        return str(c)

    @staticmethod
    def from_data(data) -> "BasePD":
        """Base PD ring from ``library.PDRingData`` over a coefficient ring."""
        ring = data.ring
        if ring.generators:
            raise PDError("only coefficient rings ZZ, QQ, ZZ/m are supported as PD bases")
        base = BasePD(ring.base)
        gens = tuple(base.norm(int(g)) for g in data.ideal)
        table = tuple(sorted(((n, base.norm(int(g))), base.norm(int(v))) for (n, g, v) in data.gamma))
        return BasePD(ring.base, gens, table, data.degree)

    def _lookup(self, n, g):
        for (k, h), v in self.table:
            if k == n and h == g:
                return v
        if n > self.degree:
            return self.norm(0)
        raise PDError(f"gamma_{n}({g}) not supplied")

    def _decompose(self, c):
        """Coefficients lam with c = sum lam_i g_i, least tuple first."""
        c = self.norm(c)
        gens = [g for g in self.ideal if self.norm(g) != 0]
        if c == 0:
            return ()
        m = self.modulus
        if m:
            for lam in itertools.product(range(m), repeat=len(gens)):
                if self.norm(sum(l * g for l, g in zip(lam, gens))) == c:
                    return tuple(zip(lam, gens))
            return None
        if len(gens) != 1:
            return None if not gens else self._decompose_zz(c, gens)
        g = gens[0]
        return ((c // g, g),) if c % g == 0 else None

    def _decompose_zz(self, c, gens):
        if any(c % g == 0 for g in gens):
            g = next(g for g in gens if c % g == 0)
            return ((c // g, g),)
        return None

    def in_ideal(self, c) -> bool:
        c = self.norm(c)
        if c == 0:
            return True
        if self.tag == "QQ":
            return any(Fraction(g) != 0 for g in self.ideal)
        return self._decompose(c) is not None

    def gamma_seq(self, c, n: int) -> list:
        """[gamma_0(c), ..., gamma_n(c)] computed from the table."""
        c = self.norm(c)
        one, zero = self.norm(1), self.norm(0)
        if c == 0:
            return [one] + [zero] * n
        if not self.in_ideal(c):
            raise PDError(f"{c} is not in the base PD ideal")
        if self.tag == "QQ":
            return [c ** k / factorial(k) for k in range(n + 1)]
        seq = [one] + [zero] * n
        for lam, g in self._decompose(c):
            part = [one] + [self.norm(lam ** k * self._lookup(k, g)) for k in range(1, n + 1)]
            seq = [self.norm(sum(seq[i] * part[k - i] for i in range(k + 1))) for k in range(n + 1)]
        return seq


def modular_pd_data(m: int, generator: int, degree: int = 4):
    """PD data on (generator) in ZZ/m induced from gamma_n(g) = g^n / n! over Q.

    Valid when every g^n / n! has denominator prime to m, e.g. g = 2 in
    ZZ/4, where gamma_3(2) = 0 and gamma_4(2) = 2.
    """
    from .library import PDRingData, zmod

    table = []
    for n in range(1, degree + 1):
        q = Fraction(generator ** n, factorial(n))
        if gcd(q.denominator, m) != 1:
            raise PDError(f"{generator}^{n}/{n}! is not defined in ZZ/{m}")
        table.append((n, generator, q.numerator * pow(q.denominator, -1, m) % m))
    return PDRingData(zmod(m), (generator,), tuple(table), degree)


# --- algebra elements -----------------------------------------------------

@dataclass(frozen=True, order=True)
class PDMonomial:
    x: tuple = ()   # divided degrees, one per X-variable
    y: tuple = ()   # ordinary exponents, one per Y-variable

    def __post_init__(self):
        if any(n < 0 for n in self.x):
            raise PDError("divided degrees must be nonnegative")

    @property
    def x_degree(self) -> int:
        return sum(self.x)


@dataclass(frozen=True)
class TruncatedPDAlgebra:
    base: BasePD = BasePD()
    xvars: tuple = ("X",)
    yvars: tuple = ()
    degree: int = 4
    inverted: tuple = ()   # Y-variables made invertible by localization

    def __post_init__(self):
        names = self.xvars + self.yvars
        if len(set(names)) != len(names):
            raise PDError("variable names must be distinct")
        if any(v not in self.yvars for v in self.inverted):
            raise PDError("only Y-variables can be inverted")

    @property
    def gamma_degree(self) -> int:
        return max(self.degree, self.base.degree)

    def element(self, terms) -> "PDElement":
        """Element from (monomial, coefficient) pairs or a dict."""
        items = terms.items() if isinstance(terms, dict) else terms
        acc = {}
        for mono, c in items:
            if len(mono.x) != len(self.xvars) or len(mono.y) != len(self.yvars):
                raise PDError("monomial shape does not match the algebra")
            if any(n > self.degree for n in mono.x):
                continue
            for v, k in zip(self.yvars, mono.y):
                if k < 0 and v not in self.inverted:
                    raise PDError(f"negative exponent on {v}, which is not inverted")
            acc[mono] = acc.get(mono, 0) + c
        out = []
        for mono in sorted(acc):
            c = self.base.norm(acc[mono])
            if c != 0:
                out.append((mono, c))
        return PDElement(self, tuple(out))

    def _unit(self):
        return PDMonomial((0,) * len(self.xvars), (0,) * len(self.yvars))

    def const(self, c) -> "PDElement":
        return self.element([(self._unit(), c)])

    def zero(self) -> "PDElement":
        return self.element([])

    def one(self) -> "PDElement":
        return self.const(1)

    def x(self, name: str, n: int = 1) -> "PDElement":
        """The basis element gamma_n(name)."""
        i = self.xvars.index(name)
        xs = tuple(n if j == i else 0 for j in range(len(self.xvars)))
        return self.element([(PDMonomial(xs, (0,) * len(self.yvars)), 1)])

    def y(self, name: str, k: int = 1) -> "PDElement":
        i = self.yvars.index(name)
        ys = tuple(k if j == i else 0 for j in range(len(self.yvars)))
        return self.element([(PDMonomial((0,) * len(self.xvars), ys), 1)])

    def in_ideal(self, e: "PDElement") -> bool:
        """Canonical PD ideal: I_K-coefficients or positive X-degree."""
        return all(m.x_degree > 0 or self.base.in_ideal(c) for m, c in e.terms)

    def gamma(self, n: int, e: "PDElement", reverse: bool = False) -> "PDElement":
        return gamma(n, e, reverse)

    def parse(self, text: str) -> "PDElement":
        return parse_element(self, text)

    def basis(self, y_bound: int = 0):
        """Monomials with divided degrees <= d and |Y-exponents| <= y_bound."""
        xs = itertools.product(range(self.degree + 1), repeat=len(self.xvars))
        ranges = [range(-y_bound if v in self.inverted else 0, y_bound + 1) for v in self.yvars]
        ys = list(itertools.product(*ranges))
        return [PDMonomial(a, b) for a in xs for b in ys]


def _mono_mul(alg: TruncatedPDAlgebra, a: PDMonomial, b: PDMonomial):
    coeff = 1
    xs = []
    for p, q in zip(a.x, b.x):
        if p + q > alg.degree:
            return None, 0
        coeff *= comb(p + q, p)
        xs.append(p + q)
    return PDMonomial(tuple(xs), tuple(p + q for p, q in zip(a.y, b.y))), coeff


@dataclass(frozen=True)
class PDElement:
    alg: TruncatedPDAlgebra
    terms: tuple = ()   # sorted (PDMonomial, coefficient), no zero coefficients

    def _same(self, other) -> "PDElement":
        if isinstance(other, PDElement):
            if other.alg != self.alg:
                raise PDError("elements belong to different algebras")
            return other
        return self.alg.const(other)

    def __add__(self, other):
        other = self._same(other)
        return self.alg.element(list(self.terms) + list(other.terms))

    __radd__ = __add__

    def __neg__(self):
        return self.alg.element([(m, -c) for m, c in self.terms])

    def __sub__(self, other):
        return self + (-self._same(other))

    def __rsub__(self, other):
        return self._same(other) - self

    def __mul__(self, other):
        other = self._same(other)
        acc = []
        for (m1, c1), (m2, c2) in itertools.product(self.terms, other.terms):
            mono, k = _mono_mul(self.alg, m1, m2)
            if mono is not None:
                acc.append((mono, c1 * c2 * k))
        return self.alg.element(acc)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise PDError("negative powers are not supported")
        out = self.alg.one()
        for _ in range(k):
            out = out * self
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def __str__(self):
        return show_element(self)


def show_element(e: PDElement) -> str:
    alg = e.alg
    if not e.terms:
        return "0"
    parts = []
    for mono, c in e.terms:
        factors = []
        for v, n in zip(alg.xvars, mono.x):
            if n == 1:
                factors.append(v)
            elif n > 1:
                factors.append(f"g{n}({v})")
        for v, k in zip(alg.yvars, mono.y):
            if k == 1:
                factors.append(v)
            elif k != 0:
                factors.append(f"{v}^{k}")
        if not factors:
            parts.append(str(c))
        elif c == 1:
            parts.append("*".join(factors))
        else:
            parts.append(f"{c}*" + "*".join(factors))
    return " + ".join(parts)


def parse_element(alg: TruncatedPDAlgebra, text: str) -> PDElement:
    """Parse sums/products of integers, variables, g<n>(X) and Y^k (k may be negative)."""
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise PDError(f"cannot parse element {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return alg.const(node.value)
        if isinstance(node, ast.Name):
            if node.id in alg.xvars:
                return alg.x(node.id)
            if node.id in alg.yvars:
                return alg.y(node.id)
            raise PDError(f"unknown variable {node.id}")
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                k = _int_literal(node.right)
                if isinstance(node.left, ast.Name) and node.left.id in alg.yvars:
                    return alg.y(node.left.id, k)
                return ev(node.left) ** k
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and len(node.args) == 1:
            name = node.func.id
            if name.startswith("g") and name[1:].isdigit():
                arg = node.args[0]
                if isinstance(arg, ast.Name) and arg.id in alg.xvars:
                    return alg.x(arg.id, int(name[1:]))
                return gamma(int(name[1:]), ev(arg))
        raise PDError(f"unsupported syntax in {text!r}")

    return ev(tree.body)


def _int_literal(node) -> int:
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return node.value
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return -_int_literal(node.operand)
    raise PDError("exponents must be integer literals")


def arith(op: str, *operands: PDElement) -> PDElement:
    """``add`` and ``mul`` fold over the operands; ``scalar`` takes (c, e)."""
    if op == "scalar":
        c, e = operands
        return e.alg.const(c) * e
    if not operands:
        raise PDError("arith needs operands")
    if op not in ("add", "mul"):
        raise PDError(f"unknown operation {op}")
    out = operands[0]
    for e in operands[1:]:
        out = out + e if op == "add" else out * e
    return out


# --- gamma ----------------------------------------------------------------

def _term_gammas(alg: TruncatedPDAlgebra, mono: PDMonomial, c, n: int) -> list:
    """[gamma_0(t), ..., gamma_n(t)] for the single term t = c * mono."""
    one = alg.one()
    if mono.x_degree > 0:
        # scalar rule around the divided-power factor of highest index
        j = max(range(len(mono.x)), key=lambda i: (mono.x[i], -i))
        a = mono.x[j]
        lam = alg.element([(PDMonomial(tuple(0 if i == j else k for i, k in enumerate(mono.x)),
                                       mono.y), c)])
        out = [one]
        lam_k = one
        for k in range(1, n + 1):
            lam_k = lam_k * lam
            if k * a > alg.degree:
                out.append(alg.zero())
                continue
            comp = composition_coefficient(k, a)
            out.append(lam_k * (comp * alg.x(alg.xvars[j], k * a)))
        return out
    base = alg.base.gamma_seq(c, n)
    out = [one]
    for k in range(1, n + 1):
        ys = tuple(k * e for e in mono.y)
        out.append(alg.element([(PDMonomial(mono.x, ys), base[k])]))
    return out


def gamma_sequence(n: int, e: PDElement, reverse: bool = False) -> list:
    """[gamma_0(e), ..., gamma_n(e)] by the sum rule over the terms of e."""
    alg = e.alg
    if not alg.in_ideal(e):
        raise PDError(f"{show_element(e)} is not in the PD ideal")
    seq = [alg.one()] + [alg.zero()] * n
    terms = list(reversed(e.terms)) if reverse else list(e.terms)
    for mono, c in terms:
        part = _term_gammas(alg, mono, c, n)
        seq = [arith("add", *[seq[i] * part[k - i] for i in range(k + 1)]) for k in range(n + 1)]
    return seq


def gamma(n: int, e: PDElement, reverse: bool = False) -> PDElement:
    """gamma_n(e) for e in the PD ideal; ``reverse`` flips the expansion order."""
    if n < 1:
        raise PDError("gamma_n needs n >= 1")
    return gamma_sequence(n, e, reverse)[n]


# --- localization -----------------------------------------------------------

def localize(alg: TruncatedPDAlgebra, at: str) -> TruncatedPDAlgebra:
    """The algebra with the Y-variable ``at`` inverted.

    gamma extends by gamma_n(a'/Y^k) = gamma_n(a')/Y^(nk), which is what the
    scalar rule computes once negative exponents are allowed.
    """
    if at in alg.xvars:
        raise PDError(f"cannot localize at the divided-power variable {at}")
    if at not in alg.yvars:
        raise PDError(f"unknown variable {at}")
    if at in alg.inverted:
        return alg
    return replace(alg, inverted=tuple(sorted(alg.inverted + (at,))))


def localization_map(e: PDElement, target: TruncatedPDAlgebra) -> PDElement:
    if replace(target, inverted=()) != replace(e.alg, inverted=()) or \
            not set(e.alg.inverted) <= set(target.inverted):
        raise PDError("target is not a localization of the source algebra")
    return target.element(list(e.terms))


# --- ideals and saturation ----------------------------------------------------

@dataclass(frozen=True)
class PDIdealHandle:
    alg: TruncatedPDAlgebra
    generators: tuple = ()

    def __post_init__(self):
        for g in self.generators:
            if g.alg != self.alg:
                raise PDError("generator from a different algebra")
            if not self.alg.in_ideal(g):
                raise PDError(f"generator {show_element(g)} is not in the PD ideal")


def _solve_field(rows, vec) -> bool:
    rows = [list(r) for r in rows]
    vec = list(vec)
    pivots = []
    for col in range(len(vec)):
        idx = next((i for i, r in enumerate(rows) if r[col] != 0), None)
        if idx is None:
            continue
        piv = rows.pop(idx)
        piv = [Fraction(x) / piv[col] for x in piv]
        rows = [[x - r[col] * p for x, p in zip(r, piv)] for r in rows]
        pivots.append((col, piv))
    for col, piv in pivots:
        if vec[col] != 0:
            q = vec[col]
            vec = [x - q * p for x, p in zip(vec, piv)]
    return all(x == 0 for x in vec)


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _solve_integer(rows, vec, modulus: int = 0) -> bool:
    """Is vec in the Z-span of rows (plus modulus * unit vectors)?"""
    n = len(vec)
    rows = [list(r) for r in rows]
    if modulus:
        rows += [[modulus if i == j else 0 for j in range(n)] for i in range(n)]
    vec = list(vec)

    def red(r, start):
        return r if not modulus else r[:start] + [x % modulus for x in r[start:]]

    pivots = []
    for col in range(n):
        active = [r for r in rows if r[col] != 0]
        rows = [r for r in rows if r[col] == 0]
        if not active:
            continue
        piv = active[0]
        for r in active[1:]:
            g, s, t = _xgcd(piv[col], r[col])
            a, b = piv[col] // g, r[col] // g
            new_r = red([b * p - a * q for p, q in zip(piv, r)], col + 1)
            piv = red([s * p + t * q for p, q in zip(piv, r)], col + 1)
            if any(new_r):
                rows.append(new_r)
        pivots.append((col, piv))
    for col, piv in pivots:
        if vec[col] % piv[col]:
            return False
        q = vec[col] // piv[col]
        vec = [x - q * p for x, p in zip(vec, piv)]
        if modulus:
            vec = [x % modulus for x in vec]
    return all(x == 0 for x in vec)


def ideal_contains(ideal: PDIdealHandle, h: PDElement, oracle=None) -> bool:
    """Membership of h in the ideal generated by the handle's generators.

    Cofactors range over basis monomials whose Y-exponents are bounded by
    the largest exponent occurring in h and the generators, which decides
    membership for the monomial-bounded ideals produced by saturation.
    """
    alg = ideal.alg
    if oracle is not None:
        return bool(oracle(ideal, h))
    if alg.inverted:
        raise PDError("membership test unavailable for localized algebras; supply an oracle")
    if h.is_zero():
        return True
    bound = max([abs(k) for e in (h,) + ideal.generators for m, _ in e.terms for k in m.y] + [0])
    cofactors = alg.basis(bound)
    products = [m_elt * g for g in ideal.generators
                for m_elt in (alg.element([(m, 1)]) for m in cofactors)]
    cols = sorted({m for e in products + [h] for m, _ in e.terms})
    index = {m: i for i, m in enumerate(cols)}

    def vec(e):
        v = [0] * len(cols)
        for m, c in e.terms:
            v[index[m]] = c
        return v

    rows = [vec(p) for p in products if not p.is_zero()]
    if alg.base.tag == "QQ":
        return _solve_field(rows, vec(h))
    return _solve_integer(rows, vec(h), alg.base.modulus)


def pd_saturate(ideal: PDIdealHandle, oracle=None) -> PDIdealHandle:
    """Close the generator list under gamma_n, n >= 2, up to the truncation.

    One round suffices: the ideal generated by the gamma_n of a generating set
    is already a sub-PD-ideal.  The fixed point is verified by membership.
    """
    alg = ideal.alg
    top = alg.gamma_degree
    gens = list(ideal.generators)
    for g in ideal.generators:
        for e in gamma_sequence(top, g)[2:]:
            if not e.is_zero() and e not in gens:
                gens.append(e)
    out = PDIdealHandle(alg, tuple(gens))
    for g in gens:
        for e in gamma_sequence(top, g)[1:]:
            if not ideal_contains(out, e, oracle):
                raise PDError(f"saturation is not closed at {show_element(e)}")
    return out


# --- nilpotence ---------------------------------------------------------------

@dataclass(frozen=True)
class NilWitness:
    k: int                  # least k with gamma_n(a)^k = 0
    bound: int              # ceil(e/n) (n + 1)
    coefficient: Fraction   # (bound*n - e)! / (n!)^bound, integral

    @property
    def certified(self) -> bool:
        return self.k <= self.bound and self.coefficient.denominator == 1


def nil_bound(n: int, e: int) -> int:
    return -(-e // n) * (n + 1)


def nil_coefficient(n: int, e: int, k: int) -> Fraction:
    """c in gamma_n(X)^k = c X^e gamma_{kn-e}(X)."""
    return Fraction(factorial(k * n - e), factorial(n) ** k)


def nil_witness(a: PDElement, e: int, n: int) -> NilWitness:
    """Least k with gamma_n(a)^k = 0, given a^e = 0, with the certified bound."""
    if n < 1 or e < 1:
        raise PDError("n and e must be positive")
    if not (a ** e).is_zero():
        raise PDError(f"a^{e} is not zero")
    bound = nil_bound(n, e)
    g = gamma(n, a)
    p = g
    for k in range(1, bound + 1):
        if p.is_zero():
            return NilWitness(k, bound, nil_coefficient(n, e, bound))
        p = p * g
    raise PDError(f"gamma_{n}(a)^{bound} is not zero")


def universal_nil_index(n: int, e: int) -> int:
    """Least k with gamma_n(X)^k = 0 in Z<X> / (X^e) saturated.

    The saturated ideal is generated by gamma_m(X^e) = (me)!/m! gamma_{me}(X),
    so it is spanned by integer multiples of basis elements and the quotient
    is Z/g_N in degree N, with g_N the gcd of (me)!/m! C(N, me) over me <= N.
    gamma_n(X)^k = (kn)!/(n!)^k gamma_{kn}(X).
    """
    if n < 1 or e < 1:
        raise PDError("n and e must be positive")
    k = 1
    while True:
        N = k * n
        g = 0
        for m in range(1, N // e + 1):
            g = gcd(g, factorial(m * e) // factorial(m) * comb(N, m * e))
        c = factorial(N) // factorial(n) ** k
        if g and c % g == 0:
            return k
        k += 1


# --- axiom checking -------------------------------------------------------------

@dataclass(frozen=True)
class PDFailure:
    axiom: str
    witness: str
    lhs: str
    rhs: str


@dataclass(frozen=True)
class PDReport:
    checked: int
    failures: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.failures

    def describe(self) -> str:
        if self.ok:
            return f"all {self.checked} gamma-axiom instances hold"
        lines = [f"{len(self.failures)} of {self.checked} instances fail"]
        lines += [f"{f.axiom} at {f.witness}: {f.lhs} != {f.rhs}" for f in self.failures]
        return "\n".join(lines)


def as_algebra(data) -> TruncatedPDAlgebra:
    """A variable-free algebra over the base PD ring of ``PDRingData``."""
    if isinstance(data, TruncatedPDAlgebra):
        return data
    return TruncatedPDAlgebra(BasePD.from_data(data), (), (), 0)


def check_pd_axioms(data, samples, scalars=None, limit: int = 0) -> PDReport:
    """Evaluate the five gamma-axioms on samples.

    ``samples`` are elements (or integers for ``PDRingData``); those in the
    PD ideal serve as x, y and all of them (or ``scalars``) as lambda.
    Indices run up to the largest degree for which gamma is tabulated.
    ``limit`` > 0 keeps only the first that many failures.
    """
    alg = as_algebra(data)
    elts = [s if isinstance(s, PDElement) else alg.const(s) for s in samples]
    lams = elts if scalars is None else [s if isinstance(s, PDElement) else alg.const(s)
                                         for s in scalars]
    xs = [e for e in elts if alg.in_ideal(e)]
    top = alg.gamma_degree
    seqs = {}

    def g(k, x):
        if x not in seqs:
            seqs[x] = gamma_sequence(top, x)
        return seqs[x][k]

    failures = []
    count = 0

    def check(name, witness, lhs, rhs):
        nonlocal count
        count += 1
        if lhs != rhs and (not limit or len(failures) < limit):
            failures.append(PDFailure(name, witness, show_element(lhs), show_element(rhs)))

    for x in xs:
        check("unit", f"x={x}", g(1, x), x)
        for n in range(1, top + 1):
            count += 1
            if not alg.in_ideal(g(n, x)) and (not limit or len(failures) < limit):
                failures.append(PDFailure("closure", f"n={n}, x={x}", show_element(g(n, x)),
                                          "an element of the PD ideal"))
        for m in range(1, top + 1):
            for n in range(1, top + 1):
                if m + n <= top:
                    check("product", f"m={m}, n={n}, x={x}", g(m, x) * g(n, x),
                          comb(m + n, m) * g(m + n, x))
                if m * n <= top and alg.in_ideal(g(n, x)):
                    check("composition", f"m={m}, n={n}, x={x}", g(m, g(n, x)),
                          composition_coefficient(m, n) * g(m * n, x))
        for lam in lams:
            lx = lam * x
            for n in range(1, top + 1):
                check("scalar", f"n={n}, lambda={lam}, x={x}", g(n, lx), lam ** n * g(n, x))
    for x, y in itertools.product(xs, repeat=2):
        s = x + y
        for n in range(1, top + 1):
            rhs = arith("add", *[g(i, x) * g(n - i, y) for i in range(n + 1)])
            check("sum", f"n={n}, x={x}, y={y}", g(n, s), rhs)
    return PDReport(count, tuple(failures))
