"""Theory extensions as first-class deltas.

An extension adds sorts, relation and function symbols and axioms to a base
theory.  This module implements sums of extensions, systems of extensions
over finite posets, desugaring of function symbols into relations,
conditional extensions, extension by definitions and materialization of
subobjects and quotients.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, replace

from .syntax import (
    And, App, Eq, Exists, Or, RelAtom, SchemaOr, Sequent,
    Signature, Theory, TRUE, Var, all_var_names, check_sequent, check_wellformed, conjuncts,
    flatten, free_vars, fresh_name, normalize, show,
    _subst,
)


class ExtensionError(ValueError):
    pass


@dataclass(frozen=True)
class TheoryExtension:
    """Delta of sorts, symbols and axioms over ``base``.

    ``base`` may be ``None`` for a free-standing extension whose base is only
    fixed when it is applied.  ``obligations`` are sequents that must hold in
    every model for the extension to be an equivalence extension; they are
    not axioms and are discharged by finite model checks.
    """
    base: Theory | None = None
    sorts: tuple = ()
    relations: tuple = ()
    functions: tuple = ()
    axioms: tuple = ()
    schemas: tuple = ()
    obligations: tuple = ()

    @property
    def signature(self) -> Signature:
        return Signature(self.sorts, self.relations, self.functions)

    def is_localic(self) -> bool:
        return not self.sorts

    def is_quotient(self) -> bool:
        return not (self.sorts or self.relations or self.functions)

    def names(self) -> set:
        return set(self.sorts) | {r[0] for r in self.relations} | {f[0] for f in self.functions}


EMPTY = TheoryExtension()


def make_extension(base=None, sorts=(), relations=None, functions=None, axioms=(),
                   schemas=(), obligations=()) -> TheoryExtension:
    sig = Signature.make(sorts, relations, functions)
    return TheoryExtension(base, sig.sorts, sig.relations, sig.functions,
                           tuple(axioms), tuple(schemas), tuple(obligations))


def axiom_extension(*axioms, base=None) -> TheoryExtension:
    return TheoryExtension(base, axioms=tuple(axioms))


def proposition(name: str, base=None) -> TheoryExtension:
    return TheoryExtension(base, relations=((name, ()),))


# ---------------------------------------------------------------------------
# applying and summing

@functools.lru_cache(maxsize=512)
def _normal(theory: Theory) -> Theory:
    return normalize(theory)


def _contains(big: Theory, small: Theory) -> bool:
    bs, ss = big.signature, small.signature
    if not (set(ss.sorts) <= set(bs.sorts) and set(ss.relations) <= set(bs.relations)
            and set(ss.functions) <= set(bs.functions)):
        return False
    nb, ns = _normal(big), _normal(small)
    return set(ns.axioms) <= set(nb.axioms) and set(ns.schemas) <= set(nb.schemas)


def extend(base: Theory, ext: TheoryExtension) -> Theory:
    """T + E without normalization (axioms appended in order)."""
    if ext.base is not None and ext.base != base and not _contains(base, ext.base):
        raise ExtensionError("base mismatch: extension is not over this theory")
    clash = ext.names() & (set(base.signature.sorts) | base.signature.symbol_names())
    if clash:
        raise ExtensionError(f"name clash: {', '.join(sorted(clash))}")
    sorts = set(base.signature.sorts) | set(ext.sorts)
    for n, ar in ext.relations:
        for s in ar:
            if s not in sorts:
                raise ExtensionError(f"dangling sort reference {s} in relation {n}")
    for n, ar, r in ext.functions:
        for s in ar + (r,):
            if s not in sorts:
                raise ExtensionError(f"dangling sort reference {s} in function {n}")
    return Theory(base.signature.merge(ext.signature), base.axioms + ext.axioms,
                  base.schemas + ext.schemas)


def apply_extension(base: Theory, ext: TheoryExtension) -> Theory:
    """T + E in canonical form."""
    return normalize(extend(base, ext))


def extend_all(base: Theory, *exts) -> Theory:
    for e in exts:
        base = extend(base, e)
    return base


def add_sum(e1: TheoryExtension, e2: TheoryExtension) -> TheoryExtension:
    """E1 + E2; the second summand may refer to the symbols of the first."""
    clash = e1.names() & e2.names()
    if clash:
        raise ExtensionError(f"name clash: {', '.join(sorted(clash))}")
    return TheoryExtension(e1.base if e1.base is not None else e2.base,
                           e1.sorts + e2.sorts, e1.relations + e2.relations,
                           e1.functions + e2.functions, e1.axioms + e2.axioms,
                           e1.schemas + e2.schemas, e1.obligations + e2.obligations)


def sum_all(exts, base=None) -> TheoryExtension:
    out = TheoryExtension(base)
    for e in exts:
        out = add_sum(out, e)
    return out


def theory_as_extension(theory: Theory) -> TheoryExtension:
    sig = theory.signature
    return TheoryExtension(None, sig.sorts, sig.relations, sig.functions, theory.axioms,
                           theory.schemas)


def difference(big: Theory, small: Theory) -> TheoryExtension:
    """The extension E with small + E = big (as raw signatures and axiom lists)."""
    bs, ss = big.signature, small.signature
    return TheoryExtension(
        small,
        tuple(s for s in bs.sorts if s not in ss.sorts),
        tuple(r for r in bs.relations if r not in ss.relations),
        tuple(f for f in bs.functions if f not in ss.functions),
        tuple(a for a in big.axioms if a not in small.axioms),
        tuple(s for s in big.schemas if s not in small.schemas),
    )


# ---------------------------------------------------------------------------
# posets and systems

@dataclass(frozen=True)
class ExtensionSystem:
    """Extensions ``E_i`` indexed by a finite poset.

    ``order`` lists the pairs (j, i) with j <= i, reflexive pairs included.
    """
    elements: tuple
    order: frozenset
    assignment: tuple  # ((i, TheoryExtension), ...)

    def le(self, j, i) -> bool:
        return (j, i) in self.order

    def ext(self, i) -> TheoryExtension:
        return dict(self.assignment)[i]


def simplex_poset(index) -> tuple:
    """Delta(I): nonempty subsets of I ordered by inclusion, as (elements, order)."""
    idx = sorted(index)
    elems = tuple(frozenset(c) for k in range(1, len(idx) + 1)
                  for c in itertools.combinations(idx, k))
    order = frozenset((a, b) for a in elems for b in elems if a <= b)
    return elems, order


def make_system(elements, order, assignment: dict) -> ExtensionSystem:
    elements = tuple(elements)
    order = frozenset(order) | {(e, e) for e in elements}
    for (a, b) in order:
        for (c, d) in order:
            if b == c and (a, d) not in order:
                raise ExtensionError("order relation is not transitive")
        if a != b and (b, a) in order:
            raise ExtensionError("order relation is not antisymmetric")
    return ExtensionSystem(elements, order, tuple((e, assignment[e]) for e in elements))


# ---------------------------------------------------------------------------
# desugaring function symbols

def rel_name(fun: str) -> str:
    return "R_" + fun


def _desugar_atom(atom, funs: dict, avoid: set):
    """Flatten delta-function applications of one atom with fresh witnesses."""
    binders, guards = [], []

    def fresh(sort):
        name = fresh_name("y", avoid)
        avoid.add(name)
        v = Var(name, sort)
        binders.append(v)
        return v

    def flat(t):
        if isinstance(t, Var):
            return t
        args = tuple(flat(a) for a in t.args)
        if t.fun in funs:
            v = fresh(funs[t.fun][1])
            guards.append(RelAtom(rel_name(t.fun), args + (v,)))
            return v
        return App(t.fun, args)

    def flat_top(t, other):
        # f(args) = s becomes R_f(args, s) without an extra witness
        args = tuple(flat(a) for a in t.args)
        o = flat(other)
        return RelAtom(rel_name(t.fun), args + (o,))

    if isinstance(atom, Eq):
        if isinstance(atom.lhs, App) and atom.lhs.fun in funs:
            core = flat_top(atom.lhs, atom.rhs)
        elif isinstance(atom.rhs, App) and atom.rhs.fun in funs:
            core = flat_top(atom.rhs, atom.lhs)
        else:
            core = Eq(flat(atom.lhs), flat(atom.rhs))
    elif isinstance(atom, RelAtom):
        core = RelAtom(atom.rel, tuple(flat(a) for a in atom.args))
    else:
        core = replace(atom, args=tuple(flat(a) for a in atom.args))
    if not binders:
        return core
    out = And(tuple(guards) + (core,))
    for v in reversed(binders):
        out = Exists(v, out)
    return out


def desugar_formula(f, funs: dict, avoid: set = None):
    """Replace applications of the functions in ``funs`` (name -> (args, result))."""
    if avoid is None:
        avoid = set(all_var_names(f))
    if isinstance(f, (RelAtom, Eq, SchemaOr)):
        return _desugar_atom(f, funs, avoid)
    if isinstance(f, (And, Or)):
        return type(f)(tuple(desugar_formula(p, funs, avoid) for p in f.parts))
    if isinstance(f, Exists):
        avoid.add(f.var.name)
        return Exists(f.var, desugar_formula(f.body, funs, avoid))
    raise TypeError(f)


def desugar_sequent(s: Sequent, funs: dict) -> Sequent:
    avoid = {v.name for v in s.context} | all_var_names(s.antecedent) | all_var_names(s.consequent)
    return Sequent(s.context, desugar_formula(s.antecedent, funs, avoid),
                   desugar_formula(s.consequent, funs, avoid))


def graph_axioms(name: str, args, result) -> tuple:
    """Totality and uniqueness of the relation standing for a function."""
    xs = tuple(Var(f"x{i + 1}" if len(args) > 1 else "x", s) for i, s in enumerate(args))
    y, y2 = Var("y", result), Var("y'", result)
    if not args:
        y, y2 = Var("x", result), Var("x'", result)
    r = rel_name(name)
    total = Sequent(xs, TRUE, Exists(y, RelAtom(r, xs + (y,))))
    unique = Sequent(xs + (y, y2), And((RelAtom(r, xs + (y,)), RelAtom(r, xs + (y2,)))), Eq(y, y2))
    return total, unique


def desugar_functions(ext: TheoryExtension) -> TheoryExtension:
    """Replace every delta function symbol f : A -> B by a relation R_f on A x B."""
    if not ext.functions:
        return ext
    funs = {n: (a, r) for n, a, r in ext.functions}
    rels = ext.relations + tuple((rel_name(n), a + (r,)) for n, a, r in ext.functions)
    graphs = tuple(ax for n, a, r in ext.functions for ax in graph_axioms(n, a, r))
    axioms = graphs + tuple(desugar_sequent(ax, funs) for ax in ext.axioms)
    for sc in ext.schemas:
        if set(sc.params) & set(funs):
            raise ExtensionError(f"schema {sc.kind} mentions a desugared function")
    return replace(ext, relations=rels, functions=(), axioms=axioms,
                   obligations=tuple(desugar_sequent(o, funs) for o in ext.obligations))


def desugar_theory_formula(f, ext: TheoryExtension):
    return desugar_formula(f, {n: (a, r) for n, a, r in ext.functions})


# ---------------------------------------------------------------------------
# conditional extensions

def _check_closed(phi):
    if free_vars(phi):
        names = ", ".join(sorted(v.name for v in free_vars(phi)))
        raise ExtensionError(f"condition is not closed (free: {names})")


def conditional(ext: TheoryExtension, phi) -> TheoryExtension:
    """E/phi: the data of E is required only where the closed formula phi holds."""
    if ext.functions:
        raise ExtensionError("conditional extensions need relations only; apply desugar_functions first")
    _check_closed(phi)
    axioms = []
    for s in ext.sorts:
        axioms.append(Sequent((Var("x", s),), TRUE, phi))
    for n, ar in ext.relations:
        xs = tuple(Var(f"x{i + 1}", s) for i, s in enumerate(ar))
        axioms.append(Sequent(xs, RelAtom(n, xs), phi))
    for ax in ext.axioms:
        axioms.append(Sequent(ax.context, And((ax.antecedent, phi)), ax.consequent))
    guarded = tuple(replace(sc, guard=phi if sc.guard is None else flatten(And((sc.guard, phi))))
                    for sc in ext.schemas)
    return TheoryExtension(None, ext.sorts, ext.relations, (), tuple(axioms), guarded,
                           tuple(Sequent(o.context, And((o.antecedent, phi)), o.consequent)
                                 for o in ext.obligations))


def conjunct_texts(phi) -> set:
    return {show(c) for c in conjuncts(flatten(phi))}


def conditional_system(system: ExtensionSystem, phis: dict, assume=()) -> ExtensionSystem:
    """(E_i/phi_i)_i, checking phi_i |- phi_j for j <= i syntactically.

    The witness is conjunct containment after flattening; ``assume`` may list
    pairs (j, i) for which the entailment is taken on trust.
    """
    assume = set(assume)
    for (j, i) in sorted(system.order, key=repr):
        if j == i or (j, i) in assume:
            continue
        if not conjunct_texts(phis[j]) <= conjunct_texts(phis[i]):
            raise ExtensionError(f"no monotonicity witness for {j!r} <= {i!r}")
    for i in system.elements:
        _check_closed(phis[i])
    return ExtensionSystem(system.elements, system.order,
                           tuple((i, conditional(system.ext(i), phis[i])) for i in system.elements))


# ---------------------------------------------------------------------------
# extension by definitions and materialization

def iff(ctx, a, b) -> tuple:
    return Sequent(tuple(ctx), a, b), Sequent(tuple(ctx), b, a)


def extension_by_definitions(base: Theory, rel_defs: dict = None, fun_defs: dict = None) -> TheoryExtension:
    """New symbols defined by formulas of ``base``.

    ``rel_defs`` maps R to (context, phi); ``fun_defs`` maps f to (context, psi)
    where the last context variable stands for the value.  Functionality of
    psi is recorded as an obligation, not checked.
    """
    rels, funs, axioms, obligations = {}, {}, [], []
    for name, (ctx, phi) in (rel_defs or {}).items():
        ctx = tuple(ctx)
        _check_defining(base, ctx, phi, name)
        rels[name] = tuple(v.sort for v in ctx)
        axioms += iff(ctx, RelAtom(name, ctx), phi)
    for name, (ctx, psi) in (fun_defs or {}).items():
        ctx = tuple(ctx)
        if not ctx:
            raise ExtensionError(f"function definition {name} needs a value variable")
        _check_defining(base, ctx, psi, name)
        ys, z = ctx[:-1], ctx[-1]
        funs[name] = (tuple(v.sort for v in ys), z.sort)
        axioms += iff(ctx, Eq(App(name, ys), z), psi)
        z2 = Var(fresh_name(z.name, {v.name for v in ctx} | all_var_names(psi)), z.sort)
        obligations.append(Sequent(ys, TRUE, Exists(z, psi)))
        obligations.append(Sequent(ctx + (z2,), And((psi, _subst(psi, {z: z2}))), Eq(z, z2)))
    return make_extension(base, (), rels, funs, axioms, obligations=obligations)


def _check_defining(base, ctx, phi, name):
    names = [v.name for v in ctx]
    if len(set(names)) != len(names):
        raise ExtensionError(f"context of {name} repeats a variable")
    extra = free_vars(phi) - set(ctx)
    if extra:
        raise ExtensionError(f"context mismatch in definition of {name}: {sorted(v.name for v in extra)}")
    diags = check_sequent(base.signature, Sequent(ctx, phi, TRUE))
    if diags:
        raise ExtensionError(f"definition of {name} is ill-formed: {diags[0]}")


@dataclass(frozen=True)
class Subobject:
    sort: str
    var: Var
    formula: object
    name: str = ""
    inclusion: str = "iota"


@dataclass(frozen=True)
class Quotient:
    sort: str
    left: Var
    right: Var
    relation: object
    name: str = ""
    projection: str = "pi"


def materialize(base: Theory, mode) -> TheoryExtension:
    """Materialize a subobject {x : A | phi} or a quotient A/~ as a new sort."""
    if isinstance(mode, Subobject):
        if mode.var.sort != mode.sort or free_vars(mode.formula) - {mode.var}:
            raise ExtensionError("context mismatch: formula must live in the context x : A")
        _check_defining(base, (mode.var,), mode.formula, "subobject")
        new = mode.name or f"S_{mode.sort}"
        iota = mode.inclusion
        x, y = Var("x", new), Var("y", new)
        a = Var("a", mode.sort)
        phi_a = _subst(mode.formula, {mode.var: a})
        inj = Sequent((x, y), Eq(App(iota, (x,)), App(iota, (y,))), Eq(x, y))
        axioms = (inj,) + iff((a,), Exists(x, Eq(App(iota, (x,)), a)), phi_a)
        return make_extension(base, (new,), None, {iota: ((new,), mode.sort)}, axioms)
    if isinstance(mode, Quotient):
        if mode.left.sort != mode.sort or mode.right.sort != mode.sort:
            raise ExtensionError("context mismatch: relation must live in the context x, x' : A")
        if free_vars(mode.relation) - {mode.left, mode.right}:
            raise ExtensionError("context mismatch: relation has extra free variables")
        _check_defining(base, (mode.left, mode.right), mode.relation, "quotient")
        new = mode.name or f"Q_{mode.sort}"
        pi = mode.projection
        x, x2, x3 = Var("x", mode.sort), Var("x'", mode.sort), Var("x''", mode.sort)
        y = Var("y", new)

        def rel(a, b):
            return _subst(mode.relation, {mode.left: a, mode.right: b})
        surj = Sequent((y,), TRUE, Exists(x, Eq(App(pi, (x,)), y)))
        kernel = iff((x, x2), Eq(App(pi, (x,)), App(pi, (x2,))), rel(x, x2))
        obligations = (
            Sequent((x,), TRUE, rel(x, x)),
            Sequent((x, x2), rel(x, x2), rel(x2, x)),
            Sequent((x, x2, x3), And((rel(x, x2), rel(x2, x3))), rel(x, x3)),
        )
        return make_extension(base, (new,), None, {pi: ((mode.sort,), new)}, (surj,) + kernel,
                              obligations=obligations)
    raise ExtensionError(f"unknown materialization mode {mode!r}")


def closes_over(theory: Theory) -> bool:
    return not check_wellformed(theory)
