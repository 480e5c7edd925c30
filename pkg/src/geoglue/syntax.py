"""Typed syntax for multi-sorted geometric theories.

Terms, geometric formulas, sequents and theories are immutable values.  The
module also provides well-formedness diagnostics, capture-avoiding
substitution and a canonical normal form used for structural comparison.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Union


# ---------------------------------------------------------------------------
# terms and formulas

@dataclass(frozen=True)
class Var:
    name: str
    sort: str


@dataclass(frozen=True)
class App:
    fun: str
    args: tuple = ()


Term = Union[Var, App]


@dataclass(frozen=True)
class RelAtom:
    rel: str
    args: tuple = ()


@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class And:
    parts: tuple = ()


@dataclass(frozen=True)
class Or:
    parts: tuple = ()


@dataclass(frozen=True)
class Exists:
    var: Var
    body: "Formula"


@dataclass(frozen=True)
class SchemaOr:
    """Countable disjunction generated by a registered family.

    The disjuncts are ``FORMULA_SCHEMAS[kind](k, params, args)`` for k = 0, 1, ...
    and ``BOUNDS[bound]`` gives the number of disjuncts after which truth in a
    finite model has stabilized.
    """
    kind: str
    params: tuple = ()
    args: tuple = ()
    bound: str = "max_size"


Formula = Union[RelAtom, Eq, And, Or, Exists, SchemaOr]

TRUE = And(())
FALSE = Or(())


@dataclass(frozen=True)
class Sequent:
    context: tuple
    antecedent: Formula
    consequent: Formula


@dataclass(frozen=True)
class AxiomSchema:
    """Countable family of axioms ``AXIOM_SCHEMAS[kind](k, params)``."""
    kind: str
    params: tuple = ()
    bound: str = "max_size"
    guard: "Formula" = None


# Registries for schematic families.  Generators are pure functions; the
# library module registers the ring-theoretic ones.
FORMULA_SCHEMAS: dict[str, Callable] = {}
AXIOM_SCHEMAS: dict[str, Callable] = {}
BOUNDS: dict[str, Callable] = {
    "max_size": lambda sizes: max(sizes, default=0),
}


def schema_disjuncts(f: SchemaOr, n: int) -> list:
    gen = FORMULA_SCHEMAS[f.kind]
    return [gen(k, f.params, f.args) for k in range(n)]


def schema_axioms(s: AxiomSchema, n: int) -> list:
    gen = AXIOM_SCHEMAS[s.kind]
    out = [gen(k, s.params) for k in range(n)]
    if s.guard is not None:
        out = [Sequent(a.context, And((a.antecedent, s.guard)), a.consequent) for a in out]
    return out


def conj(*parts) -> Formula:
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def disj(*parts) -> Formula:
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def exists(vs, body) -> Formula:
    if isinstance(vs, Var):
        vs = [vs]
    for v in reversed(list(vs)):
        body = Exists(v, body)
    return body


# ---------------------------------------------------------------------------
# signatures and theories

@dataclass(frozen=True)
class Signature:
    sorts: tuple = ()
    relations: tuple = ()   # ((name, (sort, ...)), ...)
    functions: tuple = ()   # ((name, (sort, ...), result), ...)

    @staticmethod
    def make(sorts=(), relations=None, functions=None) -> "Signature":
        rels = tuple((n, tuple(a)) for n, a in (relations or {}).items())
        funs = tuple((n, tuple(a), r) for n, (a, r) in (functions or {}).items())
        return Signature(tuple(sorts), rels, funs)

    def rel_arity(self, name):
        for n, a in self.relations:
            if n == name:
                return a
        return None

    def fun_type(self, name):
        for n, a, r in self.functions:
            if n == name:
                return a, r
        return None

    def symbol_names(self) -> set:
        return {r[0] for r in self.relations} | {f[0] for f in self.functions}

    def merge(self, other: "Signature") -> "Signature":
        return Signature(self.sorts + other.sorts, self.relations + other.relations,
                         self.functions + other.functions)

    def sorted(self) -> "Signature":
        return Signature(tuple(sorted(set(self.sorts))), tuple(sorted(set(self.relations))),
                         tuple(sorted(set(self.functions))))


@dataclass(frozen=True)
class Theory:
    signature: Signature = field(default_factory=Signature)
    axioms: tuple = ()
    schemas: tuple = ()

    def with_axioms(self, *axioms) -> "Theory":
        return replace(self, axioms=self.axioms + tuple(axioms))


# ---------------------------------------------------------------------------
# basic traversals

def term_vars(t: Term) -> set:
    if isinstance(t, Var):
        return {t}
    out = set()
    for a in t.args:
        out |= term_vars(a)
    return out


def free_vars(f: Formula) -> set:
    if isinstance(f, RelAtom):
        return set().union(*map(term_vars, f.args)) if f.args else set()
    if isinstance(f, Eq):
        return term_vars(f.lhs) | term_vars(f.rhs)
    if isinstance(f, (And, Or)):
        return set().union(*map(free_vars, f.parts)) if f.parts else set()
    if isinstance(f, Exists):
        return free_vars(f.body) - {f.var}
    if isinstance(f, SchemaOr):
        return set().union(*map(term_vars, f.args)) if f.args else set()
    raise TypeError(f)


def all_var_names(f: Formula) -> set:
    if isinstance(f, Exists):
        return {f.var.name} | all_var_names(f.body)
    if isinstance(f, (And, Or)):
        return set().union(*map(all_var_names, f.parts)) if f.parts else set()
    return {v.name for v in free_vars(f)}


def term_symbols(t: Term) -> set:
    if isinstance(t, Var):
        return set()
    return {t.fun}.union(*map(term_symbols, t.args)) if t.args else {t.fun}


def symbols(f: Formula) -> set:
    """Relation and function names occurring in ``f`` (schema params included)."""
    if isinstance(f, RelAtom):
        return {f.rel}.union(*map(term_symbols, f.args)) if f.args else {f.rel}
    if isinstance(f, Eq):
        return term_symbols(f.lhs) | term_symbols(f.rhs)
    if isinstance(f, (And, Or)):
        return set().union(*map(symbols, f.parts)) if f.parts else set()
    if isinstance(f, Exists):
        return symbols(f.body)
    if isinstance(f, SchemaOr):
        return set(f.params).union(*map(term_symbols, f.args)) if f.args else set(f.params)
    raise TypeError(f)


def sequent_symbols(s: Sequent) -> set:
    return symbols(s.antecedent) | symbols(s.consequent)


def map_formula(f: Formula, fn: Callable) -> Formula:
    """Bottom-up rebuild: ``fn`` is applied to every node after its children."""
    if isinstance(f, (And, Or)):
        f = type(f)(tuple(map_formula(p, fn) for p in f.parts))
    elif isinstance(f, Exists):
        f = Exists(f.var, map_formula(f.body, fn))
    return fn(f)


def term_sort(sig: Signature, t: Term):
    if isinstance(t, Var):
        return t.sort
    ft = sig.fun_type(t.fun)
    return ft[1] if ft else None


# ---------------------------------------------------------------------------
# substitution

class SortMismatch(ValueError):
    pass


def fresh_name(base: str, avoid: set) -> str:
    name = base + "'"
    while name in avoid:
        name += "'"
    return name


def subst_term(t: Term, binding: dict) -> Term:
    if isinstance(t, Var):
        return binding.get(t, t)
    return App(t.fun, tuple(subst_term(a, binding) for a in t.args))


def substitute(f: Formula, binding: dict, sig: Signature | None = None) -> Formula:
    """Capture-avoiding substitution of terms for variables.

    Keys may be ``Var`` or variable names.  When a signature is given, the
    sort of each replacing term is checked against the variable's sort.
    """
    b = {}
    for k, t in binding.items():
        if isinstance(k, str):
            k = _lookup_var(f, k, t, sig)
            if k is None:
                continue
        if sig is not None or isinstance(t, Var):
            s = term_sort(sig, t) if sig is not None else t.sort
            if s is not None and s != k.sort:
                raise SortMismatch(f"cannot substitute term of sort {s} for {k.name}:{k.sort}")
        b[k] = t
    return _subst(f, b)


def _lookup_var(f, name, t, sig):
    for v in free_vars(f):
        if v.name == name:
            return v
    return None


def _subst(f: Formula, b: dict) -> Formula:
    if not b:
        return f
    if isinstance(f, RelAtom):
        return RelAtom(f.rel, tuple(subst_term(a, b) for a in f.args))
    if isinstance(f, Eq):
        return Eq(subst_term(f.lhs, b), subst_term(f.rhs, b))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_subst(p, b) for p in f.parts))
    if isinstance(f, SchemaOr):
        return replace(f, args=tuple(subst_term(a, b) for a in f.args))
    if isinstance(f, Exists):
        b = {k: v for k, v in b.items() if k != f.var}
        fv = free_vars(f.body)
        b = {k: v for k, v in b.items() if k in fv}
        if not b:
            return f
        incoming = set().union(*(term_vars(t) for t in b.values()))
        if f.var.name in {v.name for v in incoming}:
            avoid = {v.name for v in incoming} | all_var_names(f.body) | {k.name for k in b}
            nv = Var(fresh_name(f.var.name, avoid), f.var.sort)
            body = _subst(f.body, {f.var: nv})
            return Exists(nv, _subst(body, b))
        return Exists(f.var, _subst(f.body, b))
    raise TypeError(f)


def subst_sequent(s: Sequent, b: dict) -> Sequent:
    return Sequent(tuple(subst_term(v, b) for v in s.context),
                   _subst(s.antecedent, b), _subst(s.consequent, b))


# ---------------------------------------------------------------------------
# printing (the canonical text form shared with the DSL)

def show_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.fun
    return f"{t.fun}({', '.join(show_term(a) for a in t.args)})"


def show(f: Formula) -> str:
    if isinstance(f, RelAtom):
        if not f.args:
            return f.rel
        return f"{f.rel}({', '.join(show_term(a) for a in f.args)})"
    if isinstance(f, Eq):
        return f"{show_term(f.lhs)} = {show_term(f.rhs)}"
    if isinstance(f, And):
        if not f.parts:
            return "true"
        if len(f.parts) == 1:
            return show(f.parts[0])
        return "(" + " & ".join(show(p) for p in f.parts) + ")"
    if isinstance(f, Or):
        if not f.parts:
            return "false"
        if len(f.parts) == 1:
            return show(f.parts[0])
        return "(" + " | ".join(show(p) for p in f.parts) + ")"
    if isinstance(f, Exists):
        return f"(exists {f.var.name}:{f.var.sort}. {show(f.body)})"
    if isinstance(f, SchemaOr):
        args = ", ".join(show_term(a) for a in f.args)
        return f"bigor {f.kind}[{', '.join(f.params)}]({args}) @{f.bound}"
    raise TypeError(f)


def show_context(ctx) -> str:
    return "[" + ", ".join(f"{v.name}:{v.sort}" for v in ctx) + "]"


def show_sequent(s: Sequent) -> str:
    return f"{show_context(s.context)} {show(s.antecedent)} |- {show(s.consequent)}"


def show_schema(s: AxiomSchema) -> str:
    text = f"{s.kind}[{', '.join(s.params)}] @{s.bound}"
    if s.guard is not None:
        text += f" when {show(s.guard)}"
    return text


# ---------------------------------------------------------------------------
# well-formedness

@dataclass(frozen=True)
class Diagnostic:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


RESERVED_VAR = re.compile(r"^[xy]\d+$")


def _check_term(sig, t, scope, path, out):
    if isinstance(t, Var):
        if t.sort not in sig.sorts:
            out.append(Diagnostic(path, f"unknown sort {t.sort}"))
        elif scope.get(t.name) != t.sort:
            if t.name in scope:
                out.append(Diagnostic(path, f"sort mismatch: variable {t.name} used at {t.sort}, bound at {scope[t.name]}"))
            else:
                out.append(Diagnostic(path, f"unbound variable {t.name}"))
        return t.sort
    ft = sig.fun_type(t.fun)
    if ft is None:
        out.append(Diagnostic(path, f"unknown function {t.fun}"))
        for i, a in enumerate(t.args):
            _check_term(sig, a, scope, f"{path}.{t.fun}[{i}]", out)
        return None
    dom, cod = ft
    if len(dom) != len(t.args):
        out.append(Diagnostic(path, f"arity mismatch: {t.fun} expects {len(dom)} arguments, got {len(t.args)}"))
    for i, (a, s) in enumerate(zip(t.args, dom)):
        got = _check_term(sig, a, scope, f"{path}.{t.fun}[{i}]", out)
        if got is not None and got != s:
            out.append(Diagnostic(f"{path}.{t.fun}[{i}]", f"sort mismatch: expected {s}, got {got}"))
    return cod


def _check_formula(sig, f, scope, path, out):
    if isinstance(f, RelAtom):
        ar = sig.rel_arity(f.rel)
        if ar is None:
            out.append(Diagnostic(path, f"unknown relation {f.rel}"))
            return
        if len(ar) != len(f.args):
            out.append(Diagnostic(path, f"arity mismatch: {f.rel} expects {len(ar)} arguments, got {len(f.args)}"))
        for i, (a, s) in enumerate(zip(f.args, ar)):
            got = _check_term(sig, a, scope, f"{path}.{f.rel}[{i}]", out)
            if got is not None and got != s:
                out.append(Diagnostic(f"{path}.{f.rel}[{i}]", f"sort mismatch: expected {s}, got {got}"))
    elif isinstance(f, Eq):
        a = _check_term(sig, f.lhs, scope, f"{path}.lhs", out)
        b = _check_term(sig, f.rhs, scope, f"{path}.rhs", out)
        if a is not None and b is not None and a != b:
            out.append(Diagnostic(path, f"sort mismatch: {a} = {b}"))
    elif isinstance(f, (And, Or)):
        tag = "and" if isinstance(f, And) else "or"
        for i, p in enumerate(f.parts):
            _check_formula(sig, p, scope, f"{path}.{tag}[{i}]", out)
    elif isinstance(f, Exists):
        if f.var.sort not in sig.sorts:
            out.append(Diagnostic(path, f"unknown sort {f.var.sort}"))
        _check_formula(sig, f.body, {**scope, f.var.name: f.var.sort}, f"{path}.exists({f.var.name})", out)
    elif isinstance(f, SchemaOr):
        if f.kind not in FORMULA_SCHEMAS:
            out.append(Diagnostic(path, f"unknown schema family {f.kind}"))
            return
        if f.bound not in BOUNDS:
            out.append(Diagnostic(path, f"unknown bound {f.bound}"))
        for k, d in enumerate(schema_disjuncts(f, 2)):
            _check_formula(sig, d, scope, f"{path}.bigor[{k}]", out)
    else:
        out.append(Diagnostic(path, f"not a geometric formula: {type(f).__name__}"))


def check_sequent(sig: Signature, s: Sequent, path: str = "axiom") -> list:
    out = []
    scope = {}
    for v in s.context:
        if v.name in scope:
            out.append(Diagnostic(f"{path}.context", f"duplicate variable {v.name}"))
        if v.sort not in sig.sorts:
            out.append(Diagnostic(f"{path}.context", f"unknown sort {v.sort}"))
        scope[v.name] = v.sort
    _check_formula(sig, s.antecedent, scope, f"{path}.antecedent", out)
    _check_formula(sig, s.consequent, scope, f"{path}.consequent", out)
    return out


def check_signature(sig: Signature) -> list:
    out = []
    seen = set()
    for s in sig.sorts:
        if not s:
            out.append(Diagnostic("signature.sorts", "empty sort name"))
        if s in seen:
            out.append(Diagnostic("signature.sorts", f"duplicate sort {s}"))
        seen.add(s)
    names = set()
    for n, ar in sig.relations:
        if n in names:
            out.append(Diagnostic(f"signature.relations.{n}", f"duplicate symbol {n}"))
        names.add(n)
        for s in ar:
            if s not in seen:
                out.append(Diagnostic(f"signature.relations.{n}", f"unknown sort {s}"))
    for n, ar, r in sig.functions:
        if n in names:
            out.append(Diagnostic(f"signature.functions.{n}", f"duplicate symbol {n}"))
        names.add(n)
        for s in ar + (r,):
            if s not in seen:
                out.append(Diagnostic(f"signature.functions.{n}", f"unknown sort {s}"))
    for n in names:
        if RESERVED_VAR.match(n):
            out.append(Diagnostic(f"signature.{n}", f"symbol name {n} collides with canonical variable names"))
    return out


def check_wellformed(theory: Theory) -> list:
    """All invariant violations of ``theory`` with a path into its syntax tree."""
    out = check_signature(theory.signature)
    for i, ax in enumerate(theory.axioms):
        out += check_sequent(theory.signature, ax, f"axiom[{i}]")
    for i, sc in enumerate(theory.schemas):
        if sc.kind not in AXIOM_SCHEMAS:
            out.append(Diagnostic(f"schema[{i}]", f"unknown schema family {sc.kind}"))
            continue
        if sc.bound not in BOUNDS:
            out.append(Diagnostic(f"schema[{i}]", f"unknown bound {sc.bound}"))
        for k, ax in enumerate(schema_axioms(sc, 3)):
            out += check_sequent(theory.signature, ax, f"schema[{i}][{k}]")
    return out


# ---------------------------------------------------------------------------
# local simplification and canonical forms

def flatten(f: Formula) -> Formula:
    """Flatten nested connectives, apply unit/absorption laws, dedupe, sort."""
    def step(g):
        if isinstance(g, (And, Or)):
            kind = type(g)
            zero = FALSE if kind is And else TRUE
            parts = []
            for p in g.parts:
                if isinstance(p, kind):
                    parts.extend(p.parts)
                else:
                    parts.append(p)
            if zero in parts:
                return zero
            uniq = {}
            for p in parts:
                uniq.setdefault(show(p), p)
            parts = [uniq[k] for k in sorted(uniq)]
            return parts[0] if len(parts) == 1 else kind(tuple(parts))
        if isinstance(g, Eq):
            a, b = show_term(g.lhs), show_term(g.rhs)
            return g if a <= b else Eq(g.rhs, g.lhs)
        return g
    return map_formula(f, step)


def conjuncts(f: Formula) -> list:
    if isinstance(f, And):
        out = []
        for p in f.parts:
            out.extend(conjuncts(p))
        return out
    return [f]


def disjuncts(f: Formula) -> list:
    if isinstance(f, Or):
        out = []
        for p in f.parts:
            out.extend(disjuncts(p))
        return out
    return [f]


def replace_closed(f: Formula, facts: set) -> Formula:
    """Replace every occurrence of a closed formula listed in ``facts`` by truth."""
    if not facts:
        return f

    def go(g):
        if not free_vars(g) and show(normalize_formula(g)) in facts:
            return TRUE
        if isinstance(g, (And, Or)):
            return type(g)(tuple(go(p) for p in g.parts))
        if isinstance(g, Exists):
            return Exists(g.var, go(g.body))
        return g
    return flatten(go(f))


def _fresh_var(v: Var, avoid: set) -> Var:
    name = v.name
    while name in avoid:
        name = fresh_name(name, avoid)
    return Var(name, v.sort)


def prenex_antecedent(s: Sequent) -> Sequent:
    """Move top-level existentials of the antecedent into the context."""
    ctx = list(s.context)
    avoid = {v.name for v in ctx} | all_var_names(s.antecedent) | all_var_names(s.consequent)
    todo = conjuncts(s.antecedent)
    done = []
    while todo:
        c = todo.pop(0)
        if isinstance(c, Exists):
            nv = _fresh_var(c.var, avoid)
            avoid.add(nv.name)
            ctx.append(nv)
            todo = conjuncts(_subst(c.body, {c.var: nv})) + todo
        else:
            done.append(c)
    return Sequent(tuple(ctx), flatten(And(tuple(done))), s.consequent)


def _rename_bound(f: Formula, depth: int, ren: dict) -> Formula:
    if isinstance(f, RelAtom):
        return RelAtom(f.rel, tuple(subst_term(a, ren) for a in f.args))
    if isinstance(f, Eq):
        return Eq(subst_term(f.lhs, ren), subst_term(f.rhs, ren))
    if isinstance(f, SchemaOr):
        return replace(f, args=tuple(subst_term(a, ren) for a in f.args))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_rename_bound(p, depth, ren) for p in f.parts))
    if isinstance(f, Exists):
        nv = Var(f"y{depth + 1}", f.var.sort)
        return Exists(nv, _rename_bound(f.body, depth + 1, {**ren, f.var: nv}))
    raise TypeError(f)


def _canon_text(s: Sequent, order) -> tuple:
    ren = {v: Var(f"x{i + 1}", v.sort) for i, v in enumerate(order)}
    ante = flatten(_rename_bound(s.antecedent, 0, ren))
    cons = flatten(_rename_bound(s.consequent, 0, ren))
    ctx = tuple(ren[v] for v in order)
    seq = Sequent(ctx, ante, cons)
    return show_sequent(seq), seq


MAX_PERMUTATIONS = 5040


def canonical_sequent(s: Sequent) -> Sequent:
    """Alpha-normal form: context variables x1..xn, bound variables y<depth>.

    The context order is chosen to minimize the printed text; variables are
    first ranked by a naming-independent occurrence key and only ties are
    permuted.
    """
    ctx = list(s.context)
    marker = {}
    for v in ctx:
        ren = {w: Var("_", w.sort) for w in ctx}
        ren[v] = Var("#", v.sort)
        a = flatten(_rename_bound(s.antecedent, 0, ren))
        c = flatten(_rename_bound(s.consequent, 0, ren))
        marker[v] = (v.sort, show(a), show(c))
    ranked = sorted(ctx, key=lambda v: marker[v])
    groups = [list(g) for _, g in itertools.groupby(ranked, key=lambda v: marker[v])]
    total = 1
    for g in groups:
        for k in range(2, len(g) + 1):
            total *= k
    if total > MAX_PERMUTATIONS:
        return _canon_text(s, ranked)[1]
    best = None
    for combo in itertools.product(*(itertools.permutations(g) for g in groups)):
        order = [v for g in combo for v in g]
        cand = _canon_text(s, order)
        if best is None or cand[0] < best[0]:
            best = cand
    return best[1]


class _Matcher:
    """Syntactic entailment between sets of geometric formulas.

    ``facts`` entail ``goal`` when the goal can be read off the facts after
    opening existentials, choosing witnesses among variables in scope and
    selecting one disjunct.  An optional congruence structure decides
    equalities.  The check is sound and deliberately incomplete.
    """

    def __init__(self, facts, egraph=None):
        self.atoms = set()
        self.vars = set()
        self.egraph = egraph
        self.counter = 0
        avoid = set()
        for f in facts:
            avoid |= all_var_names(f)
        self.avoid = avoid
        for f in facts:
            self._add(f)
        self.by_text = {show(a): a for a in self.atoms}

    def _add(self, f):
        self.vars |= free_vars(f)
        if isinstance(f, And):
            for p in f.parts:
                self._add(p)
        elif isinstance(f, Exists):
            nv = _fresh_var(Var(f.var.name + "!", f.var.sort), self.avoid)
            self.avoid.add(nv.name)
            self._add(_subst(f.body, {f.var: nv}))
        else:
            self.atoms.add(f)

    def holds(self, goal) -> bool:
        return self._holds(goal, {})

    def _ground(self, f, env):
        return _subst(f, env) if env else f

    def _holds(self, goal, env):
        return any(True for _ in self._solve([goal], env))

    def _solve(self, goals, env):
        if not goals:
            yield env
            return
        g, rest = goals[0], goals[1:]
        if isinstance(g, And):
            yield from self._solve(list(g.parts) + rest, env)
            return
        if isinstance(g, Or):
            for p in g.parts:
                yield from self._solve([p] + rest, env)
            return
        if isinstance(g, Exists):
            self.counter += 1
            nv = Var(f"?{self.counter}", g.var.sort)
            yield from self._solve([_subst(g.body, {g.var: nv})] + rest, env)
            return
        pending = [v for v in free_vars(self._ground(g, env)) if v.name.startswith("?")]
        if not pending:
            if self._atom_true(self._ground(g, env)):
                yield from self._solve(rest, env)
            return
        # try to bind pattern variables by matching against known atoms
        tried = set()
        for atom in self.atoms:
            m = _match_formula(self._ground(g, env), atom, {})
            if m is not None:
                e = {**env, **m}
                key = tuple(sorted((k.name, show_term(v)) for k, v in e.items()))
                if key in tried:
                    continue
                tried.add(key)
                yield from self._solve(rest, e)
        # fall back to variables in scope as witnesses
        v = sorted(pending, key=lambda w: w.name)[0]
        for cand in sorted(self.vars, key=lambda w: w.name):
            if cand.sort != v.sort or cand.name.startswith("?"):
                continue
            e = {**env, v: cand}
            key = tuple(sorted((k.name, show_term(w)) for k, w in e.items()))
            if key in tried:
                continue
            tried.add(key)
            yield from self._solve([g] + rest, e)

    def _atom_true(self, a):
        if isinstance(a, Eq):
            if a.lhs == a.rhs:
                return True
            if self.egraph is not None:
                return self.egraph.equal(a.lhs, a.rhs)
        if isinstance(a, SchemaOr):
            return show(a) in self.by_text
        fa = flatten(a)
        if show(fa) in self.by_text:
            return True
        if self.egraph is not None and isinstance(a, RelAtom):
            return self.egraph.holds_rel(a)
        return False


def _match_term(p, t, m):
    if isinstance(p, Var):
        if p.name.startswith("?"):
            if p in m:
                return m if m[p] == t else None
            if isinstance(t, Var) and t.sort != p.sort:
                return None
            return {**m, p: t}
        return m if p == t else None
    if not isinstance(t, App) or t.fun != p.fun or len(t.args) != len(p.args):
        return None
    for a, b in zip(p.args, t.args):
        m = _match_term(a, b, m)
        if m is None:
            return None
    return m


def _match_formula(p, f, m):
    if isinstance(p, RelAtom) and isinstance(f, RelAtom):
        if p.rel != f.rel or len(p.args) != len(f.args):
            return None
        for a, b in zip(p.args, f.args):
            m = _match_term(a, b, m)
            if m is None:
                return None
        return m
    if isinstance(p, Eq) and isinstance(f, Eq):
        for l, r in ((f.lhs, f.rhs), (f.rhs, f.lhs)):
            m1 = _match_term(p.lhs, l, m)
            if m1 is not None:
                m2 = _match_term(p.rhs, r, m1)
                if m2 is not None:
                    return m2
        return None
    return None


def entails(facts, goal, egraph=None) -> bool:
    return _Matcher(facts, egraph).holds(goal)


def simplify_sequent(s: Sequent, facts: set = frozenset()):
    """Local sound simplification; returns ``None`` for trivially valid sequents."""
    ante = replace_closed(flatten(s.antecedent), facts)
    cons = replace_closed(flatten(s.consequent), facts)
    if ante == FALSE or cons == TRUE:
        return None
    # drop antecedent conjuncts implied by the remaining ones
    parts = conjuncts(ante)
    i = 0
    while i < len(parts):
        others = parts[:i] + parts[i + 1:]
        if entails(others, parts[i]):
            parts = others
        else:
            i += 1
    s = _one_point(prenex_antecedent(Sequent(s.context, flatten(And(tuple(parts))), cons)))
    ante, cons = s.antecedent, s.consequent
    if ante == FALSE:
        return None
    facts_here = conjuncts(ante)
    if entails(facts_here, cons):
        return None
    # drop consequent conjuncts already implied by the antecedent
    cparts = [c for c in conjuncts(cons) if not entails(facts_here, c)]
    cons = flatten(And(tuple(cparts)))
    return Sequent(s.context, ante, cons)


def _one_point(s: Sequent) -> Sequent:
    """Eliminate antecedent equations x = t with x a context variable not in t."""
    while True:
        parts = conjuncts(s.antecedent)
        for k, c in enumerate(parts):
            if not isinstance(c, Eq):
                continue
            for v, t in ((c.lhs, c.rhs), (c.rhs, c.lhs)):
                if isinstance(v, Var) and v in s.context and v not in term_vars(t):
                    rest = And(tuple(parts[:k] + parts[k + 1:]))
                    b = {v: t}
                    s = Sequent(tuple(w for w in s.context if w != v),
                                flatten(_subst(rest, b)), flatten(_subst(s.consequent, b)))
                    break
            else:
                continue
            break
        else:
            return s


def closed_facts(axioms) -> set:
    """Printed conjuncts of the consequents of closed axioms ``true |-_[] phi``."""
    out = set()
    for ax in axioms:
        if not ax.context and flatten(ax.antecedent) == TRUE:
            for c in conjuncts(flatten(ax.consequent)):
                if not free_vars(c) and c != FALSE:
                    out.add(show(normalize_formula(c)))
    return out


def _is_fact_axiom(ax: Sequent) -> bool:
    return not ax.context and flatten(ax.antecedent) == TRUE


def normalize_axioms(axioms) -> tuple:
    axs = []
    initial = closed_facts(axioms)
    for ax in axioms:
        s = simplify_sequent(ax, frozenset() if _is_fact_axiom(ax) else initial)
        if s is not None:
            axs.append(canonical_sequent(s))
    for _ in range(16):
        facts = closed_facts(axs)
        nxt = []
        for ax in axs:
            if _is_fact_axiom(ax):
                nxt.append(ax)
                continue
            s = simplify_sequent(ax, facts)
            if s is not None:
                nxt.append(canonical_sequent(s))
        nxt = _dedupe(nxt)
        if nxt == axs:
            break
        axs = nxt
    absurd = Sequent((), TRUE, FALSE)
    if absurd in axs:
        # everything follows from an inconsistent theory
        return (absurd,)
    return tuple(_dedupe(axs))


def _dedupe(axs) -> list:
    uniq = {}
    for a in axs:
        uniq.setdefault(show_sequent(a), a)
    return [uniq[k] for k in sorted(uniq)]


def normalize(theory: Theory) -> Theory:
    """Canonical form up to renaming, reordering and Boolean unit laws.

    Beyond that, closed axioms ``true |- phi`` are used to discharge occurrences
    of ``phi`` elsewhere, antecedent existentials are moved into the context
    and sequents whose consequent is read off the antecedent are dropped.
    """
    axioms = normalize_axioms(theory.axioms)
    schemas = []
    for sc in theory.schemas:
        if sc.guard is not None:
            g = normalize_formula(sc.guard)
            sc = replace(sc, guard=None if g == TRUE else g)
        schemas.append(sc)
    schemas = tuple(sorted(set(schemas), key=show_schema))
    return Theory(theory.signature.sorted(), axioms, schemas)


def normalize_formula(f: Formula) -> Formula:
    """Canonical form of a formula whose free variables are kept by name."""
    return flatten(_rename_bound(f, 0, {}))


def theory_text(theory: Theory) -> str:
    lines = [f"sort {s};" for s in theory.signature.sorts]
    for n, ar in theory.signature.relations:
        lines.append(f"rel {n} sub {'*'.join(ar)};" if ar else f"rel {n};")
    for n, ar, r in theory.signature.functions:
        lines.append(f"fun {n} : {'*'.join(ar)} -> {r};" if ar else f"fun {n} : {r};")
    for ax in theory.axioms:
        lines.append(f"axiom {show_sequent(ax)};")
    for sc in theory.schemas:
        lines.append(f"schema {show_schema(sc)};")
    return "\n".join(lines) + "\n"


def canonical_text(theory: Theory) -> str:
    return theory_text(normalize(theory))


def sequents_of(theory: Theory, expand: int = 0) -> list:
    """Axioms plus the first ``expand`` instances of every schema."""
    out = list(theory.axioms)
    for sc in theory.schemas:
        out += schema_axioms(sc, expand)
    return out


def used_sorts(theory: Theory) -> Iterable:
    return theory.signature.sorts


def rename_symbols(theory: Theory, mapping: dict) -> Theory:
    """Rename relation and function symbols (schema parameters included)."""
    def rt(t):
        if isinstance(t, Var):
            return t
        return App(mapping.get(t.fun, t.fun), tuple(rt(a) for a in t.args))

    def step(g):
        if isinstance(g, RelAtom):
            return RelAtom(mapping.get(g.rel, g.rel), tuple(rt(a) for a in g.args))
        if isinstance(g, Eq):
            return Eq(rt(g.lhs), rt(g.rhs))
        if isinstance(g, SchemaOr):
            return replace(g, params=tuple(mapping.get(p, p) for p in g.params),
                           args=tuple(rt(a) for a in g.args))
        return g

    def rs(s):
        return Sequent(s.context, map_formula(s.antecedent, step), map_formula(s.consequent, step))
    sig = theory.signature
    new_sig = Signature(sig.sorts, tuple((mapping.get(n, n), a) for n, a in sig.relations),
                        tuple((mapping.get(n, n), a, r) for n, a, r in sig.functions))
    schemas = tuple(replace(sc, params=tuple(mapping.get(p, p) for p in sc.params),
                            guard=None if sc.guard is None else map_formula(sc.guard, step))
                    for sc in theory.schemas)
    return Theory(new_sig, tuple(rs(a) for a in theory.axioms), schemas)
