"""Bounded forward chaining over geometric sequents.

Facts live in a small congruence-closed term graph.  Axioms whose
antecedent is a conjunction of atoms and whose consequent has no proper
disjunction act as rules; existential consequents create fresh witnesses.
``derives`` is sound and incomplete: a False answer means nothing.
"""
from __future__ import annotations

import itertools

from .syntax import (
    And, App, Eq, Exists, Or, RelAtom, SchemaOr, Sequent, Var, conjuncts, flatten,
    exists, free_vars, prenex_antecedent, term_vars,
)

MAX_CLASSES = 300


class _Graph:
    def __init__(self, sig, commutative):
        self.sig = sig
        self.comm = commutative
        self.parent = []
        self.sort = []
        self.nodes = {}
        self.rels = set()
        self.inconsistent = False
        self.changed = False
        self.counter = 0

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def _new(self, sort):
        self.parent.append(len(self.parent))
        self.sort.append(sort)
        return len(self.parent) - 1

    def fresh(self, sort):
        self.counter += 1
        i = self._new(sort)
        self.nodes[("$", self.counter)] = i
        self.changed = True
        return i

    def _key(self, fun, kids):
        kids = tuple(self.find(k) for k in kids)
        if fun in self.comm and len(kids) == 2:
            kids = tuple(sorted(kids))
        return (fun, kids)

    def add(self, t, env):
        if isinstance(t, Var):
            return env[t]
        key = self._key(t.fun, [self.add(a, env) for a in t.args])
        if key not in self.nodes:
            self.nodes[key] = self._new(self.sig.fun_type(t.fun)[1])
            self.changed = True
        return self.find(self.nodes[key])

    def lookup(self, t, env):
        if isinstance(t, Var):
            return self.find(env[t])
        kids = []
        for a in t.args:
            k = self.lookup(a, env)
            if k is None:
                return None
            kids.append(k)
        i = self.nodes.get(self._key(t.fun, kids))
        return None if i is None else self.find(i)

    def union(self, a, b):
        a, b = self.find(a), self.find(b)
        if a != b:
            self.parent[max(a, b)] = min(a, b)
            self.changed = True
            self.rebuild()

    def rebuild(self):
        while True:
            fresh = {}
            pending = []
            for key, i in self.nodes.items():
                nk = key if key[0] == "$" else self._key(*key)
                j = fresh.get(nk)
                if j is not None and self.find(j) != self.find(i):
                    pending.append((i, j))
                fresh[nk] = self.find(i)
            self.nodes = fresh
            if not pending:
                break
            for i, j in pending:
                a, b = self.find(i), self.find(j)
                if a != b:
                    self.parent[max(a, b)] = min(a, b)
        self.rels = {(r, tuple(self.find(k) for k in ks)) for r, ks in self.rels}

    def classes(self, sort):
        return sorted({self.find(i) for i in range(len(self.parent)) if self.sort[i] == sort})

    def by_class(self):
        out = {}
        for key, i in self.nodes.items():
            if key[0] != "$":
                out.setdefault(self.find(i), []).append(key)
        return out

    # -- matching ----------------------------------------------------------

    def match_term(self, pat, cls, s, index):
        if isinstance(pat, Var):
            if pat in s:
                if self.find(s[pat]) == cls:
                    yield s
            elif self.sort[cls] == pat.sort:
                yield {**s, pat: cls}
            return
        for fun, kids in index.get(cls, ()):
            if fun != pat.fun or len(kids) != len(pat.args):
                continue
            orders = [kids]
            if fun in self.comm and len(kids) == 2 and kids[0] != kids[1]:
                orders.append(kids[::-1])
            for ks in orders:
                yield from self._match_args(pat.args, ks, s, index)

    def _match_args(self, pats, kids, s, index):
        if not pats:
            yield s
            return
        for s2 in self.match_term(pats[0], self.find(kids[0]), s, index):
            yield from self._match_args(pats[1:], kids[1:], s2, index)

    def match_atoms(self, atoms, s, index):
        if not atoms:
            yield s
            return
        a, rest = atoms[0], atoms[1:]
        if isinstance(a, RelAtom):
            for r, ks in sorted(self.rels):
                if r == a.rel:
                    for s2 in self._match_args(a.args, ks, s, index):
                        yield from self.match_atoms(rest, s2, index)
        else:
            sort = _sort_of(self.sig, a.lhs)
            for c in self.classes(sort):
                for s2 in self.match_term(a.lhs, c, s, index):
                    for s3 in self.match_term(a.rhs, c, s2, index):
                        yield from self.match_atoms(rest, s3, index)

    # -- truth and assertion -------------------------------------------------

    def holds(self, f, env):
        if isinstance(f, RelAtom):
            ks = [self.lookup(a, env) for a in f.args]
            return None not in ks and (f.rel, tuple(ks)) in self.rels
        if isinstance(f, Eq):
            a, b = self.lookup(f.lhs, env), self.lookup(f.rhs, env)
            return (a is not None and a == b) or f.lhs == f.rhs
        if isinstance(f, And):
            return all(self.holds(p, env) for p in f.parts)
        if isinstance(f, Or):
            return any(self.holds(p, env) for p in f.parts)
        if isinstance(f, Exists):
            return any(self.holds(f.body, {**env, f.var: c}) for c in self.classes(f.var.sort))
        return False

    def assert_(self, f, env):
        if isinstance(f, RelAtom):
            fact = (f.rel, tuple(self.add(a, env) for a in f.args))
            if fact not in self.rels:
                self.rels.add(fact)
                self.changed = True
        elif isinstance(f, Eq):
            self.union(self.add(f.lhs, env), self.add(f.rhs, env))
        elif isinstance(f, And):
            for p in f.parts:
                self.assert_(p, env)
        elif isinstance(f, Exists):
            self.assert_(f.body, {**env, f.var: self.fresh(f.var.sort)})
        elif isinstance(f, Or) and not f.parts:
            self.inconsistent = True
        else:
            raise TypeError(f)


def _sort_of(sig, t):
    return t.sort if isinstance(t, Var) else sig.fun_type(t.fun)[1]


def _plain(f) -> bool:
    """No proper disjunctions or schema families anywhere."""
    if isinstance(f, Or):
        return not f.parts
    if isinstance(f, SchemaOr):
        return False
    if isinstance(f, And):
        return all(_plain(p) for p in f.parts)
    if isinstance(f, Exists):
        return _plain(f.body)
    return True


def _rule(ax: Sequent):
    ax = prenex_antecedent(ax)
    atoms = conjuncts(flatten(ax.antecedent))
    if not all(isinstance(a, (RelAtom, Eq)) for a in atoms):
        return None
    cons = flatten(ax.consequent)
    if not _plain(cons):
        return None
    bound = set()
    for a in atoms:
        args = a.args if isinstance(a, RelAtom) else (a.lhs, a.rhs)
        for t in args:
            bound |= term_vars(t)
    if not set(ax.context) <= bound:
        return None
    atoms.sort(key=lambda a: not isinstance(a, RelAtom))
    return tuple(atoms), cons


def commutative_symbols(axioms) -> frozenset:
    """Binary functions with an axiom f(x, y) = f(y, x) in context [x, y]."""
    out = set()
    for ax in axioms:
        c = ax.consequent
        if (len(ax.context) == 2 and ax.antecedent == And(()) and isinstance(c, Eq)
                and isinstance(c.lhs, App) and isinstance(c.rhs, App) and c.lhs.fun == c.rhs.fun
                and len(c.lhs.args) == 2 and c.lhs.args == c.rhs.args[::-1]
                and all(isinstance(a, Var) for a in c.lhs.args) and c.lhs.args[0] != c.lhs.args[1]):
            out.add(c.lhs.fun)
    return frozenset(out)


def _branches(f):
    """Disjunctive normal form of an antecedent as a list of conjunct lists."""
    if isinstance(f, And):
        out = [[]]
        for p in f.parts:
            out = [a + b for a in out for b in _branches(p)]
        return out
    if isinstance(f, Or):
        return [b for p in f.parts for b in _branches(p)]
    if isinstance(f, Exists):
        return [[Exists(f.var, And(tuple(b)))] for b in _branches(f.body)]
    return [[f]]


def chase(g: _Graph, rules, rounds: int):
    for _ in range(rounds):
        g.changed = False
        for atoms, cons in rules:
            index = g.by_class()
            env0 = {}
            for s in list(itertools.islice(g.match_atoms(list(atoms), env0, index), 200)):
                if g.inconsistent:
                    return
                s = {k: g.find(v) for k, v in s.items()}
                if not g.holds(cons, s):
                    g.assert_(cons, s)
                if len(g.parent) > MAX_CLASSES:
                    return
        if not g.changed:
            return


def derives(axioms, goal: Sequent, sig, rounds: int = 6) -> bool:
    """Does bounded chasing with ``axioms`` establish ``goal``?"""
    rules = [r for r in (_rule(a) for a in axioms) if r is not None]
    comm = commutative_symbols(axioms)
    if any(isinstance(x, SchemaOr) for x in conjuncts(goal.antecedent)):
        return False
    for branch in _branches(flatten(goal.antecedent)):
        g = _Graph(sig, comm)
        env = {v: g.fresh(v.sort) for v in goal.context}
        try:
            for atom in branch:
                if free_vars(atom) - set(env):
                    return False
                g.assert_(atom, env)
        except TypeError:
            return False
        chase(g, rules, rounds)
        if g.inconsistent:
            continue
        if not g.holds(flatten(goal.consequent), {k: g.find(v) for k, v in env.items()}):
            return False
    return True


def remove_redundant(axioms, candidates, sig) -> list:
    """Drop candidate axioms derivable from the rest, one at a time.

    Candidates are tried from the last to the first, so of two mutually
    derivable axioms the one listed first survives.
    """
    current = list(axioms)
    for ax in reversed(list(candidates)):
        rest = [a for a in current if a != ax]
        if len(rest) < len(current) and derives(rest, ax, sig):
            current = rest
    return current


def strengthen(axioms, candidates, sig) -> list:
    """Drop antecedent conjuncts derivable from the other conjuncts.

    If T minus the axiom (A & B |- C) derives A |- B, replacing the axiom by
    (A |- C) gives an equivalent theory.
    """
    current = list(axioms)
    for ax in candidates:
        if ax not in current:
            continue
        pos = current.index(ax)
        rest = current[:pos] + current[pos + 1:]
        s = prenex_antecedent(ax)
        parts = conjuncts(flatten(s.antecedent))
        ctx = list(s.context)
        k = 0
        while k < len(parts):
            others = parts[:k] + parts[k + 1:]
            keep = free_vars(s.consequent)
            for o in others:
                keep |= free_vars(o)
            private = [v for v in ctx if v in free_vars(parts[k]) and v not in keep]
            goal = Sequent(tuple(v for v in ctx if v not in private), flatten(And(tuple(others))),
                           exists(private, parts[k]))
            if derives(rest, goal, sig):
                parts = others
                ctx = list(goal.context)
            else:
                k += 1
        current[pos] = Sequent(tuple(ctx), flatten(And(tuple(parts))), s.consequent)
    return current


def _functional(axioms) -> set:
    """Relations R with an axiom R(u, x) & R(u, x') |- x = x'."""
    out = set()
    for ax in axioms:
        parts = conjuncts(ax.antecedent)
        c = ax.consequent
        if (len(parts) == 2 and all(isinstance(p, RelAtom) for p in parts) and isinstance(c, Eq)
                and parts[0].rel == parts[1].rel and parts[0].args[:-1] == parts[1].args[:-1]
                and {c.lhs, c.rhs} == {parts[0].args[-1], parts[1].args[-1]}
                and parts[0].args[-1] != parts[1].args[-1]):
            out.add(parts[0].rel)
    return out


def instantiate_functional(ax: Sequent, functional: set) -> Sequent:
    """Replace ∃x.(R(u, x) ∧ ...) in the consequent by the known R-value."""
    from .syntax import _subst
    ax = prenex_antecedent(ax)
    known = {}
    for a in conjuncts(ax.antecedent):
        if isinstance(a, RelAtom) and a.rel in functional:
            known.setdefault((a.rel, a.args[:-1]), a.args[-1])

    def go(f):
        if isinstance(f, Exists):
            body = go(f.body)
            for c in conjuncts(body):
                if (isinstance(c, RelAtom) and c.rel in functional and c.args[-1] == f.var
                        and f.var not in set().union(*map(term_vars, c.args[:-1]))
                        and (c.rel, c.args[:-1]) in known):
                    return flatten(_subst(body, {f.var: known[(c.rel, c.args[:-1])]}))
            return Exists(f.var, body)
        if isinstance(f, (And, Or)):
            return flatten(type(f)(tuple(go(p) for p in f.parts)))
        return f
    return Sequent(ax.context, ax.antecedent, go(ax.consequent))


__all__ = ["derives", "remove_redundant", "instantiate_functional", "commutative_symbols"]
