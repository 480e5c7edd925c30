"""Finite presheaf semantics for geometric theories.

Models are covariant functors from a finite poset to finite sets.  Geometric
connectives are computed pointwise, so every formula denotes a subfunctor of
its context and every closed formula an up-closed set of points.  Set-models
are the special case of the one-point poset.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

from .extensions import ExtensionError, TheoryExtension, conditional
from .syntax import (
    And, BOUNDS, Eq, Exists, Or, RelAtom, SchemaOr, Sequent, Theory,
    Var, schema_axioms, schema_disjuncts, sequent_symbols,
)


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class FinitePoset:
    elements: tuple
    order: frozenset  # pairs (p, q) with p <= q, reflexive pairs included

    @staticmethod
    def make(elements, less=()) -> "FinitePoset":
        elements = tuple(elements)
        order = set((p, p) for p in elements) | set(less)
        changed = True
        while changed:
            changed = False
            for (a, b) in list(order):
                for (c, d) in list(order):
                    if b == c and (a, d) not in order:
                        order.add((a, d))
                        changed = True
        for (a, b) in order:
            if a != b and (b, a) in order:
                raise ModelError("order is not antisymmetric")
            if a not in elements or b not in elements:
                raise ModelError("order mentions unknown points")
        return FinitePoset(elements, frozenset(order))

    def le(self, p, q) -> bool:
        return (p, q) in self.order

    def pairs(self):
        return [(p, q) for p in self.elements for q in self.elements if (p, q) in self.order]

    def covers(self):
        out = []
        for p, q in self.pairs():
            if p != q and not any(r not in (p, q) and self.le(p, r) and self.le(r, q)
                                  for r in self.elements):
                out.append((p, q))
        return out

    def is_upset(self, U) -> bool:
        return all(q in U for p in U for q in self.elements if self.le(p, q))

    def upsets(self):
        out = []
        for k in range(len(self.elements) + 1):
            for c in itertools.combinations(self.elements, k):
                if self.is_upset(set(c)):
                    out.append(frozenset(c))
        return out

    def sub(self, U) -> "FinitePoset":
        els = tuple(p for p in self.elements if p in U)
        return FinitePoset(els, frozenset((p, q) for (p, q) in self.order if p in U and q in U))


POINT = FinitePoset.make(("*",))


@dataclass(frozen=True)
class UpSet:
    points: frozenset

    @staticmethod
    def make(poset: FinitePoset, points) -> "UpSet":
        points = frozenset(points)
        if not poset.is_upset(points):
            raise ModelError(f"{sorted(points, key=repr)} is not up-closed")
        return UpSet(points)


@dataclass(frozen=True, eq=False)
class PresheafModel:
    """Interpretation of a signature by finite-set functors on a poset.

    ``sorts[S][p]`` is the tuple of elements at p (its order is the
    enumeration order), ``trans[S][(p, q)]`` the map for p <= q,
    ``relations[R][p]`` a set of tuples and ``functions[f][p]`` a dict from
    argument tuples to values.
    """
    poset: FinitePoset
    sorts: dict
    trans: dict
    relations: dict = field(default_factory=dict)
    functions: dict = field(default_factory=dict)

    def sizes(self):
        return tuple(len(v) for s in self.sorts.values() for v in s.values())

    def carrier(self, sort, p):
        return self.sorts[sort][p]

    def move(self, sort, p, q, a):
        return self.trans[sort][(p, q)][a]

    def key(self):
        """A hashable, order-stable description used for equality tests."""
        def enc(d):
            return tuple(sorted((repr(k), repr(v)) for k, v in d.items()))
        return (
            tuple(self.poset.elements),
            tuple(sorted((s, enc(v)) for s, v in self.sorts.items())),
            tuple(sorted((s, tuple(sorted((repr(pq), enc(m)) for pq, m in v.items())))
                         for s, v in self.trans.items())),
            tuple(sorted((r, tuple(sorted((repr(p), repr(sorted(map(repr, ts)))) for p, ts in v.items())))
                         for r, v in self.relations.items())),
            tuple(sorted((f, tuple(sorted((repr(p), enc(t)) for p, t in v.items())))
                         for f, v in self.functions.items())),
        )

    def __eq__(self, other):
        return isinstance(other, PresheafModel) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


def set_model(sorts: dict, relations: dict = None, functions: dict = None) -> PresheafModel:
    """A Set-model: the one-point poset with the given tables."""
    s = {k: {"*": tuple(v)} for k, v in sorts.items()}
    t = {k: {("*", "*"): {a: a for a in v}} for k, v in sorts.items()}
    r = {k: {"*": frozenset(v)} for k, v in (relations or {}).items()}
    f = {k: {"*": dict(v)} for k, v in (functions or {}).items()}
    return PresheafModel(POINT, s, t, r, f)


def validate(M: PresheafModel) -> list:
    """Functoriality of every sort; symbols are checked by validate_symbols."""
    errs = []
    P = M.poset
    for s, per in M.sorts.items():
        for p, q in P.pairs():
            m = M.trans[s].get((p, q))
            if m is None:
                errs.append(f"sort {s}: missing transition {p}<={q}")
                continue
            if p == q and any(m[a] != a for a in per[p]):
                errs.append(f"sort {s}: transition {p}<={p} is not the identity")
            if any(m.get(a) not in per[q] for a in per[p]):
                errs.append(f"sort {s}: transition {p}<={q} leaves the carrier")
        for p, q in P.pairs():
            for r in P.elements:
                if P.le(q, r):
                    m1, m2, m3 = M.trans[s].get((p, q)), M.trans[s].get((q, r)), M.trans[s].get((p, r))
                    if m1 and m2 and m3 and any(m2.get(m1.get(a)) != m3.get(a) for a in per[p]):
                        errs.append(f"sort {s}: composition fails for {p}<={q}<={r}")
    return errs


def validate_symbols(M: PresheafModel, sig) -> list:
    errs = validate(M)
    P = M.poset
    for name, ar in sig.relations:
        for p, q in P.pairs():
            for tup in M.relations[name][p]:
                moved = tuple(M.move(s, p, q, a) for s, a in zip(ar, tup))
                if moved not in M.relations[name][q]:
                    errs.append(f"relation {name} not stable along {p}<={q}")
                    break
    for name, ar, res in sig.functions:
        for p, q in P.pairs():
            for tup, val in M.functions[name][p].items():
                moved = tuple(M.move(s, p, q, a) for s, a in zip(ar, tup))
                if M.functions[name][q].get(moved) != M.move(res, p, q, val):
                    errs.append(f"function {name} not natural along {p}<={q}")
                    break
    return errs


# ---------------------------------------------------------------------------
# evaluation

_UNBOUND = object()


class _Evaluator:
    def __init__(self, M: PresheafModel):
        self.M = M
        self.n_bound = {}
        self.cache = {}

    def bound(self, name):
        if name not in self.n_bound:
            if name not in BOUNDS:
                raise ModelError(f"schema bound {name} is not defined")
            self.n_bound[name] = BOUNDS[name](self.M.sizes())
        return self.n_bound[name]

    def term(self, t, env, p):
        if isinstance(t, Var):
            return env[t]
        args = tuple(self.term(a, env, p) for a in t.args)
        return self.M.functions[t.fun][p][args]

    def holds(self, f, env, p) -> bool:
        if isinstance(f, RelAtom):
            return tuple(self.term(a, env, p) for a in f.args) in self.M.relations[f.rel][p]
        if isinstance(f, Eq):
            return self.term(f.lhs, env, p) == self.term(f.rhs, env, p)
        if isinstance(f, And):
            return all(self.holds(g, env, p) for g in f.parts)
        if isinstance(f, Or):
            return any(self.holds(g, env, p) for g in f.parts)
        if isinstance(f, Exists):
            v = f.var
            outer = env.get(v, _UNBOUND)
            found = False
            for a in self.M.sorts[v.sort][p]:
                env[v] = a
                if self.holds(f.body, env, p):
                    found = True
                    break
            if outer is _UNBOUND:
                env.pop(v, None)
            else:
                env[v] = outer
            return found
        if isinstance(f, SchemaOr):
            key = (f, "disjuncts")
            if key not in self.cache:
                self.cache[key] = schema_disjuncts(f, self.bound(f.bound))
            return any(self.holds(g, env, p) for g in self.cache[key])
        raise TypeError(f)

    def tuples(self, ctx, p):
        return itertools.product(*(self.M.sorts[v.sort][p] for v in ctx))


@dataclass(frozen=True)
class Subfunctor:
    context: tuple
    points: dict  # p -> frozenset of tuples

    def is_closed(self, M: PresheafModel) -> bool:
        for p, q in M.poset.pairs():
            for tup in self.points[p]:
                moved = tuple(M.move(v.sort, p, q, a) for v, a in zip(self.context, tup))
                if moved not in self.points[q]:
                    return False
        return True

    def as_upset(self) -> UpSet:
        return UpSet(frozenset(p for p, ts in self.points.items() if () in ts))


def interpret(M: PresheafModel, ctx, phi) -> Subfunctor:
    ev = _Evaluator(M)
    ctx = tuple(ctx)
    pts = {}
    for p in M.poset.elements:
        sel = []
        for tup in ev.tuples(ctx, p):
            if ev.holds(phi, dict(zip(ctx, tup)), p):
                sel.append(tup)
        pts[p] = frozenset(sel)
    return Subfunctor(ctx, pts)


@dataclass(frozen=True)
class Verdict:
    holds: bool
    point: object = None
    assignment: tuple = ()   # ((variable name, value), ...)
    sequent: object = None

    def describe(self) -> str:
        if self.holds:
            return "holds"
        vals = ", ".join(f"{n}={v}" for n, v in self.assignment)
        return f"counterexample at point {self.point}: {vals or '(empty context)'}"


def check_sequent(M: PresheafModel, seq: Sequent, _ev=None) -> Verdict:
    """Holds, or the least failing (point, tuple) in point-then-lex order."""
    ev = _ev or _Evaluator(M)
    for p in M.poset.elements:
        for tup in ev.tuples(seq.context, p):
            env = dict(zip(seq.context, tup))
            if ev.holds(seq.antecedent, env, p) and not ev.holds(seq.consequent, env, p):
                return Verdict(False, p, tuple((v.name, a) for v, a in zip(seq.context, tup)), seq)
    return Verdict(True)


def theory_sequents(M: PresheafModel, theory: Theory) -> list:
    ev = _Evaluator(M)
    out = list(theory.axioms)
    for sc in theory.schemas:
        out += schema_axioms(sc, ev.bound(sc.bound))
    return out


def check_theory(M: PresheafModel, theory: Theory) -> Verdict:
    """First failing axiom (in axiom order, schemas last) or holds."""
    ev = _Evaluator(M)
    for seq in theory_sequents(M, theory):
        v = check_sequent(M, seq, ev)
        if not v.holds:
            return v
    return Verdict(True)


def satisfies(M, theory) -> bool:
    return check_theory(M, theory).holds


# ---------------------------------------------------------------------------
# restriction and the conditional-extension correspondence

def restrict(M: PresheafModel, U) -> PresheafModel:
    U = U.points if isinstance(U, UpSet) else frozenset(U)
    P = M.poset.sub(U)
    return PresheafModel(
        P,
        {s: {p: v for p, v in per.items() if p in U} for s, per in M.sorts.items()},
        {s: {pq: m for pq, m in per.items() if pq[0] in U and pq[1] in U} for s, per in M.trans.items()},
        {r: {p: v for p, v in per.items() if p in U} for r, per in M.relations.items()},
        {f: {p: v for p, v in per.items() if p in U} for f, per in M.functions.items()},
    )


def truth_upset(M: PresheafModel, phi) -> UpSet:
    return interpret(M, (), phi).as_upset()


def extend_by_empty(M: PresheafModel, N: PresheafModel, ext: TheoryExtension) -> PresheafModel:
    """Push an extension N of restrict(M, U) forward to M, empty off U."""
    U = set(N.poset.elements)
    P = M.poset
    sorts = dict(M.sorts)
    trans = dict(M.trans)
    rels = dict(M.relations)
    for s in ext.sorts:
        sorts[s] = {p: (N.sorts[s][p] if p in U else ()) for p in P.elements}
        trans[s] = {(p, q): (N.trans[s][(p, q)] if p in U else {}) for p, q in P.pairs()}
    for r, _ in ext.relations:
        rels[r] = {p: (N.relations[r][p] if p in U else frozenset()) for p in P.elements}
    return PresheafModel(P, sorts, trans, rels, dict(M.functions))


@dataclass(frozen=True)
class RoundTrip:
    upset: frozenset
    restricted_count: int
    conditional_count: int
    identity: bool

    @property
    def ok(self) -> bool:
        return self.identity and self.restricted_count == self.conditional_count


def conditional_model_roundtrip(M: PresheafModel, phi, ext: TheoryExtension, size_bound: int = 2) -> RoundTrip:
    """Check E-ext(M|U) ~ (E/phi)-ext(M) with U the truth set of phi.

    Every E-extension of the restriction is extended by empty sets off U;
    the result must be an E/phi-extension whose restriction gives back the
    original, and the two enumerations must have the same size.
    """
    if ext.functions:
        raise ExtensionError("conditional extensions need relations only; apply desugar_functions first")
    U = truth_upset(M, phi)
    MU = restrict(M, U)
    cond = conditional(ext, phi)
    down = enumerate_extensions(MU, ext, size_bound)
    up = enumerate_extensions(M, cond, size_bound)
    identity = True
    up_keys = {_iso_key(N, cond, M) for N in up}
    for N in down:
        lifted = extend_by_empty(M, N, ext)
        if not _extension_holds(lifted, cond):
            identity = False
        if restrict(lifted, U.points) != N:
            identity = False
        if _iso_key(lifted, cond, M) not in up_keys:
            identity = False
    return RoundTrip(U.points, len(down), len(up), identity)


# ---------------------------------------------------------------------------
# enumeration of model extensions

def _sort_functors(P: FinitePoset, bound: int):
    """All functors P -> FinSet with carriers {0..k-1}, k <= bound (labelled, not up to iso)."""
    return _functor_table(P, bound)


def _top_down(P: FinitePoset) -> list:
    placed = []
    while len(placed) < len(P.elements):
        for p in P.elements:
            if p not in placed and all(q in placed for q in P.elements if q != p and P.le(p, q)):
                placed.append(p)
                break
    return placed


@functools.lru_cache(maxsize=64)
def _functor_table(P: FinitePoset, bound: int) -> tuple:
    """Points are filled from the top; an element is its tuple of images above it."""
    order = _top_down(P)
    ups = {p: [q for q in order if q != p and P.le(p, q)] for p in order}
    out = []

    def profiles(p, size, trans):
        above = ups[p]

        def rec(k, acc):
            if k == len(above):
                yield dict(acc)
                return
            q = above[k]
            for b in range(size[q]):
                if all(trans[(q, r)][b] == acc[r] for r in above[:k] if P.le(q, r)):
                    acc[q] = b
                    yield from rec(k + 1, acc)
            acc.pop(q, None)
        return list(rec(0, {}))

    def fill(i, size, trans):
        if i == len(order):
            out.append(({p: tuple(range(size[p])) for p in P.elements}, dict(trans)))
            return
        p = order[i]
        for n in range(bound + 1):
            size[p] = n
            opts = profiles(p, size, trans)
            for choice in itertools.product(opts, repeat=n):
                added = [(p, p)] + [(p, q) for q in ups[p]]
                trans[(p, p)] = {a: a for a in range(n)}
                for q in ups[p]:
                    trans[(p, q)] = {a: choice[a][q] for a in range(n)}
                fill(i + 1, size, trans)
                for pq in added:
                    del trans[pq]
        del size[p]
    fill(0, {}, {})
    return tuple(out)


def _with(M: PresheafModel, sorts=None, trans=None, rels=None, funs=None) -> PresheafModel:
    return PresheafModel(M.poset, {**M.sorts, **(sorts or {})}, {**M.trans, **(trans or {})},
                         {**M.relations, **(rels or {})}, {**M.functions, **(funs or {})})


def _relation_choices(M: PresheafModel, ar):
    """Subfunctors of a product of sorts, points processed in order."""
    P = M.poset
    pts = P.elements
    prods = {p: list(itertools.product(*(M.sorts[s][p] for s in ar))) for p in pts}

    def rec(i, acc):
        if i == len(pts):
            yield dict(acc)
            return
        p = pts[i]
        items = prods[p]
        for mask in range(1 << len(items)):
            chosen = frozenset(t for k, t in enumerate(items) if mask >> k & 1)
            ok = True
            for q in pts[:i]:
                if P.le(q, p):
                    for t in acc[q]:
                        if tuple(M.move(s, q, p, a) for s, a in zip(ar, t)) not in chosen:
                            ok = False
                            break
                if P.le(p, q) and ok:
                    for t in chosen:
                        if tuple(M.move(s, p, q, a) for s, a in zip(ar, t)) not in acc[q]:
                            ok = False
                            break
                if not ok:
                    break
            if ok:
                acc[p] = chosen
                yield from rec(i + 1, acc)
                del acc[p]
    yield from rec(0, {})


def _function_choices(M: PresheafModel, ar, res):
    P = M.poset
    pts = P.elements
    doms = {p: list(itertools.product(*(M.sorts[s][p] for s in ar))) for p in pts}

    def rec(i, acc):
        if i == len(pts):
            yield dict(acc)
            return
        p = pts[i]
        for vals in itertools.product(M.sorts[res][p], repeat=len(doms[p])):
            table = dict(zip(doms[p], vals))
            ok = True
            for q in pts[:i]:
                pairs = []
                if P.le(q, p):
                    pairs.append((q, p, acc[q], table))
                if P.le(p, q):
                    pairs.append((p, q, table, acc[q]))
                for (a_, b_, ta, tb) in pairs:
                    for tup, v in ta.items():
                        moved = tuple(M.move(s, a_, b_, x) for s, x in zip(ar, tup))
                        if tb[moved] != M.move(res, a_, b_, v):
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    break
            if ok:
                acc[p] = table
                yield from rec(i + 1, acc)
                del acc[p]
    yield from rec(0, {})


def _extension_holds(N: PresheafModel, ext: TheoryExtension) -> bool:
    t = Theory(axioms=ext.axioms, schemas=ext.schemas)
    return check_theory(N, t).holds


def enumerate_extensions(M: PresheafModel, ext: TheoryExtension, size_bound: int = 2) -> list:
    """All models of the extension over M, one per isomorphism class.

    Isomorphisms are the identity on M and arbitrary pointwise bijections of
    the new sorts compatible with all structure.  The output order is
    deterministic.
    """
    new_syms = [("sort", s) for s in ext.sorts]
    new_syms += [("fun", (n, a, r)) for n, a, r in ext.functions]
    new_syms += [("rel", (n, a)) for n, a in ext.relations]
    axioms = list(ext.axioms)
    pending = []
    introduced = set(ext.names())
    for ax in axioms:
        pending.append((ax, sequent_symbols(ax) & introduced))
    results = []
    seen = set()

    def rec(i, N, assigned, checked):
        if i == len(new_syms):
            if ext.schemas:
                t = Theory(schemas=ext.schemas)
                if not check_theory(N, t).holds:
                    return
            key = _iso_key(N, ext, M)
            if key not in seen:
                seen.add(key)
                results.append(N)
            return
        kind, data = new_syms[i]
        if kind == "sort":
            gen = ((_with(N, {data: c}, {data: t}), data) for c, t in _sort_functors(N.poset, size_bound))
        elif kind == "fun":
            n, a, r = data
            gen = ((_with(N, funs={n: tab}), n) for tab in _function_choices(N, a, r))
        else:
            n, a = data
            gen = ((_with(N, rels={n: tab}), n) for tab in _relation_choices(N, a))
        for N2, name in gen:
            now = assigned | {name}
            ok = True
            newly = []
            for ax, need in pending:
                if need <= now and id(ax) not in checked:
                    newly.append(ax)
                    if not check_sequent(N2, ax).holds:
                        ok = False
                        break
            if ok:
                rec(i + 1, N2, now, checked | {id(a) for a in newly})
    rec(0, M, set(), frozenset())
    return results


def _new_structure(N: PresheafModel, ext: TheoryExtension):
    """Vertices of the new sorts and integer-coded labelled facts among them.

    Vertices are numbered from 0; an element of an old sort is coded by a
    negative number, its rank among all old elements, labels by their rank.
    """
    pts = N.poset.elements
    new_sorts = set(ext.sorts)
    verts = [(s, p, a) for s in ext.sorts for p in pts for a in N.sorts[s][p]]
    index = {v: k for k, v in enumerate(verts)}
    raw = []
    for s in ext.sorts:
        for (p, q), m in N.trans[s].items():
            if p != q:
                for a, b in m.items():
                    raw.append((("t", s, repr(p), repr(q)), (index[(s, p, a)], index[(s, q, b)])))

    olds = sorted(repr((s, repr(p), repr(a))) for s in N.sorts if s not in new_sorts
                  for p in pts for a in N.sorts[s][p])
    old_code = {a: -1 - k for k, a in enumerate(olds)}

    def node(sort, p, x):
        return index[(sort, p, x)] if sort in new_sorts else old_code[repr((sort, repr(p), repr(x)))]
    for n, ar, res in ext.functions:
        for p in pts:
            for k, v in N.functions[n][p].items():
                raw.append((("f", n, repr(p)), tuple(node(s, p, x) for s, x in zip(ar + (res,), k + (v,)))))
    for n, ar in ext.relations:
        for p in pts:
            for t in N.relations[n][p]:
                raw.append((("r", n, repr(p)), tuple(node(s, p, x) for s, x in zip(ar, t))))
    labels = {lab: k for k, lab in enumerate(sorted({lab for lab, _ in raw}))}
    facts = [(labels[lab], args) for lab, args in raw]
    return verts, facts


def _refine(n, incid, colour):
    """Colour refinement: split classes by the colours of incident facts until stable."""
    classes = len(set(colour))
    while True:
        sig = []
        for v in range(n):
            inc = sorted((lab, i, tuple(colour[a] if a >= 0 else a for a in args))
                         for lab, i, args in incid[v])
            sig.append((colour[v], tuple(inc)))
        ranks = {k: r for r, k in enumerate(sorted(set(sig)))}
        new = [ranks[x] for x in sig]
        if len(ranks) == classes:
            return new
        colour, classes = new, len(ranks)


def _iso_key(N: PresheafModel, ext: TheoryExtension, M: PresheafModel):
    """Canonical encoding of the new structure up to relabelling of the new sorts.

    Individualization-refinement: refine a label-invariant colouring, and
    while some class has several vertices try each of them as a distinguished
    vertex; the key is the least leaf encoding.
    """
    verts, facts = _new_structure(N, ext)
    n = len(verts)
    sizes = tuple((s, repr(p), len(N.sorts[s][p])) for s in ext.sorts for p in N.poset.elements)
    incid = [[] for _ in range(n)]
    for lab, args in facts:
        for i, w in enumerate(args):
            if w >= 0:
                incid[w].append((lab, i, args))
    slots = sorted({(s, repr(p)) for s, p, _ in verts})
    start = [slots.index((s, repr(p))) for s, p, _ in verts]

    def encode(col):
        return tuple(sorted((lab, tuple(col[a] if a >= 0 else a for a in args)) for lab, args in facts))

    def search(col):
        col = _refine(n, incid, col)
        classes = {}
        for v in range(n):
            classes.setdefault(col[v], []).append(v)
        split = [c for c in sorted(classes) if len(classes[c]) > 1]
        if not split:
            return encode(col)
        best = None
        for v in classes[split[0]]:
            col2 = list(col)
            col2[v] = n
            leaf = search(col2)
            if best is None or leaf < best:
                best = leaf
        return best
    return (sizes, search(start))


# ---------------------------------------------------------------------------
# concrete models

def zmod_ring_model(m: int, sort: str = "A") -> PresheafModel:
    from .library import ring_names
    n = ring_names(sort)
    els = tuple(range(m))
    funs = {
        n["zero"]: {(): 0}, n["one"]: {(): 1 % m},
        n["neg"]: {(a,): (-a) % m for a in els},
        n["add"]: {(a, b): (a + b) % m for a in els for b in els},
        n["mul"]: {(a, b): (a * b) % m for a in els for b in els},
    }
    return set_model({sort: els}, None, funs)


def ring_functor_model(poset: FinitePoset, moduli: dict, sort: str = "A") -> PresheafModel:
    """Pointwise rings Z/m_p with reduction maps along the order (m_q | m_p for p <= q)."""
    from .library import ring_names
    n = ring_names(sort)
    sorts = {sort: {p: tuple(range(moduli[p])) for p in poset.elements}}
    trans = {sort: {}}
    for p, q in poset.pairs():
        if moduli[p] % moduli[q]:
            raise ModelError(f"no ring map Z/{moduli[p]} -> Z/{moduli[q]}")
        trans[sort][(p, q)] = {a: a % moduli[q] for a in range(moduli[p])}
    funs = {k: {} for k in n.values()}
    for p in poset.elements:
        m = moduli[p]
        els = range(m)
        funs[n["zero"]][p] = {(): 0}
        funs[n["one"]][p] = {(): 1 % m}
        funs[n["neg"]][p] = {(a,): (-a) % m for a in els}
        funs[n["add"]][p] = {(a, b): (a + b) % m for a in els for b in els}
        funs[n["mul"]][p] = {(a, b): (a * b) % m for a in els for b in els}
    return PresheafModel(poset, sorts, trans, {}, funs)


def product_ring_model(poset: FinitePoset, factors: dict, sort: str = "A") -> PresheafModel:
    """Pointwise products of rings Z/m (tuples of residues) with projections/reductions.

    ``factors[p]`` is a tuple of moduli; for p <= q the map reduces
    componentwise after selecting the components listed in
    ``factors[q]`` positionally (each m_q[i] divides m_p[i]).
    """
    from .library import ring_names
    n = ring_names(sort)
    carriers = {p: tuple(itertools.product(*(range(m) for m in factors[p]))) for p in poset.elements}
    trans = {}
    for p, q in poset.pairs():
        fp, fq = factors[p], factors[q]
        if len(fp) != len(fq) or any(a % b for a, b in zip(fp, fq)):
            raise ModelError("incompatible factors along the order")
        trans[(p, q)] = {x: tuple(a % b for a, b in zip(x, fq)) for x in carriers[p]}
    funs = {k: {} for k in n.values()}
    for p in poset.elements:
        ms = factors[p]
        els = carriers[p]
        op = lambda f: {(a, b): tuple(f(x, y) % m for x, y, m in zip(a, b, ms)) for a in els for b in els}
        funs[n["zero"]][p] = {(): tuple(0 for _ in ms)}
        funs[n["one"]][p] = {(): tuple(1 % m for m in ms)}
        funs[n["neg"]][p] = {(a,): tuple((-x) % m for x, m in zip(a, ms)) for a in els}
        funs[n["add"]][p] = op(lambda x, y: x + y)
        funs[n["mul"]][p] = op(lambda x, y: x * y)
    return PresheafModel(poset, {sort: carriers}, {sort: trans}, {}, funs)


def add_propositions(M: PresheafModel, props: dict) -> PresheafModel:
    """Interpret proposition symbols by up-sets (dict name -> set of points)."""
    rels = {}
    for name, U in props.items():
        if not M.poset.is_upset(set(U)):
            raise ModelError(f"{name}: not an up-set")
        rels[name] = {p: (frozenset({()}) if p in U else frozenset()) for p in M.poset.elements}
    return _with(M, rels=rels)


def empty_model(poset: FinitePoset = POINT) -> PresheafModel:
    return PresheafModel(poset, {}, {}, {}, {})
