"""Induced Grothendieck topologies on categories of small Set-models.

A quotient axiom phi |- psi of a theory T induces, for every model M and
instance x in [[phi]]_M, the cosieve of arrows f : M -> M' with f(x) in
[[psi]]_M'.  Model families supply compact models, hom-sets and optionally
the universal arrow correcting a failing instance; brute-force enumeration
over all arrows within a size bound serves as the oracle.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

from .semantics import PresheafModel, _Evaluator, check_sequent, check_theory, set_model
from .syntax import (
    App, Eq, Exists, Or, Sequent, Signature, Theory, TRUE, Var, show_sequent,
)


class TopologyError(ValueError):
    pass


# --- arrows -------------------------------------------------------------------

@dataclass(frozen=True)
class Arrow:
    """A model homomorphism, one element map per sort in carrier order."""
    source: PresheafModel
    target: PresheafModel
    maps: tuple   # ((sort, (image of each source element, ...)), ...)

    def image(self, sort, a):
        for s, imgs in self.maps:
            if s == sort:
                return imgs[self.source.carrier(sort, "*").index(a)]
        raise KeyError(sort)

    def then(self, other: "Arrow") -> "Arrow":
        maps = tuple((s, tuple(other.image(s, b) for b in imgs)) for s, imgs in self.maps)
        return Arrow(self.source, other.target, maps)

    def show(self) -> str:
        return "; ".join(f"{s}: {list(imgs)}" for s, imgs in self.maps)


def identity(M: PresheafModel) -> Arrow:
    return Arrow(M, M, tuple((s, tuple(M.carrier(s, "*"))) for s in sorted(M.sorts)))


def _sort_order(sig: Signature) -> list:
    """Sorts with codomains of unary functions before their domains."""
    after = {s: set() for s in sig.sorts}
    for _, args, res in sig.functions:
        if len(args) == 1 and args[0] != res:
            after[args[0]].add(res)
    out = []

    def visit(s, stack=()):
        if s in out or s in stack:
            return
        for t in sorted(after[s]):
            visit(t, stack + (s,))
        out.append(s)

    for s in sorted(sig.sorts):
        visit(s)
    return out


def _preserves(sig: Signature, M, N, g) -> bool:
    for name, args, res in sig.functions:
        for tup, v in M.functions[name]["*"].items():
            img = tuple(g[s][a] for s, a in zip(args, tup))
            if N.functions[name]["*"][img] != g[res][v]:
                return False
    for name, args in sig.relations:
        rel = N.relations[name]["*"]
        for tup in M.relations[name]["*"]:
            if tuple(g[s][a] for s, a in zip(args, tup)) not in rel:
                return False
    return True


def homomorphisms(sig: Signature, M: PresheafModel, N: PresheafModel) -> list:
    """All homomorphisms M -> N of Set-models, in a fixed order.

    Sorts are assigned codomain-first so unary functions and constants
    restrict each element's image to a fibre; everything is rechecked at
    the end.
    """
    order = _sort_order(sig)
    unary = {s: [(n, a[0], r) for n, a, r in sig.functions if len(a) == 1 and a[0] == s]
             for s in sig.sorts}
    consts = {s: [n for n, a, r in sig.functions if not a and r == s] for s in sig.sorts}
    out = []

    def choices(s, a, g):
        cands = N.carrier(s, "*")
        for name, _, res in unary[s]:
            if res in g and res != s:
                want = g[res][M.functions[name]["*"][(a,)]]
                cands = [b for b in cands if N.functions[name]["*"][(b,)] == want]
        for name in consts[s]:
            if M.functions[name]["*"][()] == a:
                cands = [b for b in cands if N.functions[name]["*"][()] == b]
        return cands

    def rec(i, g):
        if i == len(order):
            if _preserves(sig, M, N, g):
                out.append(Arrow(M, N, tuple((s, tuple(g[s][a] for a in M.carrier(s, "*")))
                                            for s in sorted(M.sorts))))
            return
        s = order[i]
        elems = M.carrier(s, "*")
        for imgs in itertools.product(*(choices(s, a, g) for a in elems)):
            g[s] = dict(zip(elems, imgs))
            rec(i + 1, g)
        g.pop(s, None)

    rec(0, {})
    return out


# --- plugins ------------------------------------------------------------------

@dataclass(frozen=True)
class ModelFamilyPlugin:
    """A theory with enumerable compact models and its quotient axioms.

    ``models(bound)`` lists one model per isomorphism class with all sorts of
    size <= bound.  ``universal(M, axiom, values)`` may return the arrows
    generating the cosieve of a failing instance, or None to fall back on
    brute force.
    """
    name: str
    theory: Theory
    quotient: tuple
    models: Callable
    universal: Callable | None = field(default=None, compare=False)

    def homs(self, M, N) -> list:
        return homomorphisms(self.theory.signature, M, N)

    def quotient_theory(self) -> Theory:
        return Theory(self.theory.signature, tuple(self.quotient))


def function_model(a: int, fiber: tuple) -> PresheafModel:
    """(A -> B) with |A| = a and f sending consecutive blocks of A to 0, 1, ..."""
    f = {}
    x = 0
    for y, k in enumerate(fiber):
        for _ in range(k):
            f[(x,)] = y
            x += 1
    if x != a:
        raise TopologyError("fibre sizes do not add up")
    return set_model({"A": range(a), "B": range(len(fiber))}, functions={"f": f})


def function_from_map(mapping: dict, b: int) -> PresheafModel:
    """(A -> B) from an explicit map {x: f(x)} on A = range(len(mapping))."""
    return set_model({"A": range(len(mapping)), "B": range(b)},
                     functions={"f": {(x,): y for x, y in mapping.items()}})


def _partitions(n: int, parts: int, top=None):
    """Nonincreasing tuples of ``parts`` nonnegative integers summing to n."""
    top = n if top is None else top
    if parts == 0:
        if n == 0:
            yield ()
        return
    for k in range(min(n, top), -1, -1):
        for rest in _partitions(n - k, parts - 1, k):
            yield (k,) + rest


def _function_models(bound: int) -> list:
    return [function_model(a, fib) for b in range(bound + 1) for a in range(bound + 1)
            for fib in _partitions(a, b)]


def _adjoin(M: PresheafModel, sort: str, image: dict) -> tuple:
    """Add one element to ``sort``; ``image`` gives its unary function values."""
    new = len(M.carrier(sort, "*"))
    sorts = {s: tuple(M.carrier(s, "*")) + ((new,) if s == sort else ()) for s in M.sorts}
    funs = {n: dict(t["*"]) for n, t in M.functions.items()}
    for name, v in image.items():
        funs[name][(new,)] = v
    N = set_model(sorts, {r: v["*"] for r, v in M.relations.items()}, funs)
    arrow = Arrow(M, N, tuple((s, tuple(M.carrier(s, "*"))) for s in sorted(M.sorts)))
    return N, arrow


def _surjectivity(f: str, src: str, tgt: str) -> Sequent:
    x, y = Var("x1", tgt), Var("y1", src)
    return Sequent((x,), TRUE, Exists(y, Eq(App(f, (y,)), x)))


def surjective_function_family() -> ModelFamilyPlugin:
    sig = Signature.make(["A", "B"], functions={"f": (("A",), "B")})
    axiom = _surjectivity("f", "A", "B")

    def universal(M, ax, values):
        if ax != axiom:
            return None
        N, arrow = _adjoin(M, "A", {"f": values[0]})
        return [arrow]

    return ModelFamilyPlugin("surjective-function", Theory(sig), (axiom,), _function_models, universal)


def pointed_set_model(n: int) -> PresheafModel:
    return set_model({"A": range(n)}, functions={"pt": {(): 0}})


def pointed_set_family() -> ModelFamilyPlugin:
    """Pointed sets; the quotient collapses every element onto the point."""
    sig = Signature.make(["A"], functions={"pt": ((), "A")})
    x = Var("x1", "A")
    axiom = Sequent((x,), TRUE, Eq(x, App("pt")))

    def universal(M, ax, values):
        if ax != axiom:
            return None
        a = values[0]
        elems = [b for b in M.carrier("A", "*") if b != a]
        N = pointed_set_model(len(elems))
        imgs = tuple(0 if b == a else elems.index(b) for b in M.carrier("A", "*"))
        return [Arrow(M, N, (("A", imgs),))]

    return ModelFamilyPlugin("pointed-set", Theory(sig), (axiom,),
                             lambda bound: [pointed_set_model(n) for n in range(1, bound + 1)],
                             universal)


def chain_model(sizes: tuple, maps: tuple) -> PresheafModel:
    """A_{k} -> ... -> A_0 with sizes[i] = |A_i| and maps[i] the list f_i : A_{i+1} -> A_i."""
    sorts = {f"A{i}": range(n) for i, n in enumerate(sizes)}
    funs = {f"f{i}": {(x,): y for x, y in enumerate(m)} for i, m in enumerate(maps)}
    return set_model(sorts, functions=funs)


def chain_family(length: int = 4, surjective: str = "all") -> ModelFamilyPlugin:
    """Truncated chain A_{length-1} -> ... -> A_0 with surjectivity of f_n.

    ``surjective`` selects n even, n odd or all n.
    """
    sorts = [f"A{i}" for i in range(length)]
    funs = {f"f{i}": ((f"A{i + 1}",), f"A{i}") for i in range(length - 1)}
    sig = Signature.make(sorts, functions=funs)
    keep = {"even": lambda n: n % 2 == 0, "odd": lambda n: n % 2 == 1, "all": lambda n: True}[surjective]
    axioms = tuple(_surjectivity(f"f{n}", f"A{n + 1}", f"A{n}") for n in range(length - 1) if keep(n))

    def models(bound):
        out = []
        for sizes in itertools.product(range(bound + 1), repeat=length):
            spaces = [itertools.product(range(sizes[i]), repeat=sizes[i + 1]) for i in range(length - 1)]
            for maps in itertools.product(*[list(s) for s in spaces]):
                out.append(chain_model(sizes, maps))
        return out

    def universal(M, ax, values):
        if ax not in axioms:
            return None
        n = int(ax.context[0].sort[1:])
        N, arrow = _adjoin(M, f"A{n + 1}", {f"f{n}": values[0]})
        return [arrow]

    return ModelFamilyPlugin(f"chain-{length}-{surjective}", Theory(sig), axioms, models, universal)


PLUGINS = {
    "surjective-function": surjective_function_family,
    "pointed-set": pointed_set_family,
    "truncated-chain": chain_family,
}


# --- cosieves -------------------------------------------------------------------

def _holds_at(M, seq_ctx, phi, values) -> bool:
    return _Evaluator(M).holds(phi, dict(zip(seq_ctx, values)), "*")


def _members(plugin, axiom, values, arrows):
    out = []
    for h in arrows:
        img = tuple(h.image(v.sort, a) for v, a in zip(axiom.context, values))
        out.append((h, _holds_at(h.target, axiom.context, axiom.consequent, img)))
    return out


@dataclass(frozen=True)
class Cosieve:
    """Arrows out of ``root`` factoring through one of ``generators``."""
    plugin: ModelFamilyPlugin
    root: PresheafModel
    generators: tuple

    def contains(self, h: Arrow) -> bool:
        for g in self.generators:
            for k in self.plugin.homs(g.target, h.target):
                if g.then(k).maps == h.maps:
                    return True
        return False

    @property
    def is_empty(self) -> bool:
        return not self.generators

    def is_maximal(self) -> bool:
        return self.contains(identity(self.root))


def brute_force_cosieve(plugin, M, axiom: Sequent, values, size_bound: int) -> tuple:
    """Membership of every arrow M -> N, N among the models within the bound."""
    arrows = [h for N in plugin.models(size_bound) for h in plugin.homs(M, N)]
    return tuple(_members(plugin, axiom, values, arrows))


def _check_instance(M, axiom, values):
    if len(values) != len(axiom.context):
        raise TopologyError("instance length does not match the axiom context")
    for v, a in zip(axiom.context, values):
        if a not in M.carrier(v.sort, "*"):
            raise TopologyError(f"{a} is not an element of {v.sort}")
    if not _holds_at(M, axiom.context, axiom.antecedent, values):
        raise TopologyError("instance is not in the interpretation of the antecedent")


def cosieve_generators(plugin, M, axiom: Sequent, values, size_bound: int = 3) -> Cosieve:
    """Generators of S_x for the instance ``values`` of ``axiom``.

    Identity if the instance already satisfies the consequent, nothing for a
    false consequent, the plugin's universal arrows when offered, and
    otherwise the brute-force members not generated by earlier ones.
    """
    values = tuple(values)
    _check_instance(M, axiom, values)
    if _holds_at(M, axiom.context, axiom.consequent, values):
        return Cosieve(plugin, M, (identity(M),))
    if axiom.consequent == Or(()):
        return Cosieve(plugin, M, ())
    if plugin.universal is not None:
        gens = plugin.universal(M, axiom, values)
        if gens is not None:
            return Cosieve(plugin, M, tuple(gens))
    chosen = Cosieve(plugin, M, ())
    for h, member in brute_force_cosieve(plugin, M, axiom, values, size_bound):
        if member and not chosen.contains(h):
            chosen = Cosieve(plugin, M, chosen.generators + (h,))
    return chosen


def pushforward_table(plugin, g: Arrow, axiom, values, size_bound) -> tuple:
    """Membership of h : M' -> N in the pullback of S_values along g : M -> M'."""
    out = []
    for N in plugin.models(size_bound):
        for h in plugin.homs(g.target, N):
            comp = g.then(h)
            img = tuple(comp.image(v.sort, a) for v, a in zip(axiom.context, values))
            out.append((h, _holds_at(N, axiom.context, axiom.consequent, img)))
    return tuple(out)


# --- rigidity -------------------------------------------------------------------

@dataclass(frozen=True)
class TraceNode:
    model: PresheafModel
    instance: tuple = None     # (axiom index, values) of the repaired instance
    children: tuple = ()
    exhausted: bool = False


@dataclass(frozen=True)
class CoveringTrace:
    root: TraceNode

    @property
    def exhausted(self) -> bool:
        return any(n.exhausted for n in self.nodes())

    def nodes(self):
        stack = [self.root]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children))

    def steps(self) -> int:
        return sum(1 for n in self.nodes() if n.instance is not None and not n.exhausted)

    def leaves(self) -> list:
        return [n for n in self.nodes() if n.instance is None]

    def report(self, plugin: ModelFamilyPlugin) -> str:
        lines = []

        def walk(n, depth):
            pad = "  " * depth
            desc = show_model(n.model)
            if n.exhausted:
                lines.append(f"{pad}{desc}  fuel exhausted")
            elif n.instance is None:
                lines.append(f"{pad}{desc}  satisfies the quotient")
            else:
                i, vals = n.instance
                ax = show_sequent(plugin.quotient[i])
                tail = "" if n.children else "  (empty cover)"
                lines.append(f"{pad}{desc}  repair axiom {i} at {list(vals)}: {ax}{tail}")
            for c in n.children:
                walk(c, depth + 1)

        walk(self.root, 0)
        status = "fuel exhausted" if self.exhausted else "covered"
        return "\n".join(lines + [f"status: {status}, steps: {self.steps()}"])


def show_model(M: PresheafModel) -> str:
    parts = [f"{s}={len(M.carrier(s, '*'))}" for s in sorted(M.sorts)]
    for f in sorted(M.functions):
        tab = M.functions[f]["*"]
        parts.append(f"{f}={[tab[k] for k in sorted(tab)]}")
    return "(" + ", ".join(parts) + ")"


def failing_instance(plugin, M):
    """Least (axiom index, values) violating the quotient, or None."""
    for i, ax in enumerate(plugin.quotient):
        v = check_sequent(M, ax)
        if not v.holds:
            return i, tuple(a for _, a in v.assignment)
    return None


def rigidity_run(plugin, M, fuel: int, size_bound: int = 3) -> CoveringTrace:
    """Repeatedly repair the least failing instance along the cosieve generators."""
    def expand(N, budget):
        inst = failing_instance(plugin, N)
        if inst is None:
            return TraceNode(N)
        if budget == 0:
            return TraceNode(N, inst, (), True)
        i, vals = inst
        cos = cosieve_generators(plugin, N, plugin.quotient[i], vals, size_bound)
        return TraceNode(N, inst, tuple(expand(g.target, budget - 1) for g in cos.generators))

    return CoveringTrace(expand(M, fuel))


def irreducible(plugin, M) -> bool:
    return check_theory(M, plugin.quotient_theory()).holds


def has_proper_covering_cosieve(plugin, M, size_bound: int) -> bool:
    """Some generating cosieve S_x on M omits the identity (brute force)."""
    ident = identity(M)
    for ax in plugin.quotient:
        ev = _Evaluator(M)
        for vals in ev.tuples(ax.context, "*"):
            if not _holds_at(M, ax.context, ax.antecedent, vals):
                continue
            for h, member in brute_force_cosieve(plugin, M, ax, vals, size_bound):
                if h.target == M and h.maps == ident.maps and not member:
                    return True
    return False
