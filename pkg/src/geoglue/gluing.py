"""Compile cover data into glued theories.

``glue_general`` forms T0 + sum of E_S/phi_S over the simplices of the index
set.  ``glue_localic`` is the special case with one proposition symbol per
chart, ``glue_zariski`` and ``glue_crystalline`` emit the theories of a
scheme (resp. a crystalline site) from affine chart data, and
``eliminate_props`` removes the chart propositions again when they are
definable.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import sympy

from . import _reason
from .extensions import (
    ExtensionSystem, TheoryExtension, add_sum, conditional, conditional_system,
    desugar_formula, desugar_functions, desugar_sequent, extend, make_system, proposition,
    rel_name, simplex_poset,
)
from .library import (
    PDRingData, PresentedRing, alg_structure, algstr_over, crystalline_base, element_formula,
    inv, loc, mul, power, pd_gamma, ring_theory,
)
from .syntax import (
    TRUE, And, App, Eq, Exists, Or, RelAtom, Sequent, Signature, Theory, Var,
    check_sequent, flatten, free_vars, map_formula, normalize, show,
    sequent_symbols, show_sequent, symbols,
)


class GluingError(ValueError):
    pass


def prop(i) -> RelAtom:
    return RelAtom(f"p{i}", ())


def _funs(ext: TheoryExtension) -> dict:
    return {n: (a, r) for n, a, r in ext.functions}


def _sum_theory(base: Theory, exts) -> Theory:
    for e in exts:
        base = extend(base, e)
    return base


# ---------------------------------------------------------------------------
# the general gluing formula

def glue_general(T0: Theory, system: ExtensionSystem, phis: dict, normal: bool = True) -> Theory:
    """T0 + sum over S in Delta(I) of E_S/phi_S with phi_S the conjunction of phi_i.

    ``system`` is indexed by the simplices (frozensets) of I and ``phis``
    by the elements of I.  With ``normal=False`` the axioms are T0's
    followed by those of each conditional extension, in simplex order.
    """
    phi_s = {S: flatten(And(tuple(phis[i] for i in sorted(S, key=repr)))) for S in system.elements}
    cond = conditional_system(system, phi_s)
    out = _sum_theory(T0, [cond.ext(S) for S in cond.elements])
    return normalize(out) if normal else out


# ---------------------------------------------------------------------------
# localic gluing

@dataclass(frozen=True)
class LocalicGlueSpec:
    """Charts E_i over T0 with overlap formulas phi_{i,j} and diagonal quotients.

    ``charts`` maps i to a localic extension (function symbols allowed, they
    are desugared); ``overlaps`` maps ordered pairs (i, j) to a closed
    formula of T0 + E_i; ``quotients`` maps unordered pairs (i, j), i < j, to
    a tuple of sequents over T0 + E_i + E_j.
    """
    base: Theory
    charts: tuple            # ((i, TheoryExtension), ...)
    overlaps: tuple = ()     # (((i, j), phi), ...)
    quotients: tuple = ()    # (((i, j), (sequent, ...)), ...)

    @property
    def index(self) -> tuple:
        return tuple(i for i, _ in self.charts)

    def chart(self, i) -> TheoryExtension:
        return dict(self.charts)[i]

    def overlap(self, i, j):
        d = dict(self.overlaps)
        if (i, j) not in d:
            raise GluingError(f"overlap formula phi_{i},{j} missing")
        return d[(i, j)]

    def quotient(self, i, j) -> tuple:
        d = dict(self.quotients)
        return tuple(d.get((i, j), ())) + tuple(d.get((j, i), ()) if i != j else ())


def _validate_localic(spec: LocalicGlueSpec):
    for i, e in spec.charts:
        if e.sorts:
            raise GluingError(f"chart {i} adds sorts; localic gluing needs localic extensions")
    for (i, j), phi in spec.overlaps:
        if free_vars(phi):
            raise GluingError(f"overlap formula phi_{i},{j} is not closed")
    base_sig = spec.base.signature
    for (i, j), axs in spec.quotients:
        sig = base_sig.merge(spec.chart(i).signature).merge(spec.chart(j).signature)
        for ax in axs:
            errs = check_sequent(sig, ax, f"quotient[{i},{j}]")
            if errs:
                raise GluingError(f"{errs[0].path}: {errs[0].message}")


@dataclass(frozen=True)
class _Desugared:
    charts: dict
    overlaps: dict
    quotients: dict


def _desugar_spec(spec: LocalicGlueSpec) -> _Desugared:
    idx = spec.index
    charts = {i: desugar_functions(spec.chart(i)) for i in idx}
    funs = {i: _funs(spec.chart(i)) for i in idx}
    overlaps = {}
    for i in idx:
        for j in idx:
            if i != j:
                overlaps[(i, j)] = flatten(desugar_formula(spec.overlap(i, j), funs[i]))
    quotients = {}
    for a, i in enumerate(idx):
        for j in idx[a + 1:]:
            fs = {**funs[i], **funs[j]}
            quotients[(i, j)] = tuple(desugar_sequent(q, fs) for q in spec.quotient(i, j))
    return _Desugared(charts, overlaps, quotients)


def _cover_axiom(idx) -> Sequent:
    return Sequent((), TRUE, flatten(Or(tuple(prop(i) for i in idx))))


def glue_localic(spec: LocalicGlueSpec, normal: bool = True) -> Theory:
    """T0 + <p_i> + (\\/ p_i) + E_i/p_i + (p_j <-> phi_ij)/p_i + Q_ij/(p_i & p_j)."""
    _validate_localic(spec)
    d = _desugar_spec(spec)
    idx = spec.index
    exts = [proposition(f"p{i}") for i in idx]
    exts.append(TheoryExtension(axioms=(_cover_axiom(idx),)))
    exts += [conditional(d.charts[i], prop(i)) for i in idx]
    for i in idx:
        for j in idx:
            if i != j:
                phi = d.overlaps[(i, j)]
                pair = TheoryExtension(axioms=(Sequent((), prop(j), phi), Sequent((), phi, prop(j))))
                exts.append(conditional(pair, prop(i)))
    for a, i in enumerate(idx):
        for j in idx[a + 1:]:
            q = TheoryExtension(axioms=d.quotients[(i, j)])
            exts.append(conditional(q, And((prop(i), prop(j)))))
    out = _sum_theory(spec.base, exts)
    return normalize(out) if normal else out


def localic_system(spec: LocalicGlueSpec):
    """The system over Delta(I) whose general gluing is the localic gluing.

    Returns (T0~, system, phis) with T0~ = T0 + <p_i> + (\\/ p_i),
    E~_{i} = E_i + p_i + (p_j <-> phi_ij)_j, E~_{ij} = Q_ij and empty
    extensions on larger simplices.
    """
    d = _desugar_spec(spec)
    idx = spec.index
    t0 = _sum_theory(spec.base, [proposition(f"p{i}") for i in idx])
    t0 = t0.with_axioms(_cover_axiom(idx))
    elements, order = simplex_poset(idx)
    assignment = {}
    for S in elements:
        if len(S) == 1:
            (i,) = S
            axs = [Sequent((), TRUE, prop(i))]
            for j in idx:
                if j != i:
                    phi = d.overlaps[(i, j)]
                    axs += [Sequent((), prop(j), phi), Sequent((), phi, prop(j))]
            assignment[S] = add_sum(d.charts[i], TheoryExtension(axioms=tuple(axs)))
        elif len(S) == 2:
            i, j = sorted(S, key=idx.index)
            assignment[S] = TheoryExtension(axioms=d.quotients[(i, j)])
        else:
            assignment[S] = TheoryExtension()
    return t0, make_system(elements, order, assignment), {i: prop(i) for i in idx}


# ---------------------------------------------------------------------------
# eliminating chart propositions

def _replace_props(f, table: dict):
    def step(g):
        if isinstance(g, RelAtom) and not g.args and g.rel in table:
            return table[g.rel]
        return g
    return flatten(map_formula(f, step))


def _replace_in_sequent(ax: Sequent, table: dict) -> Sequent:
    return Sequent(ax.context, _replace_props(ax.antecedent, table), _replace_props(ax.consequent, table))


def eliminate_props(theory: Theory, witnesses: dict) -> Theory:
    """Remove proposition symbols p with p <-> psi derivable, replacing p by psi.

    After the replacement, consequent existentials over functional relations
    are instantiated with the known values and rewritten axioms derivable
    from the remaining ones are dropped (both steps are sound).
    """
    sig = theory.signature
    table = {}
    for p, psi in witnesses.items():
        if psi is None:
            raise GluingError(f"witness missing for {p}")
        if sig.rel_arity(p) != ():
            raise GluingError(f"{p} is not a proposition symbol of the theory")
        if free_vars(psi):
            raise GluingError(f"witness for {p} is not closed")
        forward = _reason.derives(theory.axioms, Sequent((), RelAtom(p, ()), psi), sig)
        backward = _reason.derives(theory.axioms, Sequent((), psi, RelAtom(p, ())), sig)
        if not (forward and backward):
            raise GluingError(f"witness missing for {p}: {show(psi)} is not shown equivalent")
        table[p] = psi
    if not table:
        return normalize(theory)
    for psi in table.values():
        names = {g.rel for g in _atoms(psi)}
        if names & set(table):
            raise GluingError("witnesses must not mention eliminated propositions")
    new_sig = Signature(sig.sorts, tuple(r for r in sig.relations if r[0] not in table), sig.functions)
    kept, changed = [], []
    for ax in theory.axioms:
        new = _replace_in_sequent(ax, table)
        (kept if new == ax else changed).append(new)
    schemas = tuple(replace(sc, guard=None if sc.guard is None else _replace_props(sc.guard, table))
                    for sc in theory.schemas)
    old_texts = {show_sequent(a) for a in normalize(Theory(new_sig, tuple(kept))).axioms}
    out = normalize(Theory(new_sig, tuple(kept) + tuple(changed), schemas))
    functional = _reason._functional(out.axioms)
    axioms = [a if show_sequent(a) in old_texts else _reason.instantiate_functional(a, functional)
              for a in out.axioms]
    out = normalize(replace(out, axioms=tuple(axioms)))
    chart_syms = set()
    for psi in table.values():
        chart_syms |= symbols(psi)
    cands = [a for a in out.axioms
             if show_sequent(a) not in old_texts or sequent_symbols(a) & chart_syms]
    axioms = _reason.strengthen(out.axioms, cands, new_sig)
    out = normalize(replace(out, axioms=tuple(axioms)))
    cands = [a for a in out.axioms
             if show_sequent(a) not in old_texts or sequent_symbols(a) & chart_syms]
    axioms = _reason.remove_redundant(out.axioms, cands, new_sig)
    return normalize(replace(out, axioms=tuple(axioms)))


def _atoms(f):
    out = []

    def step(g):
        if isinstance(g, RelAtom):
            out.append(g)
        return g
    map_formula(f, step)
    return out


def constant_witnesses(spec: LocalicGlueSpec) -> dict:
    """p_i <-> exists x. R_c(x) for the first constant c of each chart.

    A single chart without constants gets the witness true.
    """
    out = {}
    for i, e in spec.charts:
        consts = [(n, r) for n, a, r in e.functions if not a]
        if consts:
            n, r = sorted(consts)[0]
            out[f"p{i}"] = Exists(Var("x", r), RelAtom(rel_name(n), (Var("x", r),)))
        elif len(spec.charts) == 1:
            out[f"p{i}"] = TRUE
        else:
            out[f"p{i}"] = None
    return out


# ---------------------------------------------------------------------------
# Zariski covers

def _sym(ring: PresentedRing, e):
    return sympy.expand(ring.expr(e))


@dataclass(frozen=True)
class ZariskiCoverSpec:
    """Affine charts Spec K_i with overlaps covered by standard opens.

    ``overlaps[(i, i')]`` lists the elements f^j_{i,i'} of K_i, j = 0, 1, ...;
    the lists for (i, i') and (i', i) have equal length.  ``transition(i,
    i', j, lam)`` returns (lam', n) with phi^j_{i,i'}(lam) = (f^j_{i',i})^-n lam'.
    Chart i uses the constant prefix ``c<i>_`` unless ``prefixes`` says
    otherwise.
    """
    charts: tuple                      # ((i, PresentedRing), ...)
    overlaps: tuple = ()               # (((i, i'), (f, ...)), ...)
    transition: Callable | None = field(default=None, compare=False, hash=False)
    flavor: str = "economical"
    prefixes: tuple = ()               # ((i, prefix), ...)

    @property
    def index(self) -> tuple:
        return tuple(i for i, _ in self.charts)

    def ring(self, i) -> PresentedRing:
        return dict(self.charts)[i]

    def prefix(self, i) -> str:
        return dict(self.prefixes).get(i, f"c{i}_")

    def overlap(self, i, k) -> tuple:
        return tuple(dict(self.overlaps).get((i, k), ()))


def _index_elements(ring: PresentedRing, flavor: str) -> list:
    """The lambda over which element-indexed families range."""
    if flavor == "schematic":
        return ring.elements()
    return list(ring.generators)


def validate_zariski(spec: ZariskiCoverSpec) -> list:
    """Check overlap lists and the round-trip law of the transitions on generators.

    For lam in K_i with phi(lam) = g^-n lam' and phi'(lam') = f^-n' lam'',
    and phi'(g) = f^-m mu, the law phi' o phi = id reads
    lam'' f^(mn) = mu^n lam f^n' in K_i.
    """
    errs = []
    idx = spec.index
    for i in idx:
        for k in idx:
            if i != k and len(spec.overlap(i, k)) != len(spec.overlap(k, i)):
                errs.append(f"overlap lists for ({i}, {k}) and ({k}, {i}) differ in length")
    if errs or spec.transition is None:
        return errs
    for i in idx:
        Ki = spec.ring(i)
        for k in idx:
            if i == k:
                continue
            for j, (f, g) in enumerate(zip(spec.overlap(i, k), spec.overlap(k, i))):
                for lam in _index_elements(Ki, spec.flavor):
                    lam1, n = spec.transition(i, k, j, lam)
                    lam2, n2 = spec.transition(k, i, j, lam1)
                    mu, m = spec.transition(k, i, j, g)
                    lhs = _sym(Ki, lam2) * _sym(Ki, f) ** (m * n)
                    rhs = _sym(Ki, mu) ** n * _sym(Ki, lam) * _sym(Ki, f) ** n2
                    if not Ki.eq(lhs, rhs):
                        errs.append(f"transition ({i}->{k}->{i}, j={j}) does not return {lam}")
    return errs


def _elem(ring, e, x, flavor, prefix):
    return flatten(element_formula(ring, e, x, flavor, prefix))


def _power_mul(x, n, y, sort):
    return y if n == 0 else mul(power(x, n, sort), y, sort)


def transition_family(Ki, Kk, f_ki, lam, lam1, n, flavor, pre_i, pre_k, sort="A") -> Sequent:
    """x in c_f & inv(x) & y in c_lam & z in c_lam' |- x^n y = z."""
    x, y, z = Var("x", sort), Var("y", sort), Var("z", sort)
    ante = And((_elem(Kk, f_ki, x, flavor, pre_k), inv(x, sort),
                _elem(Ki, lam, y, flavor, pre_i), _elem(Kk, lam1, z, flavor, pre_k)))
    return Sequent((x, y, z), flatten(ante), Eq(_power_mul(x, n, y, sort), z))


def _overlap_axioms(spec_rings, overlaps, prefix, flavor, sort):
    """inv transfer and pairwise covering axioms of a standard-open cover."""
    axioms = []
    idx = list(spec_rings)
    x = Var("x", sort)
    for i in idx:
        for k in idx:
            if i == k:
                continue
            fs = overlaps(i, k)
            for f in fs:
                axioms.append(Sequent((x,), flatten(And((_elem(spec_rings[i], f, x, flavor, prefix(i)),
                                                          inv(x, sort)))), prop(k)))
            cover = Or(tuple(Exists(x, flatten(And((_elem(spec_rings[i], f, x, flavor, prefix(i)),
                                                    inv(x, sort))))) for f in fs))
            axioms.append(Sequent((), And((prop(i), prop(k))), flatten(cover)))
    return axioms


def glue_zariski(spec: ZariskiCoverSpec) -> Theory:
    """T_S = Ring + (loc) + <p_i> + (\\/ p_i) + AlgStr_{K_i}/p_i + overlap and transition families."""
    errs = validate_zariski(spec)
    if errs:
        raise GluingError(errs[0])
    idx = spec.index
    rings = {i: spec.ring(i) for i in idx}
    base = extend(ring_theory(), loc("finite"))
    exts = [proposition(f"p{i}") for i in idx]
    exts.append(TheoryExtension(axioms=(_cover_axiom(idx),)))
    for i in idx:
        a = alg_structure(rings[i], spec.flavor, "A", spec.prefix(i))
        exts.append(conditional(desugar_functions(a), prop(i)))
    axioms = _overlap_axioms(rings, spec.overlap, spec.prefix, spec.flavor, "A")
    for i in idx:
        for k in idx:
            if i == k:
                continue
            for j, g in enumerate(spec.overlap(k, i)):
                for lam in _index_elements(rings[i], spec.flavor):
                    try:
                        lam1, n = spec.transition(i, k, j, lam)
                    except Exception as exc:  # the callable is user input
                        raise GluingError(f"transition failed on {lam}: {exc}") from exc
                    axioms.append(transition_family(rings[i], rings[k], g, lam, lam1, n, spec.flavor,
                                                    spec.prefix(i), spec.prefix(k)))
    exts.append(TheoryExtension(axioms=tuple(axioms)))
    return normalize(_sum_theory(base, exts))


def zariski_witnesses(spec: ZariskiCoverSpec) -> dict:
    out = {}
    for i in spec.index:
        K = spec.ring(i)
        names = _index_elements(K, spec.flavor)
        if names:
            x = Var("x", "A")
            out[f"p{i}"] = Exists(x, _elem(K, names[0], x, spec.flavor, spec.prefix(i)))
        elif len(spec.index) == 1:
            out[f"p{i}"] = TRUE
        else:
            out[f"p{i}"] = None
    return out


def affine_zariski_target(K: PresentedRing, flavor: str = "economical", prefix: str = "c0_") -> Theory:
    """Alg_K + (loc) with the K-constants desugared into relations."""
    t = extend(ring_theory(), loc("finite"))
    return normalize(extend(t, desugar_functions(alg_structure(K, flavor, "A", prefix))))


def substitution_transition(rings: dict, overlaps: Callable, images: dict) -> Callable:
    """Transitions given by substituting rational expressions for generators.

    ``images[(i, k, j)]`` maps each generator of K_i to an expression in
    K_k's generators whose denominator is a power of f^j_{k,i}.  The
    returned callable yields (lam', n) with n least such that
    f^n * phi(lam) is a polynomial lam'.
    """
    def transition(i, k, j, lam):
        subs = images.get((i, k, j))
        if subs is None:
            raise GluingError(f"no transition map for ({i}, {k}, {j})")
        src, dst = rings[i], rings[k]
        loc_k = {g: sympy.Symbol(g) for g in dst.generators}
        e = src.expr(lam).subs({sympy.Symbol(g): sympy.sympify(v, locals=loc_k)
                                for g, v in subs.items()}, simultaneous=True)
        f = dst.expr(overlaps(k, i)[j])
        gens = [sympy.Symbol(g) for g in dst.generators]
        for n in range(65):
            num, den = sympy.fraction(sympy.cancel(sympy.together(e * f ** n)))
            if not den.free_symbols & set(gens):
                return sympy.expand(num / den), n
        raise GluingError(f"denominator of the image of {lam} is not a power of {f}")

    return transition


def projective_line_spec(K: PresentedRing = None, flavor: str = "economical") -> ZariskiCoverSpec:
    """P^1_K = Spec K[X1] u Spec K[X2] glued along X1 -> X2^-1."""
    base = (K or PresentedRing("ZZ")).base
    rings = {1: PresentedRing(base, ("X1",)), 2: PresentedRing(base, ("X2",))}
    overlaps = (((1, 2), ("X1",)), ((2, 1), ("X2",)))
    images = {(1, 2, 0): {"X1": "1/X2"}, (2, 1, 0): {"X2": "1/X1"}}
    transition = substitution_transition(rings, lambda i, k: dict(overlaps)[(i, k)], images)
    return ZariskiCoverSpec(tuple(rings.items()), overlaps, transition, flavor)


# ---------------------------------------------------------------------------
# crystalline covers

@dataclass(frozen=True)
class CrystallineChart:
    data: PDRingData          # (K, I_K, gamma_K)
    target: PresentedRing     # R, presented over K/I_K (lists K's generators)


@dataclass(frozen=True)
class CrystallineCoverSpec:
    """Charts (K_i, I_K_i, gamma_K_i; R_i) with overlaps D(g) in K and D(h) in R.

    ``overlaps[(i, i')]`` lists pairs (g, h, w) with g in K_i, h in R_i and
    the witness h = g * w in R_i.  ``transition_k`` and ``transition_r``
    behave like the Zariski transition for K- and R-elements.
    """
    charts: tuple                       # ((i, CrystallineChart), ...)
    overlaps: tuple = ()                # (((i, i'), ((g, h, w), ...)), ...)
    transition_k: Callable | None = field(default=None, compare=False, hash=False)
    transition_r: Callable | None = field(default=None, compare=False, hash=False)
    flavor: str = "economical"

    @property
    def index(self) -> tuple:
        return tuple(i for i, _ in self.charts)

    def chart(self, i) -> CrystallineChart:
        return dict(self.charts)[i]

    def overlap(self, i, k) -> tuple:
        return tuple(dict(self.overlaps).get((i, k), ()))


def validate_crystalline(spec: CrystallineCoverSpec) -> list:
    errs = []
    for i in spec.index:
        c = spec.chart(i)
        if not c.data.ideal and c.data.gamma:
            errs.append(f"chart {i}: PD-generator list missing")
        for g in c.data.ideal:
            if not c.target.eq(g, 0):
                errs.append(f"chart {i}: I_K does not vanish in R ({g})")
        for k in spec.index:
            if k == i:
                continue
            for (g, h, w) in spec.overlap(i, k):
                R = c.target
                if not R.eq(R.expr(h), R.expr(g) * R.expr(w)):
                    errs.append(f"chart {i}: divisibility witness fails for {g} | {h}")
    return errs


def crystalline_chart_extension(chart: CrystallineChart, i, flavor="economical") -> TheoryExtension:
    """AlgStr_K(A) + AlgStr_R/K(B) + gamma/gamma_K with chart prefixes."""
    K, R = chart.data.ring, chart.target
    pk, pr = _cris_prefixes(i)
    e = add_sum(alg_structure(K, flavor, "A", pk), algstr_over(K, R, flavor, pk, pr))
    return add_sum(e, pd_gamma(chart.data, flavor, pk))


def _cris_prefixes(i):
    return f"c{i}_", f"b{i}_"


def glue_crystalline(spec: CrystallineCoverSpec) -> Theory:
    """T_{X/S}: the crystalline base, chart structures over p_i and both transition families."""
    errs = validate_crystalline(spec)
    if errs:
        raise GluingError(errs[0])
    idx = spec.index
    base = crystalline_base(spec.chart(idx[0]).data.degree)
    exts = [proposition(f"p{i}") for i in idx]
    exts.append(TheoryExtension(axioms=(_cover_axiom(idx),)))
    for i in idx:
        e = crystalline_chart_extension(spec.chart(i), i, spec.flavor)
        exts.append(conditional(desugar_functions(e), prop(i)))
    r_rings = {i: spec.chart(i).target for i in idx}
    k_rings = {i: spec.chart(i).data.ring for i in idx}
    h_over = lambda i, k: tuple(h for (_, h, _) in spec.overlap(i, k))
    axioms = _overlap_axioms(r_rings, h_over, lambda i: _cris_prefixes(i)[1], spec.flavor, "B")
    for i in idx:
        for k in idx:
            if i == k:
                continue
            for j, (g, h, _) in enumerate(spec.overlap(k, i)):
                for lam in _index_elements(k_rings[i], spec.flavor):
                    lam1, n = spec.transition_k(i, k, j, lam)
                    axioms.append(transition_family(k_rings[i], k_rings[k], g, lam, lam1, n, spec.flavor,
                                                    _cris_prefixes(i)[0], _cris_prefixes(k)[0], "A"))
                for mu in _index_elements(r_rings[i], spec.flavor):
                    mu1, n = spec.transition_r(i, k, j, mu)
                    axioms.append(transition_family(r_rings[i], r_rings[k], h, mu, mu1, n, spec.flavor,
                                                    _cris_prefixes(i)[1], _cris_prefixes(k)[1], "B"))
    exts.append(TheoryExtension(axioms=tuple(axioms)))
    return normalize(_sum_theory(base, exts))


def affine_crystalline_target(chart: CrystallineChart, flavor: str = "economical", i=0) -> Theory:
    """AlgQuot(K, R) + PD_gammaK + (nil) + (loc) in the chart's naming, desugared."""
    base = crystalline_base(chart.data.degree)
    return normalize(extend(base, desugar_functions(crystalline_chart_extension(chart, i, flavor))))


def crystalline_witnesses(spec: CrystallineCoverSpec) -> dict:
    out = {}
    for i in spec.index:
        c = spec.chart(i)
        gens = [g for g in c.target.generators]
        if gens and spec.flavor == "economical":
            x = Var("x", "B")
            out[f"p{i}"] = Exists(x, _elem(c.target, gens[0], x, spec.flavor, _cris_prefixes(i)[1]))
        elif len(spec.index) == 1:
            out[f"p{i}"] = TRUE
        else:
            out[f"p{i}"] = None
    return out


# ---------------------------------------------------------------------------
# the projective line as a localic gluing

def local_algebra_base(K: PresentedRing = None, flavor: str = "economical") -> Theory:
    """Ring + (loc) + Alg_K, the K-constants desugared with prefix ``k_``."""
    t = extend(ring_theory(), loc("finite"))
    return extend(t, desugar_functions(alg_structure(K or PresentedRing("ZZ"), flavor, "A", "k_")))


def projective_line_localic(K: PresentedRing = None, flavor: str = "economical") -> LocalicGlueSpec:
    """T0 = Alg_K + (loc), E_i = <c_i : A>, phi_i = inv(c_i), Q = (true |- c1 c2 = 1).

    Alg_K is added in desugared form so that T0 stays function-free over Ring.
    """
    t0 = local_algebra_base(K, flavor)
    c1, c2 = App("c1"), App("c2")
    e1 = TheoryExtension(functions=(("c1", (), "A"),))
    e2 = TheoryExtension(functions=(("c2", (), "A"),))
    q = Sequent((), TRUE, Eq(mul(c1, c2), App("one")))
    return LocalicGlueSpec(t0, ((1, e1), (2, e2)), (((1, 2), inv(c1)), ((2, 1), inv(c2))),
                           (((1, 2), (q,)),))


def projective_line_target(K: PresentedRing = None, flavor: str = "economical") -> Theory:
    """The stated axiom list of T_{P^1_K}, written out directly."""
    t = local_algebra_base(K, flavor)
    x, x2, y = Var("x", "A"), Var("x'", "A"), Var("y", "A")
    x1v, x2v = Var("x1", "A"), Var("x2", "A")
    r = {1: "R_c1", 2: "R_c2"}
    axioms = []
    for i in (1, 2):
        axioms.append(Sequent((x, x2), And((RelAtom(r[i], (x,)), RelAtom(r[i], (x2,)))), Eq(x, x2)))
    axioms.append(Sequent((), TRUE, Or((Exists(x, RelAtom(r[1], (x,))), Exists(x, RelAtom(r[2], (x,)))))))
    axioms.append(Sequent((x1v, x2v), And((RelAtom(r[1], (x1v,)), RelAtom(r[2], (x2v,)))),
                          Eq(mul(x1v, x2v), App("one"))))
    for i, k in ((1, 2), (2, 1)):
        axioms.append(Sequent((x,), And((RelAtom(r[i], (x,)), inv(x))), Exists(y, RelAtom(r[k], (y,)))))
    ext = TheoryExtension(relations=(("R_c1", ("A",)), ("R_c2", ("A",))), axioms=tuple(axioms))
    return normalize(extend(t, ext))
