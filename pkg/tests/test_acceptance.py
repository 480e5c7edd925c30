"""One test per acceptance criterion; each prints a single PASS/FAIL line."""
import os
import random
import subprocess
import sys
import time
from fractions import Fraction
from math import ceil
from pathlib import Path

from geoglue.extensions import TheoryExtension, add_sum, conditional, extend
from geoglue.gluing import (
    CrystallineChart, CrystallineCoverSpec, ZariskiCoverSpec, affine_crystalline_target,
    affine_zariski_target, constant_witnesses, crystalline_witnesses, eliminate_props,
    glue_crystalline, glue_localic, glue_zariski, projective_line_localic, projective_line_target,
    zariski_witnesses,
)
from geoglue.library import ZZ, loc, poly_ring, ring_theory, zmod
from geoglue.pdrings import (
    BasePD, PDMonomial, TruncatedPDAlgebra, check_pd_axioms, gamma, modular_pd_data, nil_bound,
    nil_coefficient, nil_witness, universal_nil_index,
)
from geoglue.semantics import (
    FinitePoset, check_theory, conditional_model_roundtrip, ring_functor_model, truth_upset,
    zmod_ring_model,
)
from geoglue.syntax import FALSE, TRUE, Sequent, Var, normalize, theory_text
from geoglue.topology import (
    _Evaluator, _function_models, brute_force_cosieve, cosieve_generators, has_proper_covering_cosieve,
    irreducible, rigidity_run, surjective_function_family,
)

from corpus import (
    CONDITIONS, LAW_INSTANCES, MODEL_EXTENSIONS, Q, RING_CONDITIONS, RING_EXTENSIONS, SUM_INSTANCES,
    posets, proposition_models, ring_models,
)

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"

# pinned limits
GOLDEN_SECONDS = 1.0
ROUNDTRIP_SECONDS = 60.0
NIL_SECONDS = 10.0


def verdict(label, ok, detail):
    print(f"{label}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def test_ac1_projective_line_golden():
    t = time.perf_counter()
    spec = projective_line_localic()
    text = theory_text(eliminate_props(glue_localic(spec), constant_witnesses(spec)))
    dt = time.perf_counter() - t
    golden = (DATA / "golden/t_p1.theory").read_text()
    ok = text == golden == theory_text(projective_line_target()) and dt < GOLDEN_SECONDS
    verdict("AC1 projective line golden", ok, f"{len(text.splitlines())} lines, {dt:.3f}s")


def test_ac2_affine_zariski_degeneration():
    t = time.perf_counter()
    bad = []
    for K in (ZZ, zmod(4), poly_ring("X")):
        spec = ZariskiCoverSpec(((0, K),))
        out = eliminate_props(glue_zariski(spec), zariski_witnesses(spec))
        if theory_text(out) != theory_text(affine_zariski_target(K)):
            bad.append(str(K))
    golden = (DATA / "golden/affine_z4.theory").read_text()
    z4 = ZariskiCoverSpec(((0, zmod(4)),))
    same_golden = theory_text(eliminate_props(glue_zariski(z4), zariski_witnesses(z4))) == golden
    dt = time.perf_counter() - t
    verdict("AC2 affine Zariski chart", not bad and same_golden and dt < GOLDEN_SECONDS,
            f"mismatches {bad}, golden {same_golden}, {dt:.3f}s")


def test_ac3_affine_crystalline_degeneration():
    t = time.perf_counter()
    chart = CrystallineChart(modular_pd_data(4, 2), zmod(2))
    spec = CrystallineCoverSpec(((0, chart),))
    text = theory_text(eliminate_props(glue_crystalline(spec), crystalline_witnesses(spec)))
    dt = time.perf_counter() - t
    ok = (text == theory_text(affine_crystalline_target(chart))
          == (DATA / "golden/cris_z4.theory").read_text()) and dt < GOLDEN_SECONDS
    verdict("AC3 affine crystalline chart", ok, f"{len(text.splitlines())} lines, {dt:.3f}s")


def test_ac4_conditional_extension_laws():
    fails = []
    for name, base, phi, e in LAW_INSTANCES:
        fact = Sequent((), TRUE, phi)
        assert_phi = TheoryExtension(axioms=(fact,))
        lhs = normalize(extend(extend(base, conditional(e, phi)), assert_phi))
        rhs = normalize(extend(extend(base, assert_phi), e))
        if lhs != rhs:
            fails.append(f"(i) {name}")
    for name, base, phi, e1, e2 in SUM_INSTANCES:
        lhs = normalize(extend(base, conditional(add_sum(e1, e2), phi)))
        rhs = normalize(extend(base, add_sum(conditional(e1, phi), conditional(e2, phi))))
        if lhs != rhs:
            fails.append(f"(ii) {name}")
    n = len(LAW_INSTANCES) + len(SUM_INSTANCES)
    p1 = sum(1 for name, *_ in LAW_INSTANCES if name.startswith("p1-"))
    verdict("AC4 conditional-extension laws", n >= 20 and p1 >= 5 and not fails,
            f"{n} instances ({p1} from the projective line), failures {fails}")


def test_ac5_conditional_model_correspondence():
    t = time.perf_counter()
    count, fails = 0, []
    for pname, P in posets().items():
        # sort sizes up to 3 on posets with at most 3 points, up to 2 on 4 points
        bound = 3 if len(P.elements) <= 3 else 2
        seen = set()
        for M in proposition_models(P):
            for cname, phi in CONDITIONS.items():
                key = (truth_upset(M, phi).points, truth_upset(M, Q).points)
                if key in seen:
                    continue
                seen.add(key)
                for ename, E in MODEL_EXTENSIONS.items():
                    r = conditional_model_roundtrip(M, phi, E, bound)
                    count += 1
                    if not r.ok:
                        fails.append((pname, cname, ename))
    for mname, M in ring_models().items():
        for cname, phi in RING_CONDITIONS.items():
            for ename, E in RING_EXTENSIONS.items():
                r = conditional_model_roundtrip(M, phi, E, 3)
                count += 1
                if not r.ok:
                    fails.append((mname, cname, ename))
    dt = time.perf_counter() - t
    verdict("AC5 conditional-model correspondence", not fails and dt < ROUNDTRIP_SECONDS,
            f"{count} instances, failures {fails[:3]}, {dt:.1f}s")


def _random_two_point_rings(n, seed=7):
    rng = random.Random(seed)
    sierpinski = FinitePoset.make((0, 1), [(0, 1)])
    discrete = FinitePoset.make((0, 1))
    out = []
    while len(out) < n:
        m0 = rng.randint(1, 12)
        if rng.random() < 0.5:
            m1 = rng.choice([d for d in range(1, m0 + 1) if m0 % d == 0])
            out.append(((0, m0, m1), ring_functor_model(sierpinski, {0: m0, 1: m1})))
        else:
            m1 = rng.randint(1, 12)
            out.append(((1, m0, m1), ring_functor_model(discrete, {0: m0, 1: m1})))
    return out


def _is_local(m):
    # Z/m is local iff m is a prime power
    p = next(d for d in range(2, m + 1) if m % d == 0)
    while m % p == 0:
        m //= p
    return m == 1


def test_ac6_loc_axiomatizations_agree():
    finite = extend(ring_theory(), loc("finite"))
    schematic = extend(ring_theory(), loc("schematic"))
    disagree = []
    for m in range(2, 13):
        M = zmod_ring_model(m)
        a, b = check_theory(M, finite).holds, check_theory(M, schematic).holds
        if not a == b == _is_local(m):
            disagree.append(f"Z/{m}")
    for key, M in _random_two_point_rings(100):
        if check_theory(M, finite).holds != check_theory(M, schematic).holds:
            disagree.append(key)
    z6 = check_theory(zmod_ring_model(6), finite)
    witness = dict(z6.assignment)
    ok = (not disagree and check_theory(zmod_ring_model(4), finite).holds
          and not z6.holds and list(witness.values()) == [3])
    verdict("AC6 loc axiomatizations", ok, f"disagreements {disagree}, Z/6 witness {witness}")


def _qq_samples(rng, alg, k):
    d = alg.degree
    out = []
    for _ in range(k):
        terms = []
        for _ in range(rng.randint(1, 3)):
            mono = PDMonomial((rng.randint(0, d), rng.randint(0, d)), (rng.randint(0, 2),))
            terms.append((mono, Fraction(rng.randint(-4, 4), rng.randint(1, 3))))
        out.append(alg.element(terms))
    return out


def test_ac7_pd_axiom_suite():
    z4 = check_pd_axioms(modular_pd_data(4, 2), range(4))
    rng = random.Random(11)
    checked, failures = 0, []
    for d in range(1, 7):
        alg = TruncatedPDAlgebra(BasePD("QQ", (1,)), ("X", "Z"), ("Y",), d)
        # 84 + 84 + 83 * 4 = 500 elements
        samples = _qq_samples(rng, alg, 84 if d <= 2 else 83)
        for i in range(0, len(samples), 12):
            report = check_pd_axioms(alg, samples[i:i + 12])
            failures += report.failures
        checked += len(samples)
    A = TruncatedPDAlgebra(BasePD("QQ", (1,)), ("X",), (), 6)
    X = A.x("X")
    exact = gamma(2, A.x("X", 2)) == 3 * A.x("X", 4) and X * X == 2 * A.x("X", 2)
    ok = z4.ok and checked == 500 and not failures and exact
    verdict("AC7 PD axiom suite", ok,
            f"Z/4 {z4.describe().splitlines()[0]}, {checked} QQ elements, {len(failures)} failures")


def test_ac8_nilpotence_bound():
    t = time.perf_counter()
    bad = []
    F2 = TruncatedPDAlgebra(BasePD("ZZ/2"), ("X",), (), 30)
    for n in range(1, 6):
        for e in range(1, 6):
            k = universal_nil_index(n, e)
            b = nil_bound(n, e)
            if k > b or b != ceil(e / n) * (n + 1) or nil_coefficient(n, e, b).denominator != 1:
                bad.append((n, e, k, b))
    w = nil_witness(F2.x("X"), 2, 2)
    dt = time.perf_counter() - t
    verdict("AC8 nilpotence bound", not bad and w.k <= w.bound and dt < NIL_SECONDS,
            f"violations {bad}, {dt:.2f}s")


SURJ = surjective_function_family()
(AXIOM,) = SURJ.quotient
NO_B = Sequent((Var("y", "B"),), TRUE, FALSE)


def _instances(M, axiom):
    ev = _Evaluator(M)
    return [v for v in ev.tuples(axiom.context, "*")
            if ev.holds(axiom.antecedent, dict(zip(axiom.context, v)), "*")]


def test_ac9_induced_topology():
    arrows, mismatches, other = 0, 0, []
    for M in _function_models(3):
        for vals in _instances(M, AXIOM):
            cos = cosieve_generators(SURJ, M, AXIOM, vals, 3)
            for h, member in brute_force_cosieve(SURJ, M, AXIOM, vals, 3):
                arrows += 1
                mismatches += cos.contains(h) != member
            satisfied = vals[0] in M.functions["f"]["*"].values()
            if satisfied and not cos.is_maximal():
                other.append(("not maximal", M.sizes(), vals))
            if not cosieve_generators(SURJ, M, NO_B, vals, 3).is_empty:
                other.append(("not empty", M.sizes(), vals))
    verdict("AC9 induced topology", mismatches == 0 and not other,
            f"{arrows} arrows, {mismatches} mismatches, {other[:3]}")


def test_ac10_rigidity():
    bad = []
    models = _function_models(3)
    for M in models:
        trace = rigidity_run(SURJ, M, 12)
        if trace.exhausted or not all(irreducible(SURJ, leaf.model) for leaf in trace.leaves()):
            bad.append(("run", M.sizes()))
        f = M.functions["f"]["*"]
        surjective = set(f.values()) == set(M.sorts["B"]["*"])
        if not irreducible(SURJ, M) == surjective == (not has_proper_covering_cosieve(SURJ, M, 3)):
            bad.append(("irreducible", M.sizes()))
    verdict("AC10 rigidity", not bad, f"{len(models)} models, problems {bad[:3]}")


PIPELINE = """
import io, sys
from geoglue.cli import run
for argv in [["glue", "localic", "data/specs/p1.spec"], ["glue", "zariski", "data/specs/p1_zariski.spec"],
             ["glue", "zariski", "data/specs/affine_z4.spec"], ["glue", "cris", "data/specs/cris_z4.spec"],
             ["model", "check", "data/models/z6.model", "data/theories/localring.theory"],
             ["model", "enum-ext", "data/models/empty.model", "data/exts/point.ext"],
             ["pd", "axioms", "--base", "ZZ/4", "--ideal", "2"],
             ["topo", "rigidity", "surjective-function", "data/models/fun_0_1.model"]]:
    out = io.StringIO()
    status = run(argv, out, io.StringIO())
    sys.stdout.write(f"== {' '.join(argv)} -> {status}\\n{out.getvalue()}")
"""


def _pipeline(hash_seed):
    env = {**os.environ, "PYTHONHASHSEED": str(hash_seed)}
    return subprocess.run([sys.executable, "-c", PIPELINE], cwd=ROOT, env=env,
                          capture_output=True, check=True).stdout


def test_ac11_determinism():
    a, b = _pipeline(1), _pipeline(2)
    verdict("AC11 determinism", a == b and len(a) > 0, f"{len(a)} bytes, identical {a == b}")
