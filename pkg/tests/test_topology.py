from dataclasses import replace

import pytest

from geoglue.semantics import _Evaluator
from geoglue.syntax import FALSE, TRUE, Sequent, Var
from geoglue.topology import (
    TopologyError, _function_models, brute_force_cosieve, chain_family, chain_model,
    cosieve_generators, function_from_map, function_model, has_proper_covering_cosieve,
    identity, irreducible, pointed_set_family, pointed_set_model, pushforward_table,
    rigidity_run, surjective_function_family,
)

SURJ = surjective_function_family()
(AXIOM,) = SURJ.quotient
NO_B = Sequent((Var("y", "B"),), TRUE, FALSE)


def instances(M, axiom):
    ev = _Evaluator(M)
    return [v for v in ev.tuples(axiom.context, "*") if ev.holds(axiom.antecedent, dict(zip(axiom.context, v)), "*")]


def agrees(plugin, M, axiom, values, bound):
    cos = cosieve_generators(plugin, M, axiom, values, bound)
    table = brute_force_cosieve(plugin, M, axiom, values, bound)
    return all(cos.contains(h) == member for h, member in table)


# cosieves

def test_point_without_preimage():
    M = function_model(0, (0,))
    cos = cosieve_generators(SURJ, M, AXIOM, (0,))
    (g,) = cos.generators
    assert g.target == function_model(1, (1,))
    assert agrees(SURJ, M, AXIOM, (0,), 3)


def test_negated_axiom_gives_empty_cosieve():
    M = function_model(1, (1,))
    cos = cosieve_generators(SURJ, M, NO_B, (0,))
    assert cos.is_empty
    assert not any(member for _, member in brute_force_cosieve(SURJ, M, NO_B, (0,), 2))


def test_satisfied_instance_gives_maximal_cosieve():
    M = function_model(2, (1, 1))
    cos = cosieve_generators(SURJ, M, AXIOM, (1,))
    assert cos.generators == (identity(M),) and cos.is_maximal()


def test_instance_must_satisfy_antecedent():
    with pytest.raises(TopologyError):
        cosieve_generators(SURJ, function_model(1, (1,)), AXIOM, (5,))


def test_true_consequent_all_members():
    top = Sequent((Var("y", "B"),), TRUE, TRUE)
    table = brute_force_cosieve(SURJ, function_model(1, (1,)), top, (0,), 2)
    assert table and all(member for _, member in table)


def test_arrows_out_of_the_empty_model():
    table = brute_force_cosieve(SURJ, function_model(0, ()), Sequent((), TRUE, TRUE), (), 2)
    # exactly one arrow to every model within the bound
    assert len(table) == len(_function_models(2))


@pytest.mark.parametrize("M", _function_models(2), ids=lambda M: str(M.sizes()))
def test_generators_match_brute_force(M):
    for vals in instances(M, AXIOM):
        assert agrees(SURJ, M, AXIOM, vals, 3)


@pytest.mark.parametrize("M", _function_models(2), ids=lambda M: str(M.sizes()))
def test_brute_force_generators_without_universal(M):
    plain = replace(SURJ, universal=None)
    for vals in instances(M, AXIOM):
        assert agrees(plain, M, AXIOM, vals, 2)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pointed_sets(n):
    plugin = pointed_set_family()
    (ax,) = plugin.quotient
    M = pointed_set_model(n)
    for vals in instances(M, ax):
        assert agrees(plugin, M, ax, vals, 3)


def test_pullback_stability():
    models = _function_models(2)
    for M in models:
        for vals in instances(M, AXIOM):
            for N in models:
                for g in SURJ.homs(M, N):
                    moved = (g.image("B", vals[0]),)
                    lhs = [member for _, member in pushforward_table(SURJ, g, AXIOM, vals, 2)]
                    rhs = [member for _, member in brute_force_cosieve(SURJ, N, AXIOM, moved, 2)]
                    assert lhs == rhs


# rigidity

def test_missing_preimage_repaired_in_one_step():
    M = function_from_map({0: 0}, 2)
    trace = rigidity_run(SURJ, M, 4)
    assert trace.steps() == 1 and not trace.exhausted
    (leaf,) = trace.leaves()
    assert irreducible(SURJ, leaf.model)
    assert sorted(leaf.model.functions["f"]["*"].values()) == [0, 1]


def test_satisfied_model_has_empty_trace():
    trace = rigidity_run(SURJ, function_model(2, (1, 1)), 4)
    assert trace.steps() == 0 and trace.leaves()[0].model == function_model(2, (1, 1))


def test_report_is_deterministic():
    M = function_model(0, (0, 0))
    a = rigidity_run(SURJ, M, 4).report(SURJ)
    assert a == rigidity_run(SURJ, M, 4).report(SURJ)
    assert a.endswith("status: covered, steps: 2")


def test_truncated_chain_singletons_already_covered():
    M = chain_model((1, 1, 1, 1), ((0,), (0,), (0,)))
    for mode in ("even", "odd", "all"):
        trace = rigidity_run(chain_family(4, mode), M, 8)
        assert not trace.exhausted and trace.steps() == 0


def test_truncated_chain_cascade():
    # a missing preimage at the bottom propagates up the three maps
    plugin = chain_family(4, "all")
    M = chain_model((2, 1, 1, 1), ((0,), (0,), (0,)))
    trace = rigidity_run(plugin, M, 8)
    assert not trace.exhausted and trace.steps() == 3
    assert rigidity_run(plugin, M, 2).exhausted


@pytest.mark.parametrize("M", _function_models(2), ids=lambda M: str(M.sizes()))
def test_irreducible_iff_no_proper_cover(M):
    assert irreducible(SURJ, M) == (not has_proper_covering_cosieve(SURJ, M, 2))


def test_irreducible_examples():
    assert irreducible(SURJ, function_model(1, (1,)))
    assert not irreducible(SURJ, function_model(0, (0,)))
