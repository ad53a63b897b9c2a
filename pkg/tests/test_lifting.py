from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.automaton import (
    Ppdt,
    Push,
    Swap,
    complete_computations,
    computation_probability,
    input_free_computations,
    normalize,
    project,
)
from artifact.errors import AmbiguousProbe, SppRequired
from artifact.grammar import enumerate_derivations, is_consistent, string_probability_cfg
from artifact.lifting import (
    StackNT,
    feasibility_analysis,
    grid_search,
    lift,
    pdt_to_weighted_cfg,
    ppda_to_pcfg,
)
from artifact.strategies import construct, map_output
from grammars import G_LR, G_ONE, G_WR, SPP_KINDS, dag_pcfgs, w

PROBES = [w("axcbxd"), w("axdbxc")]


def _strings(n):
    return [tuple(s) for k in range(n + 1) for s in product("abc", repeat=k)]


def test_weighted_cfg_of_single_swap():
    pdt = normalize([Swap("I", "a", (), "F")], "I", "F")
    g = pdt_to_weighted_cfg(pdt)
    assert {(r.lhs, r.rhs) for r in g.rules} == {
        (StackNT("I"), ("a", StackNT("F"))),
        (StackNT("F"), ()),
    }


def test_weighted_cfg_bijection_td_glr():
    pdt = construct("top_down", G_LR.cfg)
    g = pdt_to_weighted_cfg(pdt).to_cfg()
    n_der = sum(1 for _, y in enumerate_derivations(g, 80) if y == w("axcbxd"))
    n_comp = len(complete_computations(pdt, w("axcbxd"), 80)[0])
    assert n_der == n_comp == 1


def test_weighted_cfg_needs_spp():
    with pytest.raises(SppRequired) as e:
        pdt_to_weighted_cfg(construct("lr0", G_LR.cfg))
    assert e.value.operation == "pdt_to_weighted_cfg"


@pytest.mark.parametrize("kind", ["lr0", "elr"])
def test_lift_needs_spp(kind):
    with pytest.raises(SppRequired):
        lift(G_LR, kind)


def test_lift_td_glr():
    ppdt = lift(G_LR, "top_down")
    assert ppdt.is_proper()
    for t in ppdt.pdt.transitions:
        # the rule choice sits on the push into the symbol whose swap emits the rule
        emitted = ()
        if isinstance(t, Push):
            emitted = project(y for s in ppdt.pdt.swap_by.get(t.Y, ()) for y in s.y)
        expected = G_LR.prob.get(emitted[0], 1) if emitted else 1
        assert ppdt.p(t) == expected
    ((c,), _) = complete_computations(ppdt, w("axcbxd"), 60)
    assert computation_probability(ppdt, c) == F(1, 9)


@pytest.mark.parametrize("kind", SPP_KINDS)
def test_lift_preserves_derivation_probability(kind):
    ppdt = lift(G_LR, kind)
    assert ppdt.is_proper()
    comps = list(input_free_computations(ppdt.pdt, 200))
    assert len(comps) == 4
    for c in comps:
        d = map_output(kind, c.output, G_LR.cfg)
        assert computation_probability(ppdt, c) == G_LR.derivation_probability(d)


@pytest.mark.parametrize("kind", SPP_KINDS)
def test_lift_gwr_strings(kind):
    ppdt = lift(G_WR, kind)
    assert ppdt.is_proper(1e-9)
    for s in _strings(4):
        total = sum(
            (computation_probability(ppdt, c) for c in complete_computations(ppdt, s, 200)[0]), F(0)
        )
        assert total == pytest.approx(float(string_probability_cfg(G_WR, s)), abs=1e-9)


def test_lift_one_rule():
    ppdt = lift(G_ONE, "top_down")
    assert all(ppdt.p(t) == 1 for t in ppdt.pdt.transitions)


def test_ppda_to_pcfg_round_trip():
    back = ppda_to_pcfg(lift(G_LR, "top_down"))
    assert back.is_proper()
    for s in [w("axcbxc"), w("axcbxd"), w("axdbxc"), w("axdbxd")]:
        assert string_probability_cfg(back, s) == string_probability_cfg(G_LR, s)
    c = is_consistent(back)
    assert c and c.z_start == 1


def test_ppda_to_pcfg_one_transition():
    pdt = normalize([Swap("I", "a", (), "F")], "I", "F")
    g = ppda_to_pcfg(Ppdt(pdt, {0: F(1)}))
    assert all(p == 1 for p in g.prob.values())
    assert string_probability_cfg(g, ("a",)) == 1


def test_ppda_to_pcfg_lc_gwr_consistent():
    g = ppda_to_pcfg(lift(G_WR, "left_corner"))
    c = is_consistent(g, 1e-9)
    assert c and c.z_start == pytest.approx(1, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(SPP_KINDS), dag_pcfgs)
def test_lift_random_exact(kind, g):
    ppdt = lift(g, kind)
    assert ppdt.is_proper()
    assert all(isinstance(p, F) for p in ppdt.prob.values())
    for c in input_free_computations(ppdt.pdt, 300, 6):
        d = map_output(kind, c.output, g.cfg)
        assert computation_probability(ppdt, c) == g.derivation_probability(d)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(SPP_KINDS), dag_pcfgs)
def test_weighted_cfg_size_bound(kind, g):
    pdt = construct(kind, g.cfg)
    assert pdt_to_weighted_cfg(pdt).size <= 3 * pdt.size + len(pdt.stack_symbols)


@pytest.mark.parametrize("kind", ["lr0", "elr"])
def test_feasibility_glr_infeasible(kind):
    v = feasibility_analysis(G_LR, kind, PROBES)
    assert v.infeasible
    assert v.grammar_ratio == F(1, 4)
    assert v.automaton_ratio == "1"
    assert v.conflict[0].forced


def test_feasibility_top_down_not_refuted():
    v = feasibility_analysis(G_LR, "top_down", PROBES)
    assert v.feasible is None and not v.infeasible
    assert v.pairs[0].residual  # the rule-choice transitions remain free


def test_grid_search_confirms():
    v = feasibility_analysis(G_LR, "lr0", PROBES)
    pdt = construct("lr0", G_LR.cfg)
    targets = {s: string_probability_cfg(G_LR, s) for s in PROBES}
    r = grid_search(pdt, v.monomials, targets, F(1, 10))
    assert r.match is None and r.points > 0


def test_grid_search_finds_top_down_match():
    v = feasibility_analysis(G_LR, "top_down", PROBES)
    pdt = construct("top_down", G_LR.cfg)
    targets = {s: string_probability_cfg(G_LR, s) for s in PROBES}
    r = grid_search(pdt, v.monomials, targets, F(1, 12))
    assert r.match is not None


def test_feasibility_ambiguous_probe():
    with pytest.raises(AmbiguousProbe):
        feasibility_analysis(G_LR, "lr0", [w("axcbxd"), w("ab")])


def test_wide_sense_pairs():
    probes = [w("a" * n + s) for n in range(1, 4) for s in "bc"]
    v = feasibility_analysis(G_WR, "lr0", probes, pairs=[(0, 1), (2, 3), (4, 5)])
    assert v.infeasible
    assert [a.grammar_ratio for a in v.pairs] == [1, F(1, 2), F(1, 4)]
    assert len({a.residual for a in v.pairs}) == 1
