from collections import deque
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.automaton import Configuration, Pdt, Pop, Ppdt, Push, Swap, normalize, successors
from artifact.errors import EmptyLanguage
from artifact.lifting import lift
from artifact.properties import (
    Liveness,
    check_cpp,
    check_mass_bound,
    check_spp,
    is_reduced_pdt,
    leadsto_relation,
    pop_targets,
    trim_pdt,
)
from artifact.strategies import DottedRule, construct
from grammars import ALL_KINDS, G_FOOTNOTE, G_LR, G_WR, SPP_KINDS, dag_pcfgs


def _leadsto_oracle(pdt: Pdt, max_steps: int) -> set:
    """Pairs found by running every one-symbol stack without dipping below height 1."""
    pairs = set()
    for y in pdt.stack_symbols:
        seen = {(y,)}
        todo = deque([((y,), 0)])
        while todo:
            stack, n = todo.popleft()
            if len(stack) == 1:
                pairs.add((y, stack[0]))
            if n == max_steps:
                continue
            for _, nxt in successors(pdt, Configuration(stack, 0, ()), None):
                if nxt.stack and nxt.stack not in seen and len(nxt.stack) <= 6:
                    seen.add(nxt.stack)
                    todo.append((nxt.stack, n + 1))
    return pairs


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_leadsto_matches_replay(kind):
    pdt = construct(kind, G_LR.cfg)
    rel = leadsto_relation(pdt)
    assert rel.pairs == _leadsto_oracle(pdt, 60)


def test_leadsto_reflexive():
    pdt = construct("plr", G_WR.cfg)
    rel = leadsto_relation(pdt)
    assert all((y, y) in rel for y in pdt.stack_symbols)


def test_leadsto_td_dotted_rules():
    pdt = construct("top_down", G_LR.cfg)
    rel = leadsto_relation(pdt)
    for r in G_LR.cfg.rules:
        assert (DottedRule(r, 0), DottedRule(r, len(r.rhs))) in rel


def test_leadsto_lr0_shift_targets():
    pdt = construct("lr0", G_LR.cfg)
    rel = leadsto_relation(pdt)
    q = next(s for s in pdt.stack_symbols if str(s) == "{C→x•c, D→x•d}")
    for push in pdt.push_by[q]:
        (scan,) = pdt.swap_by[push.Y]
        # the pushed intermediate symbol reaches the goto state by one swap
        assert (push.Y, scan.Y) in rel
        assert str(scan.Y) in ("{C→x c•}", "{D→x d•}")


@pytest.mark.parametrize("kind", SPP_KINDS)
@pytest.mark.parametrize("g", [G_LR.cfg, G_WR.cfg, G_FOOTNOTE], ids=["G_LR", "G_WR", "G_footnote"])
def test_predictive_kinds_have_cpp_and_spp(kind, g):
    pdt = construct(kind, g)
    assert check_cpp(pdt)
    assert check_spp(pdt)
    assert is_reduced_pdt(pdt)


@pytest.mark.parametrize("kind", ["elr", "lr0"])
def test_lr_kinds_lack_spp(kind):
    pdt = construct(kind, G_LR.cfg)
    assert check_cpp(pdt)
    v = check_spp(pdt)
    assert not v and v.violations
    push, p1, p2 = v.violations[0]
    assert p1.Z != p2.Z and p1.Y == p2.Y == push.X


def test_elr_violation_on_shared_prefix_item():
    pdt = construct("elr", G_LR.cfg)
    pushes = {str(push.X) for push, _, _ in check_spp(pdt).violations}
    assert any("x" in s for s in pushes)


def _hand_automaton() -> Pdt:
    # init pushes A; A reads b into dead C, or reads a into D which pops to final
    return normalize(
        [Push("I", "A"), Swap("A", "b", (), "C"), Swap("A", "a", (), "D"), Pop("I", "D", "F")], "I", "F"
    )


def test_cpp_dead_witness():
    pdt = _hand_automaton()
    v = check_cpp(pdt)
    assert not v and not v.search_exhausted
    c = v.witness.computation
    assert len(c) == 2 and c.input == ("b",)
    live = Liveness(pdt, leadsto_relation(pdt))
    assert not live.live(c.final.stack)
    assert all(live.live(conf.stack) for conf in c.trace[:-1])


def test_cpp_search_exhausted_keeps_verdict():
    v = check_cpp(_hand_automaton(), bound=1)
    assert not v and v.witness is None and v.search_exhausted


def test_reduced_cases():
    assert is_reduced_pdt(construct("top_down", G_LR.cfg))
    pdt = _hand_automaton()
    v = is_reduced_pdt(pdt)
    assert not v and {t.id for t in v.unused} == {1}
    trimmed = trim_pdt(pdt)
    assert is_reduced_pdt(trimmed) and check_cpp(trimmed)


def test_unreduced_push_listed():
    pdt = normalize([Swap("I", "a", (), "F"), Swap("I", "b", (), "G"), Push("G", "H")], "I", "F")
    v = is_reduced_pdt(pdt)
    assert not v and any(isinstance(t, Push) for t in v.unused)
    assert len(trim_pdt(pdt).transitions) == 1


def test_trim_empty_language():
    with pytest.raises(EmptyLanguage):
        trim_pdt(normalize([Push("I", "A")], "I", "F"))


def test_mass_bound_examples():
    r = check_mass_bound(lift(G_LR, "top_down"), 30)
    assert r.total == 1 and r.complete == 4 and r.dead == 0
    assert check_mass_bound(lift(G_LR, "top_down"), 0).total == 0
    pdt = _hand_automaton()
    half = Ppdt(pdt, {t.id: (F(1, 2) if t.X == "A" else F(1)) for t in pdt.transitions})
    r = check_mass_bound(half, 10)
    assert r.total == 1 and r.dead == 1 and r.bounded


def test_unreachable_final_mass():
    pdt = normalize([Push("I", "A"), Swap("A", "a", (), "B"), Swap("A", "b", (), "B"), Pop("I", "Z", "F")], "I", "F")
    ppdt = Ppdt(pdt, {t.id: (F(1, 2) if t.X == "A" else F(1)) for t in pdt.transitions})
    r = check_mass_bound(ppdt, 10)
    assert r.total <= 1 and r.complete == 0


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(SPP_KINDS), dag_pcfgs)
def test_spp_implies_single_pop_target(kind, g):
    pdt = construct(kind, g.cfg)
    assert check_spp(pdt)
    rel = leadsto_relation(pdt)
    for t in pdt.transitions:
        if isinstance(t, Push):
            assert len(pop_targets(pdt, t, rel)) == 1


@pytest.mark.parametrize("kind", SPP_KINDS)
def test_cpp_enumeration_stays_live(kind):
    pdt = construct(kind, G_WR.cfg)
    live = Liveness(pdt, leadsto_relation(pdt))
    todo = deque([((pdt.x_init,), 0)])
    while todo:
        stack, n = todo.popleft()
        assert live.live(stack)
        if n < 12:
            for _, nxt in successors(pdt, Configuration(stack, 0, ()), None):
                todo.append((nxt.stack, n + 1))
