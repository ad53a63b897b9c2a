import warnings
from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.automaton import Pop, Ppdt, Push, Swap, complete_computations, computation_probability, normalize
from artifact.errors import NotVerifiedConsistent, ScanUniformityViolation
from artifact.grammar import string_probability_cfg
from artifact.lifting import lift
from artifact.prefix import (
    BOTTOM,
    check_scan_uniformity,
    derive_items,
    forward,
    item_table,
    prefix_probability,
    string_probability_ppdt,
)
from grammars import G_LR, G_WR, SPP_KINDS, dag_pcfgs, w

WR_EPS = lift(G_WR, "eps_left_corner")


def geometric_prefix(k: int, last: str | None = None) -> F:
    """Mass of G_WR strings starting with a^k (then ``last`` if given)."""
    b, c = F(1, 2) * F(1, 3) ** k, F(1, 2) * F(2, 3) ** k
    if last is None:
        return b + c
    return b * F(2, 3) if last == "b" else c * F(1, 3)


def test_initial_item_always_present():
    for s in [(), w("b"), w("x")]:
        assert forward(BOTTOM, WR_EPS.pdt.x_init, 0, 0) in derive_items(WR_EPS, s)


def test_final_item_presence():
    final = WR_EPS.pdt.x_final
    assert forward(BOTTOM, final, 0, 1) in derive_items(WR_EPS, w("b"))
    assert forward(BOTTOM, final, 0, 1) not in derive_items(WR_EPS, w("x"))


def test_string_probabilities_eps_lc():
    assert string_probability_ppdt(WR_EPS, w("b")) == F(1, 3)
    assert string_probability_ppdt(WR_EPS, w("c")) == F(1, 6)
    assert string_probability_ppdt(WR_EPS, w("aab")) == F(1, 27)
    assert string_probability_ppdt(WR_EPS, w("x")) == 0
    assert string_probability_ppdt(WR_EPS, w("ba")) == 0


def test_string_probability_td_glr():
    assert string_probability_ppdt(lift(G_LR, "top_down"), w("axdbxc")) == F(4, 9)


def test_single_derivation_item_is_product():
    ppdt = lift(G_LR, "top_down")
    ((c,), _) = complete_computations(ppdt, w("axcbxd"), 60)
    table = item_table(ppdt, w("axcbxd"))
    assert table.exact
    assert table.value(forward(BOTTOM, ppdt.pdt.x_final, 0, 6)) == computation_probability(ppdt, c)


def test_prefix_examples():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert prefix_probability(WR_EPS, w("a")) == F(1, 2)
        assert prefix_probability(WR_EPS, ()) == 1
        assert prefix_probability(WR_EPS, w("ab")) == F(1, 9)
        assert prefix_probability(WR_EPS, w("aa")) == F(5, 18)
        assert prefix_probability(lift(G_LR, "top_down"), w("ax")) == 1


@pytest.mark.parametrize("k", range(0, 6))
def test_prefix_geometric_oracle(k):
    s = ("a",) * k
    assert prefix_probability(WR_EPS, s, True) == pytest.approx(float(geometric_prefix(k)), abs=1e-12)
    for last in "bc":
        assert prefix_probability(WR_EPS, s + (last,), True) == pytest.approx(
            float(geometric_prefix(k, last)), abs=1e-12
        )


@pytest.mark.parametrize("kind", SPP_KINDS)
def test_prefix_all_kinds_agree(kind):
    ppdt = lift(G_WR, kind)
    for s in [(), w("a"), w("aa"), w("ab"), w("ac"), w("aac")]:
        assert float(prefix_probability(ppdt, s, True)) == pytest.approx(float(prefix_probability(WR_EPS, s, True)), abs=1e-9)


def test_prefix_monotone_and_bounds():
    strings = [tuple(s) for k in range(4) for s in product("abc", repeat=k)]
    for s in strings:
        p = prefix_probability(WR_EPS, s, True)
        assert 0 <= p <= 1
        assert p >= string_probability_ppdt(WR_EPS, s)
        for a in "abc":
            assert prefix_probability(WR_EPS, s + (a,), True) <= p


def test_prefix_unverified_warning():
    with pytest.warns(NotVerifiedConsistent):
        prefix_probability(WR_EPS, w("a"), consistent=False)


def test_prefix_inconsistent_warning():
    # half of the mass runs into a dead end after reading b
    pdt = normalize([Push("I", "A"), Swap("A", "b", (), "C"), Swap("A", "a", (), "D"), Pop("I", "D", "F")], "I", "F")
    ppdt = Ppdt(pdt, {t.id: (F(1, 2) if t.X == "A" else F(1)) for t in pdt.transitions})
    with pytest.warns(NotVerifiedConsistent, match="1/2"):
        assert prefix_probability(ppdt, w("a")) == F(1, 2)


def test_scan_uniformity():
    for kind in SPP_KINDS:
        assert check_scan_uniformity(lift(G_WR, kind))
    mixed = normalize([Swap("I", None, (), "F"), Swap("I", "a", (), "F")], "I", "F")
    v = check_scan_uniformity(mixed)
    assert not v and v.mixed == ("I",)
    with pytest.raises(ScanUniformityViolation):
        prefix_probability(Ppdt(mixed, {0: F(1, 2), 1: F(1, 2)}), (), True)
    assert check_scan_uniformity(normalize([], "I", "I"))


@settings(max_examples=30, deadline=None)
@given(dag_pcfgs, st.lists(st.sampled_from("abc"), max_size=4))
def test_oracle_equivalence_random(g, s):
    ppdt = lift(g, "eps_left_corner")
    table = item_table(ppdt, s)
    assert table.exact
    v = table.value(forward(BOTTOM, ppdt.pdt.x_final, 0, len(s)))
    comps, truncated = complete_computations(ppdt, s, ppdt.pdt.size * (len(s) + 1) * 2)
    assert not truncated
    assert v == sum((computation_probability(ppdt, c) for c in comps), F(0)) == string_probability_cfg(g, s)


@settings(max_examples=20, deadline=None)
@given(dag_pcfgs, st.lists(st.sampled_from("abc"), max_size=3))
def test_prefix_random_oracle(g, s):
    from artifact.grammar import enumerate_derivations

    ppdt = lift(g, "eps_left_corner")
    s = tuple(s)
    expected = sum(
        (g.derivation_probability(d) for d, y in enumerate_derivations(g.cfg, 80) if y[: len(s)] == s), F(0)
    )
    assert prefix_probability(ppdt, s, True) == expected
