import io
from fractions import Fraction as F
from pathlib import Path

import pytest

from artifact import formats
from artifact.automaton import Ppdt
from artifact.cli import fmt_value, main
from artifact.errors import FormatError
from artifact.grammar import Pcfg, string_probability_cfg
from artifact.lifting import lift
from artifact.strategies import construct
from grammars import ALL_KINDS, G_LR, G_WR, SPP_KINDS, w

FIX = Path(__file__).resolve().parent.parent / "fixtures"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def test_tokenizer_quotes():
    toks = formats.tokenize("swap 'a b' / x : 'it\\'s' -> Y")
    assert [str(t) for t in toks] == ["swap", "a b", "/", "x", ":", "it's", "->", "Y"]
    assert toks[1].quoted and not toks[0].quoted


def test_probabilities():
    assert formats.parse_probability("1/3") == F(1, 3)
    assert formats.parse_probability("1") == F(1)
    assert isinstance(formats.parse_probability("0.25"), float)
    assert formats.format_probability(F(2, 3)) == "2/3"
    with pytest.raises(FormatError):
        formats.parse_probability("abc")


def test_grammar_fixture_parses_to_g_lr():
    g = formats.parse_grammar(formats.read_text(FIX / "g_lr.pcfg"))
    assert isinstance(g, Pcfg)
    assert g.prob == G_LR.prob and g.cfg.rules == G_LR.cfg.rules


@pytest.mark.parametrize("name", ["g_lr.pcfg", "g_wr.pcfg", "g_lr.cfg", "g_footnote.cfg"])
def test_grammar_round_trip(name):
    g = formats.parse_grammar(formats.read_text(FIX / name))
    text = formats.write_grammar(g)
    g2 = formats.parse_grammar(text)
    assert formats.write_grammar(g2) == text
    assert (g2.cfg if isinstance(g2, Pcfg) else g2).rules == (g.cfg if isinstance(g, Pcfg) else g).rules


def test_grammar_errors():
    with pytest.raises(FormatError):
        formats.parse_grammar("start S\nrule 1: S -> a : 1\nrule 2: S -> b\n")
    with pytest.raises(FormatError):
        formats.parse_grammar("start S\nrule 1: s -> a\n")
    with pytest.raises(FormatError):
        formats.parse_grammar("begin S\n")


def test_footnote_gets_fresh_start():
    g = formats.parse_grammar(formats.read_text(FIX / "g_footnote.cfg"))
    assert g.start_rule.rhs == ("S",)


def test_eps_and_quoted_terminals():
    g = formats.parse_grammar("start S\nrule s: S -> A 'B'\nrule a: A -> eps\n")
    assert g.rule("a").rhs == () and "B" in g.terminals


@pytest.mark.parametrize("name", ["td_glr.pdt", "glr_wr.ppdt"])
def test_automaton_fixture_round_trip(name):
    text = formats.read_text(FIX / name)
    assert formats.write_automaton(formats.parse_automaton(text)) == text


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_automaton_round_trip_all_kinds(kind):
    text = formats.write_automaton(construct(kind, G_LR.cfg))
    again = formats.write_automaton(formats.parse_automaton(text))
    assert again == text


@pytest.mark.parametrize("kind", SPP_KINDS)
def test_ppdt_round_trip_keeps_probabilities(kind):
    ppdt = lift(G_LR, kind)
    back = formats.parse_automaton(formats.write_automaton(ppdt))
    assert isinstance(back, Ppdt)
    assert sorted(back.prob.values()) == sorted(ppdt.prob.values())


def test_corpus_round_trip():
    corpus = formats.parse_corpus(formats.read_text(FIX / "g_lr.corpus"))
    assert len(corpus) == 6
    assert formats.parse_corpus(formats.write_corpus(corpus)) == corpus


def test_fmt_value():
    assert fmt_value(F(1, 3)) == "1/3"
    assert fmt_value(1 / 3) == "0.333333333333 approx"


def test_cli_analyze_lr0():
    code, out, _ = run("analyze", "--strategy", "lr0", FIX / "g_lr.pcfg", "--probe", "a x c b x d", "--probe", "a x d b x c")
    assert code == 1
    assert "grammar ratio 1/4, forced automaton ratio 1" in out


def test_cli_analyze_grid():
    code, out, _ = run("analyze", "--strategy", "elr", FIX / "g_lr.pcfg", "--probe", "a x c b x d",
                       "--probe", "a x d b x c", "--grid")
    assert code == 1 and "no matching assignment" in out


def test_cli_analyze_top_down_not_refuted():
    code, out, _ = run("analyze", "--strategy", "top_down", FIX / "g_lr.pcfg", "--probe", "a x c b x d", "--probe", "a x d b x c")
    assert code == 0 and "not refuted" in out


def test_cli_prefix_and_prob():
    code, out, err = run("prefix", FIX / "glr_wr.ppdt", "--input", "a")
    assert (code, out.strip(), err) == (0, "1/2", "")
    code, out, _ = run("prob", FIX / "glr_wr.ppdt", "--input", "a a b")
    assert (code, out.strip()) == (0, "1/27")


def test_cli_check():
    code, out, _ = run("check", "--cpp", "--spp", FIX / "td_glr.pdt")
    assert code == 0 and out.strip() == "CPP: yes, SPP: yes"


def test_cli_check_false(tmp_path):
    p = tmp_path / "lr0.pdt"
    assert run("construct", "--strategy", "lr0", FIX / "g_lr.pcfg", "-o", p)[0] == 0
    code, out, _ = run("check", "--spp", p)
    assert code == 1 and out.startswith("SPP: no")


def test_cli_check_dead(tmp_path):
    p = tmp_path / "dead.pdt"
    p.write_text("init I\nfinal F\npush I -> I A\nswap A / b : eps -> C\nswap A / a : eps -> D\npop I D -> F\n")
    code, out, _ = run("check", "--cpp", p)
    assert code == 1 and "CPP: no" in out and "dead computation" in out


def test_cli_construct_lift_prob(tmp_path):
    a = tmp_path / "wr.ppdt"
    code, out, _ = run("lift", "--strategy", "left_corner", FIX / "g_wr.pcfg", "-o", a)
    assert code == 0 and "proper: yes" in out
    code, out, _ = run("prob", a, "--input", "a c")
    assert code == 0 and out.strip() == str(string_probability_cfg(G_WR, w("ac")))


def test_cli_construct_stdout():
    code, out, _ = run("construct", "--strategy", "top_down", FIX / "g_lr.pcfg")
    assert code == 0 and out == formats.read_text(FIX / "td_glr.pdt")


def test_cli_estimate(tmp_path):
    o = tmp_path / "est.pcfg"
    code, out, _ = run("estimate", FIX / "g_lr.cfg", FIX / "g_lr.corpus", "-o", o)
    assert code == 0 and "consistent: yes" in out
    g = formats.parse_grammar(o.read_text())
    assert g.prob == G_LR.prob


def test_cli_enumerate():
    code, out, _ = run("enumerate", FIX / "g_lr.pcfg", "--max-steps", "10")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 4 and lines[1].split("\t") == ["a x c b x d", "S A1 C B2 D", "1/9"]
    code, out, _ = run("--max-steps", "60", "enumerate", FIX / "td_glr.pdt")
    assert code == 0 and len(out.strip().splitlines()) == 4


def test_cli_errors():
    code, _, err = run("prob", FIX / "missing.ppdt", "--input", "a")
    assert code == 2 and err.startswith("error in prob")
    code, _, err = run("prob", FIX / "g_lr.pcfg", "--input", "a")
    assert code == 2 and "expected an automaton" in err
    code, _, err = run("lift", "--strategy", "lr0", FIX / "g_lr.pcfg")
    assert code == 2 and "error in lift" in err
    assert run("bogus")[0] == 2


def test_cli_tolerance_flags():
    code, out, _ = run("--tolerance", "1e-10", "--max-iter", "500", "prefix", FIX / "glr_wr.ppdt", "--input", "a a")
    assert code == 0 and out.strip() == "5/18"
