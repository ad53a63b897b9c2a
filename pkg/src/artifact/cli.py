"""Command-line interface.

Exit status: 0 on success or a true verdict, 1 when a checked property is
false or a distribution is shown infeasible, 2 on bad input.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from fractions import Fraction
from typing import Callable, Sequence

from . import formats
from .automaton import Pdt, Ppdt, computation_probability, input_free_computations
from .errors import ArtifactError, FormatError
from .grammar import Cfg, Pcfg, enumerate_derivations, is_consistent, mle_estimate
from .lifting import feasibility_analysis, grid_search, lift
from .prefix import prefix_probability, string_probability_ppdt
from .properties import check_cpp, check_spp, is_reduced_pdt
from .strategies import StrategyKind, construct

OK, FALSE, BAD_INPUT = 0, 1, 2
DEFAULT_TOLERANCE = 1e-12
DEFAULT_MAX_ITER = 10000


def fmt_value(v: Fraction | float | int) -> str:
    if isinstance(v, float):
        return f"{v:.12g} approx"
    return str(v)


class _Out:
    def __init__(self, stdout, stderr) -> None:
        self.stdout = stdout
        self.stderr = stderr

    def __call__(self, *parts: object) -> None:
        print(*parts, file=self.stdout)

    def err(self, *parts: object) -> None:
        print(*parts, file=self.stderr)


def _load_grammar(path: str) -> Cfg | Pcfg:
    text = formats.read_text(path)
    if formats.is_automaton_text(text):
        raise FormatError(f"{path} holds an automaton, expected a grammar")
    return formats.parse_grammar(text)


def _load_pcfg(path: str) -> Pcfg:
    g = _load_grammar(path)
    if not isinstance(g, Pcfg):
        raise FormatError(f"{path} has no rule probabilities")
    return g


def _load_automaton(path: str) -> Pdt | Ppdt:
    text = formats.read_text(path)
    if not formats.is_automaton_text(text):
        raise FormatError(f"{path} holds a grammar, expected an automaton")
    return formats.parse_automaton(text)


def _emit(text: str, dest: str | None, out: _Out) -> None:
    if dest is None:
        out.stdout.write(text)
    else:
        formats.write_text(dest, text)


def _tokens(s: str) -> tuple[str, ...]:
    return tuple(str(t) for t in formats.tokenize(s))


def cmd_construct(args, out: _Out) -> int:
    g = _load_grammar(args.grammar)
    cfg = g.cfg if isinstance(g, Pcfg) else g
    pdt = construct(args.strategy, cfg)
    _emit(formats.write_automaton(pdt), args.output, out)
    if args.output:
        out(f"{args.strategy} automaton: {pdt.size} transitions, {len(pdt.stack_symbols)} stack symbols")
    return OK


def cmd_check(args, out: _Out) -> int:
    a = _load_automaton(args.automaton)
    pdt = a.pdt if isinstance(a, Ppdt) else a
    wanted = [k for k in ("cpp", "spp", "reduced") if getattr(args, k)] or ["cpp", "spp", "reduced"]
    parts, details, ok = [], [], True
    for k in wanted:
        if k == "cpp":
            v = check_cpp(pdt, bound=getattr(args, "max_steps", None))
            if not v:
                if v.witness is not None:
                    steps = " ".join(f"τ{t.id}" for t in v.witness.computation.steps)
                    stack = " ".join(map(str, v.witness.stack))
                    details.append(f"dead computation: {steps or '(empty)'}; stack: {stack}")
                else:
                    details.append("dead stack pattern: " + " ".join(map(str, v.dead_pattern)))
        elif k == "spp":
            v = check_spp(pdt)
            for push, p1, p2 in v.violations[:5]:
                details.append(f"push {push} pops to both {p1.Z} and {p2.Z}")
        else:
            v = is_reduced_pdt(pdt)
            if not v:
                details.append(f"{len(v.unused)} transitions occur in no complete computation")
        ok &= bool(v)
        parts.append(f"{k.upper() if k != 'reduced' else 'reduced'}: {'yes' if v else 'no'}")
    out(", ".join(parts))
    for d in details:
        out("  " + d)
    return OK if ok else FALSE


def cmd_lift(args, out: _Out) -> int:
    g = _load_pcfg(args.pcfg)
    ppdt = lift(g, args.strategy, args.tolerance, args.max_iter)
    _emit(formats.write_automaton(ppdt), args.output, out)
    if args.output:
        proper = ppdt.is_proper(0 if all(isinstance(p, Fraction) for p in ppdt.prob.values()) else 1e-9)
        out(f"{args.strategy} PPDT: {ppdt.pdt.size} transitions, proper: {'yes' if proper else 'no'}")
    return OK


def _ppdt(path: str) -> Ppdt:
    a = _load_automaton(path)
    if not isinstance(a, Ppdt):
        raise FormatError(f"{path} has no transition probabilities")
    return a


def cmd_prob(args, out: _Out) -> int:
    ppdt = _ppdt(args.ppdt)
    out(fmt_value(string_probability_ppdt(ppdt, _tokens(args.input), args.tolerance, args.max_iter)))
    return OK


def cmd_prefix(args, out: _Out) -> int:
    ppdt = _ppdt(args.ppdt)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        v = prefix_probability(ppdt, _tokens(args.input), None, args.tolerance, args.max_iter)
    for w in caught:
        out.err(f"warning: {w.message}")
    out(fmt_value(v))
    return OK


def cmd_estimate(args, out: _Out) -> int:
    g = _load_grammar(args.cfg)
    cfg = g.cfg if isinstance(g, Pcfg) else g
    corpus = formats.parse_corpus(formats.read_text(args.corpus))
    pcfg = mle_estimate(cfg, corpus)
    _emit(formats.write_grammar(pcfg), args.output, out)
    if args.output:
        c = is_consistent(pcfg, max(args.tolerance, 1e-9), args.max_iter)
        out(f"estimated {len(cfg.rules)} rules from {len(corpus)} derivations; consistent: {'yes' if c else 'no'}")
    return OK


def cmd_analyze(args, out: _Out) -> int:
    g = _load_pcfg(args.pcfg)
    probes = [_tokens(p) for p in args.probe]
    if len(probes) < 2:
        raise FormatError("at least two --probe strings are needed")
    v = feasibility_analysis(g, args.strategy, probes, max_steps=getattr(args, "max_steps", None))
    for a in v.pairs:
        out(str(a))
    if not v.infeasible:
        out("not refuted by these probes")
        return OK
    out(f"infeasible: grammar ratio {v.grammar_ratio}, forced automaton ratio {v.automaton_ratio}")
    out("  " + v.explanation)
    if args.grid:
        pdt = construct(args.strategy, g.cfg)
        from .grammar import string_probability_cfg

        targets = {w: string_probability_cfg(g, w) for w in v.monomials}
        r = grid_search(pdt, v.monomials, targets)
        out(f"grid search: {r.points} points, {'match found' if r.match else 'no matching assignment'}")
    return FALSE


def cmd_enumerate(args, out: _Out) -> int:
    text = formats.read_text(args.file)
    max_steps = getattr(args, "max_steps", None) or 20
    if formats.is_automaton_text(text):
        a = formats.parse_automaton(text)
        pdt = a.pdt if isinstance(a, Ppdt) else a
        for c in input_free_computations(pdt, max_steps, args.max_length):
            w = " ".join(map(str, c.input)) or "ε"
            v = " ".join(formats._out_token(s) for s in c.output) or "ε"
            line = f"{w}\t{v}"
            if isinstance(a, Ppdt):
                line += f"\t{fmt_value(computation_probability(a, c))}"
            out(line)
        return OK
    g = formats.parse_grammar(text)
    cfg = g.cfg if isinstance(g, Pcfg) else g
    for d, w in enumerate_derivations(cfg, max_steps, args.max_length):
        line = f"{' '.join(map(str, w)) or 'ε'}\t{' '.join(d)}"
        if isinstance(g, Pcfg):
            line += f"\t{fmt_value(g.derivation_probability(d))}"
        out(line)
    return OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, default=argparse.SUPPRESS, help="fixed-point tolerance")
    common.add_argument("--max-iter", type=int, default=argparse.SUPPRESS, help="fixed-point iteration cap")
    common.add_argument("--max-steps", type=int, default=argparse.SUPPRESS, help="step bound for searches")
    p = argparse.ArgumentParser(prog="artifact", parents=[common], description="Probabilistic parsing strategies toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    kinds = [k.value for k in StrategyKind]

    def add(name: str, fn: Callable, help: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("construct", cmd_construct, "build the PDT of a strategy")
    sp.add_argument("--strategy", required=True, choices=kinds)
    sp.add_argument("grammar")
    sp.add_argument("-o", "--output")

    sp = add("check", cmd_check, "check CPP, SPP and reducedness of an automaton")
    sp.add_argument("--cpp", action="store_true")
    sp.add_argument("--spp", action="store_true")
    sp.add_argument("--reduced", action="store_true")
    sp.add_argument("automaton")

    sp = add("lift", cmd_lift, "build a probabilistic PDT from a PCFG")
    sp.add_argument("--strategy", required=True, choices=kinds)
    sp.add_argument("pcfg")
    sp.add_argument("-o", "--output")

    sp = add("prob", cmd_prob, "string probability under a PPDT")
    sp.add_argument("ppdt")
    sp.add_argument("--input", required=True)

    sp = add("prefix", cmd_prefix, "prefix probability under a PPDT")
    sp.add_argument("ppdt")
    sp.add_argument("--input", required=True)

    sp = add("estimate", cmd_estimate, "relative-frequency estimate from a corpus")
    sp.add_argument("cfg")
    sp.add_argument("corpus")
    sp.add_argument("-o", "--output")

    sp = add("analyze", cmd_analyze, "try to refute a probabilistic extension with probe strings")
    sp.add_argument("--strategy", required=True, choices=kinds)
    sp.add_argument("pcfg")
    sp.add_argument("--probe", action="append", default=[])
    sp.add_argument("--grid", action="store_true", help="confirm by grid search")

    sp = add("enumerate", cmd_enumerate, "list derivations or computations")
    sp.add_argument("file")
    sp.add_argument("--max-length", type=int)
    return p


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    out = _Out(stdout or sys.stdout, stderr or sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return BAD_INPUT if e.code else OK
    args.tolerance = getattr(args, "tolerance", DEFAULT_TOLERANCE)
    args.max_iter = getattr(args, "max_iter", DEFAULT_MAX_ITER)
    try:
        return args.fn(args, out)
    except ArtifactError as e:
        out.err(f"error in {e.operation or args.command}: {e}")
        return BAD_INPUT
    except (OSError, ValueError) as e:
        out.err(f"error in {args.command}: {e}")
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
