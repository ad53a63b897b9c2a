"""Probabilistic extension of strategies and conversions between automata and grammars."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from .automaton import Pdt, Pop, Ppdt, ProbMonomial, Push, Swap, Transition, symbolic_string_probability
from .errors import AmbiguousProbe, BoundExceeded, CppRequired, SppRequired
from .grammar import Cfg, Pcfg, Rule, partition_functions_ex, string_probability_cfg
from .properties import check_cpp, check_spp, leadsto_relation, pop_targets
from .strategies import StrategyKind, construct

Value = Fraction | float


@dataclass(frozen=True)
class StackNT:
    """A stack symbol used as a grammar nonterminal."""

    sym: Hashable

    def __str__(self) -> str:
        return f"⟨{self.sym}⟩"


@dataclass(frozen=True)
class WeightedCfg:
    """Rules with nonnegative weights; several rules may share the start symbol."""

    terminals: frozenset
    nonterminals: frozenset
    start: Hashable
    rules: tuple[Rule, ...]
    weights: Mapping[str, Value] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", dict(self.weights))
        if any(w < 0 for w in self.weights.values()):
            raise ValueError("rule weights must be nonnegative")

    @property
    def size(self) -> int:
        return sum(1 + len(r.rhs) for r in self.rules)

    def to_cfg(self) -> Cfg:
        """A `Cfg` with the same derivations; a fresh start rule is added when needed."""
        rules = self.rules
        start = self.start
        own = [r for r in rules if r.lhs == start]
        if len(own) != 1 or not own[0].rhs:
            fresh = StackNT(("start", start))
            rules = (Rule("start", fresh, (start,)),) + rules
            start = fresh
        return Cfg(self.terminals, self.nonterminals | {start}, start, rules)


def _require_spp(pdt: Pdt, operation: str):
    rel = leadsto_relation(pdt)
    verdict = check_spp(pdt, rel)
    if not verdict:
        push = verdict.violations[0][0]
        err = SppRequired(
            f"push transition {push} has {len(pop_targets(pdt, push, rel))} possible pop targets",
            witnesses=list(verdict.violations),
        )
        err.operation = operation
        raise err
    return rel


def _output_weight(y: Sequence, p_g: Mapping[str, Value] | None) -> Value:
    w: Value = Fraction(1)
    if p_g is not None:
        for s in y:
            if isinstance(s, str):
                w *= p_g[s]
    return w


def pdt_to_weighted_cfg(
    pdt: Pdt,
    p_g: Mapping[str, Value] | None = None,
    weights: Mapping[int, Value] | None = None,
) -> WeightedCfg:
    """Grammar over stack symbols whose derivations mirror complete computations.

    Swap rules get the product of ``p_g`` over emitted rules, or ``weights``
    by transition id when given; push and empty rules get weight 1 unless
    ``weights`` says otherwise.
    """
    rel = _require_spp(pdt, "pdt_to_weighted_cfg")
    rules: list[Rule] = []
    w: dict[str, Value] = {}
    for t in pdt.transitions:
        rid = f"τ{t.id}"
        if isinstance(t, Push):
            (z,) = pop_targets(pdt, t, rel)
            rules.append(Rule(rid, StackNT(t.X), (StackNT(t.Y), StackNT(z))))
            w[rid] = weights[t.id] if weights is not None else Fraction(1)
        elif isinstance(t, Swap):
            rhs = ((t.x,) if t.x is not None else ()) + (StackNT(t.Y),)
            rules.append(Rule(rid, StackNT(t.X), rhs))
            w[rid] = weights[t.id] if weights is not None else _output_weight(t.y, p_g)
    tops = {t.X for t in pdt.transitions if isinstance(t, Pop)} | {pdt.x_final}
    for y in sorted(tops, key=str):
        rid = f"ε:{y}"
        rules.append(Rule(rid, StackNT(y), ()))
        w[rid] = Fraction(1)
    nts = frozenset(StackNT(q) for q in pdt.stack_symbols)
    return WeightedCfg(frozenset(pdt.input_alphabet), nts, StackNT(pdt.x_init), tuple(rules), w)


def lift(
    pcfg: Pcfg, kind: StrategyKind | str, tolerance: float = 1e-12, max_iter: int = 10000
) -> Ppdt:
    """Transition probabilities making ``p_A(c) = p_G(f(c))`` for every complete computation."""
    pdt = construct(kind, pcfg.cfg)
    if not check_cpp(pdt):
        raise CppRequired(f"the {StrategyKind(kind)} automaton lacks the correct-prefix property", operation="lift")
    rel = _require_spp(pdt, "lift")
    wcfg = pdt_to_weighted_cfg(pdt, pcfg.prob)
    z, _ = partition_functions_ex(wcfg, tolerance, max_iter)

    def zq(q: Hashable) -> Value:
        return z[StackNT(q)]

    prob: dict[int, Value] = {}
    for t in pdt.transitions:
        if isinstance(t, Pop):
            prob[t.id] = Fraction(1)
            continue
        base = zq(t.X)
        if not base:
            prob[t.id] = Fraction(0)
        elif isinstance(t, Swap):
            prob[t.id] = _output_weight(t.y, pcfg.prob) * zq(t.Y) / base
        else:
            (after,) = pop_targets(pdt, t, rel)
            prob[t.id] = zq(t.Y) * zq(after) / base
    for k, v in prob.items():  # clip float noise so the automaton validates
        if isinstance(v, float) and 1 < v <= 1 + 1e-9:
            prob[k] = 1.0
    return Ppdt(pdt, prob)


def ppda_to_pcfg(ppdt: Ppdt) -> Pcfg:
    """PCFG over stack symbols generating the automaton's string distribution."""
    pdt = ppdt.pdt
    wcfg = pdt_to_weighted_cfg(pdt, weights={t.id: ppdt.p(t) for t in pdt.transitions})
    cfg = wcfg.to_cfg()
    weights = dict(wcfg.weights)
    if "start" in cfg.by_id and "start" not in weights:
        weights["start"] = Fraction(1)
    return Pcfg(cfg, weights)


# ---------------------------------------------------------------------------
# feasibility of probabilistic extension


@dataclass(frozen=True)
class PairAnalysis:
    """Comparison of two probe strings after cancelling shared transitions."""

    first: tuple
    second: tuple
    grammar_ratio: Fraction | None
    residual: tuple[tuple[int, int], ...]

    @property
    def forced(self) -> bool:
        return not self.residual

    def automaton_ratio(self) -> str:
        if self.forced:
            return "1"
        num = "·".join(f"p(τ{t})" + (f"^{k}" if k > 1 else "") for t, k in self.residual if k > 0) or "1"
        den = "·".join(f"p(τ{t})" + (f"^{-k}" if k < -1 else "") for t, k in self.residual if k < 0) or "1"
        return f"{num} / {den}"

    def __str__(self) -> str:
        a, b = (" ".join(map(str, s)) for s in (self.first, self.second))
        return f"p({a})/p({b}): grammar ratio {self.grammar_ratio}, automaton ratio {self.automaton_ratio()}"


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool | None  # False when refuted, None when the probes do not decide
    pairs: tuple[PairAnalysis, ...]
    conflict: tuple[PairAnalysis, ...] = ()
    explanation: str = ""
    monomials: Mapping[tuple, ProbMonomial] = field(default_factory=dict)
    free: frozenset = frozenset()

    @property
    def infeasible(self) -> bool:
        return self.feasible is False

    @property
    def grammar_ratio(self) -> Fraction | None:
        return self.conflict[0].grammar_ratio if self.conflict else None

    @property
    def automaton_ratio(self) -> str | None:
        return self.conflict[0].automaton_ratio() if self.conflict else None

    @property
    def strings(self) -> tuple | None:
        return (self.conflict[0].first, self.conflict[0].second) if self.conflict else None

    def __bool__(self) -> bool:
        return self.feasible is not False


def probe_monomials(pdt: Pdt, probes: Sequence[Sequence], max_steps: int) -> dict[tuple, ProbMonomial]:
    out: dict[tuple, ProbMonomial] = {}
    for w in probes:
        w = tuple(w)
        monos = symbolic_string_probability(pdt, w, max_steps)
        if len(monos) != 1:
            raise AmbiguousProbe(
                f"probe {' '.join(map(str, w))!r} has {len(monos)} complete computations, expected 1",
                operation="feasibility_analysis",
            )
        out[w] = monos[0]
    return out


def feasibility_analysis(
    pcfg: Pcfg,
    kind: StrategyKind | str,
    probes: Sequence[Sequence],
    pairs: Sequence[tuple[int, int]] | None = None,
    max_steps: int | None = None,
) -> FeasibilityVerdict:
    """Try to refute that the strategy's automaton can match the grammar's distribution.

    Each pair of probes (all pairs by default) gives a constraint
    ``p_A(s1)/p_A(s2) = p_G(s1)/p_G(s2)``.  Transitions that are the only
    option of their stack symbol must have probability 1 and cancel.  The
    result is infeasible when a constraint has no free transition left yet
    demands a ratio other than 1, or when two constraints reduce to the same
    free ratio but demand different values.  Never reports feasibility.
    """
    kind = StrategyKind(kind)
    pdt = construct(kind, pcfg.cfg)
    probes = [tuple(w) for w in probes]
    if max_steps is None:
        max_steps = 40 + 12 * max((len(w) for w in probes), default=0)
    try:
        monos = probe_monomials(pdt, probes, max_steps)
    except BoundExceeded as e:
        e.operation = "feasibility_analysis"
        raise
    for w, m in monos.items():
        if not m:
            raise AmbiguousProbe(f"probe {w} has no computation", operation="feasibility_analysis")
    by_id = {t.id: t for t in pdt.transitions}
    free = frozenset(
        t for m in monos.values() for t in m if len(pdt.group_of(by_id[t])) > 1
    )
    if pairs is None:
        pairs = list(itertools.combinations(range(len(probes)), 2))
    analyses = []
    for i, j in pairs:
        s1, s2 = probes[i], probes[j]
        p1, p2 = string_probability_cfg(pcfg, s1), string_probability_cfg(pcfg, s2)
        ratio = Fraction(p1) / Fraction(p2) if p2 else None
        diff = Counter(monos[s1])
        diff.subtract(monos[s2])
        residual = tuple(sorted((t, k) for t, k in diff.items() if k and t in free))
        analyses.append(PairAnalysis(s1, s2, ratio, residual))

    conflict: list[PairAnalysis] = []
    notes: list[str] = []
    for a in analyses:
        if a.forced and a.grammar_ratio is not None and a.grammar_ratio != 1:
            conflict.append(a)
            notes.append(
                f"{a}: every differing transition is the sole option of its stack symbol, "
                "so properness forces probability 1 on it and the automaton ratio is 1"
            )
    by_key: dict[tuple, list[PairAnalysis]] = {}
    for a in analyses:
        if not a.forced and a.grammar_ratio is not None:
            by_key.setdefault(a.residual, []).append(a)
    for key, group in by_key.items():
        if len({a.grammar_ratio for a in group}) > 1:
            conflict.extend(group)
            ratios = ", ".join(str(a.grammar_ratio) for a in group)
            notes.append(
                f"the free ratio {group[0].automaton_ratio()} would have to equal each of {ratios}"
            )
    return FeasibilityVerdict(
        False if conflict else None,
        tuple(analyses),
        tuple(conflict),
        "; ".join(notes) if notes else "not refuted by these probes",
        monos,
        free,
    )


@dataclass(frozen=True)
class GridSearchResult:
    points: int
    match: dict[int, Fraction] | None


def _simplex(k: int, n: int):
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _simplex(k - 1, n - first):
            yield (first,) + rest


def grid_search(
    pdt: Pdt,
    monomials: Mapping[tuple, ProbMonomial],
    targets: Mapping[tuple, Value],
    step: Fraction = Fraction(1, 100),
    tolerance: float = 1e-6,
    max_points: int = 5_000_000,
) -> GridSearchResult:
    """Exhaustive search for proper transition probabilities matching ``targets``.

    Only groups containing a transition that occurs in some monomial with a
    competitor are searched; grid points cover each group's simplex.
    """
    by_id = {t.id: t for t in pdt.transitions}
    used = {t for m in monomials.values() for t in m}
    groups: list[tuple[Transition, ...]] = []
    seen: set = set()
    for tid in sorted(used):
        g = pdt.group_of(by_id[tid])
        if len(g) > 1 and g not in seen:
            seen.add(g)
            groups.append(g)
    n = round(1 / step)
    options = [list(_simplex(len(g), n)) for g in groups]
    total = 1
    for o in options:
        total *= len(o)
    if total > max_points:
        raise BoundExceeded(f"grid of {total} points exceeds {max_points}", partial_count=0)
    base = {tid: Fraction(1) for tid in used}
    points = 0
    for combo in itertools.product(*options):
        points += 1
        prob = dict(base)
        for g, parts in zip(groups, combo):
            for t, k in zip(g, parts):
                prob[t.id] = Fraction(k, n)
        if all(abs(float(m.evaluate(prob)) - float(targets[w])) <= tolerance for w, m in monomials.items()):
            return GridSearchResult(points, {t: prob[t] for t in sorted(prob)})
    return GridSearchResult(points, None)
