"""Context-free grammars, their probabilistic extension and basic algorithms.

Grammar symbols are plain hashable values (strings in practice).  A `Cfg`
declares which of them are terminals and which are nonterminals; the two
sets must be disjoint.  Derivations are leftmost and are represented as
tuples of rule identifiers.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Iterable, Iterator, Literal, Mapping, NamedTuple, Sequence

from . import fixpoint
from .errors import EmptyLanguage, GrammarError, UncoveredRule

Derivation = tuple[str, ...]
Corpus = list[Derivation]
Rational = Fraction


class Symbol(NamedTuple):
    name: Hashable
    kind: Literal["terminal", "nonterminal"]


@dataclass(frozen=True)
class Rule:
    id: str
    lhs: Hashable
    rhs: tuple[Hashable, ...] = ()

    def __str__(self) -> str:
        body = " ".join(map(str, self.rhs)) if self.rhs else "ε"
        return f"{self.id}: {self.lhs} → {body}"


@dataclass(frozen=True)
class Cfg:
    terminals: frozenset
    nonterminals: frozenset
    start: Hashable
    rules: tuple[Rule, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "terminals", frozenset(self.terminals))
        object.__setattr__(self, "nonterminals", frozenset(self.nonterminals))
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.terminals & self.nonterminals:
            raise GrammarError(f"symbols both terminal and nonterminal: {sorted(map(str, self.terminals & self.nonterminals))}")
        if self.start not in self.nonterminals:
            raise GrammarError(f"start symbol {self.start} is not a nonterminal")
        ids = [r.id for r in self.rules]
        if len(set(ids)) != len(ids):
            raise GrammarError("duplicate rule identifiers")
        for r in self.rules:
            if r.lhs not in self.nonterminals:
                raise GrammarError(f"rule {r.id}: lhs {r.lhs} is not a nonterminal")
            for x in r.rhs:
                if x not in self.terminals and x not in self.nonterminals:
                    raise GrammarError(f"rule {r.id}: undeclared symbol {x}")
        starts = [r for r in self.rules if r.lhs == self.start]
        if len(starts) != 1:
            raise GrammarError(f"expected exactly one rule for start symbol {self.start}, found {len(starts)}")
        if not starts[0].rhs:
            raise GrammarError("the start rule must have a non-empty right-hand side")

    @cached_property
    def by_id(self) -> dict[str, Rule]:
        return {r.id: r for r in self.rules}

    @cached_property
    def by_lhs(self) -> dict[Hashable, tuple[Rule, ...]]:
        acc: dict[Hashable, list[Rule]] = defaultdict(list)
        for r in self.rules:
            acc[r.lhs].append(r)
        return {a: tuple(rs) for a, rs in acc.items()}

    @property
    def start_rule(self) -> Rule:
        return self.by_lhs[self.start][0]

    def rules_for(self, lhs: Hashable) -> tuple[Rule, ...]:
        return self.by_lhs.get(lhs, ())

    def rule(self, rule_id: str) -> Rule:
        return self.by_id[rule_id]

    def is_terminal(self, x: Hashable) -> bool:
        return x in self.terminals

    def symbol(self, name: Hashable) -> Symbol:
        if name in self.terminals:
            return Symbol(name, "terminal")
        if name in self.nonterminals:
            return Symbol(name, "nonterminal")
        raise KeyError(name)

    @property
    def size(self) -> int:
        return sum(1 + len(r.rhs) for r in self.rules)

    @cached_property
    def nullable(self) -> frozenset:
        return nullable_symbols(self.rules)


@dataclass(frozen=True)
class Pcfg:
    cfg: Cfg
    prob: Mapping[str, Fraction | float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "prob", dict(self.prob))
        missing = [r.id for r in self.cfg.rules if r.id not in self.prob]
        if missing:
            raise GrammarError(f"rules without probability: {missing}")
        for rid, p in self.prob.items():
            if not 0 <= p <= 1:
                raise GrammarError(f"probability of {rid} outside [0, 1]: {p}")

    @property
    def rules(self) -> tuple[Rule, ...]:
        return self.cfg.rules

    @property
    def nonterminals(self) -> frozenset:
        return self.cfg.nonterminals

    @property
    def weights(self) -> Mapping[str, Fraction | float]:
        return self.prob

    def is_proper(self) -> bool:
        sums: dict[Hashable, Fraction | float] = defaultdict(int)
        for r in self.cfg.rules:
            sums[r.lhs] += self.prob[r.id]
        return all(s == 1 for s in sums.values())

    def derivation_probability(self, d: Iterable[str]) -> Fraction | float:
        p: Fraction | float = Fraction(1)
        for rid in d:
            p *= self.prob[rid]
        return p


def make_cfg(
    start: Hashable,
    rules: Iterable[tuple[str, Hashable, Sequence[Hashable]]],
    terminals: Iterable[Hashable] | None = None,
    augment: bool = False,
) -> Cfg:
    """Build a `Cfg` from ``(id, lhs, rhs)`` triples.

    Without explicit ``terminals`` every symbol that never occurs as a lhs
    is taken to be a terminal.  With ``augment`` a fresh start symbol and a
    rule ``start' -> start`` are added.
    """
    triples = [(rid, lhs, tuple(rhs)) for rid, lhs, rhs in rules]
    nts = {lhs for _, lhs, _ in triples} | {start}
    if terminals is None:
        terms = {x for _, _, rhs in triples for x in rhs if x not in nts}
    else:
        terms = set(terminals)
        nts |= {x for _, _, rhs in triples for x in rhs if x not in terms}
    if augment:
        new = f"{start}'"
        while new in nts or new in terms:
            new += "'"
        rid = f"{new}"
        taken = {t[0] for t in triples}
        while rid in taken:
            rid += "_"
        triples.insert(0, (rid, new, (start,)))
        nts.add(new)
        start = new
    return Cfg(frozenset(terms), frozenset(nts), start, tuple(Rule(*t) for t in triples))


def make_pcfg(
    start: Hashable,
    rules: Iterable[tuple[str, Hashable, Sequence[Hashable], Fraction | float | str | int]],
    terminals: Iterable[Hashable] | None = None,
) -> Pcfg:
    rows = list(rules)
    cfg = make_cfg(start, [(rid, lhs, rhs) for rid, lhs, rhs, _ in rows], terminals)
    return Pcfg(cfg, {rid: Fraction(p) if not isinstance(p, float) else p for rid, _, _, p in rows})


def nullable_symbols(rules: Iterable[Rule]) -> frozenset:
    rules = list(rules)
    out: set = set()
    changed = True
    while changed:
        changed = False
        for r in rules:
            if r.lhs not in out and all(x in out for x in r.rhs):
                out.add(r.lhs)
                changed = True
    return frozenset(out)


def productive_symbols(cfg: Cfg) -> set:
    prod = set(cfg.terminals)
    changed = True
    while changed:
        changed = False
        for r in cfg.rules:
            if r.lhs not in prod and all(x in prod for x in r.rhs):
                prod.add(r.lhs)
                changed = True
    return prod


def reduce(cfg: Cfg) -> Cfg:
    """Drop rules that occur in no complete derivation."""
    prod = productive_symbols(cfg)
    if cfg.start not in prod:
        raise EmptyLanguage("the start symbol derives no terminal string", operation="reduce")
    rules = [r for r in cfg.rules if r.lhs in prod and all(x in prod for x in r.rhs)]
    reach = {cfg.start}
    todo = [cfg.start]
    by_lhs: dict[Hashable, list[Rule]] = defaultdict(list)
    for r in rules:
        by_lhs[r.lhs].append(r)
    while todo:
        a = todo.pop()
        for r in by_lhs[a]:
            for x in r.rhs:
                if x in cfg.nonterminals and x not in reach:
                    reach.add(x)
                    todo.append(x)
    kept = tuple(r for r in rules if r.lhs in reach)
    used_t = {x for r in kept for x in r.rhs if x in cfg.terminals}
    return Cfg(frozenset(used_t), frozenset(reach), cfg.start, kept)


def is_reduced(cfg: Cfg) -> bool:
    try:
        return len(reduce(cfg).rules) == len(cfg.rules)
    except EmptyLanguage:
        return False


def _closure(pairs: set[tuple[Hashable, Hashable]], symbols: Iterable[Hashable]) -> frozenset:
    succ: dict[Hashable, set] = defaultdict(set)
    for x, y in pairs:
        succ[x].add(y)
    out = set()
    for x in symbols:
        seen = {x}
        todo = [x]
        while todo:
            y = todo.pop()
            for z in succ[y]:
                if z not in seen:
                    seen.add(z)
                    todo.append(z)
        out.update((x, y) for y in seen)
    return frozenset(out)


def left_corner_relation(cfg: Cfg, ignore_nullable_prefix: bool = False) -> frozenset:
    """Reflexive-transitive left-corner relation as a set of pairs ``(X, A)``.

    With ``ignore_nullable_prefix`` a symbol preceded only by nullable
    nonterminals in some rule for ``A`` also counts as a left corner of ``A``.
    """
    nullable = cfg.nullable
    base = set()
    for r in cfg.rules:
        for x in r.rhs:
            base.add((x, r.lhs))
            if not ignore_nullable_prefix or x not in nullable:
                break
    return _closure(base, cfg.terminals | cfg.nonterminals)


def empty_corner_relation(cfg: Cfg) -> frozenset:
    """Pairs ``(X, A)`` linked by a chain of rules ``A -> X γ`` with X and γ nullable.

    Used by the eps-LC construction for subtrees that derive the empty string.
    """
    nullable = cfg.nullable
    base = {(r.rhs[0], r.lhs) for r in cfg.rules if r.rhs and all(x in nullable for x in r.rhs)}
    return _closure(base, cfg.nonterminals)


def mle_estimate(cfg: Cfg, corpus: Iterable[Derivation]) -> Pcfg:
    """Relative-frequency estimate p(π) = n_π / n_A."""
    counts: Counter[str] = Counter()
    for d in corpus:
        yield_of(cfg, d)
        counts.update(d)
    missing = [r.id for r in cfg.rules if counts[r.id] == 0]
    if missing:
        raise UncoveredRule(missing)
    per_lhs: Counter = Counter()
    for r in cfg.rules:
        per_lhs[r.lhs] += counts[r.id]
    return Pcfg(cfg, {r.id: Fraction(counts[r.id], per_lhs[r.lhs]) for r in cfg.rules})


def partition_functions(
    grammar, tolerance: float = 1e-12, max_iter: int = 10000
) -> dict[Hashable, Fraction | float]:
    """Least fixed point of Z(A) = Σ p(A → X1…Xk) · Π Z(Xi), terminals counting 1.

    ``grammar`` is any object with ``rules``, ``weights`` and ``nonterminals``
    (a `Pcfg` or a weighted grammar).  Acyclic parts are solved exactly.
    """
    return partition_functions_ex(grammar, tolerance, max_iter)[0]


def partition_functions_ex(grammar, tolerance: float = 1e-12, max_iter: int = 10000):
    nts = grammar.nonterminals
    system: dict[Hashable, list] = {a: [] for a in nts}
    for r in grammar.rules:
        w = grammar.weights[r.id]
        if w:
            system[r.lhs].append((w, tuple(x for x in r.rhs if x in nts)))
    return fixpoint.solve(system, tolerance, max_iter)


class Consistency(NamedTuple):
    consistent: bool
    z_start: Fraction | float
    exact: bool

    def __bool__(self) -> bool:
        return self.consistent


def is_consistent(
    pcfg: Pcfg, tolerance: float = 1e-9, max_iter: int = 10000, iter_tolerance: float = 1e-12
) -> Consistency:
    z, exact = partition_functions_ex(pcfg, min(tolerance, iter_tolerance), max_iter)
    zs = z[pcfg.cfg.start]
    ok = zs == 1 if exact else abs(zs - 1) <= tolerance
    return Consistency(bool(ok), zs, exact)


def _min_steps(cfg: Cfg) -> dict[Hashable, float]:
    inf = float("inf")
    best: dict[Hashable, float] = {a: inf for a in cfg.nonterminals}
    changed = True
    while changed:
        changed = False
        for r in cfg.rules:
            c = 1 + sum(best[x] for x in r.rhs if x in cfg.nonterminals)
            if c < best[r.lhs]:
                best[r.lhs] = c
                changed = True
    return best


def enumerate_derivations(
    cfg: Cfg,
    max_steps: int,
    max_length: int | None = None,
    target: Sequence[Hashable] | None = None,
) -> Iterator[tuple[Derivation, tuple[Hashable, ...]]]:
    """Yield ``(derivation, yield)`` for every complete leftmost derivation of at most
    ``max_steps`` rules, in lexicographic order of rule positions.

    ``max_length`` bounds the yield length; ``target`` restricts to one string.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    if target is not None:
        target = tuple(target)
        max_length = len(target) if max_length is None else min(max_length, len(target))
    lo = _min_steps(cfg)
    nts = cfg.nonterminals

    def rec(done: tuple, pending: tuple, steps: Derivation, budget: float) -> Iterator:
        # done: terminals produced so far; pending: remaining sentential form suffix
        i = 0
        while i < len(pending) and pending[i] not in nts:
            i += 1
        if i:
            done = done + pending[:i]
            pending = pending[i:]
            if max_length is not None and len(done) > max_length:
                return
            if target is not None and done != target[: len(done)]:
                return
        if not pending:
            if target is None or done == target:
                yield steps, done
            return
        if max_length is not None:
            if len(done) + sum(1 for x in pending if x not in nts) > max_length:
                return
        need = sum(lo[x] for x in pending if x in nts)
        if need > budget:
            return
        head, rest = pending[0], pending[1:]
        for r in cfg.rules_for(head):
            yield from rec(done, r.rhs + rest, steps + (r.id,), budget - 1)

    yield from rec((), (cfg.start,), (), max_steps)


def yield_of(cfg: Cfg, d: Iterable[str]) -> tuple[Hashable, ...]:
    """Replay a leftmost derivation and return its terminal yield."""
    form: list[Hashable] = [cfg.start]
    out: list[Hashable] = []
    for rid in d:
        while form and form[0] in cfg.terminals:
            out.append(form.pop(0))
        if not form:
            raise GrammarError(f"derivation continues after completion at {rid}")
        try:
            r = cfg.rule(rid)
        except KeyError:
            raise GrammarError(f"unknown rule {rid}") from None
        if r.lhs != form[0]:
            raise GrammarError(f"rule {rid} does not rewrite leftmost nonterminal {form[0]}")
        form[0:1] = list(r.rhs)
    if any(x in cfg.nonterminals for x in form):
        raise GrammarError("derivation is not complete")
    return tuple(out + form)


def string_probability_cfg(pcfg: Pcfg, w: Sequence[Hashable], max_steps: int = 200) -> Fraction | float:
    total: Fraction | float = Fraction(0)
    for d, _ in enumerate_derivations(pcfg.cfg, max_steps, target=tuple(w)):
        total += pcfg.derivation_probability(d)
    return total


def language(cfg: Cfg, max_steps: int, max_length: int | None = None) -> set[tuple[Hashable, ...]]:
    return {y for _, y in enumerate_derivations(cfg, max_steps, max_length)}


def rule_multiset(d: Iterable[str]) -> Counter:
    return Counter(d)


def derivations_by_yield(cfg: Cfg, max_steps: int, max_length: int | None = None) -> dict:
    acc: dict[tuple, list[Derivation]] = defaultdict(list)
    for d, y in enumerate_derivations(cfg, max_steps, max_length):
        acc[y].append(d)
    return dict(acc)


__all__ = [
    "Symbol", "Rule", "Cfg", "Pcfg", "Derivation", "Corpus", "Rational", "Consistency",
    "make_cfg", "make_pcfg", "augment", "reduce", "is_reduced", "nullable_symbols", "left_corner_relation",
    "empty_corner_relation", "mle_estimate", "partition_functions", "is_consistent",
    "enumerate_derivations", "yield_of", "string_probability_cfg", "language", "derivations_by_yield",
]


def augment(cfg: Cfg) -> Cfg:
    """Return ``cfg`` with a fresh start symbol S' and the single rule S' -> S."""
    return make_cfg(cfg.start, [(r.id, r.lhs, r.rhs) for r in cfg.rules], cfg.terminals, augment=True)
