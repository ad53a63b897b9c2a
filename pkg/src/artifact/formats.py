"""Text formats for grammars, automata and corpora.

Grammar files::

    # comment
    start S
    rule r1: S -> A 'b c' : 1/2
    rule r2: A -> eps : 1

Unquoted symbols starting with an uppercase letter are nonterminals; other
unquoted symbols and all quoted symbols are terminals.  Probabilities are
optional but must be given on all rules or on none.

Automaton files::

    init X0
    final X9
    inalpha a b
    outalpha r1 r2 ⊣ #0
    push X0 -> X0 X1 : 1
    pop X0 X3 -> X9 : 1
    swap X1 / a : r1 -> X2 : 1/3
    swap X2 / eps : eps -> X3 : 1

Output symbols are rule ids, ``⊣`` for the end marker and ``#n`` for the
integer ``n``.  Tokens holding whitespace or reserved characters are
single-quoted with backslash escapes.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

from .automaton import END, Pdt, Pop, Ppdt, Push, Swap
from .errors import FormatError, GrammarError
from .grammar import Cfg, Derivation, Pcfg, make_cfg

_TOKEN = re.compile(r"'((?:[^'\\]|\\.)*)'|(\S+)")
_SAFE = re.compile(r"[^\s'\\#:/][^\s\\:/]*")  # a quote only opens a token at its start
_RESERVED = {"->", ":", "/", "eps", "⊣"}
_HEADERS = ("init", "final", "inalpha", "outalpha", "push", "pop", "swap")


class Token(str):
    """A token plus whether it was written in quotes."""

    quoted: bool = False

    @classmethod
    def make(cls, text: str, quoted: bool) -> "Token":
        t = cls(text)
        t.quoted = quoted
        return t


def tokenize(line: str) -> list[Token]:
    out: list[Token] = []
    pos = 0
    line = line.strip()
    while pos < len(line):
        if line[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(line, pos)
        if m is None:
            raise FormatError(f"unterminated quote in: {line}")
        if m.group(1) is not None:
            out.append(Token.make(re.sub(r"\\(.)", r"\1", m.group(1)), True))
        else:
            out.append(Token.make(m.group(2), False))
        pos = m.end()
    return out


def quote(text: str) -> str:
    if text and _SAFE.fullmatch(text) and text not in _RESERVED:
        return text
    return "'" + text.replace("\\", "\\\\").replace("'", "\\'") + "'"


def _lines(text: str) -> Iterable[tuple[int, list[Token]]]:
    for no, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield no, tokenize(stripped)


def parse_probability(text: str) -> Fraction | float:
    try:
        if re.fullmatch(r"[+-]?\d+(/\d+)?", text):
            return Fraction(text)
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"bad probability {text!r}") from None


def format_probability(p: Fraction | float | int) -> str:
    return repr(p) if isinstance(p, float) else str(p)


def _split_prob(toks: list[Token], no: int) -> tuple[list[Token], Fraction | float | None]:
    if len(toks) >= 2 and toks[-2] == ":" and not toks[-2].quoted:
        return toks[:-2], parse_probability(toks[-1])
    return toks, None


# ---------------------------------------------------------------------------
# grammars


def is_automaton_text(text: str) -> bool:
    for _, toks in _lines(text):
        return toks[0] in _HEADERS and not toks[0].quoted
    return False


def parse_grammar(text: str) -> Cfg | Pcfg:
    """Parse a grammar file; a start symbol with several rules gets a fresh start rule."""
    start = None
    rows: list[tuple[str, str, tuple, Fraction | float | None]] = []
    terminals: set[str] = set()
    for no, toks in _lines(text):
        head = toks[0]
        if head == "start" and not head.quoted:
            if len(toks) != 2 or start is not None:
                raise FormatError(f"line {no}: expected a single 'start <NT>' line")
            start = str(toks[1])
            continue
        if head != "rule" or head.quoted:
            raise FormatError(f"line {no}: unknown directive {head!r}")
        toks, p = _split_prob(toks[1:], no)
        if toks and toks[0].endswith(":") and not toks[0].quoted:
            rid, rest = toks[0][:-1], toks[1:]
        elif len(toks) >= 2 and toks[1] == ":":
            rid, rest = str(toks[0]), toks[2:]
        else:
            raise FormatError(f"line {no}: expected 'rule <id>: <NT> -> ...'")
        if len(rest) < 2 or rest[1] != "->":
            raise FormatError(f"line {no}: expected '<NT> -> symbols'")
        lhs, rhs = rest[0], rest[2:]
        if lhs.quoted or not lhs[:1].isupper():
            raise FormatError(f"line {no}: left-hand side {lhs!r} is not a nonterminal")
        if len(rhs) == 1 and rhs[0] == "eps" and not rhs[0].quoted:
            rhs = []
        for s in rhs:
            if s.quoted or not s[:1].isupper():
                terminals.add(str(s))
        rows.append((rid or "", str(lhs), tuple(map(str, rhs)), p))
    if start is None:
        if not rows:
            raise FormatError("grammar has no rules")
        start = rows[0][1]
    given = [p is not None for *_, p in rows]
    if any(given) and not all(given):
        raise FormatError("probabilities must be given on all rules or on none")
    own = [r for r in rows if r[1] == start]
    augment = len(own) != 1 or not own[0][2]
    try:
        cfg = make_cfg(start, [r[:3] for r in rows], terminals, augment=augment)
    except GrammarError as e:
        raise FormatError(str(e)) from None
    if not rows or not all(given):
        return cfg
    prob = {rid: p for rid, _, _, p in rows}
    if augment:
        prob[cfg.start_rule.id] = Fraction(1)
    try:
        return Pcfg(cfg, prob)
    except GrammarError as e:
        raise FormatError(str(e)) from None


def _symbol(x: Hashable, cfg: Cfg) -> str:
    s = str(x)
    if x in cfg.nonterminals:
        if not (s[:1].isupper() and _SAFE.fullmatch(s)):
            raise FormatError(f"nonterminal {s!r} cannot be written in grammar format")
        return s
    if s[:1].isupper() or not _SAFE.fullmatch(s) or s in _RESERVED:
        return "'" + s.replace("\\", "\\\\").replace("'", "\\'") + "'"
    return s


def write_grammar(g: Cfg | Pcfg) -> str:
    cfg = g.cfg if isinstance(g, Pcfg) else g
    lines = [f"start {_symbol(cfg.start, cfg)}"]
    for r in cfg.rules:
        rhs = " ".join(_symbol(x, cfg) for x in r.rhs) if r.rhs else "eps"
        rid = quote(r.id)
        line = f"rule {rid}: {_symbol(r.lhs, cfg)} -> {rhs}"
        if isinstance(g, Pcfg):
            line += f" : {format_probability(g.prob[r.id])}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def parse_corpus(text: str) -> list[Derivation]:
    return [tuple(str(t) for t in toks) for _, toks in _lines(text)]


def write_corpus(corpus: Iterable[Sequence[str]]) -> str:
    return "".join(" ".join(quote(r) for r in d) + "\n" for d in corpus)


# ---------------------------------------------------------------------------
# automata


def _out_token(s: Hashable) -> str:
    if s is END:
        return "⊣"
    if isinstance(s, int) and not isinstance(s, bool):
        return f"#{s}"
    text = str(s)
    if _SAFE.fullmatch(text) and text not in _RESERVED:
        return text
    return "'" + text.replace("\\", "\\\\").replace("'", "\\'") + "'"


def _out_symbol(tok: Token) -> Hashable:
    if tok.quoted:
        return str(tok)
    if tok == "⊣":
        return END
    if tok.startswith("#"):
        try:
            return int(tok[1:])
        except ValueError:
            raise FormatError(f"bad marker {tok!r}") from None
    return str(tok)


def _names(pdt: Pdt) -> dict[Hashable, str]:
    """Distinct printable names for stack symbols."""
    names: dict[Hashable, str] = {}
    used: set[str] = set()
    for q in sorted(pdt.stack_symbols, key=lambda q: (str(q), repr(q))):
        base = str(q)
        name, k = base, 2
        while name in used:
            name = f"{base}~{k}"
            k += 1
        used.add(name)
        names[q] = name
    return names


def write_automaton(a: Pdt | Ppdt) -> str:
    pdt = a.pdt if isinstance(a, Ppdt) else a
    names = {q: quote(n) for q, n in _names(pdt).items()}
    lines = [
        f"init {names[pdt.x_init]}",
        f"final {names[pdt.x_final]}",
        "inalpha " + " ".join(quote(str(x)) for x in sorted(pdt.input_alphabet, key=str)),
        "outalpha " + " ".join(_out_token(y) for y in sorted(pdt.output_alphabet, key=_out_token)),
    ]
    for t in pdt.transitions:
        if isinstance(t, Push):
            line = f"push {names[t.X]} -> {names[t.X]} {names[t.Y]}"
        elif isinstance(t, Pop):
            line = f"pop {names[t.Y]} {names[t.X]} -> {names[t.Z]}"
        else:
            x = "eps" if t.x is None else quote(str(t.x))
            y = " ".join(_out_token(s) for s in t.y) if t.y else "eps"
            line = f"swap {names[t.X]} / {x} : {y} -> {names[t.Y]}"
        if isinstance(a, Ppdt):
            line += f" : {format_probability(a.p(t))}"
        lines.append(line)
    return "\n".join(line.rstrip() for line in lines) + "\n"


def parse_automaton(text: str) -> Pdt | Ppdt:
    init = final = None
    ins: set = set()
    outs: set = set()
    ts: list = []
    probs: list = []
    for no, toks in _lines(text):
        head, rest = toks[0], toks[1:]
        if head.quoted:
            raise FormatError(f"line {no}: unknown directive {head!r}")
        if head in ("init", "final"):
            if len(rest) != 1:
                raise FormatError(f"line {no}: expected '{head} <symbol>'")
            if head == "init":
                init = str(rest[0])
            else:
                final = str(rest[0])
            continue
        if head == "inalpha":
            ins.update(map(str, rest))
            continue
        if head == "outalpha":
            outs.update(_out_symbol(t) for t in rest)
            continue
        rest, p = _split_prob(rest, no)
        words = [str(t) for t in rest]
        if head == "push":
            if len(rest) != 4 or rest[1] != "->" or rest[2] != rest[0]:
                raise FormatError(f"line {no}: expected 'push X -> X Y'")
            ts.append(Push(words[0], words[3]))
        elif head == "pop":
            if len(rest) != 4 or rest[2] != "->":
                raise FormatError(f"line {no}: expected 'pop Y X -> Z'")
            ts.append(Pop(words[0], words[1], words[3]))
        elif head == "swap":
            if len(rest) < 6 or rest[1] != "/" or rest[3] != ":" or rest[-2] != "->":
                raise FormatError(f"line {no}: expected 'swap X / x : y -> Y'")
            x = None if rest[2] == "eps" and not rest[2].quoted else words[2]
            ys = rest[4:-2]
            if len(ys) == 1 and ys[0] == "eps" and not ys[0].quoted:
                ys = []
            ts.append(Swap(words[0], x, tuple(_out_symbol(t) for t in ys), words[-1]))
        else:
            raise FormatError(f"line {no}: unknown directive {head!r}")
        probs.append(p)
    if init is None or final is None:
        raise FormatError("automaton needs 'init' and 'final' lines")
    pdt = Pdt(init, final, tuple(ts), frozenset(ins), frozenset(outs))
    given = [p is not None for p in probs]
    if any(given) and not all(given):
        raise FormatError("probabilities must be given on all transitions or on none")
    if probs and all(given):
        try:
            return Ppdt(pdt, {i: p for i, p in enumerate(probs)})
        except ValueError as e:
            raise FormatError(str(e)) from None
    return pdt


def read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
