"""Line-oriented textual format for np-programs.

One rule per line::

    state(1) : 17/20*U <- state(0) : U, occ(listen_1, 0), exec(listen_1, 0).
    holds(tl, 1) <- holds(tl, 0), not holds(-tl, 1).
    #strategy state max.

Omitted annotations default to 1.  Arguments are identifiers, (negated)
literals, integers, rationals, or arithmetic terms over variables (uppercase
first letter).  `%` starts a comment.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .nplp import (
    Add, AProd, AVar, Annotation, Atom, BLit, Const, Mul, NpProgram, NpRule,
    NplpError, Num, ONE, Pow, Ref, render_annotation, render_atom,
)


class NplpParseError(NplpError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


def format_rule(rule: NpRule) -> str:
    head = render_atom(rule.head)
    if rule.head_ann != ONE:
        head += " : " + render_annotation(rule.head_ann)
    if not rule.body:
        text = head + "."
    else:
        parts = []
        for lit in rule.body:
            s = render_atom(lit.atom)
            if lit.ann != ONE:
                s += " : " + render_annotation(lit.ann)
            if lit.neg:
                s = "not " + s
            parts.append(s)
        text = head + " <- " + ", ".join(parts) + "."
    if rule.schema is not None:
        text += f"  % schema {rule.schema}"
    return text


def format_program(program: NpProgram) -> str:
    lines = [format_rule(r) for r in program.rules]
    for pred, name in program.strategies:
        lines.append(f"#strategy {pred} {name}.")
    if program.default_strategy != "max":
        lines.append(f"#strategy default {program.default_strategy}.")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# parsing


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow><-)
  | (?P<number>\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(),.:*+^#-])
    """,
    re.VERBOSE,
)


def _tokenize_line(line: str, lineno: int) -> list[tuple[str, str]]:
    line = line.split("%", 1)[0]
    out = []
    pos = 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if m is None:
            raise NplpParseError(f"unexpected character {line[pos]!r}", lineno)
        kind = m.lastgroup
        if kind == "punct":
            out.append((m.group(), m.group()))
        elif kind != "ws":
            out.append((kind, m.group()))
        pos = m.end()
    out.append(("eol", ""))
    return out


class _LineParser:
    def __init__(self, tokens, lineno):
        self.tokens = tokens
        self.i = 0
        self.lineno = lineno

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tok
        self.i += 1
        return t

    def expect(self, kind):
        if self.tok[0] != kind:
            raise NplpParseError(
                f"expected {kind!r}, found {self.tok[1] or 'end of line'!r}", self.lineno)
        return self.advance()

    def number(self) -> Fraction:
        neg = self.tok[0] == "-"
        if neg:
            self.advance()
        text = self.expect("number")[1]
        if "/" in text:
            a, b = text.split("/")
            value = Fraction(a) / Fraction(b)
        else:
            value = Fraction(text)
        return -value if neg else value

    def term(self):
        """Additive expression; collapses to a plain value when constant."""
        parts = [self.product()]
        while self.tok[0] in "+-":
            op = self.advance()[0]
            p = self.product()
            if op == "-":
                p = _negate_expr(p)
            parts.append(p)
        if len(parts) == 1:
            return parts[0]
        return _fold(Add(tuple(_as_expr(p) for p in parts)))

    def product(self):
        parts = [self.factor()]
        while self.tok[0] == "*":
            self.advance()
            parts.append(self.factor())
        if len(parts) == 1:
            return parts[0]
        return _fold(Mul(tuple(_as_expr(p) for p in parts)))

    def factor(self):
        if self.tok[0] == "(":
            self.advance()
            inner = self.term()
            self.expect(")")
            return inner
        if self.tok[0] == "-":
            nxt = self.tokens[self.i + 1]
            if nxt[0] == "number":
                return self.number()
            self.advance()
            name = self.expect("ident")[1]
            return "-" + self._maybe_args(name)
        if self.tok[0] == "number":
            base = self.number()
            return self._maybe_pow(base)
        name = self.expect("ident")[1]
        if name[:1].isupper() and self.tok[0] not in "(":
            return self._maybe_pow(Ref(name))
        return self._maybe_args(name)

    def _maybe_pow(self, base):
        if self.tok[0] == "^":
            self.advance()
            exp = self.factor()
            return _fold(Pow(_as_expr(base), _as_expr(exp)))
        return base

    def _maybe_args(self, name: str) -> str:
        if self.tok[0] != "(":
            return name
        self.advance()
        args = [self.expect("ident")[1]]
        while self.tok[0] == ",":
            self.advance()
            args.append(self.expect("ident")[1])
        self.expect(")")
        return f"{name}({', '.join(args)})"

    def atom(self) -> Atom:
        name = self.expect("ident")[1]
        if self.tok[0] != "(":
            return (name,)
        self.advance()
        args = [self.term()]
        while self.tok[0] == ",":
            self.advance()
            args.append(self.term())
        self.expect(")")
        return (name, *_canonical_args(args))

    def annotation(self) -> Annotation:
        parts = [self.ann_factor()]
        while self.tok[0] == "*":
            self.advance()
            parts.append(self.ann_factor())
        if len(parts) == 1:
            return parts[0]
        consts = [p for p in parts if isinstance(p, Const)]
        if len(consts) == len(parts):
            value = Fraction(1)
            for c in consts:
                value *= c.value
            return Const(value)
        return AProd(tuple(parts))

    def ann_factor(self) -> Annotation:
        if self.tok[0] == "number":
            return Const(self.number())
        name = self.expect("ident")[1]
        return AVar(name)

    def body_literal(self) -> BLit:
        neg = False
        if self.tok[0] == "ident" and self.tok[1] == "not":
            self.advance()
            neg = True
        atom = self.atom()
        ann = ONE
        if self.tok[0] == ":":
            self.advance()
            ann = self.annotation()
        return BLit(atom=atom, ann=ann, neg=neg)

    def rule(self) -> NpRule:
        head = self.atom()
        head_ann = ONE
        if self.tok[0] == ":":
            self.advance()
            head_ann = self.annotation()
        body: list[BLit] = []
        if self.tok[0] == "arrow":
            self.advance()
            if self.tok[0] != ".":
                body.append(self.body_literal())
                while self.tok[0] == ",":
                    self.advance()
                    body.append(self.body_literal())
        self.expect(".")
        self.expect("eol")
        return NpRule(head=head, head_ann=head_ann, body=tuple(body))


def _as_expr(value):
    if isinstance(value, Fraction):
        return Num(value)
    if isinstance(value, int):
        return Num(Fraction(value))
    if isinstance(value, str):
        raise NplpError(f"identifier {value!r} used in an arithmetic term")
    return value


def _negate_expr(value):
    if isinstance(value, (int, Fraction)):
        return -value
    return _fold(Mul((Num(Fraction(-1)), _as_expr(value))))


def _fold(expr):
    from .nplp import simplify_expr
    s = simplify_expr(expr, {})
    return s.value if isinstance(s, Num) else s


def _canonical_args(args: list) -> list:
    out = []
    for a in args:
        if isinstance(a, Fraction) and a.denominator == 1:
            # Integer-valued arguments are canonically ints (time indices etc.).
            out.append(int(a))
        else:
            out.append(a)
    return out


def parse_program(text: str) -> NpProgram:
    rules: list[NpRule] = []
    strategies: list[tuple[str, str]] = []
    default = "max"
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("%", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("#strategy"):
            m = re.match(r"#strategy\s+([A-Za-z_][A-Za-z0-9_]*)\s+(max|independence)\s*\.$",
                         stripped)
            if m is None:
                raise NplpParseError("malformed #strategy directive", lineno)
            pred, name = m.groups()
            if pred == "default":
                default = name
            else:
                strategies.append((pred, name))
            continue
        parser = _LineParser(_tokenize_line(stripped, lineno), lineno)
        rules.append(parser.rule())
    return NpProgram(rules=tuple(rules), strategies=tuple(strategies),
                     default_strategy=default)
