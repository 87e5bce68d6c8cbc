"""Concrete syntax: a recursive-descent parser and the matching printer.

ASCII conventions: ``if'``/``case'`` (or ``if°``) are the strict forms,
``*`` is tensor and ``+`` is sum in types (``*`` binds tighter, both
associate to the right), ``x^{y,z}`` annotates a weakening, and
``{ (a) t | (b) u }`` is a superposition.  Comments run from ``--`` to the end
of the line.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DuplicateDefinition, QmlSyntaxError, ShapeError, SourceSpan
from .syntax import (
    QBIT,
    UNIT,
    Apply,
    Case,
    Definition,
    Inl,
    Inr,
    Let,
    LetPair,
    Pair,
    Program,
    Sum,
    Super,
    Tensor,
    Term,
    Type,
    Unit,
    UnitIntro,
    Var,
    Weaken,
    free_vars,
    is_qfalse,
    is_qtrue,
    lub_size,
    type_size,
)

KEYWORDS = {
    "let", "in", "case", "case'", "of", "if", "if'", "then", "else", "inl", "inr",
    "qtrue", "qfalse",
}

FRESH_PREFIX = "_if"

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>--[^\n]*)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>=>|[(),:=|{}^*+\-'°])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | num | sym | eof
    text: str
    span: SourceSpan


def _tokenize(text: str, file: str) -> list[Token]:
    line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def span_at(offset: int, length: int) -> SourceSpan:
        lo, hi = 0, len(line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if line_starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return SourceSpan(file, lo + 1, offset - line_starts[lo] + 1, length)

    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QmlSyntaxError(f"unexpected character {text[pos]!r}", span_at(pos, 1))
        kind = m.lastgroup
        if kind in ("num", "ident", "sym"):
            tok_text = m.group()
            if tok_text == "°":
                tok_text = "'"
            tokens.append(Token(kind, tok_text, span_at(pos, m.end() - pos)))
        pos = m.end()
    tokens.append(Token("eof", "", span_at(len(text), 0)))
    return tokens


class _Parser:
    def __init__(self, text: str, file: str = "<input>"):
        self.text = text
        self.file = file
        self.tokens = _tokenize(text, file)
        self.pos = 0
        idents = {t.text for t in self.tokens if t.kind == "ident"}
        self._fresh_taken = idents
        self._fresh_counter = 0

    # -- token helpers

    def peek(self, k: int = 0) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.peek()
        self.pos = min(self.pos + 1, len(self.tokens) - 1)
        return tok

    def at(self, text: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.kind in ("sym", "ident") and tok.text == text

    def error(self, message: str, tok: Token | None = None) -> QmlSyntaxError:
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return QmlSyntaxError(f"{message}, found {found}", tok.span)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        return self.advance()

    def ident(self) -> Token:
        tok = self.peek()
        if tok.kind != "ident" or tok.text in KEYWORDS:
            raise self.error("expected an identifier")
        return self.advance()

    def fresh(self) -> str:
        while True:
            self._fresh_counter += 1
            name = f"{FRESH_PREFIX}{self._fresh_counter}"
            if name not in self._fresh_taken:
                self._fresh_taken.add(name)
                return name

    def strict_mark(self) -> bool:
        if self.at("'"):
            self.advance()
            return True
        return False

    # -- programs

    def program(self) -> Program:
        defs = []
        seen = set()
        while self.peek().kind != "eof":
            d = self.definition()
            if d.name in seen:
                raise DuplicateDefinition(f"function '{d.name}' defined twice", d.span)
            seen.add(d.name)
            defs.append(d)
        return Program(tuple(defs))

    def definition(self) -> Definition:
        name_tok = self.ident()
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                p = self.ident()
                self.expect(":")
                params.append((p.text, self.type_()))
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        self.expect(":")
        result = self.type_()
        self.expect("=")
        body = self.term()
        return Definition(name_tok.text, tuple(params), result, body, span=name_tok.span)

    # -- types

    def type_(self) -> Type:
        left = self.type1()
        if self.at("+"):
            self.advance()
            return Sum(left, self.type_())
        return left

    def type1(self) -> Type:
        left = self.type2()
        if self.at("*"):
            self.advance()
            return Tensor(left, self.type1())
        return left

    def type2(self) -> Type:
        tok = self.peek()
        if tok.kind == "num" and tok.text == "1":
            self.advance()
            return UNIT
        if tok.kind == "ident" and tok.text == "Q2":
            self.advance()
            return QBIT
        if self.at("("):
            self.advance()
            ty = self.type_()
            self.expect(")")
            return ty
        raise self.error("expected a type")

    # -- terms

    def term(self) -> Term:
        tok = self.peek()
        if tok.kind == "ident":
            if tok.text == "let":
                return self.let_()
            if tok.text in ("case", "case'"):
                return self.case_()
            if tok.text in ("if", "if'"):
                return self.if_()
        return self.app()

    def let_(self) -> Term:
        start = self.expect("let")
        if self.at("("):
            self.advance()
            x = self.ident().text
            self.expect(",")
            y = self.ident().text
            self.expect(")")
            if x == y:
                raise QmlSyntaxError(f"pattern binds '{x}' twice", start.span)
            self.expect("=")
            bound = self.term()
            self.expect("in")
            return LetPair(x, y, bound, self.term(), span=start.span)
        x = self.ident().text
        self.expect("=")
        bound = self.term()
        self.expect("in")
        return Let(x, bound, self.term(), span=start.span)

    def case_(self) -> Term:
        start = self.advance()
        strict = start.text.endswith("'") or self.strict_mark()
        scrut = self.term()
        self.expect("of")
        self.expect("{")
        self.expect("inl")
        x = self.ident().text
        self.expect("=>")
        left = self.term()
        self.expect("|")
        self.expect("inr")
        y = self.ident().text
        self.expect("=>")
        right = self.term()
        self.expect("}")
        return Case(scrut, x, left, y, right, strict, span=start.span)

    def if_(self) -> Term:
        start = self.advance()
        strict = start.text.endswith("'") or self.strict_mark()
        cond = self.term()
        self.expect("then")
        then = self.term()
        self.expect("else")
        other = self.term()
        return Case(cond, self.fresh(), then, self.fresh(), other, strict, span=start.span)

    def app(self) -> Term:
        tok = self.peek()
        if tok.kind == "ident" and tok.text not in KEYWORDS and self.at("(", 1):
            self.advance()
            self.advance()
            args = []
            if not self.at(")"):
                while True:
                    args.append(self.term())
                    if not self.at(","):
                        break
                    self.advance()
            self.expect(")")
            return self.postfix(Apply(tok.text, tuple(args), span=tok.span))
        return self.atom()

    def atom(self) -> Term:
        tok = self.peek()
        if tok.kind == "ident":
            if tok.text == "qtrue":
                self.advance()
                return self.postfix(Inl(UnitIntro(span=tok.span), span=tok.span))
            if tok.text == "qfalse":
                self.advance()
                return self.postfix(Inr(UnitIntro(span=tok.span), span=tok.span))
            if tok.text == "inl":
                self.advance()
                return Inl(self.atom(), span=tok.span)
            if tok.text == "inr":
                self.advance()
                return Inr(self.atom(), span=tok.span)
            if tok.text not in KEYWORDS:
                self.advance()
                var = Var(tok.text, span=tok.span)
                if self.at("^"):
                    var = Var(tok.text, self.weakening(), span=tok.span)
                return self.postfix(var)
            raise self.error("expected a term")
        if self.at("("):
            self.advance()
            if self.at(")"):
                self.advance()
                return self.postfix(UnitIntro(span=tok.span))
            first = self.term()
            if self.at(","):
                self.advance()
                second = self.term()
                self.expect(")")
                return self.postfix(Pair(first, second, span=tok.span))
            self.expect(")")
            return self.postfix(first)
        if self.at("{"):
            return self.postfix(self.superposition())
        raise self.error("expected a term")

    def postfix(self, t: Term) -> Term:
        while self.at("^"):
            span = self.peek().span
            t = Weaken(t, self.weakening(), span=span)
        return t

    def weakening(self) -> frozenset[str]:
        self.expect("^")
        self.expect("{")
        names = []
        if not self.at("}"):
            while True:
                names.append(self.ident().text)
                if not self.at(","):
                    break
                self.advance()
        self.expect("}")
        if len(set(names)) != len(names):
            raise self.error("duplicate name in weakening annotation")
        return frozenset(names)

    def superposition(self) -> Term:
        start = self.expect("{")
        a0 = self.amplitude()
        t0 = self.term()
        self.expect("|")
        a1 = self.amplitude()
        t1 = self.term()
        self.expect("}")
        if a0 == 0 and a1 == 0:
            raise QmlSyntaxError("superposition with both amplitudes zero", start.span)
        norm = math.sqrt(abs(a0) ** 2 + abs(a1) ** 2)
        if abs(norm - 1.0) > 1e-12:
            a0, a1 = a0 / norm, a1 / norm
        return Super(a0, t0, a1, t1, span=start.span)

    def amplitude(self) -> complex:
        """Optional ``(complexLit)`` prefix; 1 when absent."""
        if not self.at("("):
            return complex(1.0)
        k = 1
        parts: list[complex] = []
        while True:
            sign = 1.0
            if self.at("-", k) or self.at("+", k):
                sign = -1.0 if self.at("-", k) else 1.0
                k += 1
            elif parts:
                break
            tok = self.peek(k)
            if tok.kind == "num":
                if tok.text.endswith("i"):
                    parts.append(sign * 1j * float(tok.text[:-1]))
                else:
                    parts.append(complex(sign * float(tok.text)))
            elif tok.kind == "ident" and tok.text == "i" and (parts or k > 1):
                parts.append(sign * 1j)
            else:
                if parts or k > 1:
                    raise self.error("malformed amplitude", tok)
                return complex(1.0)  # "(" starts a term, not an amplitude
            k += 1
            if len(parts) == 2:
                break
        if not self.at(")", k):
            raise self.error("expected ')' after amplitude", self.peek(k))
        value = complex(sum(parts))
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            raise self.error("amplitude must be finite", self.peek(1))
        self.pos += k + 1
        return value


# ---------------------------------------------------------------------------
# public entry points


def parse_program(text: str, file: str = "<input>") -> Program:
    return _Parser(text, file).program()


def parse_term(text: str, file: str = "<input>") -> Term:
    p = _Parser(text, file)
    t = p.term()
    if p.peek().kind != "eof":
        raise p.error("unexpected trailing input")
    return t


def parse_type(text: str, file: str = "<input>") -> Type:
    p = _Parser(text, file)
    ty = p.type_()
    if p.peek().kind != "eof":
        raise p.error("unexpected trailing input")
    return ty


def parse_state_literal(text: str, ty: Type) -> np.ndarray:
    """Parse a value expression into a unit state vector of length 2^|ty|."""
    t = parse_term(text, "<input>")
    vec = value_vector(t, ty)
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        raise ShapeError("value expression denotes the zero vector")
    return vec / norm


_KET0 = np.array([1.0, 0.0], dtype=complex)
_KET1 = np.array([0.0, 1.0], dtype=complex)


def value_vector(t: Term, ty: Type) -> np.ndarray:
    """Unnormalized state of a closed value under the register encoding."""
    if isinstance(t, Weaken) and not t.names:
        return value_vector(t.body, ty)
    if isinstance(t, UnitIntro) and isinstance(ty, Unit):
        return np.ones(1, dtype=complex)
    if isinstance(t, Pair) and isinstance(ty, Tensor):
        return np.kron(value_vector(t.fst, ty.left), value_vector(t.snd, ty.right))
    if isinstance(t, (Inl, Inr)) and isinstance(ty, Sum):
        side = ty.left if isinstance(t, Inl) else ty.right
        v = value_vector(t.body, side)
        pad = lub_size(ty.left, ty.right) - type_size(side)
        zeros = np.zeros(2**pad, dtype=complex)
        zeros[0] = 1.0
        return np.kron(np.kron(v, zeros), _KET1 if isinstance(t, Inl) else _KET0)
    if isinstance(t, Super):
        return t.a0 * value_vector(t.t0, ty) + t.a1 * value_vector(t.t1, ty)
    raise ShapeError(f"value {render_term(t)!r} does not inhabit type {render_type(ty)}")


# ---------------------------------------------------------------------------
# printing


def render_type(ty: Type) -> str:
    if isinstance(ty, Unit):
        return "1"
    if ty == QBIT:
        return "Q2"
    if isinstance(ty, Sum):
        left = render_type(ty.left)
        if isinstance(ty.left, Sum) and ty.left != QBIT:
            left = f"({left})"
        return f"{left} + {render_type(ty.right)}"
    if isinstance(ty, Tensor):
        left, right = render_type(ty.left), render_type(ty.right)
        if isinstance(ty.left, Tensor) or (isinstance(ty.left, Sum) and ty.left != QBIT):
            left = f"({left})"
        if isinstance(ty.right, Sum) and ty.right != QBIT:
            right = f"({right})"
        return f"{left} * {right}"
    raise TypeError(f"not a type: {ty!r}")


def render_amplitude(a: complex) -> str:
    re_, im = a.real, a.imag
    if im == 0:
        return repr(re_)
    if re_ == 0:
        return f"{repr(im)}i"
    sign = "-" if im < 0 else "+"
    return f"{repr(re_)}{sign}{repr(abs(im))}i"


def _names(names) -> str:
    return "^{" + ",".join(sorted(names)) + "}"


def _is_atomic(t: Term) -> bool:
    if isinstance(t, (Let, LetPair, Case, Apply)):
        return False
    if isinstance(t, (Inl, Inr)):
        return isinstance(t.body, UnitIntro) or _is_atomic(t.body)
    if isinstance(t, Weaken):
        return not isinstance(t.body, Apply)
    return True


def _atom(t: Term) -> str:
    s = render_term(t)
    return s if _is_atomic(t) else f"({s})"


def render_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name if t.weakening is None else t.name + _names(t.weakening)
    if isinstance(t, UnitIntro):
        return "()"
    if is_qtrue(t):
        return "qtrue"
    if is_qfalse(t):
        return "qfalse"
    if isinstance(t, Inl):
        return "inl " + _atom(t.body)
    if isinstance(t, Inr):
        return "inr " + _atom(t.body)
    if isinstance(t, Pair):
        return f"({render_term(t.fst)}, {render_term(t.snd)})"
    if isinstance(t, Let):
        return f"let {t.x} = {render_term(t.bound)} in {render_term(t.body)}"
    if isinstance(t, LetPair):
        return f"let ({t.x}, {t.y}) = {render_term(t.bound)} in {render_term(t.body)}"
    if isinstance(t, Case):
        kw = "'" if t.strict else ""
        generated = t.x.startswith(FRESH_PREFIX) and t.y.startswith(FRESH_PREFIX)
        if generated and t.x not in free_vars(t.left) and t.y not in free_vars(t.right):
            return (
                f"if{kw} {render_term(t.scrutinee)} then {render_term(t.left)}"
                f" else {render_term(t.right)}"
            )
        return (
            f"case{kw} {render_term(t.scrutinee)} of {{inl {t.x} => {render_term(t.left)}"
            f" | inr {t.y} => {render_term(t.right)}}}"
        )
    if isinstance(t, Super):
        return (
            f"{{({render_amplitude(t.a0)}) {render_term(t.t0)}"
            f" | ({render_amplitude(t.a1)}) {render_term(t.t1)}}}"
        )
    if isinstance(t, Apply):
        return f"{t.fn}({', '.join(render_term(a) for a in t.args)})"
    if isinstance(t, Weaken):
        body = t.body
        bare = (isinstance(body, Var) and body.weakening is None) or (
            isinstance(body, (Inl, Inr)) and not isinstance(body.body, UnitIntro)
        )
        inner = render_term(body) if isinstance(body, Apply) else _atom(body)
        if bare and not inner.startswith("("):
            inner = f"({inner})"
        return inner + _names(t.names)
    raise TypeError(f"not a term: {t!r}")


def render_definition(d: Definition) -> str:
    params = ", ".join(f"{n}:{render_type(ty)}" for n, ty in d.params)
    return f"{d.name} ({params}):{render_type(d.result)} = {render_term(d.body)}"
