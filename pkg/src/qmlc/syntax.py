"""Abstract syntax of QML: types, terms, contexts and programs.

Everything here is an immutable value.  Derived forms (``qtrue``, ``qfalse``,
``if``/``if'``) never appear: the parser desugars them into ``Inl``/``Inr``
and ``Case``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Union

from .errors import SourceSpan, TypeClash

# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class Unit:
    def __str__(self) -> str:
        return "1"


@dataclass(frozen=True)
class Sum:
    left: "Type"
    right: "Type"


@dataclass(frozen=True)
class Tensor:
    left: "Type"
    right: "Type"


Type = Union[Unit, Sum, Tensor]

UNIT = Unit()
QBIT = Sum(UNIT, UNIT)


@lru_cache(maxsize=4096)
def type_size(ty: Type) -> int:
    """Number of qubits needed to store a value of ``ty``."""
    if isinstance(ty, Unit):
        return 0
    if isinstance(ty, Sum):
        return lub_size(ty.left, ty.right) + 1
    if isinstance(ty, Tensor):
        return type_size(ty.left) + type_size(ty.right)
    raise TypeError(f"not a QML type: {ty!r}")


def lub_size(left: Type, right: Type) -> int:
    return max(type_size(left), type_size(right))


def tensor_of(types: Iterable[Type]) -> Type:
    """Right-nested tensor of ``types``; the unit type when empty."""
    types = list(types)
    if not types:
        return UNIT
    out = types[-1]
    for ty in reversed(types[:-1]):
        out = Tensor(ty, out)
    return out


# ---------------------------------------------------------------------------
# terms

Name = str


def _span() -> SourceSpan | None:
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: Name
    weakening: frozenset[Name] | None = None
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class UnitIntro:
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Pair:
    fst: "Term"
    snd: "Term"
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Let:
    x: Name
    bound: "Term"
    body: "Term"
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class LetPair:
    x: Name
    y: Name
    bound: "Term"
    body: "Term"
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Inl:
    body: "Term"
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Inr:
    body: "Term"
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Case:
    scrutinee: "Term"
    x: Name
    left: "Term"
    y: Name
    right: "Term"
    strict: bool = False
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Super:
    """``{(a0) t0 | (a1) t1}``; amplitudes are python complex numbers."""

    a0: complex
    t0: "Term"
    a1: complex
    t1: "Term"
    span: SourceSpan | None = _span()

    def __post_init__(self):
        if self.a0 == 0 and self.a1 == 0:
            raise ValueError("superposition with both amplitudes zero")


@dataclass(frozen=True)
class Apply:
    fn: Name
    args: tuple["Term", ...]
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Weaken:
    """Explicit weakening ``t^{x,y}`` on a non-variable term."""

    body: "Term"
    names: frozenset[Name]
    span: SourceSpan | None = _span()


Term = Union[Var, UnitIntro, Pair, Let, LetPair, Inl, Inr, Case, Super, Apply, Weaken]

QTRUE = Inl(UnitIntro())
QFALSE = Inr(UnitIntro())


def is_qtrue(t: Term) -> bool:
    return isinstance(t, Inl) and isinstance(t.body, UnitIntro)


def is_qfalse(t: Term) -> bool:
    return isinstance(t, Inr) and isinstance(t.body, UnitIntro)


# ---------------------------------------------------------------------------
# contexts

Context = tuple[tuple[Name, Type], ...]


def ctx_names(ctx: Context) -> list[Name]:
    return [n for n, _ in ctx]


def ctx_lookup(ctx: Context, name: Name) -> Type | None:
    for n, ty in ctx:
        if n == name:
            return ty
    return None


def ctx_size(ctx: Context) -> int:
    return sum(type_size(ty) for _, ty in ctx)


def ctx_remove(ctx: Context, *names: Name) -> Context:
    return tuple((n, ty) for n, ty in ctx if n not in names)


def ctx_merge(
    gamma: Context,
    delta: Context,
    same: Callable[[Name, Type, Type], None] | None = None,
) -> Context:
    """Context merge ``gamma (x) delta``: shared names appear once.

    Order is first occurrence: gamma's entries, then delta's new names.
    ``same`` decides whether two types for a shared name agree; by default they
    must be equal.
    """
    out = list(gamma)
    seen = dict(gamma)
    for name, ty in delta:
        if name in seen:
            if same is not None:
                same(name, seen[name], ty)
            elif seen[name] != ty:
                raise TypeClash(f"variable '{name}' used at two different types")
        else:
            out.append((name, ty))
            seen[name] = ty
    return tuple(out)


# ---------------------------------------------------------------------------
# programs


@dataclass(frozen=True)
class Definition:
    name: Name
    params: Context
    result: Type
    body: Term
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Program:
    definitions: tuple[Definition, ...]

    def lookup(self, name: Name) -> Definition | None:
        for d in self.definitions:
            if d.name == name:
                return d
        return None

    def names(self) -> list[Name]:
        return [d.name for d in self.definitions]


# ---------------------------------------------------------------------------
# syntactic utilities


def free_vars(t: Term) -> set[Name]:
    """Free variables, including names mentioned in weakening annotations."""
    if isinstance(t, Var):
        return {t.name} | set(t.weakening or ())
    if isinstance(t, UnitIntro):
        return set()
    if isinstance(t, (Inl, Inr)):
        return free_vars(t.body)
    if isinstance(t, Weaken):
        return free_vars(t.body) | set(t.names)
    if isinstance(t, Pair):
        return free_vars(t.fst) | free_vars(t.snd)
    if isinstance(t, Let):
        return free_vars(t.bound) | (free_vars(t.body) - {t.x})
    if isinstance(t, LetPair):
        return free_vars(t.bound) | (free_vars(t.body) - {t.x, t.y})
    if isinstance(t, Case):
        return (
            free_vars(t.scrutinee)
            | (free_vars(t.left) - {t.x})
            | (free_vars(t.right) - {t.y})
        )
    if isinstance(t, Super):
        return free_vars(t.t0) | free_vars(t.t1)
    if isinstance(t, Apply):
        out: set[Name] = set()
        for a in t.args:
            out |= free_vars(a)
        return out
    raise TypeError(f"not a term: {t!r}")


def rename_free(t: Term, mapping: dict[Name, Name], bound: frozenset[Name] = frozenset()) -> Term:
    """Rename free occurrences of variables.

    Targets are assumed fresh, so no capture check is done.
    """

    def ren(n: Name) -> Name:
        return n if n in bound else mapping.get(n, n)

    def go(u: Term, b: frozenset[Name]) -> Term:
        return rename_free(u, mapping, b)

    if isinstance(t, Var):
        w = None if t.weakening is None else frozenset(ren(n) for n in t.weakening)
        return Var(ren(t.name), w, span=t.span)
    if isinstance(t, UnitIntro):
        return t
    if isinstance(t, Inl):
        return Inl(go(t.body, bound), span=t.span)
    if isinstance(t, Inr):
        return Inr(go(t.body, bound), span=t.span)
    if isinstance(t, Weaken):
        return Weaken(go(t.body, bound), frozenset(ren(n) for n in t.names), span=t.span)
    if isinstance(t, Pair):
        return Pair(go(t.fst, bound), go(t.snd, bound), span=t.span)
    if isinstance(t, Let):
        return Let(t.x, go(t.bound, bound), go(t.body, bound | {t.x}), span=t.span)
    if isinstance(t, LetPair):
        return LetPair(t.x, t.y, go(t.bound, bound), go(t.body, bound | {t.x, t.y}), span=t.span)
    if isinstance(t, Case):
        return Case(
            go(t.scrutinee, bound),
            t.x,
            go(t.left, bound | {t.x}),
            t.y,
            go(t.right, bound | {t.y}),
            t.strict,
            span=t.span,
        )
    if isinstance(t, Super):
        return Super(t.a0, go(t.t0, bound), t.a1, go(t.t1, bound), span=t.span)
    if isinstance(t, Apply):
        return Apply(t.fn, tuple(go(a, bound) for a in t.args), span=t.span)
    raise TypeError(f"not a term: {t!r}")


def alpha_eq(t: Term, u: Term) -> bool:
    """Equality up to consistent renaming of bound variables.

    Weakening annotations are compared as sets after the same renaming;
    amplitudes compare exactly.
    """
    counter = [0]

    def fresh() -> int:
        counter[0] += 1
        return counter[0]

    def key(env: dict[Name, int], n: Name):
        return ("bound", env[n]) if n in env else ("free", n)

    def keys(env, names):
        return None if names is None else frozenset(key(env, n) for n in names)

    def go(a: Term, b: Term, ea: dict, eb: dict) -> bool:
        if type(a) is not type(b):
            return False
        if isinstance(a, Var):
            return key(ea, a.name) == key(eb, b.name) and keys(ea, a.weakening) == keys(
                eb, b.weakening
            )
        if isinstance(a, UnitIntro):
            return True
        if isinstance(a, (Inl, Inr)):
            return go(a.body, b.body, ea, eb)
        if isinstance(a, Weaken):
            return keys(ea, a.names) == keys(eb, b.names) and go(a.body, b.body, ea, eb)
        if isinstance(a, Pair):
            return go(a.fst, b.fst, ea, eb) and go(a.snd, b.snd, ea, eb)
        if isinstance(a, Let):
            k = fresh()
            return go(a.bound, b.bound, ea, eb) and go(
                a.body, b.body, {**ea, a.x: k}, {**eb, b.x: k}
            )
        if isinstance(a, LetPair):
            k1, k2 = fresh(), fresh()
            if (a.x == a.y) != (b.x == b.y):
                return False
            return go(a.bound, b.bound, ea, eb) and go(
                a.body, b.body, {**ea, a.x: k1, a.y: k2}, {**eb, b.x: k1, b.y: k2}
            )
        if isinstance(a, Case):
            if a.strict != b.strict or not go(a.scrutinee, b.scrutinee, ea, eb):
                return False
            k1, k2 = fresh(), fresh()
            return go(a.left, b.left, {**ea, a.x: k1}, {**eb, b.x: k1}) and go(
                a.right, b.right, {**ea, a.y: k2}, {**eb, b.y: k2}
            )
        if isinstance(a, Super):
            return (
                a.a0 == b.a0
                and a.a1 == b.a1
                and go(a.t0, b.t0, ea, eb)
                and go(a.t1, b.t1, ea, eb)
            )
        if isinstance(a, Apply):
            return (
                a.fn == b.fn
                and len(a.args) == len(b.args)
                and all(go(x, y, ea, eb) for x, y in zip(a.args, b.args))
            )
        raise TypeError(f"not a term: {a!r}")

    return go(t, u, {}, {})
