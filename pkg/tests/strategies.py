"""Seeded random generators for the property tests.

``random_syntax`` produces arbitrary (not necessarily well-typed) terms for
the printer round trip.  ``TypedGen`` builds terms together with the context
they consume, aiming for well-typed output in either strict or measuring
mode; callers still run the checker and resample on the rare rejection.
"""

from __future__ import annotations

import cmath
import functools
import math
import random

import numpy as np

from qmlc.fqc import MCU, Circuit, FqcMorphism, Permute
from qmlc.parser import parse_program
from qmlc.syntax import (
    QBIT,
    QFALSE,
    QTRUE,
    UNIT,
    Apply,
    Case,
    Inl,
    Inr,
    Let,
    LetPair,
    Pair,
    Sum,
    Super,
    Tensor,
    Type,
    Unit,
    UnitIntro,
    Var,
    Weaken,
    ctx_size,
    type_size,
)
from qmlc.typecheck import Checker

PRELUDE_SRC = """
qnot (x:Q2):Q2 = if' x then qfalse else qtrue
had (x:Q2):Q2 = if' x then { qfalse | (-1) qtrue } else { qfalse | qtrue }
"""


def prelude_checker() -> Checker:
    checker = Checker()
    for d in parse_program(PRELUDE_SRC).definitions:
        checker.check_definition(d)
    return checker


NAMES = ["x", "y", "z", "a", "b", "c", "p", "q", "r", "w1", "v'", "long_name"]


def amplitudes(rng: random.Random) -> tuple[complex, complex]:
    th = rng.uniform(0.15, 1.42)
    a0 = math.cos(th) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
    a1 = math.sin(th) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
    if rng.random() < 0.3:  # plain reals are common in programs
        a0, a1 = complex(math.cos(th)), complex(-math.sin(th) if rng.random() < 0.5 else math.sin(th))
    n = math.sqrt(abs(a0) ** 2 + abs(a1) ** 2)
    return a0 / n, a1 / n


def random_type(rng: random.Random, max_size: int = 3, depth: int = 3) -> Type:
    while True:
        ty = _rtype(rng, depth)
        if type_size(ty) <= max_size:
            return ty


def _rtype(rng, depth):
    r = rng.random()
    if depth <= 0 or r < 0.25:
        return QBIT if rng.random() < 0.7 else UNIT
    if r < 0.6:
        return Sum(_rtype(rng, depth - 1), _rtype(rng, depth - 1))
    return Tensor(_rtype(rng, depth - 1), _rtype(rng, depth - 1))


# ---------------------------------------------------------------------------
# arbitrary syntax


def random_syntax(rng: random.Random, depth: int):
    names = NAMES

    def weak():
        r = rng.random()
        if r < 0.7:
            return None
        return frozenset(rng.sample(names, rng.randint(0, 2)))

    def go(d):
        if d <= 0:
            k = rng.randrange(4)
            if k == 0:
                return Var(rng.choice(names), weak())
            return [UnitIntro(), QTRUE, QFALSE][k - 1]
        kind = rng.choice(
            ["var", "unit", "pair", "let", "letpair", "inl", "inr", "case", "if",
             "super", "apply", "weaken", "qtrue"]
        )
        if kind == "var":
            return Var(rng.choice(names), weak())
        if kind == "unit":
            return UnitIntro()
        if kind == "qtrue":
            return rng.choice([QTRUE, QFALSE])
        if kind == "pair":
            return Pair(go(d - 1), go(d - 1))
        if kind == "let":
            return Let(rng.choice(names), go(d - 1), go(d - 1))
        if kind == "letpair":
            x, y = rng.sample(names, 2)
            return LetPair(x, y, go(d - 1), go(d - 1))
        if kind == "inl":
            return Inl(go(d - 1))
        if kind == "inr":
            return Inr(go(d - 1))
        if kind == "case":
            return Case(go(d - 1), rng.choice(names), go(d - 1), rng.choice(names), go(d - 1),
                        rng.random() < 0.5)
        if kind == "if":
            return Case(go(d - 1), "_if1", go(d - 1), "_if2", go(d - 1), rng.random() < 0.5)
        if kind == "super":
            a0, a1 = amplitudes(rng)
            return Super(a0, go(d - 1), a1, go(d - 1))
        if kind == "apply":
            return Apply(rng.choice(["f", "had", "g2"]), tuple(go(d - 1) for _ in range(rng.randint(0, 3))))
        return Weaken(go(d - 1), frozenset(rng.sample(names, rng.randint(0, 2))))

    return go(depth)


# ---------------------------------------------------------------------------
# well-typed terms


class Stuck(Exception):
    pass


def admits_orth(ty: Type) -> bool:
    if isinstance(ty, Sum):
        return True
    if isinstance(ty, Tensor):
        return admits_orth(ty.left) or admits_orth(ty.right)
    return False


class TypedGen:
    def __init__(self, rng: random.Random, strict: bool, depth: int = 4):
        self.rng = rng
        self.strict = strict
        self.depth = depth
        self.k = 0

    def fresh(self) -> str:
        self.k += 1
        return f"v{self.k}"

    # -- helpers

    def _fits(self, ctx, ty, slack: int = 0) -> bool:
        return not self.strict or ctx_size(ctx) <= type_size(ty) - slack

    def _split(self, ctx, left_ty, right_ty, slack_left=0):
        """Distribute ``ctx`` over two components, sharing occasionally."""
        for _ in range(12):
            c1, c2 = [], []
            for v in ctx:
                r = self.rng.random()
                if r < 0.12:
                    c1.append(v)
                    c2.append(v)
                elif r < 0.56:
                    c1.append(v)
                else:
                    c2.append(v)
            if self._fits(c1, left_ty, slack_left) and self._fits(c2, right_ty):
                return c1, c2
        raise Stuck

    # -- terms

    def term(self, ctx, ty, depth=None):
        depth = self.depth if depth is None else depth
        rng = self.rng
        ctx = [v for v in ctx if type_size(v[1]) > 0 or rng.random() < 0.5]
        if not self._fits(ctx, ty):
            raise Stuck
        options = [("intro", 3)]
        if len(ctx) == 1 and ctx[0][1] == ty:
            options.append(("var", 6))
        if depth > 0:
            if any(isinstance(t, Tensor) for _, t in ctx):
                options.append(("letpair", 3))
            if any(isinstance(t, Sum) for _, t in ctx):
                options.append(("case", 3))
            options.append(("let", 1))
            if ty == QBIT:
                options.append(("apply", 1))
            if admits_orth(ty):
                options.append(("super", 2))
            if not self.strict and ctx:
                options.append(("weaken", 1))
        for _ in range(3):
            kind = rng.choices([o for o, _ in options], [w for _, w in options])[0]
            try:
                return getattr(self, "_" + kind)(ctx, ty, depth)
            except Stuck:
                continue
        raise Stuck

    def _var(self, ctx, ty, depth):
        (name, _), = ctx
        if not self.strict and self.rng.random() < 0.2:
            return Var(name, frozenset())
        return Var(name)

    def _intro(self, ctx, ty, depth):
        rng = self.rng
        d = max(depth - 1, 0)
        if isinstance(ty, Unit):
            live = [n for n, t in ctx if type_size(t) > 0]
            if live:
                if self.strict:
                    raise Stuck
                return Weaken(UnitIntro(), frozenset(live))
            return UnitIntro()
        if isinstance(ty, Sum):
            if rng.random() < 0.5:
                return Inl(self.term(ctx, ty.left, d))
            return Inr(self.term(ctx, ty.right, d))
        c1, c2 = self._split(ctx, ty.left, ty.right)
        return Pair(self.term(c1, ty.left, d), self.term(c2, ty.right, d))

    def _pick(self, ctx, cls):
        cands = [v for v in ctx if isinstance(v[1], cls)]
        return self.rng.choice(cands)

    def _letpair(self, ctx, ty, depth):
        x, xt = self._pick(ctx, Tensor)
        p, q = self.fresh(), self.fresh()
        rest = [v for v in ctx if v[0] != x]
        body = self.term(rest + [(p, xt.left), (q, xt.right)], ty, depth - 1)
        return LetPair(p, q, Var(x), body)

    def _case(self, ctx, ty, depth):
        x, xt = self._pick(ctx, Sum)
        rest = [v for v in ctx if v[0] != x]
        if not self.strict and self.rng.random() < 0.5:
            p, q = self.fresh(), self.fresh()
            left = self.term(rest + [(p, xt.left)], ty, depth - 1)
            right = self.term(rest + [(q, xt.right)], ty, depth - 1)
            return Case(Var(x), p, left, q, right, False)
        if type_size(xt.left) != type_size(xt.right) or not admits_orth(ty):
            raise Stuck
        p = self.fresh()
        q = p if xt.left == xt.right and self.rng.random() < 0.5 else self.fresh()
        left, right = self.orth(rest + [(p, xt.left)], rest + [(q, xt.right)], ty, depth - 1)
        return Case(Var(x), p, left, q, right, True)

    def _let(self, ctx, ty, depth):
        sigma = random_type(self.rng, 2, 2)
        y = self.fresh()
        c1, c2 = self._split(ctx, sigma, ty)
        bound = self.term(c1, sigma, depth - 1)
        body_ctx = c2 + [(y, sigma)]
        if not self._fits(body_ctx, ty):
            raise Stuck
        return Let(y, bound, self.term(body_ctx, ty, depth - 1))

    def _apply(self, ctx, ty, depth):
        return Apply(self.rng.choice(["had", "qnot"]), (self.term(ctx, QBIT, depth - 1),))

    def _super(self, ctx, ty, depth):
        t0, t1 = self.orth(ctx, ctx, ty, depth - 1)
        a0, a1 = amplitudes(self.rng)
        return Super(a0, t0, a1, t1)

    def _weaken(self, ctx, ty, depth):
        rng = self.rng
        live = [v for v in ctx if type_size(v[1]) > 0]
        if not live:
            raise Stuck
        drop = rng.sample(live, rng.randint(1, len(live)))
        keep = [v for v in ctx if v not in drop or rng.random() < 0.2]
        body = self.term(keep, ty, depth - 1)
        names = frozenset(n for n, _ in drop)
        if isinstance(body, Var) and body.weakening is None:
            return Var(body.name, names)
        return Weaken(body, names)

    # -- orthogonal pairs

    def orth(self, ctx_t, ctx_u, ty, depth):
        """Strict ``t`` and ``u`` with a derivable ``t`` orthogonal to ``u``."""
        rng = self.rng
        saved, self.strict = self.strict, True
        try:
            ctx_t = [v for v in ctx_t if type_size(v[1]) > 0]
            ctx_u = [v for v in ctx_u if type_size(v[1]) > 0]
            if not (self._fits(ctx_t, ty, 1) and self._fits(ctx_u, ty, 1)):
                raise Stuck
            d = max(depth - 1, 0)
            options = []
            if isinstance(ty, Sum):
                options += ["base", "base"]
                if admits_orth(ty.left) or admits_orth(ty.right):
                    options.append("cong")
            if isinstance(ty, Tensor):
                if admits_orth(ty.left):
                    options += ["left", "left"]
                if admits_orth(ty.right):
                    options += ["right", "right"]
            if depth > 0 and ctx_names_equal(ctx_t, ctx_u) and admits_orth(ty):
                options.append("super")
            for _ in range(3):
                kind = rng.choice(options)
                try:
                    return self._orth(kind, ctx_t, ctx_u, ty, d)
                except Stuck:
                    continue
            raise Stuck
        finally:
            self.strict = saved

    def _orth(self, kind, ctx_t, ctx_u, ty, d):
        rng = self.rng
        if kind == "base":
            if rng.random() < 0.5:
                return Inl(self.term(ctx_t, ty.left, d)), Inr(self.term(ctx_u, ty.right, d))
            return Inr(self.term(ctx_t, ty.right, d)), Inl(self.term(ctx_u, ty.left, d))
        if kind == "cong":
            sides = [s for s in ("l", "r") if admits_orth(ty.left if s == "l" else ty.right)]
            if rng.choice(sides) == "l":
                t, u = self.orth(ctx_t, ctx_u, ty.left, d)
                return Inl(t), Inl(u)
            t, u = self.orth(ctx_t, ctx_u, ty.right, d)
            return Inr(t), Inr(u)
        if kind in ("left", "right"):
            a, b = (ty.left, ty.right) if kind == "left" else (ty.right, ty.left)
            c1, c2 = self._split(ctx_t, a, b, slack_left=1)
            d1, d2 = self._split(ctx_u, a, b, slack_left=1)
            t0, u0 = self.orth(c1, d1, a, d)
            v, w = self.term(c2, b, d), self.term(d2, b, d)
            if kind == "left":
                return Pair(t0, v), Pair(u0, w)
            return Pair(v, t0), Pair(w, u0)
        if kind == "super":
            t0, t1 = self.orth(ctx_t, ctx_t, ty, d)
            l0, l1 = amplitudes(rng)
            phase = cmath.exp(1j * rng.uniform(0, 2 * math.pi)) if rng.random() < 0.5 else 1
            k0, k1 = -l1.conjugate() * phase, l0.conjugate() * phase
            return Super(l0, t0, l1, t1), Super(k0, t0, k1, t1)
        raise ValueError(kind)


def ctx_names_equal(a, b) -> bool:
    return [n for n, _ in a] == [n for n, _ in b] and [t for _, t in a] == [t for _, t in b]


def random_context(rng: random.Random, max_vars: int = 2, max_size: int = 3):
    ctx = []
    for i in range(rng.randint(0, max_vars)):
        ctx.append((f"g{i}", random_type(rng, 2, 2)))
    while ctx_size(ctx) > max_size:
        ctx.pop()
    return ctx


def generate_typed(rng: random.Random, checker: Checker, strict: bool, depth: int = 4,
                   max_wires: int = 10, max_size: int = 3, tries: int = 200):
    """Sample ``(ctx, typed term, morphism)`` accepted by the checker."""
    from qmlc.compiler import compile_term
    from qmlc.errors import QmlError

    for _ in range(tries):
        ctx = random_context(rng, 2, max_size)
        ty = random_type(rng, max_size, 3)
        gen = TypedGen(rng, strict, depth)
        try:
            t = gen.term(list(ctx), ty)
        except Stuck:
            continue
        try:
            tt = Checker(checker.functions).check_term(tuple(ctx), t, ty)
        except QmlError:
            continue
        if strict and not tt.strict:
            continue
        m = compile_term(tt)
        if m.wires > max_wires:
            continue
        return ctx, tt, m
    raise RuntimeError("generator failed to produce a well-typed term")


def generate_orth_pair(rng: random.Random, depth: int = 3, tries: int = 200):
    """Sample ``(ctx, t, u)`` over a shared context with ``t`` orthogonal to ``u``."""
    for _ in range(tries):
        ctx = random_context(rng, 2, 2)
        ty = random_type(rng, 3, 3)
        if not admits_orth(ty):
            continue
        gen = TypedGen(rng, True, depth)
        try:
            t, u = gen.orth(list(ctx), list(ctx), ty, depth)
        except Stuck:
            continue
        return ctx, ty, t, u
    raise RuntimeError("generator failed to produce an orthogonal pair")


# ---------------------------------------------------------------------------
# raw morphisms


def random_unitary(rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_circuit(rng: np.random.Generator, wires: int, gates: int = 6) -> Circuit:
    out = []
    for _ in range(gates):
        if wires > 1 and rng.random() < 0.2:
            out.append(Permute(tuple(int(i) for i in rng.permutation(wires))))
            continue
        target = int(rng.integers(wires))
        others = [w for w in range(wires) if w != target]
        k = int(rng.integers(0, len(others) + 1))
        ctl = rng.choice(others, size=k, replace=False) if k else []
        out.append(MCU(tuple((int(w), bool(rng.random() < 0.7)) for w in ctl), target, random_unitary(rng)))
    return Circuit(wires, tuple(out))


def random_morphism(rng: np.random.Generator, in_wires: int, max_wires: int = 3) -> FqcMorphism:
    n = int(rng.integers(max(in_wires, 1), max_wires + 1))
    heap = n - in_wires
    out = int(rng.integers(0, n + 1))
    return FqcMorphism(in_wires, heap, out, n - out, random_circuit(rng, n))


def type_orth_pair(checker: Checker, ctx, ty: Type, t, u):
    """Type ``t`` and ``u`` in ``ctx`` without exchange wrappers and derive t orthogonal to u."""
    from qmlc.typecheck import check_orthogonal

    typed = []
    for term in (t, u):
        c = Checker(checker.functions)
        c._reset()
        tt = c.infer(dict(ctx), term)
        c.unify(tt.type, ty)
        typed.append(c.finish(tt))
    return typed[0], typed[1], check_orthogonal(*typed)


@functools.lru_cache(maxsize=None)
def typed_samples(strict: bool, n: int = 1000, seed: int = 0, max_size: int = 3):
    rng = random.Random(seed)
    checker = prelude_checker()
    return tuple(generate_typed(rng, checker, strict, max_size=max_size) for _ in range(n))


@functools.lru_cache(maxsize=None)
def orth_samples(n: int = 1000, seed: int = 0):
    rng = random.Random(seed)
    checker = prelude_checker()
    out = []
    while len(out) < n:
        ctx, ty, t, u = generate_orth_pair(rng)
        out.append(type_orth_pair(checker, ctx, ty, t, u))
    return tuple(out)
