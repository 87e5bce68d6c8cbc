"""Strict linear type checking and the orthogonality judgement.

Checking runs in two passes.  The first pass walks the term, computes the
context each subterm consumes (its free variables plus annotated weakenings),
and solves type equations by unification: ``inl t`` does not say what the
other summand is.  Unsolved summands default to ``1``.  The second pass works
on the resolved tree: it enforces the size-dependent rules (unused binders,
balanced sums under ``case'``), strictness of the branches of ``case'`` and of
superpositions, and derives the orthogonality side conditions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Union

from . import config
from .errors import (
    NotOrthogonal,
    QmlError,
    StrictnessViolation,
    TypeClash,
    TypeMismatch,
    UnboundVariable,
    UnbalancedSum,
    UnknownFunction,
    UnusedVariable,
    InvalidAmplitude,
)
from .parser import render_term, render_type
from .syntax import (
    UNIT,
    Apply,
    Case,
    Context,
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
    alpha_eq,
    ctx_merge,
    ctx_names,
    ctx_remove,
    rename_free,
    type_size,
)


@dataclass(frozen=True, eq=False)
class TypedTerm:
    """A typing derivation, one node per rule application.

    ``rule`` is one of: var, unit, weak, pair, let, letpair, inl, inr, case,
    case_strict, super, apply, exchange.  ``names`` holds binder names for
    let/letpair/case nodes and the weakened names for weak nodes.
    """

    term: Term
    rule: str
    context: Context
    type: Type
    strict: bool
    children: tuple["TypedTerm", ...] = ()
    names: tuple[str, ...] = ()
    orth: "OrthDerivation | None" = None

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


# ---------------------------------------------------------------------------
# orthogonality derivations


@dataclass(frozen=True, eq=False)
class BaseInlInr:
    left: TypedTerm
    right: TypedTerm
    side: str  # "inl_inr" or "inr_inl"


@dataclass(frozen=True, eq=False)
class CongInl:
    left: TypedTerm
    right: TypedTerm
    sub: "OrthDerivation"


@dataclass(frozen=True, eq=False)
class CongInr:
    left: TypedTerm
    right: TypedTerm
    sub: "OrthDerivation"


@dataclass(frozen=True, eq=False)
class PairLeft:
    """(t, v) orthogonal to (u, w) because t is orthogonal to u."""

    left: TypedTerm
    right: TypedTerm
    sub: "OrthDerivation"

    @property
    def v(self) -> TypedTerm:
        return self.left.children[1]

    @property
    def w(self) -> TypedTerm:
        return self.right.children[1]


@dataclass(frozen=True, eq=False)
class PairRight:
    """(v, t) orthogonal to (w, u) because t is orthogonal to u."""

    left: TypedTerm
    right: TypedTerm
    sub: "OrthDerivation"

    @property
    def v(self) -> TypedTerm:
        return self.left.children[0]

    @property
    def w(self) -> TypedTerm:
        return self.right.children[0]


@dataclass(frozen=True, eq=False)
class SuperRule:
    left: TypedTerm
    right: TypedTerm
    sub: "OrthDerivation"
    l0: complex
    l1: complex
    k0: complex
    k1: complex

    @property
    def condition(self) -> complex:
        """conj(l0) k0 + conj(l1) k1, which must vanish."""
        return self.l0.conjugate() * self.k0 + self.l1.conjugate() * self.k1


OrthDerivation = Union[BaseInlInr, CongInl, CongInr, PairLeft, PairRight, SuperRule]


def orth_nodes(d: OrthDerivation):
    """All derivations in the tree rooted at ``d``, root first."""
    yield d
    sub = getattr(d, "sub", None)
    if sub is not None:
        yield from orth_nodes(sub)


def strip(tt: TypedTerm) -> TypedTerm:
    """Drop empty weakenings, which are semantically the identity."""
    while tt.rule == "weak" and not tt.names:
        tt = tt.children[0]
    return tt


def check_orthogonal(t: TypedTerm, u: TypedTerm) -> OrthDerivation:
    """Derive ``t`` orthogonal to ``u``; NotOrthogonal names the outermost pair."""
    try:
        return _orth(t, u)
    except NotOrthogonal as err:
        raise NotOrthogonal(
            f"cannot derive {render_term(t.term)} orthogonal to {render_term(u.term)}"
            f" ({err.message})",
            t.term.span or u.term.span,
        ) from None


def _orth(t: TypedTerm, u: TypedTerm) -> OrthDerivation:
    t, u = strip(t), strip(u)
    if not (t.strict and u.strict):
        raise StrictnessViolation(
            "orthogonality is only defined between strict terms", t.term.span
        )
    if t.type != u.type:
        raise NotOrthogonal(
            f"{render_term(t.term)} and {render_term(u.term)} have different types",
            t.term.span,
        )
    if t.rule == "inl" and u.rule == "inr":
        return BaseInlInr(t, u, "inl_inr")
    if t.rule == "inr" and u.rule == "inl":
        return BaseInlInr(t, u, "inr_inl")
    if t.rule == u.rule == "inl":
        return CongInl(t, u, _orth(t.children[0], u.children[0]))
    if t.rule == u.rule == "inr":
        return CongInr(t, u, _orth(t.children[0], u.children[0]))
    if t.rule == u.rule == "pair":
        try:
            return PairLeft(t, u, _orth(t.children[0], u.children[0]))
        except NotOrthogonal:
            pass
        return PairRight(t, u, _orth(t.children[1], u.children[1]))
    if t.rule == u.rule == "super":
        a, b = t.term, u.term
        if alpha_eq(a.t0, b.t0) and alpha_eq(a.t1, b.t1):
            d = SuperRule(t, u, t.orth, a.a0, a.a1, b.a0, b.a1)
            if abs(d.condition) <= config.tolerance():
                return d
    raise NotOrthogonal(
        f"no rule relates {render_term(t.term)} and {render_term(u.term)}", t.term.span
    )


# ---------------------------------------------------------------------------
# the checker


class _Meta:
    _ids = itertools.count(1)

    def __init__(self):
        self.id = next(self._ids)

    def __repr__(self) -> str:
        return f"?{self.id}"


@dataclass(frozen=True)
class CheckedDefinition:
    definition: Definition
    typed: TypedTerm


class Checker:
    """Checks terms against a table of previously checked definitions."""

    def __init__(self, functions: dict[str, CheckedDefinition] | None = None):
        self.functions = dict(functions or {})
        self._fresh = itertools.count(1)
        self._reset()

    def _reset(self):
        self.subst: dict[int, Type] = {}
        self.pending: list[tuple[str, Type, object, str]] = []

    # -- unification

    def resolve(self, ty):
        while isinstance(ty, _Meta) and ty.id in self.subst:
            ty = self.subst[ty.id]
        return ty

    def zonk(self, ty) -> Type:
        ty = self.resolve(ty)
        if isinstance(ty, _Meta):
            return UNIT
        if isinstance(ty, Sum):
            return Sum(self.zonk(ty.left), self.zonk(ty.right))
        if isinstance(ty, Tensor):
            return Tensor(self.zonk(ty.left), self.zonk(ty.right))
        return ty

    def show(self, ty) -> str:
        ty = self.resolve(ty)
        if isinstance(ty, _Meta):
            return "?"
        if isinstance(ty, Sum):
            return f"({self.show(ty.left)} + {self.show(ty.right)})"
        if isinstance(ty, Tensor):
            return f"({self.show(ty.left)} * {self.show(ty.right)})"
        return render_type(ty)

    def _occurs(self, meta: _Meta, ty) -> bool:
        ty = self.resolve(ty)
        if ty is meta:
            return True
        if isinstance(ty, (Sum, Tensor)):
            return self._occurs(meta, ty.left) or self._occurs(meta, ty.right)
        return False

    def _unify(self, a, b) -> bool:
        a, b = self.resolve(a), self.resolve(b)
        if a is b:
            return True
        if isinstance(a, _Meta) or isinstance(b, _Meta):
            meta, other = (a, b) if isinstance(a, _Meta) else (b, a)
            if self._occurs(meta, other):
                return False
            self.subst[meta.id] = other
            return True
        if isinstance(a, Unit) and isinstance(b, Unit):
            return True
        if type(a) is type(b) and isinstance(a, (Sum, Tensor)):
            return self._unify(a.left, b.left) and self._unify(a.right, b.right)
        return False

    def unify(self, a, b, span=None, what: str = "type mismatch"):
        if not self._unify(a, b):
            raise TypeMismatch(f"{what}: {self.show(a)} vs {self.show(b)}", span)

    def merge(self, gamma: Context, delta: Context, span=None) -> Context:
        def same(name, a, b):
            if not self._unify(a, b):
                raise TypeClash(
                    f"variable '{name}' used at {self.show(a)} and {self.show(b)}", span
                )

        return ctx_merge(gamma, delta, same)

    def expect_used(self, name: str, ty, span, where: str):
        self.pending.append((name, ty, span, where))

    # -- pass one

    def infer(self, env: dict, t: Term) -> TypedTerm:
        if isinstance(t, Var):
            if t.name not in env:
                raise UnboundVariable(f"unbound variable '{t.name}'", t.span)
            node = TypedTerm(Var(t.name, span=t.span), "var", ((t.name, env[t.name]),), env[t.name], True)
            if t.weakening is None:
                return node
            return self._weaken(env, t, node, t.weakening)
        if isinstance(t, UnitIntro):
            return TypedTerm(t, "unit", (), UNIT, True)
        if isinstance(t, Weaken):
            return self._weaken(env, t, self.infer(env, t.body), t.names)
        if isinstance(t, Pair):
            a, b = self.infer(env, t.fst), self.infer(env, t.snd)
            ctx = self.merge(a.context, b.context, t.span)
            return TypedTerm(t, "pair", ctx, Tensor(a.type, b.type), a.strict and b.strict, (a, b))
        if isinstance(t, (Inl, Inr)):
            a = self.infer(env, t.body)
            if isinstance(t, Inl):
                return TypedTerm(t, "inl", a.context, Sum(a.type, _Meta()), a.strict, (a,))
            return TypedTerm(t, "inr", a.context, Sum(_Meta(), a.type), a.strict, (a,))
        if isinstance(t, Let):
            a = self.infer(env, t.bound)
            b = self.infer({**env, t.x: a.type}, t.body)
            return self._let(t, a, b)
        if isinstance(t, LetPair):
            a = self.infer(env, t.bound)
            m1, m2 = _Meta(), _Meta()
            self.unify(a.type, Tensor(m1, m2), t.span, "pattern (x, y) needs a tensor")
            b = self.infer({**env, t.x: m1, t.y: m2}, t.body)
            delta = b.context
            for name, ty in ((t.x, m1), (t.y, m2)):
                if name in ctx_names(delta):
                    delta = ctx_remove(delta, name)
                else:
                    self.expect_used(name, ty, t.span, "let-bound")
            ctx = self.merge(a.context, delta, t.span)
            return TypedTerm(t, "letpair", ctx, b.type, a.strict and b.strict, (a, b), (t.x, t.y))
        if isinstance(t, Case):
            return self._case(env, t)
        if isinstance(t, Super):
            if t.a0 == 0 or t.a1 == 0:
                raise InvalidAmplitude("superposition amplitudes must be nonzero", t.span)
            a, b = self.infer(env, t.t0), self.infer(env, t.t1)
            self.unify(a.type, b.type, t.span, "superposed terms differ in type")
            ctx = self._additive(a.context, b.context, t.span)
            return TypedTerm(t, "super", ctx, a.type, True, (a, b))
        if isinstance(t, Apply):
            return self._apply(env, t)
        raise TypeError(f"not a term: {t!r}")

    def _weaken(self, env, t, node: TypedTerm, names) -> TypedTerm:
        delta = []
        for n in sorted(names):
            if n not in env:
                raise UnboundVariable(f"weakening names unbound variable '{n}'", t.span)
            delta.append((n, env[n]))
        ctx = self.merge(node.context, tuple(delta), t.span)
        return TypedTerm(
            t, "weak", ctx, node.type, node.strict and not names, (node,), tuple(sorted(names))
        )

    def _let(self, t, a: TypedTerm, b: TypedTerm) -> TypedTerm:
        if t.x in ctx_names(b.context):
            delta = ctx_remove(b.context, t.x)
        else:
            self.expect_used(t.x, a.type, t.span, "let-bound")
            delta = b.context
        ctx = self.merge(a.context, delta, t.span)
        return TypedTerm(t, "let", ctx, b.type, a.strict and b.strict, (a, b), (t.x,))

    def _additive(self, left: Context, right: Context, span) -> Context:
        """Shared context of two alternatives; size-0 variables may be missing."""
        ln, rn = set(ctx_names(left)), set(ctx_names(right))
        for name, ty in left:
            if name not in rn:
                self.expect_used(name, ty, span, "unused in the other branch, but")
        for name, ty in right:
            if name not in ln:
                self.expect_used(name, ty, span, "unused in the other branch, but")
        return self.merge(left, right, span)

    def _case(self, env, t: Case) -> TypedTerm:
        c = self.infer(env, t.scrutinee)
        m1, m2 = _Meta(), _Meta()
        self.unify(c.type, Sum(m1, m2), t.span, "case scrutinee needs a sum type")
        left = self.infer({**env, t.x: m1}, t.left)
        right = self.infer({**env, t.y: m2}, t.right)
        self.unify(left.type, right.type, t.span, "case branches differ in type")
        dl, dr = left.context, right.context
        if t.x in ctx_names(dl):
            dl = ctx_remove(dl, t.x)
        else:
            self.expect_used(t.x, m1, t.span, "case-bound")
        if t.y in ctx_names(dr):
            dr = ctx_remove(dr, t.y)
        else:
            self.expect_used(t.y, m2, t.span, "case-bound")
        if t.x in ctx_names(dr) or t.y in ctx_names(dl):
            raise TypeClash("case binder shadows a variable used in the other branch", t.span)
        delta = self._additive(dl, dr, t.span)
        ctx = self.merge(c.context, delta, t.span)
        rule = "case_strict" if t.strict else "case"
        strict = c.strict if t.strict else False
        return TypedTerm(t, rule, ctx, left.type, strict, (c, left, right), (t.x, t.y))

    def _apply(self, env, t: Apply) -> TypedTerm:
        checked = self.functions.get(t.fn)
        if checked is None:
            raise UnknownFunction(f"unknown function '{t.fn}'", t.span)
        d = checked.definition
        if len(t.args) != len(d.params):
            raise TypeMismatch(
                f"'{t.fn}' expects {len(d.params)} argument(s), got {len(t.args)}", t.span
            )
        args = []
        for arg, (pname, pty) in zip(t.args, d.params):
            a = self.infer(env, arg)
            self.unify(a.type, pty, arg.span or t.span, f"argument '{pname}' of '{t.fn}'")
            args.append(a)
        k = next(self._fresh)
        fresh = {p: f"{p}%{k}" for p, _ in d.params}
        body_term = rename_free(d.body, fresh)
        node = self.infer({fresh[p]: ty for p, ty in d.params}, body_term)
        self.unify(node.type, d.result, t.span)
        for (p, _), arg, a in reversed(list(zip(d.params, t.args, args))):
            node = self._let(Let(fresh[p], arg, node.term, span=t.span), a, node)
        return TypedTerm(t, "apply", node.context, node.type, node.strict, (node,))

    # -- pass two

    def finish(self, tt: TypedTerm) -> TypedTerm:
        for name, ty, span, where in self.pending:
            ty = self.zonk(ty)
            if type_size(ty) > 0:
                raise UnusedVariable(
                    f"{where} variable '{name}' : {render_type(ty)} is never used"
                    " (annotate a weakening to discard it)",
                    span,
                )
        return self._finalize(tt)

    def _finalize(self, tt: TypedTerm) -> TypedTerm:
        children = tuple(self._finalize(c) for c in tt.children)
        ctx = tuple((n, self.zonk(ty)) for n, ty in tt.context)
        node = replace(tt, context=ctx, type=self.zonk(tt.type), children=children)
        span = tt.term.span
        if node.rule == "case_strict":
            scrut, left, right = children
            if not (left.strict and right.strict):
                raise StrictnessViolation("branches of case' must be strict", span)
            sigma, tau = scrut.type.left, scrut.type.right
            if type_size(sigma) != type_size(tau):
                raise UnbalancedSum(
                    f"case' over {render_type(scrut.type)} needs summands of equal size", span
                )
            node = replace(node, orth=check_orthogonal(left, right))
        elif node.rule == "super":
            left, right = children
            if not (left.strict and right.strict):
                raise StrictnessViolation("superposed terms must be strict", span)
            a0, a1 = tt.term.a0, tt.term.a1
            if abs(abs(a0) ** 2 + abs(a1) ** 2 - 1) > config.tolerance():
                raise InvalidAmplitude("superposition amplitudes are not normalized", span)
            node = replace(node, orth=check_orthogonal(left, right))
        return node

    # -- entry points

    def check_term(self, ctx: Context, t: Term, result: Type | None = None) -> TypedTerm:
        self._reset()
        names = ctx_names(ctx)
        if len(set(names)) != len(names):
            raise TypeClash("context assigns a variable twice")
        tt = self.infer(dict(ctx), t)
        if result is not None:
            self.unify(tt.type, result, t.span, "result type")
        used = set(ctx_names(tt.context))
        for name, ty in ctx:
            if name not in used:
                self.expect_used(name, ty, t.span, "context")
        tt = self.finish(tt)
        if ctx_names(tt.context) != names:
            tt = TypedTerm(tt.term, "exchange", tuple(ctx), tt.type, tt.strict, (tt,))
        return tt

    def check_definition(self, d: Definition) -> TypedTerm:
        try:
            tt = self.check_term(d.params, d.body, d.result)
        except QmlError as err:
            err.function = d.name
            raise
        self.functions[d.name] = CheckedDefinition(d, tt)
        return tt


def check_program(prog: Program) -> list[tuple[str, TypedTerm]]:
    checker = Checker()
    return [(d.name, checker.check_definition(d)) for d in prog.definitions]


def checker_for(prog: Program) -> Checker:
    checker = Checker()
    for d in prog.definitions:
        checker.check_definition(d)
    return checker


def infer_term(sigma: Program | Checker | None, ctx: Context, t: Term) -> TypedTerm:
    """Check ``t`` under context ``ctx``; every variable of ``ctx`` must be consumed."""
    if isinstance(sigma, Checker):
        checker = Checker(sigma.functions)
    elif isinstance(sigma, Program):
        checker = Checker(checker_for(sigma).functions)
    else:
        checker = Checker()
    return checker.check_term(tuple(ctx), t)
