"""Compilation of typing derivations to FQC morphisms.

Value encoding: a value of ``s + t`` occupies ``|s u t|`` data wires followed
by one tag wire; ``inl`` sets the tag to ``|1>`` and ``inr`` to ``|0>``, and
data of the smaller summand is padded with trailing zero wires.  A pair puts
its left component's wires before its right component's.  A context occupies
the wires of its variables in context order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import config
from .errors import NotNormalized, ShapeMismatch
from .fqc import (
    Circuit,
    FqcMorphism,
    MCU,
    X,
    choice,
    compose,
    compose_all,
    discard,
    fused,
    identity,
    isometry,
    order_to_mapping,
    perm_gate,
    prepare,
    prepare_state,
    reorder as reorder_wires,
    tensor,
    unitary,
)
from .parser import render_type
from .syntax import (
    QBIT,
    QFALSE,
    QTRUE,
    UNIT,
    Case,
    Context,
    Program,
    Sum,
    Super,
    Type,
    ctx_merge,
    ctx_names,
    ctx_remove,
    ctx_size,
    lub_size,
    tensor_of,
    type_size,
)
from .typecheck import (
    BaseInlInr,
    CongInl,
    CongInr,
    OrthDerivation,
    PairLeft,
    PairRight,
    SuperRule,
    TypedTerm,
    check_program,
    strip,
)

# ---------------------------------------------------------------------------
# structural morphisms


def _offsets(ctx: Context) -> dict[str, range]:
    out, pos = {}, 0
    for name, ty in ctx:
        n = type_size(ty)
        out[name] = range(pos, pos + n)
        pos += n
    return out


def reorder(src: Context, dst: Context) -> FqcMorphism:
    """Routes ``src``'s variables into ``dst``'s order.

    Variables present on one side only must have size 0.
    """
    spos = _offsets(src)
    have = {n for n, ty in src if type_size(ty) > 0}
    want = {n for n, ty in dst if type_size(ty) > 0}
    if have != want:
        raise ShapeMismatch(f"cannot reorder {sorted(have)} into {sorted(want)}")
    order = [w for name, ty in dst if type_size(ty) > 0 for w in spos[name]]
    return reorder_wires(order)


def contraction(gamma: Context, delta: Context) -> FqcMorphism:
    """Sharing ``[gamma (x) delta] -> [gamma, delta]`` by CNOT fan-out."""
    merged = ctx_merge(gamma, delta)
    pos = _offsets(merged)
    gnames = set(ctx_names(gamma))
    shared = [(n, ty) for n, ty in delta if n in gnames]
    n_in = ctx_size(merged)
    heap = ctx_size(tuple(shared))
    wires = n_in + heap
    gates = []
    copy: dict[str, list[int]] = {}
    k = n_in
    for name, ty in shared:
        copy[name] = []
        for w in pos[name]:
            gates.append(MCU(((w, True),), k, X))
            copy[name].append(k)
            k += 1
    order = [w for name, _ in gamma for w in pos[name]]
    for name, _ in delta:
        order += copy[name] if name in copy else list(pos[name])
    gates += perm_gate(order_to_mapping(order))
    return FqcMorphism(n_in, heap, wires, 0, Circuit(wires, tuple(gates)))


def weakening(gamma: Context, delta: Context) -> FqcMorphism:
    """``[gamma (x) delta] -> [gamma]``; wires only in ``delta`` become garbage."""
    merged = ctx_merge(gamma, delta)
    pos = _offsets(merged)
    gnames = set(ctx_names(gamma))
    keep = [w for name, _ in gamma for w in pos[name]]
    drop = [w for name, _ in delta if name not in gnames for w in pos[name]]
    n = ctx_size(merged)
    return FqcMorphism(n, 0, len(keep), len(drop), Circuit(n, perm_gate(order_to_mapping(keep + drop))))


def padding(sigma: Type, tau: Type) -> FqcMorphism:
    """``[sigma] -> [sigma u tau]`` by appending zero wires."""
    return tensor(identity(type_size(sigma)), prepare([0] * (lub_size(sigma, tau) - type_size(sigma))))


def passthrough(k: int) -> FqcMorphism:
    """Heap wires that go straight to garbage; used to stretch heaps."""
    return FqcMorphism(0, k, 0, k, Circuit(k))


def prepare_qubit(l_true: complex, l_false: complex) -> np.ndarray:
    """Unitary ``U`` with ``U|0> = l_false|0> + l_true|1>``."""
    norm = abs(l_true) ** 2 + abs(l_false) ** 2
    if abs(norm - 1) > config.tolerance():
        raise NotNormalized(f"amplitudes ({l_true}, {l_false}) have squared norm {norm}")
    return np.array(
        [[l_false, -np.conj(l_true)], [l_true, np.conj(l_false)]], dtype=complex
    )


# ---------------------------------------------------------------------------
# orthogonality witnesses


@dataclass(frozen=True, eq=False)
class OrthWitness:
    """``[t] = psi . (f (x) |1>)`` and ``[u] = psi . (g (x) |0>)``, tag last."""

    s_wires: int
    f: FqcMorphism
    f_ctx: Context
    g: FqcMorphism
    g_ctx: Context
    psi: Circuit


def build_orth_witness(d: OrthDerivation) -> OrthWitness:
    t, u = d.left, d.right
    if isinstance(d, BaseInlInr):
        t0, u0 = t.children[0], u.children[0]
        sigma, tau = t.type.left, t.type.right
        s = lub_size(sigma, tau)
        f = compose(compile_typed(t0), padding(t0.type, u0.type))
        g = compose(compile_typed(u0), padding(u0.type, t0.type))
        if d.side == "inl_inr":
            psi = Circuit(s + 1)
        else:
            psi = Circuit(s + 1, (MCU((), s, X),))
        return OrthWitness(s, f, t.context, g, u.context, psi)

    if isinstance(d, (CongInl, CongInr)):
        w = build_orth_witness(d.sub)
        inner = t.children[0].type
        other = t.type.right if isinstance(d, CongInl) else t.type.left
        p = lub_size(inner, other) - type_size(inner)
        q = 1 if isinstance(d, CongInl) else 0
        extra = prepare([q] + [0] * p)
        s = w.s_wires + 1 + p
        n = s + 1
        # [S, q, H, t'] -> [S, t', H, q]
        order = list(range(w.s_wires)) + [n - 1] + list(range(w.s_wires + 1, n - 1)) + [w.s_wires]
        gates = perm_gate(order_to_mapping(order)) + w.psi.embed(n, 0).gates
        return OrthWitness(
            s, tensor(w.f, extra), w.f_ctx, tensor(w.g, extra), w.g_ctx, Circuit(n, gates)
        )

    if isinstance(d, PairLeft):
        w = build_orth_witness(d.sub)
        t0, v = t.children
        u0, wv = u.children
        tau = type_size(v.type)
        f = compose(contraction(t0.context, v.context), tensor(w.f, compile_typed(v)))
        g = compose(contraction(u0.context, wv.context), tensor(w.g, compile_typed(wv)))
        s = w.s_wires + tau
        n = s + 1
        # [S, tau, tag] -> [S, tag, tau]
        order = list(range(w.s_wires)) + [n - 1] + list(range(w.s_wires, n - 1))
        gates = perm_gate(order_to_mapping(order)) + w.psi.embed(n, 0).gates
        return OrthWitness(s, f, t.context, g, u.context, Circuit(n, gates))

    if isinstance(d, PairRight):
        w = build_orth_witness(d.sub)
        v, t0 = t.children
        wv, u0 = u.children
        tau = type_size(v.type)
        f = compose(contraction(v.context, t0.context), tensor(compile_typed(v), w.f))
        g = compose(contraction(wv.context, u0.context), tensor(compile_typed(wv), w.g))
        s = w.s_wires + tau
        return OrthWitness(s, f, t.context, g, u.context, w.psi.embed(s + 1, tau))

    if isinstance(d, SuperRule):
        w = build_orth_witness(d.sub)
        s = w.s_wires
        lctx = t.context
        h = s - ctx_size(lctx)
        # f' pads the context with the heap both sub-witness maps need
        f = tensor(identity(ctx_size(lctx)), prepare([0] * h))
        g = compose(reorder(u.context, lctx), f)
        phi_f = compose(reorder(lctx, w.f_ctx), w.f)
        phi_g = compose(reorder(lctx, w.g_ctx), w.g)
        if phi_f.wires != s or phi_g.wires != s:
            raise ShapeMismatch("superposition witness maps disagree in size")
        n = s + 1
        rot = np.array([[d.k1, d.l1], [d.k0, d.l0]], dtype=complex)
        gates = [MCU((), n - 1, rot)]
        gates += perm_gate(order_to_mapping([n - 1] + list(range(n - 1))))
        gates += choice(phi_f.circuit, phi_g.circuit).gates
        gates += perm_gate(order_to_mapping(list(range(1, n)) + [0]))
        gates += w.psi.gates
        return OrthWitness(s, f, lctx, g, u.context, Circuit(n, tuple(gates)))

    raise TypeError(f"not an orthogonality derivation: {d!r}")


def witness_residuals(d: OrthDerivation, w: OrthWitness | None = None) -> tuple[float, float]:
    """Max deviation of both decomposition equations, on isometries."""
    w = build_orth_witness(d) if w is None else w
    psi = unitary(w.psi)
    lhs_t = isometry(compile_typed(d.left))
    lhs_u = isometry(compile_typed(d.right))
    rhs_t = isometry(compose_all(tensor(w.f, prepare([1])), psi))
    rhs_u = isometry(compose_all(tensor(w.g, prepare([0])), psi))
    return float(np.max(np.abs(lhs_t - rhs_t))), float(np.max(np.abs(lhs_u - rhs_u)))


# ---------------------------------------------------------------------------
# rule-by-rule compilation

_fresh = itertools.count(1)


def compile_typed(tt: TypedTerm) -> FqcMorphism:
    rule = tt.rule
    if rule == "var":
        return identity(type_size(tt.type))
    if rule == "unit":
        return identity(0)
    if rule == "weak":
        child = tt.children[0]
        delta = tuple((n, ty) for n, ty in tt.context if n in tt.names)
        w = weakening(child.context, delta)
        return _from_ctx(tt, ctx_merge(child.context, delta), compose(w, compile_typed(child)))
    if rule == "pair":
        a, b = tt.children
        m = compose(contraction(a.context, b.context), tensor(compile_typed(a), compile_typed(b)))
        return _from_ctx(tt, ctx_merge(a.context, b.context), m)
    if rule in ("let", "letpair"):
        a, b = tt.children
        binders = tuple(zip(tt.names, _components(a.type, len(tt.names))))
        delta = ctx_remove(b.context, *tt.names)
        m = compose_all(
            contraction(a.context, delta),
            tensor(compile_typed(a), identity(ctx_size(delta))),
            reorder(binders + delta, b.context),
            compile_typed(b),
        )
        return _from_ctx(tt, ctx_merge(a.context, delta), m)
    if rule in ("inl", "inr"):
        a = tt.children[0]
        other = tt.type.right if rule == "inl" else tt.type.left
        p = lub_size(a.type, other) - type_size(a.type)
        tag = 1 if rule == "inl" else 0
        return compose(compile_typed(a), tensor(identity(type_size(a.type)), prepare([0] * p + [tag])))
    if rule == "case":
        return _compile_case(tt, strict=False)
    if rule == "case_strict":
        return _compile_case(tt, strict=True)
    if rule == "super":
        return _compile_super(tt)
    if rule == "apply":
        return compile_typed(tt.children[0])
    if rule == "exchange":
        child = tt.children[0]
        return compose(reorder(tt.context, child.context), compile_typed(child))
    raise ValueError(f"unknown rule {rule!r}")


def _components(ty: Type, k: int) -> tuple[Type, ...]:
    return (ty,) if k == 1 else (ty.left, ty.right)


def _from_ctx(tt: TypedTerm, built: Context, m: FqcMorphism) -> FqcMorphism:
    """Precompose a reordering when a morphism was built for another order."""
    if ctx_names(built) == ctx_names(tt.context):
        return m
    return compose(reorder(tt.context, built), m)


def _case_prefix(tt: TypedTerm, delta: Context) -> tuple[FqcMorphism, Context]:
    """``[ctx] -> [tag, delta, data]`` shared by both kinds of case."""
    c = tt.children[0]
    s = lub_size(c.type.left, c.type.right)
    d = ctx_size(delta)
    m = compose(contraction(c.context, delta), tensor(compile_typed(c), identity(d)))
    # [data, tag, delta] -> [tag, delta, data]
    order = [s] + list(range(s + 1, s + 1 + d)) + list(range(s))
    m = compose(m, reorder_wires(order))
    return m, ctx_merge(c.context, delta)


def _compile_case(tt: TypedTerm, strict: bool) -> FqcMorphism:
    c, left, right = tt.children
    x, y = tt.names
    sigma, tau = c.type.left, c.type.right
    delta = ctx_merge(ctx_remove(left.context, x), ctx_remove(right.context, y))
    prefix, built = _case_prefix(tt, delta)
    s = lub_size(sigma, tau)
    lt = delta + ((x, sigma),)
    lu = delta + ((y, tau),)
    n_in = ctx_size(delta) + s
    out = type_size(tt.type)

    if strict:
        w = build_orth_witness(tt.orth)
        ft = compose(reorder(lt, w.f_ctx), w.f)
        gu = compose(reorder(lu, w.g_ctx), w.g)
        if ft.heap_wires != gu.heap_wires or w.s_wires + 1 != out:
            raise ShapeMismatch("witness maps do not fit the strict case")
        n = 1 + ft.wires
        gates = list(choice(ft.circuit, gu.circuit).gates)
        # [tag, S] -> [S, tag]
        gates += perm_gate(order_to_mapping(list(range(1, n)) + [0]))
        gates += w.psi.gates
        k = FqcMorphism(1 + n_in, ft.heap_wires, out, 0, Circuit(n, tuple(gates)))
    else:
        branches = []
        for term, layout, ty in ((left, lt, sigma), (right, lu, tau)):
            pad = s - type_size(ty)
            body = compose(reorder(layout, term.context), compile_typed(term))
            branches.append(compose(tensor(identity(n_in - pad), discard(pad)), body))
        heap = max(b.heap_wires for b in branches)
        bt, bu = (tensor(b, passthrough(heap - b.heap_wires)) for b in branches)
        n = 1 + bt.wires
        gates = list(choice(bt.circuit, bu.circuit).gates)
        # [tag, rho, G] -> [rho, tag, G]
        order = list(range(1, 1 + out)) + [0] + list(range(1 + out, n))
        gates += perm_gate(order_to_mapping(order))
        k = FqcMorphism(1 + n_in, heap, out, n - out, Circuit(n, tuple(gates)))
    return _from_ctx(tt, built, compose(prefix, k))


def _primitive(tt: TypedTerm) -> str | None:
    t = strip(tt)
    if t.rule in ("inl", "inr") and strip(t.children[0]).rule == "unit":
        return "true" if t.rule == "inl" else "false"
    return None


def _compile_super(tt: TypedTerm) -> FqcMorphism:
    a, b = tt.children
    a0, a1 = tt.term.a0, tt.term.a1
    kinds = (_primitive(a), _primitive(b))
    if kinds == ("true", "false"):
        return prepare_state(prepare_qubit(a0, a1))
    if kinds == ("false", "true"):
        return prepare_state(prepare_qubit(a1, a0))
    return compile_typed(desugar_super(tt))


def desugar_super(tt: TypedTerm) -> TypedTerm:
    """``{(a) t | (b) u}`` as ``case'`` over ``{(a) qtrue | (b) qfalse}``."""
    a, b = tt.children
    a0, a1 = tt.term.a0, tt.term.a1
    ttrue = TypedTerm(QTRUE, "inl", (), QBIT, True, (TypedTerm(QTRUE.body, "unit", (), UNIT, True),))
    tfalse = TypedTerm(QFALSE, "inr", (), QBIT, True, (TypedTerm(QFALSE.body, "unit", (), UNIT, True),))
    prim = TypedTerm(Super(a0, QTRUE, a1, QFALSE), "super", (), QBIT, True, (ttrue, tfalse))
    k = next(_fresh)
    x, y = f"%l{k}", f"%r{k}"
    term = Case(prim.term, x, a.term, y, b.term, True, span=tt.term.span)
    return TypedTerm(term, "case_strict", tt.context, tt.type, True, (prim, a, b), (x, y), tt.orth)


# ---------------------------------------------------------------------------
# entry points


def compile_term(tt: TypedTerm) -> FqcMorphism:
    return fused(compile_typed(tt))


@dataclass(frozen=True)
class Compiled:
    name: str
    params: Context
    result: Type
    typed: TypedTerm
    morphism: FqcMorphism

    @property
    def input_type(self) -> Type:
        return tensor_of(ty for _, ty in self.params)

    def manifest(self) -> dict:
        m = self.morphism
        return {
            "entry": self.name,
            "inWires": m.in_wires,
            "heapWires": m.heap_wires,
            "outWires": m.out_wires,
            "garbageWires": m.garbage_wires,
            "inputType": render_type(self.input_type),
            "outputType": render_type(self.result),
        }


def compile_program(prog: Program, entry: str | None = None) -> dict[str, Compiled]:
    """Check and compile ``prog``; only ``entry`` when given."""
    out = {}
    for name, tt in check_program(prog):
        if entry is not None and name != entry:
            continue
        d = prog.lookup(name)
        out[name] = Compiled(name, d.params, d.result, tt, compile_term(tt))
    return out


def compile_entry(prog: Program, entry: str) -> Compiled:
    from .errors import UnknownFunction

    if prog.lookup(entry) is None:
        raise UnknownFunction(f"no definition named '{entry}'")
    return compile_program(prog, entry)[entry]
