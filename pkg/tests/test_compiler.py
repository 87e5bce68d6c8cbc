from __future__ import annotations

import math
import random

import numpy as np
import pytest

import strategies as S
from conftest import corpus_entry, corpus_program
from qmlc.compiler import (
    build_orth_witness,
    compile_entry,
    compile_program,
    compile_term,
    compile_typed,
    contraction,
    desugar_super,
    padding,
    prepare_qubit,
    weakening,
    witness_residuals,
)
from qmlc.errors import NotNormalized, UnknownFunction
from qmlc.fqc import (
    H,
    MCU,
    X,
    Circuit,
    FqcMorphism,
    circuit_unitary,
    compose,
    discard,
    extensionally_equal,
    forget,
    identity,
    is_strict,
    isometry,
    tensor,
    unitary,
)
from qmlc.parser import parse_program, parse_term
from qmlc.simulator import run_density, run_pure
from qmlc.syntax import QBIT, UNIT, Tensor, ctx_size, type_size
from qmlc.typecheck import BaseInlInr, Checker, SuperRule, check_program, orth_nodes

PLUS = np.array([1, 1]) / math.sqrt(2)
R = 1 / math.sqrt(2)


def compile_text(ctx, text, result=None, checker=None):
    c = Checker(checker.functions if checker else None)
    return compile_term(c.check_term(tuple(ctx), parse_term(text), result))


def delta_pi() -> FqcMorphism:
    d = FqcMorphism(1, 1, 2, 0, Circuit(2, (MCU(((0, True),), 1, X),)))
    return compose(d, tensor(identity(1), discard(1)))


# -- rule examples -----------------------------------------------------------


def test_var_is_a_wire():
    m = compile_text((("x", QBIT),), "x")
    assert (m.in_wires, m.heap_wires, m.out_wires, m.garbage_wires) == (1, 0, 1, 0)
    np.testing.assert_allclose(circuit_unitary(m.circuit), np.eye(2))


def test_let_identity_and_measurement():
    keep = compile_text((("y", QBIT),), "let x = y in x^{}")
    assert is_strict(keep)
    assert extensionally_equal(keep, identity(1))
    meas = compile_text((("y", QBIT),), "let x = y in x^{y}")
    assert not is_strict(meas)
    assert extensionally_equal(meas, delta_pi())


def test_contraction_examples():
    x = (("x", QBIT),)
    np.testing.assert_allclose(isometry(contraction(x, x)) @ PLUS, [R, 0, 0, R])
    disjoint = contraction(x, (("y", QBIT),))
    assert disjoint.heap_wires == 0
    np.testing.assert_allclose(circuit_unitary(disjoint.circuit), np.eye(4))


def test_contraction_partial_share():
    g = (("x", QBIT), ("y", QBIT))
    m = contraction(g, (("x", QBIT),))
    assert (m.in_wires, m.heap_wires, m.out_wires) == (2, 1, 3)
    # delta_2 on x, identity on y; output order [x, y, x']
    cnot = np.zeros((4, 2))
    cnot[0, 0] = cnot[3, 1] = 1
    expect = np.kron(cnot, np.eye(2))  # order [x, x', y]
    perm = np.zeros((8, 8))
    for i in range(8):
        a, b, c = (i >> 2) & 1, (i >> 1) & 1, i & 1  # x, x', y
        perm[(a << 2) | (c << 1) | b, i] = 1
    np.testing.assert_allclose(isometry(m), perm @ expect)


def test_weakening_examples():
    x = (("x", QBIT),)
    assert extensionally_equal(weakening(x, ()), identity(1))
    w = weakening((), (("y", QBIT),))
    assert (w.out_wires, w.garbage_wires) == (0, 1)
    out = forget(w).apply(np.outer(PLUS, PLUS))
    assert out.shape == (1, 1) and out[0, 0] == pytest.approx(1)
    # shared names stay: nothing is discarded
    assert weakening(x, x).garbage_wires == 0


def test_padding_examples():
    assert extensionally_equal(padding(QBIT, QBIT), identity(1))
    p = padding(UNIT, QBIT)
    assert (p.in_wires, p.heap_wires, p.out_wires) == (0, 1, 1)
    np.testing.assert_allclose(isometry(p).reshape(-1), [1, 0])
    p = padding(QBIT, Tensor(QBIT, QBIT))
    np.testing.assert_allclose(isometry(p) @ np.array([0, 1]), [0, 0, 1, 0])


def test_value_encoding():
    cases = {
        "qtrue": (QBIT, 0b1),
        "qfalse": (QBIT, 0b0),
        "(qtrue, qfalse)": (Tensor(QBIT, QBIT), 0b10),
        "inl (qtrue, qfalse)": (parse_program("f ():Q2 * Q2 + Q2 = ()").definitions[0].result, 0b101),
        "inr qtrue": (parse_program("f ():Q2 * Q2 + Q2 = ()").definitions[0].result, 0b100),
        "inl ()": (parse_program("f ():1 + Q2 = ()").definitions[0].result, 0b01),
    }
    for text, (ty, index) in cases.items():
        m = compile_text((), text, ty)
        assert m.out_wires == type_size(ty) and is_strict(m)
        out = run_pure(m, np.ones(1))
        assert abs(out[index]) == pytest.approx(1), text


def test_mnot_measures_then_negates():
    m = corpus_entry("mnot").morphism
    assert not is_strict(m)
    np.testing.assert_allclose(run_density(m, np.outer(PLUS, PLUS)), np.eye(2) / 2, atol=1e-12)
    np.testing.assert_allclose(run_density(m, np.diag([1, 0])), np.diag([0, 1]), atol=1e-12)


def test_measuring_case_on_classical_values():
    prog = parse_program(
        "pick (c:Q2, a:Q2, b:Q2):Q2 = case c of { inl u => a^{b} | inr v => b^{a} }"
    )
    m = compile_entry(prog, "pick").morphism
    for c in (0, 1):
        for a in (0, 1):
            for b in (0, 1):
                psi = np.zeros(8)
                psi[(c << 2) | (a << 1) | b] = 1
                out = run_density(m, np.outer(psi, psi))
                want = a if c else b
                assert out[want, want] == pytest.approx(1)


def test_gate_library():
    x = corpus_entry("qnot").morphism
    np.testing.assert_allclose(circuit_unitary(x.circuit), X)
    cnot = corpus_entry("cnot").morphism
    assert is_strict(cnot) and cnot.wires == 2
    for i in range(4):
        c, t = i >> 1, i & 1
        out = circuit_unitary(cnot.circuit)[:, i]
        assert abs(out[(c << 1) | (t ^ c)]) == pytest.approx(1)
    had = corpus_entry("had").morphism
    u = circuit_unitary(had.circuit)
    assert is_strict(had)
    assert np.max(np.abs(u - H)) < 1e-9 or np.max(np.abs(u + H)) < 1e-9


def test_prepare_qubit_examples():
    assert prepare_qubit(1, 0) @ np.array([1, 0]) == pytest.approx(np.array([0, 1]))
    np.testing.assert_allclose(prepare_qubit(R, R) @ [1, 0], [R, R])
    np.testing.assert_allclose(prepare_qubit(-R, R) @ [1, 0], [R, -R])
    u = prepare_qubit(0.6j, 0.8)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-12)
    with pytest.raises(NotNormalized):
        prepare_qubit(1, 1)


def test_desugar_super():
    prog = corpus_program("epr")
    (_, tt), _ = check_program(prog)
    body = tt.children[0] if tt.rule == "exchange" else tt
    d = desugar_super(body)
    assert d.rule == "case_strict" and d.children[0].rule == "super"
    out = run_pure(compile_entry(prog, "epr").morphism, np.ones(1))
    np.testing.assert_allclose(out, [R, 0, 0, R], atol=1e-12)


def test_primitive_super_is_one_rotation():
    m = compile_text((), "{ qfalse | qtrue }", QBIT)
    assert m.wires == 1 and len(m.circuit.gates) == 1


def test_nested_superposition():
    text = "{ { qfalse | qtrue } | { qfalse | (-1) qtrue } }"
    m = compile_text((), text, QBIT)
    out = run_pure(m, np.ones(1))
    # R * |+> + R * |-> = |0>, i.e. qfalse
    np.testing.assert_allclose(np.abs(out), [1, 0], atol=1e-12)


def test_apply_lowering():
    checker = S.prelude_checker()
    m = compile_text((("x", QBIT),), "had(x)", checker=checker)
    np.testing.assert_allclose(np.abs(circuit_unitary(m.circuit)), np.abs(H), atol=1e-12)
    m = compile_text((("x", QBIT),), "had(had(x))", checker=checker)
    assert extensionally_equal(m, identity(1))
    eq = corpus_entry("eq").morphism
    assert (eq.in_wires, eq.out_wires) == (2, 1)


# -- witnesses ---------------------------------------------------------------


def corpus_derivations():
    out = []
    for stem in ("had", "qnot", "cnot", "toff", "eq", "epr"):
        for _, tt in check_program(corpus_program(stem)):
            for node in tt.walk():
                if node.orth is not None:
                    out.extend(orth_nodes(node.orth))
    return out


def test_base_witness():
    d = S.type_orth_pair(Checker(), (), QBIT, parse_term("qtrue"), parse_term("qfalse"))[2]
    w = build_orth_witness(d)
    assert isinstance(d, BaseInlInr) and w.s_wires == 0
    np.testing.assert_allclose(circuit_unitary(w.psi), np.eye(2))


def test_had_witness_rotation():
    (_, tt), = check_program(corpus_program("had"))
    d = next(n.orth for n in tt.walk() if n.orth is not None)
    assert isinstance(d, SuperRule)
    w = build_orth_witness(d)
    rot = w.psi.gates[0]
    np.testing.assert_allclose(rot.u, [[R, -R], [R, R]], atol=1e-12)
    assert max(witness_residuals(d, w)) < 1e-9


def test_fig1_inner_witness():
    derivations = [d for d in corpus_derivations() if d.left.type == Tensor(QBIT, Tensor(QBIT, QBIT))]
    assert derivations
    for d in derivations:
        assert max(witness_residuals(d)) < 1e-9


def test_corpus_witnesses_decompose():
    ds = corpus_derivations()
    assert len(ds) > 10
    for d in ds:
        w = build_orth_witness(d)
        assert w.s_wires + 1 == type_size(d.left.type)
        assert is_strict(w.f) and is_strict(w.g)
        assert w.f.out_wires == w.g.out_wires == w.s_wires
        assert w.f.in_wires == ctx_size(w.f_ctx) and w.g.in_wires == ctx_size(w.g_ctx)
        assert max(witness_residuals(d, w)) < 1e-9


def test_random_witnesses_decompose():
    for _, _, d in S.orth_samples(200, seed=5):
        assert max(witness_residuals(d)) < 1e-9


# -- properties --------------------------------------------------------------


def test_wire_accounting():
    for strict in (True, False):
        for ctx, tt, m in S.typed_samples(strict, 300, seed=7):
            assert m.in_wires == ctx_size(ctx)
            assert m.out_wires == type_size(tt.type)
            if tt.strict:
                assert is_strict(m)


def test_compositionality_of_let():
    checker = S.prelude_checker()
    cases = [
        ("let x = had(a) in (x, b)", (("a", QBIT), ("b", QBIT)), "had"),
        ("let x = qnot(a) in (x, b)", (("a", QBIT), ("b", QBIT)), "qnot"),
    ]
    for text, ctx, fn in cases:
        m = compile_text(ctx, text, Tensor(QBIT, QBIT), checker)
        t = compile_term(checker.functions[fn].typed)
        u = identity(2)
        expect = compose(tensor(t, identity(1)), u)
        assert extensionally_equal(m, expect)
    # a measuring bound term followed by a strict body
    m = compile_text((("a", QBIT),), "let x = let y = a in y^{a} in had(x)", QBIT, checker)
    had = compile_term(checker.functions["had"].typed)
    assert extensionally_equal(m, compose(delta_pi(), had))


def test_compile_program_and_manifest():
    compiled = compile_program(corpus_program("toff"))
    assert list(compiled) == ["qnot", "cnot", "toff"]
    man = compiled["toff"].manifest()
    assert man == {
        "entry": "toff", "inWires": 3, "heapWires": 0, "outWires": 3, "garbageWires": 0,
        "inputType": "Q2 * Q2 * Q2", "outputType": "Q2 * Q2 * Q2",
    }
    with pytest.raises(UnknownFunction):
        compile_entry(corpus_program("toff"), "nope")


def test_compile_is_total_on_random_programs():
    rng = random.Random(12)
    checker = S.prelude_checker()
    for _ in range(100):
        ctx, tt, _ = S.generate_typed(rng, checker, rng.random() < 0.5)
        m = compile_typed(tt)
        assert unitary(m.circuit).wires == m.wires
