"""Finite quantum computations as wire-counted reversible circuits.

A morphism ``A -> B`` is a circuit on ``n`` wires together with a split of
those wires: before the circuit ``[0, in)`` carry the input and the rest is a
heap initialised to ``|0...0>``; after the circuit ``[0, out)`` carry the
output and the rest is garbage, which is traced out.

Wire 0 is the most significant bit of a basis index throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import config
from .errors import ShapeMismatch, TooLarge

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


# ---------------------------------------------------------------------------
# gates and circuits


@dataclass(frozen=True, eq=False)
class MCU:
    """Single-qubit unitary ``u`` on ``target`` under polarised controls.

    ``controls`` is a tuple of ``(wire, polarity)``; the gate fires when every
    control wire is ``|1>`` (polarity True) or ``|0>`` (polarity False).
    """

    controls: tuple[tuple[int, bool], ...]
    target: int
    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        if u.shape != (2, 2):
            raise ValueError("MCU needs a 2x2 matrix")
        if np.max(np.abs(u.conj().T @ u - I2)) > config.tolerance():
            raise ValueError("MCU matrix is not unitary")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "controls", tuple((int(w), bool(p)) for w, p in self.controls))
        wires = [w for w, _ in self.controls]
        if len(set(wires)) != len(wires) or self.target in wires:
            raise ValueError("controls must be distinct and exclude the target")

    def wires(self) -> list[int]:
        return [w for w, _ in self.controls] + [self.target]

    def remap(self, f) -> "MCU":
        return MCU(tuple((f(w), p) for w, p in self.controls), f(self.target), self.u)


@dataclass(frozen=True, eq=False)
class Permute:
    """Routes the qubit on wire ``i`` to wire ``mapping[i]``."""

    mapping: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(i) for i in self.mapping)
        if sorted(m) != list(range(len(m))):
            raise ValueError(f"not a permutation: {m}")
        object.__setattr__(self, "mapping", m)

    def wires(self) -> list[int]:
        return list(range(len(self.mapping)))

    def is_identity(self) -> bool:
        return all(i == m for i, m in enumerate(self.mapping))


Gate = Union[MCU, Permute]


@dataclass(frozen=True, eq=False)
class Circuit:
    wires: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if isinstance(g, Permute):
                if len(g.mapping) != self.wires:
                    raise ValueError("permutation size does not match circuit")
            elif max(g.wires()) >= self.wires:
                raise ValueError("gate wire out of range")

    def then(self, other: "Circuit") -> "Circuit":
        if other.wires != self.wires:
            raise ShapeMismatch(f"cannot sequence circuits on {self.wires} and {other.wires} wires")
        return Circuit(self.wires, self.gates + other.gates)

    def embed(self, wires: int, offset: int = 0) -> "Circuit":
        """The same gates on wires ``offset..`` of a larger circuit."""
        return self.relabel(wires, [offset + i for i in range(self.wires)])

    def relabel(self, wires: int, where: Sequence[int]) -> "Circuit":
        """Place wire ``i`` of this circuit on wire ``where[i]`` of a larger one."""
        where = list(where)
        gates = []
        for g in self.gates:
            if isinstance(g, MCU):
                gates.append(g.remap(lambda w: where[w]))
            else:
                full = list(range(wires))
                for i, m in enumerate(g.mapping):
                    full[where[i]] = where[m]
                gates.append(Permute(tuple(full)))
        return Circuit(wires, tuple(gates))

    def count(self) -> dict[str, int]:
        mcu = sum(isinstance(g, MCU) for g in self.gates)
        return {"mcu": mcu, "permute": len(self.gates) - mcu}


def perm_gate(mapping: Sequence[int]) -> tuple[Gate, ...]:
    p = Permute(tuple(mapping))
    return () if p.is_identity() else (p,)


def inverse_mapping(mapping: Sequence[int]) -> list[int]:
    inv = [0] * len(mapping)
    for i, m in enumerate(mapping):
        inv[m] = i
    return inv


def order_to_mapping(order: Sequence[int]) -> list[int]:
    """Mapping that puts old wire ``order[j]`` on new wire ``j``."""
    return inverse_mapping(order)


def fuse_permutations(c: Circuit) -> Circuit:
    """Merge runs of adjacent permutations and drop identities."""
    out: list[Gate] = []
    for g in c.gates:
        if isinstance(g, Permute) and out and isinstance(out[-1], Permute):
            prev = out.pop()
            g = Permute(tuple(g.mapping[m] for m in prev.mapping))
        if isinstance(g, Permute) and g.is_identity():
            continue
        out.append(g)
    return Circuit(c.wires, tuple(out))


def permutation_swaps(mapping: Sequence[int]) -> list[tuple[int, int]]:
    """Transpositions whose successive application realises ``mapping``."""
    cur = list(range(len(mapping)))  # cur[w]: original qubit now on wire w
    where = list(range(len(mapping)))  # where[q]: wire holding original qubit q
    swaps = []
    for q, dst in enumerate(mapping):
        src = where[q]
        if src != dst:
            other = cur[dst]
            swaps.append((src, dst))
            cur[src], cur[dst] = other, q
            where[other], where[q] = src, dst
    return swaps


def lower_permutations(c: Circuit) -> Circuit:
    """Replace every Permute by three CNOTs per transposition."""
    gates: list[Gate] = []
    for g in c.gates:
        if isinstance(g, MCU):
            gates.append(g)
            continue
        for a, b in permutation_swaps(g.mapping):
            gates += [MCU(((a, True),), b, X), MCU(((b, True),), a, X), MCU(((a, True),), b, X)]
    return Circuit(c.wires, tuple(gates))


def add_control(c: Circuit, polarity: bool) -> Circuit:
    """Shift ``c`` down one wire and control every gate on wire 0."""
    lowered = lower_permutations(c).embed(c.wires + 1, 1)
    gates = tuple(MCU(((0, polarity),) + g.controls, g.target, g.u) for g in lowered.gates)
    return Circuit(c.wires + 1, gates)


def choice(phi: Circuit, psi: Circuit) -> Circuit:
    """``phi`` when wire 0 is ``|1>``, ``psi`` when it is ``|0>``."""
    if phi.wires != psi.wires:
        raise ShapeMismatch(f"choice between circuits on {phi.wires} and {psi.wires} wires")
    return add_control(phi, True).then(add_control(psi, False))


# ---------------------------------------------------------------------------
# dense evaluation


def apply_gates(c: Circuit, state: np.ndarray) -> np.ndarray:
    """Apply ``c`` to the columns of ``state`` (shape ``2^n`` or ``2^n x k``)."""
    n = c.wires
    vec = state.ndim == 1
    cols = state.reshape(2**n, -1)
    k = cols.shape[1]
    t = cols.reshape((2,) * n + (k,)).astype(complex, copy=True)
    for g in c.gates:
        if isinstance(g, Permute):
            t = np.transpose(t, inverse_mapping(g.mapping) + [n])
            continue
        idx: list = [slice(None)] * (n + 1)
        for w, p in g.controls:
            idx[w] = slice(1, 2) if p else slice(0, 1)
        idx = tuple(idx)
        block = t[idx]
        block = np.moveaxis(np.tensordot(g.u, block, axes=([1], [g.target])), 0, g.target)
        t[idx] = block
    out = np.ascontiguousarray(t).reshape(2**n, k)
    return out[:, 0] if vec else out


def circuit_unitary(c: Circuit, cap: int | None = None) -> np.ndarray:
    cap = config.MAX_PURE_WIRES if cap is None else cap
    if c.wires > cap:
        raise TooLarge(f"circuit has {c.wires} wires, the dense cap is {cap}")
    return apply_gates(c, np.eye(2**c.wires, dtype=complex))


# ---------------------------------------------------------------------------
# morphisms


@dataclass(frozen=True, eq=False)
class FqcMorphism:
    in_wires: int
    heap_wires: int
    out_wires: int
    garbage_wires: int
    circuit: Circuit

    def __post_init__(self):
        n = self.circuit.wires
        if self.in_wires + self.heap_wires != n or self.out_wires + self.garbage_wires != n:
            raise ShapeMismatch(
                f"wire accounting: {self.in_wires}+{self.heap_wires} -> "
                f"{self.out_wires}+{self.garbage_wires} on {n} wires"
            )

    @property
    def wires(self) -> int:
        return self.circuit.wires

    def with_circuit(self, c: Circuit) -> "FqcMorphism":
        return FqcMorphism(self.in_wires, self.heap_wires, self.out_wires, self.garbage_wires, c)


def is_strict(a: FqcMorphism) -> bool:
    return a.garbage_wires == 0


def identity(n: int) -> FqcMorphism:
    return FqcMorphism(n, 0, n, 0, Circuit(n))


def permutation(mapping: Sequence[int]) -> FqcMorphism:
    """Wire ``i`` of the input becomes wire ``mapping[i]`` of the output."""
    n = len(mapping)
    return FqcMorphism(n, 0, n, 0, Circuit(n, perm_gate(mapping)))


def reorder(order: Sequence[int]) -> FqcMorphism:
    """Output wire ``j`` carries input wire ``order[j]``."""
    return permutation(order_to_mapping(order))


def prepare(bits: Sequence[int]) -> FqcMorphism:
    """No input; outputs the basis state ``|bits>`` from the heap."""
    n = len(bits)
    gates = tuple(MCU((), i, X) for i, b in enumerate(bits) if b)
    return FqcMorphism(0, n, n, 0, Circuit(n, gates))


def prepare_state(u: np.ndarray) -> FqcMorphism:
    """No input; outputs ``u|0>`` on one wire."""
    return FqcMorphism(0, 1, 1, 0, Circuit(1, (MCU((), 0, u),)))


def discard(n: int) -> FqcMorphism:
    """Sends ``n`` input wires to garbage."""
    return FqcMorphism(n, 0, 0, n, Circuit(n))


def unitary(c: Circuit) -> FqcMorphism:
    return FqcMorphism(c.wires, 0, c.wires, 0, c)


def compose(a: FqcMorphism, b: FqcMorphism) -> FqcMorphism:
    """``b`` after ``a``.

    Input layout ``[A, Ha, Hb]``; ``a`` runs on its prefix, then ``Hb`` is routed
    in front of ``a``'s garbage and ``b`` runs on ``[B, Hb]``.  Output layout
    is ``[C, Gb, Ga]``.
    """
    if a.out_wires != b.in_wires:
        raise ShapeMismatch(f"cannot compose: {a.out_wires} outputs into {b.in_wires} inputs")
    n = a.wires + b.heap_wires
    gates: list[Gate] = list(a.circuit.embed(n).gates)
    # [B, Ga, Hb] -> [B, Hb, Ga]
    nb, ga, hb = a.out_wires, a.garbage_wires, b.heap_wires
    order = list(range(nb)) + list(range(nb + ga, n)) + list(range(nb, nb + ga))
    gates += perm_gate(order_to_mapping(order))
    gates += b.circuit.embed(n).gates
    return FqcMorphism(
        a.in_wires,
        a.heap_wires + b.heap_wires,
        b.out_wires,
        a.garbage_wires + b.garbage_wires,
        Circuit(n, tuple(gates)),
    )


def compose_all(*ms: FqcMorphism) -> FqcMorphism:
    out = ms[0]
    for m in ms[1:]:
        out = compose(out, m)
    return out


def tensor(a: FqcMorphism, b: FqcMorphism) -> FqcMorphism:
    n = a.wires + b.wires
    ai, ah, bi, bh = a.in_wires, a.heap_wires, b.in_wires, b.heap_wires
    # [Aa, Ab, Ha, Hb] -> [Aa, Ha, Ab, Hb]
    order = (
        list(range(ai))
        + list(range(ai + bi, ai + bi + ah))
        + list(range(ai, ai + bi))
        + list(range(ai + bi + ah, n))
    )
    gates: list[Gate] = list(perm_gate(order_to_mapping(order)))
    gates += a.circuit.embed(n, 0).gates
    gates += b.circuit.embed(n, a.wires).gates
    # [Ba, Ga, Bb, Gb] -> [Ba, Bb, Ga, Gb]
    ao, ag, bo = a.out_wires, a.garbage_wires, b.out_wires
    order = (
        list(range(ao))
        + list(range(ao + ag, ao + ag + bo))
        + list(range(ao, ao + ag))
        + list(range(ao + ag + bo, n))
    )
    gates += perm_gate(order_to_mapping(order))
    return FqcMorphism(ai + bi, ah + bh, ao + bo, ag + b.garbage_wires, Circuit(n, tuple(gates)))


def tensor_all(*ms: FqcMorphism) -> FqcMorphism:
    out = identity(0)
    for m in ms:
        out = tensor(out, m)
    return out


def fused(a: FqcMorphism) -> FqcMorphism:
    return a.with_circuit(fuse_permutations(a.circuit))


# ---------------------------------------------------------------------------
# channels


def isometry(a: FqcMorphism) -> np.ndarray:
    """``U (I (x) |0..0>)``: a ``2^n x 2^in`` matrix."""
    n = a.wires
    if n > config.MAX_PURE_WIRES:
        raise TooLarge(f"morphism has {n} wires, the dense cap is {config.MAX_PURE_WIRES}")
    cols = np.zeros((2**n, 2**a.in_wires), dtype=complex)
    cols[np.arange(2**a.in_wires) << a.heap_wires, np.arange(2**a.in_wires)] = 1
    return apply_gates(a.circuit, cols)


@dataclass(frozen=True, eq=False)
class SuperopMatrix:
    """A linear map on density matrices acting on column-stacked vectors."""

    in_dim: int
    out_dim: int
    m: np.ndarray

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.in_dim, self.in_dim):
            raise ShapeMismatch(f"channel expects a {self.in_dim}x{self.in_dim} density matrix")
        vec = rho.reshape(-1, order="F")
        return (self.m @ vec).reshape(self.out_dim, self.out_dim, order="F")

    def then(self, other: "SuperopMatrix") -> "SuperopMatrix":
        """``other`` after ``self``."""
        if other.in_dim != self.out_dim:
            raise ShapeMismatch("channel dimensions do not compose")
        return SuperopMatrix(self.in_dim, other.out_dim, other.m @ self.m)

    def kron(self, other: "SuperopMatrix") -> "SuperopMatrix":
        """Parallel composition; ``self`` acts on the leading factor."""
        t1 = self.m.reshape(self.out_dim, self.out_dim, self.in_dim, self.in_dim)
        t2 = other.m.reshape(other.out_dim, other.out_dim, other.in_dim, other.in_dim)
        i, o = self.in_dim * other.in_dim, self.out_dim * other.out_dim
        t = np.einsum("srqp,SRQP->sSrRqQpP", t1, t2)
        return SuperopMatrix(i, o, t.reshape(o * o, i * i))


def identity_channel(dim: int) -> SuperopMatrix:
    return SuperopMatrix(dim, dim, np.eye(dim * dim, dtype=complex))


def forget(a: FqcMorphism) -> SuperopMatrix:
    """The channel ``rho -> tr_G(U (rho (x) |0><0|) U^dagger)``."""
    if a.wires > config.MAX_DENSITY_WIRES:
        raise TooLarge(
            f"morphism has {a.wires} wires, the density cap is {config.MAX_DENSITY_WIRES}"
        )
    v = isometry(a)
    o, g, i = 2**a.out_wires, 2**a.garbage_wires, 2**a.in_wires
    v3 = v.reshape(o, g, i)
    # S(E_cd)_{ab} = sum_g V[a,g,c] conj(V[b,g,d]); vec index is (b, a) / (d, c)
    m = np.einsum("agc,bgd->badc", v3, v3.conj()).reshape(o * o, i * i)
    return SuperopMatrix(i, o, m)


def partial_trace(rho: np.ndarray, keep: int, drop: int) -> np.ndarray:
    """Trace out the trailing ``drop`` wires of a ``2^(keep+drop)`` density matrix."""
    rho = np.asarray(rho, dtype=complex)
    k, d = 2**keep, 2**drop
    if rho.shape != (k * d, k * d):
        raise ShapeMismatch(f"expected a {k * d}x{k * d} matrix, got {rho.shape}")
    return np.einsum("ajbj->ab", rho.reshape(k, d, k, d))


def choi_matrix(s: SuperopMatrix) -> np.ndarray:
    """``J = sum_{cd} |c><d| (x) S(|c><d|)``, input factor first."""
    i, o = s.in_dim, s.out_dim
    t = s.m.reshape(o, o, i, i)  # [b, a, d, c] with S(E_cd)_{ab}
    return t.transpose(3, 1, 2, 0).reshape(i * o, i * o)


def is_cptp(s: SuperopMatrix, tol: float | None = None) -> bool:
    tol = config.tolerance() if tol is None else tol
    j = choi_matrix(s)
    if np.max(np.abs(j - j.conj().T), initial=0.0) > tol:
        return False
    if np.linalg.eigvalsh((j + j.conj().T) / 2).min() < -tol:
        return False
    i, o = s.in_dim, s.out_dim
    tr_out = np.einsum("cada->cd", j.reshape(i, o, i, o))
    return bool(np.max(np.abs(tr_out - np.eye(i))) <= tol)


def extensionally_equal(a: FqcMorphism, b: FqcMorphism, tol: float | None = None) -> bool:
    tol = config.tolerance() if tol is None else tol
    if (a.in_wires, a.out_wires) != (b.in_wires, b.out_wires):
        return False
    return bool(np.max(np.abs(forget(a).m - forget(b).m), initial=0.0) <= tol)


def equal_up_to_phase(u: np.ndarray, v: np.ndarray, tol: float | None = None) -> bool:
    tol = config.tolerance() if tol is None else tol
    if u.shape != v.shape:
        return False
    k = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    if abs(v[k]) <= tol or abs(u[k]) <= tol:
        return bool(np.max(np.abs(u - v), initial=0.0) <= tol)
    phase = u[k] / v[k]
    phase /= abs(phase)
    return bool(np.max(np.abs(u - phase * v)) <= tol)


# ---------------------------------------------------------------------------
# circuit JSON


def _fmt(x: float) -> str:
    x = float(x)
    if x == 0:
        x = 0.0
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def circuit_to_json(c: Circuit) -> str:
    """Deterministic JSON text with 17 significant digits."""
    parts = []
    for g in c.gates:
        if isinstance(g, MCU):
            ctl = ",".join(f"[{w},{'true' if p else 'false'}]" for w, p in g.controls)
            u = ",".join(f"[{_fmt(z.real)},{_fmt(z.imag)}]" for z in g.u.reshape(-1))
            parts.append(f'{{"kind":"mcu","controls":[{ctl}],"target":{g.target},"u":[{u}]}}')
        else:
            parts.append(f'{{"kind":"permute","map":[{",".join(map(str, g.mapping))}]}}')
    body = ",\n    ".join(parts)
    gates = f"[\n    {body}\n  ]" if parts else "[]"
    return f'{{\n  "wires": {c.wires},\n  "gates": {gates}\n}}\n'


def circuit_from_json(data: dict) -> Circuit:
    gates: list[Gate] = []
    for g in data["gates"]:
        if g["kind"] == "mcu":
            u = np.array([complex(re, im) for re, im in g["u"]]).reshape(2, 2)
            gates.append(MCU(tuple((w, p) for w, p in g["controls"]), g["target"], u))
        elif g["kind"] == "permute":
            gates.append(Permute(tuple(g["map"])))
        else:
            raise ValueError(f"unknown gate kind {g['kind']!r}")
    return Circuit(data["wires"], tuple(gates))
