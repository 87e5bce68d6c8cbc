"""Running compiled morphisms on state vectors and density matrices."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import config
from .errors import NotStrict, ShapeMismatch
from .fqc import FqcMorphism, apply_gates, forget, is_strict
from .parser import render_term
from .syntax import Inl, Inr, Pair, Sum, Tensor, Type, Unit, UnitIntro, type_size

INVALID = "<invalid>"


def _check_vector(alpha: FqcMorphism, psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape[0] != 2**alpha.in_wires:
        raise ShapeMismatch(
            f"input has {psi.shape[0]} amplitudes, expected {2**alpha.in_wires}"
        )
    if abs(np.linalg.norm(psi) - 1) > config.tolerance():
        raise ShapeMismatch("input state is not normalized")
    return psi


def run_pure(alpha: FqcMorphism, psi: np.ndarray) -> np.ndarray:
    """``U (psi (x) |0..0>)`` for a strict morphism."""
    if not is_strict(alpha):
        raise NotStrict(f"morphism discards {alpha.garbage_wires} wire(s); use density semantics")
    psi = _check_vector(alpha, psi)
    full = np.zeros(2**alpha.wires, dtype=complex)
    full[np.arange(psi.shape[0]) << alpha.heap_wires] = psi
    return apply_gates(alpha.circuit, full)


def run_density(alpha: FqcMorphism, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    dim = 2**alpha.in_wires
    if rho.shape != (dim, dim):
        raise ShapeMismatch(f"density matrix has shape {rho.shape}, expected {(dim, dim)}")
    return forget(alpha).apply(rho)


def density_of(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def decode(index: int, ty: Type):
    """The value term whose encoding is basis state ``index``, or None."""
    n = type_size(ty)
    bits = [(index >> (n - 1 - i)) & 1 for i in range(n)]
    term, rest = _decode(bits, ty)
    return term if term is not None and not rest else None


def _decode(bits: list[int], ty: Type):
    if isinstance(ty, Unit):
        return UnitIntro(), bits
    if isinstance(ty, Tensor):
        a, rest = _decode(bits, ty.left)
        if a is None:
            return None, rest
        b, rest = _decode(rest, ty.right)
        if b is None:
            return None, rest
        return Pair(a, b), rest
    if isinstance(ty, Sum):
        s = type_size(ty) - 1
        data, tag, rest = bits[:s], bits[s], bits[s + 1 :]
        inner = ty.left if tag else ty.right
        v, pad = _decode(data, inner)
        if v is None or any(pad):
            return None, rest
        return (Inl(v) if tag else Inr(v)), rest
    raise TypeError(f"not a type: {ty!r}")


def outcome_table(rho: np.ndarray, ty: Type) -> list[tuple[str, float]]:
    """Computational-basis readout, in basis order, zero entries omitted.

    Basis states that are not valid encodings (nonzero padding) are pooled
    under ``<invalid>``, listed last.
    """
    rho = np.asarray(rho)
    dim = 2 ** type_size(ty)
    if rho.shape != (dim, dim):
        raise ShapeMismatch(f"density matrix has shape {rho.shape}, type needs {(dim, dim)}")
    probs = np.clip(np.real(np.diag(rho)), 0.0, None)
    out, invalid = [], 0.0
    for i, p in enumerate(probs):
        if p <= config.tolerance():
            continue
        v = decode(i, ty)
        if v is None:
            invalid += float(p)
        else:
            out.append((render_term(v), float(p)))
    if invalid > 0:
        out.append((INVALID, invalid))
    return out


def _pairs(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in v]


@dataclass
class RunResult:
    kind: str  # "pure" or "mixed"
    state: np.ndarray
    outcomes: list[tuple[str, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == "pure":
            d["state"] = _pairs(self.state)
        else:
            d["density"] = [_pairs(row) for row in self.state]
        d["outcomes"] = [{"value": v, "prob": p} for v, p in self.outcomes]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def run(alpha: FqcMorphism, psi: np.ndarray, out_type: Type, density: bool = False) -> RunResult:
    """Pure run when possible, channel semantics otherwise or when forced."""
    if is_strict(alpha) and not density:
        out = run_pure(alpha, psi)
        return RunResult("pure", out, outcome_table(density_of(out), out_type))
    rho = run_density(alpha, density_of(_check_vector(alpha, psi)))
    return RunResult("mixed", rho, outcome_table(rho, out_type))
