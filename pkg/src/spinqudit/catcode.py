"""Spin-cat error-correction code: codewords, Knill-Laflamme checks, and
bias-preserving logical gates.

Codewords are the antipodal x-axis spin coherent states written in the z
basis: |0_L>_m = d^I_{m,-I}(pi/2), |1_L>_m = d^I_{m,+I}(pi/2).  They are
exactly orthogonal, and for I = 7/2 the code corrects the dephasing error
set {1, I_z, I_z^2, I_z^3}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spincore import PureState, SpinQuantum, spin_operators, wigner_d


@dataclass(frozen=True)
class CodePair:
    zero_l: PureState
    one_l: PureState

    def __post_init__(self):
        ov = abs(np.vdot(self.zero_l.amplitudes, self.one_l.amplitudes))
        if ov > 1e-12:
            raise ValueError(f"codewords not orthogonal: |<0|1>| = {ov:.2e}")


@dataclass(frozen=True)
class ErrorSet:
    """Labeled error operators; must include the identity."""

    operators: tuple
    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "operators", tuple(np.asarray(op, dtype=complex) for op in self.operators))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.operators) != len(self.labels):
            raise ValueError("one label per operator required")
        has_identity = any(
            op.shape[0] == op.shape[1] and np.abs(op - np.eye(op.shape[0])).max() < 1e-12
            for op in self.operators
        )
        if not has_identity:
            raise ValueError("error set must include the identity")

    @classmethod
    def iz_powers(cls, q: SpinQuantum, max_power: int) -> "ErrorSet":
        iz = spin_operators(q).iz
        ops = [np.eye(q.d, dtype=complex)]
        labels = ["1"]
        cur = np.eye(q.d, dtype=complex)
        for p in range(1, max_power + 1):
            cur = cur @ iz
            ops.append(cur.copy())
            labels.append(f"Iz^{p}" if p > 1 else "Iz")
        return cls(operators=tuple(ops), labels=tuple(labels))


def codewords(q: SpinQuantum) -> CodePair:
    """The spin-cat codewords; half-odd-integer spin only (the logical-gate
    phase identities fail for integer spin)."""
    if q.two_I % 2 == 0:
        raise ValueError("spin-cat codewords require half-odd-integer spin")
    ms = q.m_values()
    zero = np.array([wigner_d(q, m, -q.I, np.pi / 2.0) for m in ms], dtype=complex)
    one = np.array([wigner_d(q, m, q.I, np.pi / 2.0) for m in ms], dtype=complex)
    return CodePair(zero_l=PureState(zero), one_l=PureState(one))


@dataclass(frozen=True)
class KlReport:
    c_matrix: np.ndarray
    max_offdiag_violation: float
    max_diag_mismatch: float
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "c_matrix_real": [[float(x.real) for x in row] for row in self.c_matrix],
            "c_matrix_imag": [[float(x.imag) for x in row] for row in self.c_matrix],
            "max_offdiag_violation": self.max_offdiag_violation,
            "max_diag_mismatch": self.max_diag_mismatch,
            "tol": self.tol,
            "passed": self.passed,
        }


def kl_check(code: CodePair, errors: ErrorSet, tol: float = 1e-10) -> KlReport:
    """Knill-Laflamme conditions <a|E_i^dag E_j|b> = C_ij delta_ab.

    Reports the full C matrix (averaged diagonal blocks) plus the worst
    off-diagonal violation and diagonal mismatch over all error pairs.
    """
    words = (code.zero_l.amplitudes, code.one_l.amplitudes)
    n = len(errors.operators)
    c = np.zeros((n, n), dtype=complex)
    off = 0.0
    diag = 0.0
    for i, ei in enumerate(errors.operators):
        for j, ej in enumerate(errors.operators):
            prod = ei.conj().T @ ej
            b00 = np.vdot(words[0], prod @ words[0])
            b11 = np.vdot(words[1], prod @ words[1])
            b01 = np.vdot(words[0], prod @ words[1])
            b10 = np.vdot(words[1], prod @ words[0])
            c[i, j] = (b00 + b11) / 2.0
            off = max(off, abs(b01), abs(b10))
            diag = max(diag, abs(b00 - b11))
    return KlReport(
        c_matrix=c,
        max_offdiag_violation=float(off),
        max_diag_mismatch=float(diag),
        tol=tol,
        passed=bool(off < tol and diag < tol),
    )


def logical_gate(q: SpinQuantum, kind: str) -> np.ndarray:
    """Logical Paulis of the spin-cat code: X = exp(-i pi I_z) swaps the
    codewords, Z = exp(-i pi I_x) flips their relative sign."""
    if q.two_I % 2 == 0:
        raise ValueError("logical gates require half-odd-integer spin")
    ops = spin_operators(q)
    if kind == "X":
        return np.diag(np.exp(-1j * np.pi * q.m_values()))
    if kind == "Z":
        w, v = np.linalg.eigh(ops.ix)
        return (v * np.exp(-1j * np.pi * w)) @ v.conj().T
    raise ValueError(f"kind must be 'X' or 'Z', got {kind!r}")


def bias_preservation_check(u: np.ndarray, e: np.ndarray) -> tuple[float, complex]:
    """Residual of U E U^dag = c E with c the least-squares scalar.

    Returns (residual, c) with residual = ||U E U^dag - c E|| / ||E||.
    """
    u = np.asarray(u, dtype=complex)
    e = np.asarray(e, dtype=complex)
    conj = u @ e @ u.conj().T
    denom = np.vdot(e, e)
    if abs(denom) == 0:
        raise ValueError("error operator is zero")
    c = np.vdot(e, conj) / denom
    residual = np.linalg.norm(conj - c * e) / np.sqrt(abs(denom))
    return float(residual), complex(c)
