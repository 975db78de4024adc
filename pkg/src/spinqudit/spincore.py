"""Spin-I algebra: operators, states, parity, fidelity, Dicke embedding.

Basis convention used by the whole package: amplitude index 0 is the
|m = +I> level and index d-1 is |m = -I> (descending m).  The diagonal
of I_z therefore reads (I, I-1, ..., -I).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, sqrt

import numpy as np

from ._angular import wigner_small_d

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-10
NORM_TOL = 1e-12


@dataclass(frozen=True)
class SpinQuantum:
    """Spin quantum number in doubled form: two_I = 2I, dimension d = 2I + 1."""

    two_I: int

    def __post_init__(self):
        if not isinstance(self.two_I, (int, np.integer)) or self.two_I < 1:
            raise ValueError(f"two_I must be a positive integer, got {self.two_I!r}")

    @property
    def d(self) -> int:
        return self.two_I + 1

    @property
    def I(self) -> float:
        return self.two_I / 2.0

    def m_values(self) -> np.ndarray:
        """m from +I down to -I, matching the basis ordering."""
        return (self.two_I - 2 * np.arange(self.d)) / 2.0


SPIN_7_2 = SpinQuantum(7)


@dataclass(frozen=True)
class PureState:
    """Complex amplitude vector over |m = +I> ... |m = -I>."""

    amplitudes: np.ndarray
    basis_order: str = field(default="descending_m", compare=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if amps.ndim != 1:
            raise ValueError("amplitudes must be a 1-d vector")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: |psi| = {norm!r}")

    @property
    def d(self) -> int:
        return self.amplitudes.shape[0]

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite d x d matrix."""

    elements: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.elements, dtype=complex)
        object.__setattr__(self, "elements", rho)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        if np.abs(rho - rho.conj().T).max() > HERMITICITY_TOL:
            raise ValueError("density matrix not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace = {tr!r}, expected 1")
        evals = np.linalg.eigvalsh(rho)
        if evals.min() < EIGENVALUE_FLOOR:
            raise ValueError(f"negative eigenvalue {evals.min()!r}")

    @property
    def d(self) -> int:
        return self.elements.shape[0]

    def populations(self) -> np.ndarray:
        return np.diag(self.elements).real.copy()

    def purity(self) -> float:
        return float(np.trace(self.elements @ self.elements).real)


def as_density_matrix(state) -> DensityMatrix:
    """Accept a PureState, DensityMatrix, or raw array and return a DensityMatrix."""
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, PureState):
        return state.density_matrix()
    arr = np.asarray(state, dtype=complex)
    if arr.ndim == 1:
        return PureState(arr).density_matrix()
    return DensityMatrix(arr)


@dataclass(frozen=True)
class SpinOperators:
    """Dimensionless angular-momentum matrices in the descending-m basis."""

    ix: np.ndarray
    iy: np.ndarray
    iz: np.ndarray

    @property
    def d(self) -> int:
        return self.iz.shape[0]


def spin_operators(q: SpinQuantum) -> SpinOperators:
    """Ladder-operator construction; ix is real symmetric, iz diagonal descending."""
    m = q.m_values()
    iz = np.diag(m).astype(complex)
    # raising operator in this ordering maps index k -> k-1 (m -> m+1)
    I = q.I
    c = np.sqrt(I * (I + 1) - m[1:] * (m[1:] + 1))
    iplus = np.zeros((q.d, q.d), dtype=complex)
    iplus[np.arange(q.d - 1), np.arange(1, q.d)] = c
    ix = (iplus + iplus.conj().T) / 2.0
    iy = (iplus - iplus.conj().T) / 2.0j
    return SpinOperators(ix=ix, iy=iy, iz=iz)


def ladder_coefficients(q: SpinQuantum) -> np.ndarray:
    """Off-diagonal couplings c_k = 2 (I_x)_{k-1,k} for transitions k = 1..2I.

    For I = 7/2 these are (sqrt(7), sqrt(12), sqrt(15), sqrt(16), sqrt(15),
    sqrt(12), sqrt(7)).
    """
    m = q.m_values()
    I = q.I
    return np.sqrt(I * (I + 1) - m[1:] * (m[1:] + 1))


def parity_operator(q: SpinQuantum) -> np.ndarray:
    """Diagonal parity (-1)^(I+m), descending-m order."""
    exps = np.rint(q.I + q.m_values()).astype(int)
    return np.diag((-1.0) ** exps).astype(complex)


def wigner_d(q: SpinQuantum, m_row: float, m_col: float, beta: float) -> float:
    """Wigner small-d matrix element d^I_{m_row, m_col}(beta)."""
    two_mr = int(round(2 * m_row))
    two_mc = int(round(2 * m_col))
    if abs(2 * m_row - two_mr) > 1e-12 or abs(2 * m_col - two_mc) > 1e-12:
        raise ValueError("m values must be (half-)integers compatible with I")
    return wigner_small_d(q.two_I, two_mr, two_mc, beta)


def wigner_d_matrix(q: SpinQuantum, beta: float) -> np.ndarray:
    """Full real orthogonal d-matrix, rows/cols in descending m."""
    ms = q.m_values()
    return np.array([[wigner_d(q, mr, mc, beta) for mc in ms] for mr in ms])


def basis_state(q: SpinQuantum, m: float) -> PureState:
    """The I_z eigenstate |m>."""
    idx = _m_index(q, m)
    amps = np.zeros(q.d, dtype=complex)
    amps[idx] = 1.0
    return PureState(amps)


def _m_index(q: SpinQuantum, m: float) -> int:
    two_m = int(round(2 * m))
    if (q.two_I - two_m) % 2 != 0 or abs(two_m) > q.two_I:
        raise ValueError(f"invalid m = {m} for I = {q.I}")
    return (q.two_I - two_m) // 2


def spin_coherent_state(q: SpinQuantum, theta: float, phi: float) -> PureState:
    """Spin coherent state along (theta, phi).

    Defined as exp(-i theta (I . n_axis)) |+I> with n_axis =
    (-sin phi, cos phi, 0); amplitudes evaluate to
    a_m = e^{i(I-m)phi} d^I_{m,I}(theta).
    """
    ms = q.m_values()
    amps = np.array(
        [np.exp(1j * (q.I - m) * phi) * wigner_d(q, m, q.I, theta) for m in ms],
        dtype=complex,
    )
    return PureState(amps)


def cat_state(q: SpinQuantum, axis: str, xi: float) -> PureState:
    """Two-component cat (|c+> + e^{i xi} |c->)/sqrt(2) along x, y, or z.

    For z the components are the poles |+I>, |-I>.  For equatorial axes the
    antipodal partner is parity-paired, |c-> = Pi |c+>, which makes xi = 0 the
    even-parity cat (the convention under which the x-cat populations match
    the printed amplitude tables).
    """
    if axis == "z":
        amps = np.zeros(q.d, dtype=complex)
        amps[0] = 1.0 / sqrt(2.0)
        amps[-1] = np.exp(1j * xi) / sqrt(2.0)
        return PureState(amps)
    if axis == "x":
        phi_axis = 0.0
    elif axis == "y":
        phi_axis = np.pi / 2.0
    else:
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    plus = spin_coherent_state(q, np.pi / 2.0, phi_axis).amplitudes
    minus = parity_operator(q) @ plus
    return PureState((plus + np.exp(1j * xi) * minus) / sqrt(2.0))


def fidelity(rho: DensityMatrix, psi: PureState, tol: float = 1e-12) -> float:
    """State fidelity <psi| rho |psi>, clipped to [0, 1]."""
    if rho.d != psi.d:
        raise ValueError(f"dimension mismatch: rho is {rho.d}, psi is {psi.d}")
    val = np.vdot(psi.amplitudes, rho.elements @ psi.amplitudes)
    f = val.real
    if f < -tol or f > 1.0 + tol:
        raise ValueError(f"fidelity {f!r} outside [0, 1] beyond tolerance")
    return float(min(max(f, 0.0), 1.0))


DICKE_CAP_DEFAULT = 10


def dicke_embed(q: SpinQuantum, m: float, cap: int = DICKE_CAP_DEFAULT) -> np.ndarray:
    """|I, m> as the Dicke state of 2I qubits with I - m excitations.

    Returns a normalized vector of length 2^(2I); qubit strings are indexed
    by their binary value with bit (2I-1) as the leftmost qubit.  Refuses
    2I > cap to keep the embedding at desk scale.
    """
    n = q.two_I
    if n > cap:
        raise ValueError(f"2I = {n} exceeds the Dicke embedding cap {cap}")
    k = _m_index(q, m)  # number of excitations I - m
    vec = np.zeros(2**n, dtype=complex)
    amp = 1.0 / sqrt(comb(n, k))
    for idx in range(2**n):
        if bin(idx).count("1") == k:
            vec[idx] = amp
    return vec


def dicke_embed_state(q: SpinQuantum, psi: PureState, cap: int = DICKE_CAP_DEFAULT) -> np.ndarray:
    """Isometric image of a spin state in the symmetric subspace of 2I qubits."""
    vec = np.zeros(2**q.two_I, dtype=complex)
    for a, m in zip(psi.amplitudes, q.m_values()):
        if a != 0:
            vec += a * dicke_embed(q, m, cap=cap)
    return vec
