"""Static and driven Hamiltonians in the lab and generalized rotating frames.

All Hamiltonians are in frequency units (Hz); propagators are
exp(-i 2 pi H t).  Matrix transition k (k = 1..2I) couples basis indices
(k-1, k), i.e. the m pair (I-k+1, I-k).  The paper-style NMR labeling runs
the other way (f_1 is the lowest-m pair), so nmr_frequencies() reports in
that order while DriveTone/FrameDefinition index transitions in matrix
order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .spincore import SpinQuantum, ladder_coefficients, spin_operators

GAMMA_N_SB123 = 5.55e6  # Hz/T, 123Sb nuclear gyromagnetic ratio
B0_DEFAULT = 1.384  # T

QUAD_SYMMETRY_TOL = 1e-12
ZEEMAN_MIXING_TOL = 1e-3


@dataclass(frozen=True)
class StaticParams:
    """Static-field parameters: B0 (T), gamma_n (Hz/T), quadrupole tensor (Hz)."""

    b0: float = B0_DEFAULT
    gamma_n: float = GAMMA_N_SB123
    quad: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))

    def __post_init__(self):
        if self.b0 <= 0:
            raise ValueError("b0 must be positive")
        quad = np.asarray(self.quad, dtype=float)
        object.__setattr__(self, "quad", quad)
        if quad.shape != (3, 3):
            raise ValueError("quad must be a 3x3 tensor in Hz")
        if np.abs(quad - quad.T).max() > QUAD_SYMMETRY_TOL:
            raise ValueError("quad tensor must be symmetric")

    @classmethod
    def from_fq(cls, f_q: float, b0: float = B0_DEFAULT, gamma_n: float = GAMMA_N_SB123) -> "StaticParams":
        """Scalar convenience: diagonal Q_zz such that the NMR frequencies in
        the f_1..f_2I labeling are spaced by exactly +f_q (signed).

        The level shift Q_zz m^2 with Q_zz = -f_q/2 gives
        f_{k+1} - f_k = -2 Q_zz = f_q.
        """
        quad = np.zeros((3, 3))
        quad[2, 2] = -f_q / 2.0
        return cls(b0=b0, gamma_n=gamma_n, quad=quad)


@dataclass(frozen=True)
class DriveTone:
    """One tone of the multi-frequency NMR drive.

    transition_index k in 1..2I addresses matrix pair (k-1, k); f is the
    lab-frame carrier in Hz (ignored by the RWA rotating-frame builder,
    which assumes the tone rides its own clock), phase in radians, b1 in
    tesla with a piecewise-constant envelope.
    """

    transition_index: int
    b1: float
    phase: float = 0.0
    f: float = 0.0

    def __post_init__(self):
        if self.b1 < 0:
            raise ValueError("b1 must be nonnegative")
        if self.transition_index < 1:
            raise ValueError("transition_index counts from 1")


@dataclass(frozen=True)
class FrameDefinition:
    """The 2I software clocks defining the generalized rotating frame.

    ref_freqs[k-1] is the reference frequency of matrix transition k (Hz);
    accumulated_phases tracks the running frame-update totals (radians);
    detunings are delta_k = f_k^ref - f_k^0.  level0_freq anchors the
    per-level clock of index 0 (|+I>), so the per-level frame frequency is
    nu_j = level0_freq + sum_{k<=j} ref_freqs[k-1].
    """

    ref_freqs: np.ndarray
    accumulated_phases: np.ndarray
    detunings: np.ndarray
    level0_freq: float = 0.0

    def __post_init__(self):
        for name in ("ref_freqs", "accumulated_phases", "detunings"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
        n = self.ref_freqs.shape[0]
        if self.accumulated_phases.shape[0] != n or self.detunings.shape[0] != n:
            raise ValueError("ref_freqs, accumulated_phases, detunings must share length 2I")

    @property
    def n_transitions(self) -> int:
        return self.ref_freqs.shape[0]

    @classmethod
    def on_resonance(cls, p: StaticParams, q: SpinQuantum) -> "FrameDefinition":
        """Zero-detuning frame tracking every transition of the static Hamiltonian."""
        h = static_hamiltonian(p, q)
        energies = _zeeman_dominant_energies(h)
        refs = np.diff(energies)
        return cls(
            ref_freqs=refs,
            accumulated_phases=np.zeros(q.two_I),
            detunings=np.zeros(q.two_I),
            level0_freq=float(energies[0]),
        )

    @classmethod
    def bare(cls, q: SpinQuantum) -> "FrameDefinition":
        """All-zero frame: pure-drive GRF evolution with no detunings."""
        return cls(
            ref_freqs=np.zeros(q.two_I),
            accumulated_phases=np.zeros(q.two_I),
            detunings=np.zeros(q.two_I),
        )

    def with_detunings(self, detunings) -> "FrameDefinition":
        det = np.asarray(detunings, dtype=float)
        return replace(self, ref_freqs=self.ref_freqs - self.detunings + det, detunings=det)

    def level_freqs(self) -> np.ndarray:
        """Per-level clock frequencies nu_j (Hz), length d."""
        return self.level0_freq + np.concatenate(([0.0], np.cumsum(self.ref_freqs)))

    def advanced(self, delta_phi) -> "FrameDefinition":
        """New frame with clock phases shifted by delta_phi (radians)."""
        dphi = np.asarray(delta_phi, dtype=float)
        if dphi.shape != self.accumulated_phases.shape:
            raise ValueError("delta_phi must have length 2I")
        return replace(self, accumulated_phases=self.accumulated_phases + dphi)


@dataclass(frozen=True)
class GrfHamiltonian:
    """Rotating-frame drive Hamiltonian in Hz; tridiagonal under the RWA."""

    matrix: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", h)
        if np.abs(h - h.conj().T).max() > 1e-12:
            raise ValueError("GRF Hamiltonian must be Hermitian")


def static_hamiltonian(p: StaticParams, q: SpinQuantum) -> np.ndarray:
    """-gamma_n B0 I_z + sum_ab Q_ab I_a I_b, in Hz."""
    ops = spin_operators(q)
    axes = (ops.ix, ops.iy, ops.iz)
    h = -p.gamma_n * p.b0 * ops.iz
    for a in range(3):
        for b in range(3):
            if p.quad[a, b] != 0.0:
                h = h + p.quad[a, b] * (axes[a] @ axes[b])
    return h


def _zeeman_dominant_energies(h: np.ndarray, mixing_tol: float = ZEEMAN_MIXING_TOL) -> np.ndarray:
    """Level energies assigned to basis states, requiring weak state mixing.

    Returns energies ordered by basis index (descending m).  Raises if any
    eigenvector has more than mixing_tol population outside its dominant
    basis state, which signals that the Zeeman-dominance assumption failed;
    use full diagonalization in that regime.
    """
    evals, evecs = np.linalg.eigh(h)
    d = h.shape[0]
    energies = np.full(d, np.nan)
    claimed = np.zeros(d, dtype=bool)
    for i in range(d):
        weights = np.abs(evecs[:, i]) ** 2
        j = int(np.argmax(weights))
        mixing = 1.0 - weights[j]
        if mixing > mixing_tol:
            raise ValueError(
                f"state mixing {mixing:.2e} exceeds {mixing_tol:.1e}; Zeeman-dominant "
                "level assignment is invalid, use full diagonalization"
            )
        if claimed[j]:
            raise ValueError("ambiguous level assignment; spectrum too degenerate")
        claimed[j] = True
        energies[j] = evals[i]
    return energies


def nmr_frequencies(h_static: np.ndarray, mixing_tol: float = ZEEMAN_MIXING_TOL) -> np.ndarray:
    """Adjacent-level transition frequencies f_1..f_2I in the paper labeling.

    f_1 is the lowest-m pair (-I <-> -I+1) and f_2I the highest
    (I-1 <-> I).  In the descending-m basis that is the reversed sequence of
    adjacent energy differences.
    """
    if np.abs(h_static - h_static.conj().T).max() > 1e-9:
        raise ValueError("h_static must be Hermitian")
    energies = _zeeman_dominant_energies(h_static, mixing_tol)
    # basis index j has m = I - j, so E ascends with j; f_1 = E[d-1] - E[d-2]
    return np.diff(energies)[::-1].copy()


def lab_drive_hamiltonian(
    t: float, tones, q: SpinQuantum, gamma_n: float = GAMMA_N_SB123
) -> np.ndarray:
    """-gamma_n I_x sum_k cos(2 pi f_k t + phi_k) B_1k, in Hz (no RWA)."""
    tones = list(tones)
    if not tones:
        raise ValueError("tones must be nonempty")
    ix = spin_operators(q).ix
    amp = 0.0
    for tone in tones:
        amp += tone.b1 * np.cos(2 * np.pi * tone.f * t + tone.phase)
    return -gamma_n * amp * ix


def lab_drive_hamiltonian_fn(tones, q: SpinQuantum, gamma_n: float = GAMMA_N_SB123):
    """H_drive(t) as a callable, for the time-dependent integrator."""
    tones = list(tones)
    if not tones:
        raise ValueError("tones must be nonempty")
    ix = spin_operators(q).ix
    fs = np.array([tone.f for tone in tones])
    phases = np.array([tone.phase for tone in tones])
    b1s = np.array([tone.b1 for tone in tones])

    def h_drive(t: float) -> np.ndarray:
        amp = float(np.sum(b1s * np.cos(2 * np.pi * fs * t + phases)))
        return -gamma_n * amp * ix

    return h_drive


def grf_drive_hamiltonian(
    tones,
    q: SpinQuantum,
    gamma_n: float = GAMMA_N_SB123,
    frame: FrameDefinition | None = None,
) -> GrfHamiltonian:
    """RWA drive Hamiltonian in the generalized rotating frame.

    Off-diagonal (k-1, k) entry is -(gamma_n/4) c_k B_1k e^{i phi_k} with
    c_k the ladder coefficient; the diagonal carries -cumsum(detunings)
    (zero on resonance).  Tone phases are taken relative to the current
    frame clocks, so accumulated frame phases do not re-enter here.
    """
    d = q.d
    h = np.zeros((d, d), dtype=complex)
    seen: set[int] = set()
    c = ladder_coefficients(q)
    for tone in tones:
        k = tone.transition_index
        if k > q.two_I:
            raise ValueError(f"transition_index {k} out of range for 2I = {q.two_I}")
        if k in seen:
            raise ValueError(f"duplicate transition_index {k}")
        seen.add(k)
        val = -(gamma_n / 4.0) * c[k - 1] * tone.b1 * np.exp(1j * tone.phase)
        h[k - 1, k] = val
        h[k, k - 1] = np.conj(val)
    if frame is not None:
        h[np.diag_indices(d)] -= np.concatenate(([0.0], np.cumsum(frame.detunings)))
    return GrfHamiltonian(h)


def grf_transform(h_lab_fn, frame: FrameDefinition, t: float) -> np.ndarray:
    """U† H_lab U - (i/2pi) U† dU/dt with U = diag(e^{-i 2 pi nu_j t}).

    The exact frame transform used by the non-RWA integrator; with the
    drive off and the frame on resonance this vanishes identically.
    """
    nu = frame.level_freqs()
    phases = np.exp(1j * 2 * np.pi * nu * t)  # diag of U†
    h = np.asarray(h_lab_fn(t), dtype=complex)
    return phases[:, None] * h * phases.conj()[None, :] - np.diag(nu)
