"""Pulse scheduling, GRF and lab-frame evolution, covariant rotations,
virtual-SNAP, cat-preparation sequences, and the dephasing channel.

GRF evolution is exact per piecewise-constant segment (eigendecomposition of
the Hermitian generator); the lab-frame integrator solves the full
time-dependent Schrodinger equation with no rotating-wave approximation and
reports states transformed into the generalized rotating frame.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .hamiltonian import (
    GAMMA_N_SB123,
    DriveTone,
    FrameDefinition,
    StaticParams,
    grf_drive_hamiltonian,
    static_hamiltonian,
)
from .spincore import (
    DensityMatrix,
    PureState,
    SpinQuantum,
    as_density_matrix,
    ladder_coefficients,
    parity_operator,
    spin_operators,
)

# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class ToneSegment:
    duration: float
    tones: tuple

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("duration must be nonnegative")
        object.__setattr__(self, "tones", tuple(self.tones))


@dataclass(frozen=True)
class FrameUpdateSegment:
    """Zero-duration virtual-SNAP: shift the 2I clock phases by delta_phi."""

    delta_phi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "delta_phi", np.asarray(self.delta_phi, dtype=float))


@dataclass(frozen=True)
class WaitSegment:
    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("duration must be nonnegative")


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered time segments of tones, frame updates, and waits."""

    segments: tuple

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    def total_duration(self) -> float:
        return sum(getattr(s, "duration", 0.0) for s in self.segments)

    def to_json(self) -> str:
        out = []
        for seg in self.segments:
            if isinstance(seg, ToneSegment):
                out.append(
                    {
                        "type": "tones",
                        "duration_s": seg.duration,
                        "tones": [
                            {
                                "transition": t.transition_index,
                                "b1_tesla": t.b1,
                                "phase_rad": t.phase,
                                "carrier_hz": t.f,
                            }
                            for t in seg.tones
                        ],
                    }
                )
            elif isinstance(seg, FrameUpdateSegment):
                out.append({"type": "frame_update", "delta_phi_rad": list(seg.delta_phi)})
            elif isinstance(seg, WaitSegment):
                out.append({"type": "wait", "duration_s": seg.duration})
            else:
                raise TypeError(f"unknown segment {seg!r}")
        return json.dumps({"segments": out}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PulseSchedule":
        doc = json.loads(text)
        segs = []
        for seg in doc["segments"]:
            kind = seg["type"]
            if kind == "tones":
                tones = tuple(
                    DriveTone(
                        transition_index=t["transition"],
                        b1=t["b1_tesla"],
                        phase=t["phase_rad"],
                        f=t.get("carrier_hz", 0.0),
                    )
                    for t in seg["tones"]
                )
                segs.append(ToneSegment(duration=seg["duration_s"], tones=tones))
            elif kind == "frame_update":
                segs.append(FrameUpdateSegment(delta_phi=seg["delta_phi_rad"]))
            elif kind == "wait":
                segs.append(WaitSegment(duration=seg["duration_s"]))
            else:
                raise ValueError(f"unknown segment type {kind!r}")
        return cls(tuple(segs))


def covariant_tone_set(
    q: SpinQuantum, f_rabi: float, tone_phase: float = 0.0, gamma_n: float = GAMMA_N_SB123
) -> tuple:
    """Equal-amplitude tones on all 2I transitions giving covariant Rabi
    frequency f_rabi (b1 = 2 f_rabi / gamma_n each)."""
    b1 = 2.0 * f_rabi / gamma_n
    return tuple(
        DriveTone(transition_index=k, b1=b1, phase=tone_phase) for k in range(1, q.two_I + 1)
    )


def subspace_level_indices(q: SpinQuantum, sub_two_I: int) -> tuple[int, int]:
    """Inclusive (lo, hi) basis-index range of the centered spin-I_sub subspace."""
    if sub_two_I < 1 or sub_two_I > q.two_I:
        raise ValueError("subspace must satisfy 1 <= sub_two_I <= two_I")
    if (q.two_I - sub_two_I) % 2 != 0:
        raise ValueError(
            f"subspace parity mismatch: 2I = {q.two_I}, sub 2I = {sub_two_I} "
            "must differ by an even integer"
        )
    lo = (q.d - (sub_two_I + 1)) // 2
    return lo, lo + sub_two_I


def subspace_rotation_amplitudes(
    q: SpinQuantum, sub_two_I: int, total_b1_budget: float
) -> np.ndarray:
    """Per-tone B1 vector realizing a covariant rotation inside the subspace.

    Tones outside the subspace are zero; inside, B_1k is proportional to the
    subspace ladder coefficient divided by the full-space one, scaled so the
    root-sum-square of amplitudes equals total_b1_budget (constant total
    drive power).
    """
    lo, hi = subspace_level_indices(q, sub_two_I)
    c_full = ladder_coefficients(q)
    c_sub = ladder_coefficients(SpinQuantum(sub_two_I))
    b1 = np.zeros(q.two_I)
    for j, k in enumerate(range(lo + 1, hi + 1)):
        b1[k - 1] = c_sub[j] / c_full[k - 1]
    norm = np.linalg.norm(b1)
    return b1 * (total_b1_budget / norm)


def subspace_tone_set(
    q: SpinQuantum,
    sub_two_I: int,
    f_rabi: float,
    tone_phase: float = 0.0,
    gamma_n: float = GAMMA_N_SB123,
) -> tuple:
    """Tones driving a covariant subspace rotation at Rabi frequency f_rabi."""
    lo, hi = subspace_level_indices(q, sub_two_I)
    c_full = ladder_coefficients(q)
    c_sub = ladder_coefficients(SpinQuantum(sub_two_I))
    tones = []
    for j, k in enumerate(range(lo + 1, hi + 1)):
        b1 = 2.0 * f_rabi * c_sub[j] / (gamma_n * c_full[k - 1])
        tones.append(DriveTone(transition_index=k, b1=b1, phase=tone_phase))
    return tuple(tones)


# ---------------------------------------------------------------------------
# unitaries


def _expm_hermitian(h: np.ndarray, prefactor: complex) -> np.ndarray:
    """exp(prefactor * H) for Hermitian H, exact via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(prefactor * w)) @ v.conj().T


def covariant_rotation(q: SpinQuantum, theta: float, phi: float) -> np.ndarray:
    """R_Theta(phi) = exp(i Theta (I_x cos phi + I_y sin phi))."""
    ops = spin_operators(q)
    gen = np.cos(phi) * ops.ix + np.sin(phi) * ops.iy
    return _expm_hermitian(gen, 1j * theta)


def virtual_snap(frame: FrameDefinition, delta_phi) -> tuple[FrameDefinition, np.ndarray]:
    """Frame-phase update and the equivalent instantaneous diagonal unitary.

    Level k acquires xi_k = -sum_{i<=k} delta_phi_i with the |+I> level as
    phase reference (xi_0 = 0); the returned unitary is diag(e^{i xi}).
    """
    dphi = np.asarray(delta_phi, dtype=float)
    if dphi.shape[0] != frame.n_transitions:
        raise ValueError("delta_phi must have length 2I")
    xi = np.concatenate(([0.0], -np.cumsum(dphi)))
    return frame.advanced(dphi), np.diag(np.exp(1j * xi))


def snap_phases(delta_phi) -> np.ndarray:
    """The per-level phases xi induced by a frame update (xi_0 = 0)."""
    dphi = np.asarray(delta_phi, dtype=float)
    return np.concatenate(([0.0], -np.cumsum(dphi)))


# ---------------------------------------------------------------------------
# evolution results


@dataclass(frozen=True)
class EvolutionResult:
    """Trajectory of a schedule: times, states, populations, <I_z>.

    states is an (N, d) complex array for pure-state evolution or (N, d, d)
    for density matrices; populations is (d, N) with unit column sums.
    """

    times: np.ndarray
    states: np.ndarray
    populations: np.ndarray
    iz_expect: np.ndarray
    pop_tol: float = field(default=1e-9, compare=False)

    def __post_init__(self):
        sums = self.populations.sum(axis=0)
        worst = np.abs(sums - 1.0).max() if sums.size else 0.0
        if worst > self.pop_tol:
            raise ValueError(f"population columns deviate from 1 by {worst:.2e}")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def final_pure(self) -> PureState:
        vec = self.states[-1]
        return PureState(vec / np.linalg.norm(vec))

    def leakage(self, q: SpinQuantum, sub_two_I: int) -> np.ndarray:
        """1 - (population inside the centered subspace), per recorded time."""
        lo, hi = subspace_level_indices(q, sub_two_I)
        return 1.0 - self.populations[lo : hi + 1, :].sum(axis=0)


def _result_from_states(times, states, q: SpinQuantum, pop_tol: float = 1e-9) -> EvolutionResult:
    states = np.asarray(states)
    m = q.m_values()
    if states.ndim == 2:  # pure
        pops = (np.abs(states) ** 2).T
    else:  # density matrices
        pops = np.einsum("nii->ni", states).real.T
    iz = (m[:, None] * pops).sum(axis=0)
    return EvolutionResult(
        times=np.asarray(times, dtype=float),
        states=states,
        populations=pops,
        iz_expect=iz,
        pop_tol=pop_tol,
    )


# ---------------------------------------------------------------------------
# GRF evolution (piecewise-constant, exact)


def evolve_grf(
    state,
    schedule: PulseSchedule,
    q: SpinQuantum,
    gamma_n: float = GAMMA_N_SB123,
    frame: FrameDefinition | None = None,
    sample_dt: float | None = None,
) -> EvolutionResult:
    """Evolve through a schedule in the generalized rotating frame.

    Timed segments apply exp(-i 2 pi H_GRF dt) built from the RWA drive
    Hamiltonian (plus the frame's detuning diagonal); frame updates apply
    the virtual-SNAP diagonal instantaneously.  With sample_dt set, states
    are recorded inside segments on that grid as well as at boundaries.
    """
    if frame is None:
        frame = FrameDefinition.bare(q)
    is_pure = not isinstance(state, DensityMatrix)
    if is_pure:
        psi = state.amplitudes.copy() if isinstance(state, PureState) else np.asarray(state, dtype=complex).copy()
    else:
        rho = state.elements.copy()

    times = [0.0]
    states = [psi.copy() if is_pure else rho.copy()]
    t = 0.0

    def record(tt, value):
        times.append(tt)
        states.append(value.copy())

    def apply_unitary(u):
        nonlocal psi, rho
        if is_pure:
            psi = u @ psi
        else:
            rho = u @ rho @ u.conj().T

    for seg in schedule.segments:
        if isinstance(seg, FrameUpdateSegment):
            frame, snap = virtual_snap(frame, seg.delta_phi)
            apply_unitary(snap)
            record(t, psi if is_pure else rho)
            continue
        if isinstance(seg, WaitSegment):
            h = grf_drive_hamiltonian((), q, gamma_n, frame).matrix
        elif isinstance(seg, ToneSegment):
            h = grf_drive_hamiltonian(seg.tones, q, gamma_n, frame).matrix
        else:
            raise TypeError(f"unknown segment {seg!r}")
        duration = seg.duration
        if duration == 0.0:
            continue
        w, v = np.linalg.eigh(h)

        def u_at(dt):
            return (v * np.exp(-2j * np.pi * w * dt)) @ v.conj().T

        if sample_dt is not None and sample_dt > 0:
            n_inner = int(np.floor(duration / sample_dt))
            start_psi = psi.copy() if is_pure else None
            start_rho = None if is_pure else rho.copy()
            for i in range(1, n_inner + 1):
                dt = i * sample_dt
                if dt >= duration - 1e-15 * max(duration, 1.0):
                    break
                u = u_at(dt)
                if is_pure:
                    record(t + dt, u @ start_psi)
                else:
                    record(t + dt, u @ start_rho @ u.conj().T)
        apply_unitary(u_at(duration))
        t += duration
        record(t, psi if is_pure else rho)

    return _result_from_states(times, states, q)


# ---------------------------------------------------------------------------
# lab-frame evolution (no RWA)


def evolve_lab(
    state,
    schedule: PulseSchedule,
    frame: FrameDefinition,
    p: StaticParams,
    q: SpinQuantum,
    tol: float = 1e-10,
    sample_dt: float | None = None,
) -> EvolutionResult:
    """Integrate the full time-dependent Schrodinger equation in the lab
    frame and report states in the generalized rotating frame.

    Tones must carry their lab carriers (DriveTone.f); frame updates shift
    the phases of subsequent tones and re-anchor the reported frame, exactly
    as the hardware clock update would.  The norm is a diagnostic: it must
    stay within 10 * tol or a RuntimeError is raised.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    psi_lab = state.amplitudes.copy() if isinstance(state, PureState) else np.asarray(state, dtype=complex).copy()
    h_static = static_hamiltonian(p, q)
    ix = spin_operators(q).ix
    nu = frame.level_freqs()
    xi = np.zeros(q.d)  # accumulated per-level SNAP phases of the reporting frame
    accum = frame.accumulated_phases.copy()

    times = [0.0]
    states = [_to_frame(psi_lab, nu, xi, 0.0)]
    t = 0.0

    for seg in schedule.segments:
        if isinstance(seg, FrameUpdateSegment):
            accum = accum + seg.delta_phi
            xi = xi + snap_phases(seg.delta_phi)
            times.append(t)
            states.append(_to_frame(psi_lab, nu, xi, t))
            continue
        duration = getattr(seg, "duration", 0.0)
        if duration == 0.0:
            continue
        if isinstance(seg, WaitSegment):
            fs = np.zeros(0)
            phis = np.zeros(0)
            b1s = np.zeros(0)
        else:
            ks = np.array([tone.transition_index for tone in seg.tones], dtype=int)
            fs = np.array([tone.f for tone in seg.tones])
            if np.any(fs == 0.0):
                raise ValueError("lab-frame evolution requires tone carriers (DriveTone.f)")
            phis = np.array([tone.phase for tone in seg.tones]) + accum[ks - 1]
            b1s = np.array([tone.b1 for tone in seg.tones])

        def rhs(tt, y):
            amp = np.sum(b1s * np.cos(2 * np.pi * fs * tt + phis)) if b1s.size else 0.0
            h = h_static - p.gamma_n * amp * ix
            return -2j * np.pi * (h @ y)

        if sample_dt is not None and sample_dt > 0:
            inner = np.arange(sample_dt, duration, sample_dt)
            t_eval = np.concatenate((inner, [duration]))
        else:
            t_eval = np.array([duration])
        # integrate two orders tighter than the requested global tolerance so
        # accumulated error stays within the 10 * tol norm contract
        solver_tol = max(tol * 1e-2, 1e-13)
        sol = solve_ivp(
            rhs,
            (t, t + duration),
            psi_lab,
            t_eval=t + t_eval,
            method="DOP853",
            rtol=solver_tol,
            atol=solver_tol * 0.1,
            first_step=min(duration, 1e-3 / max(p.gamma_n * p.b0, 1.0)),
        )
        if not sol.success:
            raise RuntimeError(f"lab-frame integration failed: {sol.message}")
        for tt, col in zip(sol.t, sol.y.T):
            times.append(tt)
            states.append(_to_frame(col, nu, xi, tt))
        psi_lab = sol.y[:, -1].copy()
        t += duration
        norm_err = abs(np.linalg.norm(psi_lab) - 1.0)
        if norm_err > 10 * tol:
            raise RuntimeError(f"norm drift {norm_err:.2e} exceeds 10*tol")

    return _result_from_states(times, states, q, pop_tol=max(1e-9, 30 * tol))


def _to_frame(psi_lab: np.ndarray, nu: np.ndarray, xi: np.ndarray, t: float) -> np.ndarray:
    """GRF report: diag(e^{i xi}) U_GRF†(t) psi_lab."""
    return np.exp(1j * (2 * np.pi * nu * t + xi)) * psi_lab


def resonant_carriers(p: StaticParams, q: SpinQuantum) -> np.ndarray:
    """Lab carriers per matrix transition k=1..2I (adjacent energy differences)."""
    frame = FrameDefinition.on_resonance(p, q)
    return frame.ref_freqs.copy()


def with_carriers(tones, carriers: np.ndarray) -> tuple:
    """Return tones with DriveTone.f filled in from the per-transition carriers."""
    out = []
    for tone in tones:
        out.append(
            DriveTone(
                transition_index=tone.transition_index,
                b1=tone.b1,
                phase=tone.phase,
                f=float(carriers[tone.transition_index - 1]),
            )
        )
    return tuple(out)


# ---------------------------------------------------------------------------
# cat-state preparation sequences


def givens_cat_sequence(
    q: SpinQuantum,
    target_sub_two_I: int,
    f_rabi: float,
    gamma_n: float = GAMMA_N_SB123,
) -> PulseSchedule:
    """Pi/2 pulse on the lowest-m transition of the subspace, then a ladder of
    pi pulses on ascending pairs.

    Single-tone pulses are timed as t_pi = 1/(2 f_rabi) with the ladder
    coefficient folded into each tone's amplitude; the pi/2 pulse phase is
    chosen so the ideal sequence ends exactly on
    (|+I_sub> + e^{i pi} |-I_sub>)/sqrt(2).
    """
    lo, hi = subspace_level_indices(q, target_sub_two_I)
    c = ladder_coefficients(q)
    d_sub = target_sub_two_I + 1
    # ends on xi = pi: xi = -(d_sub - 1) pi/2 - phi0  (mod 2 pi)
    phi0 = float(np.mod(-(d_sub - 1) * np.pi / 2.0 - np.pi, 2 * np.pi))
    t_pi = 1.0 / (2.0 * f_rabi)

    def tone(k: int, phase: float) -> DriveTone:
        return DriveTone(transition_index=k, b1=2.0 * f_rabi / (gamma_n * c[k - 1]), phase=phase)

    segs = [ToneSegment(duration=t_pi / 2.0, tones=(tone(hi, phi0),))]
    for k in range(hi - 1, lo, -1):
        segs.append(ToneSegment(duration=t_pi, tones=(tone(k, 0.0),)))
    return PulseSchedule(tuple(segs))


SNAP_CAT_DELTA_PHI = np.array([-np.pi / 2, np.pi / 2] * 4)[:7]


def snap_cat_sequence(
    q: SpinQuantum, f_rabi: float, orient: str = "x", gamma_n: float = GAMMA_N_SB123
) -> PulseSchedule:
    """Covariant pi/2 rotation plus alternating -pi/2, +pi/2 frame update.

    orient="x" stops at the equatorial cat; orient="z" applies a second
    covariant pi/2 rotation plus a trailing frame-phase redefinition that
    pins the pole cat exactly on (|+I> + i |-I>)/sqrt(2).  (The rotation
    alone lands on the conjugate phase; the cat phase is a property of the
    frame definition, so the zero-duration clock update fixes the
    convention at no cost.)
    """
    if q.two_I % 2 == 0:
        raise ValueError("the alternating frame update makes cats for half-integer spins only")
    t_half = 1.0 / (4.0 * f_rabi)
    dphi = np.array([-np.pi / 2, np.pi / 2] * q.d)[: q.two_I]
    segs = [
        ToneSegment(duration=t_half, tones=covariant_tone_set(q, f_rabi, np.pi / 2, gamma_n)),
        FrameUpdateSegment(delta_phi=dphi),
    ]
    if orient == "z":
        segs.append(
            ToneSegment(duration=t_half, tones=covariant_tone_set(q, f_rabi, np.pi / 2, gamma_n))
        )
        phase_fix = np.zeros(q.two_I)
        phase_fix[-1] = -np.pi
        segs.append(FrameUpdateSegment(delta_phi=phase_fix))
    elif orient != "x":
        raise ValueError(f"orient must be 'x' or 'z', got {orient!r}")
    return PulseSchedule(tuple(segs))


def snap_subspace_cat_sequence(
    q: SpinQuantum, sub_two_I: int, f_rabi: float, gamma_n: float = GAMMA_N_SB123
) -> PulseSchedule:
    """x-oriented subspace cat: subspace pi/2 rotation plus alternating
    frame update restricted to the subspace transitions."""
    lo, hi = subspace_level_indices(q, sub_two_I)
    if sub_two_I % 2 == 0:
        raise ValueError("subspace cats require half-integer subspace spin")
    t_half = 1.0 / (4.0 * f_rabi)
    dphi = np.zeros(q.two_I)
    alt = np.array([-np.pi / 2, np.pi / 2] * q.d)[:sub_two_I]
    dphi[lo : lo + sub_two_I] = alt
    return PulseSchedule(
        (
            ToneSegment(
                duration=t_half,
                tones=subspace_tone_set(q, sub_two_I, f_rabi, np.pi / 2, gamma_n),
            ),
            FrameUpdateSegment(delta_phi=dphi),
        )
    )


# ---------------------------------------------------------------------------
# dephasing


@dataclass(frozen=True)
class NoiseModel:
    """Per-coherence dephasing times with a global stretch exponent.

    t2_map[i, j] is the coherence time of rho_{ij} in seconds (the diagonal
    is ignored; energy relaxation is taken as infinitely slow).
    readout_flip is plumbing for a per-shot misread probability and does not
    enter the dephasing channel.
    """

    t2_map: np.ndarray
    alpha: float = 1.0
    readout_flip: float | None = None

    def __post_init__(self):
        t2 = np.asarray(self.t2_map, dtype=float)
        object.__setattr__(self, "t2_map", t2)
        if t2.ndim != 2 or t2.shape[0] != t2.shape[1]:
            raise ValueError("t2_map must be square")
        if not np.array_equal(t2, t2.T):  # inf-safe symmetry check
            raise ValueError("t2_map must be symmetric")
        off = t2[~np.eye(t2.shape[0], dtype=bool)]
        if np.any(off <= 0):
            raise ValueError("T2 times must be positive")
        if not (0 < self.alpha <= 2):
            raise ValueError("alpha must lie in (0, 2]")
        if self.readout_flip is not None and not (0 <= self.readout_flip <= 1):
            raise ValueError("readout_flip must be a probability")

    @classmethod
    def uniform(cls, q: SpinQuantum, t2: float, alpha: float = 1.0) -> "NoiseModel":
        t2_map = np.full((q.d, q.d), t2)
        return cls(t2_map=t2_map, alpha=alpha)

    @classmethod
    def from_level_noise(
        cls,
        q: SpinQuantum,
        zeeman_rate: float,
        quad_rate: float = 0.0,
        alpha: float = 1.0,
    ) -> "NoiseModel":
        """Rates built from independent level-frequency noise channels:

        1/T2(m, m') = zeeman_rate * |m - m'| + quad_rate * |m^2 - m'^2|.

        For alpha = 1 each |difference| kernel is Gram-representable, so the
        induced decay matrix is positive semidefinite and the channel is
        completely positive by construction.
        """
        m = q.m_values()
        rates = zeeman_rate * np.abs(m[:, None] - m[None, :]) + quad_rate * np.abs(
            m[:, None] ** 2 - m[None, :] ** 2
        )
        with np.errstate(divide="ignore"):
            t2 = np.where(rates > 0, 1.0 / np.where(rates > 0, rates, 1.0), np.inf)
        np.fill_diagonal(t2, np.inf)
        return cls(t2_map=t2, alpha=alpha)

    def decay_factors(self, tau: float) -> np.ndarray:
        """Entrywise exp[-(tau/T2)^alpha], ones on the diagonal."""
        if tau < 0:
            raise ValueError("tau must be nonnegative")
        with np.errstate(divide="ignore"):
            ratio = np.where(np.isinf(self.t2_map), 0.0, tau / self.t2_map)
        factors = np.exp(-(ratio**self.alpha))
        np.fill_diagonal(factors, 1.0)
        return factors


def apply_dephasing(rho: DensityMatrix, tau: float, noise: NoiseModel) -> DensityMatrix:
    """rho_{mm'} -> rho_{mm'} exp[-(tau/T2_{mm'})^alpha]; populations untouched."""
    factors = noise.decay_factors(tau)
    if factors.shape != rho.elements.shape:
        raise ValueError("noise model dimension mismatch")
    return DensityMatrix(rho.elements * factors)


# ---------------------------------------------------------------------------
# parity oscillations


@dataclass(frozen=True)
class ParityOscillation:
    phis: np.ndarray
    samples: np.ndarray
    contrast: float
    phase: float
    harmonic: int
    dominant_harmonic: int
    offset: float
    fit_residual: float
    flagged: bool


def simulate_parity_oscillation(
    state,
    q: SpinQuantum,
    n_phi: int = 181,
    harmonic: int | None = None,
    residual_threshold: float = 1e-6,
) -> ParityOscillation:
    """Parity expectation after R_{pi/2}(phi) on a phi grid, with a
    fixed-frequency sinusoid fit.

    The fit model is offset + contrast * cos(harmonic * phi + phase); the
    default harmonic 2I is the full-space cat fringe frequency.  If the
    residual exceeds the threshold the result is flagged (the samples remain
    valid, only the single-harmonic model failed).
    """
    if n_phi < 4 * q.d:
        raise ValueError(f"n_phi must be at least 4(2I+1) = {4 * q.d}")
    rho = as_density_matrix(state).elements
    pi_op = parity_operator(q)
    ops = spin_operators(q)
    phis = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    samples = np.empty(n_phi)
    for i, phi in enumerate(phis):
        gen = np.cos(phi) * ops.ix + np.sin(phi) * ops.iy
        u = _expm_hermitian(gen, 1j * np.pi / 2.0)
        samples[i] = np.trace(pi_op @ u @ rho @ u.conj().T).real

    spectrum = np.abs(np.fft.rfft(samples)) / n_phi
    dominant = int(np.argmax(spectrum[1:]) + 1) if n_phi > 2 else 0

    k = q.two_I if harmonic is None else int(harmonic)
    design = np.column_stack([np.cos(k * phis), np.sin(k * phis), np.ones(n_phi)])
    coef, *_ = np.linalg.lstsq(design, samples, rcond=None)
    a, b, c0 = coef
    contrast = float(np.hypot(a, b))
    phase = float(np.arctan2(-b, a))
    residual = float(np.sqrt(np.mean((design @ coef - samples) ** 2)))
    return ParityOscillation(
        phis=phis,
        samples=samples,
        contrast=contrast,
        phase=phase,
        harmonic=k,
        dominant_harmonic=dominant,
        offset=float(c0),
        fit_residual=residual,
        flagged=residual > residual_threshold,
    )
