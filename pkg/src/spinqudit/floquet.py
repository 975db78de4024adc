"""Cross-coupling (power-broadening) error analysis for multi-tone driving.

Implements the printed periodic cross-talk model: every tone reaches every
transition, with off-resonant terms detuned by multiples of the quadrupole
spacing f_q.  The model Hamiltonian is in Hz and is evolved with
exp(-i 2 pi H t).  Note the model's rate parameter relates to the covariant
Rabi frequency of the equivalent physically-normalized drive by a factor 2
(its resonant part is -(f_rabi/2) I_x, giving an <I_z> period of 2/f_rabi);
contrast curves are reported against the model's own nominal ratio
f_rabi/f_q, matching the printed figure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .spincore import SpinQuantum, ladder_coefficients, spin_operators

SPIN = SpinQuantum(7)


@dataclass(frozen=True)
class CrossCouplingParams:
    f_rabi: float
    f_q: float

    def __post_init__(self):
        if self.f_q == 0:
            raise ValueError("f_q must be nonzero")


@dataclass(frozen=True)
class SweepResult:
    ratios: np.ndarray
    contrast: np.ndarray
    method: str

    def __post_init__(self):
        object.__setattr__(self, "ratios", np.asarray(self.ratios, dtype=float))
        object.__setattr__(self, "contrast", np.asarray(self.contrast, dtype=float))
        if np.any(self.contrast < -1.0) or np.any(self.contrast > 1.0 + 1e-9):
            raise ValueError("contrast out of range")

    def error(self) -> np.ndarray:
        return 1.0 - self.contrast

    def power_law_exponent(self, lo: float = 1e-3, hi: float = 3e-2) -> float:
        """Log-log slope of (1 - contrast) vs ratio over [lo, hi]."""
        mask = (self.ratios >= lo * (1 - 1e-12)) & (self.ratios <= hi * (1 + 1e-12))
        x = np.log(self.ratios[mask])
        y = np.log(self.error()[mask])
        slope, _ = np.polyfit(x, y, 1)
        return float(slope)


def _fourier_components(params: CrossCouplingParams, q: SpinQuantum = SPIN) -> dict[int, np.ndarray]:
    """Fourier components H_m (Hz) of the periodic model, H(t) = sum_m H_m e^{i m w_q t}.

    Transition j carries the off-resonant comb m in [1-j, 2I-j] with constant
    amplitude -(f_rabi/4) c_j on the upper diagonal; Hermiticity gives
    H_{-m} = H_m^dagger.
    """
    d = q.d
    n_tones = q.two_I
    c = ladder_coefficients(q)
    comps: dict[int, np.ndarray] = {}
    for m in range(-(n_tones - 1), n_tones):
        h = np.zeros((d, d), dtype=complex)
        for j in range(1, n_tones + 1):
            if 1 - j <= m <= n_tones - j:
                h[j - 1, j] += -(params.f_rabi / 4.0) * c[j - 1]
            if 1 - j <= -m <= n_tones - j:
                h[j, j - 1] += -(params.f_rabi / 4.0) * c[j - 1]
        comps[m] = h
    return comps


def cross_coupling_hamiltonian(
    params: CrossCouplingParams, t: float, q: SpinQuantum = SPIN
) -> np.ndarray:
    """The periodic cross-talk Hamiltonian at time t, in Hz.

    Entry (j-1, j) is -(f_rabi/4) c_j e^{-i (j-1) w_q t} zeta(t) with
    zeta = sum_{n=0}^{2I-1} e^{i n w_q t} and w_q = 2 pi f_q.
    """
    w_q = 2 * np.pi * params.f_q
    comps = _fourier_components(params, q)
    d = q.d
    h = np.zeros((d, d), dtype=complex)
    for m, hm in comps.items():
        h += hm * np.exp(1j * m * w_q * t)
    return h


def average_hamiltonian(params: CrossCouplingParams, q: SpinQuantum = SPIN) -> dict[str, np.ndarray]:
    """Zeroth- and first-order Magnus terms of the periodic model, in Hz.

    order0 is the time average -(f_rabi/2) I_x.  order1 evaluates the
    standard first-order Magnus correction analytically from the Fourier
    components:

        order1 = (1/f_q) sum_{m>0} (1/m) ([H_m, H_-m] - [H_m - H_-m, H_0])

    which equals 2 pi (-i/2T) int_0^T dt int_0^t dt' [H(t), H(t')] for an Hz
    Hamiltonian propagated as exp(-i 2 pi H t), i.e. the later-time operator
    on the left.  (The printed correction matrix corresponds to this
    ordering; writing the earlier-time operator on the left flips the sign.)
    """
    if abs(params.f_rabi) >= abs(params.f_q):
        import warnings

        warnings.warn("Magnus expansion outside its perturbative regime (f_rabi >= f_q)")
    comps = _fourier_components(params, q)
    order0 = -(params.f_rabi / 2.0) * spin_operators(q).ix
    h0 = comps[0]
    d = q.d
    order1 = np.zeros((d, d), dtype=complex)
    mmax = max(comps)
    for m in range(1, mmax + 1):
        hm = comps[m]
        hmm = comps[-m]
        term = (hm @ hmm - hmm @ hm) - ((hm - hmm) @ h0 - h0 @ (hm - hmm))
        order1 += term / m
    order1 *= 1.0 / params.f_q
    return {"order0": order0, "order1": order1}


def magnus_order1_quadrature(
    params: CrossCouplingParams, q: SpinQuantum = SPIN, n_grid: int = 4096
) -> np.ndarray:
    """Direct double-commutator quadrature for the first-order term,
    midpoint rule on both axes (later-time operator on the left)."""
    T = 1.0 / params.f_q
    ts = (np.arange(n_grid) + 0.5) * (T / n_grid)
    hs = np.array([cross_coupling_hamiltonian(params, t, q) for t in ts])
    d = q.d
    acc = np.zeros((d, d), dtype=complex)
    # int_0^T dt int_0^t dt' [H(t), H(t')] via cumulative midpoint sums
    cum = np.cumsum(hs, axis=0) * (T / n_grid)  # int_0^t H(t') dt' at cell ends
    inner = cum - 0.5 * hs * (T / n_grid)  # half-cell correction at the midpoint
    for i in range(n_grid):
        acc += hs[i] @ inner[i] - inner[i] @ hs[i]
    acc *= T / n_grid
    return 2 * np.pi * (-1j / (2.0 * T)) * acc


def _period_propagators(
    ratio: float, q: SpinQuantum, n_intra: int, rtol: float
) -> tuple[np.ndarray, np.ndarray]:
    """One-period propagator U(T) and cumulative intra-period propagators.

    Works in normalized units f_q = 1, f_rabi = ratio.
    """
    params = CrossCouplingParams(f_rabi=ratio, f_q=1.0)
    comps = _fourier_components(params, q)
    ms = np.array(sorted(comps))
    stack = np.array([comps[m] for m in ms])
    d = q.d
    w = 2 * np.pi  # w_q for f_q = 1

    def rhs(t, y):
        u = y.reshape(d, d)
        phases = np.exp(1j * ms * w * t)
        h = np.tensordot(phases, stack, axes=1)
        return (-2j * np.pi * (h @ u)).ravel()

    taus = np.linspace(0.0, 1.0, n_intra + 1)[1:]
    sol = solve_ivp(
        rhs,
        (0.0, 1.0),
        np.eye(d, dtype=complex).ravel(),
        t_eval=taus,
        method="DOP853",
        rtol=rtol,
        atol=rtol * 1e-2,
    )
    if not sol.success:
        raise RuntimeError(f"period propagator integration failed: {sol.message}")
    intra = sol.y.T.reshape(n_intra, d, d)
    return intra[-1], intra


def _n_fast_periods(ratio: float, n_periods_rabi: float) -> int:
    # the model's <I_z> period is 2/f_rabi, i.e. 2/ratio fast periods
    return max(2, int(np.ceil(n_periods_rabi * 2.0 / ratio)))


def _max_iz_exact(ratio: float, q: SpinQuantum, n_periods_rabi: float, n_intra: int, rtol: float) -> float:
    u_T, intra = _period_propagators(ratio, q, n_intra, rtol)
    d = q.d
    psi = np.zeros(d, dtype=complex)
    psi[-1] = 1.0  # |-I>
    m = q.m_values()
    best = -q.I
    for _ in range(_n_fast_periods(ratio, n_periods_rabi)):
        states = intra @ psi  # (n_intra, d)
        iz = ((np.abs(states) ** 2) * m).sum(axis=1)
        best = max(best, float(iz.max()))
        psi = u_T @ psi
    return best


def micromotion_kick(params: CrossCouplingParams, t: float, q: SpinQuantum = SPIN) -> np.ndarray:
    """First-order periodic kick operator K(t) = sum_{m!=0} H_m e^{i m w t}/(i m f_q).

    Hermitian and dimensionless; the first-order Floquet propagator is
    e^{-iK(t)} e^{-i 2 pi (order0 + order1) t} e^{iK(0)}.
    """
    comps = _fourier_components(params, q)
    d = q.d
    k = np.zeros((d, d), dtype=complex)
    w_q = 2 * np.pi * params.f_q
    for m, hm in comps.items():
        if m == 0:
            continue
        k += hm * np.exp(1j * m * w_q * t) / (1j * m * params.f_q)
    return k


def _max_iz_magnus1(ratio: float, q: SpinQuantum, n_periods_rabi: float, n_intra: int) -> float:
    """Evolve under order0 + order1 with the first-order micromotion kick,
    on the same quantized time grid as the exact method."""
    params = CrossCouplingParams(f_rabi=ratio, f_q=1.0)
    terms = average_hamiltonian(params, q)
    h = terms["order0"] + terms["order1"]
    w, v = np.linalg.eigh(h)
    d = q.d
    psi0 = np.zeros(d, dtype=complex)
    psi0[-1] = 1.0
    taus = np.linspace(0.0, 1.0, n_intra + 1)[1:]
    kicks = np.empty((n_intra, d, d), dtype=complex)
    for j, tau in enumerate(taus):
        kw, kv = np.linalg.eigh(micromotion_kick(params, tau, q))
        kicks[j] = (kv * np.exp(-1j * kw)) @ kv.conj().T
    kw0, kv0 = np.linalg.eigh(micromotion_kick(params, 0.0, q))
    kick0 = (kv0 * np.exp(1j * kw0)) @ kv0.conj().T
    coeffs = v.conj().T @ (kick0 @ psi0)
    intra_phase = np.exp(-2j * np.pi * np.outer(taus, w))  # (n_intra, d)
    strobe = np.exp(-2j * np.pi * w)  # advance by T = 1
    m = q.m_values()
    best = -q.I
    cur = coeffs.copy()
    for _ in range(_n_fast_periods(ratio, n_periods_rabi)):
        bare = (intra_phase * cur) @ v.T  # (n_intra, d) before the kick
        states = np.einsum("jab,jb->ja", kicks, bare)
        iz = ((np.abs(states) ** 2) * m).sum(axis=1)
        best = max(best, float(iz.max()))
        cur = cur * strobe
    return best


def contrast_sweep(
    ratios,
    method: str = "exact",
    q: SpinQuantum = SPIN,
    n_periods_rabi: float = 8.0,
    n_intra: int = 64,
    rtol: float = 1e-12,
) -> SweepResult:
    """Normalized max <I_z>/I of the driven model per f_rabi/f_q ratio.

    The exact method integrates one period of the time-dependent model to
    high accuracy and applies stroboscopic powers with dense intra-period
    sampling (n_intra points per fast period over n_periods_rabi Rabi
    periods -- the grid matters in the 4th decimal of the contrast, so both
    methods share it); magnus1 evolves under order0 + order1.  Integration
    failures flag the point with NaN contrast rather than aborting the
    sweep.
    """
    ratios = np.asarray(ratios, dtype=float)
    if np.any(ratios <= 0):
        raise ValueError("ratios must be positive")
    out = np.empty_like(ratios)
    for i, r in enumerate(ratios):
        try:
            if method == "exact":
                best = _max_iz_exact(r, q, n_periods_rabi, n_intra, rtol)
            elif method == "magnus1":
                best = _max_iz_magnus1(r, q, n_periods_rabi, n_intra)
            else:
                raise ValueError(f"unknown method {method!r}")
            out[i] = best / q.I
        except RuntimeError:
            out[i] = np.nan
    return SweepResult(ratios=ratios, contrast=out, method=method)
