"""Measurement effects, experiment-design evaluation, shot simulation, MLE
reconstruction, and loglikelihood-ratio validation with parametric bootstrap.

Measurements are projective I.n measurements; effects are rank-1 projectors
onto eigenstates of I.n ordered by descending eigenvalue, so outcome 0 of
the theta = 0 axis is |m = +I>.  The MLE solver is a diluted R-rho-R
fixed-point iteration with backtracking that guarantees monotone
loglikelihood ascent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spincore import DensityMatrix, SpinQuantum, as_density_matrix, spin_operators

PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class ExperimentDesign:
    """Measurement axes (theta, phi) with a common shot count per axis."""

    axes: np.ndarray
    shots_per_axis: int

    def __post_init__(self):
        axes = np.asarray(self.axes, dtype=float)
        object.__setattr__(self, "axes", axes)
        if axes.ndim != 2 or axes.shape[1] != 2 or axes.shape[0] == 0:
            raise ValueError("axes must be a nonempty (N, 2) array of (theta, phi)")
        if self.shots_per_axis < 1:
            raise ValueError("shots_per_axis must be positive")

    @property
    def n_axes(self) -> int:
        return self.axes.shape[0]

    def total_shots(self) -> int:
        return self.n_axes * self.shots_per_axis

    def rotated(self, rot: np.ndarray) -> "ExperimentDesign":
        """Design with every axis direction rigidly rotated by the SO(3) rot."""
        dirs = np.stack(
            [
                np.sin(self.axes[:, 0]) * np.cos(self.axes[:, 1]),
                np.sin(self.axes[:, 0]) * np.sin(self.axes[:, 1]),
                np.cos(self.axes[:, 0]),
            ],
            axis=1,
        )
        new = dirs @ np.asarray(rot).T
        thetas = np.arccos(np.clip(new[:, 2], -1.0, 1.0))
        phis = np.mod(np.arctan2(new[:, 1], new[:, 0]), 2 * np.pi)
        return ExperimentDesign(np.stack([thetas, phis], axis=1), self.shots_per_axis)


@dataclass(frozen=True)
class ShotRecord:
    """Observed outcome counts per axis: (n_axes, d) nonnegative integers."""

    counts: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        if counts.ndim != 2 or np.any(counts < 0):
            raise ValueError("counts must be a nonnegative (n_axes, d) array")
        sums = counts.sum(axis=1)
        if np.any(sums != sums[0]):
            raise ValueError("every axis must carry the same number of shots")

    @property
    def shots_per_axis(self) -> int:
        return int(self.counts[0].sum())


@dataclass(frozen=True)
class MleResult:
    rho: DensityMatrix
    loglik: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class ValidationReport:
    lambda_observed: float
    null_samples: np.ndarray
    p_value: float
    dof_nominal: int
    n_excluded: int = 0

    def __post_init__(self):
        object.__setattr__(self, "null_samples", np.asarray(self.null_samples, dtype=float))
        frac = float(np.mean(self.null_samples >= self.lambda_observed))
        if abs(frac - self.p_value) > 1e-12:
            raise ValueError("p_value must be the fraction of null samples >= observed")


def axis_effects(q: SpinQuantum, theta: float, phi: float) -> np.ndarray:
    """Rank-1 projectors onto I.n eigenstates, descending eigenvalue order."""
    ops = spin_operators(q)
    n = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    gen = n[0] * ops.ix + n[1] * ops.iy + n[2] * ops.iz
    evals, evecs = np.linalg.eigh(gen)
    gaps = np.diff(evals)
    if np.any(gaps < 0.5):
        raise AssertionError("I.n spectrum must be nondegenerate with unit gaps")
    order = np.argsort(evals)[::-1]
    effects = np.empty((q.d, q.d, q.d), dtype=complex)
    for out, idx in enumerate(order):
        v = evecs[:, idx]
        effects[out] = np.outer(v, v.conj())
    return effects


def design_effects(design: ExperimentDesign, q: SpinQuantum) -> np.ndarray:
    """All effects of the design, shape (n_axes, d, d, d): axis, outcome."""
    return np.array([axis_effects(q, th, ph) for th, ph in design.axes])


def paper_design(q: SpinQuantum, shots_per_axis: int = 15) -> ExperimentDesign:
    """The 45-axis grid: theta in {pi/4, pi/3, 9 pi/20} x 15 equally spaced
    longitudes phi_n = 2 pi n / 15."""
    thetas = [np.pi / 4.0, np.pi / 3.0, 9.0 * np.pi / 20.0]
    axes = [(th, 2.0 * np.pi * n / 15.0) for th in thetas for n in range(15)]
    return ExperimentDesign(np.array(axes), shots_per_axis)


def frame_superoperator(design: ExperimentDesign, q: SpinQuantum) -> np.ndarray:
    """F = (1/N) sum_j |E_j><E_j| on the d^2-dimensional operator space."""
    eff = design_effects(design, q).reshape(-1, q.d * q.d)
    return (eff.conj().T @ eff) / eff.shape[0]


def tomographic_efficiency(f: np.ndarray, rank_tol: float = 1e-10) -> tuple[float, int]:
    """f_te = sqrt(Tr F^-1) and the rank of F; +inf when rank-deficient."""
    evals = np.linalg.eigvalsh(f)
    top = evals[-1]
    rank = int(np.sum(evals > rank_tol * top))
    if rank < f.shape[0]:
        return float("inf"), rank
    return float(np.sqrt(np.sum(1.0 / evals))), rank


def design_fte(design: ExperimentDesign, q: SpinQuantum) -> float:
    fte, _ = tomographic_efficiency(frame_superoperator(design, q))
    return fte


def two_design_fte(q: SpinQuantum) -> float:
    """Best possible efficiency over rank-1 POVM designs, attained by a
    2-design: the frame superoperator has eigenvalue 1/d on the identity
    component and 1/(d(d+1)) on the traceless ones, so

        f_te = sqrt(d + (d^2 - 1) d (d + 1)).
    """
    d = q.d
    return float(np.sqrt(d + (d * d - 1) * d * (d + 1)))


def uniform_axis_fte_analytic(q: SpinQuantum) -> float:
    """Spherically uniform I.n measurements: Tr F^-1 = d sum_k (2k+1)^2 over
    k = 0..2I (rotational Schur decomposition of the averaged pinching)."""
    d = q.d
    ks = np.arange(0, q.two_I + 1)
    return float(np.sqrt(d * np.sum((2 * ks + 1) ** 2)))


def uniform_random_design(n_axes: int, seed: int, shots_per_axis: int = 1) -> ExperimentDesign:
    """Axes drawn uniformly on the sphere (Monte Carlo efficiency studies)."""
    rng = np.random.default_rng(seed)
    z = rng.uniform(-1.0, 1.0, size=n_axes)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=n_axes)
    return ExperimentDesign(np.stack([np.arccos(z), phi], axis=1), shots_per_axis)


def born_probabilities(rho, design: ExperimentDesign, q: SpinQuantum) -> np.ndarray:
    """Tr(E_j rho) per axis and outcome, shape (n_axes, d)."""
    rho = as_density_matrix(rho)
    eff = design_effects(design, q).reshape(design.n_axes, q.d, -1)
    probs = (eff @ rho.elements.conj().ravel()).real
    return probs


def simulate_shots(
    rho,
    design: ExperimentDesign,
    seed: int,
    q: SpinQuantum,
    readout_flip: float | None = None,
) -> ShotRecord:
    """Multinomial draws from the Born probabilities, deterministic per seed.

    readout_flip is plumbing: with that probability a shot's outcome is
    replaced by a uniformly random other outcome.
    """
    probs = born_probabilities(rho, design, q)
    defect = np.abs(probs.sum(axis=1) - 1.0).max()
    if defect > 1e-6:
        raise ValueError(f"probability defect {defect:.2e} exceeds 1e-6")
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum(axis=1, keepdims=True)
    rng = np.random.default_rng(seed)
    counts = np.empty((design.n_axes, q.d), dtype=np.int64)
    for i in range(design.n_axes):
        counts[i] = rng.multinomial(design.shots_per_axis, probs[i])
    if readout_flip:
        counts = _apply_readout_flip(counts, readout_flip, rng)
    return ShotRecord(counts=counts, seed=seed)


def _apply_readout_flip(counts: np.ndarray, p_flip: float, rng: np.random.Generator) -> np.ndarray:
    out = counts.copy()
    n_axes, d = counts.shape
    for i in range(n_axes):
        for outcome in range(d):
            n_flip = rng.binomial(counts[i, outcome], p_flip)
            for _ in range(n_flip):
                other = int(rng.integers(0, d - 1))
                if other >= outcome:
                    other += 1
                out[i, outcome] -= 1
                out[i, other] += 1
    return out


# ---------------------------------------------------------------------------
# MLE


def _loglik(counts_flat: np.ndarray, probs_flat: np.ndarray) -> np.ndarray:
    return np.sum(counts_flat * np.log(np.maximum(probs_flat, PROB_FLOOR)), axis=-1)


def _mle_batch(
    counts: np.ndarray,
    effects_flat: np.ndarray,
    d: int,
    tol: float,
    max_iter: int,
    assert_monotone: bool = True,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Diluted R-rho-R MLE over a batch of count matrices.

    counts: (S, n_axes, d); effects_flat: (n_eff, d^2).
    Returns (rhos (S, d, d), logliks, iterations, converged).
    """
    s = counts.shape[0]
    counts_flat = counts.reshape(s, -1).astype(float)
    n_tot = counts_flat.sum(axis=1)
    rho = np.broadcast_to(np.eye(d, dtype=complex) / d, (s, d, d)).copy()
    probs = np.maximum((rho.reshape(s, -1).conj() @ effects_flat.T).real, PROB_FLOOR)
    ll = _loglik(counts_flat, probs)
    iterations = np.zeros(s, dtype=int)
    converged = np.zeros(s, dtype=bool)

    for it in range(max_iter):
        active = ~converged
        if not np.any(active):
            break
        idx = np.nonzero(active)[0]
        weights = counts_flat[idx] / probs[idx] / n_tot[idx, None]
        r = (weights @ effects_flat).reshape(-1, d, d)
        r = (r + r.conj().transpose(0, 2, 1)) / 2.0
        cand = np.einsum("sab,sbc,scd->sad", r, rho[idx], r)
        tr = np.einsum("saa->s", cand).real
        cand /= tr[:, None, None]
        cand = (cand + cand.conj().transpose(0, 2, 1)) / 2.0

        # backtracking toward the current iterate keeps the ascent monotone
        eps = np.zeros(len(idx))
        for _ in range(60):
            mixed = (1.0 - eps[:, None, None]) * cand + eps[:, None, None] * rho[idx]
            p_new = np.maximum((mixed.reshape(len(idx), -1).conj() @ effects_flat.T).real, PROB_FLOOR)
            ll_new = _loglik(counts_flat[idx], p_new)
            bad = ll_new < ll[idx] - 1e-9
            if not np.any(bad):
                break
            eps[bad] = np.where(eps[bad] == 0.0, 0.5, 1.0 - (1.0 - eps[bad]) / 2.0)
        else:
            mixed[bad] = rho[idx][bad]
            p_new[bad] = probs[idx][bad]
            ll_new[bad] = ll[idx][bad]
        if assert_monotone and np.any(ll_new < ll[idx] - 1e-9):
            raise AssertionError("loglikelihood decreased in an MLE step")

        gain = ll_new - ll[idx]
        rho[idx] = mixed
        probs[idx] = p_new
        ll[idx] = ll_new
        iterations[idx] = it + 1
        newly = gain < tol
        converged[idx[newly]] = True

    return rho, ll, iterations, converged


def mle_reconstruct(
    record: ShotRecord,
    design: ExperimentDesign,
    q: SpinQuantum,
    tol: float = 1e-10,
    max_iter: int = 5000,
) -> MleResult:
    """Maximum-likelihood state estimate from one shot record."""
    if record.counts.shape != (design.n_axes, q.d):
        raise ValueError("record does not match the design")
    if record.shots_per_axis != design.shots_per_axis:
        raise ValueError("record shot count does not match the design")
    effects_flat = design_effects(design, q).reshape(-1, q.d * q.d)
    rhos, lls, iters, conv = _mle_batch(
        record.counts[None], effects_flat, q.d, tol, max_iter
    )
    rho = _project_to_density_matrix(rhos[0])
    return MleResult(
        rho=rho, loglik=float(lls[0]), iterations=int(iters[0]), converged=bool(conv[0])
    )


def _project_to_density_matrix(rho: np.ndarray) -> DensityMatrix:
    """Clean up numerical residue (Hermitize, clip tiny negative eigenvalues)."""
    rho = (rho + rho.conj().T) / 2.0
    evals, evecs = np.linalg.eigh(rho)
    if evals.min() < -1e-10:
        raise ValueError(f"MLE produced eigenvalue {evals.min():.2e}")
    evals = np.clip(evals, 0.0, None)
    evals /= evals.sum()
    return DensityMatrix((evecs * evals) @ evecs.conj().T)


def loglik_ratio(record: ShotRecord, rho, design: ExperimentDesign, q: SpinQuantum) -> float:
    """lambda = -2 log(L(rho) / L_saturated), the saturated model fitting the
    per-axis empirical frequencies."""
    rho = as_density_matrix(rho)
    counts = record.counts.astype(float)
    shots = counts.sum(axis=1, keepdims=True)
    freqs = counts / shots
    with np.errstate(divide="ignore", invalid="ignore"):
        sat = np.where(counts > 0, counts * np.log(freqs), 0.0).sum()
    probs = born_probabilities(rho, design, q)
    model = np.sum(counts * np.log(np.maximum(probs, PROB_FLOOR)))
    return float(2.0 * (sat - model))


def dof_nominal(design: ExperimentDesign, q: SpinQuantum) -> int:
    """N_axes (d-1) - (d^2 - 1): saturated model dof minus state dof."""
    return design.n_axes * (q.d - 1) - (q.d * q.d - 1)


def parametric_bootstrap(
    rho_mle,
    design: ExperimentDesign,
    record: ShotRecord,
    q: SpinQuantum,
    n_samples: int = 1000,
    seed: int = 0,
    tol: float = 1e-8,
    max_iter: int = 3000,
) -> ValidationReport:
    """Null distribution of lambda by resampling from rho_mle and re-running
    the MLE per sample; the p-value is the observed lambda's upper tail
    fraction.  Non-converged inner MLEs are excluded and counted.
    """
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    rho_mle = as_density_matrix(rho_mle)
    lam_obs = loglik_ratio(record, rho_mle, design, q)

    probs = born_probabilities(rho_mle, design, q)
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum(axis=1, keepdims=True)
    rng = np.random.default_rng(seed)
    counts = np.empty((n_samples, design.n_axes, q.d), dtype=np.int64)
    for i in range(design.n_axes):
        counts[:, i, :] = rng.multinomial(design.shots_per_axis, probs[i], size=n_samples)

    effects_flat = design_effects(design, q).reshape(-1, q.d * q.d)
    rhos, lls, _, conv = _mle_batch(counts, effects_flat, q.d, tol, max_iter)

    counts_flat = counts.reshape(n_samples, -1).astype(float)
    shots = design.shots_per_axis
    with np.errstate(divide="ignore", invalid="ignore"):
        sat = np.where(counts_flat > 0, counts_flat * np.log(counts_flat / shots), 0.0).sum(axis=1)
    lams = 2.0 * (sat - lls)
    lams = lams[conv]
    n_excluded = int(n_samples - conv.sum())
    p = float(np.mean(lams >= lam_obs))
    return ValidationReport(
        lambda_observed=float(lam_obs),
        null_samples=lams,
        p_value=p,
        dof_nominal=dof_nominal(design, q),
        n_excluded=n_excluded,
    )


def reduced_parity_fidelity(
    populations: np.ndarray, parity_contrast: float, phase_mismatch: float
) -> float:
    """Pole-cat fidelity from the reduced tomography of populations plus
    parity-fringe contrast: (p_+I + p_-I)/2 + (C_p/2) cos(phase_mismatch).

    phase_mismatch is the fitted fringe phase minus the target cat phase.
    """
    populations = np.asarray(populations, dtype=float)
    if np.any(populations < -1e-12) or abs(populations.sum() - 1.0) > 1e-9:
        raise ValueError("populations must be a normalized distribution")
    if not (0.0 <= parity_contrast <= 1.0 + 1e-12):
        raise ValueError("parity contrast must lie in [0, 1]")
    return float(
        (populations[0] + populations[-1]) / 2.0
        + (parity_contrast / 2.0) * np.cos(phase_mismatch)
    )
