import numpy as np
import pytest

from spinqudit import (
    DriveTone,
    FrameDefinition,
    FrameUpdateSegment,
    NoiseModel,
    PulseSchedule,
    StaticParams,
    ToneSegment,
    WaitSegment,
    apply_dephasing,
    basis_state,
    cat_state,
    covariant_rotation,
    covariant_tone_set,
    evolve_grf,
    evolve_lab,
    givens_cat_sequence,
    parity_operator,
    resonant_carriers,
    simulate_parity_oscillation,
    snap_cat_sequence,
    snap_subspace_cat_sequence,
    spin_coherent_state,
    spin_operators,
    subspace_level_indices,
    subspace_rotation_amplitudes,
    subspace_tone_set,
    virtual_snap,
    with_carriers,
)
from spinqudit.hamiltonian import GAMMA_N_SB123
from spinqudit.presets import device_a_noise
from spinqudit.wigner import bloch_rotation_matrix

from conftest import SI_XCAT, random_density_matrix, random_pure

F_RABI = 163.4


class TestCovariantRotation:
    def test_zero_angle_identity(self, q7):
        assert np.abs(covariant_rotation(q7, 0.0, 1.2) - np.eye(8)).max() < 1e-14

    def test_pi_pulse_inverts_poles(self, q7):
        u = covariant_rotation(q7, np.pi, -np.pi / 2)
        final = u @ basis_state(q7, -3.5).amplitudes
        assert abs(final[0]) ** 2 == pytest.approx(1.0, abs=1e-10)

    def test_half_pi_lands_on_equator_scs(self, q7):
        u = covariant_rotation(q7, np.pi / 2, -np.pi / 2)
        final = u @ basis_state(q7, -3.5).amplitudes
        target = spin_coherent_state(q7, np.pi / 2, np.pi)
        assert abs(np.vdot(target.amplitudes, final)) == pytest.approx(1.0, abs=1e-10)

    def test_inverse_composition(self, q7):
        u = covariant_rotation(q7, 0.8, 2.1)
        v = covariant_rotation(q7, -0.8, 2.1)
        assert np.abs(u @ v - np.eye(8)).max() < 1e-12

    def test_bloch_vector_transforms_classically(self, q7, rng):
        ops = spin_operators(q7)
        for _ in range(4):
            theta, phi = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
            psi = random_pure(rng)
            u = covariant_rotation(q7, theta, phi)
            before = np.array(
                [np.vdot(psi, g @ psi).real for g in (ops.ix, ops.iy, ops.iz)]
            )
            after_psi = u @ psi
            after = np.array(
                [np.vdot(after_psi, g @ after_psi).real for g in (ops.ix, ops.iy, ops.iz)]
            )
            assert np.abs(after - bloch_rotation_matrix(theta, phi) @ before).max() < 1e-10


class TestEvolveGrf:
    def test_covariant_rabi_closed_form(self, q7):
        sched = PulseSchedule(
            (ToneSegment(duration=2.5 / F_RABI, tones=covariant_tone_set(q7, F_RABI)),)
        )
        res = evolve_grf(
            basis_state(q7, -3.5), sched, q7, sample_dt=1 / (200 * F_RABI)
        )
        ideal = -3.5 * np.cos(2 * np.pi * F_RABI * res.times)
        assert np.abs(res.iz_expect - ideal).max() < 1e-9

    def test_pi_time(self, q7):
        t_pi = 1.0 / (2 * F_RABI)
        assert t_pi == pytest.approx(3.0599e-3, rel=1e-4)
        sched = PulseSchedule(
            (ToneSegment(duration=t_pi, tones=covariant_tone_set(q7, F_RABI)),)
        )
        res = evolve_grf(basis_state(q7, -3.5), sched, q7)
        assert res.populations[0, -1] == pytest.approx(1.0, abs=1e-10)

    def test_empty_schedule(self, q7, rng):
        psi = random_pure(rng)
        res = evolve_grf(np.array(psi), PulseSchedule(()), q7)
        assert np.abs(res.final - psi).max() == 0.0

    def test_norm_preserved_through_arbitrary_schedule(self, q7, rng):
        segs = []
        for _ in range(6):
            tones = tuple(
                DriveTone(
                    transition_index=int(k),
                    b1=float(rng.uniform(0, 1e-5)),
                    phase=float(rng.uniform(0, 2 * np.pi)),
                )
                for k in rng.choice(7, size=3, replace=False) + 1
            )
            segs.append(ToneSegment(duration=float(rng.uniform(0, 4e-3)), tones=tones))
            segs.append(FrameUpdateSegment(delta_phi=rng.uniform(-np.pi, np.pi, 7)))
        res = evolve_grf(basis_state(q7, 1.5), PulseSchedule(tuple(segs)), q7)
        assert abs(np.linalg.norm(res.final) - 1.0) < 1e-12

    def test_density_matrix_evolution_matches_pure(self, q7):
        sched = snap_cat_sequence(q7, F_RABI, "z")
        psi0 = basis_state(q7, -3.5)
        pure = evolve_grf(psi0, sched, q7).final
        rho = evolve_grf(psi0.density_matrix(), sched, q7).final
        assert np.abs(rho - np.outer(pure, pure.conj())).max() < 1e-12


class TestVirtualSnap:
    def test_zero_update_is_identity(self, q7):
        frame = FrameDefinition.bare(q7)
        _, u = virtual_snap(frame, np.zeros(7))
        assert np.abs(u - np.eye(8)).max() == 0.0

    def test_alternating_update_creates_si_xcat(self, q7):
        scs = spin_coherent_state(q7, np.pi / 2, np.pi)
        _, snap = virtual_snap(FrameDefinition.bare(q7), np.array([-np.pi / 2, np.pi / 2] * 4)[:7])
        result = snap @ scs.amplitudes
        assert abs(np.vdot(SI_XCAT, result)) == pytest.approx(1.0, abs=1e-12)

    def test_single_pi_update_phases(self, q7):
        dphi = np.zeros(7)
        dphi[0] = np.pi
        _, u = virtual_snap(FrameDefinition.bare(q7), dphi)
        phases = np.angle(np.diag(u))
        assert phases[0] == 0.0
        assert np.allclose(np.abs(phases[1:]), np.pi)

    def test_commutes_with_diagonal_evolution(self, q7):
        det = np.linspace(3.0, 21.0, 7)
        frame = FrameDefinition.bare(q7).with_detunings(det)
        dphi = np.linspace(-1.0, 1.0, 7)
        psi = basis_state(q7, 0.5).amplitudes
        sched_a = PulseSchedule(
            (WaitSegment(duration=1e-3), FrameUpdateSegment(delta_phi=dphi))
        )
        sched_b = PulseSchedule(
            (FrameUpdateSegment(delta_phi=dphi), WaitSegment(duration=1e-3))
        )
        ra = evolve_grf(np.array(psi), sched_a, q7, frame=frame)
        rb = evolve_grf(np.array(psi), sched_b, q7, frame=frame)
        assert np.abs(ra.final - rb.final).max() < 1e-12


class TestSubspaceRotations:
    def test_center_tone_only_for_spin_half(self, q7):
        b1 = subspace_rotation_amplitudes(q7, 1, 1.0)
        assert np.count_nonzero(b1) == 1
        assert b1[3] == pytest.approx(1.0)

    def test_spin_three_half_ratios(self, q7):
        b1 = subspace_rotation_amplitudes(q7, 3, 2.0)
        nz = b1[2:5]
        expected = np.array([np.sqrt(3) / np.sqrt(15), 2.0 / np.sqrt(16), np.sqrt(3) / np.sqrt(15)])
        assert np.allclose(nz / nz[1], expected / expected[1], atol=1e-12)
        assert np.linalg.norm(b1) == pytest.approx(2.0)

    def test_parity_mismatch_rejected(self, q7):
        with pytest.raises(ValueError, match="parity"):
            subspace_rotation_amplitudes(q7, 4, 1.0)

    def test_subspace_rabi_no_leakage(self, q7):
        tones = subspace_tone_set(q7, 3, F_RABI)
        sched = PulseSchedule((ToneSegment(duration=1.5 / F_RABI, tones=tones),))
        res = evolve_grf(
            basis_state(q7, -1.5), sched, q7, sample_dt=1 / (100 * F_RABI)
        )
        assert res.iz_expect.min() == pytest.approx(-1.5, abs=1e-9)
        assert res.iz_expect.max() == pytest.approx(1.5, abs=1e-9)
        assert res.leakage(q7, 3).max() < 1e-9


class TestCatSequences:
    def test_givens_full_cat_populations(self, q7):
        res = evolve_grf(basis_state(q7, -3.5), givens_cat_sequence(q7, 7, F_RABI), q7)
        pops = res.populations[:, -1]
        assert pops[0] == pytest.approx(0.5, abs=1e-10)
        assert pops[7] == pytest.approx(0.5, abs=1e-10)
        assert pops[1:7].max() < 1e-10

    def test_givens_lands_on_xi_pi(self, q7):
        res = evolve_grf(basis_state(q7, -3.5), givens_cat_sequence(q7, 7, F_RABI), q7)
        target = cat_state(q7, "z", np.pi)
        assert abs(np.vdot(target.amplitudes, res.final)) == pytest.approx(1.0, abs=1e-10)

    def test_givens_trivial_subspace(self, q7):
        sched = givens_cat_sequence(q7, 1, F_RABI)
        assert len(sched.segments) == 1  # just the pi/2 pulse
        res = evolve_grf(basis_state(q7, -0.5), sched, q7)
        pops = res.populations[:, -1]
        assert pops[3] == pytest.approx(0.5, abs=1e-10)
        assert pops[4] == pytest.approx(0.5, abs=1e-10)

    @pytest.mark.parametrize("sub,periods", [(7, 7), (5, 5), (3, 3)])
    def test_givens_parity_periods(self, q7, sub, periods):
        lo, hi = subspace_level_indices(q7, sub)
        start = basis_state(q7, q7.m_values()[hi])
        res = evolve_grf(start, givens_cat_sequence(q7, sub, F_RABI), q7)
        par = simulate_parity_oscillation(res.final_pure(), q7, harmonic=sub)
        assert par.dominant_harmonic == periods

    def test_snap_x_matches_si_vector(self, q7):
        res = evolve_grf(basis_state(q7, -3.5), snap_cat_sequence(q7, F_RABI, "x"), q7)
        assert abs(np.vdot(SI_XCAT, res.final)) == pytest.approx(1.0, abs=1e-10)

    def test_snap_z_target(self, q7):
        res = evolve_grf(basis_state(q7, -3.5), snap_cat_sequence(q7, F_RABI, "z"), q7)
        target = cat_state(q7, "z", np.pi / 2)
        assert abs(np.vdot(target.amplitudes, res.final)) == pytest.approx(1.0, abs=1e-10)

    def test_snap_subspace_cat_zero_parity(self, q7):
        lo, hi = subspace_level_indices(q7, 5)
        start = basis_state(q7, q7.m_values()[hi])
        res = evolve_grf(start, snap_subspace_cat_sequence(q7, 5, F_RABI), q7)
        par_op = parity_operator(q7)
        val = np.vdot(res.final, par_op @ res.final).real
        assert abs(val) < 1e-10  # xi = pi/2 equatorial cats have zero parity
        assert res.leakage(q7, 5)[-1] < 1e-10

    def test_one_axis_twisting_identity(self, q7):
        ops = spin_operators(q7)
        r0 = covariant_rotation(q7, np.pi / 2, 0.0)
        rm = covariant_rotation(q7, np.pi / 2, -np.pi / 2)
        twist = np.diag(np.exp(-1j * (np.pi / 2) * np.diag(ops.iz).real ** 2))
        m = r0 @ twist @ rm
        i = 1j
        printed = np.array(
            [
                [1, 0, 0, 0, 0, 0, 0, i],
                [0, -i, 0, 0, 0, 0, 1, 0],
                [0, 0, 1, 0, 0, i, 0, 0],
                [0, 0, 0, -i, 1, 0, 0, 0],
                [0, 0, 0, i, 1, 0, 0, 0],
                [0, 0, 1, 0, 0, -i, 0, 0],
                [0, i, 0, 0, 0, 0, 1, 0],
                [1, 0, 0, 0, 0, 0, 0, -i],
            ]
        ) / np.sqrt(2)
        assert _diag_phase_residual(m, printed) < 1e-12

    def test_givens_and_snap_agree_after_phase_alignment(self, q7):
        psi0 = basis_state(q7, -3.5)
        g = evolve_grf(psi0, givens_cat_sequence(q7, 7, F_RABI), q7).final  # xi = pi
        s = evolve_grf(psi0, snap_cat_sequence(q7, F_RABI, "z"), q7).final  # xi = pi/2
        shift = np.zeros(7)
        shift[-1] = -np.pi / 2  # advance xi by pi/2
        _, align = virtual_snap(FrameDefinition.bare(q7), shift)
        assert abs(np.vdot(g, align @ s)) == pytest.approx(1.0, abs=1e-9)


def _diag_phase_residual(m: np.ndarray, printed: np.ndarray) -> float:
    """Worst deviation over D_L m D_R = printed with unit-modulus diagonals,
    solved per antidiagonal 2x2 block."""
    d = m.shape[0]
    dl = np.zeros(d, dtype=complex)
    dr = np.zeros(d, dtype=complex)
    for i in range(d // 2):
        j = d - 1 - i
        dr[i] = 1.0
        dl[i] = printed[i, i] / m[i, i]
        dl[j] = printed[j, i] / m[j, i]
        dr[j] = printed[i, j] / (dl[i] * m[i, j])
    for v in np.concatenate([dl, dr]):
        if abs(abs(v) - 1.0) > 1e-12:
            return float("inf")
    return float(np.abs(np.diag(dl) @ m @ np.diag(dr) - printed).max())


class TestEvolveLab:
    def test_drive_off_static_in_frame(self, q7):
        p = StaticParams.from_fq(28e3)
        frame = FrameDefinition.on_resonance(p, q7)
        psi0 = spin_coherent_state(q7, np.pi / 2, 0.3)
        sched = PulseSchedule((WaitSegment(duration=2e-4),))
        res = evolve_lab(psi0, sched, frame, p, q7, tol=1e-10)
        assert abs(abs(np.vdot(psi0.amplitudes, res.final)) - 1.0) < 1e-8

    def test_cross_coupling_error_at_experimental_ratio(self, q7):
        # covariant ratio 1e-2; scaled-down carrier keeps the run fast while
        # the counter-rotating (Bloch-Siegert) effect stays negligible
        f_q = 10e3
        f_cov = 1e-2 * f_q
        p = StaticParams.from_fq(f_q, b0=0.1e6 / GAMMA_N_SB123)
        frame = FrameDefinition.on_resonance(p, q7)
        tones = with_carriers(covariant_tone_set(q7, f_cov), frame.ref_freqs)
        t_total = 0.75 / f_cov
        sched = PulseSchedule((ToneSegment(duration=t_total, tones=tones),))
        res = evolve_lab(
            basis_state(q7, -3.5), sched, frame, p, q7, tol=1e-10,
            sample_dt=t_total / 600,
        )
        contrast = res.iz_expect.max() / q7.I
        assert 3.3e-5 < 1.0 - contrast < 3e-4

    def test_invalid_tol(self, q7):
        p = StaticParams.from_fq(28e3)
        frame = FrameDefinition.on_resonance(p, q7)
        with pytest.raises(ValueError):
            evolve_lab(basis_state(q7, -3.5), PulseSchedule(()), frame, p, q7, tol=0.0)

    def test_missing_carrier_rejected(self, q7):
        p = StaticParams.from_fq(28e3)
        frame = FrameDefinition.on_resonance(p, q7)
        sched = PulseSchedule(
            (ToneSegment(duration=1e-4, tones=covariant_tone_set(q7, 100.0)),)
        )
        with pytest.raises(ValueError, match="carrier"):
            evolve_lab(basis_state(q7, -3.5), sched, frame, p, q7)


@pytest.mark.slow
class TestEvolveLabScaling:
    def test_quadratic_error_scaling(self, q7):
        # 1 - contrast tracks (f_cov/f_q)^2 within a factor 3 at ratio 0.1
        f_q = 10e3
        f_cov = 0.1 * f_q
        p = StaticParams.from_fq(f_q, b0=0.3e6 / GAMMA_N_SB123)
        frame = FrameDefinition.on_resonance(p, q7)
        tones = with_carriers(covariant_tone_set(q7, f_cov), frame.ref_freqs)
        t_total = 0.75 / f_cov
        sched = PulseSchedule((ToneSegment(duration=t_total, tones=tones),))
        res = evolve_lab(
            basis_state(q7, -3.5), sched, frame, p, q7, tol=1e-9,
            sample_dt=t_total / 600,
        )
        err = 1.0 - res.iz_expect.max() / q7.I
        assert (0.1**2) / 3 < err < (0.1**2) * 3


class TestDephasing:
    def test_zero_time_identity(self, q7, rng):
        rho = random_density_matrix(rng)
        noise = device_a_noise(q7)
        from spinqudit import DensityMatrix

        out = apply_dephasing(DensityMatrix(rho), 0.0, noise)
        assert np.abs(out.elements - rho).max() < 1e-15

    def test_diagonal_untouched(self, q7, rng):
        probs = rng.uniform(0.1, 1.0, 8)
        probs /= probs.sum()
        from spinqudit import DensityMatrix

        rho = DensityMatrix(np.diag(probs).astype(complex))
        out = apply_dephasing(rho, 0.3, device_a_noise(q7))
        assert np.abs(out.elements - rho.elements).max() == 0.0

    def test_cat_contrast_reaches_1_over_e(self, q7):
        noise = device_a_noise(q7)
        assert noise.t2_map[0, 7] == pytest.approx(15e-3, rel=1e-12)
        rho = cat_state(q7, "z", np.pi / 2).density_matrix()
        dep = apply_dephasing(rho, 15e-3, noise)
        par = simulate_parity_oscillation(dep, q7)
        assert par.contrast == pytest.approx(np.exp(-1.0), abs=1e-9)

    def test_channel_preserves_state_validity(self, q7, rng):
        from spinqudit import DensityMatrix

        noise = device_a_noise(q7)
        for tau in (1e-3, 2e-2, 0.5):
            out = apply_dephasing(DensityMatrix(random_density_matrix(rng)), tau, noise)
            evals = np.linalg.eigvalsh(out.elements)
            assert evals.min() > -1e-10
            assert np.trace(out.elements).real == pytest.approx(1.0, abs=1e-12)

    def test_decay_matrix_is_positive_semidefinite(self, q7):
        # Gram-representable |difference| rates at alpha = 1 give a CP map
        noise = device_a_noise(q7)
        for tau in (1e-3, 3e-2):
            evals = np.linalg.eigvalsh(noise.decay_factors(tau))
            assert evals.min() > -1e-12

    def test_invalid_alpha(self, q7):
        with pytest.raises(ValueError):
            NoiseModel.uniform(q7, 1e-2, alpha=2.5)


class TestParityOscillation:
    def test_ideal_cat_contrast_one(self, q7):
        par = simulate_parity_oscillation(cat_state(q7, "z", np.pi), q7)
        assert par.contrast == pytest.approx(1.0, abs=1e-9)
        assert par.dominant_harmonic == 7
        assert not par.flagged

    def test_fully_dephased_cat_contrast_zero(self, q7):
        rho = cat_state(q7, "z", np.pi).density_matrix().elements.copy()
        rho[0, 7] = rho[7, 0] = 0.0
        from spinqudit import DensityMatrix

        par = simulate_parity_oscillation(DensityMatrix(rho), q7)
        assert abs(par.contrast) < 1e-9

    def test_contrast_tracks_dephasing_analytically(self, q7):
        noise = NoiseModel.uniform(q7, 12e-3, alpha=0.7)
        rho = cat_state(q7, "z", 0.0).density_matrix()
        tau = 8e-3
        par = simulate_parity_oscillation(apply_dephasing(rho, tau, noise), q7)
        assert par.contrast == pytest.approx(np.exp(-((tau / 12e-3) ** 0.7)), abs=1e-9)

    def test_multi_harmonic_state_flagged(self, q7):
        par = simulate_parity_oscillation(spin_coherent_state(q7, np.pi / 2, 0.0), q7)
        assert par.flagged

    def test_nyquist_guard(self, q7):
        with pytest.raises(ValueError):
            simulate_parity_oscillation(cat_state(q7, "z", 0.0), q7, n_phi=20)


class TestScheduleSerialization:
    def test_round_trip(self, q7):
        p = StaticParams.from_fq(28e3)
        sched = snap_cat_sequence(q7, F_RABI, "z")
        sched = PulseSchedule(
            (
                ToneSegment(
                    duration=1e-3,
                    tones=with_carriers(covariant_tone_set(q7, 99.0, 0.3), resonant_carriers(p, q7)),
                ),
            )
            + sched.segments
            + (WaitSegment(duration=2e-3),)
        )
        text = sched.to_json()
        back = PulseSchedule.from_json(text)
        assert back.to_json() == text

    def test_negative_duration_rejected(self):
        with pytest.raises(ValueError):
            WaitSegment(duration=-1.0)
