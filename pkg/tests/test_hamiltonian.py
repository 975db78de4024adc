import numpy as np
import pytest

from spinqudit import (
    DriveTone,
    FrameDefinition,
    StaticParams,
    grf_drive_hamiltonian,
    grf_transform,
    lab_drive_hamiltonian,
    nmr_frequencies,
    spin_operators,
    static_hamiltonian,
)
from spinqudit.hamiltonian import GAMMA_N_SB123, lab_drive_hamiltonian_fn


class TestStaticHamiltonian:
    def test_zeeman_splitting(self, q7):
        p = StaticParams(b0=1.384, gamma_n=5.55e6)
        h = static_hamiltonian(p, q7)
        evals = np.sort(np.diag(h).real)
        # eigenvalues are -gamma_n B0 m; splitting = 7.6812 MHz
        gaps = np.diff(evals)
        assert np.allclose(gaps, 7.6812e6, rtol=1e-12)

    def test_q_zero_uniform_frequencies(self, q7):
        p = StaticParams()
        f = nmr_frequencies(static_hamiltonian(p, q7))
        assert np.ptp(f) < 1e-6
        assert f[0] == pytest.approx(p.gamma_n * p.b0, rel=1e-12)

    def test_fq_constructor_spacing(self, q7):
        p = StaticParams.from_fq(28e3)
        f = nmr_frequencies(static_hamiltonian(p, q7))
        assert np.allclose(np.diff(f), 28e3, rtol=1e-9)

    def test_device_c_negative_fq(self, q7):
        f = nmr_frequencies(static_hamiltonian(StaticParams.from_fq(-3.6e3), q7))
        assert np.allclose(np.diff(f), -3.6e3, rtol=1e-9)

    def test_explicit_qzz_spacing(self, q7):
        quad = np.zeros((3, 3))
        quad[2, 2] = 5e3
        f = nmr_frequencies(static_hamiltonian(StaticParams(quad=quad), q7))
        # level shift Qzz m^2 gives f_{k+1} - f_k = -2 Qzz in the f_1..f_7 labeling
        assert np.allclose(np.diff(f), -1e4, rtol=1e-9)

    def test_diagonal_quad_commutes_with_iz(self, q7):
        h = static_hamiltonian(StaticParams.from_fq(28e3), q7)
        iz = spin_operators(q7).iz
        assert np.abs(h @ iz - iz @ h).max() == 0.0

    def test_quad_symmetry_enforced(self):
        quad = np.zeros((3, 3))
        quad[0, 1] = 1.0
        with pytest.raises(ValueError):
            StaticParams(quad=quad)

    def test_mixing_guard(self, q7):
        # a strong transverse quadrupole at tiny B0 mixes the basis states
        quad = np.zeros((3, 3))
        quad[0, 2] = quad[2, 0] = 2e3
        p = StaticParams(b0=1e-3, gamma_n=5.55e6, quad=quad)
        with pytest.raises(ValueError, match="mixing"):
            nmr_frequencies(static_hamiltonian(p, q7))


class TestLabDrive:
    def test_zero_amplitude(self, q7):
        tones = [DriveTone(transition_index=1, b1=0.0, f=7.6e6)]
        assert np.abs(lab_drive_hamiltonian(0.3, tones, q7)).max() == 0.0

    def test_cosine_peak(self, q7):
        b1 = 1e-6
        tones = [DriveTone(transition_index=1, b1=b1, f=7.6e6, phase=0.0)]
        h = lab_drive_hamiltonian(0.0, tones, q7, gamma_n=GAMMA_N_SB123)
        ix = spin_operators(q7).ix
        assert np.abs(h + GAMMA_N_SB123 * b1 * ix).max() < 1e-9

    def test_time_average_over_period(self, q7):
        f = 7.6e6
        tones = [DriveTone(transition_index=1, b1=1e-6, f=f, phase=0.4)]
        fn = lab_drive_hamiltonian_fn(tones, q7)
        ts = (np.arange(4000) + 0.5) / 4000 / f
        avg = sum(fn(t) for t in ts) / len(ts)
        assert np.abs(avg).max() < 1e-9 * GAMMA_N_SB123 * 1e-6

    def test_empty_tones_rejected(self, q7):
        with pytest.raises(ValueError):
            lab_drive_hamiltonian(0.0, [], q7)


class TestGrfDrive:
    def test_equal_tones_give_ix(self, q7):
        b1 = 2e-6
        tones = [DriveTone(transition_index=k, b1=b1) for k in range(1, 8)]
        h = grf_drive_hamiltonian(tones, q7).matrix
        ix = spin_operators(q7).ix
        assert np.abs(h + GAMMA_N_SB123 * b1 / 2 * ix).max() < 1e-12

    def test_top_entry(self, q7):
        b1, phase = 3e-6, 0.7
        h = grf_drive_hamiltonian([DriveTone(transition_index=1, b1=b1, phase=phase)], q7).matrix
        expected = -(GAMMA_N_SB123 / 4) * np.sqrt(7) * b1 * np.exp(1j * phase)
        assert abs(h[0, 1] - expected) < 1e-12

    def test_no_tones_no_detuning_is_zero(self, q7):
        frame = FrameDefinition.bare(q7)
        assert np.abs(grf_drive_hamiltonian((), q7, frame=frame).matrix).max() == 0.0

    def test_detuning_diagonal(self, q7):
        det = np.arange(1.0, 8.0)
        frame = FrameDefinition.bare(q7).with_detunings(det)
        h = grf_drive_hamiltonian((), q7, frame=frame).matrix
        assert np.allclose(np.diag(h).real, -np.concatenate(([0.0], np.cumsum(det))))

    def test_duplicate_transition_rejected(self, q7):
        tones = [DriveTone(transition_index=3, b1=1e-6), DriveTone(transition_index=3, b1=2e-6)]
        with pytest.raises(ValueError, match="duplicate"):
            grf_drive_hamiltonian(tones, q7)

    def test_linear_in_b1(self, q7):
        t1 = [DriveTone(transition_index=2, b1=1e-6, phase=0.3)]
        t2 = [DriveTone(transition_index=2, b1=2.5e-6, phase=0.3)]
        h1 = grf_drive_hamiltonian(t1, q7).matrix
        h2 = grf_drive_hamiltonian(t2, q7).matrix
        assert np.abs(h2 - 2.5 * h1).max() < 1e-12

    def test_periodic_in_phase(self, q7):
        a = grf_drive_hamiltonian([DriveTone(transition_index=4, b1=1e-6, phase=0.9)], q7).matrix
        b = grf_drive_hamiltonian(
            [DriveTone(transition_index=4, b1=1e-6, phase=0.9 + 2 * np.pi)], q7
        ).matrix
        assert np.abs(a - b).max() < 1e-12

    def test_single_phase_gauge_invariance(self, q7, rng):
        base = [
            DriveTone(transition_index=k, b1=float(rng.uniform(1e-7, 1e-5)), phase=float(rng.uniform(0, 2 * np.pi)))
            for k in range(1, 8)
        ]
        shifted = [
            DriveTone(
                transition_index=t.transition_index,
                b1=t.b1,
                phase=t.phase + (0.77 if t.transition_index == 1 else 0.0),
            )
            for t in base
        ]
        e1 = np.linalg.eigvalsh(grf_drive_hamiltonian(base, q7).matrix)
        e2 = np.linalg.eigvalsh(grf_drive_hamiltonian(shifted, q7).matrix)
        assert np.abs(e1 - e2).max() < 1e-10


class TestGrfTransform:
    def test_on_resonance_cancels_static(self, q7):
        p = StaticParams.from_fq(28e3)
        h_static = static_hamiltonian(p, q7)
        frame = FrameDefinition.on_resonance(p, q7)
        for t in (0.0, 1.3e-7, 4.2e-4):
            h = grf_transform(lambda _t: h_static, frame, t)
            assert np.abs(h).max() < 1e-6  # Hz, vs MHz scale ~ 1e-13 relative

    def test_detuned_frame_diagonal(self, q7):
        p = StaticParams.from_fq(28e3)
        h_static = static_hamiltonian(p, q7)
        det = np.linspace(5.0, 35.0, 7)
        frame = FrameDefinition.on_resonance(p, q7).with_detunings(det)
        h = grf_transform(lambda _t: h_static, frame, 0.11)
        assert np.allclose(np.diag(h).real, -np.concatenate(([0.0], np.cumsum(det))), atol=1e-6)
        off = h - np.diag(np.diag(h))
        assert np.abs(off).max() < 1e-9

    def test_weak_tone_average_matches_rwa(self, q7):
        p = StaticParams.from_fq(28e3)
        h_static = static_hamiltonian(p, q7)
        frame = FrameDefinition.on_resonance(p, q7)
        k = 3
        f_k = frame.ref_freqs[k - 1]
        b1 = 1e-6
        tone = DriveTone(transition_index=k, b1=b1, phase=0.6, f=f_k)

        def h_lab(t):
            return h_static + lab_drive_hamiltonian(t, [tone], q7, p.gamma_n)

        # average the transformed Hamiltonian over one carrier period
        n = 2048
        ts = (np.arange(n) + 0.5) / n / f_k
        avg = sum(grf_transform(h_lab, frame, t) for t in ts) / n
        rwa = grf_drive_hamiltonian([tone], q7, p.gamma_n, frame).matrix
        scale = p.gamma_n * b1
        # counter-rotating residue is O((gamma_n b1 / f0)) on the kept entry
        assert np.abs(avg[k - 1, k] - rwa[k - 1, k]) < scale * (scale / f_k) * 10
