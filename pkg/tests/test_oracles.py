import numpy as np
import pytest

from modscatter import (
    EmitterParams,
    ExcitationSpectrum,
    SingularSystemError,
    TimeDomainTrace,
    UnstableStepError,
    BadWindowError,
    amplitudes_from_excitation,
    build_harmonic_balance,
    cross_validate,
    evaluate_sidebands,
    fourier_extract,
    harmonic_balance_solve,
    normalized_params,
    periodicity_defect,
    time_domain_excitation,
)


class TestHarmonicBalanceStructure:
    def test_matrix_layout(self, params_reference):
        sys_ = build_harmonic_balance(params_reference, 0.7, order=4)
        ns = np.arange(-4, 5)
        np.testing.assert_allclose(
            sys_.diagonal, 0.7 + 2.0 * ns + 1j, rtol=0, atol=1e-15
        )
        assert sys_.off_diagonal == pytest.approx(-2.5)
        assert sys_.rhs[4] == 1.0
        assert np.count_nonzero(sys_.rhs) == 1

    def test_matvec_applies_tridiagonal(self, params_reference):
        sys_ = build_harmonic_balance(params_reference, 0.3, order=3)
        e = np.arange(7, dtype=complex)
        full = np.diag(sys_.diagonal) + sys_.off_diagonal * (
            np.diag(np.ones(6), 1) + np.diag(np.ones(6), -1)
        )
        np.testing.assert_allclose(sys_.matvec(e), full @ e, rtol=0, atol=1e-13)

    def test_rejects_zero_order(self, params_reference):
        with pytest.raises(ValueError):
            build_harmonic_balance(params_reference, 0.0, order=0)


class TestHarmonicBalanceSolve:
    def test_undriven_limit_fixes_the_drive_sign(self, params_unmodulated):
        """With the modulation off the only harmonic is the carrier, and the
        excitation must reproduce the Lorentzian reflection through
        r_0 = V e_0 / (i v_g)."""
        for delta in (-4.0, -0.5, 0.0, 2.0, 9.0):
            spec = harmonic_balance_solve(params_unmodulated, delta, order=3)
            center = np.where(spec.ns == 0)[0][0]
            assert spec.coeffs[center] == pytest.approx(
                1.0 / (delta + 1j), abs=1e-14
            )
            off = np.delete(spec.coeffs, center)
            assert np.max(np.abs(off)) < 1e-14

    def test_weak_drive_sidebands_scale_linearly(self):
        mags = []
        for amp in (1e-1, 1e-2, 1e-3):
            p = normalized_params(amp, 2.0)
            spec = harmonic_balance_solve(p, 0.7, order=6)
            center = np.where(spec.ns == 0)[0][0]
            mags.append(abs(spec.coeffs[center + 1]))
        assert mags[0] / mags[1] == pytest.approx(10.0, rel=1e-2)
        assert mags[1] / mags[2] == pytest.approx(10.0, rel=1e-3)

    def test_residual_is_certified(self, params_reference):
        sys_ = build_harmonic_balance(params_reference, 1.3, order=20)
        spec = harmonic_balance_solve(params_reference, 1.3, order=20)
        resid = np.max(np.abs(sys_.matvec(spec.coeffs) - sys_.rhs))
        assert resid < 1e-12

    def test_spectral_convergence_under_doubling(self, params_reference):
        a = harmonic_balance_solve(params_reference, 0.7, order=16)
        b = harmonic_balance_solve(params_reference, 0.7, order=32)
        ia = np.isin(b.ns, a.ns)
        assert np.max(np.abs(b.coeffs[ia] - a.coeffs)) < 1e-10

    def test_matches_series_route(self, params_reference):
        for delta in (-3.0, 0.0, 1.2):
            sset = evaluate_sidebands(params_reference, delta, tol=1e-12)
            order = int(sset.ns[-1])
            spec = harmonic_balance_solve(params_reference, delta, order=order)
            hb_set = amplitudes_from_excitation(spec, params_reference, delta)
            assert np.max(np.abs(hb_set.r - sset.r)) < 1e-12

    def test_dark_emitter_is_singular(self):
        dark = EmitterParams(
            omega_a=1000.0, mod_amp=0.005, mod_freq=2.0,
            coupling=0.0, group_velocity=1.0,
        )
        with pytest.raises(SingularSystemError):
            harmonic_balance_solve(dark, 0.0, order=4)


class TestTimeDomain:
    def test_dark_emitter_stays_dark(self):
        dark = EmitterParams(
            omega_a=1000.0, mod_amp=0.0, mod_freq=2.0,
            coupling=0.0, group_velocity=1.0,
        )
        trace = time_domain_excitation(dark, 0.5)
        assert np.all(trace.samples == 0.0)

    def test_undriven_relaxes_to_the_lorentzian_fixed_point(self):
        p = normalized_params(0.0, 2.0)
        delta = 1.3
        trace = time_domain_excitation(p, delta)
        times = np.arange(trace.samples.shape[0]) * trace.dt
        rotating = trace.samples * np.exp(1j * trace.omega_0[0] * times)
        target = 1.0 / (delta + 1j)
        assert rotating[-1] == pytest.approx(target, abs=1e-8)
        tail = np.abs(rotating - target)
        envelope = abs(target) * np.exp(-times) * 1.05 + 1e-9
        assert np.all(tail <= envelope)

    def test_batched_detunings_match_scalar_runs(self, params_reference):
        batch = time_domain_excitation(params_reference, np.array([-1.0, 2.0]))
        solo = time_domain_excitation(params_reference, 2.0)
        np.testing.assert_allclose(
            batch.samples[:, 1], solo.samples, rtol=0, atol=1e-14
        )

    def test_reaches_periodic_steady_state(self, params_reference):
        trace = time_domain_excitation(params_reference, 0.7)
        assert periodicity_defect(trace, params_reference) < 1e-6

    def test_oversized_user_step_is_rejected(self, params_reference):
        with pytest.raises(UnstableStepError):
            time_domain_excitation(params_reference, 0.0, dt=1.0)

    def test_short_horizon_is_rejected(self, params_reference):
        with pytest.raises(ValueError):
            time_domain_excitation(params_reference, 0.0, horizon=5.0)

    def test_requires_running_modulation(self, params_static_amp):
        with pytest.raises(ValueError):
            time_domain_excitation(params_static_amp, 0.0)


def synthetic_trace(coeff_map, omega_0=40.0, omega=2.0, periods=6, per=256):
    t_mod = 2.0 * np.pi / omega
    dt = t_mod / per
    n_steps = periods * per
    times = np.arange(n_steps + 1) * dt
    samples = np.zeros(n_steps + 1, complex)
    for n, c in coeff_map.items():
        samples += c * np.exp(-1j * (omega_0 + n * omega) * times)
    return TimeDomainTrace(
        dt=dt,
        horizon=times[-1],
        samples=samples,
        window=(0.0, times[-1]),
        detuning=np.array([0.0]),
        omega_0=np.array([omega_0]),
    )


class TestFourierExtract:
    def test_recovers_planted_harmonics(self):
        planted = {0: 0.8, 1: 0.3j, -2: -0.1 + 0.05j}
        trace = synthetic_trace(planted)
        spec = fourier_extract(trace, 40.0, 2.0, n_max=3)
        for n, c in planted.items():
            idx = np.where(spec.ns == n)[0][0]
            assert spec.coeffs[idx] == pytest.approx(c, abs=1e-12)
        others = [i for i, n in enumerate(spec.ns) if n not in planted]
        assert np.max(np.abs(spec.coeffs[others])) < 1e-12

    def test_linearity(self):
        a = synthetic_trace({0: 0.5})
        b = synthetic_trace({1: 0.25})
        both = synthetic_trace({0: 0.5, 1: 0.25})
        sa = fourier_extract(a, 40.0, 2.0, 2).coeffs
        sb = fourier_extract(b, 40.0, 2.0, 2).coeffs
        sboth = fourier_extract(both, 40.0, 2.0, 2).coeffs
        np.testing.assert_allclose(sboth, sa + sb, rtol=0, atol=1e-12)

    def test_incommensurate_window_is_rejected(self):
        trace = synthetic_trace({0: 1.0})
        with pytest.raises(BadWindowError):
            fourier_extract(trace, 40.0, 2.0 * 1.37, n_max=2)

    def test_carrier_defaults_to_trace_value(self):
        trace = synthetic_trace({1: 0.5j})
        explicit = fourier_extract(trace, 40.0, 2.0, 2).coeffs
        implicit = fourier_extract(trace, None, 2.0, 2).coeffs
        np.testing.assert_allclose(explicit, implicit, rtol=0, atol=1e-15)


class TestCrossValidation:
    def test_undriven_grid_three_routes_agree(self, params_unmodulated):
        report = cross_validate(params_unmodulated, np.array([-2.0, 0.0, 1.5]))
        assert report.passed
        assert report.max_dev_series_hb < 1e-12
        assert report.max_dev_series_td < 1e-7

    def test_reference_point_three_routes_agree(self, params_reference):
        report = cross_validate(params_reference, np.array([-2.0, 0.7, 3.0]))
        assert report.passed
        assert report.max_dev_series_hb < 1e-10
        assert report.max_dev_series_td < 1e-6
        assert np.all(report.defect_series < 1e-10)

    def test_report_records_the_grid(self, params_reference):
        deltas = np.array([0.0, 1.0])
        report = cross_validate(params_reference, deltas)
        np.testing.assert_array_equal(report.detunings, deltas)
        assert report.dev_series_hb.shape == deltas.shape
        assert report.dev_series_td.shape == deltas.shape
