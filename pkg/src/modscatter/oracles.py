"""Two independent routes to the same sideband amplitudes.

Both start from the reduced emitter equation of motion (the waveguide field
eliminated, leaving the linewidth gamma and the plane-wave drive):

    i de/dt = [Omega(1 + f cos(omega t)) - i gamma] e + V e^{-i omega_0 t}

* harmonic balance: expand e(t) = sum_n e_n exp(-i omega_n t); the harmonics
  couple into a tridiagonal linear system solved directly;
* time domain: integrate the equation from e(0)=0 with a classical 4th-order
  stepper until the periodic steady state, then project the Fourier
  coefficients off an integer number of modulation periods.

Amplitudes follow from either excitation spectrum through the exact relation
r_n = V e_n / (i v_g), giving an end-to-end cross-check of the closed-form
series that shares no code with it beyond parameter handling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import BadWindowError, SingularSystemError, UnstableStepError
from .params import EmitterParams, ScatteringQuery, TruncationSpec
from .scattering import ExcitationSpectrum, SidebandSet, _assemble, evaluate_sidebands

RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class HarmonicBalanceSystem:
    """Tridiagonal system for the excitation harmonics e_n, n in [-N, N]."""

    order: int
    diagonal: np.ndarray      # Delta + n*omega + i*gamma
    off_diagonal: float       # -f*Omega/2 couples e_{n-1}, e_{n+1}
    rhs: np.ndarray           # +V at n = 0

    def matvec(self, e: np.ndarray) -> np.ndarray:
        y = self.diagonal * e
        y[1:] += self.off_diagonal * e[:-1]
        y[:-1] += self.off_diagonal * e[1:]
        return y


def build_harmonic_balance(
    params: EmitterParams, detuning: float, order: int
) -> HarmonicBalanceSystem:
    """Assemble the Fourier-space system.

    Substituting the harmonic expansion into the reduced equation couples
    neighbouring harmonics through cos(omega t) = (e^{i omega t} +
    e^{-i omega t})/2 and yields

        (Delta + n*omega + i*gamma) e_n - (f*Omega/2)(e_{n-1} + e_{n+1}) = V delta_{n0}

    The drive sign is pinned by the f -> 0 limit: e_0 = V/(Delta + i*gamma)
    must reproduce r_0 = -i*gamma/(Delta + i*gamma) through r_n = V e_n/(i v_g).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    ns = np.arange(-order, order + 1)
    diag = detuning + ns * params.mod_freq + 1j * params.gamma
    rhs = np.zeros(2 * order + 1, complex)
    rhs[order] = params.coupling
    return HarmonicBalanceSystem(
        order=order,
        diagonal=diag,
        off_diagonal=-0.5 * params.mod_amp * params.omega_a,
        rhs=rhs,
    )


def harmonic_balance_solve(
    params: EmitterParams, detuning: float, order: int
) -> ExcitationSpectrum:
    """Solve the tridiagonal system with banded LU and verify the residual."""
    if params.gamma == 0:
        raise SingularSystemError("zero coupling makes the system singular")
    sys_ = build_harmonic_balance(params, detuning, order)
    m = 2 * order + 1
    ab = np.zeros((3, m), complex)
    ab[0, 1:] = sys_.off_diagonal
    ab[1, :] = sys_.diagonal
    ab[2, :-1] = sys_.off_diagonal
    e = solve_banded((1, 1), ab, sys_.rhs)
    resid = np.max(np.abs(sys_.matvec(e) - sys_.rhs)) / np.max(np.abs(sys_.rhs))
    if not resid < RESIDUAL_TOL:
        raise SingularSystemError(
            f"banded solve residual {resid:.3e} exceeds {RESIDUAL_TOL:g}"
        )
    return ExcitationSpectrum(ns=np.arange(-order, order + 1), coeffs=e)


@dataclass(frozen=True)
class TimeDomainTrace:
    """Sampled emitter amplitude e(t_k) plus its extraction window."""

    dt: float
    horizon: float
    samples: np.ndarray       # shape (n_steps+1,) or (n_steps+1, n_detunings)
    window: tuple[float, float]
    detuning: np.ndarray
    omega_0: np.ndarray


def _step_bound(params: EmitterParams, detunings: np.ndarray) -> float:
    scale = max(
        params.gamma,
        float(np.max(np.abs(detunings))),
        params.mod_freq,
        params.mod_amp * params.omega_a,
    )
    return 1.0 / (50.0 * scale) if scale > 0 else np.inf


def time_domain_excitation(
    params: EmitterParams,
    detuning,
    horizon: float | None = None,
    dt: float | None = None,
) -> TimeDomainTrace:
    """Integrate the reduced equation to the periodic steady state.

    detuning may be a scalar or an array; an array integrates all traces in
    one vectorized pass (the per-step work is a handful of array ops, so wide
    batches cost barely more than one trace).

    The carrier exp(-i omega_0 t) is factored out analytically before
    stepping and restored on the stored samples, so the step-size bound
    involves only gamma, |Delta|, omega and f*Omega, not omega_0.
    """
    deltas = np.atleast_1d(np.asarray(detuning, float))
    scalar = np.ndim(detuning) == 0
    gamma, om = params.gamma, params.mod_freq
    fo = params.mod_amp * params.omega_a
    v = params.coupling
    if om <= 0:
        raise ValueError("time-domain oracle requires mod_freq > 0")

    bound = _step_bound(params, deltas)
    t_mod = 2.0 * np.pi / om
    if dt is None:
        n_per = max(int(np.ceil(t_mod / bound)), 4)
        dt = t_mod / n_per
    else:
        if dt > bound:
            raise UnstableStepError(
                f"dt={dt:g} exceeds the validity bound {bound:g}"
            )
        n_per = int(round(t_mod / dt))
        if abs(n_per * dt - t_mod) > 1e-9 * t_mod:
            n_per = int(np.ceil(t_mod / dt))
            dt = t_mod / n_per

    # burn-in to a whole number of periods past 20 decay times
    t_a = np.ceil((20.0 / gamma) / t_mod) * t_mod if gamma > 0 else t_mod
    periods = 20
    t_b = t_a + periods * t_mod
    if horizon is not None:
        if horizon < t_b:
            raise ValueError(
                f"horizon {horizon:g} shorter than burn-in plus extraction "
                f"window ({t_b:g})"
            )
        t_b = np.floor((horizon - t_a) / t_mod) * t_mod + t_a
    n_steps = int(round(t_b / dt))

    y = np.zeros(len(deltas), complex)
    samples = np.empty((n_steps + 1, len(deltas)), complex)
    samples[0] = y

    def rhs(t, y):
        return (1j * (deltas - fo * np.cos(om * t)) - gamma) * y - 1j * v

    t = 0.0
    for k in range(n_steps):
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
        k4 = rhs(t + dt, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = (k + 1) * dt
        samples[k + 1] = y

    omega_0 = params.omega_a + deltas
    times = np.arange(n_steps + 1) * dt
    lab = samples * np.exp(-1j * np.outer(times, omega_0))
    if scalar:
        lab = lab[:, 0]
    return TimeDomainTrace(
        dt=dt,
        horizon=t_b,
        samples=lab,
        window=(float(t_a), float(t_b)),
        detuning=deltas if not scalar else deltas[:1],
        omega_0=omega_0 if not scalar else omega_0[:1],
    )


def periodicity_defect(trace: TimeDomainTrace, params: EmitterParams) -> float:
    """Relative mismatch between the last two modulation periods in the
    extraction window; small values certify the periodic steady state."""
    om = params.mod_freq
    t_mod = 2.0 * np.pi / om
    per = int(round(t_mod / trace.dt))
    s = np.atleast_2d(trace.samples.T).T
    i_b = s.shape[0] - 1
    a = s[i_b - per : i_b + 1]
    b = s[i_b - 2 * per : i_b - per + 1]
    # compare in the frame rotating at omega_0 so the carrier phase drops out
    times = np.arange(i_b - per, i_b + 1) * trace.dt
    rot = np.exp(1j * np.outer(times, trace.omega_0))
    rot_prev = np.exp(1j * np.outer(times - t_mod, trace.omega_0))
    num = np.max(np.abs(a * rot - b * rot_prev))
    den = np.max(np.abs(a * rot))
    return float(num / den) if den > 0 else 0.0


def fourier_extract(
    trace: TimeDomainTrace, omega_0, omega: float, n_max: int
) -> ExcitationSpectrum:
    """Project e_n = (1/T_w) int e(t) exp(+i omega_n t) dt over the window.

    The window must hold an integer number of modulation periods, otherwise
    the harmonics are not orthogonal and the call refuses. omega_0 may be a
    scalar, an array matching the trace's detuning batch, or None to take it
    from the trace; the carrier factor exp(+i omega_0 t) splits off the
    harmonic factor exactly, so it is applied once per column.
    """
    t_a, t_b = trace.window
    t_mod = 2.0 * np.pi / omega
    n_per = (t_b - t_a) / t_mod
    if abs(n_per - round(n_per)) > 1e-6:
        raise BadWindowError(
            f"window of {n_per:.6f} modulation periods is not commensurate"
        )
    if omega_0 is None:
        omega_0 = trace.omega_0
    omega_0 = np.atleast_1d(np.asarray(omega_0, float))
    i_a = int(round(t_a / trace.dt))
    i_b = int(round(t_b / trace.dt))
    times = np.arange(i_a, i_b + 1) * trace.dt
    seg = trace.samples[i_a : i_b + 1]
    single = seg.ndim == 1
    if single:
        seg = seg[:, None]
    derot = seg * np.exp(1j * np.outer(times, omega_0))
    ns = np.arange(-n_max, n_max + 1)
    coeffs = np.empty((len(ns), seg.shape[1]), complex)
    for i, n in enumerate(ns):
        phase = np.exp(1j * n * omega * times)
        coeffs[i] = np.trapezoid(derot * phase[:, None], dx=trace.dt, axis=0)
    coeffs /= t_b - t_a
    if single:
        coeffs = coeffs[:, 0]
    return ExcitationSpectrum(ns=ns, coeffs=coeffs)


def amplitudes_from_excitation(
    spec: ExcitationSpectrum, params: EmitterParams, detuning: float
) -> SidebandSet:
    """Convert an excitation spectrum to amplitudes via r_n = V e_n/(i v_g)."""
    r = params.coupling * spec.coeffs / (1j * params.group_velocity)
    n = int(spec.ns[-1])
    trunc = TruncationSpec(sideband_max=n, sum_max=n)
    return _assemble(params, detuning, trunc, spec.ns, np.asarray(r, complex))


@dataclass(frozen=True)
class ValidationReport:
    """Elementwise agreement of the three amplitude routes on one grid."""

    detunings: np.ndarray
    dev_series_hb: np.ndarray     # max_n |r_n series - r_n harmonic balance|
    dev_series_td: np.ndarray     # max_n |r_n series - r_n time domain|
    defect_series: np.ndarray
    defect_hb: np.ndarray
    defect_td: np.ndarray
    tol_series_hb: float
    tol_td: float

    @property
    def max_dev_series_hb(self) -> float:
        return float(np.max(self.dev_series_hb))

    @property
    def max_dev_series_td(self) -> float:
        return float(np.max(self.dev_series_td))

    @property
    def passed(self) -> bool:
        return (
            self.max_dev_series_hb < self.tol_series_hb
            and self.max_dev_series_td < self.tol_td
        )


def cross_validate(
    params: EmitterParams,
    detuning,
    tol_series_hb: float = 1e-8,
    tol_td: float = 1e-3,
) -> ValidationReport:
    """Run all three routes on one or many detunings and compare amplitudes.

    The comparison window is the time-domain sideband range (the narrowest);
    outside it the other two routes have only exponentially small content.
    """
    deltas = np.atleast_1d(np.asarray(detuning, float))
    n_td = 12 if params.mod_amp > 0 else 4
    trace = time_domain_excitation(params, deltas)
    td_spec = fourier_extract(trace, None, params.mod_freq, n_td)
    dev_hb = np.empty(len(deltas))
    dev_td = np.empty(len(deltas))
    d_series = np.empty(len(deltas))
    d_hb = np.empty(len(deltas))
    d_td = np.empty(len(deltas))
    for j, d in enumerate(deltas):
        sset = evaluate_sidebands(params, d, tol=1e-11)
        hb = harmonic_balance_solve(params, d, order=int(sset.ns[-1]))
        hb_set = amplitudes_from_excitation(hb, params, d)
        td_coeffs = td_spec.coeffs[:, j]
        td_set = amplitudes_from_excitation(
            ExcitationSpectrum(ns=td_spec.ns, coeffs=td_coeffs), params, d
        )
        # align on the sideband window of each pair
        dev_hb[j] = _max_amplitude_dev(sset, hb_set)
        dev_td[j] = _max_amplitude_dev(sset, td_set)
        d_series[j] = sset.unitarity_defect
        d_hb[j] = hb_set.unitarity_defect
        d_td[j] = td_set.unitarity_defect
    return ValidationReport(
        detunings=deltas,
        dev_series_hb=dev_hb,
        dev_series_td=dev_td,
        defect_series=d_series,
        defect_hb=d_hb,
        defect_td=d_td,
        tol_series_hb=tol_series_hb,
        tol_td=tol_td,
    )


def _max_amplitude_dev(a: SidebandSet, b: SidebandSet) -> float:
    ns = np.intersect1d(a.ns, b.ns)
    ia = ns - a.ns[0]
    ib = ns - b.ns[0]
    return float(np.max(np.abs(a.r[ia] - b.r[ib])))
