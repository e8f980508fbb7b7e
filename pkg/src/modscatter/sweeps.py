"""Parameter sweeps and the bundled figure presets.

A sweep varies exactly one of {detuning, mod_amp_energy, mod_freq} in
gamma-normalized units, evaluates the requested observables per point with
per-point adaptive truncation, and returns a deterministic dataset whose row
order never depends on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import TruncationError
from .params import EmitterParams, normalized_params
from .oracles import amplitudes_from_excitation, harmonic_balance_solve
from .scattering import SidebandSet, evaluate_sidebands

AXES = ("detuning", "mod_amp_energy", "mod_freq")
METHODS = ("series", "harmonic_balance", "both")
UNITARITY_FLAG_TOL = 1e-9


@dataclass(frozen=True)
class SweepSpec:
    """One-axis sweep description, all values in units of gamma."""

    axis: str
    start: float
    stop: float
    points: int
    detuning: float = 0.0
    mod_amp_energy: float = 0.0
    mod_freq: float = 0.0
    observables: tuple[str, ...] = ("T", "R", "unitarity_defect")
    sideband_orders: tuple[int, ...] = ()
    method: str = "series"
    name: str = ""
    omega_ratio: float = 1000.0

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.points < 2:
            raise ValueError("points must be >= 2")
        if not (np.isfinite(self.start) and np.isfinite(self.stop)):
            raise ValueError("range must be finite")

    def axis_values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)

    def params_at(self, value: float) -> tuple[EmitterParams, float]:
        """(EmitterParams, detuning) for one axis value."""
        amp = self.mod_amp_energy
        freq = self.mod_freq
        delta = self.detuning
        if self.axis == "detuning":
            delta = value
        elif self.axis == "mod_amp_energy":
            amp = value
        else:
            freq = value
        return normalized_params(amp, freq, self.omega_ratio), delta


@dataclass(frozen=True)
class SpectrumDataset:
    """Sweep output: axis values plus one column per observable."""

    spec: SweepSpec
    axis_values: np.ndarray
    columns: dict[str, np.ndarray]
    truncation_orders: np.ndarray   # sideband_max actually used per row
    flags: np.ndarray               # True where a row failed convergence

    def column(self, name: str) -> np.ndarray:
        return self.columns[name]


def sideband_resolved(
    params: EmitterParams, detuning: float, n_list: tuple[int, ...] | list[int]
) -> dict:
    """Transmitted probabilities T_n = |t_n|^2 for the requested orders.

    Also reports the residual sum over every other computed order, so the
    caller can see how much probability the requested orders miss.
    """
    sset = evaluate_sidebands(params, detuning)
    out: dict = {}
    listed = set()
    for n in n_list:
        i = int(n) - int(sset.ns[0])
        out[f"T_{n}"] = float(abs(sset.t[i]) ** 2) if 0 <= i < len(sset.ns) else 0.0
        listed.add(int(n))
    resid = sum(
        float(abs(sset.t[i]) ** 2)
        for i, n in enumerate(sset.ns)
        if int(n) not in listed
    )
    out["T_residual"] = resid
    out["T"] = sset.total_T
    return out


def _observables_for_row(
    sset: SidebandSet, spec: SweepSpec, hb_total: float | None
) -> dict[str, float]:
    row: dict[str, float] = {}
    for name in spec.observables:
        if name == "T":
            row["T"] = sset.total_T
        elif name == "R":
            row["R"] = sset.total_R
        elif name == "unitarity_defect":
            row["unitarity_defect"] = sset.unitarity_defect
        else:
            raise ValueError(f"unknown observable {name!r}")
    for n in spec.sideband_orders:
        i = int(n) - int(sset.ns[0])
        row[f"T_{n}"] = float(abs(sset.t[i]) ** 2) if 0 <= i < len(sset.ns) else 0.0
    if hb_total is not None:
        row["discrepancy"] = abs(sset.total_T - hb_total)
    return row


def _eval_point(spec: SweepSpec, value: float) -> tuple[dict[str, float], int, bool]:
    params, delta = spec.params_at(value)
    flagged = False
    try:
        sset = evaluate_sidebands(params, delta)
    except TruncationError:
        # keep sweeping; the row is flagged and carries NaNs
        nan_row = {name: float("nan") for name in spec.observables}
        for n in spec.sideband_orders:
            nan_row[f"T_{n}"] = float("nan")
        if spec.method == "both":
            nan_row["discrepancy"] = float("nan")
        return nan_row, -1, True
    hb_total = None
    if spec.method in ("harmonic_balance", "both") and params.mod_freq > 0:
        order = int(sset.ns[-1])
        hb_set = amplitudes_from_excitation(
            harmonic_balance_solve(params, delta, order), params, delta
        )
        if spec.method == "harmonic_balance":
            sset = hb_set
        else:
            hb_total = hb_set.total_T
    if sset.unitarity_defect > UNITARITY_FLAG_TOL:
        flagged = True
    return (
        _observables_for_row(sset, spec, hb_total),
        int(sset.ns[-1]),
        flagged,
    )


def worker_count() -> int:
    """Worker cap: SCATTER_THREADS if set, else the available cores."""
    env = os.environ.get("SCATTER_THREADS", "").strip()
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ValueError(f"SCATTER_THREADS={env!r} is not an integer") from exc
        return max(1, n)
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec) -> SpectrumDataset:
    """Evaluate the sweep; points run in parallel, rows stay axis-ordered."""
    values = spec.axis_values()
    workers = worker_count()
    if workers > 1 and len(values) > 8:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda v: _eval_point(spec, v), values))
    else:
        results = [_eval_point(spec, v) for v in values]
    names = list(results[0][0].keys())
    columns = {
        name: np.array([row[name] for row, _, _ in results]) for name in names
    }
    return SpectrumDataset(
        spec=spec,
        axis_values=values,
        columns=columns,
        truncation_orders=np.array([order for _, order, _ in results]),
        flags=np.array([flag for _, _, flag in results]),
    )


def figure_presets() -> dict[str, SweepSpec]:
    """The bundled reference sweeps.

    Half-open axis ranges (0, stop] are realized as stop/points .. stop so the
    singular origin is excluded with uniform spacing.
    """
    n = 401
    presets = {
        "fig2_static": SweepSpec(
            axis="detuning", start=-10.0, stop=10.0, points=n,
            mod_amp_energy=5.0, mod_freq=0.0,
            name="fig2_static",
        ),
        "fig2_trivial_amp": SweepSpec(
            axis="detuning", start=-10.0, stop=10.0, points=n,
            mod_amp_energy=0.0, mod_freq=0.0,
            name="fig2_trivial_amp",
        ),
        "fig3a": SweepSpec(
            axis="mod_amp_energy", start=10.0 / n, stop=10.0, points=n,
            detuning=0.0, mod_freq=2.0,
            name="fig3a",
        ),
        "fig3b": SweepSpec(
            axis="mod_freq", start=12.0 / n, stop=12.0, points=n,
            detuning=0.0, mod_amp_energy=5.0,
            name="fig3b",
        ),
        "fig4a": SweepSpec(
            axis="mod_freq", start=12.0 / n, stop=12.0, points=n,
            detuning=0.0, mod_amp_energy=5.0,
            sideband_orders=(0, 1, 2),
            name="fig4a",
        ),
        "fig4b": SweepSpec(
            axis="mod_amp_energy", start=10.0 / n, stop=10.0, points=n,
            detuning=0.0, mod_freq=2.0,
            sideband_orders=(0, 1, 2),
            name="fig4b",
        ),
    }
    return presets
