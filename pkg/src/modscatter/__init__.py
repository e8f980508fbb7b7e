"""Single-photon scattering on a periodically frequency-modulated waveguide
emitter: closed-form sideband amplitudes, two independent cross-check
solvers, parameter sweeps, and a space-time photon-trap simulator."""

__version__ = "0.1.0"

from .errors import (
    BadWindowError,
    CflViolationError,
    NotStaticError,
    OutOfRangeError,
    ResolutionError,
    ScatterError,
    SingularSystemError,
    StaticLimitError,
    TruncationError,
    UnstableStepError,
)
from .params import (
    EmitterParams,
    ScatteringQuery,
    TruncationSpec,
    normalized_params,
)
from .bessel import bessel_j, bessel_j_sequence
from .scattering import (
    ExcitationSpectrum,
    SidebandSet,
    auto_truncation,
    evaluate_sidebands,
    excitation_coefficients,
    modulation_index,
    reflection_amplitudes,
    static_limit_amplitudes,
    total_probabilities,
    transmission_amplitudes,
)
from .oracles import (
    HarmonicBalanceSystem,
    TimeDomainTrace,
    ValidationReport,
    amplitudes_from_excitation,
    build_harmonic_balance,
    cross_validate,
    fourier_extract,
    harmonic_balance_solve,
    periodicity_defect,
    time_domain_excitation,
)
from .sweeps import SpectrumDataset, SweepSpec, figure_presets, run_sweep, sideband_resolved
from .cavity import (
    EmitterSite,
    GridState,
    ModulationSchedule,
    PacketSpec,
    TrapProtocol,
    TrapReport,
    convolution_oracle,
    default_trap_protocol,
    init_grid,
    norm,
    run_packet_scattering,
    run_protocol,
    step,
)

__all__ = [
    "BadWindowError",
    "CflViolationError",
    "NotStaticError",
    "OutOfRangeError",
    "ResolutionError",
    "ScatterError",
    "SingularSystemError",
    "StaticLimitError",
    "TruncationError",
    "UnstableStepError",
    "EmitterParams",
    "ScatteringQuery",
    "TruncationSpec",
    "normalized_params",
    "bessel_j",
    "bessel_j_sequence",
    "ExcitationSpectrum",
    "SidebandSet",
    "auto_truncation",
    "evaluate_sidebands",
    "excitation_coefficients",
    "modulation_index",
    "reflection_amplitudes",
    "static_limit_amplitudes",
    "total_probabilities",
    "transmission_amplitudes",
    "HarmonicBalanceSystem",
    "TimeDomainTrace",
    "ValidationReport",
    "amplitudes_from_excitation",
    "build_harmonic_balance",
    "cross_validate",
    "fourier_extract",
    "harmonic_balance_solve",
    "periodicity_defect",
    "time_domain_excitation",
    "SpectrumDataset",
    "SweepSpec",
    "figure_presets",
    "run_sweep",
    "sideband_resolved",
    "EmitterSite",
    "GridState",
    "ModulationSchedule",
    "PacketSpec",
    "TrapProtocol",
    "TrapReport",
    "convolution_oracle",
    "default_trap_protocol",
    "init_grid",
    "norm",
    "run_packet_scattering",
    "run_protocol",
    "step",
]
