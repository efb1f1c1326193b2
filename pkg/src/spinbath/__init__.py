"""Exact reduced dynamics of a qubit in a precessing field coupled to an Ising spin bath."""
from .adiabatic import (
    AdiabaticConfig,
    closed_fidelity,
    eigenstate_plus,
    fidelity_via_channel,
    open_fidelity,
)
from .bath import (
    ModelParams,
    ModeSpectrum,
    bath_spectrum,
    hamming_spectrum,
    product_weight,
    spectrum,
    zero_temperature_index,
)
from .dynamics import (
    QubitChannel,
    Trajectory,
    apply_channel,
    build_channel,
    closed_evolution,
    dephasing_factor,
    evolve,
    mode_hamiltonian,
    mode_unitary,
)
from .errors import (
    BranchError,
    CapacityError,
    ContractError,
    DimensionError,
    PreconditionError,
    SpinBathError,
)
from .qubit import fidelity, frobenius_norm_sq, herm2_exp, partial_trace_blocks, trace_distance
from .riccati import mode_similarity, riccati_f, riccati_f2, riccati_residual

__all__ = [
    "AdiabaticConfig", "BranchError", "CapacityError", "ContractError", "DimensionError",
    "ModeSpectrum", "ModelParams", "PreconditionError", "QubitChannel", "SpinBathError",
    "Trajectory", "apply_channel", "bath_spectrum", "build_channel", "closed_evolution",
    "closed_fidelity", "dephasing_factor", "eigenstate_plus", "evolve", "fidelity",
    "fidelity_via_channel", "frobenius_norm_sq", "hamming_spectrum", "herm2_exp",
    "mode_hamiltonian", "mode_similarity", "mode_unitary", "open_fidelity",
    "partial_trace_blocks", "product_weight", "riccati_f", "riccati_f2",
    "riccati_residual", "spectrum", "trace_distance", "zero_temperature_index",
]
