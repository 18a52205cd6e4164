"""Open-system quantum dynamics: CP maps, dilations, measurement chains, weak values."""

from qdyn.chain import (
    Measurement,
    MeasurementChain,
    TransferMatrix,
    amplitude_damping_analytic,
    amplitude_damping_measurement,
    amplitude_damping_transfer_closed_form,
    apply_measurement,
    is_decontexted,
    pvm,
    pvm_transfer_matrix,
    run_chain,
    stern_gerlach_chain,
    transfer_matrix,
)
from qdyn.channel import (
    AffineRep,
    ChoiMatrix,
    HermitianMapRep,
    KrausChannel,
    MapClass,
    affine_rep,
    apply,
    choi,
    classify,
    classify_on_domain,
    compose,
    heisenberg_apply,
    hermitian_map_apply,
    kraus_from_choi,
    natural_rep,
    partial_transpose,
    reshuffle,
)
from qdyn.dilation import (
    UniverseModel,
    depolarizing_example,
    kraus_from_dilation,
    reduced_state,
    swap_convert,
    swap_gate,
)
from qdyn.linalg import expm_antihermitian, frob_dist, hermitian_eig, is_psd, kron, partial_trace
from qdyn.states import (
    OperatorBasis,
    bloch_vector,
    expectation,
    gell_mann_basis,
    maximally_entangled,
    random_density,
    random_unitary,
    state_from_bloch,
)
from qdyn.weak import (
    WeakTransferMatrix,
    WeakValue,
    weak_expectation_check,
    weak_transfer_matrix,
    weak_transition_as_weak_value,
    weak_value,
)

__version__ = "0.1.0"

__all__ = [
    "affine_rep",
    "AffineRep",
    "amplitude_damping_analytic",
    "amplitude_damping_measurement",
    "amplitude_damping_transfer_closed_form",
    "apply",
    "apply_measurement",
    "bloch_vector",
    "choi",
    "ChoiMatrix",
    "classify",
    "classify_on_domain",
    "compose",
    "depolarizing_example",
    "expectation",
    "expm_antihermitian",
    "frob_dist",
    "gell_mann_basis",
    "heisenberg_apply",
    "hermitian_eig",
    "hermitian_map_apply",
    "HermitianMapRep",
    "is_decontexted",
    "is_psd",
    "kraus_from_choi",
    "kraus_from_dilation",
    "KrausChannel",
    "kron",
    "MapClass",
    "maximally_entangled",
    "Measurement",
    "MeasurementChain",
    "natural_rep",
    "OperatorBasis",
    "partial_trace",
    "partial_transpose",
    "pvm",
    "pvm_transfer_matrix",
    "random_density",
    "random_unitary",
    "reduced_state",
    "reshuffle",
    "run_chain",
    "state_from_bloch",
    "stern_gerlach_chain",
    "swap_convert",
    "swap_gate",
    "transfer_matrix",
    "TransferMatrix",
    "UniverseModel",
    "weak_expectation_check",
    "weak_transfer_matrix",
    "weak_transition_as_weak_value",
    "weak_value",
    "WeakTransferMatrix",
    "WeakValue",
]
