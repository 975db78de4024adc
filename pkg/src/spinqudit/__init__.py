"""spinqudit: simulator and analysis toolkit for a single high-spin nuclear
qudit (default spin-7/2, d = 8).

Basis convention everywhere: index 0 is |m = +I>, index d-1 is |m = -I>
(descending m).
"""

from .spincore import (
    SPIN_7_2,
    DensityMatrix,
    PureState,
    SpinOperators,
    SpinQuantum,
    as_density_matrix,
    basis_state,
    cat_state,
    dicke_embed,
    dicke_embed_state,
    fidelity,
    ladder_coefficients,
    parity_operator,
    spin_coherent_state,
    spin_operators,
    wigner_d,
    wigner_d_matrix,
)
from .hamiltonian import (
    B0_DEFAULT,
    GAMMA_N_SB123,
    DriveTone,
    FrameDefinition,
    GrfHamiltonian,
    StaticParams,
    grf_drive_hamiltonian,
    grf_transform,
    lab_drive_hamiltonian,
    nmr_frequencies,
    static_hamiltonian,
)
from .dynamics import (
    EvolutionResult,
    FrameUpdateSegment,
    NoiseModel,
    ParityOscillation,
    PulseSchedule,
    ToneSegment,
    WaitSegment,
    apply_dephasing,
    covariant_rotation,
    covariant_tone_set,
    evolve_grf,
    evolve_lab,
    givens_cat_sequence,
    resonant_carriers,
    simulate_parity_oscillation,
    snap_cat_sequence,
    snap_subspace_cat_sequence,
    subspace_level_indices,
    subspace_rotation_amplitudes,
    subspace_tone_set,
    virtual_snap,
    with_carriers,
)
from .wigner import (
    SphericalTensorBasis,
    WignerGrid,
    spherical_harmonic,
    spherical_tensor_basis,
    tensor_decompose,
    tensor_reconstruct,
    wigner_grid,
    wigner_sphere_integral,
    wigner_value,
)
from .tomography import (
    ExperimentDesign,
    MleResult,
    ShotRecord,
    ValidationReport,
    axis_effects,
    born_probabilities,
    design_fte,
    dof_nominal,
    frame_superoperator,
    loglik_ratio,
    mle_reconstruct,
    paper_design,
    parametric_bootstrap,
    reduced_parity_fidelity,
    simulate_shots,
    tomographic_efficiency,
    two_design_fte,
    uniform_axis_fte_analytic,
    uniform_random_design,
)
from .catcode import (
    CodePair,
    ErrorSet,
    KlReport,
    bias_preservation_check,
    codewords,
    kl_check,
    logical_gate,
)
from .floquet import (
    CrossCouplingParams,
    SweepResult,
    average_hamiltonian,
    contrast_sweep,
    cross_coupling_hamiltonian,
    micromotion_kick,
)

__version__ = "0.1.0"
