"""Fermionic Gaussian states, matchgate circuits, and magic resource measures."""

from .labels import (
    MAX_QUBITS,
    MajoranaAction,
    diff_positions,
    enumerate_even_labels,
    flip_bits,
    hamming_distance,
    hamming_weight,
    majorana_apply,
)
from .states import (
    GAUSSIAN_TOL,
    PIVOT_TOL,
    ConstraintId,
    EvenParityState,
    FreeChart,
    Matchgate,
    MatchgateCircuit,
    all_constraints,
    apply_circuit,
    apply_matchgate,
    chart_from_state,
    chart_labels,
    complete_amplitudes,
    constraint_f,
    constraint_residuals,
    independent_constraints,
    is_gaussian,
    lambda_residual_norm,
    max_constraint_residual,
    overlap,
    random_brickwork_circuit,
    random_gaussian,
    random_matchgate,
    run_circuit,
    state_from_dict,
    state_to_dict,
    tensor_power,
    tensor_product,
    worst_constraint,
)

__version__ = "0.1.0"

from .triples import (
    GaussianTriple,
    build_triple,
    free_pair_labels,
    pair_label,
    pair_system_residuals,
    quad_relation,
    solve_triple_chart,
    triple_manifold_dimension,
)
from .fidelity import (
    FidelityResult,
    delta_closed_form,
    delta_recursion,
    gaussian_fidelity,
    haar_random_even_state,
    net_cardinality_bound,
)
from .extent import (
    Decomposition,
    DualWitness,
    PsdCertificate,
    build_m4_certificate,
    certificate_to_dict,
    decomposition_from_dict,
    decomposition_to_dict,
    dual_feasibility,
    extent4_via_extreme_points,
    extent_lower_via_fidelity,
    extent_upper,
    m4_overlap_bound_check,
    make_decomposition,
    multiplicativity_check,
    socp_decomposition,
)
from .rank import (
    MagicState,
    RankSearchConfig,
    SymmetryGrid,
    anneal_decomposition,
    complete_symmetric_chart,
    m_state,
    magic_state,
    malpha_rank1_loss,
    malpha_state,
    mtilde_state,
    rank3_infeasibility_certificate,
    random_symmetric_gaussian,
    symmetric_rank_search,
    symmetric_sector_labels,
    symmetry_grid_residuals,
    symmetry_project,
)
