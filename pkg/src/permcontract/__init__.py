"""Permutation arrays with guaranteed Hamming distance via contraction."""

from .certify import Certificate, canonical_hash, certify_bound, issue, recheck
from .cgraph import (
    CGraph,
    ComponentReport,
    PartitionReport,
    PathCoeffs,
    StructureReport,
    agl_graph,
    agl_neighbors,
    build_graph,
    components,
    is_contraction_edge,
    level_zero_partition,
    path_coeffs,
    pform_grid,
    pgl_graph,
    verify_pgl_structure,
)
from .gf import (
    Field,
    find_generator,
    legendre,
    residue_identity_report,
    solve_agreement_quadratic,
    solve_unit_quadratic,
    split_prime_power,
    sqrt_minus3,
    trace_gf2,
)
from .groups import (
    BSGS,
    agl_enumerate,
    alpha_map,
    enumerate_group,
    mathieu,
    octad_scan,
    p_form_perm,
    pgl_enumerate,
    sample_max_fixed_points,
)
from .indep import (
    PUBLISHED_K,
    BoundResult,
    IndepSet,
    M24Report,
    TableRow,
    agl_bound_array,
    agl_independent_set,
    lift_to_pgl,
    m24_report,
    mathieu_contract,
    p1_exact,
    p1_greedy,
    pgl_bound_array,
    project_arithmetic,
    project_bound,
    table1_run,
    write_table_csv,
)
from .perm import PArray, contract_array, contract_drop, contract_full, hd, identity

__all__ = [
    "BSGS",
    "BoundResult",
    "CGraph",
    "Certificate",
    "ComponentReport",
    "Field",
    "IndepSet",
    "M24Report",
    "PArray",
    "PUBLISHED_K",
    "PartitionReport",
    "PathCoeffs",
    "StructureReport",
    "TableRow",
    "agl_bound_array",
    "agl_enumerate",
    "agl_graph",
    "agl_independent_set",
    "agl_neighbors",
    "alpha_map",
    "build_graph",
    "canonical_hash",
    "certify_bound",
    "components",
    "contract_array",
    "contract_drop",
    "contract_full",
    "enumerate_group",
    "find_generator",
    "hd",
    "identity",
    "is_contraction_edge",
    "issue",
    "legendre",
    "level_zero_partition",
    "lift_to_pgl",
    "m24_report",
    "mathieu",
    "mathieu_contract",
    "octad_scan",
    "p1_exact",
    "p1_greedy",
    "p_form_perm",
    "path_coeffs",
    "pform_grid",
    "pgl_bound_array",
    "pgl_enumerate",
    "pgl_graph",
    "project_arithmetic",
    "project_bound",
    "recheck",
    "residue_identity_report",
    "sample_max_fixed_points",
    "solve_agreement_quadratic",
    "solve_unit_quadratic",
    "split_prime_power",
    "sqrt_minus3",
    "table1_run",
    "trace_gf2",
    "verify_pgl_structure",
    "write_table_csv",
]

__version__ = "0.1.0"
