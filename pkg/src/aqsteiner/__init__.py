"""Pendant Steiner-tree packing certificates for augmented cubes.

Construct, for any three targets in the n-dimensional augmented cube,
a verified family of 2n - 3 internally disjoint trees in which every
target is a leaf; check such certificates independently; compute exact
packing numbers at small scale; probe disjoint-path structure.
"""

from .construct import (
    Case,
    CaseTag,
    FallbackDisabled,
    InternalError,
    SteinerTree,
    TreeFamily,
    base_case_search,
    classify,
    construct,
    construct_case1,
    construct_case2_image,
    construct_case2_nonimage,
    embed,
    target_family_size,
)
from .paths import (
    HamiltonianNotFound,
    MinCut,
    Path,
    PathSystem,
    PinUnsatisfiable,
    SearchBudgetExceeded,
    connector_tree,
    disjoint_paths,
    hamiltonian_path,
    map_path_system,
    neighbor_along,
    reorder_paths,
)
from .topology import (
    AugmentedCube,
    ContractViolation,
    GraphView,
    Side,
    Vertex,
    c_image,
    complement_automorphism,
    h_image,
    hc_swap_automorphism,
    is_adjacent,
    neighbors,
    parse_vertex,
    side_isomorphism,
    side_view,
    split_side,
    sub_cube_vertices,
)
from .verify import (
    ConnectivityResult,
    OracleResult,
    VerificationReport,
    Violation,
    connectivity,
    hager_upper_bound,
    oracle_tau,
    verify_family,
    verify_tree,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
