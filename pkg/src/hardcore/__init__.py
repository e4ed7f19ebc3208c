"""Hard-core model: exact and approximate partition functions, self-avoiding
walk machinery and strong-spatial-mixing thresholds."""
from ._backend import BACKEND
from ._errors import NodeBudgetExceeded, StateCapExceeded
from .decay import (
    MarginalInterval,
    SymmetricTree,
    decay_profile,
    marginal_interval,
    recurrence_step,
    symmetric_tree_report,
)
from .exact import (
    SizeGuardError,
    brute_force_log_partition,
    exact_conditioned_log_partition,
    exact_log_partition,
    exact_occupation,
)
from .fptas import DepthCapReached, approx_log_partition, approx_occupation, plan_depth
from .graph import (
    EMPTY_BOUNDARY,
    BoundaryCondition,
    BoundaryError,
    Graph,
    GraphError,
    Spin,
    generate_gnp,
    generate_lattice_patch,
    load_graph,
    parse_graph,
    reduce_by_boundary,
)
from .saw import (
    best_weitz_gamma,
    branching_matrix,
    build_weitz_saw_tree,
    count_saws,
    estimate_connective,
    perron_root,
)
from .threshold import (
    chi,
    lambda_c,
    lambda_star,
    nu,
    solve_xtilde,
    ssm_certificate,
    table1,
    theorem1_certificate,
)

__version__ = "0.1.0"
