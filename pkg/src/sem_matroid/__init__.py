"""Identifiability toolkit for homoscedastic linear SEMs on simple digraphs.

The package decides when two directed (possibly cyclic) graphs generate
generically different precision-matrix models: symbolically via the Jacobian
of K = s (I - Lambda)(I - Lambda)^T, combinatorially via graphical criteria,
and operationally via a randomized rank oracle over a large prime field.
"""

from .digraph import (
    Digraph,
    GraphError,
    GraphFormatError,
    count_simple_digraphs,
    digraph_from_index,
    digraph_to_index,
    enumerate_simple_digraphs,
    load_graph,
    parse_graph,
    serialize_graph,
)
from .jacobian import (
    Jacobian,
    JacobianError,
    ParamPoint,
    Polynomial,
    build_jacobian,
    column_order,
    evaluate,
    lam,
    numeric_jacobian_fd,
    precision_matrix,
    precision_matrix_symbolic,
    random_rational_point,
    render_polynomial,
    simplify_s_row,
    svar,
    zero_point,
)
from .matroid import (
    MatroidComparison,
    MatroidError,
    RankOracle,
    RankOracleConfig,
    exact_rank,
    find_distinguishing_set,
    generic_rank,
    is_independent,
    matroid_rank,
    matroids_equal,
)
from .criteria import (
    CriterionError,
    CriterionWitness,
    DistinguishReport,
    NecessaryConditionReport,
    PCSet,
    acyclic_pc_witness,
    dependence_pattern,
    distinguish,
    is_parentally_closed,
    necessary_condition_checks,
    outdegree_criterion,
    pc_criterion,
    pc_sets,
    rank_gap_columns,
    ttf_criterion,
)

__version__ = "0.1.0"
