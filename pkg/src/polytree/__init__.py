"""Recovery of causal poly-trees from discrete joint distributions."""
from .estimate import (
    DirectedTree,
    OrientationOverride,
    ZeroMassWarning,
    complete_orientation,
    fit_parameters,
)
from .estimator import PolytreeLearner
from .exceptions import (
    ConfigurationError,
    DegeneracyError,
    InputError,
    ParseError,
    PolytreeError,
)
from .info import (
    UNREPRESENTABLE,
    PairTable,
    TripleTable,
    closeness,
    conditional_mutual_information,
    mutual_information,
)
from .model import (
    Dataset,
    Empirical,
    Explicit,
    Factored,
    Polytree,
    VariableSpec,
    check_nondegeneracy,
    joint_probability,
    pair_marginal,
    random_polytree,
    sample,
    triple_marginal,
)
from .orient import (
    ExactThreshold,
    FixedThreshold,
    GTest,
    RecoveredStructure,
    Role,
    TripletType,
    basin_edges,
    classify_triplet,
    independent,
    recover_directions,
    resolve_neighbor,
)
from .skeleton import Skeleton, WeightedEdgeSet, compute_weights, mwst

__version__ = "0.1.0"
