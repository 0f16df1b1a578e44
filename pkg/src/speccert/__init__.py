"""Certified spectra and pseudospectra of infinite-dimensional operators."""

from speccert.decision import (
    CompactSetApprox,
    TowerOutput,
    spec_class,
    spec_gap,
    test_pseudo_spec,
    test_spec,
)
from speccert.diffop import (
    DiffOpSpec,
    PolynomialCoefficient,
    assemble_gram,
    diffop_gamma,
    diffop_pseudospectrum,
    diffop_spectrum,
    hermite_matrix_oracle,
    sample_coefficient,
    schroedinger_1d,
)
from speccert.discrete import (
    approx_eigenvector,
    disc_spec_empty,
    discrete_spec,
    ess_spec_tower,
    multiplicity,
)
from speccert.linalg import (
    BlockLDL,
    HermitianMatrix,
    Inertia,
    count_negative,
    eigenvalues_bisection,
    is_positive_definite,
    ldl_hermitian,
    smallest_singular_bound,
)
from speccert.operator import (
    GraphOperator,
    OperatorOracle,
    ResolventGrowth,
    direct_sum,
    graph_to_oracle,
    oracle_from_csv_rows,
    zoo,
)
from speccert.resolvent import GammaEstimate, dist_spec, gamma_monotone
from speccert.spectra import (
    CertifiedPointSet,
    ComplexGrid,
    attouch_wets_distance,
    comp_invg,
    comp_spec_adaptive,
    comp_spec_ub,
    hausdorff_distance,
    pseudo_spec_ub,
)

__all__ = [
    "BlockLDL",
    "CertifiedPointSet",
    "CompactSetApprox",
    "ComplexGrid",
    "DiffOpSpec",
    "GammaEstimate",
    "GraphOperator",
    "HermitianMatrix",
    "Inertia",
    "OperatorOracle",
    "PolynomialCoefficient",
    "ResolventGrowth",
    "TowerOutput",
    "approx_eigenvector",
    "assemble_gram",
    "attouch_wets_distance",
    "comp_invg",
    "comp_spec_adaptive",
    "comp_spec_ub",
    "count_negative",
    "diffop_gamma",
    "diffop_pseudospectrum",
    "diffop_spectrum",
    "direct_sum",
    "disc_spec_empty",
    "discrete_spec",
    "dist_spec",
    "eigenvalues_bisection",
    "ess_spec_tower",
    "gamma_monotone",
    "graph_to_oracle",
    "hausdorff_distance",
    "hermite_matrix_oracle",
    "is_positive_definite",
    "ldl_hermitian",
    "multiplicity",
    "oracle_from_csv_rows",
    "pseudo_spec_ub",
    "sample_coefficient",
    "schroedinger_1d",
    "smallest_singular_bound",
    "spec_class",
    "spec_gap",
    "test_pseudo_spec",
    "test_spec",
    "zoo",
]

__version__ = "0.1.0"
