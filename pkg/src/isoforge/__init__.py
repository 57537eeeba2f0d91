"""isoforge: construction and verification of trivial isochronous centers.

Exact rational polynomial arithmetic underpins the symbolic half (family
construction, inverse maps, unit-Jacobian proofs, homogeneous degeneracy
witnesses, transport-equation solutions); floating-point integration
underpins the numeric half (orbit periods, isochrony sweeps, injectivity
sampling, linear-equivalence evidence search).
"""

from .poly import (
    MINUS_INFINITY,
    BivariatePoly,
    HomogeneousPoly,
    ONE,
    X,
    Y,
    ZERO,
    compose,
    div_homogeneous,
    gcd_homogeneous,
    parse_poly,
    radical_homogeneous,
)
from .families import (
    BranchCatalogEntry,
    FamilySpec,
    Hamiltonian,
    InversionError,
    PolyMap,
    QSHEAR,
    SpecValidationError,
    TRIANGULAR,
    branch_catalog,
    build,
    build_qshear,
    build_triangular,
    compose_map,
    hamiltonian_of,
    identity_map,
    invert_map,
    is_identity,
    quadratic_shear,
    system_degree,
    vector_field,
)
from .symbolic import (
    DegeneracyWitness,
    QShearCancellationReport,
    TransportProblem,
    WitnessFieldError,
    check_unit_jacobian,
    degeneracy_witness,
    jacobian_det,
    qshear_cancellation_trace,
    solve_transport,
)
from .numeric import (
    DEFAULT_CONFIG,
    EquivalenceSearchResult,
    IntegrationError,
    IntegratorConfig,
    PeriodReport,
    injectivity_sample,
    integrate_orbit,
    isochrony_sweep,
    linear_equivalence_search,
    measure_period,
    rigid_rotation_defect,
    section_start_point,
)

__version__ = "0.1.0"
