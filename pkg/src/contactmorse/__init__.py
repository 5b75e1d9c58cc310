"""Translated points of contactomorphisms of S^{2n-1} and RP^{2n-1}.

Contactomorphisms isotopic to the identity lift to R_+-equivariant
Hamiltonian symplectomorphisms of R^{2n}; their translated points are
detected both as critical rays of degree-2 homogeneous generating functions
and by a direct fixed-point solve, and the two routes cross-validate each
other.
"""

from .flow import (
    FlowMap,
    IntegratorSettings,
    calibrate_steps_per_unit,
    conformal_factor,
    integrate_flow,
    subdivide_c1_small,
)
from .genfun import (
    ComposeGF,
    GenFun,
    LeafGF,
    LeafNewtonError,
    QuadraticGF,
    RotationFamily,
    build_rotation_family,
    gf_compose,
    gf_eval,
    gf_grad,
    gf_leaf_eval,
    quadratic_form_for_rotation,
)
from .hamiltonian import (
    ContactHamiltonianSpec,
    PerturbationTerm,
    lift_hamiltonian,
)
from .linsymp import (
    ComplexVector2n,
    CotangentPoint,
    Inertia,
    QuadraticForm,
    contact_form_eval,
    fr_index_quadratic,
    inertia,
    tau_embed,
)
from .projective import (
    AntipodalPairingError,
    ProjectiveSpec,
    antipodal_classes,
    gf_invariance_check,
    z2_equivariance_check,
)
from .translated import (
    ConfigurationError,
    DetectionResult,
    RouteDisagreementError,
    ShiftedGenFunFamily,
    SweepParams,
    SweepReport,
    TranslatedPointRecord,
    direct_translated_points,
    find_critical_rays,
    index_jump,
    nondegeneracy_check,
    sweep_and_count,
)

__version__ = "0.1.0"
