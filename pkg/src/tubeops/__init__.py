"""Two-slot kernel operators on the tube over the paraboloid base, and when they are bounded.

The package classifies boundedness of ``T_{a,b,c}`` and ``S_{a,b,c}`` between
weighted mixed-norm Lebesgue spaces and backs each verdict with numerical
evidence: quadrature checks of the integral identities, Schur-test
certificates, witness-family blow-up sweeps and adjoint duality.
"""

from .classifier import (
    BoundednessVerdict,
    ConsistencyError,
    MixedExponents,
    Status,
    classify,
    classify_berezin,
    classify_projection,
    classify_Tc,
)
from .geometry import MembershipError, TubePoint, complex_power, rho, rho_pair, sample_points
from .integration import (
    IntegralResult,
    QuadratureConfig,
    SlotFunction,
    WeightedFunction,
    integrate_product,
    integrate_tube,
    mixed_norm,
    verify_identity_first,
    verify_identity_second,
)
from .operators import (
    InadmissibleWeightsError,
    OperatorParams,
    apply_S,
    apply_T,
    apply_T_adjoint,
    make_berezin,
    make_projection,
    make_Tc,
)
from .schur import (
    InfeasibleCertificateError,
    SchurCertificate,
    build_certificate,
    verify_infinity_condition,
    verify_schur_conditions,
)
from .special_functions import DivergentParameterError, c1_constant, gamma_fn
from .witnesses import blowup_sweep, closed_form_T_image, duality_gap, make_bump, make_direct_family, make_dual_family

__version__ = "0.1.0"

__all__ = [
    "BoundednessVerdict",
    "ConsistencyError",
    "DivergentParameterError",
    "InadmissibleWeightsError",
    "InfeasibleCertificateError",
    "IntegralResult",
    "MembershipError",
    "MixedExponents",
    "OperatorParams",
    "QuadratureConfig",
    "SchurCertificate",
    "SlotFunction",
    "Status",
    "TubePoint",
    "WeightedFunction",
    "apply_S",
    "apply_T",
    "apply_T_adjoint",
    "blowup_sweep",
    "build_certificate",
    "c1_constant",
    "classify",
    "classify_Tc",
    "classify_berezin",
    "classify_projection",
    "closed_form_T_image",
    "complex_power",
    "duality_gap",
    "gamma_fn",
    "integrate_product",
    "integrate_tube",
    "make_Tc",
    "make_berezin",
    "make_bump",
    "make_direct_family",
    "make_dual_family",
    "make_projection",
    "mixed_norm",
    "rho",
    "rho_pair",
    "sample_points",
    "verify_identity_first",
    "verify_identity_second",
    "verify_infinity_condition",
    "verify_schur_conditions",
]
