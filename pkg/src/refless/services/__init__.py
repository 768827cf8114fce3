"""Service exports for convenience."""

from .checks import AcceptanceSuite, CheckResult, acceptance_suite, run_config_checks, run_suite
from .gapset import (
    Divisor,
    FiniteGapSet,
    GapPoint,
    SetCase,
    classify_set,
    h0_eval,
    h0_log_oracle,
    make_divisor,
    representation_data,
)
from .jacobi import JacobiWindow, moments_to_jacobi, strip_coefficients
from .moebius import INFINITY, HerglotzMap, MoebiusElement, herglotz_metric
from .orbits import (
    OrbitKind,
    act,
    dirac_representative,
    jacobi_orbit_data,
    jacobi_representative,
    schrodinger_representative,
    twisted_shift_check,
)
from .systems import (
    Normalization,
    ReflectionlessSystem,
    Side,
    SingularSystem,
    build_system,
    eval_m,
    extract_parameters,
    system_distance,
)

__all__ = [
    "AcceptanceSuite",
    "CheckResult",
    "acceptance_suite",
    "run_config_checks",
    "run_suite",
    "Divisor",
    "FiniteGapSet",
    "GapPoint",
    "SetCase",
    "classify_set",
    "h0_eval",
    "h0_log_oracle",
    "make_divisor",
    "representation_data",
    "JacobiWindow",
    "moments_to_jacobi",
    "strip_coefficients",
    "INFINITY",
    "HerglotzMap",
    "MoebiusElement",
    "herglotz_metric",
    "OrbitKind",
    "act",
    "dirac_representative",
    "jacobi_orbit_data",
    "jacobi_representative",
    "schrodinger_representative",
    "twisted_shift_check",
    "Normalization",
    "ReflectionlessSystem",
    "Side",
    "SingularSystem",
    "build_system",
    "eval_m",
    "extract_parameters",
    "system_distance",
]
