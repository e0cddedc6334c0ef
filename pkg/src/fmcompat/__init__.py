"""Compatibility tests and witness cameras for sets of fundamental matrices."""
from .classify import classify_quadruple, classify_triple
from .compatibility import (
    COMPATIBLE,
    DEGENERATE,
    INCOMPATIBLE,
    CompatibilityReport,
    check_case1,
    check_case1_geometric,
    check_case2,
    check_case2_simpler,
    check_case3,
    check_case4,
    check_multiview,
    check_quadruple,
    check_triple,
)
from .errors import GeometryError
from .fundamental import (
    FundamentalMatrix,
    FundamentalSet,
    apply_action,
    epipolar_number,
    fundamental_matrix,
    make_set,
    psi,
)
from .projective import DEFAULT_TOL, Tolerances
from .reconstruction import CameraSolution, reconstruct, reconstruct_multiview, verify_solution
from .synth import CaseSpec, generate_cameras, generate_set, perturb_set, random_rank2_set, set_from_cameras

__version__ = "0.1.0"

__all__ = [
    "COMPATIBLE", "DEGENERATE", "INCOMPATIBLE", "DEFAULT_TOL",
    "CameraSolution", "CaseSpec", "CompatibilityReport", "FundamentalMatrix", "FundamentalSet",
    "GeometryError", "Tolerances",
    "apply_action", "check_case1", "check_case1_geometric", "check_case2", "check_case2_simpler",
    "check_case3", "check_case4", "check_multiview", "check_quadruple", "check_triple",
    "classify_quadruple", "classify_triple", "epipolar_number", "fundamental_matrix",
    "generate_cameras", "generate_set", "make_set", "perturb_set", "psi", "random_rank2_set",
    "reconstruct", "reconstruct_multiview", "set_from_cameras", "verify_solution",
]
