from .errors import (
    AsymmetryError,
    ConvergenceError,
    DomainError,
    InvarianceError,
    MvProlateError,
    ParameterError,
    SingularMatrixError,
)
from .outcome import Check, Failed, Outcome, Passed, evaluate
from .linalg import BlockMat, sym_eig
from .gegenbauer import gegenbauer
from .matpoly import MatPoly, Params
from .weight import Weight, weight_det, weight_eval
from .quadrature import FULL, QuadPolicy, gauss_rule, inner_product, integrate_weighted
from .families import monic_rw, norm_matrix, orthonormal_qw, recursion_matrices
from .operators import RightDiffOp, apply_right, eigenvalue, op_d, op_dtilde
from .timeband import (
    CoeffVec,
    TBConfig,
    analysis,
    apply_s,
    build_b,
    build_m,
    commutator_residual,
    kernel_eval,
    prolate_spectrum,
    reconstruct,
    synthesis,
)
from .verify import run_suite

__all__ = [
    "MvProlateError",
    "ParameterError",
    "DomainError",
    "SingularMatrixError",
    "AsymmetryError",
    "ConvergenceError",
    "InvarianceError",
    "Check",
    "Passed",
    "Failed",
    "Outcome",
    "evaluate",
    "BlockMat",
    "sym_eig",
    "gegenbauer",
    "MatPoly",
    "Params",
    "Weight",
    "weight_eval",
    "weight_det",
    "FULL",
    "QuadPolicy",
    "gauss_rule",
    "integrate_weighted",
    "inner_product",
    "recursion_matrices",
    "monic_rw",
    "norm_matrix",
    "orthonormal_qw",
    "RightDiffOp",
    "apply_right",
    "op_d",
    "op_dtilde",
    "eigenvalue",
    "TBConfig",
    "CoeffVec",
    "analysis",
    "synthesis",
    "kernel_eval",
    "build_m",
    "apply_s",
    "build_b",
    "commutator_residual",
    "prolate_spectrum",
    "reconstruct",
    "run_suite",
]

__version__ = "0.1"
