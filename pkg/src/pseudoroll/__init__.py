"""Rolling of pseudo-Riemannian hyperquadrics over their affine tangent spaces."""

from .linalg import CausalClass, Signature, causal_class, j_inner, matrix_exp
from .hyperquadric import AffineTangentSpace, CurveSamples, Hyperquadric, geodesic
from .kinematics import Control, RollingTrajectory, integrate_kinematics, verify_rolling

__all__ = [
    "AffineTangentSpace",
    "CausalClass",
    "Control",
    "CurveSamples",
    "Hyperquadric",
    "RollingTrajectory",
    "Signature",
    "causal_class",
    "geodesic",
    "integrate_kinematics",
    "j_inner",
    "matrix_exp",
    "verify_rolling",
]

__version__ = "0.1.0"
