from .fourtank import DEFAULT_COEFFS, DIRECT_COEFFS, FourTankEnv
from .randomwalk import RandomWalkEnv, bellman_residual, rms_error, rw_true_values
from .tempcontrol import A_MATRIX, TempControlEnv

__all__ = [
    "A_MATRIX",
    "DEFAULT_COEFFS",
    "DIRECT_COEFFS",
    "FourTankEnv",
    "RandomWalkEnv",
    "TempControlEnv",
    "bellman_residual",
    "rms_error",
    "rw_true_values",
]
