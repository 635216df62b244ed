"""Self-similar localization in adiabatic shear: the (p, q, r, s) slow system,
its M0 -> M1 heteroclinic orbit, and the profiles reconstructed from it."""
from .model import ParamSet, exponents, lambda_max, validate_params
from .spectral import spectrum_M0, spectrum_M1

__all__ = ["ParamSet", "exponents", "lambda_max", "validate_params", "spectrum_M0", "spectrum_M1"]
__version__ = "0.1.0"
