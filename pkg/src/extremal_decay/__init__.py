"""Decay rates of multivariate supremum probabilities from restricted large deviations."""

from .core import INF, ExtReal, Grid, NumericalError, RateFn, RestrictedRate, Scaling, scaling_h
from .decay import DecayResult, decay_rate, reduce_min, set_decay, tilde_rate
from .gauss import GaussParams, gauss_conjugate, gauss_decay, gauss_J
from .kernels import BACKEND
from .onoff import OnOffParams, onoff_decay_closed, onoff_J, onoff_rate_2d
from .transforms import closure_identity_check, fenchel_legendre, quadrant_inf

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "INF", "DecayResult", "ExtReal", "GaussParams", "Grid", "NumericalError",
    "OnOffParams", "RateFn", "RestrictedRate", "Scaling", "closure_identity_check",
    "decay_rate", "fenchel_legendre", "gauss_J", "gauss_conjugate", "gauss_decay",
    "onoff_J", "onoff_decay_closed", "onoff_rate_2d", "quadrant_inf", "reduce_min",
    "scaling_h", "set_decay", "tilde_rate",
]
