"""Spectral laboratory for generalized KdV on the torus."""
from .fourier import (BudgetExceeded, FieldError, PaddedField, SpectralField, free_flow,
                      from_modes, power, project, random_sobolev, sobolev_norm, translate,
                      zero_field)
from .nonlinearity import PolyNonlinearity

__all__ = ["BudgetExceeded", "FieldError", "PaddedField", "SpectralField", "free_flow",
           "from_modes", "power", "project", "random_sobolev", "sobolev_norm", "translate",
           "zero_field", "PolyNonlinearity"]
__version__ = "0.1.0"
