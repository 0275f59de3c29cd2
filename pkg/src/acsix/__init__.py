"""Numerical toolkit for almost complex structures on six-manifolds."""

from . import coframe, exterior, nmatrix, stable3form, variational
from .tolerances import DEFAULT, TOL_CLASS, TOL_REL, Tolerances

__all__ = ["coframe", "exterior", "nmatrix", "stable3form", "variational",
           "DEFAULT", "TOL_CLASS", "TOL_REL", "Tolerances"]
__version__ = "0.1.0"
