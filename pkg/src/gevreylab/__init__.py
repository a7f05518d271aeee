"""Pseudospectral mKdV / third-order NLS solver with Gevrey-analytic diagnostics."""

from .equations import EquationSpec, phase_symbol
from .spectral import (
    GevreyOverflowError,
    GevreyParams,
    GridSpec,
    SpaceTimeField,
    SpectralField,
    apply_derivative,
    apply_gevrey,
    dealias,
    gevrey_norm,
    lp_norm,
    make_grid,
    make_spacetime,
    to_physical,
    to_spectral,
    xsb_norm,
)

__version__ = "0.1.0"
