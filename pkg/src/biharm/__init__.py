"""Numerical and exact verification of biharmonic submanifolds of round spheres."""

from .analysis import RationalPoly, two_curvature_system
from .biharmonic import (ResidualReport, bitension_sphere, composition_codim2, identity_cmc,
                         parallel_mean_curvature_check, pseudo_umbilical_check, residual_general,
                         residual_hypersurface, tension)
from .catalog import ENTRIES, build
from .geometry import (ImmersionPatch, first_fundamental, laplace_beltrami, mean_curvature, normal_laplacian,
                       principal_curvatures, quasi_umbilical_check, scalar_curvature, second_fundamental)
from .jetcalc import FdScheme, Jet, fd_derivative, jet_eval
from .spectral import build_mesh, chen_type, minimal_polynomial_residual, verify_caract_bih_HH

__version__ = "0.1.0"
