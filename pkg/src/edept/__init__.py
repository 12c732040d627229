"""Numerical toolkit for exact localized electromagnetic pulse trains and
the normalizable one-photon states they define.

The closed-form solution family is indexed by an integer alpha >= 1; the
branch-projected real solutions fall off as r^-(alpha+2) in the potential,
with every derived quantity's asymptotic exponent growing with alpha.  The
package evaluates the fields exactly (dual-number differentiation), builds
the momentum-space photon amplitudes by positive-frequency extraction on a
Hankel x Fourier mode grid, and measures falloff exponents by log-log fits.
"""

from .asymptotics import (ExponentScan, FitError, PowerLawFit, RadialProfile,
                          exponent_scan, fit_power_law, predicted_exponents,
                          sample_radial_profile)
from .autodiff import (CENTRAL, COMPLEX_STEP, DUAL, DifferentiationScheme,
                       Jet, Jet2, SchemeError, SchemeKind, derivative)
from .config import ConfigError, RunConfig, load_config, save_config
from .constants import NATURAL, PhysicalConstants
from .fields import (Branch, EdeptParams, EnergyDensitySample, FieldRangeError,
                     FieldSample, MaxwellResiduals, SpacetimePoint,
                     branch_project, em_fields, energy_density,
                     maxwell_residuals, parity_branch, vector_potential,
                     vector_potential_theta)
from .grids import CylGrid, integrate_cylindrical
from .spectrum import (HelicityAmplitudes, ModeGrid, SpectralAmplitude,
                       TransformSettings, TransversalityError,
                       evolve_reconstruct, helicity_amplitudes,
                       norm_and_energy, polarization_basis,
                       position_space_energy, positive_frequency_spectrum,
                       project_helicity, reconstruct_positive_frequency_e,
                       validate_spectrum)
from .transforms import (TailTruncationError, fourier_axis,
                         hankel_transform_order0, hankel_transform_order1)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
