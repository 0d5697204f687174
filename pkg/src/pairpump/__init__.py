"""Adiabatic pumping of entangled spin-singlet pairs through two Hubbard impurities.

The package evaluates the pair Green's functions of a one-dimensional
tight-binding chain by adaptive quadrature, builds the two-impurity
scattering kernel from single-impurity T-matrices, and integrates it around
closed cycles in the ``(U_-, U_+)`` plane to obtain the number of singlet
pairs pumped per cycle.  Independent finite-lattice oracles validate each
ingredient.
"""
__version__ = "0.1.0"

from ._backend import BACKEND
from .config import DEFAULT_SETTINGS, DEFAULTS, Settings, load_config
from .errors import (BandEdgeError, ConfigError, NormDriftError, PairPumpError, QuadratureError,
                     ResonanceError)
from .impurity import ImpurityState, KernelValue, TMatrixPair, kernel_from_elements, pump_kernel, t_matrix
from .lattice_green import (PAIR_BAND, SINGLE_BAND, ComplexEnergy, LatticeModel, PairGreen, g0_forced_branch,
                            g0_offdiag, g0_onsite, pair_green_elements, relative_log, single_green)
from .pump import (AdiabaticityWarning, CycleSchedule, PairDistribution, PumpCycle, PumpResult,
                   adiabaticity_check, energy_sweep, footprint_sweep, pumped_singlets, pumped_singlets_timeparam,
                   single_particle_pumped_charge)
from .oracle import (FiniteLattice, TwoParticleBasis, brouwer_pumped_charge, oracle_t_matrix, resolvent_element,
                     slater_sea_evolution, triplet_exclusion_check)
