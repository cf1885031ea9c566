"""Simulator for a 2D Bose-Einstein condensate bouncing on an evanescent
standing-wave mirror under gravity.

Everything runs in the dimensionless units of the mirror problem: lengths in
units of the evanescent decay length, energies in units of the gravitational
energy over one decay length, and the kinetic coefficient ``k`` carrying the
remaining scale freedom.
"""

__version__ = "0.1.0"

from .grid import Grid, WaveField, make_grid, normalize, transform_to_momentum
from .potentials import (
    PhysicalParams,
    PotentialField,
    SimParams,
    derive_sim_params,
    eswp_minimum,
    eswp_potential,
    initial_trap_potential,
)
from .propagator import (
    SplitStepper,
    Trajectory,
    gaussian_packet,
    ground_state,
    relax_to_ground_state,
    run_release,
)
from .observables import (
    BounceReport,
    TimeSeries,
    bounce_report,
    energy,
    fringe_visibility,
    mean_x,
    mean_z,
    momentum_density,
    sigma_x,
    width_growth,
)
from .diffraction import (
    DiffractionSpectrum,
    GratingGeometry,
    azimuthal_splitting,
    bragg_orders,
    de_broglie_from_energy,
    extract_peaks,
    invert_period,
)
from .config import RunConfig, parse_config, print_config

__all__ = [
    "Grid",
    "WaveField",
    "make_grid",
    "normalize",
    "transform_to_momentum",
    "PhysicalParams",
    "PotentialField",
    "SimParams",
    "derive_sim_params",
    "eswp_minimum",
    "eswp_potential",
    "initial_trap_potential",
    "SplitStepper",
    "Trajectory",
    "gaussian_packet",
    "ground_state",
    "relax_to_ground_state",
    "run_release",
    "BounceReport",
    "TimeSeries",
    "bounce_report",
    "energy",
    "fringe_visibility",
    "mean_x",
    "mean_z",
    "momentum_density",
    "sigma_x",
    "width_growth",
    "DiffractionSpectrum",
    "GratingGeometry",
    "azimuthal_splitting",
    "bragg_orders",
    "de_broglie_from_energy",
    "extract_peaks",
    "invert_period",
    "RunConfig",
    "parse_config",
    "print_config",
]
