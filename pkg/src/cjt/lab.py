"""Conversion from trapped-ion laboratory parameters to model parameters.

The two drive frequencies fix the effective spin splitting and boson energy
through

    nu_blue/red = omega_0 - omega_z +/- (omega_t - Delta_phys),

so omega_z = omega_0 - (nu_b + nu_r)/2 and Delta_phys = omega_t -
(nu_b - nu_r)/2.  The spin-boson coupling is g = mu * b * rbar / sqrt(2)
with the ground-state width rbar = sqrt(hbar / (2 m omega_t)), and the
vibrational hopping between ions at distance d is

    t = e^2 / (4 pi eps0 * 2 m omega_t * d^3)

(an angular frequency; hbar cancels).  Everything is divided by omega_z to
produce the dimensionless model.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.constants as const

from .errors import ConfigError
from .geometry import center_bond, equilibrium_positions
from .model import ModelParams

# Zeeman qubit constants for the 40Ca+ ground state, used by the shipped
# lab preset: S_1/2 Lande factor and mu = mu_B * g_L / 2.
CA40_MASS_KG = 39.9625909 * const.atomic_mass
CA40_LANDE_G = 2.00225664
CA40_MAGNETIC_MOMENT = const.physical_constants["Bohr magneton"][0] * CA40_LANDE_G / 2


@dataclass(frozen=True)
class LabParams:
    """Physical trap, drive and field-gradient parameters (SI units)."""

    n_sites: int
    ion_mass: float                 # kg
    charge: float                   # C
    trap_radial_freq: float         # rad/s
    internal_splitting: float       # rad/s
    gradient: float                 # T/m
    magnetic_moment: float          # J/T
    drive_freq_blue: float          # rad/s
    drive_freq_red: float           # rad/s
    ion_spacing: float | None = None    # m, centre-bond spacing
    axial_freq: float | None = None     # rad/s, alternative to ion_spacing
    rwa_threshold: float = 0.1
    staggered: bool = True
    include_local_shift: bool = True

    def __post_init__(self):
        positive = (
            ("ion_mass", self.ion_mass),
            ("charge", self.charge),
            ("trap_radial_freq", self.trap_radial_freq),
            ("internal_splitting", self.internal_splitting),
            ("magnetic_moment", self.magnetic_moment),
            ("drive_freq_blue", self.drive_freq_blue),
            ("drive_freq_red", self.drive_freq_red),
        )
        for name, value in positive:
            if value <= 0:
                raise ConfigError(f"lab.{name}: must be > 0")
        if self.gradient < 0:
            raise ConfigError("lab.gradient: must be >= 0")
        if (self.ion_spacing is None) == (self.axial_freq is None):
            raise ConfigError("lab: give exactly one of ion_spacing, axial_freq")


def ca40_lab_params(
    n_sites=20,
    trap_radial_freq=2 * np.pi * 1e6,
    internal_splitting=2 * np.pi * 20e6,
    omega_z=2 * np.pi * 20e3,
    delta_over_omega_z=2.2,
    gradient=35.0,
    ion_spacing=16e-6,
) -> LabParams:
    """The 40Ca+ reference chain with drives solved for the requested detunings."""
    delta_phys = delta_over_omega_z * omega_z
    nu_blue = internal_splitting - omega_z + (trap_radial_freq - delta_phys)
    nu_red = internal_splitting - omega_z - (trap_radial_freq - delta_phys)
    return LabParams(
        n_sites=n_sites,
        ion_mass=CA40_MASS_KG,
        charge=const.e,
        trap_radial_freq=trap_radial_freq,
        internal_splitting=internal_splitting,
        gradient=gradient,
        magnetic_moment=CA40_MAGNETIC_MOMENT,
        drive_freq_blue=nu_blue,
        drive_freq_red=nu_red,
        ion_spacing=ion_spacing,
    )


def hopping_scale(lab: LabParams, distance):
    """Vibrational hopping (rad/s) between two ions at ``distance`` metres."""
    coulomb = lab.charge**2 / (4 * np.pi * const.epsilon_0)
    return coulomb / (2 * lab.ion_mass * lab.trap_radial_freq * distance**3)


def _center_spacing(lab: LabParams):
    if lab.ion_spacing is not None:
        return lab.ion_spacing
    length_unit = (
        lab.charge**2
        / (4 * np.pi * const.epsilon_0 * lab.ion_mass * lab.axial_freq**2)
    ) ** (1.0 / 3.0)
    geom = equilibrium_positions(lab.n_sites)
    if lab.n_sites == 1:
        raise ConfigError("lab: hopping scale undefined for a single ion")
    lo, hi = center_bond(lab.n_sites)
    return length_unit * (geom.positions[hi] - geom.positions[lo])


def from_lab_params(lab: LabParams, return_report=False):
    """Reduce the driven trapped-ion system to dimensionless model parameters.

    Returns a :class:`ModelParams` with the coulomb coupling scheme; with
    ``return_report=True`` also returns a dict of the physical scales and
    rotating-wave validity ratios.  Ratios above ``lab.rwa_threshold``
    trigger a warning but never a failure: the reduced model is treated as
    exact and the ratios are reported so the caller can judge.
    """
    omega_z = lab.internal_splitting - 0.5 * (lab.drive_freq_blue + lab.drive_freq_red)
    delta_phys = lab.trap_radial_freq - 0.5 * (lab.drive_freq_blue - lab.drive_freq_red)
    if omega_z <= 0:
        raise ConfigError(
            "lab.drive_freq_*: inconsistent drives, derived omega_z <= 0"
        )
    if delta_phys <= 0:
        raise ConfigError(
            "lab.drive_freq_*: inconsistent drives, derived boson energy <= 0"
        )
    rbar = np.sqrt(const.hbar / (2 * lab.ion_mass * lab.trap_radial_freq))
    g_phys = abs(lab.magnetic_moment * lab.gradient) * rbar / (np.sqrt(2) * const.hbar)
    if lab.n_sites > 1:
        t_center = hopping_scale(lab, _center_spacing(lab))
        center_hop = t_center / omega_z
    else:
        t_center = 0.0
        center_hop = None
    ratios = {
        "g_over_trap_freq": g_phys / lab.trap_radial_freq,
        "g_over_internal_splitting": g_phys / lab.internal_splitting,
        "hop_over_trap_freq": t_center / lab.trap_radial_freq,
    }
    for name, ratio in ratios.items():
        if ratio > lab.rwa_threshold:
            warnings.warn(
                f"rotating-wave validity ratio {name} = {ratio:.3g} exceeds "
                f"threshold {lab.rwa_threshold}",
                stacklevel=2,
            )
    if lab.n_sites > 1:
        params = ModelParams(
            n_sites=lab.n_sites,
            delta_bare=delta_phys / omega_z,
            g=g_phys / omega_z,
            scheme="coulomb",
            center_hop=center_hop,
            staggered=lab.staggered,
            include_local_shift=lab.include_local_shift,
        )
    else:
        params = ModelParams(
            n_sites=1,
            delta_bare=delta_phys / omega_z,
            g=g_phys / omega_z,
            scheme="short_range",
            t=0.0,
            staggered=lab.staggered,
            include_local_shift=lab.include_local_shift,
        )
    if not return_report:
        return params
    report = {
        "omega_z_rad_s": omega_z,
        "delta_phys_rad_s": delta_phys,
        "g_rad_s": g_phys,
        "t_center_rad_s": t_center,
        "rbar_m": rbar,
        **ratios,
    }
    return params, report
