"""Unit conversions used by the model builders.

Everything inside the simulator is in hartree atomic units (energy in
hartree, time in atomic time units, dipoles in e*a0) except the rotor
control channel, whose field is expressed in V/m.  All conversion factors
live here and are derived from CODATA values shipped with scipy.
"""

from __future__ import annotations

from scipy import constants as _c

HARTREE_J: float = _c.physical_constants["Hartree energy"][0]
HARTREE_CM: float = _c.physical_constants["hartree-inverse meter relationship"][0] / 100.0
AU_TIME_S: float = _c.physical_constants["atomic unit of time"][0]
AU_TIME_FS: float = AU_TIME_S * 1e15
AU_DIPOLE_CM: float = _c.physical_constants["atomic unit of electric dipole mom."][0]
DEBYE_CM: float = 1e-21 / _c.c
DEBYE_AU: float = DEBYE_CM / AU_DIPOLE_CM
BOLTZMANN_CM_PER_K: float = _c.k / (_c.h * _c.c * 100.0)
EPSILON_0: float = _c.epsilon_0


def cm_to_hartree(x: float) -> float:
    return x / HARTREE_CM


def joule_to_hartree(x: float) -> float:
    return x / HARTREE_J


def fs_to_au(x: float) -> float:
    return x / AU_TIME_FS


def seconds_to_au(x: float) -> float:
    return x / AU_TIME_S


def debye_to_au(x: float) -> float:
    return x * DEBYE_AU


def coulomb_meter_to_hartree_per_field(x: float) -> float:
    """Dipole in C*m expressed as hartree per (V/m) of applied field."""
    return x / HARTREE_J
