"""
Dipole element model, array response and power/gain bookkeeping for
linear arrays of parallel, center-fed, z-directed dipoles placed on the
x-axis.

Angles follow the usual spherical convention: ``theta`` is the polar
angle from +z, ``phi`` the azimuth from +x.  End-fire is
``(theta, phi) = (pi/2, 0)``.  All quantities are SI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import constants as sc

__all__ = [
    "PhysicalConstants", "CONSTANTS", "Dipole", "Excitation", "ArrayDesign",
    "FarFieldCut", "DesignError", "NonPhysicalError", "END_FIRE", "BROADSIDE",
    "element_factor", "element_pattern", "array_response", "field_sum",
    "radiation_intensity", "loss_resistance", "input_power",
    "radiated_power", "loss_power", "gain", "directivity", "to_db",
]

END_FIRE = (math.pi / 2, 0.0)
BROADSIDE = (math.pi / 2, math.pi / 2)

RESONANCE_GUARD = 1e-6


class DesignError(ValueError):
    """Invalid array geometry or excitation."""


class NonPhysicalError(ValueError):
    """Raised when a power that must be positive is not."""


@dataclass(frozen=True)
class PhysicalConstants:
    eta: float = 120 * math.pi
    mu: float = 4e-7 * math.pi
    sigma_c: float = 5.8e7
    c: float = sc.c

    def wavelength(self, frequency: float) -> float:
        return self.c / frequency

    def wavenumber(self, frequency: float) -> float:
        return 2 * math.pi * frequency / self.c


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class Dipole:
    """A thin center-fed dipole parallel to z, centered at (position_x, 0, 0).

    Lengths and radius are in meters.
    """
    position_x: float
    length: float
    radius: float

    def __post_init__(self):
        if not (self.length > 0 and self.radius > 0):
            raise DesignError("dipole length and radius must be positive")
        if not self.radius < self.length / 10:
            raise DesignError(
                f"radius {self.radius:g} m is not thin against length "
                f"{self.length:g} m")


def _wrap_phase(phase: float) -> float:
    # maps into (-pi, pi]
    p = math.remainder(phase, 2 * math.pi)
    return math.pi if p <= -math.pi else p


@dataclass(frozen=True)
class Excitation:
    amplitude: float
    phase: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.amplitude) and self.amplitude >= 0):
            raise DesignError(f"bad excitation amplitude {self.amplitude!r}")
        if not math.isfinite(self.phase):
            raise DesignError(f"bad excitation phase {self.phase!r}")
        object.__setattr__(self, "phase", _wrap_phase(float(self.phase)))

    @property
    def current(self) -> complex:
        return self.amplitude * complex(math.cos(self.phase),
                                        math.sin(self.phase))


@dataclass(frozen=True)
class ArrayDesign:
    """Geometry plus excitation of an N-element parallel dipole array."""
    frequency: float
    elements: tuple[Dipole, ...]
    excitations: tuple[Excitation, ...]
    constants: PhysicalConstants = field(default=CONSTANTS, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "excitations", tuple(self.excitations))
        if not self.frequency > 0:
            raise DesignError("frequency must be positive")
        if not self.elements:
            raise DesignError("array has no elements")
        if len(self.elements) != len(self.excitations):
            raise DesignError(
                f"{len(self.elements)} elements but "
                f"{len(self.excitations)} excitations")
        x = self.positions
        if np.any(np.diff(x) <= 0):
            raise DesignError("element positions must be strictly increasing")
        for a, b in zip(self.elements, self.elements[1:]):
            if b.position_x - a.position_x <= a.radius + b.radius:
                raise DesignError(
                    f"elements at {a.position_x:g} m and {b.position_x:g} m "
                    "overlap")
        if not any(e.amplitude > 0 for e in self.excitations):
            raise DesignError("all excitation amplitudes are zero")
        k = self.wavenumber
        for e in self.elements:
            if abs(math.sin(k * e.length / 2)) < RESONANCE_GUARD:
                raise DesignError(
                    f"length {e.length:g} m is a multiple of the wavelength")

    @classmethod
    def from_arrays(cls, frequency, positions, lengths, currents,
                    radius=None, constants=CONSTANTS):
        """Build a design from plain sequences.

        ``currents`` are complex feed currents; ``radius`` defaults to
        lambda/200.
        """
        if radius is None:
            radius = constants.wavelength(frequency) / 200
        currents = np.asarray(currents, dtype=complex)
        return cls(
            frequency,
            tuple(Dipole(float(x), float(l), float(radius))
                  for x, l in zip(positions, lengths)),
            tuple(Excitation(float(abs(i)), float(np.angle(i)))
                  for i in currents),
            constants)

    def with_currents(self, currents) -> "ArrayDesign":
        return ArrayDesign.from_arrays(
            self.frequency, self.positions, self.lengths, currents,
            self.elements[0].radius, self.constants)

    @property
    def n(self) -> int:
        return len(self.elements)

    @property
    def wavelength(self) -> float:
        return self.constants.wavelength(self.frequency)

    @property
    def wavenumber(self) -> float:
        return self.constants.wavenumber(self.frequency)

    @property
    def positions(self) -> np.ndarray:
        return np.array([e.position_x for e in self.elements])

    @property
    def lengths(self) -> np.ndarray:
        return np.array([e.length for e in self.elements])

    @property
    def radii(self) -> np.ndarray:
        return np.array([e.radius for e in self.elements])

    @property
    def currents(self) -> np.ndarray:
        return np.array([e.current for e in self.excitations])


@dataclass(frozen=True)
class FarFieldCut:
    """Sampled pattern along one swept angle.

    ``theta`` and ``phi`` are radians, intensity W/sr, the rest dBi.
    """
    theta: np.ndarray
    phi: np.ndarray
    intensity: np.ndarray
    directivity_dbi: np.ndarray
    gain_dbi: np.ndarray
    realized_gain_dbi: np.ndarray


def to_db(x, floor: float | None = None):
    """10*log10 of a power ratio; zero maps to -inf unless ``floor``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = 10 * np.log10(x)
    if floor is not None:
        out = np.maximum(out, floor)
    return out if out.ndim else float(out)


def element_factor(l, k, theta):
    """[cos(kl/2 cos(theta)) - cos(kl/2)] / sin(theta).

    The axial limit at theta in {0, pi} is 0.
    """
    l, theta = np.asarray(l, float), np.asarray(theta, float)
    kh = k * l / 2
    s = np.sin(theta)
    num = np.cos(kh * np.cos(theta)) - np.cos(kh)
    # near the axis the quotient is ~ kh sin(kh) sin(theta)/2
    tiny = np.abs(s) < 1e-7
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(tiny, kh * np.sin(kh) * s / 2, num / np.where(tiny, 1, s))
    return out if out.ndim else float(out)


def element_pattern(l, k, theta):
    """Element factor referred to the feed current, F(theta)/sin(kl/2)."""
    return element_factor(l, k, theta) / np.sin(k * np.asarray(l) / 2)


def array_response(design: ArrayDesign, theta, phi) -> np.ndarray:
    """Phase vector exp(-j k r.r_n); trailing axis indexes the elements."""
    theta = np.asarray(theta, float)[..., None]
    phi = np.asarray(phi, float)[..., None]
    proj = design.positions * np.sin(theta) * np.cos(phi)
    return np.exp(-1j * design.wavenumber * proj)


def field_sum(design: ArrayDesign, theta, phi, currents=None):
    """sum_n F_n(theta) exp(-j k r.r_n) i_n with feed-referred patterns."""
    i = design.currents if currents is None else np.asarray(currents, complex)
    a = array_response(design, theta, phi)
    f = element_pattern(design.lengths, design.wavenumber,
                        np.asarray(theta, float)[..., None])
    return np.sum(a * f * i, axis=-1)


def radiation_intensity(design: ArrayDesign, theta, phi, currents=None):
    """Radiation intensity in W/sr for the design's feed currents."""
    eta = design.constants.eta
    u = eta / (8 * math.pi ** 2) * np.abs(field_sum(design, theta, phi,
                                                    currents)) ** 2
    return u if np.ndim(u) else float(u)


def loss_resistance(l, f, rho, sigma_c=CONSTANTS.sigma_c, mu=CONSTANTS.mu,
                    c=CONSTANTS.c):
    """Ohmic loss resistance of a dipole, referred to its feed current."""
    k = 2 * math.pi * f / c
    l = np.asarray(l, float)
    s = np.sin(k * l / 2)
    if np.any(np.abs(s) < RESONANCE_GUARD):
        raise DesignError("loss resistance is singular at this length")
    if np.isinf(sigma_c):
        return np.zeros_like(l) if l.ndim else 0.0
    r = (1 / (4 * k * rho) * math.sqrt(f * mu / (math.pi * sigma_c))
         * (k * l - np.sin(k * l)) / s ** 2)
    return r if r.ndim else float(r)


def _quadratic(matrix, i) -> float:
    matrix = np.asarray(matrix)
    i = np.asarray(i, complex)
    q = np.vdot(i, matrix @ i)
    scale = np.abs(i) @ np.abs(matrix) @ np.abs(i)
    if abs(q.imag) > 1e-12 * max(scale, 1e-300) + 1e-300:
        raise ValueError("quadratic form is not real")
    return 0.5 * float(q.real)


def input_power(re_z, i) -> float:
    """(1/2) i^H Re{Z} i, Re{Z} including the loss diagonal."""
    re_z = np.asarray(re_z, float)
    if re_z.shape[0] != re_z.shape[1] or len(i) != re_z.shape[0]:
        raise ValueError("shape mismatch")
    if np.max(np.abs(re_z - re_z.T)) > 1e-9 * max(np.max(np.abs(re_z)), 1e-300):
        raise ValueError("Re{Z} is not symmetric")
    return _quadratic(re_z, i)


def radiated_power(re_z_lossless, i) -> float:
    return input_power(re_z_lossless, i)


def loss_power(r_loss, i) -> float:
    i = np.asarray(i, complex)
    return 0.5 * float(np.sum(np.asarray(r_loss, float) * np.abs(i) ** 2))


def _impedance(design):
    from .impedance import impedance_matrix
    return impedance_matrix(design)


def gain(design: ArrayDesign, re_z=None, theta=END_FIRE[0], phi=END_FIRE[1]):
    """Gain 4 pi U / P_in in dBi.

    ``re_z`` is the loss-augmented real impedance matrix; it is built from
    the design when omitted.
    """
    if re_z is None:
        re_z = _impedance(design).re_total
    p_in = input_power(re_z, design.currents)
    if not p_in > 0:
        raise NonPhysicalError(f"input power {p_in:g} W is not positive")
    return to_db(4 * math.pi * radiation_intensity(design, theta, phi) / p_in)


def directivity(design: ArrayDesign, re_z_lossless=None, theta=END_FIRE[0],
                phi=END_FIRE[1]):
    """Directivity 4 pi U / P_rad in dBi."""
    if re_z_lossless is None:
        re_z_lossless = _impedance(design).z.real
    p_rad = radiated_power(re_z_lossless, design.currents)
    if not p_rad > 0:
        raise NonPhysicalError(f"radiated power {p_rad:g} W is not positive")
    return to_db(4 * math.pi * radiation_intensity(design, theta, phi) / p_rad)
