"""
Port-level quantities: Z/S conversion, active reflection coefficients,
efficiencies and realized gain.

Ports are referenced to a real impedance ``z0``.  Under simultaneous
excitation the incident waves are the ones that produce the prescribed
feed currents, ``a = (Z + z0) i / (2 sqrt(z0))``, so that the active
reflection at port n is ``(Z_in,n - z0) / (Z_in,n + z0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .emcore import (CONSTANTS, END_FIRE, ArrayDesign, FarFieldCut,
                     NonPhysicalError, element_pattern, loss_resistance, input_power, radiation_intensity,
                     radiated_power, to_db)
from .impedance import ImpedanceMatrix, impedance_matrices, impedance_matrix

__all__ = [
    "Z0", "ScatteringMatrix", "SingularNetworkError", "EfficiencyReport",
    "z_to_s", "s_to_z", "incident_waves", "active_reflection",
    "mismatch_efficiency", "total_efficiency", "realized_gain",
    "max_directivity_excitation", "azimuth_cut", "endfire_metrics",
]

Z0 = 50.0


class SingularNetworkError(ValueError):
    pass


@dataclass(frozen=True)
class ScatteringMatrix:
    s: np.ndarray
    z0: float = Z0


@dataclass(frozen=True)
class EfficiencyReport:
    radiation_efficiency: float
    mismatch_efficiency: float
    total_efficiency: float
    active_reflections: np.ndarray
    mismatch_efficiency_raw: float


def _check_z0(z0):
    if not (np.isreal(z0) and z0 > 0):
        raise ValueError("reference impedance must be real and positive")


def z_to_s(z, z0: float = Z0) -> ScatteringMatrix:
    """S = (Z - z0 I)(Z + z0 I)^-1."""
    _check_z0(z0)
    z = np.atleast_2d(np.asarray(z, complex))
    eye = np.eye(z.shape[0])
    den = z + z0 * eye
    if np.linalg.cond(den) > 1e13:
        raise SingularNetworkError("Z + z0 I is singular")
    # (Z - z0)(Z + z0)^-1 == solve from the right
    s = np.linalg.solve(den.T, (z - z0 * eye).T).T
    return ScatteringMatrix(s, float(z0))


def s_to_z(sm: ScatteringMatrix) -> np.ndarray:
    """Z = z0 (I + S)(I - S)^-1."""
    s = np.asarray(sm.s, complex)
    eye = np.eye(s.shape[0])
    den = eye - s
    if np.linalg.cond(den) > 1e13:
        raise SingularNetworkError("I - S is singular")
    return sm.z0 * np.linalg.solve(den.T, (eye + s).T).T


def incident_waves(z, i, z0: float = Z0) -> np.ndarray:
    """Incident power waves that drive the feed currents ``i``."""
    z = np.asarray(z, complex)
    i = np.asarray(i, complex)
    return (z @ i + z0 * i) / (2 * math.sqrt(z0))


def active_reflection(sm: ScatteringMatrix, a) -> np.ndarray:
    """Combined reflection (S a)_n / a_n of each port.

    Ports with zero excitation are undefined and report NaN.
    """
    a = np.asarray(a, complex)
    b = np.asarray(sm.s) @ a
    out = np.full(len(a), complex(np.nan, np.nan))
    live = a != 0
    out[live] = b[live] / a[live]
    return out


def mismatch_efficiency(gamma, a, clamp: bool = True) -> float:
    """1 - sum |gamma_n|^2 w_n with incident-power weights from ``a``.

    The raw value goes negative when strongly coupled ports reflect more
    than they receive; ``clamp`` limits the result to [0, 1].
    """
    gamma = np.asarray(gamma, complex)
    p = np.abs(np.asarray(a, complex)) ** 2
    if gamma.shape != p.shape:
        raise ValueError("length mismatch")
    w = p / p.sum()
    refl = np.where(w > 0, np.abs(np.nan_to_num(gamma)) ** 2 * w, 0.0)
    eff = 1.0 - float(np.sum(refl))
    return min(max(eff, 0.0), 1.0) if clamp else eff


def _efficiencies(zm: ImpedanceMatrix, i, z0):
    p_rad = radiated_power(zm.z.real, i)
    p_in = input_power(zm.re_total, i)
    if not (p_rad > 0 and p_in > 0):
        raise NonPhysicalError("non-positive radiated or input power")
    a = incident_waves(zm.total, i, z0)
    gamma = active_reflection(z_to_s(zm.total, z0), a)
    raw = mismatch_efficiency(gamma, a, clamp=False)
    return p_rad, p_in, gamma, raw


def total_efficiency(design: ArrayDesign, z0: float = Z0,
                     impedance: ImpedanceMatrix | None = None) -> EfficiencyReport:
    zm = impedance_matrix(design) if impedance is None else impedance
    p_rad, p_in, gamma, raw = _efficiencies(zm, design.currents, z0)
    rad = p_rad / p_in
    mis = min(max(raw, 0.0), 1.0)
    return EfficiencyReport(rad, mis, rad * mis, gamma, raw)


def realized_gain(design: ArrayDesign, theta=END_FIRE[0], phi=END_FIRE[1],
                  z0: float = Z0, impedance: ImpedanceMatrix | None = None):
    """Realized gain in dBi: gain times the clamped mismatch efficiency."""
    zm = impedance_matrix(design) if impedance is None else impedance
    _, p_in, _, raw = _efficiencies(zm, design.currents, z0)
    u = radiation_intensity(design, theta, phi)
    return to_db(4 * math.pi * u / p_in * min(max(raw, 0.0), 1.0))


def max_directivity_excitation(re_z_lossless, a) -> np.ndarray:
    """Currents maximizing |a^T i|^2 / (i^H R i): i ~ R^-1 conj(a).

    ``a`` is the steering vector toward the target direction, element
    patterns included.  Normalized to unit peak amplitude.
    """
    r = np.asarray(re_z_lossless, float)
    if np.linalg.cond(r) > 1e12:
        raise SingularNetworkError("Re{Z'} is numerically singular")
    i = np.linalg.solve(r, np.conj(np.asarray(a, complex)))
    return i / np.max(np.abs(i))


def azimuth_cut(design: ArrayDesign, step_deg: float = 0.5,
                theta: float = math.pi / 2, z0: float = Z0) -> FarFieldCut:
    """Pattern over phi in [0, 360) deg at fixed theta."""
    zm = impedance_matrix(design)
    i = design.currents
    p_rad, p_in, _, raw = _efficiencies(zm, i, z0)
    phi = np.deg2rad(np.arange(0.0, 360.0, step_deg))
    th = np.full_like(phi, theta)
    u = radiation_intensity(design, th, phi)
    d = 4 * math.pi * u / p_rad
    g = 4 * math.pi * u / p_in
    return FarFieldCut(th, phi, u, to_db(d), to_db(g),
                       to_db(g * min(max(raw, 0.0), 1.0)))


def endfire_metrics(positions, lengths, currents, radius, frequency,
                    z0: float = Z0, constants=None, coupled: bool = True):
    """Batched end-fire gain, mismatch and realized gain.

    Works on arrays of shape (P, N) and goes through the wave quantities
    directly (no S-matrix inversion).  Returns a dict of (P,) arrays with
    ``gain``, ``mismatch_raw``, ``realized`` (linear) and ``p_in``.
    """
    c = CONSTANTS if constants is None else constants
    x = np.atleast_2d(positions)
    l = np.atleast_2d(lengths)
    i = np.atleast_2d(np.asarray(currents, complex))
    k = c.wavenumber(frequency)
    z = impedance_matrices(x, l, radius, frequency, c)
    if not coupled:
        z = z * np.eye(x.shape[-1])
    r_loss = loss_resistance(l, frequency, radius, c.sigma_c, c.mu, c.c)
    zt = z + r_loss[..., None] * np.eye(x.shape[-1])
    v = np.einsum("pmn,pn->pm", zt, i)
    p_in = 0.5 * np.einsum("pn,pn->p", i.conj(), v).real
    a = (v + z0 * i) / (2 * math.sqrt(z0))
    b = (v - z0 * i) / (2 * math.sqrt(z0))
    mis = 1.0 - np.sum(np.abs(b) ** 2, -1) / np.sum(np.abs(a) ** 2, -1)
    f = element_pattern(l, k, math.pi / 2)
    # end-fire: theta = pi/2, phi = 0
    e = np.sum(f * np.exp(-1j * k * x) * i, axis=-1)
    u = c.eta / (8 * math.pi ** 2) * np.abs(e) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        g = 4 * math.pi * u / p_in
    return {"gain": g, "mismatch_raw": mis, "p_in": p_in,
            "realized": g * np.clip(mis, 0.0, 1.0)}
