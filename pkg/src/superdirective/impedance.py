"""
Self and mutual impedances of side-by-side parallel dipoles.

The primary route is the induced-EMF method with sinusoidal currents.
The field of a sinusoidal filament is known in closed form, and the
reaction integral against a second sinusoidal current reduces to sums of
``Ci(kw) - j Si(kw)`` terms, so unequal lengths are handled in closed form
as well.  A direct quadrature of the same reaction integral, and a
far-field pattern integration of the real part, are kept as independent
checks.

All impedances are referred to the feed (z = 0) currents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .emcore import (CONSTANTS, RESONANCE_GUARD, ArrayDesign, DesignError,
                     PhysicalConstants, element_pattern, loss_resistance)

__all__ = [
    "sine_integral", "cosine_integral", "self_impedance", "mutual_impedance",
    "mutual_impedance_quadrature", "impedance_matrices", "ImpedanceMatrix",
    "impedance_matrix", "re_z_by_pattern_integration",
    "active_input_impedance",
]

EULER_GAMMA = np.euler_gamma


def sine_integral(x):
    """Si(x) = int_0^x sin(t)/t dt."""
    s, _ = special.sici(np.asarray(x, float))
    return s if s.ndim else float(s)


def cosine_integral(x):
    """Ci(x) = -int_x^inf cos(t)/t dt, defined for x > 0."""
    x = np.asarray(x, float)
    if np.any(x <= 0):
        raise ValueError("cosine integral requires x > 0")
    _, c = special.sici(x)
    return c if c.ndim else float(c)


def _expint(kw):
    # antiderivative of exp(-j k w)/w in w
    s, c = special.sici(kw)
    return c - 1j * s


def _reaction(h1, h2, d, k):
    """Mutual impedance of parallel sinusoidal filaments of half-lengths h1,
    h2, centers aligned, separation d; referred to current maxima.

    Closed form of

        j eta/(4 pi) int_{-h2}^{h2} [e^{-jkR1}/R1 + e^{-jkR2}/R2
                                     - 2 cos(k h1) e^{-jkr}/r]
                                    sin(k (h2 - |z|)) dz

    without the eta/(4 pi) factor.  Arguments broadcast.
    """
    h1, h2, d = np.broadcast_arrays(*(np.asarray(v, float) for v in (h1, h2, d)))
    d2 = d * d
    total = np.zeros(h1.shape, complex)
    sources = ((h1, 1.0), (-h1, 1.0), (0.0 * h1, -2 * np.cos(k * h1)))
    ep, em = np.exp(1j * k * h2) / 2j, -np.exp(-1j * k * h2) / 2j
    for zs, cs in sources:
        for lo, hi, sg in ((0.0 * h2, h2, 1.0), (-h2, 0.0 * h2, -1.0)):
            ua, ub = lo - zs, hi - zs
            ra, rb = np.sqrt(d2 + ua * ua), np.sqrt(d2 + ub * ub)
            # R + u and R - u without cancellation
            pa = np.where(ua >= 0, ra + ua, d2 / (ra - ua))
            pb = np.where(ub >= 0, rb + ub, d2 / (rb - ub))
            ma = np.where(ua <= 0, ra - ua, d2 / (ra + ua))
            mb = np.where(ub <= 0, rb - ub, d2 / (rb + ub))
            # exp(-jkz) part: w = R + u, du/R = dw/w
            i_minus = np.exp(-1j * k * zs) * (_expint(k * pb) - _expint(k * pa))
            # exp(+jkz) part: w = R - u, du/R = -dw/w
            i_plus = -np.exp(1j * k * zs) * (_expint(k * mb) - _expint(k * ma))
            # sin(k(h2 - sg z)) = ep e^{-j k sg z} + em e^{+j k sg z}
            if sg > 0:
                total += cs * (ep * i_minus + em * i_plus)
            else:
                total += cs * (ep * i_plus + em * i_minus)
    return 1j * total


def _self_resistance(l, k):
    # radiation resistance referred to the current maximum, thin-wire limit
    kl = k * np.asarray(l, float)
    si1, ci1 = special.sici(kl)
    si2, ci2 = special.sici(2 * kl)
    return (EULER_GAMMA + np.log(kl) - ci1
            + 0.5 * np.sin(kl) * (si2 - 2 * si1)
            + 0.5 * np.cos(kl) * (EULER_GAMMA + np.log(kl / 2) + ci2 - 2 * ci1)) \
        / (2 * math.pi)


def _feed_factor(l, k):
    s = np.sin(k * np.asarray(l, float) / 2)
    if np.any(np.abs(s) < RESONANCE_GUARD):
        raise DesignError("dipole length is a multiple of the wavelength")
    return s


def self_impedance(l, rho, f, constants: PhysicalConstants = CONSTANTS):
    """Induced-EMF input impedance of an isolated center-fed dipole.

    The resistance is the thin-wire value; the reactance is the reaction
    of the filament with a parallel one at distance ``rho``.
    """
    k = constants.wavenumber(f)
    s = _feed_factor(l, k)
    h = np.asarray(l, float) / 2
    x = _reaction(h, h, rho, k).imag
    z = constants.eta * (_self_resistance(l, k) + 1j * x / (4 * math.pi)) / s ** 2
    return z if np.ndim(z) else complex(z)


def mutual_impedance(l1, l2, d, f, constants: PhysicalConstants = CONSTANTS):
    """Induced-EMF mutual impedance of side-by-side dipoles at spacing d."""
    if np.any(np.asarray(d) <= 0):
        raise DesignError("mutual impedance requires d > 0")
    k = constants.wavenumber(f)
    s = _feed_factor(l1, k) * _feed_factor(l2, k)
    z = constants.eta / (4 * math.pi) * _reaction(
        np.asarray(l1) / 2, np.asarray(l2) / 2, d, k) / s
    return z if np.ndim(z) else complex(z)


def mutual_impedance_quadrature(l1, l2, d, f,
                                constants: PhysicalConstants = CONSTANTS,
                                rtol=1e-10):
    """Same reaction integral as :func:`mutual_impedance`, by adaptive
    quadrature of the near field of dipole 1 along dipole 2."""
    k = constants.wavenumber(f)
    h1, h2 = l1 / 2, l2 / 2

    def ez(z):
        r1 = math.hypot(d, z - h1)
        r2 = math.hypot(d, z + h1)
        r0 = math.hypot(d, z)
        return (np.exp(-1j * k * r1) / r1 + np.exp(-1j * k * r2) / r2
                - 2 * math.cos(k * h1) * np.exp(-1j * k * r0) / r0)

    def integrand(z):
        return ez(z) * math.sin(k * (h2 - abs(z)))

    pts = sorted({0.0} | {p for p in (-h1, h1) if -h2 < p < h2})
    re = integrate.quad(lambda z: integrand(z).real, -h2, h2, points=pts,
                        limit=400, epsabs=0, epsrel=rtol)[0]
    im = integrate.quad(lambda z: integrand(z).imag, -h2, h2, points=pts,
                        limit=400, epsabs=0, epsrel=rtol)[0]
    s = math.sin(k * h1) * math.sin(k * h2)
    return 1j * constants.eta / (4 * math.pi) * complex(re, im) / s


def impedance_matrices(positions, lengths, radius, f,
                       constants: PhysicalConstants = CONSTANTS):
    """Lossless impedance matrices for a batch of arrays.

    ``positions`` and ``lengths`` have shape (..., N); the result has shape
    (..., N, N).
    """
    x = np.asarray(positions, float)
    l = np.asarray(lengths, float)
    k = constants.wavenumber(f)
    n = x.shape[-1]
    s = _feed_factor(l, k)
    d = np.abs(x[..., :, None] - x[..., None, :])
    eye = np.eye(n, dtype=bool)
    rho = np.broadcast_to(np.asarray(radius, float), l.shape)
    # the diagonal reuses the reaction at distance rho for its reactance
    d = np.where(eye, rho[..., :, None] * np.ones(n), d)
    h = l / 2
    z = _reaction(h[..., :, None], h[..., None, :], d, k)
    diag = z[..., eye].imag * 1j + 4 * math.pi * _self_resistance(l, k)
    z[..., eye] = diag
    # the reaction is reciprocal analytically; enforce it to the last bit
    z = 0.5 * (z + np.swapaxes(z, -1, -2))
    return constants.eta / (4 * math.pi) * z / (s[..., :, None] * s[..., None, :])


@dataclass(frozen=True)
class ImpedanceMatrix:
    """Lossless impedance matrix plus the per-element loss resistances."""
    z: np.ndarray
    r_loss: np.ndarray
    frequency: float

    @property
    def n(self) -> int:
        return self.z.shape[0]

    @property
    def total(self) -> np.ndarray:
        return self.z + np.diag(self.r_loss)

    @property
    def re_total(self) -> np.ndarray:
        return self.z.real + np.diag(self.r_loss)

    def uncoupled(self) -> "ImpedanceMatrix":
        return ImpedanceMatrix(np.diag(np.diag(self.z)), self.r_loss,
                               self.frequency)


def impedance_matrix(design: ArrayDesign) -> ImpedanceMatrix:
    c = design.constants
    z = impedance_matrices(design.positions, design.lengths, design.radii,
                           design.frequency, c)
    r_loss = loss_resistance(design.lengths, design.frequency, design.radii,
                             c.sigma_c, c.mu, c.c)
    return ImpedanceMatrix(z, np.atleast_1d(r_loss), design.frequency)


def _pattern_gram(design, n_theta, n_phi):
    u, w = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    theta = np.arccos(u)[:, None]
    g = (element_pattern(design.lengths, design.wavenumber, theta[..., None])
         * np.exp(-1j * design.wavenumber * design.positions
                  * np.sin(theta)[..., None] * np.cos(phi)[None, :, None]))
    weights = (w[:, None] * np.full(n_phi, 2 * math.pi / n_phi))[..., None, None]
    gram = np.sum(weights * g.conj()[..., :, None] * g[..., None, :], axis=(0, 1))
    return design.constants.eta / (4 * math.pi ** 2) * gram


def re_z_by_pattern_integration(design: ArrayDesign, n_theta=128, n_phi=256,
                                tol=1e-4, max_doublings=5) -> np.ndarray:
    """Re{Z'} from the far-field power integral over the sphere.

    Gauss-Legendre in cos(theta) times the trapezoid rule in phi; both
    orders double until no entry moves by more than ``tol`` ohm.
    """
    prev = _pattern_gram(design, n_theta, n_phi).real
    for _ in range(max_doublings):
        n_theta, n_phi = 2 * n_theta, 2 * n_phi
        cur = _pattern_gram(design, n_theta, n_phi).real
        if np.max(np.abs(cur - prev)) < tol:
            return cur
        prev = cur
    raise RuntimeError("pattern integration did not converge")


def active_input_impedance(zm: ImpedanceMatrix, i) -> np.ndarray:
    """Driving-point impedances (Z i)_n / i_n under simultaneous excitation.

    Ports carrying zero current are open circuits and report ``inf``.
    """
    i = np.asarray(i, complex)
    v = zm.total @ i
    out = np.full(len(i), complex(np.inf, 0))
    live = i != 0
    out[live] = v[live] / i[live]
    return out
