"""Green's functions of the disk and of a vertical strip, and the distortion
estimates they imply for harmonic maps of an annulus.

Coincident arguments do not raise: the functions return ``inf`` so that
callers sampling near the diagonal can filter the poles themselves.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class DilatationSample:
    at: complex
    nu: complex

    def __post_init__(self):
        if not abs(self.nu) < 1:
            raise ValueError(f"second dilatation must satisfy |nu| < 1, got {abs(self.nu)}")


def green_disk(z: complex, zeta: complex) -> float:
    """``G_D(z, zeta) = log |(1 - z conj(zeta)) / (z - zeta)|``."""
    z, zeta = complex(z), complex(zeta)
    if abs(z) >= 1 or abs(zeta) >= 1:
        raise ValueError("both points must lie in the open unit disk")
    den = abs(z - zeta)
    if den == 0.0:
        return math.inf
    return math.log(abs(1.0 - z * zeta.conjugate()) / den)


def green_strip(z: complex, zeta: complex, alpha: float) -> float:
    """Green's function of ``{|Re z| < pi / (2 alpha)}``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    z, zeta = complex(z), complex(zeta)
    half = 0.5 * math.pi / alpha
    if abs(z.real) >= half or abs(zeta.real) >= half:
        raise ValueError("both points must lie inside the strip")
    ez = cmath.exp(1j * alpha * z)
    den = abs(ez - cmath.exp(1j * alpha * zeta))
    if den == 0.0:
        return math.inf
    return math.log(abs(ez + cmath.exp(-1j * alpha * zeta.conjugate())) / den)


def _log_coth(x: float) -> float:
    # log coth x = log1p(2 / (e^{2x} - 1)), accurate for large and small x
    if x > 350.0:
        return 2.0 * math.exp(-2.0 * x)
    return math.log1p(2.0 / math.expm1(2.0 * x))


def annulus_green_lower_bound(R: float) -> float:
    """Lower bound ``log coth(pi^2 / (4 log R))`` for the Green's function of
    ``A(1/R, R)`` with both arguments on the unit circle."""
    if not R > 1:
        raise ValueError("R must exceed 1")
    return _log_coth(math.pi ** 2 / (4.0 * math.log(R)))


def schwarz_bound(green_value: float) -> float:
    """``exp(-G)``, the Schwarz-lemma bound on ``|f|`` for ``f(a) = 0``."""
    if green_value < 0:
        raise ValueError("Green's function values are nonnegative")
    return math.exp(-green_value)


def annulus_k(R: float) -> float:
    """``k = tanh(pi^2 / (4 log R))``."""
    if not R > 1:
        raise ValueError("R must exceed 1")
    return math.tanh(math.pi ** 2 / (4.0 * math.log(R)))


def three_circles_bound(R: float, alpha: float) -> float:
    """``k**(1 - alpha)``: bound for ``|f|`` on ``A(R^-alpha, R^alpha)`` when
    ``f`` maps ``A(1/R, R)`` into the disk and vanishes at 1."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    return annulus_k(R) ** (1.0 - alpha)


@dataclass(frozen=True)
class DilatationNormalization:
    """Result of composing ``h`` with ``H = h - kappa conj(h)``.

    ``transform`` is the disk automorphism acting on the second dilatation.
    """
    kappa: complex

    def transform(self, nu):
        k = self.kappa
        return (nu - k) / (1.0 - np.conj(k) * nu)

    def apply(self, h: Callable) -> Callable:
        k = self.kappa
        return lambda z: h(z) - k * np.conj(h(z))

    def describe(self) -> str:
        return f"H = h - ({self.kappa.real:.17g}{self.kappa.imag:+.17g}j) * conj(h)"


def normalize_dilatation(nu_at_a: complex) -> DilatationNormalization:
    nu_at_a = complex(nu_at_a)
    if not abs(nu_at_a) < 1:
        raise ValueError("|nu(a)| must be less than 1")
    return DilatationNormalization(nu_at_a)
