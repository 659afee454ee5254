"""Closed-form moduli of canonical rings and the elementary modulus bounds.

Complete elliptic integrals are evaluated with the arithmetic-geometric mean;
``grotzsch_mu`` is written directly as a ratio of two AGMs, which keeps full
relative accuracy up to the ends of ``(0, 1)`` without forming
``1 - r**2``.
"""

from __future__ import annotations

import math

from .domains import (
    INF,
    AffineImage,
    Annulus,
    ExtendedModulus,
    FtImageRing,
    Grotzsch,
    PlaneMinusCompact,
    PolygonalRing,
    PuncturedDomain,
    RealSlitRing,
    RingDomain,
    SlitStrip,
    Teichmuller,
    complement_areas,
    width_and_separation,
)

_DIVERGENCE_GAP = 1e-12


def agm(x: float, y: float) -> float:
    """Arithmetic-geometric mean of two positive numbers."""
    if x <= 0 or y <= 0:
        raise ValueError("agm needs positive arguments")
    for _ in range(64):
        if abs(x - y) <= 1e-16 * x:
            break
        x, y = 0.5 * (x + y), math.sqrt(x * y)
    return 0.5 * (x + y)


def complete_elliptic_K(m: float) -> float:
    """``K(m)`` with parameter ``m = k**2``.

    Returns ``inf`` for ``1 - 1e-12 < m < 1`` where the logarithmic blow-up
    makes the value meaningless in double precision.
    """
    if not (0.0 <= m < 1.0):
        raise ValueError("complete_elliptic_K needs 0 <= m < 1")
    if m > 1.0 - _DIVERGENCE_GAP:
        return INF
    return math.pi / (2.0 * agm(1.0, math.sqrt(1.0 - m)))


def grotzsch_mu(r: float) -> float:
    """Modulus of the Grotzsch ring ``D minus [0, r]``.

    ``mu(r) = (pi/2) K(1 - r^2) / K(r^2)``, evaluated as
    ``(pi/2) AGM(1, r') / AGM(1, r)`` with ``r' = sqrt(1 - r^2)``.
    """
    if not (0.0 < r < 1.0):
        raise ValueError("grotzsch_mu needs 0 < r < 1")
    if r < 1e-8:
        return math.log(4.0 / r)
    rp = math.sqrt((1.0 - r) * (1.0 + r))
    return 0.5 * math.pi * agm(1.0, rp) / agm(1.0, r)


def mod_teichmuller(s: float) -> float:
    """``Mod T(s) = 2 mu(1/sqrt(1+s))``."""
    if s <= 0:
        raise ValueError("Teichmuller parameter must be positive")
    if math.isinf(s):
        return INF
    return 2.0 * grotzsch_mu(1.0 / math.sqrt(1.0 + s))


def mod_grotzsch(s: float) -> float:
    """``Mod G(s) = mu(1/s)``."""
    if s <= 1:
        raise ValueError("Grotzsch parameter must exceed 1")
    return grotzsch_mu(1.0 / s)


def mod_slit_strip(s: float) -> float:
    """Modulus of ``{|Im z| < 1} minus [-s, s]``.

    ``exp(pi z / 2)`` maps the upper half of the strip onto the right
    half-plane; after reflection the ring becomes the complement of
    ``[-e^{pi s/2}, -e^{-pi s/2}]`` and ``[e^{-pi s/2}, e^{pi s/2}]``, whose
    cross-ratio gives ``mu(tanh(pi s / 2))``.
    """
    if s <= 0:
        raise ValueError("slit strip parameter must be positive")
    x = 0.5 * math.pi * s
    if x < 1.0:
        return grotzsch_mu(math.tanh(x))
    # mu(r) mu(r') = pi^2/4 with r' = sech(x) avoids rounding tanh(x) to 1
    if x > 30.0:
        # sech(x) ~ 2 e^{-x} and mu(r') ~ log(4/r') = x + log 2
        return 0.25 * math.pi ** 2 / (x + math.log(2.0))
    return 0.25 * math.pi ** 2 / grotzsch_mu(1.0 / math.cosh(x))


def _cross_ratio(a: float, b: float, c: float, d: float) -> float:
    """``(c-a)(d-b) / ((c-b)(d-a))`` with infinite endpoints cancelled."""
    if math.isinf(a):
        return (d - b) / (c - b)
    if math.isinf(b):
        return (c - a) / (d - a)
    if math.isinf(c):
        return (d - b) / (d - a)
    if math.isinf(d):
        return (c - a) / (c - b)
    return (c - a) * (d - b) / ((c - b) * (d - a))


def teichmuller_parameter(d: RealSlitRing) -> float:
    """``s`` such that ``d`` is Mobius equivalent to ``T(s)``.

    Endpoints in cyclic order ``(a, b, c, d)`` correspond to
    ``(-1, 0, s, inf)``, whose cross-ratio is ``(s + 1)/s``.
    """
    if not isinstance(d, RealSlitRing):
        raise TypeError("teichmuller_parameter needs a RealSlitRing")
    cr = _cross_ratio(*d.endpoints())
    if not (cr > 1.0):
        raise ValueError(f"arcs are not in admissible position (cross-ratio {cr})")
    return 1.0 / (cr - 1.0)


def conformal_modulus_closed_form(d: RingDomain) -> ExtendedModulus:
    """Exact modulus of canonical rings; polygonal rings are rejected."""
    if isinstance(d, Annulus):
        return ExtendedModulus(math.log(d.R / d.r), "closed-form")
    if isinstance(d, Grotzsch):
        return ExtendedModulus(mod_grotzsch(d.s), "closed-form")
    if isinstance(d, Teichmuller):
        return ExtendedModulus(mod_teichmuller(d.s), "closed-form")
    if isinstance(d, RealSlitRing):
        return ExtendedModulus(mod_teichmuller(teichmuller_parameter(d)), "closed-form")
    if isinstance(d, SlitStrip):
        return ExtendedModulus(mod_slit_strip(d.s), "closed-form")
    if isinstance(d, (PuncturedDomain, PlaneMinusCompact)) or d.degenerate:
        return ExtendedModulus(INF, "closed-form", note="degenerate ring")
    if isinstance(d, AffineImage) and (d.phi.is_conformal() or d.phi.is_anticonformal()):
        return conformal_modulus_closed_form(d.base)
    if isinstance(d, (PolygonalRing, AffineImage, FtImageRing)):
        raise ValueError(f"no closed form for {d.kind}; use the capacity solver")
    raise TypeError(f"unsupported domain {d!r}")


def has_closed_form(d: RingDomain) -> bool:
    try:
        conformal_modulus_closed_form(d)
    except ValueError:
        return False
    return True


def carleman_modulus(d: RingDomain) -> ExtendedModulus:
    """``(1/2) log(|Omega_plus^c| / |Omega_minus|)`` with the infinite conventions."""
    a_in, a_dom = complement_areas(d)
    if math.isinf(a_dom) or a_in == 0.0:
        return ExtendedModulus(INF, "closed-form")
    return ExtendedModulus(0.5 * math.log((a_dom + a_in) / a_in), "closed-form")


def width_bound(d: RingDomain) -> ExtendedModulus:
    """Upper bound ``Mod T(dsep / w)`` for the affine modulus.

    When the bounded complement component is collinear the width vanishes
    and the bound is void; the exact affine modulus is then known (the ring
    is an affine image of a Teichmuller-type ring, or degenerate) and is
    returned with a note.
    """
    ws = width_and_separation(d)
    if not ws.applicable:
        if d.degenerate:
            return ExtendedModulus(INF, "bound-only", note="inapplicable: " + ws.note)
        if isinstance(d, (Teichmuller, RealSlitRing)):
            value = conformal_modulus_closed_form(d).value
            return ExtendedModulus(value, "bound-only", note="width zero; affine modulus is exact")
        return ExtendedModulus(INF, "bound-only", note="inapplicable: " + ws.note)
    if math.isinf(ws.dsep):
        return ExtendedModulus(INF, "bound-only")
    return ExtendedModulus(mod_teichmuller(ws.dsep / ws.width), "bound-only")
