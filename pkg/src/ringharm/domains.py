"""Doubly connected domains, real-affine maps and elementary geometry.

A ring domain is stored in one of a handful of canonical shapes (annulus,
Teichmuller and Grotzsch rings, slit strip, two arcs of a line, polygonal
ring, punctured region) or as the affine image of one of them.  Circular and
straight pieces are kept symbolic; the grid solver receives them as exact
closed sets through :meth:`RingDomain.complement_sets`.

Conventions
-----------
``Omega_minus`` is the bounded complement component and ``Omega_plus`` the
one containing the point at infinity.  Extended reals use ``math.inf``;
``inf`` and ``-inf`` denote the same point of the extended line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import geometry as geo

INF = math.inf


# ---------------------------------------------------------------------------
# affine maps


@dataclass(frozen=True)
class AffineMap:
    """The real-affine map ``z -> a*z + b*conj(z) + c``."""

    a: complex = 1 + 0j
    b: complex = 0j
    c: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        object.__setattr__(self, "c", complex(self.c))
        scale = max(abs(self.a), abs(self.b))
        if not (scale > 0) or abs(self.det) <= 1e-14 * scale * scale:
            raise ValueError("affine map is not invertible: |a| = |b|")

    @property
    def det(self) -> float:
        return abs(self.a) ** 2 - abs(self.b) ** 2

    def __call__(self, z):
        if isinstance(z, (complex, float, int)):
            z = complex(z)
            return self.a * z + self.b * z.conjugate() + self.c
        z = np.asarray(z, dtype=complex)
        return self.a * z + self.b * np.conj(z) + self.c

    def linear(self, v):
        if isinstance(v, (complex, float, int)):
            v = complex(v)
            return self.a * v + self.b * v.conjugate()
        v = np.asarray(v, dtype=complex)
        return self.a * v + self.b * np.conj(v)

    def inverse(self) -> "AffineMap":
        det = self.det
        ia = self.a.conjugate() / det
        ib = -self.b / det
        return AffineMap(ia, ib, -(ia * self.c + ib * self.c.conjugate()))

    def compose(self, other: "AffineMap") -> "AffineMap":
        """Return ``self o other``."""
        a1, b1, c1 = self.a, self.b, self.c
        a2, b2, c2 = other.a, other.b, other.c
        return AffineMap(
            a1 * a2 + b1 * b2.conjugate(),
            a1 * b2 + b1 * a2.conjugate(),
            a1 * c2 + b1 * c2.conjugate() + c1,
        )

    def singular_values(self) -> tuple[float, float]:
        return abs(self.a) + abs(self.b), abs(abs(self.a) - abs(self.b))

    def is_conformal(self, tol: float = 1e-13) -> bool:
        return abs(self.b) <= tol * abs(self.a)

    def is_anticonformal(self, tol: float = 1e-13) -> bool:
        return abs(self.a) <= tol * abs(self.b)

    def is_identity(self, tol: float = 1e-15) -> bool:
        return abs(self.a - 1) <= tol and abs(self.b) <= tol and abs(self.c) <= tol

    @classmethod
    def shear(cls, k: complex) -> "AffineMap":
        """The normalized shear ``z -> z + k*conj(z)``."""
        if abs(k) >= 1:
            raise ValueError("shear parameter must satisfy |k| < 1")
        return cls(1.0, k, 0.0)

    def shear_parameter(self) -> complex:
        """``k`` with ``self = L o (z + k conj z)`` for a C-affine or anti-C-affine ``L``."""
        if self.det > 0:
            return self.b / self.a
        # conj o self is orientation preserving: conj(a) z + conj(b) conj(z)
        return self.a.conjugate() / self.b.conjugate()


IDENTITY = AffineMap()


# ---------------------------------------------------------------------------
# moduli values


METHODS = ("closed-form", "grid-solver", "optimized", "bound-only")


@dataclass(frozen=True)
class ExtendedModulus:
    """A modulus in ``[0, inf]`` with the route that produced it."""

    value: float
    method: str
    abs_error: float | None = None
    note: str = ""

    def __post_init__(self):
        if not (self.value >= 0):
            raise ValueError(f"modulus must be nonnegative, got {self.value}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")
        if self.method in ("grid-solver", "optimized") and self.abs_error is None:
            raise ValueError("numerical moduli must carry an error estimate")

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    @property
    def error(self) -> float:
        return 0.0 if self.abs_error is None else self.abs_error


# ---------------------------------------------------------------------------
# polygons


def as_polygon(points) -> tuple[complex, ...]:
    """Normalize a vertex list (complex numbers or ``[x, y]`` pairs) to a tuple."""
    out = []
    for p in points:
        if isinstance(p, (list, tuple, np.ndarray)) and len(p) == 2:
            out.append(complex(float(p[0]), float(p[1])))
        else:
            out.append(complex(p))
    if len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return tuple(out)


def polygon_area(vertices: Sequence[complex]) -> float:
    v = np.asarray(vertices, dtype=complex)
    x, y = v.real, v.imag
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        v = geo._cross(b - a, c - a)
        scale = abs(b - a) * abs(c - a)
        return 0 if abs(v) <= 1e-14 * scale else (1 if v > 0 else -1)

    def on_seg(a, b, c):
        return min(a.real, b.real) - 1e-15 <= c.real <= max(a.real, b.real) + 1e-15 and \
            min(a.imag, b.imag) - 1e-15 <= c.imag <= max(a.imag, b.imag) + 1e-15

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    return (o1 == 0 and on_seg(p1, p2, q1)) or (o2 == 0 and on_seg(p1, p2, q2)) or \
        (o3 == 0 and on_seg(q1, q2, p1)) or (o4 == 0 and on_seg(q1, q2, p2))


def is_simple_polygon(vertices: Sequence[complex]) -> bool:
    v = list(vertices)
    n = len(v)
    if n < 3 or polygon_area(v) <= 0:
        return False
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]):
                return False
    return True


def polygons_intersect(p: Sequence[complex], q: Sequence[complex]) -> bool:
    n, m = len(p), len(q)
    return any(_segments_cross(p[i], p[(i + 1) % n], q[j], q[(j + 1) % m])
               for i in range(n) for j in range(m))


# ---------------------------------------------------------------------------
# ring domains


class RingDomain:
    """Base class of all ring domain representations."""

    kind = "ring"

    def complement_sets(self) -> tuple[list[geo.ClosedSet], list[geo.ClosedSet]]:
        """Exact closed sets ``(Omega_minus pieces, Omega_plus pieces)``."""
        raise NotImplementedError(f"{self.kind} has no grid representation")

    @property
    def complement_bounded(self) -> bool:
        """True when ``C minus Omega`` is bounded (the plane-minus-compact case)."""
        return False

    @property
    def degenerate(self) -> bool:
        """True when one complement component is a single point."""
        return False

    @property
    def domain_bounded(self) -> bool:
        return False


@dataclass(frozen=True)
class Annulus(RingDomain):
    r: float
    R: float
    center: complex = 0j
    kind = "annulus"

    def __post_init__(self):
        if not (0 < self.r < self.R < INF):
            raise ValueError("annulus needs 0 < r < R < inf")

    @property
    def domain_bounded(self):
        return True

    def complement_sets(self):
        return [geo.Ellipse.disk(self.center, self.r)], [geo.EllipseExterior.of_disk(self.center, self.R)]


@dataclass(frozen=True)
class Teichmuller(RingDomain):
    """``C minus ([-1, 0] u [s, inf))``."""

    s: float
    kind = "teichmuller"

    def __post_init__(self):
        if not (0 < self.s < INF):
            raise ValueError("Teichmuller ring needs s > 0")

    def complement_sets(self):
        return [geo.Segment(-1.0, 0.0)], [geo.Ray(self.s, 1.0)]


@dataclass(frozen=True)
class Grotzsch(RingDomain):
    """``{|z| > 1} minus [s, inf)``."""

    s: float
    kind = "grotzsch"

    def __post_init__(self):
        if not (1 < self.s < INF):
            raise ValueError("Grotzsch ring needs s > 1")

    def complement_sets(self):
        return [geo.Ellipse.disk(0, 1.0)], [geo.Ray(self.s, 1.0)]


@dataclass(frozen=True)
class SlitStrip(RingDomain):
    """``{|Im z| < 1} minus [-s, s]``."""

    s: float
    kind = "slit_strip"

    def __post_init__(self):
        if not (0 < self.s < INF):
            raise ValueError("slit strip needs s > 0")

    def complement_sets(self):
        return [geo.Segment(-self.s, self.s)], [geo.HalfPlane(1j, 1j), geo.HalfPlane(-1j, -1j)]


def _arc_angle(x: float) -> float:
    return math.pi if math.isinf(x) else 2.0 * math.atan(x)


def _on_arc(x: float, arc: tuple[float, float]) -> bool:
    a, b = _arc_angle(arc[0]), _arc_angle(arc[1])
    span = (b - a) % (2 * math.pi)
    return (_arc_angle(x) - a) % (2 * math.pi) <= span + 1e-15


def arc_contains_infinity(arc: tuple[float, float]) -> bool:
    a, b = arc
    return math.isinf(a) or math.isinf(b) or a > b


def arc_pieces(arc: tuple[float, float]) -> list[tuple[float, float]]:
    """Split an arc of the extended line into real intervals (possibly infinite)."""
    a, b = arc
    if math.isinf(a) and math.isinf(b):
        raise ValueError("arc endpoints coincide at infinity")
    if math.isinf(a):
        return [(-INF, b)]
    if math.isinf(b):
        return [(a, INF)]
    if a <= b:
        return [(a, b)]
    return [(a, INF), (-INF, b)]


@dataclass(frozen=True)
class RealSlitRing(RingDomain):
    """Complement of two disjoint closed arcs of an (extended) straight line.

    Each arc ``(p, q)`` runs from ``p`` in the increasing direction to ``q``
    and passes through infinity when ``p > q``.  The line itself is
    ``line_origin + x * line_direction`` for real ``x``; the default is the
    real axis.
    """

    arc1: tuple[float, float]
    arc2: tuple[float, float]
    line_origin: complex = 0j
    line_direction: complex = 1 + 0j
    kind = "real_slit_ring"

    def __post_init__(self):
        arc1 = tuple(float(x) for x in self.arc1)
        arc2 = tuple(float(x) for x in self.arc2)
        object.__setattr__(self, "arc1", arc1)
        object.__setattr__(self, "arc2", arc2)
        object.__setattr__(self, "line_origin", complex(self.line_origin))
        object.__setattr__(self, "line_direction", complex(self.line_direction))
        if self.line_direction == 0:
            raise ValueError("line direction must be nonzero")
        for arc in (arc1, arc2):
            if any(math.isnan(x) for x in arc) or arc[0] == arc[1] or \
                    (math.isinf(arc[0]) and math.isinf(arc[1])):
                raise ValueError(f"degenerate arc {arc}")
        if any(_on_arc(x, arc2) for x in arc1) or any(_on_arc(x, arc1) for x in arc2):
            raise ValueError("complement arcs overlap or share an endpoint")

    def endpoints(self) -> tuple[float, float, float, float]:
        return self.arc1 + self.arc2

    def inner_outer_arcs(self):
        if arc_contains_infinity(self.arc1):
            return self.arc2, self.arc1
        return self.arc1, self.arc2

    def _pieces_to_sets(self, arc):
        o, e = self.line_origin, self.line_direction
        out = []
        for lo, hi in arc_pieces(arc):
            if math.isinf(lo):
                out.append(geo.Ray(o + hi * e, -e))
            elif math.isinf(hi):
                out.append(geo.Ray(o + lo * e, e))
            else:
                out.append(geo.Segment(o + lo * e, o + hi * e))
        return out

    def complement_sets(self):
        inner, outer = self.inner_outer_arcs()
        if not arc_contains_infinity(outer):
            raise ValueError("both arcs are finite; the ring contains infinity and has no planar grid form")
        return self._pieces_to_sets(inner), self._pieces_to_sets(outer)


@dataclass(frozen=True)
class PolygonalRing(RingDomain):
    outer: tuple
    inner: tuple
    kind = "polygonal"

    def __post_init__(self):
        outer, inner = as_polygon(self.outer), as_polygon(self.inner)
        object.__setattr__(self, "outer", outer)
        object.__setattr__(self, "inner", inner)
        if not is_simple_polygon(outer) or not is_simple_polygon(inner):
            raise ValueError("polygons must be simple")
        if polygons_intersect(outer, inner) or \
                not geo.polygon_contains(np.asarray(outer), np.asarray(inner)).all():
            raise ValueError("inner polygon must lie strictly inside the outer polygon")

    @property
    def domain_bounded(self):
        return True

    def complement_sets(self):
        return [geo.Polygon(self.inner)], [geo.PolygonExterior(self.outer)]


@dataclass(frozen=True)
class HalfPlaneRegion:
    """Open half-plane ``{Re((z - point) * conj(normal)) < 0}``; ``normal`` points out of it."""

    point: complex = 0j
    normal: complex = -1j

    def __post_init__(self):
        object.__setattr__(self, "point", complex(self.point))
        n = complex(self.normal)
        if n == 0:
            raise ValueError("normal must be nonzero")
        object.__setattr__(self, "normal", n / abs(n))

    def contains(self, z):
        return ((np.asarray(z, dtype=complex) - self.point) * np.conj(self.normal)).real < 0

    def transformed(self, phi: AffineMap) -> "HalfPlaneRegion":
        h = geo.HalfPlane(self.point, self.normal).transformed(phi)
        return HalfPlaneRegion(h.point, h.normal)


@dataclass(frozen=True)
class PuncturedDomain(RingDomain):
    """A simply connected region (polygon or half-plane) minus an interior point."""

    outer: Union[tuple, HalfPlaneRegion]
    puncture: complex = 0j
    kind = "punctured"

    def __post_init__(self):
        object.__setattr__(self, "puncture", complex(self.puncture))
        if isinstance(self.outer, HalfPlaneRegion):
            if not self.outer.contains(self.puncture):
                raise ValueError("puncture must lie inside the half-plane")
            return
        outer = as_polygon(self.outer)
        object.__setattr__(self, "outer", outer)
        if not is_simple_polygon(outer):
            raise ValueError("outer polygon must be simple")
        v = np.asarray(outer)
        if not geo.polygon_contains(v, self.puncture) or \
                geo.polygon_boundary_distance(v, self.puncture) <= 1e-12 * max(1.0, np.abs(v).max()):
            raise ValueError("puncture must lie strictly inside the outer polygon")

    @property
    def degenerate(self):
        return True

    @property
    def domain_bounded(self):
        return not isinstance(self.outer, HalfPlaneRegion)

    def outer_set(self) -> geo.ClosedSet:
        if isinstance(self.outer, HalfPlaneRegion):
            return geo.HalfPlane(self.outer.point, self.outer.normal)
        return geo.PolygonExterior(self.outer)


@dataclass(frozen=True)
class PlaneMinusCompact(RingDomain):
    """``C minus E`` for a compact polygonal ``E``; its complement is bounded.

    The point at infinity forms the second complement component, so the
    conformal modulus is infinite.
    """

    compact: tuple
    kind = "plane_minus_compact"

    def __post_init__(self):
        compact = as_polygon(self.compact)
        object.__setattr__(self, "compact", compact)
        if not is_simple_polygon(compact):
            raise ValueError("compact set must be a simple polygon")

    @property
    def complement_bounded(self):
        return True

    @property
    def degenerate(self):
        return True


@dataclass(frozen=True)
class AffineImage(RingDomain):
    """``phi(base)`` for a ring ``base`` and an invertible affine ``phi``."""

    base: RingDomain
    phi: AffineMap
    kind = "affine_image"

    def complement_sets(self):
        inner, outer = self.base.complement_sets()
        return [s.transformed(self.phi) for s in inner], [s.transformed(self.phi) for s in outer]

    @property
    def complement_bounded(self):
        return self.base.complement_bounded

    @property
    def degenerate(self):
        return self.base.degenerate

    @property
    def domain_bounded(self):
        return self.base.domain_bounded


def ft_forward(z, t: float):
    """``F_t(r e^{i theta}) = (r + sqrt(r^2 + t^2)) e^{i theta}``."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ValueError("F_t is undefined at 0")
    r = np.abs(z)
    out = (r + np.hypot(r, t)) * (z / r)
    return complex(out) if out.ndim == 0 else out


def ft_inverse(zeta, t: float):
    """``F_t^{-1}(zeta) = (zeta - t^2 / conj(zeta)) / 2``."""
    zeta = np.asarray(zeta, dtype=complex)
    if np.any(np.abs(zeta) <= t):
        raise ValueError("F_t^{-1} needs |zeta| > t")
    out = 0.5 * (zeta - t * t / np.conj(zeta))
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FtImageRing(RingDomain):
    """``F_t(G - p) minus {|zeta| <= t}`` for a punctured domain ``G minus {p}``."""

    base: PuncturedDomain
    t: float
    kind = "ft_image"

    def __post_init__(self):
        if not (self.t > 0):
            raise ValueError("F_t image needs t > 0")

    @property
    def domain_bounded(self):
        return self.base.domain_bounded

    def _outer_contains(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        out = np.zeros(zeta.shape, dtype=bool)
        big = np.abs(zeta) > self.t * (1 + 1e-14)
        z = np.full(zeta.shape, self.base.puncture, dtype=complex)
        z[big] = ft_inverse(zeta[big], self.t) + self.base.puncture
        out[big] = self.base.outer_set().contains(z[big])
        return out

    def _outer_boundary(self, n):
        pts = self.base.outer_set().boundary_points(n, window=10.0 * max(1.0, abs(self.base.puncture)))
        return ft_forward(pts - self.base.puncture, self.t)

    def complement_sets(self):
        outer = geo.MembershipSet(self._outer_contains, self._outer_boundary, bounded=False)
        return [geo.Ellipse.disk(0, self.t)], [outer]


# ---------------------------------------------------------------------------
# operations


def apply_affine(phi: AffineMap, d: RingDomain) -> RingDomain:
    """Image of ``d`` under ``phi``, kept in the most specific representation."""
    if not isinstance(phi, AffineMap):
        raise TypeError("phi must be an AffineMap")
    if isinstance(d, AffineImage):
        return apply_affine(phi.compose(d.phi), d.base)
    if phi.is_identity():
        return d
    if isinstance(d, Annulus):
        if phi.is_conformal() or phi.is_anticonformal():
            scale = abs(phi.a) + abs(phi.b)
            return Annulus(d.r * scale, d.R * scale, phi(d.center))
        return AffineImage(d, phi)
    if isinstance(d, Teichmuller):
        return RealSlitRing((-1.0, 0.0), (d.s, INF), phi(0j), phi.linear(1 + 0j))
    if isinstance(d, RealSlitRing):
        return RealSlitRing(d.arc1, d.arc2, phi(d.line_origin), phi.linear(d.line_direction))
    if isinstance(d, PolygonalRing):
        return PolygonalRing(tuple(phi(np.asarray(d.outer))), tuple(phi(np.asarray(d.inner))))
    if isinstance(d, PuncturedDomain):
        if isinstance(d.outer, HalfPlaneRegion):
            return PuncturedDomain(d.outer.transformed(phi), phi(d.puncture))
        return PuncturedDomain(tuple(phi(np.asarray(d.outer))), phi(d.puncture))
    if isinstance(d, PlaneMinusCompact):
        return PlaneMinusCompact(tuple(phi(np.asarray(d.compact))))
    if isinstance(d, SlitStrip):
        return slit_strip_image(phi, d)
    return AffineImage(d, phi)


def slit_strip_image(phi: AffineMap, d: SlitStrip) -> AffineImage:
    """Write ``phi(SlitStrip(s))`` as a similarity image of another slit strip.

    The strip direction is preserved by ``z -> a z + b conj z`` up to the
    factor ``D = a + b``; rescaling to unit half-width gives a slit strip
    with a new slit half-length ``s'`` followed by a C-affine map.
    """
    D = phi.a + phi.b
    det = phi.det
    half_width = abs(det) / abs(D)
    s_new = d.s * abs(D) ** 2 / abs(det)
    psi = AffineMap(D / abs(D) * half_width, 0j, phi.c)
    return AffineImage(SlitStrip(s_new), psi)


def complement_areas(d: RingDomain) -> tuple[float, float]:
    """``(|Omega_minus|, |Omega|)``; infinite when unbounded."""
    if isinstance(d, Annulus):
        return math.pi * d.r ** 2, math.pi * (d.R ** 2 - d.r ** 2)
    if isinstance(d, Grotzsch):
        return math.pi, INF
    if isinstance(d, (Teichmuller, SlitStrip, RealSlitRing)):
        return 0.0, INF
    if isinstance(d, PolygonalRing):
        a_in = polygon_area(d.inner)
        return a_in, polygon_area(d.outer) - a_in
    if isinstance(d, PuncturedDomain):
        if isinstance(d.outer, HalfPlaneRegion):
            return 0.0, INF
        return 0.0, polygon_area(d.outer)
    if isinstance(d, PlaneMinusCompact):
        return polygon_area(d.compact), INF
    if isinstance(d, AffineImage):
        a_in, a_dom = complement_areas(d.base)
        scale = abs(d.phi.det)
        return a_in * scale, a_dom * scale
    if isinstance(d, FtImageRing):
        if not d.domain_bounded:
            return math.pi * d.t ** 2, INF
        pts = d._outer_boundary(20000)
        return math.pi * d.t ** 2, polygon_area(pts) - math.pi * d.t ** 2
    raise TypeError(f"unsupported domain {d!r}")


@dataclass(frozen=True)
class WidthSeparation:
    width: float
    dsep: float
    applicable: bool = True
    note: str = ""


def convex_width(points) -> float:
    """Minimal distance between two parallel supporting lines of a point set."""
    pts = np.asarray(points, dtype=complex).ravel()
    xy = np.column_stack([pts.real, pts.imag])
    try:
        hull = ConvexHull(xy)
    except (QhullError, ValueError):
        return 0.0
    v = pts[hull.vertices]
    best = INF
    # every minimal strip has one side flush with a hull edge
    for k in range(len(v)):
        p, q = v[k], v[(k + 1) % len(v)]
        e = q - p
        heights = np.abs(((v - p) * np.conj(e)).imag) / abs(e)
        best = min(best, float(heights.max()))
    return best


def _set_distance(points: np.ndarray, sets: Sequence[geo.ClosedSet]) -> float:
    return float(geo.components_distance(sets, points).min())


def _line_gap(arc_a, arc_b) -> float:
    best = INF
    for a0, a1 in arc_pieces(arc_a):
        for b0, b1 in arc_pieces(arc_b):
            best = min(best, max(b0 - a1, a0 - b1, 0.0))
    return best


def width_and_separation(d: RingDomain, samples: int = 4096) -> WidthSeparation:
    """Width of ``Omega_minus`` and the distance from ``Omega_minus`` to ``Omega_plus``.

    A segment (or a point) has width zero; the width bound is then flagged
    inapplicable.
    """
    if isinstance(d, Annulus):
        return WidthSeparation(2 * d.r, d.R - d.r)
    if isinstance(d, Grotzsch):
        return WidthSeparation(2.0, d.s - 1.0)
    if isinstance(d, Teichmuller):
        return WidthSeparation(0.0, d.s, False, "bounded complement component is a segment")
    if isinstance(d, SlitStrip):
        return WidthSeparation(0.0, 1.0, False, "bounded complement component is a segment")
    if isinstance(d, RealSlitRing):
        inner, outer = d.inner_outer_arcs()
        return WidthSeparation(0.0, _line_gap(inner, outer) * abs(d.line_direction), False,
                               "bounded complement component is a segment")
    if isinstance(d, (PuncturedDomain,)):
        dist = float(d.outer_set().distance(d.puncture))
        return WidthSeparation(0.0, dist, False, "bounded complement component is a point")
    if isinstance(d, PlaneMinusCompact):
        return WidthSeparation(convex_width(np.asarray(d.compact)), INF)
    if isinstance(d, PolygonalRing):
        inner, outer = np.asarray(d.inner), np.asarray(d.outer)
        dsep = min(float(geo.polygon_boundary_distance(outer, inner).min()),
                   float(geo.polygon_boundary_distance(inner, outer).min()))
        return WidthSeparation(convex_width(inner), dsep)
    if isinstance(d, AffineImage) and isinstance(d.base, Annulus):
        # an ellipse has width equal to its minor axis
        smin = d.phi.singular_values()[1]
        inner, outer = d.complement_sets()
        pts = inner[0].boundary_points(samples)
        return WidthSeparation(2 * d.base.r * smin, _set_distance(pts, outer))
    inner, outer = d.complement_sets()
    pts = np.concatenate([s.boundary_points(samples) for s in inner])
    w = convex_width(pts)
    dsep = _set_distance(pts, outer)
    if w <= 1e-12 * max(1.0, float(np.abs(pts).max())):
        return WidthSeparation(0.0, dsep, False, "bounded complement component is collinear")
    return WidthSeparation(w, dsep)


# ---------------------------------------------------------------------------
# JSON


def _ext(x) -> float:
    if isinstance(x, str):
        x = x.strip().lower()
        if x in ("inf", "+inf", "infinity"):
            return INF
        if x in ("-inf", "-infinity"):
            return -INF
        raise ValueError(f"bad extended real {x!r}")
    return float(x)


def _ext_out(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _pt(p) -> complex:
    if isinstance(p, dict):
        return complex(float(p["re"]), float(p["im"]))
    if isinstance(p, (list, tuple)):
        return complex(float(p[0]), float(p[1]))
    return complex(p)


def _pt_out(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def affine_from_dict(obj: dict) -> AffineMap:
    return AffineMap(_pt(obj.get("a", [1, 0])), _pt(obj.get("b", [0, 0])), _pt(obj.get("c", [0, 0])))


def affine_to_dict(phi: AffineMap) -> dict:
    return {"a": _pt_out(phi.a), "b": _pt_out(phi.b), "c": _pt_out(phi.c)}


def domain_from_dict(obj: dict) -> RingDomain:
    """Parse the JSON domain schema used by the command line."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValueError("domain object needs a 'type' field")
    t = obj["type"]
    if t == "annulus":
        return Annulus(float(obj["r"]), float(obj["R"]), _pt(obj.get("center", [0, 0])))
    if t == "teichmuller":
        return Teichmuller(float(obj["s"]))
    if t == "grotzsch":
        return Grotzsch(float(obj["s"]))
    if t == "slit_strip":
        return SlitStrip(float(obj["s"]))
    if t == "real_slit_ring":
        return RealSlitRing(
            tuple(_ext(x) for x in obj["arc1"]),
            tuple(_ext(x) for x in obj["arc2"]),
            _pt(obj.get("line_origin", [0, 0])),
            _pt(obj.get("line_direction", [1, 0])),
        )
    if t == "polygonal":
        return PolygonalRing(as_polygon(obj["outer"]), as_polygon(obj["inner"]))
    if t == "punctured":
        outer = obj["outer"]
        if isinstance(outer, str):
            if outer != "upper_halfplane":
                raise ValueError(f"unknown half-plane tag {outer!r}")
            region = HalfPlaneRegion()
        elif isinstance(outer, dict):
            region = HalfPlaneRegion(_pt(outer["point"]), _pt(outer["normal"]))
        else:
            region = as_polygon(outer)
        return PuncturedDomain(region, _pt(obj.get("puncture", [0, 0])))
    if t == "plane_minus_compact":
        if obj.get("complementBounded", True) is not True:
            raise ValueError("plane_minus_compact targets always have bounded complement")
        return PlaneMinusCompact(as_polygon(obj["compact"]))
    if t == "affine_image":
        return AffineImage(domain_from_dict(obj["base"]), affine_from_dict(obj["phi"]))
    if t == "ft_image":
        base = domain_from_dict(obj["base"])
        if not isinstance(base, PuncturedDomain):
            raise ValueError("ft_image base must be a punctured domain")
        return FtImageRing(base, float(obj["t"]))
    raise ValueError(f"unknown domain type {t!r}")


def domain_to_dict(d: RingDomain) -> dict:
    if isinstance(d, Annulus):
        out = {"type": "annulus", "r": d.r, "R": d.R}
        if d.center != 0:
            out["center"] = _pt_out(d.center)
        return out
    if isinstance(d, (Teichmuller, Grotzsch, SlitStrip)):
        return {"type": d.kind, "s": d.s}
    if isinstance(d, RealSlitRing):
        out = {"type": "real_slit_ring", "arc1": [_ext_out(x) for x in d.arc1],
               "arc2": [_ext_out(x) for x in d.arc2]}
        if d.line_origin != 0 or d.line_direction != 1:
            out["line_origin"] = _pt_out(d.line_origin)
            out["line_direction"] = _pt_out(d.line_direction)
        return out
    if isinstance(d, PolygonalRing):
        return {"type": "polygonal", "outer": [_pt_out(z) for z in d.outer],
                "inner": [_pt_out(z) for z in d.inner]}
    if isinstance(d, PuncturedDomain):
        if isinstance(d.outer, HalfPlaneRegion):
            outer = {"point": _pt_out(d.outer.point), "normal": _pt_out(d.outer.normal)}
        else:
            outer = [_pt_out(z) for z in d.outer]
        return {"type": "punctured", "outer": outer, "puncture": _pt_out(d.puncture)}
    if isinstance(d, PlaneMinusCompact):
        return {"type": "plane_minus_compact", "compact": [_pt_out(z) for z in d.compact],
                "complementBounded": True}
    if isinstance(d, AffineImage):
        return {"type": "affine_image", "base": domain_to_dict(d.base), "phi": affine_to_dict(d.phi)}
    if isinstance(d, FtImageRing):
        return {"type": "ft_image", "base": domain_to_dict(d.base), "t": d.t}
    raise TypeError(f"cannot serialize {d!r}")
