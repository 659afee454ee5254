"""Closed planar sets that can be cut exactly by straight lines.

Each complement component of a ring domain is a union of these primitives.
The grid solver only ever asks a primitive where a grid line meets it, so
thin pieces (slits, nearly collapsed ellipses) are seen exactly no matter how
coarse the grid is.

Every primitive answers four questions:

``line_intervals(p0, d, lo, hi, step)``
    closed parameter intervals ``[a, b]`` with ``p0 + t*d`` in the set;
    infinite ends are allowed.  ``lo``/``hi``/``step`` only matter for
    sets known through a membership test.
``contains(z)``
    vectorised membership.
``distance(z)``
    vectorised distance to the set, exact or a lower bound.
``boundary_points(n, window)``
    sample of the boundary, rays clipped to radius ``window``.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

Interval = tuple[float, float]

_EPS = 1e-12


def _cross(x: complex, y: complex) -> float:
    return x.real * y.imag - x.imag * y.real


def _param(z: complex, p0: complex, d: complex) -> float:
    w = z - p0
    return (w.real * d.real + w.imag * d.imag) / (d.real * d.real + d.imag * d.imag)


def merge_intervals(intervals: Sequence[Interval]) -> list[Interval]:
    out: list[list[float]] = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def segment_distance(z: np.ndarray, a: complex, b: complex, ray: bool = False) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    e = b - a
    t = ((z - a) * np.conj(e)).real / (abs(e) ** 2)
    t = np.maximum(t, 0.0) if ray else np.clip(t, 0.0, 1.0)
    return np.abs(z - (a + t * e))


class ClosedSet:
    bounded = True

    def line_intervals(self, p0: complex, d: complex, lo: float, hi: float, step: float) -> list[Interval]:
        raise NotImplementedError

    def contains(self, z):
        raise NotImplementedError

    def distance(self, z):
        raise NotImplementedError

    def boundary_points(self, n: int = 512, window: float = 10.0) -> np.ndarray:
        raise NotImplementedError

    def transformed(self, phi) -> "ClosedSet":
        return AffineSet(self, phi)


class Ellipse(ClosedSet):
    """Image of the closed unit disk under ``u -> a*u + b*conj(u) + c``."""

    def __init__(self, center: complex, a: complex, b: complex = 0j):
        self.center = complex(center)
        self.a = complex(a)
        self.b = complex(b)
        self.det = abs(self.a) ** 2 - abs(self.b) ** 2
        if abs(self.det) < 1e-300:
            raise ValueError("degenerate ellipse")

    @classmethod
    def disk(cls, center: complex, radius: float) -> "Ellipse":
        return cls(center, radius, 0j)

    @property
    def semi_axes(self) -> tuple[float, float]:
        return abs(self.a) + abs(self.b), abs(abs(self.a) - abs(self.b))

    def _pull(self, z):
        v = z - self.center
        return (np.conj(self.a) * v - self.b * np.conj(v)) / self.det

    def _pull_lin(self, d: complex) -> complex:
        return (self.a.conjugate() * d - self.b * d.conjugate()) / self.det

    def _unit_intervals(self, p0, d):
        q0 = complex(self._pull(p0))
        q1 = self._pull_lin(d)
        A = abs(q1) ** 2
        B = 2.0 * (q0.real * q1.real + q0.imag * q1.imag)
        C = abs(q0) ** 2 - 1.0
        disc = B * B - 4.0 * A * C
        if disc < 0.0:
            return None
        s = math.sqrt(disc)
        # stable quadratic roots
        q = -0.5 * (B + math.copysign(s, B)) if B != 0.0 else -0.5 * s
        r1 = q / A
        r2 = C / q if q != 0.0 else -r1
        return (min(r1, r2), max(r1, r2))

    def line_intervals(self, p0, d, lo, hi, step):
        iv = self._unit_intervals(p0, d)
        return [] if iv is None else [iv]

    def contains(self, z):
        return np.abs(self._pull(np.asarray(z, dtype=complex))) <= 1.0 + _EPS

    def distance(self, z):
        z = np.asarray(z, dtype=complex)
        if self.b == 0:
            return np.maximum(np.abs(z - self.center) - abs(self.a), 0.0)
        smin = self.semi_axes[1]
        return smin * np.maximum(np.abs(self._pull(z)) - 1.0, 0.0)

    def boundary_points(self, n=512, window=10.0):
        u = np.exp(2j * np.pi * np.arange(n) / n)
        return self.a * u + self.b * np.conj(u) + self.center

    def transformed(self, phi):
        # phi(a u + b ubar + c)
        return Ellipse(
            phi(self.center),
            phi.a * self.a + phi.b * self.b.conjugate(),
            phi.a * self.b + phi.b * self.a.conjugate(),
        )

    def __repr__(self):
        return f"Ellipse(center={self.center}, a={self.a}, b={self.b})"


class EllipseExterior(ClosedSet):
    """Closed exterior ``{a*u + b*conj(u) + c : |u| >= 1}`` of an ellipse."""

    bounded = False

    def __init__(self, center: complex, a: complex, b: complex = 0j):
        self.inner = Ellipse(center, a, b)

    @classmethod
    def of_disk(cls, center: complex, radius: float) -> "EllipseExterior":
        return cls(center, radius, 0j)

    def line_intervals(self, p0, d, lo, hi, step):
        iv = self.inner._unit_intervals(p0, d)
        if iv is None:
            return [(-math.inf, math.inf)]
        return [(-math.inf, iv[0]), (iv[1], math.inf)]

    def contains(self, z):
        return np.abs(self.inner._pull(np.asarray(z, dtype=complex))) >= 1.0 - _EPS

    def distance(self, z):
        z = np.asarray(z, dtype=complex)
        if self.inner.b == 0:
            return np.maximum(abs(self.inner.a) - np.abs(z - self.inner.center), 0.0)
        smin = self.inner.semi_axes[1]
        return smin * np.maximum(1.0 - np.abs(self.inner._pull(z)), 0.0)

    def boundary_points(self, n=512, window=10.0):
        return self.inner.boundary_points(n)

    def transformed(self, phi):
        e = self.inner.transformed(phi)
        return EllipseExterior(e.center, e.a, e.b)

    def __repr__(self):
        i = self.inner
        return f"EllipseExterior(center={i.center}, a={i.a}, b={i.b})"


class Segment(ClosedSet):
    def __init__(self, a: complex, b: complex):
        self.a, self.b = complex(a), complex(b)

    def line_intervals(self, p0, d, lo, hi, step):
        e = self.b - self.a
        w = self.a - p0
        den = _cross(d, e)
        scale = abs(d) * abs(e)
        if abs(den) <= _EPS * scale:
            if abs(_cross(w, d)) > _EPS * abs(d) * max(1.0, abs(w)):
                return []
            t0, t1 = _param(self.a, p0, d), _param(self.b, p0, d)
            return [(min(t0, t1), max(t0, t1))]
        t = _cross(w, e) / den
        u = _cross(w, d) / den
        if u < -_EPS or u > 1.0 + _EPS:
            return []
        return [(t, t)]

    def contains(self, z):
        return segment_distance(z, self.a, self.b) <= _EPS * max(1.0, abs(self.a), abs(self.b))

    def distance(self, z):
        return segment_distance(z, self.a, self.b)

    def boundary_points(self, n=512, window=10.0):
        return self.a + (self.b - self.a) * np.linspace(0.0, 1.0, n)

    def transformed(self, phi):
        return Segment(phi(self.a), phi(self.b))

    def __repr__(self):
        return f"Segment({self.a}, {self.b})"


class Ray(ClosedSet):
    """Closed ray ``{a + s*direction : s >= 0}``."""

    bounded = False

    def __init__(self, a: complex, direction: complex):
        self.a = complex(a)
        self.direction = complex(direction) / abs(direction)

    def line_intervals(self, p0, d, lo, hi, step):
        e = self.direction
        w = self.a - p0
        den = _cross(d, e)
        if abs(den) <= _EPS * abs(d):
            if abs(_cross(w, d)) > _EPS * abs(d) * max(1.0, abs(w)):
                return []
            t0 = _param(self.a, p0, d)
            forward = (e.real * d.real + e.imag * d.imag) > 0
            return [(t0, math.inf)] if forward else [(-math.inf, t0)]
        t = _cross(w, e) / den
        u = _cross(w, d) / den
        if u < -_EPS:
            return []
        return [(t, t)]

    def contains(self, z):
        return segment_distance(z, self.a, self.a + self.direction, ray=True) <= _EPS * max(1.0, abs(self.a))

    def distance(self, z):
        return segment_distance(z, self.a, self.a + self.direction, ray=True)

    def boundary_points(self, n=512, window=10.0):
        reach = max(window - abs(self.a), 0.0) + window
        return self.a + self.direction * np.linspace(0.0, reach, n)

    def transformed(self, phi):
        return Ray(phi(self.a), phi.linear(self.direction))

    def __repr__(self):
        return f"Ray({self.a}, direction={self.direction})"


class HalfPlane(ClosedSet):
    """Closed half-plane ``{z : Re((z - point) * conj(normal)) >= 0}``."""

    bounded = False

    def __init__(self, point: complex, normal: complex):
        self.point = complex(point)
        self.normal = complex(normal) / abs(normal)

    def _signed(self, z):
        return ((np.asarray(z, dtype=complex) - self.point) * np.conj(self.normal)).real

    def line_intervals(self, p0, d, lo, hi, step):
        s0 = float(self._signed(p0))
        sd = (d * self.normal.conjugate()).real
        if abs(sd) <= _EPS * abs(d):
            return [(-math.inf, math.inf)] if s0 >= -_EPS else []
        t = -s0 / sd
        return [(t, math.inf)] if sd > 0 else [(-math.inf, t)]

    def contains(self, z):
        return self._signed(z) >= -_EPS

    def distance(self, z):
        return np.maximum(-self._signed(z), 0.0)

    def boundary_points(self, n=512, window=10.0):
        tangent = 1j * self.normal
        return self.point + tangent * np.linspace(-2 * window, 2 * window, n)

    def transformed(self, phi):
        tangent = phi.linear(1j * self.normal)
        inward = phi.linear(self.normal)
        normal = -1j * tangent
        if (normal * inward.conjugate()).real < 0:
            normal = -normal
        return HalfPlane(phi(self.point), normal)

    def __repr__(self):
        return f"HalfPlane(point={self.point}, normal={self.normal})"


def polygon_contains(vertices: np.ndarray, z) -> np.ndarray:
    """Even-odd point-in-polygon test; boundary points count as inside."""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    inside = np.zeros(z.shape, dtype=bool)
    v = np.asarray(vertices, dtype=complex)
    n = len(v)
    for k in range(n):
        p, q = v[k], v[(k + 1) % n]
        cond = (p.imag > y) != (q.imag > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = p.real + (y - p.imag) * (q.real - p.real) / (q.imag - p.imag)
        inside ^= cond & (x < xc)
    return inside | (polygon_boundary_distance(v, z) <= _EPS * max(1.0, float(np.max(np.abs(v)))))


def polygon_boundary_distance(vertices, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    v = np.asarray(vertices, dtype=complex)
    best = np.full(z.shape, np.inf)
    for k in range(len(v)):
        best = np.minimum(best, segment_distance(z, v[k], v[(k + 1) % len(v)]))
    return best


def _polygon_open_intervals(v: np.ndarray, p0: complex, d: complex) -> tuple[list[Interval], list[Interval]]:
    """Interior intervals (even-odd) and boundary pieces of a polygon on a line."""
    n = len(v)
    s = [_cross(d, complex(v[k]) - p0) for k in range(n)]
    tol = _EPS * abs(d) * max(1.0, max(abs(complex(w) - p0) for w in v))
    s = [0.0 if abs(x) <= tol else x for x in s]
    crossings = []
    touches: list[Interval] = []
    for k in range(n):
        a, b = complex(v[k]), complex(v[(k + 1) % n])
        sa, sb = s[k], s[(k + 1) % n]
        if (sa > 0) != (sb > 0):
            if sa == 0.0:
                crossings.append(_param(a, p0, d))
            elif sb == 0.0:
                crossings.append(_param(b, p0, d))
            else:
                crossings.append(_param(a + (b - a) * (sa / (sa - sb)), p0, d))
        if sa == 0.0 and sb == 0.0:
            ta, tb = _param(a, p0, d), _param(b, p0, d)
            touches.append((min(ta, tb), max(ta, tb)))
        elif sa == 0.0:
            ta = _param(a, p0, d)
            touches.append((ta, ta))
    crossings.sort()
    inside = [(crossings[i], crossings[i + 1]) for i in range(0, len(crossings) - 1, 2)]
    return inside, touches


class Polygon(ClosedSet):
    """Closed region bounded by a simple polygon."""

    def __init__(self, vertices: Sequence[complex]):
        self.vertices = np.asarray(vertices, dtype=complex)

    def line_intervals(self, p0, d, lo, hi, step):
        inside, touches = _polygon_open_intervals(self.vertices, p0, d)
        return merge_intervals(inside + touches)

    def contains(self, z):
        return polygon_contains(self.vertices, z)

    def distance(self, z):
        z = np.asarray(z, dtype=complex)
        dist = polygon_boundary_distance(self.vertices, z)
        return np.where(polygon_contains(self.vertices, z), 0.0, dist)

    def boundary_points(self, n=512, window=10.0):
        return _polygon_samples(self.vertices, n)

    def transformed(self, phi):
        return Polygon(phi(self.vertices))

    def __repr__(self):
        return f"Polygon({len(self.vertices)} vertices)"


class PolygonExterior(ClosedSet):
    """Closed exterior of a simple polygon (boundary included)."""

    bounded = False

    def __init__(self, vertices: Sequence[complex]):
        self.vertices = np.asarray(vertices, dtype=complex)

    def line_intervals(self, p0, d, lo, hi, step):
        inside, _ = _polygon_open_intervals(self.vertices, p0, d)
        out = []
        start = -math.inf
        for a, b in merge_intervals(inside):
            out.append((start, a))
            start = b
        out.append((start, math.inf))
        return out

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        on_edge = polygon_boundary_distance(self.vertices, z) <= _EPS * max(1.0, float(np.max(np.abs(self.vertices))))
        return ~polygon_contains(self.vertices, z) | on_edge

    def distance(self, z):
        z = np.asarray(z, dtype=complex)
        dist = polygon_boundary_distance(self.vertices, z)
        return np.where(polygon_contains(self.vertices, z), dist, 0.0)

    def boundary_points(self, n=512, window=10.0):
        return _polygon_samples(self.vertices, n)

    def transformed(self, phi):
        return PolygonExterior(phi(self.vertices))

    def __repr__(self):
        return f"PolygonExterior({len(self.vertices)} vertices)"


def _polygon_samples(v: np.ndarray, n: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    closed = np.append(v, v[0])
    lengths = np.abs(np.diff(closed))
    per_edge = np.maximum(2, np.round(n * lengths / lengths.sum()).astype(int))
    pieces = [closed[k] + (closed[k + 1] - closed[k]) * np.linspace(0, 1, m, endpoint=False)
              for k, m in enumerate(per_edge)]
    return np.concatenate(pieces)


class AffineSet(ClosedSet):
    """Image ``phi(base)`` of a closed set; lines are pulled back through ``phi``."""

    def __init__(self, base: ClosedSet, phi):
        self.base = base
        self.phi = phi
        self.inv = phi.inverse()
        self.bounded = base.bounded

    def line_intervals(self, p0, d, lo, hi, step):
        # an affine map keeps the line parameter, but rescales arc length
        d_back = self.inv.linear(d)
        return self.base.line_intervals(self.inv(p0), d_back, lo, hi, step * abs(d_back) / abs(d))

    def contains(self, z):
        return self.base.contains(self.inv(np.asarray(z, dtype=complex)))

    def distance(self, z):
        return self.phi.singular_values()[1] * self.base.distance(self.inv(np.asarray(z, dtype=complex)))

    def boundary_points(self, n=512, window=10.0):
        return self.phi(self.base.boundary_points(n, window / self.phi.singular_values()[1]))

    def __repr__(self):
        return f"AffineSet({self.base!r}, {self.phi!r})"


class MembershipSet(ClosedSet):
    """A set known only through a membership test and a boundary sampler.

    Line intersections are found by sampling at a quarter of the requested
    step and bisecting every change of membership; adequate for sets whose
    features are wide compared with the grid.
    """

    def __init__(self, contains: Callable, boundary: Callable, bounded: bool = True):
        self._contains = contains
        self._boundary = boundary
        self.bounded = bounded

    def contains(self, z):
        return np.asarray(self._contains(np.asarray(z, dtype=complex)), dtype=bool)

    def line_intervals(self, p0, d, lo, hi, step):
        n = max(int(math.ceil((hi - lo) / (0.25 * step))) + 1, 3)
        t = np.linspace(lo, hi, n)
        inside = self.contains(p0 + t * d)
        if not inside.any():
            return []
        change = np.nonzero(inside[1:] != inside[:-1])[0]
        a, b = t[change].copy(), t[change + 1].copy()
        ina = inside[change]
        for _ in range(52):
            mid = 0.5 * (a + b)
            m_in = self.contains(p0 + mid * d)
            move_a = m_in == ina
            a = np.where(move_a, mid, a)
            b = np.where(move_a, b, mid)
        # inside side of each transition, closed toward the set
        edges = np.where(ina, a, b)
        out = []
        start = -math.inf if inside[0] else None
        for e, entering in zip(edges, ~ina):
            if entering:
                start = e
            else:
                out.append((start, e))
                start = None
        if start is not None:
            out.append((start, math.inf))
        return out

    def distance(self, z):
        z = np.asarray(z, dtype=complex)
        pts = self._boundary(4096)
        dist = np.abs(z.reshape(-1, 1) - pts.reshape(1, -1)).min(axis=1).reshape(z.shape)
        return np.where(self.contains(z), 0.0, dist)

    def boundary_points(self, n=512, window=10.0):
        return self._boundary(n)


def components_distance(sets: Sequence[ClosedSet], z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    out = np.full(z.shape, np.inf)
    for s in sets:
        out = np.minimum(out, s.distance(z))
    return out


def components_contains(sets: Sequence[ClosedSet], z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=bool)
    for s in sets:
        out |= s.contains(z)
    return out
