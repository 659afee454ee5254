"""Numerical checks for planar maps: harmonicity, injectivity, boundary
correspondence, dilatation bounds on annuli, and Fourier tests for circle
homeomorphisms.

Derivatives are central differences with step ``min(1e-4, dist / 10)``,
where ``dist`` is the distance to the boundary.  Injectivity is sampled, not
certified: a zero count means no violation was found at the given samples.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from . import geometry as geo
from .domains import Annulus, RingDomain
from .greens import normalize_dilatation, three_circles_bound

TINY = 1e-300
MIN_DIST = 1e-2


# ---------------------------------------------------------------------------
# sampling

def _window(d: RingDomain) -> tuple[complex, float, float]:
    """Sampling region: bounding box for bounded domains, a disk otherwise.

    Returns ``(center, half_size, scale)``.
    """
    inner, outer = d.complement_sets()
    pin = np.concatenate([s.boundary_points(256) for s in inner])
    c = complex(np.mean(pin))
    r_in = float(np.max(np.abs(pin - c)))
    if d.domain_bounded:
        pout = np.concatenate([s.boundary_points(512) for s in outer])
        half = float(np.max(np.abs(pout - c)))
        return c, half, half
    window = max(10.0 * r_in, 1.0)
    pout = np.concatenate([s.boundary_points(512, window=window) for s in outer])
    dsep = float(np.min(np.abs(pout[:, None] - pin[None, :]))) if pout.size else r_in
    return c, 2.0 * (r_in + dsep), r_in + dsep


def sample_domain(d: RingDomain, n: int, rng: np.random.Generator, min_dist: float = MIN_DIST,
                  max_tries: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """``n`` interior points of ``d`` at relative distance ``min_dist`` or more
    from the boundary, and their boundary distances."""
    c, half, scale = _window(d)
    inner, outer = d.complement_sets()
    sets = inner + outer
    pts, dists = [], []
    got = 0
    for _ in range(max_tries):
        z = c + half * (rng.uniform(-1, 1, 4 * n) + 1j * rng.uniform(-1, 1, 4 * n))
        z = z[~geo.components_contains(sets, z)]
        if z.size == 0:
            continue
        dist = geo.components_distance(sets, z)
        keep = dist >= min_dist * scale
        pts.append(z[keep])
        dists.append(dist[keep])
        got += int(keep.sum())
        if got >= n:
            break
    if got < n:
        raise ValueError(f"could only place {got} of {n} samples away from the boundary")
    return np.concatenate(pts)[:n], np.concatenate(dists)[:n]


def _steps(dist: np.ndarray) -> np.ndarray:
    return np.minimum(1e-4, dist / 10.0)


def _partials(f: Callable, z: np.ndarray, h: np.ndarray):
    fx = (f(z + h) - f(z - h)) / (2 * h)
    fy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
    return np.asarray(fx, dtype=complex), np.asarray(fy, dtype=complex)


def wirtinger(f: Callable, z, h):
    """``(f_z, f_zbar)`` by central differences."""
    z = np.asarray(z, dtype=complex)
    fx, fy = _partials(f, z, np.asarray(h, dtype=float))
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


# ---------------------------------------------------------------------------
# harmonicity and injectivity

def _laplacian_ratio(f: Callable, z: np.ndarray, h: np.ndarray) -> np.ndarray:
    f0 = np.asarray(f(z), dtype=complex)
    lap = (f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h) - 4 * f0) / h ** 2
    fx, fy = _partials(f, z, h)
    gu = np.hypot(fx.real, fy.real)
    gv = np.hypot(fx.imag, fy.imag)
    return np.maximum(np.abs(lap.real) / (gu + TINY), np.abs(lap.imag) / (gv + TINY))


def check_harmonic(f: Callable, domain: RingDomain, samples: int = 200, step: float | None = None,
                   seed: int = 0, points=None) -> float:
    """Largest relative 5-point Laplacian of either coordinate of ``f``."""
    rng = np.random.default_rng(seed)
    if points is None:
        z, dist = sample_domain(domain, samples, rng)
    else:
        z = np.asarray(points, dtype=complex)
        inner, outer = domain.complement_sets()
        dist = geo.components_distance(inner + outer, z)
        if np.any(dist <= 0):
            raise ValueError("sample points must lie inside the domain")
    h = _steps(dist) if step is None else np.minimum(step, dist / 10.0)
    return float(np.max(_laplacian_ratio(f, z, h)))


@dataclass
class InjectivityResult:
    collisions: int
    jacobian_flips: int
    samples: int

    @property
    def count(self) -> int:
        return self.collisions + self.jacobian_flips


def injectivity(f: Callable, domain: RingDomain, samples: int = 500, seed: int = 0,
                neighbours: int = 6, slack: float = 8.0) -> InjectivityResult:
    """Sampled injectivity test.

    Near neighbours in the image should come from nearby sources: a pair is a
    collision when its source separation exceeds ``slack`` times the local
    inverse-Jacobian prediction.  The prediction is trusted only while it stays
    within half the distance to the boundary, where the linearization holds.
    The Jacobian must keep one sign.
    """
    rng = np.random.default_rng(seed)
    z, dist = sample_domain(domain, samples, rng)
    w = np.asarray(f(z), dtype=complex)
    h = _steps(dist)
    fx, fy = _partials(f, z, h)
    jac = fx.real * fy.imag - fy.real * fx.imag
    sign = np.sign(np.sum(np.sign(jac))) or 1.0
    flips = int(np.sum(np.sign(jac) != sign))

    tree = cKDTree(np.column_stack([w.real, w.imag]))
    k = min(neighbours + 1, len(z))
    _, idx = tree.query(np.column_stack([w.real, w.imag]), k=k)
    src_tree = cKDTree(np.column_stack([z.real, z.imag]))
    spacing = float(np.median(src_tree.query(np.column_stack([z.real, z.imag]), k=2)[0][:, 1]))
    collisions = set()
    for i in range(len(z)):
        a, b, c, dd = fx[i].real, fy[i].real, fx[i].imag, fy[i].imag
        det = a * dd - b * c
        for j in idx[i, 1:]:
            dz = abs(z[j] - z[i])
            if dz <= 4.0 * spacing:
                continue
            dw = w[j] - w[i]
            if det == 0:
                pred = math.inf
            else:
                px = (dd * dw.real - b * dw.imag) / det
                py = (-c * dw.real + a * dw.imag) / det
                pred = math.hypot(px, py)
            if pred > 0.5 * dist[i]:
                continue
            if dz > slack * pred:
                collisions.add((min(i, j), max(i, j)))
    return InjectivityResult(len(collisions), flips, len(z))


def check_injective(f: Callable, domain: RingDomain, samples: int = 500, seed: int = 0) -> int:
    """Number of injectivity violations found at ``samples`` points (0 = pass)."""
    return injectivity(f, domain, samples, seed).count


# ---------------------------------------------------------------------------
# boundary correspondence and degree

def boundary_hausdorff(f: Callable, source: RingDomain, target: RingDomain, n: int = 256) -> float:
    """Largest distance from mapped source-boundary samples to the target boundary.

    Images in the target domain use the exact distance to the complement.
    Images inside a complement component are probed on a tiny circle: if the
    circle reaches the domain they sit on the boundary, otherwise their
    distance to a dense sample of the target boundary is used.
    """
    c, half, _ = _window(source)
    inner, outer = source.complement_sets()
    pts = np.concatenate([s.boundary_points(n, window=half) for s in inner + outer])
    pts = pts[np.abs(pts - c) <= 2 * half]
    with np.errstate(all="ignore"):
        images = np.asarray(f(pts), dtype=complex)
    images = images[np.isfinite(images)]
    ti, to = target.complement_sets()
    sets = ti + to
    dist = geo.components_distance(sets, images)
    covered = np.flatnonzero(dist <= 0)
    if covered.size:
        tc, thalf, tscale = _window(target)
        eps = 1e-10 * max(1.0, tscale, float(np.max(np.abs(images[covered]))))
        ring = images[covered, None] + eps * np.exp(2j * np.pi * np.arange(16) / 16)[None, :]
        on_edge = np.any(geo.components_distance(sets, ring.ravel()).reshape(ring.shape) > 0, axis=1)
        buried = covered[~on_edge]
        if buried.size:
            window = max(4 * thalf, 2 * float(np.max(np.abs(images[buried] - tc))))
            bpts = np.concatenate([s.boundary_points(8192, window=window) for s in sets])
            tree = cKDTree(np.column_stack([bpts.real, bpts.imag]))
            dist[buried] = tree.query(np.column_stack([images[buried].real, images[buried].imag]))[0]
    return float(np.max(dist)) if dist.size else math.nan


def winding_number(curve: np.ndarray, point: complex) -> float:
    ang = np.angle(np.append(curve, curve[0]) - point)
    return float(np.sum(np.diff(np.unwrap(ang))) / (2 * np.pi))


def degree_check(f: Callable, source: RingDomain, target: RingDomain, n: int = 2048) -> float | None:
    """Winding number of the image of a core curve of ``source`` around a point
    of the bounded complement component of ``target``; ``None`` when no core
    circle fits inside the source."""
    inner, outer = source.complement_sets()
    pin = np.concatenate([s.boundary_points(256) for s in inner])
    c = complex(np.mean(pin))
    r_in = float(np.max(np.abs(pin - c)))
    theta = 2 * np.pi * np.arange(n) / n
    far = np.concatenate([s.boundary_points(1024, window=10 * (r_in + 1)) for s in outer])
    r_out = float(np.min(np.abs(far - c)))
    if r_out <= r_in:
        return None
    curve = c + 0.5 * (r_in + r_out) * np.exp(1j * theta)
    if np.any(geo.components_distance(inner + outer, curve) <= 0):
        return None
    ti, _ = target.complement_sets()
    tpts = np.concatenate([s.boundary_points(64) for s in ti])
    p = complex(np.mean(tpts))
    if not np.any(geo.components_contains(ti, np.array([p]))):
        p = complex(tpts[0])
    return winding_number(np.asarray(f(curve), dtype=complex), p)


# ---------------------------------------------------------------------------
# circle maps and Fourier tests

@dataclass
class CircleMap:
    evaluator: Callable
    sense: str = "preserving"

    def __call__(self, theta):
        return np.asarray(self.evaluator(np.asarray(theta, dtype=float)), dtype=complex)

    @classmethod
    def from_disk_map(cls, f: Callable) -> "CircleMap":
        return cls(lambda th: f(np.exp(1j * th)))


@dataclass
class FourierResult:
    coefficients: np.ndarray
    N: int
    aliasing_bound: float

    def c(self, n: int) -> complex:
        if abs(n) > self.N:
            raise IndexError(n)
        return complex(self.coefficients[n + self.N])


class NotHomeomorphism(ValueError):
    def __init__(self, message: str, degree: int, shapiro_sum: float):
        super().__init__(message)
        self.degree = degree
        self.shapiro_sum = shapiro_sum


def _samples(f: CircleMap, M: int) -> np.ndarray:
    theta = 2 * np.pi * np.arange(M) / M
    vals = f(theta)
    if np.max(np.abs(np.abs(vals) - 1.0)) > 1e-9:
        raise ValueError("circle map values leave the unit circle")
    return vals


def fourier_coefficients(f: CircleMap, N: int) -> FourierResult:
    """``c_n``, ``|n| <= N``, from ``4N`` equispaced samples.

    The aliasing bound is the mass of the computed coefficients with
    ``N < |n| <= 2N``, which dominates the folded tail for decaying spectra.
    """
    if N < 1:
        raise ValueError("N must be positive")
    M = 4 * N
    c = np.fft.fft(_samples(f, M)) / M
    n = np.fft.fftfreq(M, 1.0 / M).astype(int)
    coeffs = np.array([c[k % M] for k in range(-N, N + 1)])
    tail = float(np.sum(np.abs(c[(np.abs(n) > N) & (np.abs(n) <= 2 * N)])))
    return FourierResult(coeffs, N, tail)


def circle_degree(f: CircleMap, M: int = 4096) -> tuple[int, bool]:
    """Degree of ``f`` and whether its lift is strictly monotone on the grid."""
    vals = _samples(f, M)
    steps = np.angle(np.roll(vals, -1) / vals)
    deg = int(round(np.sum(steps) / (2 * np.pi)))
    monotone = bool(np.all(steps > 0) or np.all(steps < 0))
    return deg, monotone


def shapiro_sum(f: CircleMap, k: int, N: int = 256) -> float:
    """``|c_0|^2 + ... + |c_k|^2``."""
    res = fourier_coefficients(f, max(N, k))
    return float(sum(abs(res.c(n)) ** 2 for n in range(k + 1)))


@dataclass
class WeitsmanResult:
    sum01: float
    passed: bool
    aliasing_bound: float
    bound: float = 2.0 / math.pi


def weitsman_test(f: CircleMap, N: int = 256) -> WeitsmanResult:
    """``|c_0| + |c_1| >= 2/pi`` for a sense-preserving circle homeomorphism."""
    deg, monotone = circle_degree(f, max(4 * N, 1024))
    if deg < 0 or f.sense == "reversing":
        raise ValueError("the circle map reverses orientation")
    if deg != 1 or not monotone:
        raise NotHomeomorphism(f"circle map has degree {deg} and is not a homeomorphism", deg,
                               shapiro_sum(f, max(deg, 1), N))
    res = fourier_coefficients(f, N)
    s = abs(res.c(0)) + abs(res.c(1))
    return WeitsmanResult(s, s >= 2.0 / math.pi - res.aliasing_bound, res.aliasing_bound)


# ---------------------------------------------------------------------------
# dilatation on annuli

def dilatation_check(f: Callable, R: float, a: complex = 1.0 + 0j, samples: int = 400,
                     alphas=(0.0, 0.25, 0.5, 0.75), seed: int = 0) -> float:
    """Margin ``min (k^{1-alpha} - |H_zbar / H_z|)`` over samples of the
    sub-annuli ``A(R^-alpha, R^alpha)`` of ``A(1/R, R)``, where ``H`` is ``f``
    (or its conjugate) normalized so that its second dilatation vanishes at ``a``.
    """
    if not R > 1:
        raise ValueError("R must exceed 1")
    a = complex(a)
    if abs(abs(a) - 1.0) > 1e-12:
        raise ValueError("the basepoint must lie on the unit circle")
    h0 = min(1e-4, 0.1 * (R - 1.0) / R)
    fz, fzb = wirtinger(f, a, h0)
    g = f
    if abs(fzb) > abs(fz):
        g = lambda z: np.conj(f(z))  # noqa: E731
        fz, fzb = np.conj(fzb), np.conj(fz)
    if abs(fz) < 1e-12:
        raise ValueError("degenerate gradient at the basepoint")
    norm = normalize_dilatation(complex(fzb / np.conj(fz)))
    H = norm.apply(g)

    rng = np.random.default_rng(seed)
    margin = math.inf
    for alpha in alphas:
        bound = three_circles_bound(R, alpha)
        rho = R ** (alpha * rng.uniform(-1, 1, samples)) if alpha > 0 else np.ones(samples)
        z = rho * np.exp(2j * np.pi * rng.uniform(0, 1, samples))
        dist = np.minimum(np.abs(z) - 1.0 / R, R - np.abs(z))
        Hz, Hzb = wirtinger(H, z, np.minimum(1e-4, dist / 10.0))
        if np.any(np.abs(Hz) < 1e-14):
            raise ValueError("degenerate gradient in the sample")
        margin = min(margin, float(np.min(bound - np.abs(Hzb / Hz))))
    return margin


# ---------------------------------------------------------------------------
# reports

@dataclass
class ValidationReport:
    harmonicity_max: float
    injectivity_violations: int
    boundary_hausdorff: float
    dilatation_bound_margin: float | None
    degree: float | None
    passed: bool
    samples: int
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def validate_map(f: Callable, source: RingDomain, target: RingDomain | None = None, samples: int = 200,
                 seed: int = 0, harmonic_tol: float = 1e-4, boundary_tol: float = 1e-6) -> ValidationReport:
    notes = [f"injectivity sampled, no certificate: checked {samples} points"]
    harm = check_harmonic(f, source, samples, seed=seed)
    inj = check_injective(f, source, samples, seed=seed + 1)
    haus, deg, margin = math.nan, None, None
    ok = harm <= harmonic_tol and inj == 0
    if target is not None:
        _, _, scale = _window(target)
        haus = boundary_hausdorff(f, source, target)
        ok = ok and haus <= boundary_tol * max(1.0, scale)
        deg = degree_check(f, source, target)
        if deg is None:
            notes.append("no core circle fits inside the source; degree not checked")
        else:
            ok = ok and abs(abs(deg) - 1.0) < 1e-6
    if isinstance(source, Annulus):
        rho = math.sqrt(source.R / source.r)
        scale = math.sqrt(source.R * source.r)
        c = source.center
        margin = dilatation_check(lambda w: f(c + scale * w), rho, samples=samples, seed=seed + 2)
        ok = ok and margin >= -1e-6
    return ValidationReport(harm, inj, haus, margin, deg, bool(ok), samples, notes)


def validate_spec(spec, samples: int = 200, seed: int = 0, **kw) -> ValidationReport:
    from .construct import evaluate_map
    if spec.source is None:
        raise ValueError("the map has no source domain to sample")
    report = validate_map(lambda z: evaluate_map(spec, z), spec.source, spec.target, samples, seed, **kw)
    if spec.delegated:
        report.notes.append("validated on the domain after the delegated conformal stage: " + spec.delegated)
    return report
