"""Explicit harmonic homeomorphisms between ring domains.

A map is a chain of stages: conformal precompositions (``MobiusPre``), at
most one harmonic stage (``ShearAnalytic``, ``PowerShear`` or
``FtInverse``), then affine postcompositions (``AffinePost``).  Conformal
changes of the source and affine changes of the target keep a map harmonic,
so every legal chain is harmonic.

Where a construction needs a conformal map of a general ring onto a
canonical one, that stage is recorded in ``HarmonicMapSpec.delegated`` and
the spec is evaluated on the domain it was built for.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_jacobi, roots_legendre

from . import geometry as geo
from .affine import affine_modulus
from .capacity import modulus_best
from .domains import (
    AffineMap,
    FtImageRing,
    PuncturedDomain,
    RealSlitRing,
    RingDomain,
    Teichmuller,
    affine_from_dict,
    affine_to_dict,
    apply_affine,
    domain_from_dict,
    domain_to_dict,
    ft_forward,
    ft_inverse,
)
from .elliptic import mod_grotzsch

__all__ = [
    "MobiusPre", "ShearAnalytic", "PowerShear", "FtInverse", "AffinePost", "HarmonicMapSpec",
    "ConstructionError", "ft_forward", "ft_inverse", "sc_shear_map", "power_shear_map",
    "power_shear_for_alpha", "degenerate_target_map", "affine_rebalance", "evaluate_map",
    "spec_to_dict", "spec_from_dict", "identity_spec",
]


class ConstructionError(RuntimeError):
    pass


def _upper(z):
    # pin signed zeros so that principal logarithms take the upper-side limit
    z = np.asarray(z, dtype=complex)
    return z.real + 1j * (z.imag + 0.0)


# ---------------------------------------------------------------------------
# stages

@dataclass(frozen=True)
class MobiusPre:
    a: complex
    b: complex
    c: complex
    d: complex
    role = "conformal"

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.a * self.d - self.b * self.c == 0:
            raise ValueError("degenerate Mobius transformation")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        den = self.c * z + self.d
        pole = den == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (self.a * z + self.b) / np.where(pole, 1.0, den)
        return np.where(pole, complex(math.inf, 0.0), out)

    def to_dict(self):
        return {"type": "mobius_pre", **{k: [getattr(self, k).real, getattr(self, k).imag] for k in "abcd"}}


@lru_cache(maxsize=None)
def _jacobi_rule(n: int, beta: float):
    """Nodes and weights for ``int_0^1 s^beta q(s) ds``."""
    x, w = roots_jacobi(n, 0.0, beta)
    return 0.5 * (1.0 + x), w * 2.0 ** (-beta - 1.0)


@lru_cache(maxsize=None)
def _legendre_rule(n: int):
    x, w = roots_legendre(n)
    return 0.5 * (1.0 + x), 0.5 * w


def _singular_integral(g, beta: float, scale: float, n: int) -> complex:
    """``int_0^1 tau^beta g(tau) d tau`` for ``g`` analytic except at a point
    about ``1/scale`` away from the origin.

    The first panel absorbs ``tau^beta`` into Gauss-Jacobi weights; the rest
    of ``[0, 1]`` is covered by Gauss-Legendre panels of doubling length so
    that each panel stays well separated from the singularity of ``g``.
    """
    tau1 = min(1.0, 0.25 / scale) if scale > 0 else 1.0
    s, w = _jacobi_rule(n, beta)
    total = tau1 ** (1.0 + beta) * np.sum(w * g(tau1 * s))
    xs, ws = _legendre_rule(n)
    lo = tau1
    while lo < 1.0:
        hi = min(2.0 * lo, 1.0)
        tau = lo + (hi - lo) * xs
        total += (hi - lo) * np.sum(ws * tau ** beta * g(tau))
        lo = hi
    return complex(total)


@dataclass(frozen=True)
class ShearAnalytic:
    """``h(z) = Re f(z) + i Im z`` with ``f`` the Schwarz-Christoffel map of the
    upper half-plane onto ``{y > g_b(x)}``.

    ``f'(z) = C ((z + 1)/z)^a`` with ``a = arctan(b)/pi``; ``f(0) = 0`` and
    ``C = tan(pi a)/(pi a)`` gives ``f(-1) = -1 + ib``.  Values below the real
    axis use ``Re f(conj z) = Re f(z)``.
    """
    a: float
    order: int = 48
    role = "harmonic"

    def __post_init__(self):
        if not 0.0 <= self.a < 0.5:
            raise ValueError("SC exponent must lie in [0, 1/2)")

    @property
    def b(self) -> float:
        return math.tan(math.pi * self.a)

    @property
    def C(self) -> float:
        if self.a == 0.0:
            return 1.0
        return math.tan(math.pi * self.a) / (math.pi * self.a)

    def f(self, z) -> complex:
        """Holomorphic ``f`` on the closed upper half-plane."""
        z = complex(_upper(z))
        if z.imag < 0:
            raise ValueError("f is evaluated on the closed upper half-plane")
        a, C = self.a, self.C
        if a == 0.0:
            return z
        if z == 0:
            return 0j
        if z.real >= -0.5:
            def g(tau):
                return np.exp(a * np.log(_upper(1.0 + z * tau)))
            integral = _singular_integral(g, -a, abs(z), self.order)
            return C * complex(np.exp((1.0 - a) * np.log(_upper(z)))) * integral
        zp1 = z + 1.0
        if zp1 == 0:
            return complex(-1.0, self.b)

        def g(tau):
            return np.exp(-a * np.log(_upper(-1.0 + zp1 * tau)))
        integral = _singular_integral(g, a, abs(zp1), self.order)
        return complex(-1.0, self.b) + C * complex(np.exp((1.0 + a) * np.log(_upper(zp1)))) * integral

    def fprime(self, z) -> complex:
        z = complex(_upper(z))
        return self.C * complex(np.exp(self.a * (np.log(_upper(z + 1.0)) - np.log(_upper(z)))))

    def u(self, z):
        z = np.asarray(z, dtype=complex)
        flat = np.where(z.imag < 0, np.conj(z), z).ravel()
        out = np.array([self.f(w).real for w in flat]).reshape(z.shape)
        return float(out) if out.ndim == 0 else out

    def u_x(self, z):
        """``du/dx = Re f'(z)`` (reflected below the axis)."""
        z = np.asarray(z, dtype=complex)
        flat = np.where(z.imag < 0, np.conj(z), z).ravel()
        out = np.array([self.fprime(w).real for w in flat]).reshape(z.shape)
        return float(out) if out.ndim == 0 else out

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.u(z) + 1j * z.imag
        return complex(out) if np.ndim(out) == 0 else out

    def to_dict(self):
        return {"type": "shear_analytic", "kernel": "schwarz_christoffel", "a": self.a, "b": self.b,
                "C": self.C, "order": self.order}


@dataclass(frozen=True)
class PowerShear:
    """``Re z^alpha + i Im z`` on ``C minus (-inf, 0]``, principal branch
    pinned by ``1^alpha = 1``."""
    alpha: float
    role = "harmonic"

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    def __call__(self, w):
        # Re w^alpha agrees from both sides of the cut, so the map extends
        # continuously to the negative real axis
        w = _upper(w)
        out = np.power(w, self.alpha).real + 1j * w.imag
        return complex(out) if np.ndim(out) == 0 else out

    def u_x(self, w):
        w = np.asarray(w, dtype=complex)
        return (self.alpha * np.power(w, self.alpha - 1.0)).real

    def to_dict(self):
        return {"type": "power_shear", "alpha": self.alpha}


@dataclass(frozen=True)
class FtInverse:
    """``zeta -> p + (w - t^2 / conj(w)) / 2`` with ``w = zeta`` (centred at ``p``)."""
    t: float
    center: complex = 0j
    role = "harmonic"

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("t must be nonnegative")
        object.__setattr__(self, "center", complex(self.center))

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        out = self.center + ft_inverse(zeta, self.t)
        return complex(out) if np.ndim(out) == 0 else out

    def to_dict(self):
        return {"type": "ft_inverse", "t": self.t, "center": [self.center.real, self.center.imag]}


@dataclass(frozen=True)
class AffinePost:
    phi: AffineMap
    role = "affine"

    def __call__(self, w):
        out = self.phi(np.asarray(w, dtype=complex))
        return complex(out) if np.ndim(out) == 0 else out

    def to_dict(self):
        return {"type": "affine_post", "phi": affine_to_dict(self.phi)}


_ORDER = {"conformal": 0, "harmonic": 1, "affine": 2}


@dataclass
class HarmonicMapSpec:
    stages: tuple
    source: RingDomain | None = None
    target: RingDomain | None = None
    params: dict = field(default_factory=dict)
    delegated: str | None = None

    def __post_init__(self):
        self.stages = tuple(self.stages)
        roles = [s.role for s in self.stages]
        if roles.count("harmonic") > 1:
            raise ValueError("a map may contain only one harmonic stage")
        ranks = [_ORDER[r] for r in roles]
        if ranks != sorted(ranks):
            raise ValueError("stages must be conformal, then harmonic, then affine")

    @property
    def harmonic_stage(self):
        for s in self.stages:
            if s.role == "harmonic":
                return s
        return None

    def __call__(self, z):
        return evaluate_map(self, z)


def _thin(s: geo.ClosedSet) -> bool:
    return isinstance(s, (geo.Segment, geo.Ray))


def evaluate_map(spec: HarmonicMapSpec, z, check_domain: bool = False):
    """Compose the stages of ``spec`` at ``z``.

    Slit endpoints and slit points are evaluated as limits.  With
    ``check_domain`` set, points inside a solid complement component of the
    source raise ``ValueError``.
    """
    z = np.asarray(z, dtype=complex)
    if check_domain and spec.source is not None:
        inner, outer = spec.source.complement_sets()
        solid = [s for s in inner + outer if not _thin(s)]
        if solid and np.any(geo.components_contains(solid, z)):
            raise ValueError("point lies outside the source domain")
    w = z
    for stage in spec.stages:
        w = stage(w)
    return complex(w) if np.ndim(w) == 0 else np.asarray(w)


def identity_spec(d: RingDomain | None = None) -> HarmonicMapSpec:
    return HarmonicMapSpec((), d, d)


# ---------------------------------------------------------------------------
# Schwarz-Christoffel shear  T(s) -> T(t), t >= s

def _scan_bracket(fun, xs):
    """First sign change of ``fun`` over the ordered samples ``xs``."""
    prev_x, prev_v = xs[0], fun(xs[0])
    for x in xs[1:]:
        v = fun(x)
        if prev_v == 0:
            return prev_x, prev_x
        if np.sign(v) != np.sign(prev_v):
            return prev_x, x
        prev_x, prev_v = x, v
    return None


def sc_shear_map(s: float, t: float, order: int = 48, scan: int = 64) -> HarmonicMapSpec:
    """Harmonic homeomorphism ``T(s) -> T(t)`` for ``t >= s``."""
    if not (s > 0 and t > 0):
        raise ValueError("s and t must be positive")
    if t < s:
        raise ValueError("the Schwarz-Christoffel shear needs t >= s; use the power shear for t < s")
    if t == s:
        return HarmonicMapSpec((ShearAnalytic(0.0, order),), Teichmuller(s), Teichmuller(t),
                               {"s": s, "t": t, "a": 0.0, "b": 0.0})

    def excess(a):
        return ShearAnalytic(a, order).f(s).real - t

    grid = list(np.linspace(0.0, 0.5, scan + 1)[:-1])
    # f(s) grows without bound as a -> 1/2; refine the last cell geometrically
    grid += [0.5 - 2.0 ** -k for k in range(int(math.log2(scan)) + 2, 40)]
    bracket = _scan_bracket(excess, grid)
    if bracket is None:
        raise ConstructionError(f"no exponent a in (0, 1/2) reaches f(s) = {t}")
    lo, hi = bracket
    a = lo if lo == hi else brentq(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    stage = ShearAnalytic(float(a), order)
    fs = stage.f(s)
    params = {"s": s, "t": t, "a": stage.a, "b": stage.b, "C": stage.C,
              "residual_re": fs.real - t, "residual_im": fs.imag}
    return HarmonicMapSpec((stage,), Teichmuller(s), Teichmuller(t), params)


# ---------------------------------------------------------------------------
# power shear  T(s) -> T(t), t <= s

def power_shear_for_alpha(s: float, alpha: float) -> HarmonicMapSpec:
    """The chain ``T(s) -> T(t)`` with ``(t+1)/t = ((s+1)/s)^alpha``."""
    if not s > 0:
        raise ValueError("s must be positive")
    if not 1.0 <= alpha <= 1.5:
        raise ValueError(f"alpha must lie in [1, 3/2], got {alpha}")
    sa, s1a = s ** alpha, (s + 1.0) ** alpha
    den = s1a - sa
    t = sa / den
    pre = MobiusPre(s + 1.0, 0.0, 1.0, 1.0)
    post = AffinePost(AffineMap(-1.0 / den, 0.0, sa / den))
    params = {"s": s, "t": t, "alpha": alpha, "slit_image": [sa, s1a]}
    return HarmonicMapSpec((pre, PowerShear(alpha), post), Teichmuller(s), Teichmuller(t), params)


def power_shear_map(s: float, t: float) -> HarmonicMapSpec:
    """Harmonic homeomorphism ``T(s) -> T(t)`` for ``t <= s`` within the
    power-shear regime ``(t+1)/t <= ((s+1)/s)^{3/2}``."""
    if not (s > 0 and t > 0):
        raise ValueError("s and t must be positive")
    alpha = math.log1p(1.0 / t) / math.log1p(1.0 / s)
    if alpha < 1.0 - 1e-14:
        raise ValueError(f"t > s needs the Schwarz-Christoffel shear (alpha would be {alpha})")
    if alpha > 1.5 + 1e-14:
        raise ValueError(f"outside the power-shear regime: alpha = {alpha} exceeds 3/2")
    spec = power_shear_for_alpha(s, min(max(alpha, 1.0), 1.5))
    spec.params["t_requested"] = t
    return spec


# ---------------------------------------------------------------------------
# degenerate targets: G minus {p}

@dataclass
class _ModulusCurve:
    target: PuncturedDomain
    m: float
    solver_kw: dict
    trace: list = field(default_factory=list)

    def __call__(self, t: float) -> float:
        est = modulus_best(FtImageRing(self.target, t), **self.solver_kw)
        d = float(self.target.outer_set().distance(np.array([self.target.puncture]))[0])
        bound = mod_grotzsch((d + math.hypot(d, t)) / t)
        self.trace.append({"t": t, "modulus": est.value, "error": est.error, "grotzsch_bound": bound})
        return est.value - self.m


def _source_modulus(source) -> float:
    if isinstance(source, (int, float)):
        m = float(source)
    else:
        m = modulus_best(source).value
    if not (m > 0 and math.isfinite(m)):
        raise ValueError("the source must have finite positive modulus")
    return m


def degenerate_target_map(source, target: PuncturedDomain, scan: int = 8, max_doublings: int = 30,
                          xtol: float = 1e-4, **solver_kw) -> HarmonicMapSpec:
    """``F_t^{-1}`` with ``t`` chosen so that ``Mod F_t(target) = Mod source``.

    ``source`` is a ring domain or its modulus.  The doubling search brackets
    the crossing; a ``scan``-point sweep inside the bracket picks the first
    sign change, and Brent's method finishes.
    """
    if not isinstance(target, PuncturedDomain):
        raise TypeError("the target must be a punctured domain")
    m = _source_modulus(source)
    curve = _ModulusCurve(target, m, solver_kw)
    d = float(target.outer_set().distance(np.array([target.puncture]))[0])
    t_lo = t_hi = d
    v = curve(d)
    step = 0
    if v > 0:
        while v > 0:
            step += 1
            if step > max_doublings:
                raise ConstructionError("could not bracket t from above")
            t_lo, t_hi = t_hi, 2.0 * t_hi
            v = curve(t_hi)
    else:
        while v < 0:
            step += 1
            if step > max_doublings:
                raise ConstructionError("could not bracket t from below")
            t_hi, t_lo = t_lo, 0.5 * t_lo
            v = curve(t_lo)
    if t_lo != t_hi and scan > 2:
        inner = _scan_bracket(curve, np.linspace(t_lo, t_hi, scan))
        if inner is None:
            raise ConstructionError("bracket lost during the scan")
        t_lo, t_hi = inner
    t = t_lo if t_lo == t_hi else brentq(curve, t_lo, t_hi, xtol=xtol * t_hi, rtol=1e-6)
    image = FtImageRing(target, t)
    got = modulus_best(image, **solver_kw)
    params = {"t": t, "source_modulus": m, "image_modulus": got.value, "image_error": got.error,
              "residual": got.value - m, "trace": curve.trace}
    return HarmonicMapSpec((FtInverse(t, target.puncture),), image, target, params,
                           delegated=f"conformal map of a ring of modulus {m!r} onto F_t(target)")


# ---------------------------------------------------------------------------
# affine rebalancing

def _collinear_complement(d: RingDomain) -> bool:
    return isinstance(d, (Teichmuller, RealSlitRing))


def affine_rebalance(source, target: RingDomain, budget: int = 200, tol: float = 1e-3,
                     **solver_kw) -> HarmonicMapSpec:
    """An affine ``phi`` with ``Mod phi(target) = Mod source``; the map is
    ``phi^{-1}`` after the delegated conformal map ``source -> phi(target)``."""
    if target.complement_bounded:
        raise ConstructionError("no harmonic homeomorphism onto a target with bounded complement")
    if _collinear_complement(target):
        raise ConstructionError("collinear complement: use the Schwarz-Christoffel shear")
    m = _source_modulus(source)
    used = [0]
    cache = {}

    def mod_at(k: complex) -> float:
        key = (round(k.real, 12), round(k.imag, 12))
        if key not in cache:
            if used[0] >= budget:
                raise ConstructionError("evaluation budget exhausted")
            used[0] += 1
            cache[key] = modulus_best(apply_affine(AffineMap.shear(k), target), **solver_kw).value
        return cache[key]

    def finish(k, note):
        phi = AffineMap.shear(k)
        image = apply_affine(phi, target)
        got = mod_at(k)
        params = {"source_modulus": m, "shear": [k.real, k.imag], "image_modulus": got,
                  "residual": got - m, "evaluations": used[0], "note": note}
        stages = () if phi.is_identity() else (AffinePost(phi.inverse()),)
        return HarmonicMapSpec(stages, image, target, params,
                               delegated=f"conformal map of a ring of modulus {m!r} onto phi(target)")

    m0 = mod_at(0j)
    if abs(m0 - m) <= tol * max(1.0, m):
        return finish(0j, "target modulus already matches")
    if m0 > m:
        k_hi = 0j
    else:
        res = affine_modulus(target, budget=max(budget - used[0], 97), **solver_kw)
        used[0] += res.evaluations
        if not res.value.value - res.value.error > m:
            raise ConstructionError("affine modulus of the target does not exceed the source modulus")
        k_hi = res.best_shear
        if abs(k_hi) >= 1:
            k_hi *= 0.999 / abs(k_hi)
        if mod_at(k_hi) <= m:
            raise ConstructionError("the maximising shear does not exceed the source modulus")

    # stretching drives the modulus to zero; find the direction where it falls fastest
    psis = 2.0 * np.pi * np.arange(16) / 16
    rim = {psi: mod_at(0.95 * cmath.exp(1j * psi)) for psi in psis}
    psi = min(rim, key=rim.get)
    k_lo = 0.95 * cmath.exp(1j * psi)
    n = 5
    while mod_at(k_lo) >= m:
        if n > 30:
            raise ConstructionError("stretching did not lower the modulus below the source modulus")
        k_lo = (1.0 - 2.0 ** -n) * cmath.exp(1j * psi)
        n += 1

    def along(lam):
        return mod_at(k_hi + lam * (k_lo - k_hi)) - m

    lam = brentq(along, 0.0, 1.0, xtol=1e-6)
    return finish(k_hi + lam * (k_lo - k_hi), "root on the segment between the maximiser and a stretch")


# ---------------------------------------------------------------------------
# serialization

def _stage_from_dict(obj: dict):
    kind = obj["type"]
    if kind == "mobius_pre":
        return MobiusPre(*(complex(*obj[k]) for k in "abcd"))
    if kind == "shear_analytic":
        return ShearAnalytic(float(obj["a"]), int(obj.get("order", 48)))
    if kind == "power_shear":
        return PowerShear(float(obj["alpha"]))
    if kind == "ft_inverse":
        return FtInverse(float(obj["t"]), complex(*obj.get("center", [0.0, 0.0])))
    if kind == "affine_post":
        return AffinePost(affine_from_dict(obj["phi"]))
    raise ValueError(f"unknown stage type {kind!r}")


def spec_to_dict(spec: HarmonicMapSpec) -> dict:
    out = {"stages": [s.to_dict() for s in spec.stages], "params": spec.params}
    if spec.source is not None:
        out["source"] = domain_to_dict(spec.source)
    if spec.target is not None:
        out["target"] = domain_to_dict(spec.target)
    if spec.delegated:
        out["delegated"] = spec.delegated
    return out


def spec_from_dict(obj: dict) -> HarmonicMapSpec:
    stages = tuple(_stage_from_dict(s) for s in obj.get("stages", []))
    source = domain_from_dict(obj["source"]) if "source" in obj else None
    target = domain_from_dict(obj["target"]) if "target" in obj else None
    return HarmonicMapSpec(stages, source, target, dict(obj.get("params", {})), obj.get("delegated"))

