"""Affine modulus: the supremum of the conformal modulus over affine images.

Every invertible real-affine map is a C-affine (or anti-C-affine) map after
the shear ``z -> z + k*conj(z)`` with ``|k| < 1``, and the modulus ignores
the first factor.  The search therefore runs over the unit disk of shear
parameters: a coarse polar grid, Nelder-Mead refinement, and, when the
maximum sits on the rim, a geometric approach ``rho = 1 - 2**-n`` with
Richardson extrapolation in ``1 - rho``.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .capacity import modulus_best, solve_capacity
from .domains import INF, AffineMap, ExtendedModulus, RingDomain, apply_affine

COARSE_RHO = (0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95)
COARSE_PSI = 16


def shear_modulus(d: RingDomain, k: complex, method: str = "auto", **solver_kw) -> ExtendedModulus:
    """Modulus of the image of ``d`` under ``z -> z + k conj(z)``.

    ``method="grid"`` bypasses closed forms and always runs the solver.
    """
    k = complex(k)
    if abs(k) >= 1:
        raise ValueError("shear parameter must satisfy |k| < 1")
    image = apply_affine(AffineMap.shear(k), d)
    if method == "grid":
        return solve_capacity(image, **solver_kw).as_modulus()
    return modulus_best(image, **solver_kw)


@dataclass
class TraceEntry:
    k: complex
    modulus: float
    method: str
    error: float
    stage: str = "grid"


@dataclass
class AffineModulusResult:
    value: ExtendedModulus
    best_shear: complex
    attained: str
    trace: list = field(default_factory=list)
    evaluations: int = 0

    def write_trace(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["rho", "psi", "modulus", "method", "error"])
            for e in self.trace:
                w.writerow([repr(abs(e.k)), repr(cmath.phase(e.k) if e.k != 0 else 0.0),
                            repr(e.modulus), e.method, repr(e.error)])


class BudgetExhausted(RuntimeError):
    pass


class _Evaluator:
    def __init__(self, d: RingDomain, budget: int, solver_kw: dict):
        self.d = d
        self.budget = budget
        self.solver_kw = solver_kw
        self.cache: dict = {}
        self.trace: list[TraceEntry] = []

    @property
    def used(self) -> int:
        return len(self.trace)

    def __call__(self, k: complex, stage: str) -> ExtendedModulus:
        key = (round(k.real, 12), round(k.imag, 12))
        if key in self.cache:
            return self.cache[key]
        if self.used >= self.budget:
            raise BudgetExhausted("evaluation budget exhausted")
        m = shear_modulus(self.d, k, **self.solver_kw)
        self.cache[key] = m
        self.trace.append(TraceEntry(k, m.value, m.method, m.error, stage))
        return m


def affine_modulus(d: RingDomain, budget: int = 200, divergence_jump: float = 1.0,
                   max_extensions: int = 8, rim_reserve: int = 10, **solver_kw) -> AffineModulusResult:
    """Numerical supremum of ``Mod phi(d)`` over invertible affine ``phi``."""
    n_coarse = 1 + (len(COARSE_RHO) - 1) * COARSE_PSI
    if budget < n_coarse:
        raise ValueError(f"budget {budget} is smaller than the coarse grid ({n_coarse} evaluations)")
    ev = _Evaluator(d, budget, solver_kw)

    first = ev(0j, "grid")
    if first.is_infinite:
        return AffineModulusResult(ExtendedModulus(INF, "optimized", 0.0, "degenerate ring"), 0j,
                                   "attained", ev.trace, ev.used)

    psis = 2 * np.pi * np.arange(COARSE_PSI) / COARSE_PSI
    for rho in COARSE_RHO[1:]:
        for psi in psis:
            ev(rho * cmath.exp(1j * psi), "grid")

    best = max(ev.trace, key=lambda e: e.modulus)
    best_k, best_m = best.k, ev(best.k, "grid")

    # local refinement inside the coarse disk
    rho_max = COARSE_RHO[-1]
    nm_budget = budget - ev.used - rim_reserve
    if nm_budget > 4:
        def objective(x):
            k = complex(x[0], x[1])
            r = abs(k)
            penalty = 0.0
            if r > rho_max:
                penalty = 10.0 * (r - rho_max)
                k *= rho_max / r
            try:
                return -ev(k, "refine").value + penalty
            except BudgetExhausted:
                return -best_m.value + 1.0

        start = np.array([best_k.real, best_k.imag])
        step = 0.1
        simplex = np.array([start, start + [step, 0.0], start + [0.0, step]])
        minimize(objective, start, method="Nelder-Mead",
                 options={"maxfev": nm_budget, "xatol": 5e-3, "fatol": 1e-4, "initial_simplex": simplex})
        cand = max(ev.trace, key=lambda e: e.modulus)
        best_k, best_m = cand.k, ev(cand.k, "grid")

    # rim behaviour along the best direction
    psi_star = cmath.phase(best_k) if best_k != 0 else 0.0
    direction = cmath.exp(1j * psi_star)
    status = "attained"
    value, err = best_m.value, best_m.error
    if abs(best_k) >= 0.9 - 1e-9:
        try:
            m_in = ev(0.9 * direction, "rim")
            m_rim = ev(rho_max * direction, "rim")
        except BudgetExhausted:
            m_in = m_rim = None
        if m_in is not None and m_rim.value > m_in.value:
            status, value, err, best_k = _extend(ev, direction, m_rim, divergence_jump, max_extensions,
                                                 best_m, best_k)

    if status == "infinite":
        return AffineModulusResult(ExtendedModulus(INF, "optimized", 0.0, "modulus grows without bound"),
                                   best_k, status, ev.trace, ev.used)
    return AffineModulusResult(ExtendedModulus(value, "optimized", err), best_k, status, ev.trace, ev.used)


def _extend(ev, direction, m_rim, jump, max_ext, best_m, best_k):
    """Push ``rho`` toward 1 along ``direction`` and extrapolate the limit."""
    values = [m_rim.value]
    errs = [m_rim.error]
    rhos = [COARSE_RHO[-1]]
    n = 5
    extrap = []
    while len(values) - 1 < max_ext:
        rho = 1.0 - 2.0 ** -n
        n += 1
        try:
            m = ev(rho * direction, "extend")
        except BudgetExhausted:
            break
        rhos.append(rho)
        values.append(m.value)
        errs.append(m.error)
        if m.is_infinite:
            return "infinite", INF, 0.0, rho * direction
        if len(values) >= 4 and values[-1] - values[-4] > jump:
            return "infinite", INF, 0.0, rho * direction
        if len(values) >= 2:
            # linear in (1 - rho)
            g0, g1 = 1 - rhos[-2], 1 - rhos[-1]
            lim = values[-1] + (values[-1] - values[-2]) * g1 / (g0 - g1)
            extrap.append(lim)
            if len(extrap) >= 2 and abs(extrap[-1] - extrap[-2]) <= max(errs[-1], 1e-9) \
                    and values[-1] - values[-2] < 0.5 * jump:
                break
    if len(values) < 2:
        return "attained", best_m.value, best_m.error, best_k
    lim = extrap[-1]
    spread = abs(extrap[-1] - extrap[-2]) if len(extrap) >= 2 else abs(lim - values[-1])
    err = abs(lim - values[-1]) + spread + max(errs[-2:])
    if lim < best_m.value:
        return "attained", best_m.value, best_m.error, best_k
    return "supremum-extrapolated", lim, err, rhos[-1] * direction
