"""Existence gate for harmonic homeomorphisms between ring domains.

Three facts are combined:

* between circular annuli, ``h`` exists iff ``R*/r* >= cosh(Mod)``;
* if ``h`` exists and the source is nondegenerate then
  ``Mod_@(target) >= Phi(Mod source) * Mod source``;
* ``Mod_@(target) > Mod(source)`` is sufficient, except that no ``h`` exists
  when the target's complement is bounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .affine import affine_modulus
from .capacity import modulus_best
from .domains import AffineImage, Annulus, RingDomain
from .elliptic import width_bound

STATUSES = ("Exists", "NotExists", "Unknown")
REASONS = ("TheoremA-iff", "Thm1.4-sufficient", "Thm1.4-exceptional", "Thm1.2-necessary-violated", "gap")
_EXISTS_REASONS = {"TheoremA-iff", "Thm1.4-sufficient"}
_NOT_EXISTS_REASONS = {"TheoremA-iff", "Thm1.4-exceptional", "Thm1.2-necessary-violated"}


@dataclass
class Verdict:
    status: str
    reason: str
    gap: tuple | None = None
    conjectured: str | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES or self.reason not in REASONS:
            raise ValueError(f"invalid verdict {self.status}/{self.reason}")
        if self.status == "Exists" and self.reason not in _EXISTS_REASONS:
            raise ValueError(f"Exists cannot rest on {self.reason}")
        if self.status == "NotExists" and self.reason not in _NOT_EXISTS_REASONS:
            raise ValueError(f"NotExists cannot rest on {self.reason}")
        if (self.gap is not None) != (self.status == "Unknown"):
            raise ValueError("a gap is reported exactly for Unknown verdicts")

    def to_dict(self) -> dict:
        out = {"status": self.status, "reason": self.reason}
        if self.gap is not None:
            out["gap"] = list(self.gap)
        if self.conjectured is not None:
            out["conjectured"] = self.conjectured
        out.update(self.details)
        return out


def _g(alpha, log_t):
    # alpha (t^{1-a} - 1)/(t^{1-a} + 1) = alpha tanh((1 - alpha) log t / 2)
    return alpha * np.tanh(0.5 * (1.0 - alpha) * log_t)


def lambda_numeric(t: float) -> float:
    """``sup_{0<a<1} a (t^{1-a} - 1) / (t^{1-a} + 1)``."""
    if not t >= 1:
        raise ValueError("lambda is defined for t >= 1")
    if t == 1 or math.isinf(t):
        return 0.0 if t == 1 else 1.0
    return _lambda_log(math.log(t))


def _lambda_log(log_t: float) -> float:
    if log_t <= 0.0:
        return 0.0
    # the scan locates the basin; golden-section search then polishes it
    alphas = np.linspace(0.0, 1.0, 1025)
    vals = _g(alphas, log_t)
    i = int(np.argmax(vals))
    if i == 0 or i == len(alphas) - 1:
        return float(vals[i])
    res = minimize_scalar(lambda a: -_g(a, log_t), bracket=(alphas[i - 1], alphas[i], alphas[i + 1]),
                          method="golden", tol=1e-12)
    return float(max(-res.fun, vals[i]))


def lambda_seed(t: float) -> float:
    """The trial exponent ``1 - log(1 + log t) / log t``, clamped to (0.01, 0.99)."""
    if t <= 1:
        return 0.01
    log_t = math.log(t)
    return min(max(1.0 - math.log1p(log_t) / log_t, 0.01), 0.99)


def lambda_closed_lower(t: float) -> float:
    """``(log t - log(1 + log t)) / (2 + log t)``, clamped below at 0."""
    if t < 1:
        raise ValueError("defined for t >= 1")
    log_t = math.log(t)
    return max(0.0, (log_t - math.log1p(log_t)) / (2.0 + log_t))


def phi(tau: float) -> float:
    """``Phi(tau) = lambda(coth(pi^2 / (2 tau)))``."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    # log coth x = log1p(2 / (e^{2x} - 1)) keeps t - 1 resolved for small tau
    x = math.pi ** 2 / (2.0 * tau)
    log_t = 0.0 if x > 350.0 else math.log1p(2.0 / math.expm1(2.0 * x))
    return _lambda_log(log_t)


def phi_conjectured(tau: float) -> float:
    """``log(cosh tau) / tau`` without overflow."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    if tau < 1.0:
        return math.log(math.cosh(tau)) / tau
    return (tau + math.log1p(math.exp(-2.0 * tau)) - math.log(2.0)) / tau


def nitsche_gate(mod_source: float, target_ratio: float) -> Verdict:
    """Existence between annuli: ``R*/r* >= cosh(Mod source)``."""
    if not mod_source > 0 or not target_ratio > 1:
        raise ValueError("need mod_source > 0 and target_ratio > 1")
    threshold = math.cosh(mod_source)
    status = "Exists" if target_ratio >= threshold else "NotExists"
    return Verdict(status, "TheoremA-iff",
                   details={"m": mod_source, "target_ratio": target_ratio, "cosh_threshold": threshold})


def _annulus_ratio(d: RingDomain) -> float | None:
    if isinstance(d, Annulus):
        return d.R / d.r
    if isinstance(d, AffineImage) and (d.phi.is_conformal() or d.phi.is_anticonformal()):
        return _annulus_ratio(d.base)
    return None


def existence_verdict(source: RingDomain, target: RingDomain, budget: int = 200, conjecture: bool = True,
                      **solver_kw) -> Verdict:
    """Decide whether a harmonic homeomorphism ``source -> target`` exists."""
    rs, rt = _annulus_ratio(source), _annulus_ratio(target)
    if rs is not None and rt is not None:
        return nitsche_gate(math.log(rs), rt)

    m_est = modulus_best(source, **solver_kw)
    m, m_err = m_est.value, m_est.error
    details = {"m": m, "m_error": m_err}

    if target.complement_bounded and not math.isinf(m):
        return Verdict("NotExists", "Thm1.4-exceptional", details=details)

    if math.isinf(m):
        return Verdict("Unknown", "gap", gap=(math.inf, math.inf),
                       details={**details, "note": "degenerate source; the modulus tests do not apply"})

    # sandwich shortcuts before the expensive search: Mod <= Mod_@ <= width bound
    lower = modulus_best(target, **solver_kw)
    upper = width_bound(target)
    phi_m = phi(m)
    need = phi_m * m
    details.update({"phi_m": phi_m, "necessary_threshold": need, "sufficient_threshold": m})
    if lower.value - lower.error > m + m_err:
        details.update({"m_at_lower": lower.value, "error_budget": lower.error + m_err})
        return Verdict("Exists", "Thm1.4-sufficient", details=details)
    m_lo = m - m_err
    need_lo = phi(m_lo) * m_lo if m_lo > 0 else 0.0
    if math.isfinite(upper.value) and upper.value < need_lo:
        details.update({"m_at_upper": upper.value, "error_budget": m_err})
        return Verdict("NotExists", "Thm1.2-necessary-violated", details=details)

    # both tests are already out of reach: Mod <= Mod_@ <= width bound < m and
    # Mod > Phi(m) m; only the conjecture could still use the search
    if upper.value < m - m_err and lower.value - lower.error > need + m_err:
        details.update({"m_at_lower": lower.value, "m_at_upper": upper.value})
        conj_line = phi_conjectured(m) * m
        if not conjecture:
            return Verdict("Unknown", "gap", gap=(need, m), details=details)
        if upper.value < conj_line:
            return Verdict("Unknown", "gap", gap=(need, m), conjectured="NotExists", details=details)
        if lower.value - lower.error > conj_line:
            return Verdict("Unknown", "gap", gap=(need, m), conjectured="Unknown", details=details)

    res = affine_modulus(target, budget=budget, **solver_kw)
    m_at, m_at_err = res.value.value, res.value.error
    eps = m_err + m_at_err
    details.update({"m_at": m_at, "m_at_error": m_at_err, "error_budget": eps, "m_at_status": res.attained})
    if m_at - m > eps:
        return Verdict("Exists", "Thm1.4-sufficient", details=details)
    if need - m_at > eps:
        return Verdict("NotExists", "Thm1.2-necessary-violated", details=details)
    conj = None
    if conjecture:
        conj = "Exists" if m_at > m else ("NotExists" if m_at < phi_conjectured(m) * m else "Unknown")
    return Verdict("Unknown", "gap", gap=(need, m), conjectured=conj, details=details)
