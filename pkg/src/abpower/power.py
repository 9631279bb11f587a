"""Closed-form power of a one-sided two-sample test under label misspecification.

Convention: ``delta = mu_A - mu_B > 0``, the statistic is
``T = (mean_A - mean_B) / se`` computed under the intended labels, and H0 is
rejected when ``T > z_alpha`` with ``1 - Phi(z_alpha) = alpha``.  Power depends
on the realized labels only through ``gap = n_S - n_D`` (and, for proportions,
through the realized class sizes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

from .graph import Graph
from .interference import switch_moments
from .labeling import ClassLabels, neighborhood_switch_probs

SQRT2 = math.sqrt(2.0)
UNBALANCED = "unbalanced-classes"

# Acklam's rational approximation to the normal quantile, |rel err| < 1.2e-9
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / SQRT2)


def normal_sf(z: float) -> float:
    """Upper tail ``1 - Phi(z)`` without cancellation for large ``z``."""
    return 0.5 * math.erfc(z / SQRT2)


def _acklam_quantile(q: float) -> float:
    if q < _P_LOW:
        r = math.sqrt(-2.0 * math.log(q))
        return (((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5]) / (
            (((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0
        )
    if q > 1.0 - _P_LOW:
        return -_acklam_quantile(1.0 - q)
    s = q - 0.5
    r = s * s
    return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * s / (
        ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    )


def z_critical(alpha: float) -> float:
    """Solve ``1 - Phi(z) = alpha``: rational first guess, then bisection on the upper tail."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if alpha == 0.5:
        return 0.0
    guess = -_acklam_quantile(alpha)
    lo, hi, width = guess, guess, 1e-6
    while normal_sf(lo) < alpha:
        lo -= width
        width *= 2
    width = 1e-6
    while normal_sf(hi) > alpha:
        hi += width
        width *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if normal_sf(mid) > alpha:
            lo = mid
        else:
            hi = mid
    return lo if abs(normal_sf(lo) - alpha) <= abs(normal_sf(hi) - alpha) else hi


@dataclass(frozen=True)
class NormalModel:
    mu_A: float
    mu_B: float
    sigma: float = 1.0
    kind: str = field(default="normal", init=False)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def delta(self) -> float:
        return self.mu_A - self.mu_B


@dataclass(frozen=True)
class BernoulliModel:
    mu_A: float
    mu_B: float
    kind: str = field(default="bernoulli", init=False)

    def __post_init__(self):
        for mu in (self.mu_A, self.mu_B):
            if not 0.0 < mu < 1.0:
                raise ValueError("Bernoulli means must lie strictly inside (0, 1)")

    @property
    def delta(self) -> float:
        return self.mu_A - self.mu_B

    @property
    def var_A(self) -> float:
        return self.mu_A * (1.0 - self.mu_A)

    @property
    def var_B(self) -> float:
        return self.mu_B * (1.0 - self.mu_B)


Model = Union[NormalModel, BernoulliModel]


@dataclass(frozen=True)
class TestConfig:
    alpha: float
    model: Model

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")

    @property
    def delta(self) -> float:
        return self.model.delta

    def require_alternative(self) -> None:
        if not self.delta > 0:
            raise ValueError("power is defined under H1: mu_A > mu_B (delta > 0)")

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "model": model_to_dict(self.model)}


def model_to_dict(model: Model) -> dict:
    out = {"kind": model.kind, "mu_A": model.mu_A, "mu_B": model.mu_B}
    if isinstance(model, NormalModel):
        out["sigma"] = model.sigma
    return out


def model_from_dict(d: dict) -> Model:
    kind = d.get("kind", "normal")
    if kind == "normal":
        return NormalModel(float(d["mu_A"]), float(d["mu_B"]), float(d.get("sigma", 1.0)))
    if kind == "bernoulli":
        return BernoulliModel(float(d["mu_A"]), float(d["mu_B"]))
    raise ValueError(f"unknown measurement model {kind!r}")


def _check_gap(n: int, gap: float) -> None:
    if n < 2:
        raise ValueError("n must be at least 2")
    if not -n <= gap <= n:
        raise ValueError(f"gap must lie in [-n, n], got {gap} for n={n}")


def power_normal(n: int, gap: float, delta: float, sigma: float, alpha: float) -> float:
    """Exact power for normal measurements with balanced intended classes."""
    _check_gap(n, gap)
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if not delta > 0:
        raise ValueError("delta must be positive under the one-sided alternative")
    z = z_critical(alpha)
    return normal_sf(z - gap * delta / (2.0 * sigma * math.sqrt(n)))


def power_bernoulli(
    n: int,
    gap: float,
    nA_tilde: float,
    nB_tilde: float,
    mu_A: float,
    mu_B: float,
    alpha: float,
    literal: bool = False,
) -> float:
    """Large-sample power for proportions with balanced intended classes.

    The critical-value term is ``sqrt(n/2) * z_alpha * sigma_AB`` with
    ``sigma_AB^2 = (var_A + var_B) / (nA_tilde var_A + nB_tilde var_B)``; this
    reduces to ``alpha`` at ``gap = 0`` and to the textbook two-proportion
    power without interference.  ``literal=True`` divides by ``sigma_AB``
    instead, as the formula is sometimes printed; that variant does not have
    either reduction and is kept only for comparison.
    """
    _check_gap(n, gap)
    if nA_tilde <= 0 or nB_tilde <= 0:
        raise ValueError("realized class sizes must be positive")
    if not math.isclose(nA_tilde + nB_tilde, n, rel_tol=0, abs_tol=1e-6 * max(1, n)):
        raise ValueError("realized class sizes must sum to n")
    model = BernoulliModel(mu_A, mu_B)
    if not model.delta > 0:
        raise ValueError("mu_A must exceed mu_B under the one-sided alternative")
    var_a, var_b = model.var_A, model.var_B
    pooled = nA_tilde * var_a + nB_tilde * var_b
    sigma_ab = math.sqrt((var_a + var_b) / pooled)
    z = z_critical(alpha)
    crit = math.sqrt(n / 2.0) * z * (1.0 / sigma_ab if literal else sigma_ab)
    return normal_sf(crit - gap * model.delta / (2.0 * math.sqrt(pooled)))


def power_from_gap(
    cfg: TestConfig, n: int, gap: float, nA_tilde: float, nB_tilde: float, literal: bool = False
) -> float:
    cfg.require_alternative()
    m = cfg.model
    if isinstance(m, NormalModel):
        return power_normal(n, gap, m.delta, m.sigma, cfg.alpha)
    return power_bernoulli(n, gap, nA_tilde, nB_tilde, m.mu_A, m.mu_B, cfg.alpha, literal=literal)


@dataclass(frozen=True)
class PowerEstimate:
    beta: float
    n: int
    gap: float
    exp_nA: float
    exp_nB: float
    alpha: float
    model: dict
    assumption_flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "n": self.n,
            "gap": self.gap,
            "exp_nA": self.exp_nA,
            "exp_nB": self.exp_nB,
            "alpha": self.alpha,
            "model": dict(self.model),
            "assumption_flags": list(self.assumption_flags),
        }


def estimate_from_probs(p, c: ClassLabels, cfg: TestConfig, literal: bool = False) -> PowerEstimate:
    """Plug the expected gap and expected realized class sizes into the power formula."""
    cfg.require_alternative()
    mom = switch_moments(p, c)
    n = len(c)
    beta = power_from_gap(cfg, n, mom.mu_p, mom.exp_nA, mom.exp_nB, literal=literal)
    flags = () if c.balanced else (UNBALANCED,)
    return PowerEstimate(
        beta=beta,
        n=n,
        gap=mom.mu_p,
        exp_nA=mom.exp_nA,
        exp_nB=mom.exp_nB,
        alpha=cfg.alpha,
        model=model_to_dict(cfg.model),
        assumption_flags=flags,
    )


def estimate_power(g: Graph, c: ClassLabels, cfg: TestConfig, literal: bool = False) -> PowerEstimate:
    """Power estimate for labels ``c`` on interference network ``g``.

    Switch probabilities come from each node's neighborhood, the expected
    ``n_S - n_D`` is ``n - 2 sum(p)``, and the result is a plug-in value of
    the closed-form power (a first-order estimate of the expected power).
    """
    p = neighborhood_switch_probs(g, c)
    return estimate_from_probs(p, c, cfg, literal=literal)


def standard_power_normal(n: int, delta: float, sigma: float, alpha: float) -> float:
    return normal_sf(z_critical(alpha) - delta * math.sqrt(n) / (2.0 * sigma))


def standard_power_two_proportion(n: int, mu_A: float, mu_B: float, alpha: float) -> float:
    """Known-variance one-sided two-proportion power with n/2 units per arm."""
    se = math.sqrt((mu_A * (1 - mu_A) + mu_B * (1 - mu_B)) / (n / 2.0))
    return normal_sf(z_critical(alpha) - (mu_A - mu_B) / se)

