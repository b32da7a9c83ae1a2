"""Admissible radius functions r(x) = lambda * dist(x, boundary)^beta.

The parameter system (alpha, epsilon, beta, lambda) must satisfy

    0 <= alpha < 1
    0 < epsilon < 1 - alpha
    1 <= beta < log(1/alpha) / log(1/(1-epsilon))   (no upper bound if alpha = 0)
    0 < lambda < min(epsilon, 1/beta) * (2/diam)^(beta-1)

which together guarantee that r is 1-Lipschitz, that every ball B(x, r(x))
stays inside the domain, and that points of the ball keep at least a
(1-epsilon) fraction of the center's boundary distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Containment, Domain


@dataclass(frozen=True)
class RadiusParams:
    alpha: float
    epsilon: float
    beta: float
    lam: float

    def __post_init__(self):
        for name in ("alpha", "epsilon", "beta", "lam"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")


@dataclass(frozen=True)
class ParamViolation:
    code: str          # alpha_range | epsilon_range | beta_range | lambda_range
    message: str
    bound: float | None


def alpha_from_p(p: float, d: int = 2) -> float:
    """Averaging weight for the p-Laplacian regime: (p-2)/(d+p), p >= 2."""
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return (p - 2.0) / (d + p)


def beta_max(alpha: float, epsilon: float) -> float | None:
    """Strict upper bound for beta; None means unbounded (alpha = 0 case).

    The unbounded case is an explicit sentinel, never a large float, so no
    comparison against it can overflow.
    """
    if not (0 <= alpha < 1):
        raise ValueError(f"alpha must be in [0, 1), got {alpha}")
    if not (0 < epsilon < 1 - alpha):
        raise ValueError(f"epsilon must be in (0, 1-alpha), got {epsilon}")
    if alpha == 0:
        return None
    return math.log(1.0 / alpha) / math.log(1.0 / (1.0 - epsilon))


def lambda_max(domain: Domain, epsilon: float, beta: float) -> float:
    """Strict upper bound for lambda: min(eps, 1/beta) * (2/diam)^(beta-1)."""
    if beta < 1:
        raise ValueError(f"beta must be >= 1, got {beta}")
    if not (0 < epsilon < 1):
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    return min(epsilon, 1.0 / beta) * (2.0 / domain.diameter()) ** (beta - 1.0)


def lambda_lipschitz(domain: Domain, beta: float) -> float:
    """Normalizer (1/beta) * (2/diam)^(beta-1).

    With lambda at or below this value, lambda * dist^beta is 1-Lipschitz.
    """
    if beta < 1:
        raise ValueError(f"beta must be >= 1, got {beta}")
    return (1.0 / beta) * (2.0 / domain.diameter()) ** (beta - 1.0)


def validate_params(params: RadiusParams, domain: Domain) -> list[ParamViolation]:
    """Every violated constraint, each with the offending bound.

    Violations are data, not failures: an empty list means the parameter
    system is admissible for this domain.
    """
    out: list[ParamViolation] = []
    a, e, b, lam = params.alpha, params.epsilon, params.beta, params.lam
    if not (0 <= a < 1):
        out.append(ParamViolation("alpha_range", f"alpha={a} outside [0, 1)", None))
        return out  # remaining bounds are meaningless without a valid alpha
    if not (0 < e < 1 - a):
        out.append(ParamViolation(
            "epsilon_range", f"epsilon={e} outside (0, {1 - a})", 1 - a))
        return out
    if b < 1:
        out.append(ParamViolation("beta_range", f"beta={b} below 1", 1.0))
    else:
        bmax = beta_max(a, e)
        if bmax is not None and b >= bmax:
            out.append(ParamViolation(
                "beta_range", f"beta={b} >= beta_max={bmax:.6g}", bmax))
    if b >= 1:
        lmax = lambda_max(domain, e, b)
        if not (0 < lam < lmax):
            out.append(ParamViolation(
                "lambda_range", f"lambda={lam} outside (0, {lmax:.6g})", lmax))
    elif not lam > 0:
        out.append(ParamViolation("lambda_range", f"lambda={lam} not positive", None))
    return out


def default_params(domain: Domain, alpha: float,
                   epsilon: float | None = None,
                   beta: float | None = None,
                   lam: float | None = None) -> RadiusParams:
    """Fill unspecified parameters with safe mid-range defaults.

    epsilon defaults to (1-alpha)/2 and beta to 1; lambda defaults to 90% of
    min(lambda_max, lambda_lipschitz), keeping strict inequality in the
    lambda bound and the 1-Lipschitz guarantee with margin against rounding.
    """
    if not (0 <= alpha < 1):
        raise ValueError(f"alpha must be in [0, 1), got {alpha}")
    e = (1.0 - alpha) / 2.0 if epsilon is None else float(epsilon)
    b = 1.0 if beta is None else float(beta)
    if lam is None:
        lam = 0.9 * min(lambda_max(domain, e, b), lambda_lipschitz(domain, b))
    params = RadiusParams(alpha=alpha, epsilon=e, beta=b, lam=float(lam))
    violations = validate_params(params, domain)
    if violations:
        raise ValueError("invalid radius parameters: "
                         + "; ".join(v.message for v in violations))
    return params


def radius_at(params: RadiusParams, domain: Domain, x) -> float:
    """r(x) = lambda * dist(x, boundary)^beta for an interior point."""
    if domain.contains(x) is not Containment.INTERIOR:
        raise ValueError(f"radius undefined at non-interior point {x}")
    d = domain.dist_to_boundary(x)
    return params.lam * d ** params.beta


def radius_many(params: RadiusParams, dists: np.ndarray) -> np.ndarray:
    """Vectorised radius from precomputed boundary distances."""
    dists = np.asarray(dists, dtype=float)
    if params.beta == 1.0:
        return params.lam * dists
    return params.lam * dists ** params.beta
