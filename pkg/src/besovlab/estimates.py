"""Rate fitting, two-sided equivalence checks and inequality margins."""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import gammaln

from .errors import InvalidParameterError, PreconditionViolation
from .norms import INF, BesovParams, besov_norm_lp, lp_norm


# ---------------------------------------------------------------------------
# slopes and ratios

@dataclass(frozen=True)
class RateFit:
    params: tuple
    values: tuple
    slope: float
    intercept: float
    max_rel_residual: float

    def predict(self, x):
        return math.exp(self.intercept) * np.asarray(x, dtype=float) ** self.slope


def fit_loglog_slope(params, values, min_points=4):
    """Least-squares line through ``(log param, log value)``.

    ``max_rel_residual`` is the largest ``|value / fit - 1|``.
    """
    x = np.asarray(params, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidParameterError("params and values must be equal-length sequences")
    if len(x) < min_points:
        raise InvalidParameterError(f"need at least {min_points} points, got {len(x)}")
    if np.any(np.diff(x) <= 0):
        raise InvalidParameterError("parameters must increase strictly")
    if np.any(x <= 0) or not np.all(np.isfinite(y)) or np.any(y <= 0):
        raise InvalidParameterError("log-log fit needs positive parameters and values")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = np.exp(ly - (slope * lx + intercept)) - 1.0
    return RateFit(tuple(x.tolist()), tuple(y.tolist()), float(slope), float(intercept),
                   float(np.max(np.abs(resid))))


@dataclass(frozen=True)
class TwoSidedCheck:
    passed: bool
    vmin: float
    vmax: float
    budget: float

    @property
    def ratio(self):
        return self.vmax / self.vmin


def check_two_sided(values, budget):
    """Pass iff ``max / min <= budget**2``: the values agree up to a factor ``budget``."""
    v = np.asarray(values, dtype=float)
    if v.size == 0 or np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise InvalidParameterError("two-sided check needs finite positive values")
    lo, hi = float(v.min()), float(v.max())
    return TwoSidedCheck(hi / lo <= budget ** 2 * (1 + 1e-12), lo, hi, float(budget))


# ---------------------------------------------------------------------------
# inequality margins

@dataclass(frozen=True)
class InequalityMargin:
    """``left <= constant * raw_right`` with ``margin = right / left``."""

    left: float
    raw_right: float
    constant: float = 1.0

    def __post_init__(self):
        if self.left < 0 or self.raw_right < 0 or not self.constant > 0:
            raise InvalidParameterError("inequality sides must be non-negative, constant positive")

    @property
    def right(self):
        return self.constant * self.raw_right

    @property
    def ratio(self):
        """Smallest constant for which this single instance holds."""
        if self.left == 0:
            return 0.0
        return math.inf if self.raw_right == 0 else self.left / self.raw_right

    @property
    def margin(self):
        if self.left == 0:
            return math.inf
        return self.right / self.left

    @property
    def passed(self):
        return self.margin >= 1.0

    def with_constant(self, constant):
        return InequalityMargin(self.left, self.raw_right, constant)


def fit_constant(margins):
    """Smallest single constant making every instance hold (at least 1)."""
    ratios = [m.ratio for m in margins]
    if not ratios:
        raise InvalidParameterError("cannot fit a constant to an empty corpus")
    return max(1.0, max(ratios))


def apply_constant(margins, constant):
    return [m.with_constant(constant) for m in margins]


def _recip(p):
    return 0.0 if p == INF else 1.0 / p


def verify_moser(f, g, s, q, p, p1, p2, p3, p4, constant=1.0):
    """``||fg||_{B^s_{p,q}}`` against ``||f||_{p1} ||g||_{B^s_{p2,q}} + ||g||_{p3} ||f||_{B^s_{p4,q}}``."""
    for a, b in ((p1, p2), (p3, p4)):
        if abs(_recip(a) + _recip(b) - _recip(p)) > 1e-12:
            raise InvalidParameterError(
                f"exponents violate 1/p = 1/p_a + 1/p_b: p={p}, p_a={a}, p_b={b}"
            )
    left = besov_norm_lp(f * g, BesovParams(s, p, q))
    right = (lp_norm(f, p1) * besov_norm_lp(g, BesovParams(s, p2, q))
             + lp_norm(g, p3) * besov_norm_lp(f, BesovParams(s, p4, q)))
    return InequalityMargin(left, right, constant)


def verify_algebra(f, g, s, p, q, constant=1.0):
    """``||fg||_{B^s} <= C ||f||_{B^s} ||g||_{B^s}``, asserted only for ``s > d/p``."""
    d = f.grid.d
    if not s > d * _recip(p):
        raise PreconditionViolation(f"algebra property needs s > d/p, got s={s}, d/p={d * _recip(p):g}")
    prm = BesovParams(s, p, q)
    left = besov_norm_lp(f * g, prm)
    right = besov_norm_lp(f, prm) * besov_norm_lp(g, prm)
    return InequalityMargin(left, right, constant)


def verify_interpolation(f, s1, s2, theta, p, q, constant=1.0):
    """``||f||_{B^s} <= C ||f||_{B^{s1}}^theta ||f||_{B^{s2}}^{1-theta}``, ``s = theta s1 + (1-theta) s2``."""
    if not 0 <= theta <= 1:
        raise InvalidParameterError(f"theta must lie in [0, 1], got {theta}")
    s = theta * s1 + (1 - theta) * s2
    left = besov_norm_lp(f, BesovParams(s, p, q))
    right = (besov_norm_lp(f, BesovParams(s1, p, q)) ** theta
             * besov_norm_lp(f, BesovParams(s2, p, q)) ** (1 - theta))
    return InequalityMargin(left, right, constant)


# ---------------------------------------------------------------------------
# direct-summation oracles

def cos_lp_norm(p):
    """``||cos||_p`` with respect to normalized measure on one period."""
    if p == INF:
        return 1.0
    log_mean = gammaln((p + 1) / 2) - 0.5 * math.log(math.pi) - gammaln(p / 2 + 1)
    return math.exp(log_mean / p)


def single_mode_besov(partition, kmag, s, p, q, amplitude=1.0, constant=0.0):
    """Besov norm of ``constant + amplitude * cos(k.x)`` on a torus, block by block.

    Only the zero block sees the constant; the cosine enters block ``j`` with
    weight ``phi_j(|k|)``.  Valid when ``|k| >= 2`` so the two never share a
    block, or when ``constant == 0``.
    """
    if constant and kmag < 2:
        raise InvalidParameterError("constant and mode share block 0")
    blocks = np.array([abs(amplitude) * partition.symbol(j, kmag) * cos_lp_norm(p)
                       for j in range(partition.J + 1)], dtype=float)
    blocks[0] += abs(constant)
    j = np.arange(partition.J + 1)
    w = 2.0 ** (j * s) * blocks
    if q == INF:
        return float(w.max())
    return float(np.sum(w ** q) ** (1.0 / q))


# ---------------------------------------------------------------------------
# decay rates

def _check_common(lam, s, sigma, delta):
    if not lam > 0:
        raise InvalidParameterError(f"lambda must be positive, got {lam}")
    if not 0 < delta < 1:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")


def rate_d1(lam, s, sigma, delta):
    """``lam^-(s+1-2delta-sigma) + lam^-(s-sigma+1-delta) + lam^-(2s+2delta-sigma)``."""
    _check_common(lam, s, sigma, delta)
    if not sigma > 1:
        raise InvalidParameterError(f"d1 needs sigma > 1, got {sigma}")
    return float(sum(lam ** e for e in d1_exponents(s, sigma, delta)))


def d1_exponents(s, sigma, delta):
    return (-(s + 1 - 2 * delta - sigma), -(s - sigma + 1 - delta), -(2 * s + 2 * delta - sigma))


def d1_dominant_exponent(s, sigma, delta):
    return max(d1_exponents(s, sigma, delta))


def _check_d2(s, sigma, delta, k):
    if not s > 2:
        raise InvalidParameterError(f"d2 needs s > 2, got {s}")
    if not 0 < delta < 0.5:
        raise InvalidParameterError(f"d2 needs 0 < delta < 1/2, got {delta}")
    if not 1 < sigma < min(2.0, s - 1):
        raise InvalidParameterError(f"d2 needs 1 < sigma < min(2, s-1), got sigma={sigma}")
    if not k > s:
        raise InvalidParameterError(f"d2 needs k > s, got k={k}")


def rate_d2(lam, s, sigma, delta, k):
    """``(lam^-(1-2delta) + lam^-(1-delta) + lam^-(s+2delta))^((k-s)/(k-sigma))``."""
    _check_common(lam, s, sigma, delta)
    _check_d2(s, sigma, delta, k)
    base = lam ** -(1 - 2 * delta) + lam ** -(1 - delta) + lam ** -(s + 2 * delta)
    return float(base ** ((k - s) / (k - sigma)))


def d2_dominant_exponent(s, sigma, delta, k):
    _check_d2(s, sigma, delta, k)
    return -(1 - 2 * delta) * (k - s) / (k - sigma)
