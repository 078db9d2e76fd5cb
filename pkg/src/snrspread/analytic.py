"""Closed-form SNR distributions, moments, and coefficients of variation.

For a Gaussian matrix the output SNR conditioned on the magnitude sequence is
Gamma distributed with shape M/2 and scale 2 ||x||^2 / (M^2 sigma0^2): the
compressed signal power is a scaled chi-squared variable with M degrees of
freedom. Its coefficient of variation, sqrt(2/M), depends on nothing but the
number of measurements.

Bernoulli and Rademacher matrices have no fixed-form SNR law for arbitrary
magnitudes (the per-measurement sums depend on the specific values), but
under equal magnitudes their first two moments close, giving the c_v
formulas exposed by :func:`analytic_cv`. Exact 2^K enumeration oracles for
those moments live here as well, so the closed forms are verifiable to
machine precision.

Power conventions are explicit because the two discrete ensembles use
different ones: :func:`bernoulli_dm2_moments` takes the *total* signal power
while :func:`rademacher_dm2_moments` takes the *per-nonzero* power. Mixing
them up silently is the failure mode the parameter names guard against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.special

from .ensembles import MatrixEnsemble
from .signals import BudgetExceededError

__all__ = [
    "GammaParams",
    "AnalyticMoments",
    "DiscretePmf",
    "gamma_pdf",
    "gamma_cdf",
    "gaussian_conditional_snr_dist",
    "analytic_cv",
    "bernoulli_dm_pmf",
    "bernoulli_dm2_moments",
    "rademacher_dm2_moments",
    "marginal_gaussian_moments",
]

PMF_ENUMERATION_LIMIT = 24  # 2^K atoms; beyond this enumeration is pointless


@dataclass(frozen=True)
class GammaParams:
    """Shape/scale parameterization: mean k*theta, variance k*theta^2."""

    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError("shape and scale must be positive")

    @property
    def mean(self) -> float:
        return self.shape * self.scale

    @property
    def variance(self) -> float:
        return self.shape * self.scale**2


@dataclass(frozen=True)
class AnalyticMoments:
    """Mean/variance/c_v of the output SNR under a named regime."""

    mean: float
    variance: float
    cv: float
    ensemble: str
    regime: str  # "conditional" (given magnitudes) or "marginal"


@dataclass(frozen=True, eq=False)
class DiscretePmf:
    """Finite discrete distribution as merged (value, probability) atoms."""

    values: np.ndarray = field(repr=False)
    probabilities: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        p = np.asarray(self.probabilities, dtype=np.float64)
        if v.shape != p.shape or v.ndim != 1:
            raise ValueError("values and probabilities must be matching 1-D arrays")
        if not np.all(np.isfinite(v)):
            raise ValueError("pmf values must be finite")
        if np.any(p < 0):
            raise ValueError("probabilities must be non-negative")
        if abs(math.fsum(p.tolist()) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1 within 1e-12")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probabilities", p)

    def moment(self, order: int) -> float:
        """Raw moment E[V^order], accumulated with compensated summation."""
        return math.fsum(p * v**order for v, p in zip(self.values, self.probabilities))

    def mean(self) -> float:
        return self.moment(1)

    def variance(self) -> float:
        mu = self.mean()
        return math.fsum(
            p * (v - mu) ** 2 for v, p in zip(self.values, self.probabilities)
        )


def _check_nonnegative(x: np.ndarray) -> None:
    if np.any(x < 0):
        raise ValueError("gamma distribution is supported on x >= 0")


def gamma_pdf(params: GammaParams, x):
    """Gamma density at ``x`` (scalar or array, x >= 0)."""
    xv = np.asarray(x, dtype=np.float64)
    _check_nonnegative(xv)
    k, theta = params.shape, params.scale
    log_norm = k * math.log(theta) + math.lgamma(k)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp((k - 1.0) * np.log(xv) - xv / theta - log_norm)
    if np.any(xv == 0.0):
        # limit at the origin depends on the shape
        at_zero = 0.0 if k > 1.0 else (1.0 / theta if k == 1.0 else np.inf)
        out = np.where(xv == 0.0, at_zero, out)
    return float(out) if np.isscalar(x) else out


def gamma_cdf(params: GammaParams, x):
    """Gamma CDF at ``x`` (regularized lower incomplete gamma)."""
    xv = np.asarray(x, dtype=np.float64)
    _check_nonnegative(xv)
    out = scipy.special.gammainc(params.shape, xv / params.scale)
    return float(out) if np.isscalar(x) else out


def gaussian_conditional_snr_dist(m: int, x_norm_sq: float, sigma0_sq: float) -> GammaParams:
    """Output-SNR law for a Gaussian N(0, 1/M) matrix, given the magnitudes.

    The compressed signal power is ||x||^2/M times a chi-squared variable
    with M degrees of freedom, so the SNR is Gamma with shape M/2 and scale
    2 ||x||^2 / (M^2 sigma0^2). Implied mean: ||x||^2 / (M sigma0^2);
    variance over mean squared is 2/M regardless of the magnitudes.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not (x_norm_sq > 0 and sigma0_sq > 0):
        raise ValueError("x_norm_sq and sigma0_sq must be positive")
    return GammaParams(shape=m / 2.0, scale=2.0 * x_norm_sq / (m**2 * sigma0_sq))


def analytic_cv(ensemble, m: int, k: int | None = None, p: float | None = None) -> float:
    """Coefficient of variation of the output SNR for the named ensemble.

    ``ensemble`` is an ensemble kind string or a MatrixEnsemble (whose p is
    used unless overridden). The Gaussian value sqrt(2/M) holds for any
    magnitudes; the Bernoulli and Rademacher closed forms assume equal
    magnitudes and additionally need ``k`` (and ``p`` for Bernoulli).
    """
    if isinstance(ensemble, MatrixEnsemble):
        if p is None:
            p = ensemble.p
        kind = ensemble.kind
    else:
        kind = str(ensemble)
    if m < 1:
        raise ValueError("m must be >= 1")

    if kind == "gaussian":
        return math.sqrt(2.0 / m)
    if kind == "rademacher":
        if k is None or k < 1:
            raise ValueError("rademacher c_v requires k >= 1")
        return math.sqrt(2.0 * (k - 1) / (m * k))
    if kind == "bernoulli":
        if k is None or k < 1:
            raise ValueError("bernoulli c_v requires k >= 1")
        if p is None:
            raise ValueError("bernoulli c_v requires p")
        if not 0.0 < p < 1.0:
            raise ValueError("p must lie strictly inside (0, 1)")
        num = 1.0 + 2.0 * p * (k - 1) * ((2 * k - 3) * p + 3.0)
        den = k * ((k - 1) * p + 1.0) ** 2 * p
        return math.sqrt(num * (1.0 - p) / (m * den))
    raise ValueError(f"no analytic c_v for ensemble kind {kind!r}")


def bernoulli_dm_pmf(k: int, p: float, magnitudes) -> DiscretePmf:
    """Exact law of one measurement's signal sum for a {0,1} matrix row.

    Enumerates all 2^k on/off patterns of the k magnitudes; equal-value atoms
    are merged. Budget capped at k <= 24.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > PMF_ENUMERATION_LIMIT:
        raise BudgetExceededError(
            f"2^{k} patterns exceed the enumeration limit 2^{PMF_ENUMERATION_LIMIT}"
        )
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    mags = np.asarray(magnitudes, dtype=np.float64)
    if mags.shape != (k,):
        raise ValueError(f"need exactly {k} magnitudes")

    codes = np.arange(2**k, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(k)) & 1).astype(np.float64)
    values = bits @ mags
    ones = bits.sum(axis=1)
    probs = p**ones * (1.0 - p) ** (k - ones)

    uniq, inverse = np.unique(values, return_inverse=True)
    merged = np.bincount(inverse, weights=probs, minlength=uniq.shape[0])
    return DiscretePmf(uniq, merged)


def bernoulli_dm2_moments(k: int, p: float, total_power: float) -> tuple[float, float]:
    """Mean and variance of the squared per-measurement sum, {0,1} entries.

    Assumes equal magnitudes sqrt(total_power / k). total_power is the whole
    signal's squared norm.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    if not total_power > 0:
        raise ValueError("total_power must be positive")
    mean = ((k - 1) * p + 1.0) * p * total_power
    variance = (
        (1.0 + 2.0 * p * (k - 1) * ((2 * k - 3) * p + 3.0))
        / k
        * (1.0 - p)
        * p
        * total_power**2
    )
    return mean, variance


def rademacher_dm2_moments(k: int, per_entry_power: float) -> tuple[float, float]:
    """Mean and variance of the squared per-measurement sum, +-1 entries.

    Assumes equal magnitudes with x_i^2 = per_entry_power for every nonzero
    (per-nonzero power, NOT the total): mean k*c, variance 2k(k-1)c^2.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not per_entry_power > 0:
        raise ValueError("per_entry_power must be positive")
    mean = k * per_entry_power
    variance = 2.0 * k * (k - 1) * per_entry_power**2
    return mean, variance


def marginal_gaussian_moments(m: int, total_power: float, sigma0_sq: float) -> AnalyticMoments:
    """Support-and-magnitude marginal SNR moments for a Gaussian matrix.

    Mean: total_power / (M sigma0^2), the ratio of total signal power to
    total system noise power; valid for every magnitude model normalized to
    E{||x||^2} = total_power, since the conditional law depends on the
    magnitudes only through ||x||^2. The variance (2/M) mean^2 (hence c_v =
    sqrt(2/M)) is exact for the equal-magnitude model; random magnitude
    models add a ||x||^2-spread term on top, which this package estimates
    empirically instead of approximating.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not (total_power > 0 and sigma0_sq > 0):
        raise ValueError("total_power and sigma0_sq must be positive")
    mean = total_power / (m * sigma0_sq)
    variance = 2.0 / m * mean**2
    return AnalyticMoments(
        mean=mean,
        variance=variance,
        cv=math.sqrt(2.0 / m),
        ensemble="gaussian",
        regime="marginal",
    )
