"""Noise model and SNR measures for compressive measurements.

The measurement chain is y = A(x + n_s) + n_m with independent zero-mean
Gaussian input noise n_s (variance sigma_s^2, added before compression) and
measurement noise n_m (variance sigma_m^2, added after). The output SNR uses
the expected total noise power M * sigma0^2 in its denominator, where

    sigma0^2 = trace(A A^T) / M * sigma_s^2 + sigma_m^2,

never a realized noise draw. Recovered SNR benchmarks best-case recovery:
least squares on the true support (oracle assisted), estimated by trial
averaging.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import SensingMatrix, trace_gram
from .linalg import RandomStream, lstsq_factor, lstsq_solve, matvec
from .signals import SparseSignal

__all__ = [
    "NoiseSpec",
    "SnrValue",
    "sigma0_sq",
    "output_snr",
    "measure",
    "noise_covariance",
    "oracle_estimate",
    "recovered_snr",
    "rsnr_osnr_bounds",
]

DEFAULT_RECOVERY_TRIALS = 10_000


@dataclass(frozen=True)
class NoiseSpec:
    """Input-noise and measurement-noise variances (both >= 0)."""

    sigma_s_sq: float = 0.0
    sigma_m_sq: float = 0.0

    def __post_init__(self):
        for name in ("sigma_s_sq", "sigma_m_sq"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be finite and non-negative")

    @property
    def silent(self) -> bool:
        """True when both noise sources are off."""
        return self.sigma_s_sq == 0.0 and self.sigma_m_sq == 0.0


@dataclass(frozen=True)
class SnrValue:
    """Linear-scale SNR with its context ("output" or "recovered").

    Zero-noise instances carry eta = inf; serialize them through
    :meth:`serializable` so CSV/JSON consumers see a distinguished
    "unbounded" marker instead of a float infinity.
    """

    eta: float
    context: str

    def __post_init__(self):
        if self.eta < 0 or math.isnan(self.eta):
            raise ValueError("eta must be non-negative")
        if self.context not in ("output", "recovered"):
            raise ValueError(f"unknown SNR context {self.context!r}")

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.eta)

    def db(self) -> float:
        """10 log10(eta); -inf for eta == 0."""
        if self.eta == 0.0:
            return -math.inf
        return 10.0 * math.log10(self.eta)

    def serializable(self):
        return "unbounded" if self.unbounded else self.eta


def sigma0_sq(a: SensingMatrix, noise: NoiseSpec) -> float:
    """Per-measurement total noise variance trace(A A^T)/M * s_s^2 + s_m^2."""
    m = a.matrix.shape[0]
    return trace_gram(a) / m * noise.sigma_s_sq + noise.sigma_m_sq


def output_snr(a: SensingMatrix, x: SparseSignal, noise: NoiseSpec) -> SnrValue:
    """Compressed-domain SNR: ||A x||^2 over the expected total noise power.

    Deterministic given (A, x, noise): the denominator is the expectation
    M * sigma0^2, not a realized draw.
    """
    if x.n != a.n:
        raise ValueError(f"signal dimension {x.n} does not match matrix columns {a.n}")
    s0 = sigma0_sq(a, noise)
    if s0 == 0.0:
        raise ValueError("sigma0^2 is zero: output SNR undefined")
    if x.k == 0:
        return SnrValue(0.0, "output")
    d = a.matrix[:, list(x.support)] @ x.magnitudes
    beta = float(d @ d)
    return SnrValue(beta / (a.m * s0), "output")


def measure(a: SensingMatrix, x: SparseSignal, noise: NoiseSpec, stream: RandomStream) -> np.ndarray:
    """One noisy measurement y = A(x + n_s) + n_m.

    Input noise is drawn before measurement noise on the given stream.
    """
    if x.n != a.n:
        raise ValueError(f"signal dimension {x.n} does not match matrix columns {a.n}")
    signal = x.dense()
    if noise.sigma_s_sq > 0.0:
        signal = signal + math.sqrt(noise.sigma_s_sq) * stream.standard_normal(a.n)
    y = matvec(a.matrix, signal)
    if noise.sigma_m_sq > 0.0:
        y = y + math.sqrt(noise.sigma_m_sq) * stream.standard_normal(a.m)
    return y


def noise_covariance(a: SensingMatrix, noise: NoiseSpec) -> np.ndarray:
    """Covariance of the total noise A n_s + n_m: s_s^2 A A^T + s_m^2 I."""
    mat = a.matrix
    cov = noise.sigma_s_sq * (mat @ mat.T)
    cov = 0.5 * (cov + cov.T)  # gemm output symmetrized at round-off level
    cov[np.diag_indices_from(cov)] += noise.sigma_m_sq
    return cov


def oracle_estimate(a: SensingMatrix, support, y) -> np.ndarray:
    """Best-case recovery: least squares on the true support, zero elsewhere."""
    sup = [int(i) for i in support]
    if sup != sorted(set(sup)) or (sup and not 0 <= sup[0] <= sup[-1] < a.n):
        raise ValueError("support must be sorted, unique, and inside [0, N)")
    x_hat = np.zeros(a.n, dtype=np.float64)
    if sup:
        coeffs = lstsq_solve(lstsq_factor(a.matrix[:, sup]), np.asarray(y, dtype=np.float64))
        x_hat[sup] = coeffs
    return x_hat


def recovered_snr(
    a: SensingMatrix,
    x: SparseSignal,
    noise: NoiseSpec,
    n_trials: int = DEFAULT_RECOVERY_TRIALS,
    stream: RandomStream | None = None,
) -> SnrValue:
    """Oracle-recovery SNR ||x||^2 / mean ||x_hat - x||^2 over fresh-noise trials.

    Noiseless input has zero residual: reported as an unbounded SnrValue.
    Trial t draws its noise from ``stream.child(t)``; the residual-power
    accumulator uses compensated summation, so the averaged result is
    independent of evaluation order.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if noise.silent:
        return SnrValue(math.inf, "recovered")
    if stream is None:
        raise ValueError("recovered_snr requires a stream when noise is present")
    sup = list(x.support)
    factor = lstsq_factor(a.matrix[:, sup])
    x_s = x.magnitudes
    residual_powers = []
    for t in range(n_trials):
        y = measure(a, x, noise, stream.child(t))
        err = lstsq_solve(factor, y) - x_s
        residual_powers.append(float(err @ err))
    mean_residual = math.fsum(residual_powers) / n_trials
    if mean_residual == 0.0:
        return SnrValue(math.inf, "recovered")
    return SnrValue(x.power() / mean_residual, "recovered")


def rsnr_osnr_bounds(delta: float, m: int, k: int) -> tuple[float, float]:
    """Brackets on recovered-over-output SNR for oracle recovery.

    With isometry constant delta of order k:
        (1-delta)/(1+delta) * M/K  <=  ratio  <=  (1+delta)/(1-delta) * M/K.
    """
    if not 0.0 <= delta < 1.0:
        raise ValueError("delta must lie in [0, 1)")
    if k < 1 or m < 1:
        raise ValueError("need m >= 1 and k >= 1")
    base = m / k
    lo = (1.0 - delta) / (1.0 + delta) * base
    hi = (1.0 + delta) / (1.0 - delta) * base
    return lo, hi
