"""Monte Carlo harness: empirical SNR distributions and sweep experiments.

Two sweep experiments are provided on top of the per-matrix machinery:

* :func:`rmse_sweep` -- how far the per-matrix empirical coefficient of
  variation sits from the closed form, as a function of the ambient
  dimension N (equal magnitudes, fixed K).
* :func:`cv_vs_k_sweep` -- the measured coefficient of variation, scaled by
  sqrt(M), as a function of sparsity K for each (ensemble, magnitude model)
  pair. Each realization pairs one fresh matrix with one fresh magnitude
  sequence and takes the spread over supports with that sequence held fixed;
  pooling fresh magnitudes per support would fold the magnitude-power spread
  into the statistic and is exactly what :func:`marginal_snr_stats` is for.

Determinism contract: every work unit derives its own stream from
(master_seed, structural indices), per-sample reductions sort before
accumulating, and cross-realization reductions use compensated summation.
Results are therefore byte-identical for any thread count and any execution
order.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .analytic import GammaParams, analytic_cv, gamma_cdf
from .ensembles import MatrixEnsemble, SensingMatrix, draw_matrix
from .linalg import RandomStream
from .signals import (
    DEFAULT_ENUMERATION_BUDGET,
    MagnitudeModel,
    draw_magnitudes,
    enumerate_supports,
    sample_supports,
    support_count,
)
from .snr import NoiseSpec, sigma0_sq

__all__ = [
    "DEFAULT_SUPPORT_SAMPLES",
    "DEFAULT_NOISE",
    "SnrStats",
    "ExperimentConfig",
    "conditional_snr_samples",
    "marginal_snr_stats",
    "RmseCell",
    "RmseSweepResult",
    "rmse_sweep",
    "CvCell",
    "CvSweepResult",
    "cv_vs_k_sweep",
    "GammaFitResult",
    "gamma_fit_check",
    "write_rmse_artifacts",
    "write_cv_artifacts",
]

DEFAULT_SUPPORT_SAMPLES = 2000

# Unit measurement noise: the coefficient of variation is scale free, any
# positive noise level works for the sweeps.
DEFAULT_NOISE = NoiseSpec(sigma_s_sq=0.0, sigma_m_sq=1.0)


@dataclass(frozen=True, eq=False)
class SnrStats:
    """Sample statistics of a set of output-SNR values."""

    n_samples: int
    mean: float
    variance: float  # unbiased
    cv_empirical: float
    histogram: tuple[np.ndarray, np.ndarray] | None = None  # (bin edges, counts)
    samples: np.ndarray | None = field(default=None, repr=False)


def _stats_from_samples(
    eta: np.ndarray, keep_samples: bool = False, bins: int | None = None
) -> SnrStats:
    """Reduce samples order-insensitively (sorted before accumulation)."""
    ordered = np.sort(eta)
    n = ordered.size
    mean = float(np.mean(ordered))
    variance = float(np.var(ordered, ddof=1)) if n > 1 else 0.0
    cv = math.sqrt(variance) / mean if mean > 0 else math.nan
    histogram = None
    if bins is not None:
        counts, edges = np.histogram(ordered, bins=bins)
        histogram = (edges, counts)
    return SnrStats(
        n_samples=n,
        mean=mean,
        variance=variance,
        cv_empirical=cv,
        histogram=histogram,
        samples=eta.copy() if keep_samples else None,
    )


def _supports_array(n, k, supports, stream, budget) -> np.ndarray:
    """Resolve a support source: "exhaustive", a sample count, or an array."""
    if isinstance(supports, str):
        if supports != "exhaustive":
            raise ValueError(f"unknown support source {supports!r}")
        total = support_count(n, k)
        return np.fromiter(
            enumerate_supports(n, k, budget=budget),
            dtype=np.dtype((np.int64, k)),
            count=total,
        )
    if isinstance(supports, (int, np.integer)):
        if stream is None:
            raise ValueError("sampled supports require a stream")
        return sample_supports(n, k, int(supports), stream)
    arr = np.asarray(supports, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != k:
        raise ValueError(f"explicit supports must have shape (count, {k})")
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        raise ValueError("support indices out of range")
    return arr


def _eta_for_supports(
    matrix: np.ndarray, supports: np.ndarray, magnitudes: np.ndarray, s0: float
) -> np.ndarray:
    """Output SNR for one magnitude sequence placed on each support row."""
    m = matrix.shape[0]
    cols_t = np.ascontiguousarray(matrix.T)
    count = supports.shape[0]
    out = np.empty(count, dtype=np.float64)
    chunk = max(1, (1 << 22) // max(1, supports.shape[1] * m))  # ~32 MB gathers
    for lo in range(0, count, chunk):
        sub = cols_t[supports[lo : lo + chunk]]  # (chunk, K, M)
        d = np.einsum("skm,k->sm", sub, magnitudes)
        out[lo : lo + chunk] = np.einsum("sm,sm->s", d, d)
    out /= m * s0
    return out


def _pair_cv_exhaustive(matrix: np.ndarray) -> float:
    """Empirical c_v over ALL C(N,2) supports for K=2, equal magnitudes.

    With equal magnitudes c on both nonzeros, the compressed power of support
    {i, j} is c^2 (q_i + q_j + 2 G_ij) with q the squared column norms and
    G = A^T A, so every pair statistic reduces to column-norm and Gram power
    sums; the N x N Gram itself is never formed (its Frobenius norm equals
    that of the M x M row Gram). The c_v is invariant to c, M and the noise
    level, so none of them appear.
    """
    n = matrix.shape[1]
    if n < 2:
        raise ValueError("need at least two columns")
    q = np.einsum("mi,mi->i", matrix, matrix)  # squared column norms
    col_dot = matrix @ np.ones(n)
    row_sums = matrix.T @ col_dot  # r_i = sum_j G_ij
    trace = float(q.sum())
    total = float(col_dot @ col_dot)  # sum_ij G_ij
    sum_q_sq = float(q @ q)
    sum_q_r = float(q @ row_sums)
    gram_rows = matrix @ matrix.T
    frob_sq = float(np.einsum("ab,ab->", gram_rows, gram_rows))  # ||G||_F^2

    n_pairs = n * (n - 1) // 2
    sum_v = (n - 1) * trace + (total - trace)
    sum_v_sq = (
        (n - 2) * sum_q_sq
        + trace * trace
        + 4.0 * (sum_q_r - sum_q_sq)
        + 2.0 * (frob_sq - sum_q_sq)
    )
    mean = sum_v / n_pairs
    var = (sum_v_sq - n_pairs * mean * mean) / (n_pairs - 1)
    return math.sqrt(max(var, 0.0)) / mean


def conditional_snr_samples(
    a: SensingMatrix,
    magnitudes,
    noise: NoiseSpec,
    supports="exhaustive",
    stream: RandomStream | None = None,
    keep_samples: bool = False,
    bins: int | None = None,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> SnrStats:
    """Spread of the output SNR over supports for one fixed magnitude sequence.

    ``supports`` is "exhaustive" (lexicographic, budget capped), a sample
    count (uniform supports drawn from ``stream``), or an explicit (count, K)
    index array. Magnitude order is preserved on the sorted indices of each
    support. With ``keep_samples`` the per-support values are retained in
    source order.
    """
    mags = np.asarray(magnitudes, dtype=np.float64)
    if mags.ndim != 1 or mags.size < 1:
        raise ValueError("magnitudes must be a non-empty 1-D array")
    s0 = sigma0_sq(a, noise)
    if s0 == 0.0:
        raise ValueError("sigma0^2 is zero: output SNR undefined")
    sup = _supports_array(a.n, mags.size, supports, stream, budget)
    eta = _eta_for_supports(a.matrix, sup, mags, s0)
    return _stats_from_samples(eta, keep_samples=keep_samples, bins=bins)


def marginal_snr_stats(
    a: SensingMatrix,
    model: MagnitudeModel,
    k: int,
    n_magnitude_draws: int,
    noise: NoiseSpec,
    supports="exhaustive",
    stream: RandomStream | None = None,
    keep_samples: bool = False,
    bins: int | None = None,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> SnrStats:
    """Output-SNR stats pooled across magnitude draws and supports.

    Approximates the magnitude-marginal SNR law for a fixed matrix. The
    equal-magnitude model is a degenerate marginalization: it reduces to a
    single :func:`conditional_snr_samples` call on the same stream.
    """
    if n_magnitude_draws < 1:
        raise ValueError("n_magnitude_draws must be >= 1")
    if model.kind == "equal":
        return conditional_snr_samples(
            a,
            draw_magnitudes(model, k, stream or RandomStream(0)),
            noise,
            supports=supports,
            stream=stream,
            keep_samples=keep_samples,
            bins=bins,
            budget=budget,
        )
    if stream is None:
        raise ValueError("random magnitude models require a stream")
    s0 = sigma0_sq(a, noise)
    if s0 == 0.0:
        raise ValueError("sigma0^2 is zero: output SNR undefined")
    pools = []
    for d in range(n_magnitude_draws):
        mags = draw_magnitudes(model, k, stream.child("magnitudes", d))
        sup = _supports_array(a.n, k, supports, stream.child("supports", d), budget)
        pools.append(_eta_for_supports(a.matrix, sup, mags, s0))
    eta = np.concatenate(pools)
    return _stats_from_samples(eta, keep_samples=keep_samples, bins=bins)


# ---------------------------------------------------------------------------
# Sweep experiments
# ---------------------------------------------------------------------------


def _as_tuple(value) -> tuple:
    if isinstance(value, (list, tuple, np.ndarray)):
        return tuple(value)
    return (value,)


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep configuration. Scalar fields may carry lists where a sweep axis
    is expected (N for the RMSE sweep, K for the c_v sweep)."""

    n: int | Sequence[int]
    rho: float | Sequence[float]
    k: int | Sequence[int]
    ensembles: Sequence[MatrixEnsemble]
    magnitude_models: Sequence[MagnitudeModel]
    n_matrix_realizations: int
    n_support_samples: int | str = DEFAULT_SUPPORT_SAMPLES
    n_magnitude_draws: int = 1
    noise: NoiseSpec = DEFAULT_NOISE
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(int(v) for v in _as_tuple(self.n)))
        object.__setattr__(self, "rho", tuple(float(v) for v in _as_tuple(self.rho)))
        object.__setattr__(self, "k", tuple(int(v) for v in _as_tuple(self.k)))
        object.__setattr__(self, "ensembles", tuple(self.ensembles))
        object.__setattr__(self, "magnitude_models", tuple(self.magnitude_models))
        for v in self.n:
            if v < 1:
                raise ValueError("n must be >= 1")
        for r in self.rho:
            if not 0.0 < r <= 1.0:
                raise ValueError("rho must lie in (0, 1]")
        for v in self.k:
            if v < 1:
                raise ValueError("k must be >= 1")
        if not self.ensembles:
            raise ValueError("at least one ensemble required")
        if not self.magnitude_models:
            raise ValueError("at least one magnitude model required")
        if self.n_matrix_realizations < 1:
            raise ValueError("n_matrix_realizations must be >= 1")
        if isinstance(self.n_support_samples, str):
            if self.n_support_samples != "exhaustive":
                raise ValueError("n_support_samples must be an int or 'exhaustive'")
        elif self.n_support_samples < 1:
            raise ValueError("n_support_samples must be >= 1")
        if self.n_magnitude_draws < 1:
            raise ValueError("n_magnitude_draws must be >= 1")


def measurement_count(n: int, rho: float) -> int:
    """M = round(rho * N), at least 1."""
    m = int(round(rho * n))
    if m < 1:
        raise ValueError(f"rho={rho} with N={n} yields no measurements")
    return m


def _single(values: tuple, name: str):
    if len(values) != 1:
        raise ValueError(f"this sweep needs exactly one {name}, got {values}")
    return values[0]


def _run_ordered(worker, tasks, threads: int) -> list:
    """Map worker over tasks, preserving task order in the result list."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(worker, tasks))
    return [worker(task) for task in tasks]


def _realization_cv(
    ensemble: MatrixEnsemble,
    model: MagnitudeModel,
    k: int,
    m: int,
    n: int,
    support_samples,
    noise: NoiseSpec,
    stream: RandomStream,
    budget: int,
) -> float:
    """Empirical c_v over supports for one fresh (matrix, magnitudes) pair."""
    a = draw_matrix(ensemble, m, n, stream.child("matrix"))
    mags = draw_magnitudes(model, k, stream.child("magnitudes"))
    if support_samples == "exhaustive" and k == 2 and model.kind == "equal":
        return _pair_cv_exhaustive(a.matrix)
    s0 = sigma0_sq(a, noise)
    sup = _supports_array(n, k, support_samples, stream.child("supports"), budget)
    eta = _eta_for_supports(a.matrix, sup, mags, s0)
    return _stats_from_samples(eta).cv_empirical


def _ensemble_slug(ensemble: MatrixEnsemble) -> str:
    if ensemble.kind == "bernoulli":
        return f"bernoulli_p{ensemble.p:g}"
    return ensemble.kind


@dataclass(frozen=True)
class RmseCell:
    ensemble: MatrixEnsemble
    rho: float
    n: int
    m: int
    k: int
    n_realizations: int
    cv_analytic: float
    rmse_norm: float  # headline: RMS of (cv_e - cv)/cv over realizations
    mean_abs_norm: float  # companion: mean |cv_e - cv|/cv


@dataclass(frozen=True)
class RmseSweepResult:
    k: int
    n_values: tuple[int, ...]
    rhos: tuple[float, ...]
    master_seed: int
    cells: tuple[RmseCell, ...]

    def curve(self, ensemble: MatrixEnsemble, rho: float, variant: str = "rms"):
        """(N values, errors) for one ensemble/compression pair."""
        pts = sorted(
            (c.n, c.rmse_norm if variant == "rms" else c.mean_abs_norm)
            for c in self.cells
            if c.ensemble == ensemble and c.rho == rho
        )
        return [p[0] for p in pts], [p[1] for p in pts]


def rmse_sweep(
    config: ExperimentConfig,
    threads: int = 1,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> RmseSweepResult:
    """Relative error of the empirical c_v against the closed form, per N.

    Per (ensemble, rho, N) cell: draw ``n_matrix_realizations`` matrices, get
    each one's empirical c_v over supports under equal magnitudes, and reduce
    the per-matrix relative errors to their RMS (headline) and mean-absolute
    (companion) values. Equal magnitudes are required: that is the regime the
    Bernoulli/Rademacher closed forms hold in.
    """
    k = _single(config.k, "k")
    model = _single(config.magnitude_models, "magnitude model")
    if model.kind != "equal":
        raise ValueError("rmse_sweep requires the equal-magnitude model")
    reals = config.n_matrix_realizations

    cells_meta = [
        (ei, ens, rho, n)
        for ei, ens in enumerate(config.ensembles)
        for rho in config.rho
        for n in config.n
    ]
    tasks = [
        (ei, ens, rho, n, r) for (ei, ens, rho, n) in cells_meta for r in range(reals)
    ]

    def worker(task) -> float:
        ei, ens, rho, n, r = task
        m = measurement_count(n, rho)
        stream = RandomStream(
            config.master_seed, ("rmse_sweep", ei, ens.kind, str(rho), n, r)
        )
        cv_e = _realization_cv(
            ens, model, k, m, n, config.n_support_samples, config.noise, stream, budget
        )
        cv_a = analytic_cv(ens, m, k=k)
        return (cv_e - cv_a) / cv_a

    results = _run_ordered(worker, tasks, threads)

    cells = []
    for idx, (ei, ens, rho, n) in enumerate(cells_meta):
        rel = results[idx * reals : (idx + 1) * reals]
        m = measurement_count(n, rho)
        cells.append(
            RmseCell(
                ensemble=ens,
                rho=rho,
                n=n,
                m=m,
                k=k,
                n_realizations=reals,
                cv_analytic=analytic_cv(ens, m, k=k),
                rmse_norm=math.sqrt(math.fsum(r * r for r in rel) / reals),
                mean_abs_norm=math.fsum(abs(r) for r in rel) / reals,
            )
        )
    return RmseSweepResult(
        k=k,
        n_values=config.n,
        rhos=config.rho,
        master_seed=config.master_seed,
        cells=tuple(cells),
    )


@dataclass(frozen=True)
class CvCell:
    ensemble: MatrixEnsemble
    model: MagnitudeModel
    k: int
    m: int
    n_realizations: int
    mean_cv_scaled: float  # mean over realizations of c_v^e, times sqrt(M)
    std_cv_scaled: float  # spread of c_v^e across realizations, times sqrt(M)


@dataclass(frozen=True)
class CvSweepResult:
    n: int
    rho: float
    m: int
    k_values: tuple[int, ...]
    master_seed: int
    cells: tuple[CvCell, ...]

    def curve(self, ensemble: MatrixEnsemble, model: MagnitudeModel):
        """(K values, mean scaled c_v) for one ensemble/model pair."""
        pts = sorted(
            (c.k, c.mean_cv_scaled)
            for c in self.cells
            if c.ensemble == ensemble and c.model == model
        )
        return [p[0] for p in pts], [p[1] for p in pts]


def cv_vs_k_sweep(
    config: ExperimentConfig,
    threads: int = 1,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> CvSweepResult:
    """Mean empirical c_v, scaled by sqrt(M), per (K, ensemble, model) cell.

    Each realization pairs one matrix draw with one magnitude draw and takes
    the SNR spread over supports with those magnitudes fixed; the cell value
    averages the per-realization c_v and scales by sqrt(M).
    """
    n = _single(config.n, "n")
    rho = _single(config.rho, "rho")
    m = measurement_count(n, rho)
    reals = config.n_matrix_realizations
    sqrt_m = math.sqrt(m)

    cells_meta = [
        (ei, ens, mi, model, kv)
        for ei, ens in enumerate(config.ensembles)
        for mi, model in enumerate(config.magnitude_models)
        for kv in config.k
    ]
    tasks = [
        (ei, ens, mi, model, kv, r)
        for (ei, ens, mi, model, kv) in cells_meta
        for r in range(reals)
    ]

    def worker(task) -> float:
        ei, ens, mi, model, kv, r = task
        stream = RandomStream(
            config.master_seed,
            ("cv_vs_k", ei, ens.kind, mi, model.kind, kv, r),
        )
        return _realization_cv(
            ens, model, kv, m, n, config.n_support_samples, config.noise, stream, budget
        )

    results = _run_ordered(worker, tasks, threads)

    cells = []
    for idx, (ei, ens, mi, model, kv) in enumerate(cells_meta):
        cvs = results[idx * reals : (idx + 1) * reals]
        mean_cv = math.fsum(cvs) / reals
        if reals > 1:
            var_cv = math.fsum((c - mean_cv) ** 2 for c in cvs) / (reals - 1)
        else:
            var_cv = 0.0
        cells.append(
            CvCell(
                ensemble=ens,
                model=model,
                k=kv,
                m=m,
                n_realizations=reals,
                mean_cv_scaled=mean_cv * sqrt_m,
                std_cv_scaled=math.sqrt(var_cv) * sqrt_m,
            )
        )
    return CvSweepResult(
        n=n,
        rho=rho,
        m=m,
        k_values=config.k,
        master_seed=config.master_seed,
        cells=tuple(cells),
    )


# ---------------------------------------------------------------------------
# Distribution fit check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaFitResult:
    """Empirical-vs-Gamma agreement: sup-norm CDF distance plus moment errors."""

    distance: float
    mean_rel_err: float
    variance_rel_err: float
    n_samples: int


def gamma_fit_check(samples, params: GammaParams) -> GammaFitResult:
    """Sup-norm distance between the empirical CDF and the Gamma CDF.

    Also reports the relative errors of the first two sample moments against
    the Gamma's mean and variance. Requires at least 100 samples.
    """
    s = np.sort(np.asarray(samples, dtype=np.float64))
    n = s.size
    if n < 100:
        raise ValueError("gamma_fit_check needs at least 100 samples")
    f = gamma_cdf(params, s)
    grid = np.arange(1, n + 1) / n
    distance = float(max(np.max(grid - f), np.max(f - (grid - 1.0 / n))))
    mean = float(np.mean(s))
    variance = float(np.var(s, ddof=1))
    return GammaFitResult(
        distance=distance,
        mean_rel_err=abs(mean - params.mean) / params.mean,
        variance_rel_err=abs(variance - params.variance) / params.variance,
        n_samples=n,
    )


# ---------------------------------------------------------------------------
# Artifact emission: two-column curve files plus a JSON manifest
# ---------------------------------------------------------------------------


def _write_two_column(path: Path, xs, ys) -> None:
    lines = [f"{float(x):.17g} {float(y):.17g}" for x, y in zip(xs, ys)]
    path.write_text("\n".join(lines) + "\n")


def write_rmse_artifacts(result: RmseSweepResult, outdir) -> list[Path]:
    """One "N error" curve file per (ensemble, rho, variant) plus a manifest."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    manifest_curves = []
    seen_ensembles: list[MatrixEnsemble] = []
    for cell in result.cells:
        if cell.ensemble not in seen_ensembles:
            seen_ensembles.append(cell.ensemble)
    for ens in seen_ensembles:
        for rho in result.rhos:
            for variant in ("rms", "mean_abs"):
                suffix = "" if variant == "rms" else "_meanabs"
                name = f"rmse_{_ensemble_slug(ens)}_rho{rho:g}{suffix}.txt"
                xs, ys = result.curve(ens, rho, variant=variant)
                path = out / name
                _write_two_column(path, xs, ys)
                written.append(path)
                manifest_curves.append(
                    {
                        "file": name,
                        "ensemble": {"kind": ens.kind, **ens.params()},
                        "rho": rho,
                        "variant": variant,
                        "x_axis": "N",
                    }
                )
    manifest = {
        "sweep": "rmse_vs_n",
        "k": result.k,
        "n_values": list(result.n_values),
        "rhos": list(result.rhos),
        "master_seed": result.master_seed,
        "curves": manifest_curves,
    }
    manifest_path = out / "rmse_curves.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    written.append(manifest_path)
    return written


def write_cv_artifacts(result: CvSweepResult, outdir) -> list[Path]:
    """One "K scaled-c_v" curve file per (ensemble, model) plus a manifest."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    manifest_curves = []
    seen: list[tuple[MatrixEnsemble, MagnitudeModel]] = []
    for cell in result.cells:
        key = (cell.ensemble, cell.model)
        if key not in seen:
            seen.append(key)
    for ens, model in seen:
        name = f"cv_vs_k_{_ensemble_slug(ens)}_{model.kind}.txt"
        xs, ys = result.curve(ens, model)
        path = out / name
        _write_two_column(path, xs, ys)
        written.append(path)
        manifest_curves.append(
            {
                "file": name,
                "ensemble": {"kind": ens.kind, **ens.params()},
                "magnitude_model": model.kind,
                "x_axis": "K",
            }
        )
    manifest = {
        "sweep": "cv_vs_k",
        "n": result.n,
        "rho": result.rho,
        "m": result.m,
        "k_values": list(result.k_values),
        "master_seed": result.master_seed,
        "curves": manifest_curves,
    }
    manifest_path = out / "cv_curves.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    written.append(manifest_path)
    return written
