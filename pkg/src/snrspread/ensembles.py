"""Sensing-matrix ensembles and matrix fitness metrics.

Four ensembles are supported:

* gaussian        -- i.i.d. N(0, variance), variance defaulting to 1/M
* bernoulli       -- i.i.d. {0, 1} with success probability p (unscaled on
                     purpose: SNR normalization flows through the Gram trace)
* rademacher      -- i.i.d. {-amplitude, +amplitude}, equiprobable
* row_orthogonal  -- rows of a Gaussian draw orthonormalized and rescaled so
                     every row norm is sqrt(N/M); makes the folded input
                     noise exactly white

Fitness metrics: Gram trace, column coherence, the exhaustive RIP constant
for small supports, and a Monte Carlo lower bound on it for everything else.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import RandomStream, extreme_eigen_sym_batch
from .signals import BudgetExceededError, enumerate_supports, sample_support, support_count

__all__ = [
    "MatrixEnsemble",
    "SensingMatrix",
    "gaussian",
    "bernoulli",
    "rademacher",
    "row_orthogonal_scaled",
    "draw_matrix",
    "trace_gram",
    "coherence",
    "rip_constant",
    "monte_carlo_rip_lower_bound",
    "unit_normalize_columns",
    "save_matrix",
    "load_matrix",
]

ENSEMBLE_KINDS = ("gaussian", "bernoulli", "rademacher", "row_orthogonal")

DEFAULT_RIP_BUDGET = 2_000_000

# Row-orthogonality defect tolerated by the SensingMatrix invariant.
ORTHOGONALITY_TOL = 1e-9


@dataclass(frozen=True)
class MatrixEnsemble:
    """Distribution family for matrix entries plus its parameters."""

    kind: str
    variance: float | None = None  # gaussian only; None means 1/M at draw time
    p: float | None = None  # bernoulli only, strictly inside (0, 1)
    amplitude: float = 1.0  # rademacher only

    def __post_init__(self):
        if self.kind not in ENSEMBLE_KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.variance is not None and not self.variance > 0:
            raise ValueError("variance must be positive")
        if self.kind == "bernoulli":
            if self.p is None:
                raise ValueError("bernoulli ensemble requires p")
            if not 0.0 < self.p < 1.0:
                raise ValueError("p must lie strictly inside (0, 1)")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")

    def params(self) -> dict:
        """Ensemble parameters relevant to this kind (for sidecars)."""
        if self.kind == "gaussian":
            return {"variance": self.variance}
        if self.kind == "bernoulli":
            return {"p": self.p}
        if self.kind == "rademacher":
            return {"amplitude": self.amplitude}
        return {}


def gaussian(variance: float | None = None) -> MatrixEnsemble:
    return MatrixEnsemble("gaussian", variance=variance)


def bernoulli(p: float) -> MatrixEnsemble:
    return MatrixEnsemble("bernoulli", p=p)


def rademacher(amplitude: float = 1.0) -> MatrixEnsemble:
    return MatrixEnsemble("rademacher", amplitude=amplitude)


def row_orthogonal_scaled() -> MatrixEnsemble:
    return MatrixEnsemble("row_orthogonal")


@dataclass(frozen=True, eq=False)
class SensingMatrix:
    """Dense M x N measurement matrix with ensemble provenance."""

    matrix: np.ndarray = field(repr=False)
    ensemble: MatrixEnsemble | None = None
    seed: tuple | None = None  # (master_seed, stream_id) of the drawing stream

    def __post_init__(self):
        mat = np.ascontiguousarray(np.asarray(self.matrix, dtype=np.float64))
        if mat.ndim != 2:
            raise ValueError(f"matrix must be 2-D, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ValueError("matrix entries must be finite")
        object.__setattr__(self, "matrix", mat)

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]


def _mat(a) -> np.ndarray:
    """Accept a SensingMatrix or a plain 2-D array."""
    return a.matrix if isinstance(a, SensingMatrix) else np.asarray(a, dtype=np.float64)


def _orthonormalize_rows(g: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt over rows with one re-orthogonalization pass."""
    q = g.copy()
    m = q.shape[0]
    for i in range(m):
        for _ in range(2):  # twice is enough for the 1e-9 whiteness contract
            if i:
                q[i] -= q[:i].T @ (q[:i] @ q[i])
        norm = np.linalg.norm(q[i])
        if norm < 1e-12:
            raise ValueError("degenerate Gaussian draw: rows not independent")
        q[i] /= norm
    return q


def draw_matrix(ensemble: MatrixEnsemble, m: int, n: int, stream: RandomStream) -> SensingMatrix:
    """Draw an M x N sensing matrix from ``ensemble`` using ``stream``.

    Returns a SensingMatrix whose ensemble field carries resolved parameters
    (e.g. the Gaussian default variance 1/M made explicit).
    """
    if m < 1 or n < 1:
        raise ValueError(f"invalid dimensions {m}x{n}")
    if ensemble.kind == "row_orthogonal" and m > n:
        raise ValueError("row_orthogonal requires M <= N")

    if ensemble.kind == "gaussian":
        var = ensemble.variance if ensemble.variance is not None else 1.0 / m
        entries = math.sqrt(var) * stream.standard_normal(m * n)
        resolved = MatrixEnsemble("gaussian", variance=var)
    elif ensemble.kind == "bernoulli":
        entries = (stream.uniform01(m * n) < ensemble.p).astype(np.float64)
        resolved = ensemble
    elif ensemble.kind == "rademacher":
        signs = np.where(stream.uniform01(m * n) < 0.5, 1.0, -1.0)
        entries = ensemble.amplitude * signs
        resolved = ensemble
    else:  # row_orthogonal
        g = stream.standard_normal(m * n).reshape(m, n)
        entries = math.sqrt(n / m) * _orthonormalize_rows(g)
        resolved = ensemble
        return SensingMatrix(entries, resolved, stream.key())

    return SensingMatrix(entries.reshape(m, n), resolved, stream.key())


def trace_gram(a) -> float:
    """trace(A A^T) = sum of squared entries."""
    mat = _mat(a)
    return float(np.einsum("ij,ij->", mat, mat))


def coherence(a) -> float:
    """Largest normalized inner product between distinct columns, in [0, 1]."""
    mat = _mat(a)
    norms = np.linalg.norm(mat, axis=0)
    if np.any(norms == 0.0):
        raise ValueError("coherence undefined: matrix has a zero column")
    gram = np.abs((mat / norms).T @ (mat / norms))
    np.fill_diagonal(gram, 0.0)
    return min(float(gram.max()), 1.0)


def _normalized_columns(mat: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(mat, axis=0)
    if np.any(norms == 0.0):
        raise ValueError("RIP constant undefined: matrix has a zero column")
    return mat / norms


def _delta_over_supports(cols_t: np.ndarray, supports: np.ndarray) -> float:
    """Max isometry defect over the given supports (rows of index arrays)."""
    sub = cols_t[supports]  # (batch, K, M)
    grams = sub @ sub.transpose(0, 2, 1)
    lo, hi = extreme_eigen_sym_batch(grams)
    return float(max(np.max(1.0 - lo), np.max(hi - 1.0)))


def rip_constant(a, k: int, budget: int = DEFAULT_RIP_BUDGET, chunk: int = 4096) -> float:
    """Exhaustive restricted-isometry constant of order ``k``.

    Columns are normalized to unit l2 norm internally before evaluation (the
    usual convention; note a raw Gaussian 1/M draw only has unit columns in
    expectation). delta is the worst isometry defect
    max(1 - lambda_min, lambda_max - 1) over every K-column Gram submatrix.

    Raises :class:`BudgetExceededError` when C(N, k) exceeds ``budget``; use
    :func:`monte_carlo_rip_lower_bound` in that regime.
    """
    mat = _mat(a)
    n = mat.shape[1]
    if not 1 <= k <= min(mat.shape):
        raise ValueError(f"need 1 <= k <= min(M, N), got k={k}")
    total = support_count(n, k)
    if total > budget:
        raise BudgetExceededError(
            f"C({n},{k}) = {total} exceeds the RIP enumeration budget {budget}; "
            "use monte_carlo_rip_lower_bound instead"
        )
    cols_t = np.ascontiguousarray(_normalized_columns(mat).T)
    delta = 0.0
    batch: list[tuple[int, ...]] = []
    for sup in enumerate_supports(n, k, budget=budget):
        batch.append(sup)
        if len(batch) == chunk:
            delta = max(delta, _delta_over_supports(cols_t, np.asarray(batch)))
            batch.clear()
    if batch:
        delta = max(delta, _delta_over_supports(cols_t, np.asarray(batch)))
    return delta


def monte_carlo_rip_lower_bound(
    a, k: int, n_samples: int, stream: RandomStream, chunk: int = 4096
) -> float:
    """Isometry defect maximized over ``n_samples`` uniform random supports.

    Always a lower bound on :func:`rip_constant`. Sample ``i`` draws from
    ``stream.child(i)``, so growing ``n_samples`` extends the sampled set
    instead of reshuffling it: the bound is non-decreasing in ``n_samples``
    for a fixed stream.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    mat = _mat(a)
    n = mat.shape[1]
    if not 1 <= k <= min(mat.shape):
        raise ValueError(f"need 1 <= k <= min(M, N), got k={k}")
    cols_t = np.ascontiguousarray(_normalized_columns(mat).T)
    delta = 0.0
    batch: list[tuple[int, ...]] = []
    for i in range(n_samples):
        batch.append(sample_support(n, k, stream.child(i)))
        if len(batch) == chunk:
            delta = max(delta, _delta_over_supports(cols_t, np.asarray(batch)))
            batch.clear()
    if batch:
        delta = max(delta, _delta_over_supports(cols_t, np.asarray(batch)))
    return delta


def unit_normalize_columns(a: SensingMatrix) -> SensingMatrix:
    """Copy of ``a`` with every column scaled to unit l2 norm.

    Matches the column convention rip_constant evaluates under, so recovery
    bounds driven by its delta apply to the returned matrix verbatim.
    """
    mat = _mat(a)
    return SensingMatrix(_normalized_columns(mat), a.ensemble, a.seed)


# ---------------------------------------------------------------------------
# Persistence: CSV matrix + JSON sidecar
# ---------------------------------------------------------------------------


def _sidecar_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".json")


def save_matrix(sm: SensingMatrix, path) -> tuple[Path, Path]:
    """Write the matrix as full-precision CSV plus a JSON sidecar.

    The sidecar records {kind, params, M, N, seed} so a run can be
    reproduced; returns (csv_path, sidecar_path).
    """
    csv_path = Path(path)
    np.savetxt(csv_path, sm.matrix, fmt="%.17g", delimiter=",")
    meta = {
        "kind": sm.ensemble.kind if sm.ensemble else None,
        "params": sm.ensemble.params() if sm.ensemble else {},
        "M": sm.m,
        "N": sm.n,
        "seed": None
        if sm.seed is None
        else {"master_seed": sm.seed[0], "stream_id": list(sm.seed[1])},
    }
    sidecar = _sidecar_path(csv_path)
    sidecar.write_text(json.dumps(meta, indent=2) + "\n")
    return csv_path, sidecar


def load_matrix(path) -> SensingMatrix:
    """Read a matrix written by :func:`save_matrix` (sidecar optional)."""
    csv_path = Path(path)
    mat = np.loadtxt(csv_path, delimiter=",", ndmin=2)
    sidecar = _sidecar_path(csv_path)
    ensemble = None
    seed = None
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
        if meta.get("kind"):
            ensemble = MatrixEnsemble(meta["kind"], **meta.get("params", {}))
        if meta.get("seed"):
            seed = (meta["seed"]["master_seed"], tuple(meta["seed"]["stream_id"]))
        if mat.shape != (meta["M"], meta["N"]):
            raise ValueError(
                f"matrix shape {mat.shape} disagrees with sidecar "
                f"({meta['M']}, {meta['N']})"
            )
    return SensingMatrix(mat, ensemble, seed)
