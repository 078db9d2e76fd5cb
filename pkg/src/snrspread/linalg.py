"""Dense linear-algebra kernel and seeded random streams.

The package works on plain ``numpy.float64`` arrays throughout: a matrix is a
2-D C-ordered array, a vector is 1-D. This module adds the contract checking
the experiments rely on (explicit rank-deficiency detection, symmetric eigen
bounds) plus :class:`RandomStream`, a reproducible deviate source addressable
by ``(master_seed, stream_id)`` so that every Monte Carlo draw in the package
can be replayed exactly.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np
import scipy.linalg

__all__ = [
    "SingularMatrixError",
    "RandomStream",
    "draw_standard_normal",
    "draw_uniform01",
    "matvec",
    "least_squares",
    "lstsq_factor",
    "lstsq_solve",
    "extreme_eigen_sym",
    "extreme_eigen_sym_batch",
]

# Relative singular-value cutoff below which a least-squares system is
# treated as rank deficient.
RANK_TOL = 1e-12

# Asymmetry tolerated by extreme_eigen_sym, relative to max(1, |G|_max).
SYMMETRY_TOL = 1e-10


class SingularMatrixError(ValueError):
    """Raised when a least-squares system is numerically rank deficient."""


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def _as_vector(v, length: int | None = None) -> np.ndarray:
    w = np.asarray(v, dtype=np.float64)
    if w.ndim != 1:
        raise ValueError(f"expected a 1-D array, got shape {w.shape}")
    if length is not None and w.shape[0] != length:
        raise ValueError(f"expected length {length}, got {w.shape[0]}")
    return w


def matvec(a, v) -> np.ndarray:
    """Matrix-vector product ``a @ v`` with explicit dimension checking."""
    m = _as_matrix(a)
    w = _as_vector(v)
    if w.shape[0] != m.shape[1]:
        raise ValueError(
            f"dimension mismatch: matrix has {m.shape[1]} columns, vector has "
            f"length {w.shape[0]}"
        )
    return m @ w


def lstsq_factor(a):
    """QR-factor a tall full-rank matrix for repeated least-squares solves.

    Returns an opaque factor object for :func:`lstsq_solve`. Raises
    :class:`SingularMatrixError` when the smallest singular value falls below
    ``RANK_TOL`` times the largest, which is how near-collinear support
    columns show up in practice.
    """
    m = _as_matrix(a)
    rows, cols = m.shape
    if rows < cols:
        raise ValueError(f"need rows >= cols, got {rows}x{cols}")
    q, r = np.linalg.qr(m, mode="reduced")
    sv = np.linalg.svd(r, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] <= RANK_TOL * sv[0]:
        raise SingularMatrixError(
            f"rank-deficient system: singular values span [{sv[-1]:.3e}, "
            f"{sv[0]:.3e}]"
        )
    return q, r


def lstsq_solve(factor, y) -> np.ndarray:
    """Solve min ||A v - y|| given a factor from :func:`lstsq_factor`.

    ``y`` may be 1-D or 2-D (one right-hand side per column).
    """
    q, r = factor
    rhs = np.asarray(y, dtype=np.float64)
    if rhs.shape[0] != q.shape[0]:
        raise ValueError(
            f"dimension mismatch: factor expects length {q.shape[0]}, got "
            f"{rhs.shape[0]}"
        )
    return scipy.linalg.solve_triangular(r, q.T @ rhs, lower=False)


def least_squares(a, y) -> np.ndarray:
    """Return ``argmin_v ||a @ v - y||_2`` via a QR factorization.

    Normal equations are avoided on purpose: the Gram matrix squares the
    condition number and some test instances are deliberately near-singular.
    """
    factor = lstsq_factor(a)
    return lstsq_solve(factor, _as_vector(y, np.asarray(a).shape[0]))


def extreme_eigen_sym(g) -> tuple[float, float]:
    """Smallest and largest eigenvalue of a small symmetric matrix.

    Rejects inputs whose asymmetry exceeds ``SYMMETRY_TOL`` relative to
    ``max(1, |G|_max)``.
    """
    m = _as_matrix(g)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    asym = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if asym > SYMMETRY_TOL * scale:
        raise ValueError(f"matrix is not symmetric (asymmetry {asym:.3e})")
    w = np.linalg.eigvalsh(m)
    return float(w[0]), float(w[-1])


def extreme_eigen_sym_batch(grams: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched (lambda_min, lambda_max) for a stack of symmetric matrices.

    Hot path for RIP enumeration; inputs must be symmetric by construction
    (no checking here).
    """
    w = np.linalg.eigvalsh(grams)
    return w[..., 0], w[..., -1]


# ---------------------------------------------------------------------------
# Seeded random streams
# ---------------------------------------------------------------------------


def _id_words(part) -> tuple[int, ...]:
    """Encode one stream-id component as tagged uint32 words.

    Integers and strings map to disjoint word sequences so e.g. 5 and "5"
    derive different streams.
    """
    if isinstance(part, (bool,)):
        raise TypeError("stream ids must be non-negative ints or strings")
    if isinstance(part, (int, np.integer)):
        val = int(part)
        if val < 0:
            raise ValueError("stream id integers must be non-negative")
        words = []
        while True:
            words.append(val & 0xFFFFFFFF)
            val >>= 32
            if val == 0:
                break
        return (0x01, len(words), *words)
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
        return (0x02, *words)
    raise TypeError(f"unsupported stream id component: {part!r}")


class RandomStream:
    """Deterministic, addressable source of random deviates.

    A stream is identified by ``(master_seed, stream_id)`` where ``stream_id``
    is a tuple of non-negative ints and short strings. Identical identities
    reproduce identical deviate sequences; distinct identities behave as
    independent streams (PCG64 seeded through ``numpy.random.SeedSequence``).

    Normal deviates are produced by an in-package Box-Muller transform over
    PCG64 unit uniforms, so byte-level reproducibility depends only on the
    PCG64 bit stream and this module, not on numpy's distribution
    implementations. The transform is fixed; changing it invalidates every
    recorded baseline (transform version 1).
    """

    def __init__(self, master_seed: int, stream_id: tuple = ()):
        seed = int(master_seed)
        if not 0 <= seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        self.master_seed = seed
        self.stream_id = tuple(stream_id)
        for part in self.stream_id:
            _id_words(part)  # validate eagerly
        self._gen: np.random.Generator | None = None

    def __repr__(self) -> str:
        return f"RandomStream(master_seed={self.master_seed}, stream_id={self.stream_id!r})"

    def key(self) -> tuple:
        """Serializable identity ``(master_seed, stream_id)``."""
        return (self.master_seed, self.stream_id)

    def child(self, *parts) -> "RandomStream":
        """Derive an independent stream by extending the stream id."""
        return RandomStream(self.master_seed, self.stream_id + parts)

    def _generator(self) -> np.random.Generator:
        if self._gen is None:
            spawn_key = []
            for part in self.stream_id:
                spawn_key.extend(_id_words(part))
            seq = np.random.SeedSequence(self.master_seed, spawn_key=tuple(spawn_key))
            self._gen = np.random.Generator(np.random.PCG64(seq))
        return self._gen

    def uniform01(self, count: int) -> np.ndarray:
        """``count`` i.i.d. uniforms on [0, 1)."""
        n = int(count)
        if n < 0:
            raise ValueError("count must be non-negative")
        return self._generator().random(n)

    def standard_normal(self, count: int) -> np.ndarray:
        """``count`` i.i.d. standard normals (Box-Muller over uniform01)."""
        n = int(count)
        if n < 0:
            raise ValueError("count must be non-negative")
        if n == 0:
            return np.empty(0, dtype=np.float64)
        pairs = (n + 1) // 2
        gen = self._generator()
        u1 = 1.0 - gen.random(pairs)  # (0, 1]: keeps log() finite
        u2 = gen.random(pairs)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = (2.0 * math.pi) * u2
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:n]

    def integers(self, count: int, upper: int) -> np.ndarray:
        """``count`` i.i.d. integers uniform on [0, upper), derived from uniforms."""
        if upper <= 0:
            raise ValueError("upper must be positive")
        u = self.uniform01(count)
        idx = (u * upper).astype(np.int64)
        # float rounding can only ever push u*upper up to upper itself
        np.minimum(idx, upper - 1, out=idx)
        return idx


def draw_standard_normal(stream: RandomStream, count: int) -> np.ndarray:
    """Module-level alias for :meth:`RandomStream.standard_normal`."""
    return stream.standard_normal(count)


def draw_uniform01(stream: RandomStream, count: int) -> np.ndarray:
    """Module-level alias for :meth:`RandomStream.uniform01`."""
    return stream.uniform01(count)
