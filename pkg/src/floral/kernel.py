"""RBF kernel evaluation and Gram-matrix construction.

The Gram matrix is computed once per training run and cached; the label-signed
variant used by the dual objective is obtained by re-signing the cached matrix,
never by re-evaluating kernels. Every entry is computed with the same
elementwise expression as :func:`kernel_eval`, so the matrix is exactly
symmetric and its diagonal is exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_GRAM_BLOCK = 512  # rows per block; bounds the (block, n, d) broadcast temp


@dataclass(frozen=True)
class KernelSpec:
    """RBF kernel with inverse squared length-scale gamma."""

    gamma: float
    kind: str = "rbf"

    def __post_init__(self):
        if self.kind != "rbf":
            raise ValueError(f"unsupported kernel kind: {self.kind!r}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class GramMatrix:
    entries: np.ndarray
    spec: KernelSpec

    def __post_init__(self):
        e = self.entries
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError(f"gram matrix must be square, got {e.shape}")
        if not np.array_equal(e, e.T):
            raise ValueError("gram matrix is not exactly symmetric")

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def kernel_eval(spec: KernelSpec, x: np.ndarray, x2: np.ndarray) -> float:
    """exp(-gamma * squared Euclidean distance) between two feature vectors."""
    x = np.asarray(x, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x.shape != x2.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {x2.shape}")
    # same elementwise reduction as the gram blocks, so entries match exactly
    return float(np.exp(-spec.gamma * ((x - x2) ** 2).sum()))


def _rbf_block(spec: KernelSpec, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    # elementwise (a-b)^2 keeps entries bit-identical to kernel_eval
    d2 = ((rows[:, None, :] - cols[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-spec.gamma * d2)


def gram(spec: KernelSpec, features: np.ndarray) -> GramMatrix:
    """Dense n x n kernel matrix over the rows of `features`."""
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"features must be a nonempty 2-d matrix, got shape {X.shape}")
    n = X.shape[0]
    K = np.empty((n, n), dtype=np.float64)
    for start in range(0, n, _GRAM_BLOCK):
        stop = min(start + _GRAM_BLOCK, n)
        K[start:stop] = _rbf_block(spec, X[start:stop], X)
    return GramMatrix(entries=K, spec=spec)


def cross_gram(spec: KernelSpec, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Rectangular kernel matrix between two point sets (rows x cols)."""
    A = np.asarray(rows, dtype=np.float64)
    B = np.asarray(cols, dtype=np.float64)
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    out = np.empty((A.shape[0], B.shape[0]), dtype=np.float64)
    for start in range(0, A.shape[0], _GRAM_BLOCK):
        stop = min(start + _GRAM_BLOCK, A.shape[0])
        out[start:stop] = _rbf_block(spec, A[start:stop], B)
    return out


def signed_gram(K: GramMatrix, labels: np.ndarray) -> np.ndarray:
    """Label-signed matrix with entries labels[i] * labels[j] * K[i][j]."""
    y = np.asarray(labels)
    if y.shape != (K.n,):
        raise ValueError(f"label count {y.shape} does not match gram dimension {K.n}")
    yf = y.astype(np.float64)
    return (yf[:, None] * yf[None, :]) * K.entries


def gram_matvec(spec: KernelSpec, features: np.ndarray, v: np.ndarray,
                block_rows: int = _GRAM_BLOCK) -> np.ndarray:
    """K @ v with row blocks of K recomputed on the fly (no dense cache).

    Streaming path for datasets whose dense Gram would not fit in memory;
    agrees with the dense product to within accumulation rounding.
    """
    X = np.asarray(features, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    out = np.empty(X.shape[0], dtype=np.float64)
    for start in range(0, X.shape[0], block_rows):
        stop = min(start + block_rows, X.shape[0])
        out[start:stop] = _rbf_block(spec, X[start:stop], X) @ v
    return out
