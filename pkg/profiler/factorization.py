"""
Non-negative matrix factorization.
M (hosts x processes) is approximated by H (hosts x k) times W (k x processes)
with multiplicative updates minimizing the squared Frobenius norm.
"""

import logging
from typing import List, Optional, Tuple, Union

import attrs
import numpy as np
from scipy import sparse

from profiler.errors import DimensionError
from profiler.events import HostProcessMatrix

logger: logging.RootLogger = logging.getLogger(__name__)

EPSILON: float = 1e-12

MatrixLike = Union[HostProcessMatrix, sparse.spmatrix, np.ndarray]


@attrs.frozen(eq=False)
class FactorizationResult:
    """
    Factors of one host-process matrix.
    error_trace[0] is the error of the initial factors, then one value per update.
    """

    H: np.ndarray
    W: np.ndarray
    error_trace: List[float]
    iterations_used: int

    @property
    def error(self) -> float:
        """
        Final reconstruction error.
        """
        return self.error_trace[-1]


@attrs.frozen(eq=False)
class NmfOptions:
    """
    Factorization options.
    """

    k: int = attrs.field(validator=attrs.validators.ge(1))
    max_iterations: int = attrs.field(default=200, validator=attrs.validators.ge(1))
    tolerance: float = attrs.field(default=1e-4, validator=attrs.validators.ge(0))
    seed: int = 0
    warm_start: Optional[FactorizationResult] = None


def as_dense(M: MatrixLike) -> np.ndarray:
    """
    Converts any supported matrix into a dense float array.
    """
    if isinstance(M, HostProcessMatrix):
        return M.dense()
    if sparse.issparse(M):
        return M.toarray().astype(float)
    return np.asarray(M, dtype=float)


def reconstruction_error(M: MatrixLike, H: np.ndarray, W: np.ndarray) -> float:
    """
    Squared Frobenius norm of M - HW.
    """
    dense: np.ndarray = as_dense(M)
    H = np.asarray(H, dtype=float)
    W = np.asarray(W, dtype=float)
    if dense.ndim != 2 or H.ndim != 2 or W.ndim != 2:
        raise DimensionError("Expecting 2-dimensional matrices!")
    if H.shape[0] != dense.shape[0] or W.shape[1] != dense.shape[1] or H.shape[1] != W.shape[0]:
        raise DimensionError(f"Shapes do not conform: M {dense.shape}, H {H.shape}, W {W.shape}")
    residual: np.ndarray = dense - H @ W
    return float(np.sum(residual * residual))


def _initial_factors(M: np.ndarray, opts: NmfOptions) -> Tuple[np.ndarray, np.ndarray]:
    """
    Warm start when the previous factors fit, seeded uniform noise otherwise.
    """
    h, p = M.shape
    previous: Optional[FactorizationResult] = opts.warm_start
    if previous is not None:
        if previous.H.shape == (h, opts.k) and previous.W.shape == (opts.k, p):
            logger.debug("Warm starting from previous factors.")
            return previous.H.copy(), previous.W.copy()
        logger.debug("Ignoring warm start with shapes %s and %s.", previous.H.shape, previous.W.shape)

    rng: np.random.Generator = np.random.default_rng(opts.seed)
    scale: float = float(np.sqrt(M.mean() / opts.k))
    # 1 - U[0, 1) lies in (0, 1].
    H: np.ndarray = (1.0 - rng.random((h, opts.k))) * scale
    W: np.ndarray = (1.0 - rng.random((opts.k, p))) * scale
    return H, W


def factorize(M: MatrixLike, opts: NmfOptions) -> FactorizationResult:
    """
    Factorizes M into non-negative H and W.
    Stops after max_iterations updates or when the error change relative to
    the initial error drops below the tolerance.
    """
    dense: np.ndarray = as_dense(M)
    if dense.ndim != 2 or dense.size == 0:
        raise DimensionError(f"Cannot factorize an empty matrix: {dense.shape}")
    if np.any(dense < 0):
        raise ValueError("Expecting a non-negative matrix!")
    if opts.k > min(dense.shape):
        raise DimensionError(f"Latent dimension {opts.k} exceeds min{dense.shape}")

    H, W = _initial_factors(dense, opts)
    trace: List[float] = [reconstruction_error(dense, H, W)]
    scale: float = max(trace[0], EPSILON)
    iterations: int = 0
    for iterations in range(1, opts.max_iterations + 1):
        H *= (dense @ W.T) / (H @ (W @ W.T) + EPSILON)
        W *= (H.T @ dense) / ((H.T @ H) @ W + EPSILON)
        trace.append(reconstruction_error(dense, H, W))
        if abs(trace[-1] - trace[-2]) / scale < opts.tolerance:
            break
    logger.debug("NMF k=%s: %s iterations, error %.6g.", opts.k, iterations, trace[-1])
    return FactorizationResult(H=H, W=W, error_trace=trace, iterations_used=iterations)


def latent_labels(H: np.ndarray) -> np.ndarray:
    """
    Index of the largest latent feature of every row, lowest index on ties.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[1] < 1:
        raise DimensionError(f"Expecting a matrix with at least one column: {H.shape}")
    return np.argmax(H, axis=1)
