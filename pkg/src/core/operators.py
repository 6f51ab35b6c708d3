"""
Linear forward operators and basis transforms.

A forward operator maps an unknown u (length n) to noise-free data (length k).
Besides apply / apply_adjoint every operator can hand out single columns
A e_j as (indices, values) pairs, which is all the single-component Gibbs
update needs from it.

A basis transform V maps coefficients xi to u = V xi. Its `penalized` mask
marks the coefficients the L1 prior acts on; D V restricted to those columns
is the identity, the remaining columns span ker D.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy import linalg, sparse
from scipy.signal import fftconvolve
from scipy.special import ndtr

from core.errors import ConfigurationError, ConsistencyError

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)
logger = logging.getLogger(__name__)

Column = Tuple[np.ndarray, np.ndarray]

# Gaussian kernels are truncated at this many standard deviations.
KERNEL_TRUNCATION = 4.0


class LinearOperator:
    """Base class: u -> A u with adjoint and column access."""

    input_dim: int
    output_dim: int

    def apply(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply_adjoint(self, w: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def column(self, j: int) -> Column:
        """Nonzero part of A e_j."""
        e = np.zeros(self.input_dim)
        e[j] = 1.0
        col = self.apply(e)
        idx = np.flatnonzero(col)
        return idx, col[idx]

    def column_norms(self) -> np.ndarray:
        """Squared Euclidean norms of all columns."""
        norms = np.empty(self.input_dim)
        for j in range(self.input_dim):
            _, vals = self.column(j)
            norms[j] = vals @ vals
        return norms

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.output_dim, self.input_dim))
        for j in range(self.input_dim):
            idx, vals = self.column(j)
            dense[idx, j] = vals
        return dense


class MatrixOperator(LinearOperator):
    """Forward operator given by an explicit dense or scipy.sparse matrix."""

    def __init__(self, matrix):
        if sparse.issparse(matrix):
            self.matrix = sparse.csc_matrix(matrix, dtype=float)
        else:
            self.matrix = np.asarray(matrix, dtype=float)
            if self.matrix.ndim != 2:
                raise ConfigurationError("Forward matrix must be two-dimensional", {"ndim": self.matrix.ndim})
        self.output_dim, self.input_dim = self.matrix.shape

    def apply(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(self.matrix @ u, dtype=float)

    def apply_adjoint(self, w: np.ndarray) -> np.ndarray:
        return np.asarray(self.matrix.T @ w, dtype=float)

    def column(self, j: int) -> Column:
        if sparse.issparse(self.matrix):
            start, stop = self.matrix.indptr[j], self.matrix.indptr[j + 1]
            return self.matrix.indices[start:stop], self.matrix.data[start:stop]
        return np.arange(self.output_dim), self.matrix[:, j]

    def column_norms(self) -> np.ndarray:
        if sparse.issparse(self.matrix):
            return np.asarray(self.matrix.multiply(self.matrix).sum(axis=0)).ravel()
        return np.einsum("ij,ij->j", self.matrix, self.matrix)

    def to_dense(self) -> np.ndarray:
        if sparse.issparse(self.matrix):
            return self.matrix.toarray()
        return self.matrix.copy()


def gaussian_kernel_1d(sigma: float, spacing: float) -> np.ndarray:
    """Pixel-integrated Gaussian weights on a grid of the given spacing, summing to 1."""
    radius = max(int(math.ceil(KERNEL_TRUNCATION * sigma / spacing)), 1)
    offsets = np.arange(-radius, radius + 1)
    weights = ndtr((offsets + 0.5) * spacing / sigma) - ndtr((offsets - 0.5) * spacing / sigma)
    return weights / weights.sum()


def reflect_index(j: int, size: int) -> int:
    """Half-sample symmetric reflection (Neumann boundary) into [0, size)."""
    while j < 0 or j >= size:
        j = -j - 1 if j < 0 else 2 * size - j - 1
    return j


def reflective_convolution_matrix(kernel: np.ndarray, size: int) -> sparse.csc_matrix:
    """1-D convolution with reflective boundary as a sparse size x size matrix."""
    radius = (len(kernel) - 1) // 2
    rows, cols, vals = [], [], []
    for i in range(size):
        for d in range(-radius, radius + 1):
            rows.append(i)
            cols.append(reflect_index(i + d, size))
            vals.append(kernel[d + radius])
    # duplicate (row, col) pairs from folding are summed
    return sparse.csc_matrix((vals, (rows, cols)), shape=(size, size))


class SeparableConvolutionOperator(LinearOperator):
    """2-D Gaussian blur on a grid x grid image with Neumann boundary.

    apply / apply_adjoint use FFT convolution on a reflectively padded image;
    columns come from the separable 1-D factor, A = A1 (x) A1 on row-major
    flattened images.
    """

    def __init__(self, grid: int, sigma: float, spacing: Optional[float] = None):
        self.grid = int(grid)
        self.sigma = float(sigma)
        self.spacing = float(spacing) if spacing is not None else 1.0 / self.grid
        self.kernel_1d = gaussian_kernel_1d(self.sigma, self.spacing)
        self.radius = (len(self.kernel_1d) - 1) // 2
        if self.radius >= self.grid / 2:
            raise ConfigurationError(
                "Blur kernel support exceeds half the domain",
                {"grid": self.grid, "sigma": self.sigma, "radius_px": self.radius}
            )
        self.kernel_2d = np.outer(self.kernel_1d, self.kernel_1d)
        self.factor = reflective_convolution_matrix(self.kernel_1d, self.grid)
        self.input_dim = self.output_dim = self.grid * self.grid

    def apply(self, u: np.ndarray) -> np.ndarray:
        image = np.asarray(u, dtype=float).reshape(self.grid, self.grid)
        padded = np.pad(image, self.radius, mode="symmetric")
        return fftconvolve(padded, self.kernel_2d, mode="valid").ravel()

    def apply_adjoint(self, w: np.ndarray) -> np.ndarray:
        image = np.asarray(w, dtype=float).reshape(self.grid, self.grid)
        full = fftconvolve(image, self.kernel_2d[::-1, ::-1], mode="full")
        return _fold_symmetric(full, self.radius).ravel()

    def column(self, j: int) -> Column:
        p, q = divmod(int(j), self.grid)
        rows_p, vals_p = _sparse_column(self.factor, p)
        rows_q, vals_q = _sparse_column(self.factor, q)
        idx = (rows_p[:, None] * self.grid + rows_q[None, :]).ravel()
        vals = np.outer(vals_p, vals_q).ravel()
        return idx, vals

    def column_norms(self) -> np.ndarray:
        norms_1d = np.asarray(self.factor.multiply(self.factor).sum(axis=0)).ravel()
        return np.outer(norms_1d, norms_1d).ravel()

    def to_dense(self) -> np.ndarray:
        dense = self.factor.toarray()
        return np.kron(dense, dense)


def _sparse_column(matrix: sparse.csc_matrix, j: int) -> Column:
    start, stop = matrix.indptr[j], matrix.indptr[j + 1]
    return matrix.indices[start:stop], matrix.data[start:stop]


def _fold_symmetric(padded: np.ndarray, radius: int) -> np.ndarray:
    """Adjoint of np.pad(..., radius, mode='symmetric') on both axes."""
    out = padded
    for axis in (0, 1):
        out = np.moveaxis(out, axis, 0)
        inner = out[radius:out.shape[0] - radius].copy()
        inner[:radius] += out[:radius][::-1]
        inner[inner.shape[0] - radius:] += out[out.shape[0] - radius:][::-1]
        out = np.moveaxis(inner, 0, axis)
    return out


def check_adjoint(op: LinearOperator, rng: np.random.Generator, probes: int = 3, rtol: float = 1e-10) -> float:
    """Largest relative mismatch of <A u, w> and <u, A^T w> over random probes."""
    worst = 0.0
    for _ in range(probes):
        u = rng.standard_normal(op.input_dim)
        w = rng.standard_normal(op.output_dim)
        lhs = float(op.apply(u) @ w)
        rhs = float(u @ op.apply_adjoint(w))
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
    if worst > rtol:
        raise ConsistencyError("Adjoint check failed", {"relative_mismatch": worst})
    return worst


class BasisTransform:
    """u = V xi, with the mask of prior-penalized coefficients."""

    dim: int
    penalized: np.ndarray
    is_identity: bool = False

    def apply(self, xi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply_inverse(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def right_multiply(self, matrix: np.ndarray) -> np.ndarray:
        """matrix @ V."""
        return np.asarray(matrix) @ self.to_dense()

    def to_dense(self) -> np.ndarray:
        return np.column_stack([self.apply(e) for e in np.eye(self.dim)])


class IdentityBasis(BasisTransform):
    is_identity = True

    def __init__(self, dim: int, penalized: Optional[np.ndarray] = None):
        self.dim = int(dim)
        self.penalized = np.ones(self.dim, dtype=bool) if penalized is None else np.asarray(penalized, dtype=bool)

    def apply(self, xi: np.ndarray) -> np.ndarray:
        return np.array(xi, dtype=float)

    def apply_inverse(self, u: np.ndarray) -> np.ndarray:
        return np.array(u, dtype=float)

    def right_multiply(self, matrix: np.ndarray) -> np.ndarray:
        return np.array(matrix, dtype=float)


class StepBasis(BasisTransform):
    """Lower-triangular ones: column 0 is the constant, column i >= 1 is 1_{j >= i}.

    Coefficient 0 is the unpenalized offset; coefficient i >= 1 is the jump
    u_i - u_{i-1}.
    """

    def __init__(self, dim: int):
        self.dim = int(dim)
        self.penalized = np.ones(self.dim, dtype=bool)
        self.penalized[0] = False

    def apply(self, xi: np.ndarray) -> np.ndarray:
        return np.cumsum(xi, dtype=float)

    def apply_inverse(self, u: np.ndarray) -> np.ndarray:
        return np.diff(np.asarray(u, dtype=float), prepend=0.0)

    def right_multiply(self, matrix: np.ndarray) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=float)
        return np.cumsum(matrix[:, ::-1], axis=1)[:, ::-1]


class DenseBasis(BasisTransform):
    """General invertible V, LU-factorized once."""

    def __init__(self, matrix: np.ndarray, penalized: np.ndarray):
        self.matrix = np.asarray(matrix, dtype=float)
        self.dim = self.matrix.shape[0]
        self.penalized = np.asarray(penalized, dtype=bool)
        self._lu = linalg.lu_factor(self.matrix)

    def apply(self, xi: np.ndarray) -> np.ndarray:
        return self.matrix @ xi

    def apply_inverse(self, u: np.ndarray) -> np.ndarray:
        return linalg.lu_solve(self._lu, u)

    def to_dense(self) -> np.ndarray:
        return self.matrix.copy()


def first_difference_matrix(n: int) -> sparse.csr_matrix:
    """(D u)_i = u_{i+1} - u_i, shape (n-1) x n."""
    return sparse.diags([-np.ones(n - 1), np.ones(n - 1)], [0, 1], shape=(n - 1, n), format="csr")
