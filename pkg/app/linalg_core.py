"""
Dense complex linear algebra for small Hilbert spaces (dimension up to ~16).

Provides:
  - OperatorMatrix            – immutable square complex matrix with an optional
                                bipartite split (d_A, d_B)
  - kron / partial_trace / partial_transpose / contract_subsystem
  - hermitian_eig / operator_norm / top_eigenvector / bottom_eigenvector
  - singular_values / nuclear_norm for real 3x3 correlation matrices
  - hs_inner                  – Hilbert-Schmidt inner product tr(A^dagger B)

Kronecker convention: the A-system index is the slow index, so the basis
vector |i>|j> sits at position i*d_B + j. Every bipartite routine in the
package shares this convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike

from app.errors import DimMismatch, MissingSplit, NotHermitian, ValidationError

# Max-entry Hermiticity tolerance; inputs within it are symmetrized.
TOL_HERM = 1e-10

Subsystem = Literal["A", "B"]

# A 3x3 real matrix (correlation matrices T, T_i).
RealMatrix3 = np.ndarray


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Square complex matrix, optionally split as d_A x d_B."""

    entries: np.ndarray
    dims_split: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        arr = np.array(self.entries, dtype=complex, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise ValidationError(f"operator must be a non-empty square matrix, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)
        if self.dims_split is not None:
            d_a, d_b = (int(d) for d in self.dims_split)
            if d_a < 1 or d_b < 1 or d_a * d_b != arr.shape[0]:
                raise DimMismatch(
                    f"dims_split {self.dims_split} does not factor dimension {arr.shape[0]}",
                    invariant="dims_split_product",
                )
            object.__setattr__(self, "dims_split", (d_a, d_b))

    # --- construction helpers ---
    @classmethod
    def of(cls, values: ArrayLike | "OperatorMatrix", dims_split: tuple[int, int] | None = None) -> "OperatorMatrix":
        if isinstance(values, OperatorMatrix):
            return values if dims_split is None else cls(values.entries, dims_split)
        return cls(np.asarray(values), dims_split)

    @classmethod
    def identity(cls, dim: int, dims_split: tuple[int, int] | None = None) -> "OperatorMatrix":
        return cls(np.eye(dim), dims_split)

    @classmethod
    def projector(cls, vector: ArrayLike, dims_split: tuple[int, int] | None = None) -> "OperatorMatrix":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        return cls(np.outer(v, v.conj()), dims_split)

    def with_split(self, dims_split: tuple[int, int] | None) -> "OperatorMatrix":
        return OperatorMatrix(self.entries, dims_split)

    # --- properties ---
    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def is_bipartite(self) -> bool:
        return self.dims_split is not None

    def require_split(self) -> tuple[int, int]:
        if not self.is_bipartite:
            raise MissingSplit("operation needs a bipartite operator with dims_split set")
        return self.dims_split

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.dims_split)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def hermiticity_gap(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def is_hermitian(self, tol: float = TOL_HERM) -> bool:
        return self.hermiticity_gap() <= tol

    def hermitian_part(self) -> "OperatorMatrix":
        return OperatorMatrix((self.entries + self.entries.conj().T) / 2, self.dims_split)

    def max_abs_diff(self, other: "OperatorMatrix | ArrayLike") -> float:
        other_arr = other.entries if isinstance(other, OperatorMatrix) else np.asarray(other)
        return float(np.max(np.abs(self.entries - other_arr)))

    # --- arithmetic (split kept when both sides agree) ---
    def _merged_split(self, other: "OperatorMatrix") -> tuple[int, int] | None:
        if self.dims_split == other.dims_split:
            return self.dims_split
        return self.dims_split or other.dims_split

    def _check_same_dim(self, other: "OperatorMatrix") -> None:
        if self.dim != other.dim:
            raise DimMismatch(f"dimension {self.dim} vs {other.dim}")

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_same_dim(other)
        return OperatorMatrix(self.entries + other.entries, self._merged_split(other))

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_same_dim(other)
        return OperatorMatrix(self.entries - other.entries, self._merged_split(other))

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_same_dim(other)
        return OperatorMatrix(self.entries @ other.entries, self._merged_split(other))

    def __mul__(self, scalar: complex) -> "OperatorMatrix":
        return OperatorMatrix(self.entries * scalar, self.dims_split)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "OperatorMatrix":
        return OperatorMatrix(self.entries / scalar, self.dims_split)

    def __neg__(self) -> "OperatorMatrix":
        return OperatorMatrix(-self.entries, self.dims_split)


def real_matrix3(values: ArrayLike) -> RealMatrix3:
    """Validate and freeze a 3x3 real matrix."""
    arr = np.array(values, dtype=float, copy=True)
    if arr.shape != (3, 3):
        raise ValidationError(f"expected a 3x3 real matrix, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


# ---------------------------------------------------------------------------
# Products and reductions
# ---------------------------------------------------------------------------

def kron(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    """a (x) b with the A slot as the slow index; the result carries the split."""
    return OperatorMatrix(np.kron(a.entries, b.entries), (a.dim, b.dim))


def _as_blocks(x: OperatorMatrix) -> np.ndarray:
    d_a, d_b = x.require_split()
    return x.entries.reshape(d_a, d_b, d_a, d_b)


def partial_transpose(x: OperatorMatrix, subsystem: Subsystem = "B") -> OperatorMatrix:
    """Transpose the indices of one subsystem. Exact involution."""
    d_a, d_b = x.require_split()
    blocks = _as_blocks(x)
    if subsystem == "A":
        swapped = blocks.transpose(2, 1, 0, 3)
    elif subsystem == "B":
        swapped = blocks.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return OperatorMatrix(swapped.reshape(d_a * d_b, d_a * d_b), (d_a, d_b))


def partial_trace(x: OperatorMatrix, traced_subsystem: Subsystem) -> OperatorMatrix:
    """Trace out one subsystem; the result lives on the other one."""
    blocks = _as_blocks(x)
    if traced_subsystem == "A":
        return OperatorMatrix(np.trace(blocks, axis1=0, axis2=2))
    if traced_subsystem == "B":
        return OperatorMatrix(np.trace(blocks, axis1=1, axis2=3))
    raise ValueError(f"traced_subsystem must be 'A' or 'B', got {traced_subsystem!r}")


def contract_subsystem(x: OperatorMatrix, local: OperatorMatrix, keep: Subsystem) -> OperatorMatrix:
    """Contract one side of ``x`` against a local operator.

    keep="A": tr_B[(1 (x) local) X];  keep="B": tr_A[(local (x) 1) X].
    For Hermitian ``x`` and ``local`` the result is Hermitian, and
    tr(rho K) = tr((rho (x) local) X) for any rho on the kept side.
    """
    d_a, d_b = x.require_split()
    blocks = _as_blocks(x)
    if keep == "A":
        if local.dim != d_b:
            raise DimMismatch(f"local operator has dimension {local.dim}, B side is {d_b}")
        return OperatorMatrix(np.einsum("ijkl,lj->ik", blocks, local.entries))
    if keep == "B":
        if local.dim != d_a:
            raise DimMismatch(f"local operator has dimension {local.dim}, A side is {d_a}")
        return OperatorMatrix(np.einsum("ijkl,ki->jl", blocks, local.entries))
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def hs_inner(a: OperatorMatrix, b: OperatorMatrix) -> complex:
    """Hilbert-Schmidt inner product tr(A^dagger B)."""
    if a.dim != b.dim:
        raise DimMismatch(f"hs_inner on dimensions {a.dim} and {b.dim}")
    return complex(np.vdot(a.entries, b.entries))


# ---------------------------------------------------------------------------
# Spectral routines
# ---------------------------------------------------------------------------

def _checked_hermitian(x: OperatorMatrix) -> np.ndarray:
    gap = x.hermiticity_gap()
    if gap > TOL_HERM:
        raise NotHermitian(f"max |X - X^dagger| = {gap:.3e} exceeds {TOL_HERM:.0e}")
    return (x.entries + x.entries.conj().T) / 2


def hermitian_eig(x: OperatorMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvector columns."""
    values, vectors = np.linalg.eigh(_checked_hermitian(x))
    return values[::-1].copy(), vectors[:, ::-1].copy()


def eigvalsh(x: OperatorMatrix) -> np.ndarray:
    """Eigenvalues only, descending."""
    return np.linalg.eigvalsh(_checked_hermitian(x))[::-1].copy()


def min_eigenvalue(x: OperatorMatrix) -> float:
    return float(np.linalg.eigvalsh(_checked_hermitian(x))[0])


def top_eigenvector(x: OperatorMatrix) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and its eigenvector (first in sorted order on ties)."""
    values, vectors = hermitian_eig(x)
    return float(values[0]), vectors[:, 0]


def bottom_eigenvector(x: OperatorMatrix) -> tuple[float, np.ndarray]:
    values, vectors = np.linalg.eigh(_checked_hermitian(x))
    return float(values[0]), vectors[:, 0]


def operator_norm(x: OperatorMatrix) -> float:
    """Largest |eigenvalue| of a Hermitian operator."""
    return float(np.max(np.abs(eigvalsh(x))))


def psd_inverse_sqrt(x: OperatorMatrix) -> OperatorMatrix:
    """X^{-1/2} for a positive definite X."""
    values, vectors = hermitian_eig(x)
    if values[-1] <= 0:
        raise ValidationError("inverse square root needs a positive definite operator")
    return OperatorMatrix((vectors / np.sqrt(values)) @ vectors.conj().T, x.dims_split)


def singular_values(t: RealMatrix3) -> np.ndarray:
    """Singular values of a real 3x3 matrix, descending."""
    return np.linalg.svd(real_matrix3(t), compute_uv=False)


def nuclear_norm(t: RealMatrix3) -> float:
    """tr sqrt(T^T T), the sum of singular values."""
    return float(np.sum(singular_values(t)))
