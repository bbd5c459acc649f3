"""Complex-matrix kernels shared by the whole simulator.

Everything operates on 2-D ``complex128`` numpy arrays. Rank decisions are
made on singular values relative to the largest one (scale invariant), and
all functions return freshly allocated arrays marked read-only so values
can be shared between concurrent trials without copies.
"""

from __future__ import annotations

import numpy as np

# Singular values sigma <= tol * sigma_max count as zero.
DEFAULT_TOL = 1e-10

# 2-D complex128 ndarray; alias used in signatures throughout the package.
CMatrix = np.ndarray


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def cmatrix(entries) -> CMatrix:
    """Coerce nested rows (or an array) into a validated read-only matrix.

    Raises ValueError unless the result is 2-D with positive dimensions and
    every entry is finite.
    """
    a = np.array(entries, dtype=np.complex128, order="C")
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a 2-D matrix with positive dimensions, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return _freeze(a)


def random_gaussian_matrix(rows: int, cols: int, rng: np.random.Generator) -> CMatrix:
    """Draw a rows x cols matrix of i.i.d. CN(0, 1) entries.

    Real and imaginary parts are independent N(0, 1/2), so E|a_ij|^2 = 1.
    Deterministic given the generator state.
    """
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be positive")
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return _freeze((re + 1j * im) / np.sqrt(2.0))


def random_gaussian_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    """Length-n vector of i.i.d. CN(0, 1) entries (unit power per entry)."""
    re = rng.standard_normal(n)
    im = rng.standard_normal(n)
    v = (re + 1j * im) / np.sqrt(2.0)
    v.setflags(write=False)
    return v


def pseudo_inverse(A: CMatrix, tol: float = DEFAULT_TOL) -> CMatrix:
    """Moore-Penrose pseudoinverse via SVD.

    Singular values at or below ``tol * sigma_max`` are truncated, so
    rank-deficient inputs are handled without blow-up.
    """
    A = np.asarray(A)
    u, s, vh = np.linalg.svd(A, full_matrices=False)
    cutoff = tol * s[0] if s.size else 0.0
    keep = s > cutoff
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return _freeze((vh.conj().T * inv) @ u.conj().T)


def null_space_basis(A: CMatrix, tol: float = DEFAULT_TOL) -> CMatrix:
    """Orthonormal basis of {x : A x = 0} as a (cols, nullity) matrix.

    The nullity is decided by the relative cutoff ``tol * sigma_max``; a
    full-rank input yields a (cols, 0) array. A constraint-free input with
    zero rows yields the identity.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = np.asarray(A)
    if A.shape[0] == 0:
        return _freeze(np.eye(A.shape[1], dtype=np.complex128))
    u, s, vh = np.linalg.svd(A, full_matrices=True)
    cutoff = tol * s[0] if s.size else 0.0
    rank = int(np.sum(s > cutoff))
    return _freeze(vh[rank:].conj().T.copy())


def numeric_rank(A: CMatrix, tol: float = DEFAULT_TOL) -> int:
    """Number of singular values above ``tol * sigma_max``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = np.asarray(A)
    if A.shape[0] == 0 or A.shape[1] == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def orthonormal_columns(A: CMatrix) -> CMatrix:
    """Orthonormal basis of the column span (reduced QR).

    The input must have full column rank for the span to be preserved.
    """
    q, _ = np.linalg.qr(np.asarray(A))
    return _freeze(q)


def subspace_distance(A: CMatrix, B: CMatrix) -> float:
    """Spectral-norm distance between the column spans of A and B.

    Computes ``|| P_A - P_B ||_2`` with P_X the orthogonal projector onto
    the span of X. Spans of equal dimension give a value in [0, 1], and 0
    means the spans coincide. Both inputs need full column rank.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape[0] != B.shape[0]:
        raise ValueError(f"incompatible ambient spaces: {A.shape[0]} vs {B.shape[0]} rows")
    qa = orthonormal_columns(A)
    qb = orthonormal_columns(B)
    pa = qa @ qa.conj().T
    pb = qb @ qb.conj().T
    return float(np.linalg.norm(pa - pb, 2))
