"""Dense Hermitian and general matrix kernels.

Every routine accepts real or complex ``ndarray`` input; real arrays are the
zero-imaginary-part embedding and are kept real for speed. Eigenvalues and
singular values are always returned in non-increasing order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DimensionError, DomainError, NumericalFailure

EPS = np.finfo(float).eps

# Phase normalization threshold on unit-norm eigenvectors.
_PHASE_FLOOR = 1e-10


# ---------------------------------------------------------------------------
# tolerances
# ---------------------------------------------------------------------------

def norm2(M: ArrayLike) -> float:
    """Spectral norm; 0 for empty matrices."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def tol(*mats: ArrayLike, rel: float = 1e-9) -> float:
    """Default check tolerance ``rel * (1 + sum of spectral norms)``."""
    return rel * (1.0 + sum(norm2(m) for m in mats))


def scale(*mats: ArrayLike) -> float:
    return 1.0 + sum(norm2(m) for m in mats)


def tol_psd(H: ArrayLike) -> float:
    return 1e-10 * (1.0 + norm2(H))


def tol_pd(H: ArrayLike) -> float:
    return 1e-12 * (1.0 + norm2(H))


def tol_proj(A: ArrayLike, B: ArrayLike) -> float:
    """Tolerance for degree-4 quantities such as A B^2 A being a projection."""
    n = np.asarray(A).shape[0]
    return 1e-8 * np.sqrt(n) * (1.0 + norm2(A) + norm2(B)) ** 2


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def as_square(M: ArrayLike, name: str = "matrix") -> NDArray:
    M = np.asarray(M)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if not np.issubdtype(M.dtype, np.complexfloating):
        M = M.astype(float, copy=False)
    return M


def hermitian(H: ArrayLike) -> NDArray:
    """Return ``(H + H*) / 2``, exactly self-adjoint."""
    H = as_square(H)
    return (H + H.conj().T) / 2


def same_dim(*mats: NDArray) -> int:
    dims = {m.shape for m in mats}
    if len(dims) != 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    return mats[0].shape[0]


def _eigvalsh(H: NDArray) -> NDArray:
    try:
        w = np.linalg.eigvalsh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"Hermitian eigensolver did not converge: {exc}") from exc
    return w[::-1]


def eigvalsh_desc(H: ArrayLike) -> NDArray:
    """Eigenvalues of the Hermitian part of ``H`` in non-increasing order."""
    return _eigvalsh(hermitian(H))


def min_eig(H: ArrayLike) -> float:
    return float(eigvalsh_desc(H)[-1])


def require_psd(P: ArrayLike, name: str = "matrix") -> NDArray:
    P = hermitian(P)
    lo = float(_eigvalsh(P)[-1])
    if lo < -tol_psd(P):
        raise DomainError(f"{name} is not positive semidefinite (min eigenvalue {lo:.3e})")
    return P


def require_pd(P: ArrayLike, name: str = "matrix") -> NDArray:
    P = hermitian(P)
    lo = float(_eigvalsh(P)[-1])
    if lo <= tol_pd(P):
        raise DomainError(f"{name} is not positive definite (min eigenvalue {lo:.3e})")
    return P


def is_psd(P: ArrayLike) -> bool:
    try:
        require_psd(P)
    except DomainError:
        return False
    return True


def is_pd(P: ArrayLike) -> bool:
    try:
        require_pd(P)
    except DomainError:
        return False
    return True


# ---------------------------------------------------------------------------
# factorizations
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: NDArray
    unitary: NDArray

    def projection(self, k: int) -> NDArray:
        """Rank-one spectral projection ``u_k u_k*`` (0-based k)."""
        u = self.unitary[:, k : k + 1]
        return u @ u.conj().T

    def reconstruct(self) -> NDArray:
        U = self.unitary
        return (U * self.eigenvalues) @ U.conj().T


@dataclass(frozen=True, eq=False)
class Svd:
    singulars: NDArray
    left: NDArray
    right: NDArray

    def reconstruct(self) -> NDArray:
        k = len(self.singulars)
        return (self.left[:, :k] * self.singulars) @ self.right[:, :k].conj().T


@dataclass(frozen=True, eq=False)
class PolarDecomposition:
    unitary: NDArray
    modulus: NDArray


def _normalize_phases(U: NDArray) -> NDArray:
    U = U.copy()
    for k in range(U.shape[1]):
        col = U[:, k]
        idx = np.flatnonzero(np.abs(col) > _PHASE_FLOOR)
        if idx.size:
            z = col[idx[0]]
            U[:, k] = col * (np.conj(z) / abs(z))
    return U


def hermitian_eig(H: ArrayLike) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Eigenvector phases are fixed so the first entry above ``1e-10`` in
    modulus is real positive. Within a run of bitwise-equal eigenvalues the
    columns are ordered lexicographically (real parts, then imaginary parts),
    which makes the basis of a degenerate eigenspace reproducible.
    """
    H = hermitian(H)
    try:
        w, U = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"Hermitian eigensolver did not converge: {exc}") from exc
    w = w[::-1].copy()
    U = _normalize_phases(U[:, ::-1])
    start = 0
    n = len(w)
    while start < n:
        stop = start + 1
        while stop < n and w[stop] == w[start]:
            stop += 1
        if stop - start > 1:
            block = U[:, start:stop]
            keys = [tuple(np.concatenate([block[:, i].real, block[:, i].imag]))
                    for i in range(stop - start)]
            order = sorted(range(stop - start), key=lambda i: keys[i], reverse=True)
            U[:, start:stop] = block[:, order]
        start = stop
    return SpectralDecomposition(w, U)


def spectral_residuals(dec: SpectralDecomposition, H: ArrayLike) -> tuple[float, float]:
    """(unitarity residual, reconstruction residual), both Frobenius."""
    U = dec.unitary
    n = U.shape[0]
    unit = float(np.linalg.norm(U.conj().T @ U - np.eye(n)))
    rec = float(np.linalg.norm(dec.reconstruct() - hermitian(H)))
    return unit, rec


def singular_values(M: ArrayLike) -> Svd:
    """Full SVD with singular values descending."""
    M = np.asarray(M)
    if M.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {M.shape}")
    try:
        W, s, Vh = np.linalg.svd(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc
    return Svd(s, W, Vh.conj().T)


def svdvals_desc(M: ArrayLike) -> NDArray:
    try:
        return np.linalg.svd(np.asarray(M), compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc


# ---------------------------------------------------------------------------
# matrix functions
# ---------------------------------------------------------------------------

def _eig_checked(P: NDArray, t: float) -> tuple[NDArray, NDArray]:
    try:
        w, U = np.linalg.eigh(P)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"Hermitian eigensolver did not converge: {exc}") from exc
    lo = w[0]
    if lo < -tol_psd(P):
        raise DomainError(f"matrix power of a non-PSD matrix (min eigenvalue {lo:.3e})")
    if t < 0 and lo <= tol_pd(P):
        raise DomainError(f"negative power {t} of a singular matrix (min eigenvalue {lo:.3e})")
    return np.clip(w, 0.0, None), U


def matrix_power(P: ArrayLike, t: float) -> NDArray:
    """``P**t`` for PSD ``P`` (PD when ``t < 0``), with ``0**t = 0`` for ``t > 0``.

    For ``t > 0`` eigenvalues at or below the rounding floor
    ``32 n eps lambda_max`` count as zero.
    """
    P = as_square(P)
    if t == 1:
        return P
    n = P.shape[0]
    if t == 0:
        return np.eye(n, dtype=P.dtype)
    P = hermitian(P)
    w, U = _eig_checked(P, t)
    floor = 32 * n * EPS * w[-1] if t > 0 else 0.0
    with np.errstate(divide="ignore"):
        d = np.where(w > floor, w ** t, 0.0)
    return hermitian((U * d) @ U.conj().T)


def psd_sqrt(P: ArrayLike) -> NDArray:
    """PSD square root; eigenvalues in ``[-tol_psd, 0)`` are clamped to zero."""
    return matrix_power(P, 0.5)


def psd_inv_sqrt(P: ArrayLike) -> NDArray:
    return matrix_power(P, -0.5)


def geometric_mean(A: ArrayLike, B: ArrayLike) -> NDArray:
    """Geometric mean ``A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}`` of PD matrices.

    Raises
    ------
    DimensionError
        If the shapes differ.
    DomainError
        If either argument is not positive definite.
    """
    A = as_square(A, "A")
    B = as_square(B, "B")
    same_dim(A, B)
    A = require_pd(A, "A")
    B = require_pd(B, "B")
    w, U = _eig_checked(A, -0.5)
    r = np.sqrt(w)
    half = (U * r) @ U.conj().T
    inv_half = (U / r) @ U.conj().T
    inner = psd_sqrt(hermitian(inv_half @ B @ inv_half))
    return hermitian(half @ inner @ half)


def riccati_residual(G: ArrayLike, A: ArrayLike, B: ArrayLike) -> float:
    """Frobenius norm of ``G A^{-1} G - B``."""
    G = np.asarray(G)
    return float(np.linalg.norm(G @ np.linalg.solve(A, G) - B))


def polar_decompose(S: ArrayLike) -> PolarDecomposition:
    """Right polar decomposition ``S = U |S|`` from the SVD.

    For singular ``S`` the unitary factor is ``W V*`` built from the full
    SVD, the closest unitary to ``S``.
    """
    S = as_square(S, "S")
    dec = singular_values(S)
    V = dec.right
    U = dec.left @ V.conj().T
    modulus = hermitian((V * dec.singulars) @ V.conj().T)
    return PolarDecomposition(U, modulus)


def loewner_margin(A: ArrayLike, B: ArrayLike) -> float:
    """``lambda_min(A - B)``; ``A >= B`` in the Loewner order iff this is >= 0."""
    A = as_square(A, "A")
    B = as_square(B, "B")
    same_dim(A, B)
    return min_eig(A - B)


def loewner_geq(A: ArrayLike, B: ArrayLike, tolerance: float | None = None) -> bool:
    if tolerance is None:
        tolerance = tol(A, B)
    return loewner_margin(A, B) >= -tolerance


# ---------------------------------------------------------------------------
# spectra of products of PSD powers
# ---------------------------------------------------------------------------

def psd_power_factor(P: ArrayLike, power: float) -> tuple[NDArray, NDArray]:
    """Thin factor ``(Q, d)`` with ``P**power = Q diag(d) Q*``.

    Eigenvalues below ``32 n eps lambda_max`` are treated as exact zeros and
    dropped, so structural null spaces give exact zero singular values in
    :func:`product_singulars`. ``power == 0`` yields the identity.
    """
    P = as_square(P)
    n = P.shape[0]
    if power == 0:
        return np.eye(n, dtype=P.dtype), np.ones(n)
    P = hermitian(P)
    w, U = _eig_checked(P, power)
    floor = 32 * n * EPS * max(w[-1], 0.0)
    keep = w > floor
    if power < 0:
        keep[:] = True
    d = w[keep] ** power
    return U[:, keep], d


def product_singulars(A: ArrayLike, a: float, B: ArrayLike, b: float) -> NDArray:
    """Singular values of ``A**a @ B**b`` for PSD ``A, B`` (length n, descending)."""
    A = as_square(A, "A")
    B = as_square(B, "B")
    n = same_dim(A, B)
    QA, dA = psd_power_factor(A, a)
    QB, dB = psd_power_factor(B, b)
    out = np.zeros(n)
    if dA.size and dB.size:
        core = (dA[:, None] * (QA.conj().T @ QB)) * dB[None, :]
        s = svdvals_desc(core)
        out[: s.size] = s
    return out


def product_eigs(A: ArrayLike, a: float, B: ArrayLike, b: float) -> NDArray:
    """Eigenvalues of ``A**a @ B**b`` for PSD ``A, B``.

    The product is similar to the PSD matrix ``A**(a/2) B**b A**(a/2)``,
    whose eigenvalues are the squared singular values of ``A**(a/2) B**(b/2)``.
    """
    return product_singulars(A, a / 2, B, b / 2) ** 2
