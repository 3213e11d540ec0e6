"""Seeded instance generators.

Every generator is a pure function of its arguments. Random streams are
derived from ``(seed, *keys)`` through :class:`numpy.random.SeedSequence`, so
trial ``i`` of a sweep draws the same numbers no matter which other trials
run, or in what order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from . import linalg as la
from .errors import DomainError

SHAPES = ("loguniform", "uniform", "clustered")
FIELDS = ("real", "complex")


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based stream for ``(seed, *keys)``; all parts must be non-negative ints."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) % 2**64, *map(int, keys)]))


@dataclass(frozen=True)
class GenSpec:
    n: int
    rank: int | None = None
    cond: float = 10.0
    field: str = "complex"
    seed: int = 0
    shape: str = "loguniform"

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if self.rank is not None and not 0 <= self.rank <= self.n:
            raise DomainError(f"rank must lie in [0, n], got {self.rank}")
        if self.cond < 1:
            raise DomainError(f"condition number must be >= 1, got {self.cond}")
        if self.field not in FIELDS:
            raise DomainError(f"field must be one of {FIELDS}, got {self.field!r}")
        if self.shape not in SHAPES:
            raise DomainError(f"spectrum shape must be one of {SHAPES}, got {self.shape!r}")

    @property
    def r(self) -> int:
        return self.n if self.rank is None else self.rank


def _gaussian(rng: np.random.Generator, shape, field: str) -> NDArray:
    if field == "real":
        return rng.standard_normal(shape)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _haar(rng: np.random.Generator, n: int, field: str) -> NDArray:
    Q, R = np.linalg.qr(_gaussian(rng, (n, n), field))
    d = np.diagonal(R)
    phases = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return Q * phases


def haar_unitary(n: int, seed: int, field: str = "complex") -> NDArray:
    """Haar-distributed unitary (orthogonal for ``field="real"``)."""
    return _haar(derive_rng(seed, 0x4A), n, field)


def _spectrum(rng: np.random.Generator, k: int, cond: float, shape: str) -> NDArray:
    lo, hi = cond ** -0.5, cond ** 0.5
    if k == 0:
        return np.zeros(0)
    if cond == 1:
        return np.ones(k)
    if shape == "loguniform":
        vals = np.exp(rng.uniform(np.log(lo), np.log(hi), k))
    elif shape == "uniform":
        vals = rng.uniform(lo, hi, k)
    else:
        levels = np.exp(rng.uniform(np.log(lo), np.log(hi), max(1, k // 3)))
        levels = np.concatenate([[lo, hi], levels])
        vals = rng.choice(levels, size=k)
    if k >= 2:
        # pin both ends so the realised condition number is exactly cond
        vals[0], vals[-1] = hi, lo
    return np.sort(vals)[::-1]


def _assemble(U: NDArray, vals: NDArray) -> NDArray:
    return la.hermitian((U * vals) @ U.conj().T)


def random_pd(spec: GenSpec) -> NDArray:
    """PD matrix with spectrum in ``[cond^-1/2, cond^1/2]`` and Haar eigenvectors."""
    if spec.r != spec.n:
        raise DomainError("random_pd requires rank == n; use random_psd_rank")
    rng = derive_rng(spec.seed, 0x50)
    vals = _spectrum(rng, spec.n, spec.cond, spec.shape)
    if spec.cond == 1:
        return np.eye(spec.n, dtype=complex if spec.field == "complex" else float)
    return _assemble(_haar(rng, spec.n, spec.field), vals)


def random_psd_rank(spec: GenSpec) -> NDArray:
    """PSD matrix of exact rank ``spec.r``, built as ``U_r diag(vals) U_r*``."""
    if spec.r == spec.n:
        return random_pd(spec)
    dtype = complex if spec.field == "complex" else float
    if spec.r == 0:
        return np.zeros((spec.n, spec.n), dtype=dtype)
    rng = derive_rng(spec.seed, 0x50)
    vals = _spectrum(rng, spec.r, spec.cond, spec.shape)
    U = _haar(rng, spec.n, spec.field)[:, : spec.r]
    return _assemble(U, vals)


def random_nonsingular(n: int, seed: int, field: str = "complex", min_sv: float = 1e-3) -> NDArray:
    """Gaussian matrix resampled until its smallest singular value is >= ``min_sv``."""
    attempt = 0
    while True:
        M = _gaussian(derive_rng(seed, 0x53, attempt), (n, n), field)
        if la.svdvals_desc(M)[-1] >= min_sv:
            return M
        attempt += 1


def make_prop1_instance(n: int, r: int, seed: int, field: str = "complex", cond: float = 10.0):
    """Random partitioned pair satisfying ``X (A11^2 + A12 A12*) X = I_r``.

    ``A22 = A12* A11^{-1} A12 + W`` with ``W`` random PD keeps the full
    matrix ``[[A11, A12], [A12*, A22]]`` positive definite.
    """
    from .drury import PartitionedPair  # drury depends on this module

    if not 1 <= r <= n:
        raise DomainError(f"need 1 <= r <= n, got r={r}, n={n}")
    A11 = random_pd(GenSpec(r, cond=cond, field=field, seed=derive_seed(seed, 1)))
    rng = derive_rng(seed, 2)
    A12 = _gaussian(rng, (r, n - r), field)
    X = la.matrix_power(la.hermitian(A11 @ A11 + A12 @ A12.conj().T), -0.5)
    if n > r:
        W = random_pd(GenSpec(n - r, cond=cond, field=field, seed=derive_seed(seed, 3)))
        A22 = la.hermitian(A12.conj().T @ np.linalg.solve(A11, A12) + W)
    else:
        A22 = np.zeros((0, 0), dtype=A11.dtype)
    return PartitionedPair(X=X, A11=A11, A12=A12, A22=A22)


def derive_seed(seed: int, *keys: int) -> int:
    """Child 63-bit seed for ``(seed, *keys)``."""
    return int(derive_rng(seed, *keys).integers(0, 2**63 - 1))
