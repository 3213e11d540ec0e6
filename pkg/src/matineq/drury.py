"""Executable reduction of lambda_r(A+B) >= 2 sqrt(sigma_r(AB)) to a block-matrix bound.

Pipeline stages (names are part of the report schema):

``normalize``  scale so that sigma_r(AB) = 1
``b1``         B1 = (A^{-1} (sum_{k<=r} P_k) A^{-1})^{1/2}, P_k spectral projections of A B^2 A
``partition``  rotate range(B1) onto the first r coordinates, split A conformally
``a1``         replace A22 by A12* A11^{-1} A12
``prop1``      lambda_r([[A11+X, A12], [A12*, A12* A11^{-1} A12]]) >= 2

Every stage records residuals of the identities it relies on, so a trace is a
numerical certificate of the chain lambda_r(A+B) >= lambda_r(A+B1) >= lambda_r(A1+B1) >= 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import linalg as la
from .errors import DegenerateInstance, DimensionError, DomainError
from .inequalities import InequalityResult, check_bkd

STAGES = ("normalize", "b1", "partition", "a1", "prop1")
EPS_SWEEP = (1e-4, 1e-6, 1e-8)


def _lambda_r(H: NDArray, r: int) -> float:
    return float(la.eigvalsh_desc(H)[r - 1])


def _check_r(r: int, n: int) -> None:
    if not 1 <= r <= n:
        raise DomainError(f"index r={r} outside 1..{n}")


@dataclass(frozen=True, eq=False)
class PartitionedPair:
    X: NDArray
    A11: NDArray
    A12: NDArray
    A22: NDArray

    @property
    def r(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.r + self.A22.shape[0]

    def full_a(self) -> NDArray:
        return np.block([[self.A11, self.A12], [self.A12.conj().T, self.A22]])

    def constraint_residual(self) -> float:
        """Frobenius norm of X (A11^2 + A12 A12*) X - I_r."""
        X, A11, A12 = self.X, self.A11, self.A12
        lhs = X @ (A11 @ A11 + A12 @ A12.conj().T) @ X
        return float(np.linalg.norm(lhs - np.eye(self.r)))


@dataclass(frozen=True, eq=False)
class Prop2Instance:
    M: NDArray
    N: NDArray


@dataclass(frozen=True, eq=False)
class Prop3Instance:
    L: NDArray
    M: NDArray
    Z: NDArray

    def constraint_residual(self) -> float:
        L, M, Z = self.L, self.M, self.Z
        r = L.shape[0]
        lhs = M @ L @ (np.eye(r) + Z @ Z.conj().T) @ L @ M
        return float(np.linalg.norm(lhs - np.eye(r)))


# ---------------------------------------------------------------------------
# reduction stages
# ---------------------------------------------------------------------------

def normalize_pair(A: ArrayLike, B: ArrayLike, r: int, tolerance: float | None = None):
    """Return ``(cA, cB, c)`` with ``c = sigma_r(AB)^{-1/2}``."""
    A = la.require_pd(A, "A")
    B = la.require_pd(B, "B")
    n = la.same_dim(A, B)
    _check_r(r, n)
    if tolerance is None:
        tolerance = la.tol(A, B)
    s = float(la.svdvals_desc(A @ B)[r - 1])
    if s <= tolerance:
        raise DegenerateInstance(f"sigma_{r}(AB) = {s:.3e} is numerically zero")
    c = s ** -0.5
    return c * A, c * B, c


def _top_projection(H: NDArray, r: int) -> NDArray:
    dec = la.hermitian_eig(H)
    Ur = dec.unitary[:, :r]
    return Ur @ Ur.conj().T, dec.eigenvalues


def build_b1(A: ArrayLike, B: ArrayLike, r: int, tolerance: float | None = None) -> NDArray:
    """B1 = (A^{-1} P A^{-1})^{1/2} with P the top-r spectral projection of A B^2 A.

    Requires a normalized pair (lambda_r(A B^2 A) >= 1 - tol_proj).
    """
    A = la.as_square(A, "A")
    B = la.as_square(B, "B")
    n = la.same_dim(A, B)
    _check_r(r, n)
    if tolerance is None:
        tolerance = la.tol_proj(A, B)
    # eigenpairs of A B^2 A = (AB)(AB)* from the SVD of AB, which avoids
    # squaring the condition number
    svd = la.singular_values(A @ B)
    lam = svd.singulars ** 2
    if lam[r - 1] < 1 - tolerance:
        raise DomainError(
            f"lambda_{r}(A B^2 A) = {lam[r - 1]:.6g} < 1: pair is not normalized")
    # A^{-1} P A^{-1} = F F* with F = A^{-1} U_r; its square root W diag(s) W*
    # from the thin SVD of F has rank exactly r, where a dense square root
    # would lift the rounding noise of the null space to sqrt(eps) size
    F = np.linalg.solve(A, svd.left[:, :r])
    W, s, _ = np.linalg.svd(F, full_matrices=False)
    return la.hermitian((W * s) @ W.conj().T)


def numerical_rank(H: ArrayLike, rel: float = 1e-8) -> int:
    w = la.eigvalsh_desc(H)
    return int(np.sum(w > rel * max(w[0], 0.0)))


def partition_basis(A: ArrayLike, B1: ArrayLike, r: int):
    """Split along range(B1) (+) ker(B1).

    Returns ``(PartitionedPair, V)`` with ``V* B1 V = diag(X, 0)`` and
    ``V* A V = [[A11, A12], [A12*, A22]]``.
    """
    A = la.as_square(A, "A")
    B1 = la.as_square(B1, "B1")
    n = la.same_dim(A, B1)
    _check_r(r, n)
    dec = la.hermitian_eig(B1)
    w = dec.eigenvalues
    rank = int(np.sum(w > 1e-8 * max(w[0], 0.0)))
    if rank != r:
        raise DimensionError(f"rank(B1) = {rank}, expected {r}")
    V = dec.unitary
    Vh = V.conj().T
    Brot = Vh @ B1 @ V
    Arot = la.hermitian(Vh @ A @ V)
    pair = PartitionedPair(
        X=la.hermitian(Brot[:r, :r]),
        A11=Arot[:r, :r],
        A12=Arot[:r, r:],
        A22=Arot[r:, r:],
    )
    return pair, V


def build_a1(p: PartitionedPair) -> NDArray:
    """A1 = [[A11, A12], [A12*, A12* A11^{-1} A12]] in the partition basis."""
    la.require_pd(p.A11, "A11")
    corner = la.hermitian(p.A12.conj().T @ np.linalg.solve(p.A11, p.A12)) if p.n > p.r \
        else np.zeros((0, 0), dtype=p.A11.dtype)
    return np.block([[p.A11, p.A12], [p.A12.conj().T, corner]])


def prop1_block(p: PartitionedPair) -> NDArray:
    return build_a1(p) + _embed(p.X, p.n)


def _embed(X: NDArray, n: int) -> NDArray:
    out = np.zeros((n, n), dtype=np.result_type(X, float))
    r = X.shape[0]
    out[:r, :r] = X
    return out


# ---------------------------------------------------------------------------
# propositions
# ---------------------------------------------------------------------------

def lemma1_matrix(X: NDArray, S: NDArray) -> NDArray:
    Xinv = np.linalg.inv(X)
    Sinv = np.linalg.inv(S)
    return la.hermitian(np.block([[S @ Xinv @ S.conj().T, Sinv.conj().T], [Sinv, X]]))


def lemma1_margin(X: ArrayLike, S: ArrayLike, tolerance: float | None = None) -> InequalityResult:
    """lambda_r(K) - 2 for K = [[S X^{-1} S*, S^{-*}], [S^{-1}, X]].

    The proof chain is replayed and stored in ``details``:

    * ``similarity_gap``: spectra of K and of its polar-rotated form
      [[|S| X^{-1} |S|, |S|^{-1}], [|S|^{-1}, X]] (they are unitarily similar);
    * ``chain``: lambda_r(K) >= lambda_r(compression) >= lambda_r(|S| + |S|^{-1}) >= 2,
      the compression being by the isometry (I; I)/sqrt(2);
    * ``chain_ok``: each step holds within tolerance.
    """
    X = la.require_pd(X, "X")
    S = la.as_square(S, "S")
    r = la.same_dim(X, S)
    if la.svdvals_desc(S)[-1] <= la.tol(S):
        raise DomainError("S is numerically singular")
    if tolerance is None:
        tolerance = la.tol(X, S)
    K = lemma1_matrix(X, S)
    lamK = la.eigvalsh_desc(K)
    polar = la.polar_decompose(S)
    absS = polar.modulus
    absS_inv = np.linalg.inv(absS)
    Xinv = np.linalg.inv(X)
    rotated = la.hermitian(np.block([[absS @ Xinv @ absS, absS_inv], [absS_inv, X]]))
    similarity_gap = float(np.max(np.abs(lamK - la.eigvalsh_desc(rotated))))
    compressed = la.hermitian((X + absS @ Xinv @ absS) / 2 + absS_inv)
    chain = [
        float(lamK[r - 1]),
        _lambda_r(compressed, r),
        _lambda_r(absS + absS_inv, r),
        2.0,
    ]
    chain_ok = bool(all(chain[i] >= chain[i + 1] - tolerance for i in range(3))) \
        and bool(similarity_gap <= tolerance)
    return InequalityResult("lemma1", np.array([lamK[r - 1] - 2.0]), tolerance, {
        "lambda_min": float(lamK[-1]),
        "similarity_gap": similarity_gap,
        "chain": chain,
        "chain_ok": chain_ok,
    })


def verify_prop1(p: PartitionedPair, tolerance: float | None = None,
                 proj_tolerance: float | None = None) -> InequalityResult:
    """lambda_r([[A11+X, A12], [A12*, A12* A11^{-1} A12]]) - 2, with the proof replayed.

    ``details`` holds the residual of the factorization K = F F* for
    F = [[A11^{1/2}, X^{1/2}], [A12* A11^{-1/2}, 0]], the gap between the
    nonzero spectra of F F* and F* F, the residual of F* F against
    [[A11^{-1/2} X^{-2} A11^{-1/2}, A11^{1/2} X^{1/2}], [X^{1/2} A11^{1/2}, X]],
    and the lemma1 margin for S = A11^{-1/2} X^{-1/2}.
    """
    r, n = p.r, p.n
    A11 = la.require_pd(p.A11, "A11")
    X = la.require_pd(p.X, "X")
    if tolerance is None:
        tolerance = la.tol(A11, X, p.A12)
    if proj_tolerance is None:
        proj_tolerance = la.tol_proj(p.full_a(), X)
    K = la.hermitian(prop1_block(p))
    lamK = la.eigvalsh_desc(K)

    A11h = la.psd_sqrt(A11)
    A11ih = la.psd_inv_sqrt(A11)
    Xh = la.psd_sqrt(X)
    F = np.zeros((n, 2 * r), dtype=np.result_type(A11, X, p.A12))
    F[:r, :r] = A11h
    F[:r, r:] = Xh
    F[r:, :r] = p.A12.conj().T @ A11ih
    fact_res = float(np.linalg.norm(F @ F.conj().T - K))

    FtF = la.hermitian(F.conj().T @ F)
    lamG = la.eigvalsh_desc(FtF)
    k = min(n, 2 * r)
    spectra_gap = float(np.max(np.abs(lamK[:k] - lamG[:k])))

    Xinv = np.linalg.inv(X)
    closed = np.block([
        [A11ih @ Xinv @ Xinv @ A11ih, A11h @ Xh],
        [Xh @ A11h, X],
    ])
    closed_res = float(np.linalg.norm(FtF - closed))

    S = A11ih @ la.psd_inv_sqrt(X)
    lemma = lemma1_margin(X, S)
    checks = {
        "factorization": bool(fact_res <= proj_tolerance),
        "spectra": bool(spectra_gap <= tolerance),
        "closed_form": bool(closed_res <= proj_tolerance),
        "lemma1": lemma.passed,
    }
    return InequalityResult("prop1", np.array([lamK[r - 1] - 2.0]), tolerance, {
        "lambda_r": float(lamK[r - 1]),
        "factorization_residual": fact_res,
        "spectra_gap": spectra_gap,
        "closed_form_residual": closed_res,
        "lemma1_margin": lemma.min_margin,
        "constraint_residual": p.constraint_residual(),
        "checks": checks,
        "chain_ok": all(checks.values()),
    })


def prop2_matrix(M: NDArray, N: NDArray) -> NDArray:
    Ginv = np.linalg.inv(la.geometric_mean(M, N))
    return la.hermitian(np.block([[M, Ginv], [Ginv, N]]))


def check_prop2(inst: Prop2Instance, tolerance: float | None = None) -> InequalityResult:
    """lambda_r([[M, (M#N)^{-1}], [(M#N)^{-1}, N]]) - 2; the matrix is generally indefinite."""
    M = la.require_pd(inst.M, "M")
    N = la.require_pd(inst.N, "N")
    r = la.same_dim(M, N)
    if tolerance is None:
        tolerance = la.tol(M, N)
    lam = la.eigvalsh_desc(prop2_matrix(M, N))
    return InequalityResult("prop2", np.array([lam[r - 1] - 2.0]), tolerance, {
        "lambda_r": float(lam[r - 1]),
        "lambda_min": float(lam[-1]),
    })


def make_prop3_instance(L: ArrayLike, Z: ArrayLike) -> Prop3Instance:
    """Solve M L (I + Z Z*) L M = I for PSD M: M = (L (I + Z Z*) L)^{-1/2}."""
    L = la.require_pd(L, "L")
    Z = np.asarray(Z)
    if Z.ndim == 0:
        Z = Z.reshape(1, 1)
    r = L.shape[0]
    if Z.shape != (r, r):
        raise DimensionError(f"Z must be {r}x{r}, got {Z.shape}")
    Q = la.hermitian(L @ (np.eye(r) + Z @ Z.conj().T) @ L)
    return Prop3Instance(L=L, M=la.psd_inv_sqrt(Q), Z=Z)


def prop3_matrix(inst: Prop3Instance) -> NDArray:
    L, M, Z = inst.L, inst.M, inst.Z
    return la.hermitian(np.block([[L + M, L @ Z], [Z.conj().T @ L, Z.conj().T @ L @ Z]]))


def check_prop3(inst: Prop3Instance, tolerance: float | None = None) -> InequalityResult:
    """lambda_r(T) - 2 for T = [[L+M, LZ], [Z*L, Z*LZ]]; T itself must be PSD."""
    r = inst.L.shape[0]
    if tolerance is None:
        tolerance = la.tol(inst.L, inst.M, inst.Z)
    lam = la.eigvalsh_desc(prop3_matrix(inst))
    return InequalityResult("prop3", np.array([lam[r - 1] - 2.0]), tolerance, {
        "lambda_r": float(lam[r - 1]),
        "lambda_min": float(lam[-1]),
        "psd_ok": bool(lam[-1] >= -tolerance),
        "constraint_residual": inst.constraint_residual(),
    })


# ---------------------------------------------------------------------------
# full trace
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ReductionTrace:
    r: int
    scale: float
    eps: float
    A: NDArray
    B: NDArray
    B1: NDArray
    basis: NDArray
    partition: PartitionedPair
    A1: NDArray
    stage_eigen: dict[str, float]
    residuals: dict[str, float]
    tolerance: float
    proj_tolerance: float
    prop1: InequalityResult
    bkd_margin: float
    perturbed: bool = False
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def a1_original_basis(self) -> NDArray:
        return self.basis @ self.A1 @ self.basis.conj().T

    def to_record(self) -> dict[str, Any]:
        res, ev = self.residuals, self.stage_eigen
        stages = [
            {"stage": "normalize", "scale": self.scale, "eps": self.eps,
             "perturbed": self.perturbed, "lambda_r_A_plus_B": ev["A+B"]},
            {"stage": "b1", "lambda_r_A_plus_B1": ev["A+B1"],
             "b_minus_b1": res["b_minus_b1"], "b2_minus_b12": res["b2_minus_b12"],
             "ab1_projection": res["ab1_projection"], "b1a_projection": res["b1a_projection"]},
            {"stage": "partition", "constraint_residual": res["partition_constraint"]},
            {"stage": "a1", "lambda_r_A1_plus_B1": ev["A1+B1"], "a_minus_a1": res["a_minus_a1"]},
            {"stage": "prop1", "margin": self.prop1.min_margin,
             **{k: v for k, v in self.prop1.to_record().get("details", {}).items()}},
        ]
        return {
            "r": self.r,
            "n": int(self.A.shape[0]),
            "tolerance": self.tolerance,
            "proj_tolerance": self.proj_tolerance,
            "bkd_margin": self.bkd_margin,
            "ok": self.ok,
            "checks": dict(self.checks),
            "stages": stages,
        }


def _projection_residual(H: NDArray, r: int) -> float:
    P, _ = _top_projection(H, r)
    return float(np.linalg.norm(la.hermitian(H) - P))


def run_reduction(A: ArrayLike, B: ArrayLike, r: int, eps: float = 1e-8) -> ReductionTrace:
    """Run every stage for index ``r`` and collect the certificate.

    Semidefinite inputs are shifted to ``A + e I, B + e I`` with
    ``e = eps (1 + ||A|| + ||B||)``. A vanishing sigma_r(AB) after the shift
    raises :class:`DegenerateInstance`.
    """
    A0 = la.require_psd(A, "A")
    B0 = la.require_psd(B, "B")
    n = la.same_dim(A0, B0)
    _check_r(r, n)
    perturbed = not (la.is_pd(A0) and la.is_pd(B0))
    if perturbed:
        shift = eps * la.scale(A0, B0)
        A0 = A0 + shift * np.eye(n)
        B0 = B0 + shift * np.eye(n)
    bkd = check_bkd(A0, B0).margins[r - 1]

    An, Bn, c = normalize_pair(A0, B0, r)
    tolerance = la.tol(An, Bn)
    ptol = la.tol_proj(An, Bn)
    B1 = build_b1(An, Bn, r)
    pair, V = partition_basis(An, B1, r)
    A1 = build_a1(pair)
    prop1 = verify_prop1(pair, proj_tolerance=ptol)

    Vh = V.conj().T
    Arot = la.hermitian(Vh @ An @ V)
    stage_eigen = {
        "A+B": _lambda_r(An + Bn, r),
        "A+B1": _lambda_r(An + B1, r),
        "A1+B1": _lambda_r(A1 + _embed(pair.X, n), r),
    }
    residuals = {
        "b_minus_b1": la.min_eig(Bn - B1),
        "b2_minus_b12": la.min_eig(Bn @ Bn - B1 @ B1),
        "ab1_projection": _projection_residual(An @ B1 @ B1 @ An, r),
        "b1a_projection": _projection_residual(B1 @ An @ An @ B1, r),
        "partition_constraint": pair.constraint_residual(),
        "a_minus_a1": la.min_eig(Arot - A1),
        "prop1_vs_stage": abs(prop1.details["lambda_r"] - stage_eigen["A1+B1"]),
    }
    e = stage_eigen
    checks = {
        "chain_b1": e["A+B"] >= e["A+B1"] - tolerance,
        "chain_a1": e["A+B1"] >= e["A1+B1"] - tolerance,
        "chain_final": e["A1+B1"] >= 2 - tolerance,
        "b_geq_b1": residuals["b_minus_b1"] >= -tolerance,
        # B^2 - B1^2 is quadratic in the inputs, so its tolerance is too
        "b2_geq_b12": residuals["b2_minus_b12"] >= -1e-9 * la.scale(An, Bn) ** 2,
        "a_geq_a1": residuals["a_minus_a1"] >= -tolerance,
        "ab1_projection": bool(residuals["ab1_projection"] <= ptol),
        "b1a_projection": bool(residuals["b1a_projection"] <= ptol),
        "partition_constraint": bool(residuals["partition_constraint"] <= ptol),
        "prop1": prop1.passed and prop1.details["chain_ok"],
        "bkd": bool(bkd >= -la.tol(A0, B0)),
    }
    return ReductionTrace(
        r=r, scale=c, eps=eps, A=An, B=Bn, B1=B1, basis=V, partition=pair, A1=A1,
        stage_eigen=stage_eigen, residuals=residuals, tolerance=tolerance,
        proj_tolerance=ptol, prop1=prop1, bkd_margin=float(bkd), perturbed=perturbed,
        checks=checks,
    )


def epsilon_sweep(A: ArrayLike, B: ArrayLike, eps_values=EPS_SWEEP) -> dict[float, NDArray]:
    """Theorem margins lambda_j(A+B) - 2 sqrt(sigma_j(AB)) of ``A + e I, B + e I`` per eps."""
    A = la.require_psd(A, "A")
    B = la.require_psd(B, "B")
    n = la.same_dim(A, B)
    s = la.scale(A, B)
    out = {}
    for eps in eps_values:
        shift = eps * s * np.eye(n)
        out[eps] = check_bkd(A + shift, B + shift).margins
    return out
