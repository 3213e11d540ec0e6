"""Per-index margin checks for the eigenvalue / singular-value AM-GM family.

Each check returns an :class:`InequalityResult` whose ``margins[j]`` is
``LHS_j - RHS_j`` with both sides sorted in non-increasing order. Loewner
(operator-order) checks report the single margin ``lambda_min(LHS - RHS)``.

Spectra of non-Hermitian products of PSD powers go through
:func:`matineq.linalg.product_singulars` / :func:`product_eigs`, which use
the similar Hermitian form and so always return real, nonnegative values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import linalg as la
from .errors import DomainError, NumericalFailure

PROVEN = ("eq1", "eq2", "weyl-gm", "eq3", "eq4", "eq5", "eq7", "eq8")
T_GRID = tuple(round(0.1 * k, 10) for k in range(11))


@dataclass(eq=False)
class InequalityResult:
    inequality_id: str
    margins: NDArray
    tolerance: float
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def min_margin(self) -> float:
        return float(np.min(self.margins))

    @property
    def passed(self) -> bool:
        return self.min_margin >= -self.tolerance

    @property
    def candidate_violation(self) -> bool:
        return not self.passed

    def to_record(self) -> dict[str, Any]:
        rec = {
            "id": self.inequality_id,
            "margins": [float(m) for m in self.margins],
            "min_margin": self.min_margin,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }
        if self.details:
            rec["details"] = {k: _jsonable(v) for k, v in self.details.items()}
        return rec


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [float(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


@dataclass(frozen=True, eq=False)
class InequalityInstance:
    A: NDArray
    B: NDArray
    t: float = 0.5

    def __post_init__(self):
        A = la.as_square(self.A, "A")
        B = la.as_square(self.B, "B")
        la.same_dim(A, B)
        if not 0.0 <= self.t <= 1.0:
            raise DomainError(f"weight t={self.t} outside [0, 1]")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)


def _pair(A, B, pd: bool):
    A = la.as_square(A, "A")
    B = la.as_square(B, "B")
    la.same_dim(A, B)
    check = la.require_pd if pd else la.require_psd
    check(A, "A")
    check(B, "B")
    return A, B


def _result(name, margins, A, B, tolerance, **details) -> InequalityResult:
    if tolerance is None:
        tolerance = la.tol(A, B)
    return InequalityResult(name, np.atleast_1d(np.asarray(margins, dtype=float)),
                            tolerance, details)


def weighted_sum(A: NDArray, B: NDArray, t: float) -> NDArray:
    return (1.0 - t) * A + t * B


def arithmetic_mean(A: NDArray, B: NDArray) -> NDArray:
    return 0.5 * A + 0.5 * B


# -- operator-order statements ----------------------------------------------

def check_amgm_loewner(A: ArrayLike, B: ArrayLike, tolerance: float | None = None) -> InequalityResult:
    """(A + B)/2 >= A # B in the Loewner order, for PD A, B."""
    A, B = _pair(A, B, pd=True)
    G = la.geometric_mean(A, B)
    return _result("eq1", [la.loewner_margin(arithmetic_mean(A, B), G)], A, B, tolerance)


def amgm_variant_lhs(A: NDArray, S: NDArray) -> NDArray:
    return A + S @ np.linalg.inv(A) @ S


def check_amgm_variant(A: ArrayLike, S: ArrayLike, tolerance: float | None = None) -> InequalityResult:
    """A + S A^{-1} S >= 2 S for PD A, S."""
    A, S = _pair(A, S, pd=True)
    margin = la.loewner_margin(amgm_variant_lhs(A, S), 2 * S)
    return _result("eq2", [margin], A, S, tolerance)


def check_weyl_gm(A: ArrayLike, B: ArrayLike, tolerance: float | None = None) -> InequalityResult:
    A, B = _pair(A, B, pd=True)
    lhs = la.eigvalsh_desc(A + B)
    rhs = 2 * la.eigvalsh_desc(la.geometric_mean(A, B))
    return _result("weyl-gm", lhs - rhs, A, B, tolerance)


# -- eigenvalue / singular value statements -----------------------------------

def check_bk1(A: ArrayLike, B: ArrayLike, tolerance: float | None = None) -> InequalityResult:
    """lambda_j(A+B) >= 2 sqrt(lambda_j(AB)).

    Also cross-checks sqrt(lambda_j(AB)) against sigma_j(A^{1/2} B^{1/2})
    computed from an explicit product and a full SVD; the gap is stored in
    ``details["identity_gap"]`` and a gap beyond tolerance raises.
    """
    A, B = _pair(A, B, pd=False)
    lhs = la.eigvalsh_desc(A + B)
    root = np.sqrt(la.product_eigs(A, 1.0, B, 1.0))
    res = _result("eq3", lhs - 2 * root, A, B, tolerance)
    direct = la.svdvals_desc(la.psd_sqrt(A) @ la.psd_sqrt(B))
    gap = float(np.max(np.abs(root - direct)))
    res.details["identity_gap"] = gap
    if gap > res.tolerance:
        raise NumericalFailure(
            f"sqrt(lambda(AB)) and sigma(A^1/2 B^1/2) disagree by {gap:.3e}", residual=gap)
    return res


def check_bk2(A: ArrayLike, B: ArrayLike, tolerance: float | None = None) -> InequalityResult:
    """lambda_j(A+B) >= 2 lambda_j(A^{1/2} B^{1/2})."""
    A, B = _pair(A, B, pd=False)
    lhs = la.eigvalsh_desc(A + B)
    rhs = 2 * la.product_eigs(A, 0.5, B, 0.5)
    return _result("eq4", lhs - rhs, A, B, tolerance)


def check_bkd(A: ArrayLike, B: ArrayLike, tolerance: float | None = None) -> InequalityResult:
    """lambda_j(A+B) >= 2 sqrt(sigma_j(AB))."""
    A, B = _pair(A, B, pd=False)
    lhs = la.eigvalsh_desc(A + B)
    rhs = 2 * np.sqrt(la.product_singulars(A, 1.0, B, 1.0))
    return _result("eq5", lhs - rhs, A, B, tolerance)


def _weighted(inst: InequalityInstance):
    A, B = _pair(inst.A, inst.B, pd=False)
    return A, B, inst.t, la.eigvalsh_desc(weighted_sum(A, B, inst.t))


def check_ando(inst: InequalityInstance, tolerance: float | None = None) -> InequalityResult:
    """lambda_j((1-t)A + tB) >= sigma_j(A^{1-t} B^t)."""
    A, B, t, lhs = _weighted(inst)
    rhs = la.product_singulars(A, 1.0 - t, B, t)
    return _result("eq7", lhs - rhs, A, B, tolerance, t=t)


def check_prop4(inst: InequalityInstance, tolerance: float | None = None) -> InequalityResult:
    """lambda_j((1-t)A + tB) >= lambda_j(A^{1-t} B^t)."""
    A, B, t, lhs = _weighted(inst)
    rhs = la.product_eigs(A, 1.0 - t, B, t)
    return _result("eq8", lhs - rhs, A, B, tolerance, t=t)


def check_conjecture(inst: InequalityInstance, tolerance: float | None = None) -> InequalityResult:
    """lambda_j((1-t)A + tB) >= sqrt(sigma_j(A^{2(1-t)} B^{2t})).

    Open statement: a negative margin beyond tolerance is reported through
    ``candidate_violation``, never raised.
    """
    A, B, t, lhs = _weighted(inst)
    rhs = np.sqrt(la.product_singulars(A, 2.0 * (1.0 - t), B, 2.0 * t))
    return _result("conjecture", lhs - rhs, A, B, tolerance, t=t)


def run_all(A: ArrayLike, B: ArrayLike, t: float = 0.5, *, S: ArrayLike | None = None,
            tolerance: float | None = None, include_conjecture: bool = True) -> dict[str, InequalityResult]:
    """Evaluate every check on one pair.

    The PD-only statements (eq1, eq2, weyl-gm) need positive definite input;
    callers pass an already perturbed pair for semidefinite instances.
    ``S`` defaults to ``B`` for the eq2 variant.
    """
    inst = InequalityInstance(A, B, t)
    out = {
        "eq1": check_amgm_loewner(A, B, tolerance),
        "eq2": check_amgm_variant(A, B if S is None else S, tolerance),
        "weyl-gm": check_weyl_gm(A, B, tolerance),
        "eq3": check_bk1(A, B, tolerance),
        "eq4": check_bk2(A, B, tolerance),
        "eq5": check_bkd(A, B, tolerance),
        "eq7": check_ando(inst, tolerance),
        "eq8": check_prop4(inst, tolerance),
    }
    if include_conjecture:
        out["conjecture"] = check_conjecture(inst, tolerance)
    return out
