"""Seeded regression runs of the proven inequalities.

Shared by ``matineq verify``, the acceptance tests and the sweep scripts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from numpy.typing import NDArray

from . import generators as gen
from . import linalg as la
from .inequalities import (
    PROVEN, InequalityInstance, InequalityResult, check_ando, check_bk1, check_bk2, check_bkd,
    check_conjecture, check_prop4, run_all,
)

# eq1, eq2 and weyl-gm need PD input; semidefinite pairs are shifted by this
# multiple of (1 + ||A|| + ||B||) before those three checks only
PD_SHIFT = 1e-4
PD_CHECKS = ("eq1", "eq2", "weyl-gm")

CONDS = (1.0, 10.0, 1e4)


@dataclass(frozen=True)
class TrialSpec:
    index: int
    n: int
    cond: float
    field: str
    rank: int | None
    t: float
    seed: int


def trial_specs(count: int, seed: int, dims=tuple(range(1, 13)), conds=CONDS) -> Iterator[TrialSpec]:
    """Deterministic instance schedule; trial ``i`` depends only on ``(seed, i)``."""
    for i in range(count):
        rng = gen.derive_rng(seed, 0x7E, i)
        n = int(dims[rng.integers(len(dims))])
        cond = float(conds[rng.integers(len(conds))])
        field_ = gen.FIELDS[int(rng.integers(2))]
        rank = None
        if n > 1 and rng.random() < 0.3:
            rank = int(rng.integers(1, n))
        t = float(rng.random())
        yield TrialSpec(i, n, cond, field_, rank, t, gen.derive_seed(seed, 0x7F, i))


def trial_pair(spec: TrialSpec) -> tuple[NDArray, NDArray]:
    ga = gen.GenSpec(spec.n, rank=spec.rank, cond=spec.cond, field=spec.field,
                     seed=gen.derive_seed(spec.seed, 1))
    gb = gen.GenSpec(spec.n, rank=None, cond=spec.cond, field=spec.field,
                     seed=gen.derive_seed(spec.seed, 2))
    A = gen.random_psd_rank(ga) if spec.rank is not None else gen.random_pd(ga)
    # alternate which side is singular so both argument slots see rank deficiency
    if spec.rank is not None and spec.index % 2:
        return gen.random_pd(gb), A
    return A, gen.random_pd(gb)


def check_pair(A, B, t: float = 0.5, tolerance: float | None = None,
               include_conjecture: bool = True) -> dict[str, InequalityResult]:
    """All checks on one pair, shifting semidefinite input for the PD-only ones."""
    A = la.require_psd(la.as_square(A, "A"), "A")
    B = la.require_psd(la.as_square(B, "B"), "B")
    la.same_dim(A, B)
    out = run_all(A, B, t, tolerance=tolerance, include_conjecture=False) if (
        la.is_pd(A) and la.is_pd(B)) else _mixed(A, B, t, tolerance)
    if include_conjecture:
        out["conjecture"] = check_conjecture(InequalityInstance(A, B, t), tolerance)
    return out


def _mixed(A, B, t, tolerance):
    shift = PD_SHIFT * la.scale(A, B) * np.eye(A.shape[0])
    shifted = run_all(A + shift, B + shift, t, tolerance=tolerance, include_conjecture=False)
    inst = InequalityInstance(A, B, t)
    out = {k: shifted[k] for k in PD_CHECKS}
    for k in PD_CHECKS:
        out[k].details["pd_shift"] = PD_SHIFT
    out.update({
        "eq3": check_bk1(A, B, tolerance),
        "eq4": check_bk2(A, B, tolerance),
        "eq5": check_bkd(A, B, tolerance),
        "eq7": check_ando(inst, tolerance),
        "eq8": check_prop4(inst, tolerance),
    })
    return {k: out[k] for k in PROVEN}


@dataclass
class RegressionSummary:
    trials: int = 0
    min_margin: dict[str, float] = field(default_factory=dict)
    # worst margin / tolerance, comparable across scales
    worst_ratio: dict[str, float] = field(default_factory=dict)
    failures: dict[str, list[int]] = field(default_factory=dict)

    def add(self, index: int, results: dict[str, InequalityResult]) -> None:
        self.trials += 1
        for k, res in results.items():
            m = res.min_margin
            self.min_margin[k] = min(self.min_margin.get(k, np.inf), m)
            self.worst_ratio[k] = min(self.worst_ratio.get(k, np.inf), m / res.tolerance)
            self.failures.setdefault(k, [])
            if not res.passed:
                self.failures[k].append(index)

    def proven_ok(self) -> bool:
        return all(not self.failures.get(k) for k in PROVEN)

    def to_record(self) -> dict:
        return {
            "trials": self.trials,
            "checks": [
                {"id": k, "min_margin": self.min_margin[k], "worst_margin_over_tol": self.worst_ratio[k],
                 "failures": len(self.failures[k]), "proven": k in PROVEN}
                for k in self.min_margin
            ],
            "proven_ok": self.proven_ok(),
        }


def regression(count: int, seed: int, tolerance: float | None = None, dims=tuple(range(1, 13)),
               include_conjecture: bool = True) -> RegressionSummary:
    summary = RegressionSummary()
    for spec in trial_specs(count, seed, dims):
        A, B = trial_pair(spec)
        summary.add(spec.index, check_pair(A, B, spec.t, tolerance, include_conjecture))
    return summary


PROP_KINDS = ("lemma1", "prop1", "prop2", "prop3")


def random_prop_result(kind: str, seed: int, max_n: int = 8, tolerance: float | None = None) -> InequalityResult:
    """Score one random instance of a proposition or of the lemma."""
    from . import drury

    rng = gen.derive_rng(seed, 0x9A)
    field_ = gen.FIELDS[int(rng.integers(2))]
    cond = float(CONDS[rng.integers(len(CONDS))])
    if kind == "prop1":
        n = int(rng.integers(1, max_n + 1))
        r = int(rng.integers(1, n + 1))
        return drury.verify_prop1(gen.make_prop1_instance(n, r, gen.derive_seed(seed, 1), field_, cond),
                                  tolerance)
    r = int(rng.integers(1, max_n // 2 + 1))
    first = gen.random_pd(gen.GenSpec(r, cond=cond, field=field_, seed=gen.derive_seed(seed, 1)))
    if kind == "lemma1":
        S = gen.random_nonsingular(r, gen.derive_seed(seed, 2), field_)
        return drury.lemma1_margin(first, S, tolerance)
    if kind == "prop2":
        N = gen.random_pd(gen.GenSpec(r, cond=cond, field=field_, seed=gen.derive_seed(seed, 2)))
        return drury.check_prop2(drury.Prop2Instance(first, N), tolerance)
    if kind == "prop3":
        Z = gen._gaussian(gen.derive_rng(seed, 2), (r, r), field_)
        return drury.check_prop3(drury.make_prop3_instance(first, Z), tolerance)
    raise ValueError(f"unknown kind {kind!r}; expected one of {PROP_KINDS}")
