"""Counterexample search for the weighted conjecture

    lambda_j((1-t)A + tB) >= sqrt(sigma_j(A^{2(1-t)} B^{2t})).

A sweep scores ``trials_per_cell`` random PD pairs for every ``(n, t)`` cell;
the worst interior-``t`` trials are then refined by a gradient-free random
search. Trial ``i`` of cell ``(n, t_k)`` draws from the stream
``(seed, n, k, i)``, so results do not depend on evaluation order, and a run
can be split and resumed from its JSONL record file without changing any
number in the report.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np
from numpy.typing import NDArray

from . import generators as gen
from . import linalg as la
from . import matfile
from .errors import MatIneqError
from .inequalities import T_GRID, InequalityInstance, check_conjecture

log = logging.getLogger(__name__)

DECAY = 0.95
NEAR_REL = 1e-3


class CorruptRecord(MatIneqError, ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class SearchConfig:
    dims: tuple[int, ...] = (2, 3, 4, 5, 6, 7, 8)
    t_grid: tuple[float, ...] = T_GRID
    trials_per_cell: int = 500
    refine_steps: int = 200
    refine_top: int = 10
    step_scale: float = 0.1
    seed: int = 0
    tol: float | None = None
    out_path: str | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        object.__setattr__(self, "t_grid", tuple(float(t) for t in self.t_grid))
        if any(not 0.0 <= t <= 1.0 for t in self.t_grid):
            raise ValueError(f"t grid must lie in [0, 1]: {self.t_grid}")
        if any(n < 1 for n in self.dims):
            raise ValueError(f"dimensions must be >= 1: {self.dims}")
        if min(self.trials_per_cell, self.refine_steps, self.refine_top) < 0:
            raise ValueError("counts must be non-negative")

    def identity(self) -> dict[str, Any]:
        """Fields that must agree between a run and its resumption."""
        return {"dims": list(self.dims), "t_grid": list(self.t_grid), "seed": self.seed,
                "step_scale": self.step_scale, "refine_steps": self.refine_steps}


@dataclass(eq=False)
class Candidate:
    A: NDArray
    B: NDArray
    t: float
    j: int
    margin: float
    provenance_seed: int
    refined: bool = False

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def tolerance(self) -> float:
        return la.tol(self.A, self.B)

    def recompute(self) -> float:
        return float(check_conjecture(InequalityInstance(self.A, self.B, self.t)).margins[self.j - 1])

    def to_record(self) -> dict[str, Any]:
        return {"n": self.n, "t": self.t, "j": self.j, "margin": self.margin,
                "seed": self.provenance_seed, "refined": self.refined,
                "A": matfile.to_dict(self.A), "B": matfile.to_dict(self.B)}

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> "Candidate":
        return cls(A=matfile.from_dict(rec["A"], "A"), B=matfile.from_dict(rec["B"], "B"),
                   t=float(rec["t"]), j=int(rec["j"]), margin=float(rec["margin"]),
                   provenance_seed=int(rec["seed"]), refined=bool(rec["refined"]))


@dataclass(eq=False)
class SearchReport:
    cells_run: int
    trials_run: int
    min_margin_overall: float
    min_margin_per_cell: dict[tuple[int, float], float]
    violations: list[Candidate]
    refined: list[Candidate] = field(default_factory=list)
    near_violations: int = 0
    wall_time: float = 0.0

    def summary(self) -> dict[str, Any]:
        """JSON-ready summary; everything except ``wall_time`` is deterministic."""
        return {
            "cells_run": self.cells_run,
            "trials_run": self.trials_run,
            "min_margin_overall": self.min_margin_overall,
            "min_margin_per_cell": [
                {"n": n, "t": t, "min_margin": m}
                for (n, t), m in sorted(self.min_margin_per_cell.items())
            ],
            "violations": [c.to_record() for c in self.violations],
            "refined": [{"n": c.n, "t": c.t, "j": c.j, "margin": c.margin, "seed": c.provenance_seed}
                        for c in self.refined],
            "near_violations": self.near_violations,
            "wall_time": self.wall_time,
        }


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------

def trial_seed(master: int, n: int, t_index: int, trial: int) -> int:
    return gen.derive_seed(master, n, t_index, trial)


def instance_from_seed(n: int, seed: int) -> tuple[NDArray, NDArray]:
    """PD pair for one trial.

    A quarter of the pairs are near-congruent (``B = G A G*`` with ``G``
    close to the identity), where the conjecture is closest to equality.
    """
    rng = gen.derive_rng(seed, 0)
    field_ = "complex" if rng.random() < 0.5 else "real"
    shape = gen.SHAPES[int(rng.integers(len(gen.SHAPES)))]
    cond_a, cond_b = 10.0 ** rng.uniform(0.0, 4.0, size=2)
    A = gen.random_pd(gen.GenSpec(n, cond=cond_a, field=field_, shape=shape,
                                  seed=gen.derive_seed(seed, 1)))
    if rng.random() < 0.25:
        delta = 10.0 ** rng.uniform(-3.0, -0.5)
        G = np.eye(n) + delta * gen._gaussian(gen.derive_rng(seed, 2), (n, n), field_)
        B = la.hermitian(G @ A @ G.conj().T)
    else:
        B = gen.random_pd(gen.GenSpec(n, cond=cond_b, field=field_, shape=shape,
                                      seed=gen.derive_seed(seed, 3)))
    return A, B


def score(A: NDArray, B: NDArray, t: float) -> tuple[int, float]:
    """(1-based worst index, margin there) of the conjecture."""
    m = check_conjecture(InequalityInstance(A, B, t)).margins
    j = int(np.argmin(m))
    return j + 1, float(m[j])


def _run_trial(master: int, n: int, t_index: int, t: float, trial: int) -> dict[str, Any]:
    seed = trial_seed(master, n, t_index, trial)
    A, B = instance_from_seed(n, seed)
    j, margin = score(A, B, t)
    return {"type": "trial", "n": n, "t_index": t_index, "t": t, "trial": trial,
            "j": j, "margin": margin, "scale": la.scale(A, B), "seed": seed}


def _run_cell(args) -> list[dict[str, Any]]:
    master, n, t_index, t, start, stop = args
    return [_run_trial(master, n, t_index, t, i) for i in range(start, stop)]


# ---------------------------------------------------------------------------
# refinement
# ---------------------------------------------------------------------------

def refine(candidate: Candidate, steps: int, step_scale: float, seed: int) -> Candidate:
    """Random local search on ``(G_A, G_B, t)`` with ``A = G_A G_A* + dI``.

    Each proposal perturbs both factors and ``t`` by Gaussian noise of size
    ``step_scale * 0.95**k`` (relative to the factor norms), clamps ``t`` to
    [0, 1] and rescales the pair to the candidate's ``||A|| + ||B||`` so that
    margins stay comparable. A proposal is kept only if it lowers the worst
    margin, hence the output margin never exceeds the input margin.
    """
    if steps <= 0:
        return candidate
    A, B, t = candidate.A, candidate.B, candidate.t
    n = A.shape[0]
    target = la.norm2(A) + la.norm2(B)
    delta = 1e-10 * (1.0 + target)
    field_ = "complex" if np.iscomplexobj(A) or np.iscomplexobj(B) else "real"
    GA, GB = la.psd_sqrt(A), la.psd_sqrt(B)
    best = candidate
    rng = gen.derive_rng(seed, 0x52)
    for k in range(steps):
        sigma = step_scale * DECAY ** k
        GA2 = GA + sigma * la.norm2(GA) / np.sqrt(n) * gen._gaussian(rng, (n, n), field_)
        GB2 = GB + sigma * la.norm2(GB) / np.sqrt(n) * gen._gaussian(rng, (n, n), field_)
        t2 = float(np.clip(t + sigma * rng.standard_normal(), 0.0, 1.0))
        A2 = la.hermitian(GA2 @ GA2.conj().T) + delta * np.eye(n)
        B2 = la.hermitian(GB2 @ GB2.conj().T) + delta * np.eye(n)
        s = target / (la.norm2(A2) + la.norm2(B2))
        A2, B2 = s * A2, s * B2
        j2, m2 = score(A2, B2, t2)
        if m2 < best.margin:
            best = Candidate(A2, B2, t2, j2, m2, seed, refined=True)
            GA, GB, t = np.sqrt(s) * GA2, np.sqrt(s) * GB2, t2
    return best


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def read_records(path: str | Path, salvage: bool = False) -> list[dict[str, Any]]:
    """Parse a JSONL record stream.

    A malformed line raises :class:`CorruptRecord` with its line number;
    with ``salvage=True`` the valid prefix is returned instead.
    """
    path = Path(path)
    if not path.exists():
        return []
    records = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                if not isinstance(rec, dict) or "type" not in rec:
                    raise ValueError("record is not an object with a 'type' field")
            except ValueError as exc:
                if salvage:
                    log.warning("%s: dropping records from line %d on (%s)", path, lineno, exc)
                    break
                raise CorruptRecord(str(exc), lineno) from exc
            records.append(rec)
    return records


class _Appender:
    def __init__(self, path: str | Path | None, rewrite: list[dict] | None = None):
        self.fh = None
        if path is None:
            return
        path = Path(path)
        if rewrite is not None:
            with path.open("w") as fh:
                for rec in rewrite:
                    fh.write(json.dumps(rec) + "\n")
        self.fh = path.open("a")

    def write(self, rec: dict[str, Any]) -> None:
        if self.fh is not None:
            self.fh.write(json.dumps(rec) + "\n")

    def close(self):
        if self.fh is not None:
            self.fh.close()


def persist_candidates(report: SearchReport, path: str | Path) -> None:
    """Append every violation and refined candidate of ``report`` to ``path``."""
    app = _Appender(path)
    try:
        for c in report.violations:
            app.write({"type": "candidate", **c.to_record()})
        for c in report.refined:
            app.write({"type": "candidate", **c.to_record()})
    finally:
        app.close()


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def _tolerance(cfg: SearchConfig, A, B) -> float:
    return la.tol(A, B) if cfg.tol is None else cfg.tol


def _refine_key(rec: dict[str, Any]) -> tuple[int, int, int]:
    return rec["n"], rec["t_index"], rec["trial"]


def run(cfg: SearchConfig, resume: bool = False, salvage: bool = False) -> SearchReport:
    """Sweep every cell up to ``trials_per_cell`` trials, then refine.

    With ``resume=True`` the records already in ``cfg.out_path`` are reused:
    trials found there are not re-run and refinements found there are not
    recomputed, so a split run reports exactly what a single run would.
    """
    t0 = time.perf_counter()
    previous: list[dict[str, Any]] = []
    rewrite = None
    if resume and cfg.out_path:
        try:
            previous = read_records(cfg.out_path)
        except CorruptRecord:
            if not salvage:
                raise
            previous = read_records(cfg.out_path, salvage=True)
            rewrite = previous
        header = next((r for r in previous if r["type"] == "config"), None)
        if header is not None and header["identity"] != cfg.identity():
            raise ValueError("resume: configuration differs from the one recorded in the file")
    elif cfg.out_path:
        rewrite = []

    trials: dict[tuple[int, int, int], dict[str, Any]] = {}
    refined_cache: dict[tuple[int, int, int], dict[str, Any]] = {}
    for rec in previous:
        if rec["type"] == "trial":
            trials[(rec["n"], rec["t_index"], rec["trial"])] = rec
        elif rec["type"] == "refined":
            refined_cache[_refine_key(rec["source"])] = rec

    app = _Appender(cfg.out_path, rewrite)
    try:
        if not previous or rewrite == []:
            app.write({"type": "config", "identity": cfg.identity()})
        jobs = []
        for n in cfg.dims:
            for k, t in enumerate(cfg.t_grid):
                done = 0
                while (n, k, done) in trials:
                    done += 1
                if done < cfg.trials_per_cell:
                    jobs.append((cfg.seed, n, k, t, done, cfg.trials_per_cell))
        if cfg.workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(cfg.workers) as pool:
                results: Iterable = list(pool.map(_run_cell, jobs))
        else:
            results = map(_run_cell, jobs)
        for cell in results:
            for rec in cell:
                trials[(rec["n"], rec["t_index"], rec["trial"])] = rec
                app.write(rec)
                if 0.0 < rec["t"] < 1.0 and rec["margin"] < NEAR_REL * rec["scale"]:
                    A, B = instance_from_seed(rec["n"], rec["seed"])
                    cand = Candidate(A, B, rec["t"], rec["j"], rec["margin"], rec["seed"])
                    app.write({"type": "candidate", **cand.to_record()})

        selected = [r for r in trials.values() if r["trial"] < cfg.trials_per_cell
                    and r["n"] in cfg.dims and r["t_index"] < len(cfg.t_grid)]
        per_cell: dict[tuple[int, float], float] = {}
        for r in selected:
            key = (r["n"], cfg.t_grid[r["t_index"]])
            per_cell[key] = min(per_cell.get(key, np.inf), r["margin"])

        interior = [r for r in selected if 0.0 < r["t"] < 1.0]
        interior.sort(key=lambda r: (r["margin"] / r["scale"], r["n"], r["t_index"], r["trial"]))
        refined: list[Candidate] = []
        for r in interior[: cfg.refine_top]:
            key = _refine_key(r)
            cached = refined_cache.get(key)
            if cached is not None:
                refined.append(Candidate.from_record(cached))
                continue
            A, B = instance_from_seed(r["n"], r["seed"])
            start = Candidate(A, B, r["t"], r["j"], r["margin"], r["seed"])
            out = refine(start, cfg.refine_steps, cfg.step_scale, r["seed"])
            refined.append(out)
            app.write({"type": "refined", "source": {"n": r["n"], "t_index": r["t_index"],
                                                     "trial": r["trial"]}, **out.to_record()})
    finally:
        app.close()

    violations = []
    for r in sorted(selected, key=lambda r: (r["n"], r["t_index"], r["trial"])):
        if r["margin"] < -(cfg.tol if cfg.tol is not None else 1e-9 * r["scale"]):
            A, B = instance_from_seed(r["n"], r["seed"])
            violations.append(Candidate(A, B, r["t"], r["j"], r["margin"], r["seed"]))
    violations += [c for c in refined if c.margin < -_tolerance(cfg, c.A, c.B)]

    margins = [r["margin"] for r in selected] + [c.margin for c in refined]
    near = sum(1 for r in selected if 0.0 < r["t"] < 1.0 and r["margin"] < NEAR_REL * r["scale"])
    return SearchReport(
        cells_run=len(per_cell),
        trials_run=len(selected),
        min_margin_overall=float(min(margins)) if margins else float("inf"),
        min_margin_per_cell=per_cell,
        violations=violations,
        refined=refined,
        near_violations=near,
        wall_time=time.perf_counter() - t0,
    )


def random_sweep(cfg: SearchConfig) -> SearchReport:
    """Sweep only (no refinement); a fresh run unless ``cfg.out_path`` is resumed via :func:`resume`."""
    return run(SearchConfig(**{**asdict(cfg), "refine_top": 0}))


def resume(path: str | Path, cfg: SearchConfig | None = None, salvage: bool = False) -> SearchReport:
    """Continue the run recorded in ``path``.

    Without ``cfg`` the recorded configuration is reused with zero additional
    trials, which rebuilds the report from the file.
    """
    if cfg is None:
        records = read_records(path, salvage=salvage)
        header = next((r for r in records if r["type"] == "config"), None)
        if header is None:
            return SearchReport(0, 0, float("inf"), {}, [])
        ident = header["identity"]
        counts: dict[tuple[int, int], int] = {}
        for r in records:
            if r["type"] == "trial":
                counts[(r["n"], r["t_index"])] = counts.get((r["n"], r["t_index"]), 0) + 1
        per = min(counts.values()) if counts else 0
        top = sum(1 for r in records if r["type"] == "refined")
        cfg = SearchConfig(dims=ident["dims"], t_grid=ident["t_grid"], seed=ident["seed"],
                           step_scale=ident["step_scale"], refine_steps=ident["refine_steps"],
                           trials_per_cell=per, refine_top=top)
    cfg = SearchConfig(**{**asdict(cfg), "out_path": str(path)})
    return run(cfg, resume=True, salvage=salvage)
