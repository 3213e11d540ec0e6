"""Command-line entry point: ``matineq verify|reduce|prop|search|dsl|gen``.

Exit codes: 0 success, 1 a checked statement failed (or the search found a
violation), 2 bad configuration or input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import drury, harness, matfile
from . import generators as gen
from . import linalg as la
from . import search as srch
from .dsl import DslError, catalogue_file_text, evaluate, parse_file
from .errors import DegenerateInstance, DomainError, MatIneqError, NumericalFailure
from .inequalities import T_GRID

log = logging.getLogger("matineq")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("verify", "reduce", "prop", "search", "dsl", "gen")


class ConfigError(MatIneqError, ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    gen_spec: gen.GenSpec = field(default_factory=lambda: gen.GenSpec(3))
    trials: int | None = None
    tol_override: float | None = None
    input_paths: dict[str, str] = field(default_factory=dict)
    out_path: str | None = None
    format: str = "text"
    seed: int = 0
    options: dict[str, Any] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _emit(cfg: RunConfig, record: dict[str, Any], lines: list[str]) -> None:
    """Write the JSON record or the text lines (same numbers, repr precision)."""
    text = json.dumps(record, indent=2) if cfg.format == "json" else "\n".join(lines)
    if cfg.out_path and cfg.command not in ("gen", "search"):
        Path(cfg.out_path).write_text(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# matrix bindings
# ---------------------------------------------------------------------------

def parse_binding(spec: str) -> np.ndarray:
    """``path`` to a matrix file, a real number (1x1), or ``I:n``."""
    if spec.startswith("I:"):
        try:
            n = int(spec[2:])
        except ValueError:
            raise ConfigError(f"bad identity binding {spec!r}; expected I:<n>") from None
        if n < 1:
            raise ConfigError(f"identity size must be positive in {spec!r}")
        return np.eye(n)
    try:
        return np.array([[float(spec)]])
    except ValueError:
        pass
    return matfile.load(spec)


def _named_bindings(items: Sequence[str] | None) -> dict[str, np.ndarray]:
    out = {}
    for item in items or ():
        name, sep, spec = item.partition("=")
        if not sep or not name:
            raise ConfigError(f"--bind expects NAME=SPEC, got {item!r}")
        out[name] = parse_binding(spec)
    return out


def _pair_inputs(cfg: RunConfig) -> tuple[np.ndarray, np.ndarray] | None:
    paths = cfg.input_paths
    if not paths:
        return None
    if set(paths) != {"A", "B"}:
        raise ConfigError("supply both -A and -B")
    return parse_binding(paths["A"]), parse_binding(paths["B"])


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_verify(cfg: RunConfig) -> int:
    t = cfg.options.get("t")
    summary = harness.RegressionSummary()
    pair = _pair_inputs(cfg)
    index = 0
    if pair is not None:
        A, B = pair
        summary.add(index, harness.check_pair(A, B, 0.5 if t is None else t, cfg.tol_override))
        index += 1
    trials = cfg.trials if cfg.trials is not None else (0 if pair is not None else 100)
    dims = (cfg.options["n"],) if cfg.options.get("n") else tuple(range(1, 13))
    for spec in harness.trial_specs(trials, cfg.seed, dims):
        A, B = harness.trial_pair(spec)
        summary.add(index, harness.check_pair(A, B, spec.t if t is None else t, cfg.tol_override))
        index += 1
    if summary.trials == 0:
        raise ConfigError("nothing to verify: --trials 0 and no input matrices")
    rec = summary.to_record()
    lines = [f"{'check':<11} {'min_margin':>24} {'margin/tol':>24} {'failures':>8}"]
    for c in rec["checks"]:
        tag = "" if c["proven"] else "  (open conjecture; informational)"
        lines.append(f"{c['id']:<11} {_fmt(c['min_margin']):>24} {_fmt(c['worst_margin_over_tol']):>24} "
                     f"{c['failures']:>8}{tag}")
    lines.append(f"trials: {rec['trials']}  proven checks: {'ok' if rec['proven_ok'] else 'REGRESSION'}")
    _emit(cfg, rec, lines)
    return EXIT_OK if summary.proven_ok() else EXIT_FAIL


def _reduce_inputs(cfg: RunConfig) -> tuple[np.ndarray, np.ndarray]:
    pair = _pair_inputs(cfg)
    if pair is not None:
        return pair
    example = cfg.options.get("example")
    if example == "diagonal":
        return np.eye(2), np.diag([1.0, 0.5])
    if example == "identity":
        n = cfg.options.get("n") or 3
        return np.eye(n), np.eye(n)
    spec = cfg.gen_spec
    A = gen.random_pd(gen.GenSpec(spec.n, cond=spec.cond, field=spec.field, seed=gen.derive_seed(cfg.seed, 1)))
    B = gen.random_pd(gen.GenSpec(spec.n, cond=spec.cond, field=spec.field, seed=gen.derive_seed(cfg.seed, 2)))
    return A, B


def cmd_reduce(cfg: RunConfig) -> int:
    A, B = _reduce_inputs(cfg)
    n = la.same_dim(la.as_square(A, "A"), la.as_square(B, "B"))
    rs = cfg.options.get("r") or list(range(1, n + 1))
    for r in rs:
        if not 1 <= r <= n:
            raise ConfigError(f"r={r} out of range 1..{n}")
    traces = [drury.run_reduction(A, B, r) for r in rs]
    records = [tr.to_record() for tr in traces]
    lines = []
    for tr, rec in zip(traces, records):
        lines.append(f"r={tr.r} n={n} scale={_fmt(tr.scale)} perturbed={tr.perturbed} ok={tr.ok}")
        for st in rec["stages"]:
            vals = ", ".join(f"{k}={_fmt(v)}" for k, v in st.items() if k != "stage" and not isinstance(v, dict))
            lines.append(f"  {st['stage']:<10} {vals}")
        failed = [k for k, v in tr.checks.items() if not v]
        lines.append(f"  checks: {'all ok' if not failed else 'FAILED ' + ', '.join(failed)}")
    _emit(cfg, {"traces": records, "ok": all(tr.ok for tr in traces)}, lines)
    return EXIT_OK if all(tr.ok for tr in traces) else EXIT_FAIL


def cmd_prop(cfg: RunConfig) -> int:
    kind = cfg.options["kind"]
    binds = _named_bindings(cfg.options.get("bind"))
    tol = cfg.tol_override
    results = []
    if binds:
        need = {"lemma1": {"X", "S"}, "prop2": {"M", "N"}, "prop3": {"L", "Z"},
                "prop1": {"X", "A11", "A12", "A22"}}[kind]
        if set(binds) != need:
            raise ConfigError(f"{kind} needs bindings {sorted(need)}, got {sorted(binds)}")
        r = cfg.options.get("r")
        first = binds["X"] if "X" in binds else binds["M"] if "M" in binds else binds["L"]
        if r is not None and first.shape[0] != r:
            raise ConfigError(f"r={r} does not match the bound {first.shape[0]}x{first.shape[0]} block")
        if kind == "lemma1":
            results.append(drury.lemma1_margin(binds["X"], binds["S"], tol))
        elif kind == "prop2":
            results.append(drury.check_prop2(drury.Prop2Instance(binds["M"], binds["N"]), tol))
        elif kind == "prop3":
            results.append(drury.check_prop3(drury.make_prop3_instance(binds["L"], binds["Z"]), tol))
        else:
            results.append(drury.verify_prop1(drury.PartitionedPair(**binds), tol))
    else:
        trials = 100 if cfg.trials is None else cfg.trials
        max_n = cfg.options.get("n") or 8
        for i in range(trials):
            results.append(harness.random_prop_result(kind, gen.derive_seed(cfg.seed, i), max_n, tol))
    if not results:
        raise ConfigError("nothing to check: --trials 0 and no bindings")
    # the prop2 block matrix is indefinite by design; lambda_r >= 2 is what is checked
    ok = all(res.passed for res in results)
    recs = [res.to_record() for res in results]
    worst = min(results, key=lambda res: res.min_margin)
    lines = [f"{kind}: instances={len(results)} min_margin={_fmt(worst.min_margin)} "
             f"tolerance={_fmt(worst.tolerance)} passed={ok}"]
    if len(results) == 1:
        for k, v in recs[0].get("details", {}).items():
            lines.append(f"  {k}: {_fmt(v)}")
    _emit(cfg, {"kind": kind, "min_margin": worst.min_margin, "passed": ok, "results": recs}, lines)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_search(cfg: RunConfig) -> int:
    o = cfg.options
    sc = srch.SearchConfig(
        dims=tuple(o.get("dims") or ([o["n"]] if o.get("n") else range(2, 9))),
        t_grid=tuple(o.get("t_grid") or T_GRID),
        trials_per_cell=500 if cfg.trials is None else cfg.trials,
        refine_steps=o.get("refine_steps", 200),
        refine_top=o.get("refine_top", 10),
        step_scale=o.get("step_scale", 0.1),
        seed=cfg.seed,
        tol=cfg.tol_override,
        out_path=cfg.out_path,
        workers=o.get("workers", 1),
    )
    if o.get("resume"):
        if not cfg.out_path:
            raise ConfigError("--resume needs --out")
        report = srch.resume(cfg.out_path, sc, salvage=o.get("salvage", False))
    else:
        report = srch.run(sc)
    s = report.summary()
    lines = [f"cells={s['cells_run']} trials={s['trials_run']} min_margin_overall={_fmt(s['min_margin_overall'])} "
             f"violations={len(s['violations'])} near={s['near_violations']} wall_time={s['wall_time']:.2f}s"]
    for c in s["min_margin_per_cell"]:
        lines.append(f"  n={c['n']} t={c['t']:<4} min_margin={_fmt(c['min_margin'])}")
    for c in s["refined"]:
        lines.append(f"  refined n={c['n']} t={_fmt(c['t'])} j={c['j']} margin={_fmt(c['margin'])}")
    for c in s["violations"]:
        lines.append(f"  VIOLATION n={c['n']} t={_fmt(c['t'])} j={c['j']} margin={_fmt(c['margin'])} seed={c['seed']}")
    print(json.dumps(s, indent=2) if cfg.format == "json" else "\n".join(lines))
    return EXIT_FAIL if report.violations else EXIT_OK


def cmd_dsl(cfg: RunConfig) -> int:
    o = cfg.options
    if o.get("write_catalogue"):
        Path(o["write_catalogue"]).write_text(catalogue_file_text())
        return EXIT_OK
    source = o.get("file")
    if not source:
        raise ConfigError("dsl needs a statement file (or 'builtin')")
    text = catalogue_file_text() if source == "builtin" else _read_text(source)
    statements = parse_file(text)
    binds = _named_bindings(o.get("bind"))
    # unbound A, B, S default to seeded random PD matrices matching any bound ones
    spec = cfg.gen_spec
    n = next((M.shape[0] for M in binds.values() if getattr(M, "ndim", 0) == 2), spec.n)
    for k, name in enumerate(("A", "B", "S"), 1):
        if name not in binds:
            binds[name] = gen.random_pd(gen.GenSpec(n, cond=spec.cond, field=spec.field,
                                                    seed=gen.derive_seed(cfg.seed, 0xD5, k)))
    t = 0.5 if o.get("t") is None else o["t"]
    rows, ok = [], True
    for lineno, stmt in statements:
        res = evaluate(stmt, binds, t=t, tol=cfg.tol_override, name=str(stmt))
        ok &= res.passed
        rows.append({"line": lineno, **res.to_record()})
    lines = [f"{r['line']:>4}  {'ok  ' if r['passed'] else 'FAIL'}  min_margin={_fmt(r['min_margin'])}  "
             f"margins={_fmt(r['margins'])}  {r['id']}" for r in rows]
    _emit(cfg, {"statements": rows, "passed": ok}, lines)
    return EXIT_OK if ok else EXIT_FAIL


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc


def cmd_gen(cfg: RunConfig) -> int:
    kind = cfg.options.get("kind", "auto")
    spec = cfg.gen_spec
    if kind == "auto":
        kind = "psd" if spec.rank is not None and spec.rank < spec.n else "pd"
    if kind == "pd":
        M = gen.random_pd(spec)
    elif kind == "psd":
        M = gen.random_psd_rank(spec)
    elif kind == "unitary":
        M = gen.haar_unitary(spec.n, spec.seed, spec.field)
    elif kind == "nonsingular":
        M = gen.random_nonsingular(spec.n, spec.seed, spec.field)
    else:
        raise ConfigError(f"unknown generator kind {kind!r}")
    if cfg.out_path:
        matfile.save(cfg.out_path, M)
        print(cfg.out_path)
    else:
        print(matfile.dumps(M))
    return EXIT_OK


HANDLERS: dict[str, Callable[[RunConfig], int]] = {
    "verify": cmd_verify, "reduce": cmd_reduce, "prop": cmd_prop,
    "search": cmd_search, "dsl": cmd_dsl, "gen": cmd_gen,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=d, help="master seed (default: $MATINEQ_SEED or 0)")
    p.add_argument("--tol", type=float, default=d, help="absolute tolerance used by every check")
    p.add_argument("--trials", type=int, default=d, help="number of random instances / trials per cell")
    p.add_argument("--n", type=int, default=d, help="matrix dimension")
    p.add_argument("--json", action="store_true", default=d, help="emit JSON instead of text")
    p.add_argument("--out", default=d, help="output path")
    p.add_argument("--config", default=d, help="JSON file with generator settings (GenSpec fields)")
    p.add_argument("-v", "--verbose", action="store_true", default=d)


class _Parser(argparse.ArgumentParser):
    # prefix matching would make the subcommand's --t collide with --tol/--trials
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="matineq", description="Numerical checks of spectral matrix inequalities.")
    _global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        _global_flags(sp, suppress=True)
        return sp

    sp = add("verify", "regression run of the proven inequalities")
    sp.add_argument("-A", help="matrix file (or I:n / number) for A")
    sp.add_argument("-B", help="matrix file (or I:n / number) for B")
    sp.add_argument("--t", type=float, help="weight for the weighted statements (default: random per trial)")

    sp = add("reduce", "run the reduction pipeline and print its trace")
    sp.add_argument("-A")
    sp.add_argument("-B")
    sp.add_argument("--r", type=_int_list, help="indices, e.g. 1,3 (default: all)")
    sp.add_argument("--example", choices=("diagonal", "identity"))
    sp.add_argument("--cond", type=float, default=10.0)
    sp.add_argument("--field", choices=gen.FIELDS, default="complex")

    sp = add("prop", "check the lemma or a proposition on given or random instances")
    sp.add_argument("kind", choices=harness.PROP_KINDS)
    sp.add_argument("--bind", action="append", metavar="NAME=SPEC")
    sp.add_argument("--r", type=int)

    sp = add("search", "randomized counterexample search for the weighted conjecture")
    sp.add_argument("--dims", type=_int_list)
    sp.add_argument("--t-grid", type=_float_list)
    sp.add_argument("--refine-steps", type=int, default=200)
    sp.add_argument("--refine-top", type=int, default=10)
    sp.add_argument("--step-scale", type=float, default=0.1)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--resume", action="store_true")
    sp.add_argument("--salvage", action="store_true", help="on resume, keep the valid prefix of a corrupt file")

    sp = add("dsl", "evaluate inequality statements from a file")
    sp.add_argument("file", nargs="?", help="statement file, or 'builtin' for the catalogue")
    sp.add_argument("--bind", action="append", metavar="NAME=SPEC")
    sp.add_argument("--t", type=float)
    sp.add_argument("--write-catalogue", metavar="PATH")

    sp = add("gen", "write a random matrix as a matrix file")
    sp.add_argument("--kind", choices=("auto", "pd", "psd", "unitary", "nonsingular"), default="auto")
    sp.add_argument("--cond", type=float)
    sp.add_argument("--rank", type=int)
    sp.add_argument("--field", choices=gen.FIELDS)
    sp.add_argument("--shape", choices=gen.SHAPES)
    return p


def _gen_spec(args, seed: int) -> gen.GenSpec:
    fields: dict[str, Any] = {"n": 3, "seed": seed}
    if getattr(args, "config", None):
        try:
            loaded = json.loads(_read_text(args.config))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        if not isinstance(loaded, dict):
            raise ConfigError(f"{args.config}: expected a JSON object")
        unknown = set(loaded) - {f for f in gen.GenSpec.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"{args.config}: unknown fields {sorted(unknown)}")
        fields.update(loaded)
    for key in ("n", "cond", "rank", "field", "shape"):
        v = getattr(args, key, None)
        if v is not None:
            fields[key] = v
    try:
        return gen.GenSpec(**fields)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def config_from_args(args) -> RunConfig:
    seed = getattr(args, "seed", None)
    if seed is None:
        env = os.environ.get("MATINEQ_SEED")
        try:
            seed = int(env) if env else 0
        except ValueError:
            raise ConfigError(f"MATINEQ_SEED must be an integer, got {env!r}") from None
    if getattr(args, "tol", None) is not None and not args.tol >= 0:
        raise ConfigError("--tol must be a non-negative number")
    if getattr(args, "trials", None) is not None and args.trials < 0:
        raise ConfigError("--trials must be non-negative")
    inputs = {k: getattr(args, k) for k in ("A", "B") if getattr(args, k, None)}
    opts = {k: v for k, v in vars(args).items()
            if k not in {"command", "seed", "tol", "trials", "json", "out", "config", "verbose", "A", "B"}}
    return RunConfig(
        command=args.command,
        gen_spec=_gen_spec(args, seed),
        trials=getattr(args, "trials", None),
        tol_override=getattr(args, "tol", None),
        input_paths=inputs,
        out_path=getattr(args, "out", None),
        format="json" if getattr(args, "json", False) else "text",
        seed=seed,
        options=opts,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        return HANDLERS[cfg.command](cfg)
    except (NumericalFailure, DegenerateInstance) as exc:
        print(f"matineq: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DslError, matfile.MatrixFileError, srch.CorruptRecord, ConfigError, DomainError,
            MatIneqError, ValueError) as exc:
        print(f"matineq: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"matineq: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
