"""Command-line harness: gen, sample, estimate, solve, run, experiment, curvature, alpha.

Exit codes: 0 pass, 1 bound violated, 2 configuration error, 3 insufficient samples.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from contextlib import contextmanager
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional

from . import kernels
from .algorithm import (RANDOM_FALLBACK, AlgoConfig, ConfigurationError, compute_alpha,
                        sequencing_from_samples, guarantee_bound)
from .assignment import assignment_to_sequence, solve_p1
from .core import PreconditionError, eval_F
from .estimation import (InsufficientSamplesError, build_buckets, concentration_report,
                         delta_tilde_matrix, DeltaMatrix)
from .functions import (FAMILIES, dumps_instance, instance_from_record, load_instance,
                        make_coverage_instance, make_facility_instance, make_modular_instance,
                        make_patience_scaled_instance, NormalizationError)
from .oracle import TooLargeError, brute_force_optimal, exact_expected_F, instance_curvature
from .sampling import (DatasetFormatError, ObservationModel, ObservationModelError,
                       build_dataset, delta_bound, dumps_dataset, load_dataset)

log = logging.getLogger("seqfromsamples")

EXIT_PASS, EXIT_BOUND, EXIT_CONFIG, EXIT_SAMPLES = 0, 1, 2, 3

RESULT_COLUMNS = ["seed", "branch", "sequence", "F_out", "F_opt", "ratio", "ratio_expected",
                  "bound", "alpha", "c", "m", "min_bucket"]


@dataclass
class ExperimentConfig:
    instance: dict
    m: int
    seeds: List[int]
    model: dict = field(default_factory=lambda: {"variant": "exact", "b": 0.0})
    c: Optional[object] = None  # float, "measured", or None with matching_only
    matching_only: bool = False
    estimation: str = "strict"
    tolerance: float = 0.05
    output: Optional[str] = None

    def __post_init__(self):
        if int(self.m) < 1:
            raise ConfigurationError(f"sample count m must be positive, got {self.m}")
        if not self.seeds:
            raise ConfigurationError("seed list is empty")
        if self.c is None and not self.matching_only:
            raise ConfigurationError("set c (a number or 'measured') or matching_only")
        if isinstance(self.c, str) and self.c != "measured":
            raise ConfigurationError(f"c must be a number or 'measured', got {self.c!r}")
        if self.estimation not in ("strict", "lenient"):
            raise ConfigurationError("estimation must be strict or lenient")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigurationError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from exc

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row.get(h)) for h in header])
    return buf.getvalue()


def _write(text: str, path: Optional[str]) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def evaluate_outcome(inst, outcome, c, m, seed, bound_mode="full"):
    """One result row; oracle columns stay empty past the enumeration guard."""
    alpha = compute_alpha(inst.n, inst.k)
    if bound_mode == "matching-only":
        bound = (1.0 - c) ** 2 if c is not None else None
    else:
        bound = guarantee_bound(c, alpha)
    row = {"seed": seed, "branch": outcome.branch,
           "sequence": " ".join(map(str, outcome.sequence)), "alpha": alpha, "c": c,
           "m": m, "min_bucket": outcome.diagnostics["min_bucket"], "bound": bound}
    f_out = eval_F(inst, outcome.sequence)
    row["F_out"] = f_out
    try:
        opt = brute_force_optimal(inst).optimum_value
    except TooLargeError:
        return row
    row["F_opt"] = opt
    row["ratio"] = f_out / opt if opt > 0 else 1.0
    row["ratio_expected"] = row["ratio"]
    if outcome.branch == RANDOM_FALLBACK:
        expected = exact_expected_F(inst)
        row["ratio_expected"] = expected / opt if opt > 0 else 1.0
    return row


def _resolve_c(cfg: ExperimentConfig, inst):
    if cfg.c == "measured":
        return instance_curvature(inst)
    if cfg.c is None:
        return instance_curvature(inst) if inst.n <= 10 else None
    return float(cfg.c)


@contextmanager
def _stage(name: str, seed: int):
    try:
        yield
    except Exception as exc:
        try:
            wrapped = type(exc)(f"stage {name} (seed {seed}): {exc}")
        except Exception:
            raise exc
        raise wrapped from exc


def run_seed(cfg: ExperimentConfig, seed: int) -> dict:
    with _stage("gen", seed):
        inst = instance_from_record(cfg.instance)
        c = _resolve_c(cfg, inst)
    with _stage("sample", seed):
        model = ObservationModel(cfg.model.get("variant", "exact"),
                                 float(cfg.model.get("b", 0.0)))
        ds = build_dataset(inst, model, int(cfg.m), seed)
    mode = "matching-only" if cfg.matching_only else "full"
    with _stage("run", seed):
        algo = AlgoConfig(c=None if cfg.matching_only else c, mode=mode, seed=seed,
                          estimation=cfg.estimation)
        outcome = sequencing_from_samples(ds, (inst.n, inst.k), algo)
    with _stage("evaluate", seed):
        return evaluate_outcome(inst, outcome, c, int(cfg.m), seed, mode)


def run_experiment(cfg: ExperimentConfig, workers: int = 1):
    """Rows in seed order plus a summary dict."""
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(run_seed, [cfg] * len(cfg.seeds), cfg.seeds))
    else:
        rows = [run_seed(cfg, s) for s in cfg.seeds]
    return rows, summarize(rows, cfg.tolerance)


def summarize(rows, tolerance: float) -> dict:
    ratios = [r["ratio_expected"] for r in rows if r.get("ratio_expected") is not None]
    bounds = [r["bound"] for r in rows if r.get("bound") is not None]
    summary = {"runs": len(rows), "min_ratio": min(ratios) if ratios else None,
               "mean_ratio": sum(ratios) / len(ratios) if ratios else None,
               "bound": min(bounds) if bounds else None, "tolerance": tolerance}
    checks = [r["ratio_expected"] >= r["bound"] - tolerance for r in rows
              if r.get("ratio_expected") is not None and r.get("bound") is not None]
    summary["passed"] = all(checks) if checks else None
    return summary


def format_summary(s: dict) -> str:
    verdict = {True: "PASS", False: "FAIL", None: "UNCHECKED"}[s["passed"]]
    return (f"summary runs={s['runs']} min_ratio={_fmt(s['min_ratio'])} "
            f"mean_ratio={_fmt(s['mean_ratio'])} bound={_fmt(s['bound'])} "
            f"tolerance={s['tolerance']} {verdict}")


def _floats(text):
    return [float(x) for x in text.split(",")] if text else None


def cmd_gen(args) -> int:
    if args.k > args.n:
        raise PreconditionError(f"k={args.k} exceeds n={args.n}")
    fam = args.family
    if fam == "modular":
        params = {"weights": _floats(args.weights)} if args.weights else \
            {"low": args.low, "high": args.high}
        inst = make_modular_instance(args.n, args.k, params, args.seed)
    elif fam == "coverage":
        inst = make_coverage_instance(args.n, args.k, args.universe, args.density, args.seed)
    elif fam == "facility":
        inst = make_facility_instance(args.n, args.k, args.clients, args.seed)
    else:
        base = {"family": args.base_family, "n": args.n, "k": 1, "seed": args.seed}
        if args.base_family == "modular":
            base["params"] = {"low": args.low, "high": args.high}
        elif args.base_family == "coverage":
            base["params"] = {"universe_size": args.universe, "density": args.density}
        else:
            base["params"] = {"clients": args.clients}
        scales = _floats(args.scales) or [1.0 / args.k] * args.k
        inst = make_patience_scaled_instance(base, args.k, scales)
    _write(dumps_instance(inst), args.out)
    return EXIT_PASS


def cmd_sample(args) -> int:
    inst = load_instance(args.instance)
    model = ObservationModel(args.model, args.noise_b)
    ds = build_dataset(inst, model, args.m, args.seed)
    _write(dumps_dataset(ds), args.out)
    return EXIT_PASS


def cmd_estimate(args) -> int:
    ds = load_dataset(args.dataset)
    bi = build_buckets(ds)
    dm = delta_tilde_matrix(bi, ds.n, ds.k, "lenient" if args.lenient else "strict")
    _write(dm.to_csv(), args.out)
    rep = concentration_report(bi, delta_bound(ds, args.delta), ds.n, args.target)
    print(rep.summary(), file=sys.stderr)
    return EXIT_PASS


def cmd_solve(args) -> int:
    with open(args.deltas) as fh:
        dm = DeltaMatrix.from_csv(fh.read())
    a = solve_p1(dm, dm.n, dm.k)
    seq = assignment_to_sequence(a)
    print(f"sequence={' '.join(map(str, seq))} total_weight={a.total_weight!r}")
    return EXIT_PASS


def cmd_run(args) -> int:
    ds = load_dataset(args.dataset)
    inst = load_instance(args.instance) if args.instance else None
    mode = "matching-only" if args.matching_only else "full"
    if not args.matching_only and args.c is None:
        raise ConfigurationError("pass --c or --matching-only")
    algo = AlgoConfig(c=args.c, mode=mode, seed=args.seed,
                      estimation="lenient" if args.lenient else "strict")
    outcome = sequencing_from_samples(ds, (ds.n, ds.k), algo)
    if inst is not None:
        if (inst.n, inst.k) != (ds.n, ds.k):
            raise ConfigurationError("instance and dataset disagree on n or k")
        c = args.c
        if c is None and inst.n <= 10:
            c = instance_curvature(inst)
        row = evaluate_outcome(inst, outcome, c, ds.m, args.seed, mode)
    else:
        alpha = outcome.diagnostics["alpha"]
        row = {"seed": args.seed, "branch": outcome.branch,
               "sequence": " ".join(map(str, outcome.sequence)), "alpha": alpha, "c": args.c,
               "m": ds.m, "min_bucket": outcome.diagnostics["min_bucket"],
               "bound": None if args.c is None else
               ((1 - args.c) ** 2 if args.matching_only else guarantee_bound(args.c, alpha))}
    _write(_csv_text(RESULT_COLUMNS, [row]), args.out)
    return EXIT_PASS


def cmd_experiment(args) -> int:
    with open(args.config) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
    cfg = ExperimentConfig.from_dict(raw)
    rows, summary = run_experiment(cfg, args.workers)
    _write(_csv_text(RESULT_COLUMNS, rows), args.out or cfg.output)
    print(format_summary(summary), file=sys.stderr if (args.out or cfg.output) in (None, "-")
          else sys.stdout)
    return EXIT_PASS if summary["passed"] is not False else EXIT_BOUND


def cmd_curvature(args) -> int:
    from .oracle import measure_curvature
    inst = load_instance(args.instance)
    per = [measure_curvature(f, inst.n) for f in inst.functions]
    print(f"c={max(per)!r}")
    for t, c in enumerate(per, start=1):
        print(f"f_{t} c={c!r}")
    return EXIT_PASS


def cmd_alpha(args) -> int:
    print(repr(compute_alpha(args.n, args.k)))
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="seqfs", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance record")
    g.add_argument("--family", choices=FAMILIES, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--weights", help="comma-separated fixed modular weights")
    g.add_argument("--low", type=float, default=0.0)
    g.add_argument("--high", type=float, default=1.0)
    g.add_argument("--universe", type=int, default=10)
    g.add_argument("--density", type=float, default=0.3)
    g.add_argument("--clients", type=int, default=10)
    g.add_argument("--base-family", choices=FAMILIES[:3], default="coverage")
    g.add_argument("--scales", help="comma-separated patience scales (default 1/k each)")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("sample", help="draw a two-stage uniform dataset")
    s.add_argument("--instance", required=True)
    s.add_argument("--model", default="exact")
    s.add_argument("--noise-b", type=float, default=0.0)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    e = sub.add_parser("estimate", help="export the estimated marginal-gain matrix")
    e.add_argument("--dataset", required=True)
    e.add_argument("--lenient", action="store_true")
    e.add_argument("--delta", type=float, help="override the observed value bound")
    e.add_argument("--target", type=float, help="per-bucket failure probability target")
    e.add_argument("--out")
    e.set_defaults(func=cmd_estimate)

    v = sub.add_parser("solve", help="solve the assignment for an exported matrix")
    v.add_argument("--deltas", required=True)
    v.set_defaults(func=cmd_solve)

    r = sub.add_parser("run", help="run sequencing-from-samples on a dataset")
    r.add_argument("--dataset", required=True)
    r.add_argument("--instance", help="instance file, enables oracle columns")
    r.add_argument("--c", type=float)
    r.add_argument("--matching-only", action="store_true")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--lenient", action="store_true")
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    x = sub.add_parser("experiment", help="run a seeded experiment from a JSON config")
    x.add_argument("--config", required=True)
    x.add_argument("--out")
    x.add_argument("--workers", type=int, default=1)
    x.set_defaults(func=cmd_experiment)

    c = sub.add_parser("curvature", help="measure instance curvature by enumeration")
    c.add_argument("--instance", required=True)
    c.set_defaults(func=cmd_curvature)

    a = sub.add_parser("alpha", help="print alpha for n, k")
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--k", type=int, required=True)
    a.set_defaults(func=cmd_alpha)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    log.info("kernel backend: %s", kernels.BACKEND)
    try:
        return args.func(args)
    except InsufficientSamplesError as exc:
        print(f"error [{args.command}]: insufficient samples: {exc}", file=sys.stderr)
        return EXIT_SAMPLES
    except (ConfigurationError, PreconditionError, ObservationModelError, NormalizationError,
            DatasetFormatError, OSError, ValueError, KeyError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
