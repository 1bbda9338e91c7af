"""Sequencing from samples: estimate, match, then pick by the curvature test."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .assignment import Assignment, assignment_to_sequence, solve_p1
from .core import PreconditionError, Sequence
from .estimation import DeltaMatrix, avg_full, build_buckets, delta_tilde_matrix
from .sampling import Dataset

CASE_A = "CaseA"
CASE_B = "CaseB"
RANDOM_FALLBACK = "RandomFallback"
MODES = ("full", "matching-only")


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class AlgoConfig:
    c: Optional[float] = None
    mode: str = "full"
    seed: int = 0
    estimation: str = "strict"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.c is not None and not 0.0 <= self.c <= 1.0:
            raise ConfigurationError(f"curvature must lie in [0, 1], got {self.c}")
        if self.c is None and self.mode != "matching-only":
            raise ConfigurationError("unknown curvature requires matching-only mode")


@dataclass(frozen=True)
class AlgoOutcome:
    sequence: Sequence
    branch: str
    diagnostics: dict
    matching_sequence: Sequence
    deltas: DeltaMatrix = field(repr=False)
    assignment: Assignment = field(repr=False)


def compute_alpha(n: int, k: int) -> float:
    """Probability that a uniform ordered ``k``-sample avoids a fixed ``k``-set.

    Zero when ``n < 2k``.
    """
    if not 1 <= k <= n:
        raise PreconditionError(f"need 1 <= k <= n, got n={n}, k={k}")
    if n < 2 * k:
        return 0.0
    alpha = 1.0
    for j in range(k):
        alpha *= (n - k - j) / (n - j)
    return alpha


def curvature_thresholds(c: float, alpha: float) -> Tuple[float, float]:
    """``((1-c)^2, alpha (1-c) / (1 + c - c^2))``."""
    return (1.0 - c) ** 2, alpha * (1.0 - c) / (1.0 + c - c * c)


def guarantee_bound(c: float, alpha: float) -> float:
    return max(curvature_thresholds(c, alpha))


def random_sequence(n: int, k: int, rng: np.random.Generator) -> Sequence:
    if not 1 <= k <= n:
        raise PreconditionError(f"need 1 <= k <= n, got n={n}, k={k}")
    return Sequence(rng.choice(n, size=k, replace=False).tolist())


def min_support(deltas: DeltaMatrix) -> int:
    """Smallest bucket behind any estimate (slot-0 baselines need no bucket)."""
    sizes = [int(deltas.last_counts.min())]
    if deltas.k > 1:
        sizes.append(int(deltas.excl_counts[:, 1:].min()))
    return min(sizes)


def sequencing_from_samples(ds: Dataset, inst_meta: Tuple[int, int],
                            cfg: AlgoConfig) -> AlgoOutcome:
    n, k = inst_meta
    if (ds.n, ds.k) != (n, k):
        raise ConfigurationError(f"dataset is for n={ds.n}, k={ds.k}, expected n={n}, k={k}")
    bi = build_buckets(ds)
    deltas = delta_tilde_matrix(bi, n, k, cfg.estimation)
    assignment = solve_p1(deltas, n, k)
    pi_s = assignment_to_sequence(assignment)
    alpha = compute_alpha(n, k)
    diag = {
        "alpha": alpha,
        "sum_delta": assignment.total_weight,
        "c": cfg.c,
        "mode": cfg.mode,
        "min_bucket": min_support(deltas),
        "avg_full": avg_full(bi, "lenient"),
    }

    if cfg.mode == "matching-only":
        return AlgoOutcome(pi_s, CASE_A, diag, pi_s, deltas, assignment)

    c = cfg.c
    lhs, rhs = curvature_thresholds(c, alpha)
    weighted = (1.0 - c) * assignment.total_weight
    diag.update(threshold_lhs=lhs, threshold_rhs=rhs, weighted_sum=weighted)
    if lhs >= rhs:
        return AlgoOutcome(pi_s, CASE_A, diag, pi_s, deltas, assignment)
    full = avg_full(bi, cfg.estimation)
    diag["avg_full"] = full
    if weighted >= full:
        return AlgoOutcome(pi_s, CASE_B, diag, pi_s, deltas, assignment)
    rng = np.random.default_rng(cfg.seed)
    return AlgoOutcome(random_sequence(n, k, rng), RANDOM_FALLBACK, diag, pi_s,
                       deltas, assignment)


def outcome_csv_header():
    return ["branch", "alpha", "threshold_lhs", "threshold_rhs", "sum_delta",
            "weighted_sum", "avg_full", "sequence"]


def outcome_csv_row(out: AlgoOutcome):
    d = out.diagnostics

    def fmt(x):
        return "" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))

    return [out.branch, fmt(d.get("alpha")), fmt(d.get("threshold_lhs")),
            fmt(d.get("threshold_rhs")), fmt(d.get("sum_delta")), fmt(d.get("weighted_sum")),
            fmt(d.get("avg_full")), " ".join(map(str, out.sequence))]
