"""Bucket averages of observed utilities and the estimated marginal gains.

For item ``i`` and slot ``t`` the estimate is

    avg(phi | length t+1, last item i) - avg(phi | length t, i not in sequence)

with the second average taken as exactly zero at ``t = 0`` (the empty sequence
is worth nothing).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import kernels
from .sampling import Dataset

MODES = ("strict", "lenient")


class InsufficientSamplesError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class BucketIndex:
    """Sums and counts per bucket, indexed ``[item, length]``.

    Length index 0 is unused; ``*_sum[i, l]`` covers records of length ``l``.
    """

    n: int
    k: int
    last_sum: np.ndarray
    last_cnt: np.ndarray
    excl_sum: np.ndarray
    excl_cnt: np.ndarray
    full_sum: float
    full_cnt: int
    dataset: Optional[Dataset] = field(default=None, repr=False)

    def _values(self, mask) -> List[float]:
        if self.dataset is None:
            raise ValueError("bucket contents need the source dataset")
        return self.dataset.phi[mask].tolist()

    def last_bucket(self, i: int, length: int) -> List[float]:
        ds = self.dataset
        last = ds.seqs[np.arange(ds.m), ds.lengths - 1]
        return self._values((ds.lengths == length) & (last == i))

    def excl_bucket(self, i: int, length: int) -> List[float]:
        ds = self.dataset
        contains = (ds.seqs == i).any(axis=1)
        return self._values((ds.lengths == length) & ~contains)

    def full_bucket(self) -> List[float]:
        return self._values(self.dataset.lengths == self.k)


@dataclass(frozen=True, eq=False)
class DeltaMatrix:
    """Estimates ``values[i, t]`` for slot ``t`` in ``0..k-1``."""

    values: np.ndarray
    last_counts: np.ndarray
    excl_counts: np.ndarray
    flagged: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["item", "slot", "delta_tilde", "n_last_bucket", "n_excl_bucket", "flagged"])
        for i in range(self.n):
            for t in range(self.k):
                w.writerow([i, t, repr(float(self.values[i, t])), int(self.last_counts[i, t]),
                            int(self.excl_counts[i, t]), int(bool(self.flagged[i, t]))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DeltaMatrix":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty delta matrix file")
        n = max(int(r["item"]) for r in rows) + 1
        k = max(int(r["slot"]) for r in rows) + 1
        if len(rows) != n * k:
            raise ValueError(f"expected {n * k} entries, found {len(rows)}")
        values = np.zeros((n, k))
        last = np.zeros((n, k), dtype=np.int64)
        excl = np.zeros((n, k), dtype=np.int64)
        flagged = np.zeros((n, k), dtype=bool)
        for r in rows:
            i, t = int(r["item"]), int(r["slot"])
            values[i, t] = float(r["delta_tilde"])
            last[i, t] = int(r["n_last_bucket"])
            excl[i, t] = int(r["n_excl_bucket"])
            flagged[i, t] = r["flagged"] in ("1", "True", "true")
        return cls(values, last, excl, flagged)


def build_buckets(ds: Dataset) -> BucketIndex:
    last_sum, last_cnt, excl_sum, excl_cnt, full_sum, full_cnt = kernels.accumulate_buckets(
        ds.seqs, ds.lengths, ds.phi, ds.n, ds.k)
    return BucketIndex(ds.n, ds.k, np.asarray(last_sum), np.asarray(last_cnt),
                       np.asarray(excl_sum), np.asarray(excl_cnt),
                       float(full_sum), int(full_cnt), ds)


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _entry(bi: BucketIndex, i: int, t: int, mode: str):
    """``(value, flagged)`` for one estimate."""
    if not 0 <= i < bi.n or not 0 <= t < bi.k:
        raise IndexError(f"entry ({i}, {t}) outside n={bi.n}, k={bi.k}")
    flagged = False
    N = bi.last_cnt[i, t + 1]
    if N:
        head = bi.last_sum[i, t + 1] / N
    elif mode == "strict":
        raise InsufficientSamplesError(
            f"empty bucket: length {t + 1} with item {i} last (needed for slot {t})")
    else:
        head, flagged = 0.0, True
    if t == 0:
        return float(head), flagged
    N = bi.excl_cnt[i, t]
    if N:
        base = bi.excl_sum[i, t] / N
    elif mode == "strict":
        raise InsufficientSamplesError(
            f"empty bucket: length {t} excluding item {i} (needed for slot {t})")
    else:
        base, flagged = 0.0, True
    return float(head - base), flagged


def delta_tilde(bi: BucketIndex, i: int, t: int, mode: str = "strict") -> float:
    _check_mode(mode)
    return _entry(bi, i, t, mode)[0]


def delta_tilde_matrix(bi: BucketIndex, n: int, k: int, mode: str = "strict") -> DeltaMatrix:
    _check_mode(mode)
    if (n, k) != (bi.n, bi.k):
        raise ValueError(f"buckets were built for n={bi.n}, k={bi.k}")
    values = np.zeros((n, k))
    flagged = np.zeros((n, k), dtype=bool)
    for i in range(n):
        for t in range(k):
            values[i, t], flagged[i, t] = _entry(bi, i, t, mode)
    last_counts = bi.last_cnt[:, 1:].copy()
    excl_counts = np.zeros((n, k), dtype=np.int64)
    excl_counts[:, 1:] = bi.excl_cnt[:, 1:k]
    return DeltaMatrix(values, last_counts, excl_counts, flagged)


def avg_full(bi: BucketIndex, mode: str = "strict") -> float:
    """Mean observed utility over length-``k`` records (nan if empty, lenient)."""
    _check_mode(mode)
    if bi.full_cnt:
        return bi.full_sum / bi.full_cnt
    if mode == "strict":
        raise InsufficientSamplesError(f"empty bucket: no records of full length {bi.k}")
    return math.nan


def hoeffding_failure(N: int, delta: float, n: int, value_range: Optional[float] = None) -> float:
    """Hoeffding bound on P(|bucket mean - expectation| >= delta / (2 n^2)).

    With ``value_range = delta`` this is ``2 exp(-N / (2 n^4))``.  Returns the
    vacuous value 2 for an empty bucket.
    """
    if N <= 0:
        return 2.0
    value_range = delta if value_range is None else value_range
    if value_range <= 0:
        return 0.0
    eps = delta / (2.0 * n * n)
    return 2.0 * math.exp(-2.0 * N * eps * eps / (value_range * value_range))


@dataclass(frozen=True)
class BucketBound:
    kind: str  # "last", "excl" or "full"
    item: int  # -1 for the full bucket
    length: int
    size: int
    failure_bound: float
    flagged: bool


@dataclass(frozen=True)
class ConcentrationReport:
    entries: tuple
    value_range: float
    min_size: int
    worst_bound: float
    meets_target: Optional[bool]

    def summary(self) -> str:
        target = "n/a" if self.meets_target is None else ("yes" if self.meets_target else "no")
        return (f"buckets={len(self.entries)} min_size={self.min_size} "
                f"worst_failure_bound={self.worst_bound:.3g} range={self.value_range:.6g} "
                f"meets_target={target}")


def concentration_report(bi: BucketIndex, delta: float, n: int,
                         target: Optional[float] = None,
                         value_range: Optional[float] = None) -> ConcentrationReport:
    """Hoeffding accounting for every bucket the estimates read.

    ``value_range`` defaults to ``delta`` (observations in ``[0, delta]``);
    under bounded noise pass ``delta + b``.
    """
    value_range = delta if value_range is None else value_range
    entries = []

    def add(kind, item, length, N):
        N = int(N)
        entries.append(BucketBound(kind, item, length, N,
                                   hoeffding_failure(N, delta, n, value_range), N == 0))

    for i in range(bi.n):
        for length in range(1, bi.k + 1):
            add("last", i, length, bi.last_cnt[i, length])
        for length in range(1, bi.k):
            add("excl", i, length, bi.excl_cnt[i, length])
    add("full", -1, bi.k, bi.full_cnt)
    min_size = min(e.size for e in entries)
    worst = max(e.failure_bound for e in entries)
    meets = None if target is None else all(e.failure_bound <= target for e in entries)
    return ConcentrationReport(tuple(entries), float(value_range), min_size, worst, meets)
