"""Two-stage uniform sampling and observation models.

A draw picks a length ``t`` uniformly from ``1..k`` and then a uniformly random
ordered sequence of ``t`` distinct items.  The learner only ever sees the
resulting ``(sequence, phi)`` records.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from . import kernels
from .core import Instance, InvalidSequenceError, Sequence, eval_F

VARIANTS = ("exact", "bernoulli", "noise")
SHARD_SIZE = 1 << 16
PHI_FORMAT = "%.12g"


class ObservationModelError(ValueError):
    pass


class DatasetFormatError(ValueError):
    pass


@dataclass(frozen=True)
class ObservationModel:
    """How an observed utility ``phi`` is realized from ``F(pi)``.

    ``exact`` returns ``F``; ``bernoulli`` returns 1 with probability ``F``
    (needs ``F <= 1``); ``noise`` adds uniform noise on ``[-b, b]``, unclipped.
    All three are unbiased.
    """

    variant: str = "exact"
    b: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ObservationModelError(
                f"unknown observation model {self.variant!r}; expected one of {VARIANTS}")
        if self.b < 0:
            raise ObservationModelError("noise half-width must be nonnegative")

    def value_bound(self, f_max: float) -> float:
        """Largest realizable ``phi`` when ``F`` never exceeds ``f_max``."""
        if self.variant == "bernoulli":
            return 1.0
        if self.variant == "noise":
            return f_max + self.b
        return f_max

    def check(self, inst: Instance) -> None:
        if self.variant == "bernoulli" and not inst.bernoulli_compatible:
            raise ObservationModelError(
                "Bernoulli observations need a bernoulli-compatible instance (F <= 1)")

    def observe(self, F: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if self.variant == "exact":
            return np.array(F, dtype=np.float64)
        if self.variant == "bernoulli":
            return (rng.random(len(F)) < F).astype(np.float64)
        return F + rng.uniform(-self.b, self.b, size=len(F))


@dataclass(frozen=True)
class SampleRecord:
    sequence: Sequence
    phi: float


@dataclass(frozen=True, eq=False)
class Dataset:
    """Sample records held as arrays.

    ``seqs`` is ``(m, k)`` with ``-1`` padding past each record's length.
    """

    n: int
    k: int
    delta: float
    seqs: np.ndarray
    lengths: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        if len(self.lengths) == 0:
            raise DatasetFormatError("dataset has no records")
        if self.seqs.shape != (len(self.lengths), self.k):
            raise DatasetFormatError("sequence array does not match (m, k)")
        if self.lengths.min() < 1 or self.lengths.max() > self.k:
            raise DatasetFormatError("record length outside 1..k")

    @property
    def m(self) -> int:
        return len(self.lengths)

    def __len__(self):
        return self.m

    def __iter__(self) -> Iterator[SampleRecord]:
        for row, t, x in zip(self.seqs, self.lengths, self.phi):
            yield SampleRecord(Sequence(row[:t].tolist()), float(x))

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.n == other.n and self.k == other.k and self.delta == other.delta
                and np.array_equal(self.seqs, other.seqs)
                and np.array_equal(self.lengths, other.lengths)
                and np.array_equal(self.phi, other.phi))

    def permuted(self, order) -> "Dataset":
        order = np.asarray(order)
        return Dataset(self.n, self.k, self.delta, self.seqs[order],
                       self.lengths[order], self.phi[order])

    @classmethod
    def from_records(cls, records, n: int, k: int, delta: Optional[float] = None) -> "Dataset":
        records = list(records)
        seqs = np.full((len(records), k), -1, dtype=np.int64)
        lengths = np.zeros(len(records), dtype=np.int64)
        phi = np.zeros(len(records))
        for r, rec in enumerate(records):
            seq = rec.sequence if isinstance(rec.sequence, Sequence) else Sequence(rec.sequence)
            if not 1 <= len(seq) <= k or any(i >= n for i in seq):
                raise InvalidSequenceError(f"record {r} does not fit n={n}, k={k}")
            seqs[r, : len(seq)] = seq
            lengths[r] = len(seq)
            phi[r] = rec.phi
        if delta is None:
            delta = float(phi.max()) if len(phi) else 0.0
        return cls(n, k, float(delta), seqs, lengths, phi)


def draw_sequences(n: int, k: int, m: int, rng: np.random.Generator):
    """``m`` two-stage draws as ``(seqs, lengths)``.

    Every row gets a full uniform ordered ``k``-sequence; its first ``t`` items
    are kept, which leaves a uniform ordered ``t``-sequence.
    """
    lengths = rng.integers(1, k + 1, size=m).astype(np.int64)
    seqs = np.empty((m, k), dtype=np.int64)
    for j in range(k):
        v = rng.integers(0, n - j, size=m).astype(np.int64)
        # v is a rank among unused items; walk past used ids in ascending order
        for used in np.sort(seqs[:, :j], axis=1).T:
            v += used <= v
        seqs[:, j] = v
    seqs[np.arange(k)[None, :] >= lengths[:, None]] = -1
    return seqs, lengths


def evaluate_rows(inst: Instance, seqs: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Exact ``F`` for every padded row; bulk kernel when the family allows it."""
    stacked = inst.stacked_affinity()
    if stacked is not None:
        A, scales = stacked
        return kernels.eval_affinity_batch(A, scales, seqs, lengths)
    cache = {}
    out = np.empty(len(lengths))
    for r, (row, t) in enumerate(zip(seqs, lengths)):
        key = tuple(row[:t].tolist())
        if key not in cache:
            cache[key] = eval_F(inst, key)
        out[r] = cache[key]
    return out


def _draw_block(inst, model, m, rng):
    seqs, lengths = draw_sequences(inst.n, inst.k, m, rng)
    F = evaluate_rows(inst, seqs, lengths)
    return seqs, lengths, model.observe(F, rng)


def draw_two_stage(inst: Instance, model: ObservationModel, rng: np.random.Generator) -> SampleRecord:
    model.check(inst)
    seqs, lengths, phi = _draw_block(inst, model, 1, rng)
    return SampleRecord(Sequence(seqs[0, : lengths[0]].tolist()), float(phi[0]))


def build_dataset(inst: Instance, model: ObservationModel, m: int, seed: int,
                  shard_size: int = SHARD_SIZE) -> Dataset:
    """``m`` i.i.d. records; shards use independent streams spawned from ``seed``."""
    if m < 1:
        raise ValueError(f"sample count must be positive, got {m}")
    model.check(inst)
    n_shards = -(-m // shard_size)
    streams = np.random.SeedSequence(seed).spawn(n_shards)
    parts = []
    for s, ss in enumerate(streams):
        size = min(shard_size, m - s * shard_size)
        parts.append(_draw_block(inst, model, size, np.random.default_rng(ss)))
    seqs = np.concatenate([p[0] for p in parts])
    lengths = np.concatenate([p[1] for p in parts])
    phi = np.concatenate([p[2] for p in parts])
    return Dataset(inst.n, inst.k, float(phi.max()), seqs, lengths, phi)


def delta_bound(ds: Dataset, override: Optional[float] = None) -> float:
    if override is not None:
        return float(override)
    return float(ds.phi.max())


def dumps_dataset(ds: Dataset) -> str:
    buf = io.StringIO()
    buf.write(f"{ds.n},{ds.k},{PHI_FORMAT % ds.delta},{ds.m}\n")
    for row, t, x in zip(ds.seqs.tolist(), ds.lengths.tolist(), ds.phi.tolist()):
        buf.write(f"{t},{' '.join(map(str, row[:t]))},{PHI_FORMAT % x}\n")
    return buf.getvalue()


def loads_dataset(text: str) -> Dataset:
    lines = text.splitlines()
    if not lines:
        raise DatasetFormatError("empty dataset file")
    try:
        n, k, delta, m = lines[0].split(",")
        n, k, delta, m = int(n), int(k), float(delta), int(m)
    except ValueError as exc:
        raise DatasetFormatError(f"bad header {lines[0]!r}; expected n,k,delta,m") from exc
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != m:
        raise DatasetFormatError(f"header declares {m} records, found {len(body)}")
    seqs = np.full((m, k), -1, dtype=np.int64)
    lengths = np.zeros(m, dtype=np.int64)
    phi = np.zeros(m)
    for r, line in enumerate(body):
        try:
            t, ids, x = line.split(",")
            ids = [int(i) for i in ids.split()]
            t = int(t)
            phi[r] = float(x)
        except ValueError as exc:
            raise DatasetFormatError(f"bad record on line {r + 2}: {line!r}") from exc
        if t != len(ids) or not 1 <= t <= k or any(not 0 <= i < n for i in ids) \
                or len(set(ids)) != t:
            raise DatasetFormatError(f"invalid sequence on line {r + 2}: {line!r}")
        seqs[r, :t] = ids
        lengths[r] = t
    return Dataset(n, k, delta, seqs, lengths, phi)


def save_dataset(ds: Dataset, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_dataset(ds))


def load_dataset(path) -> Dataset:
    with open(path) as fh:
        return loads_dataset(fh.read())
