"""Domain types and exact evaluation of the sequence objective.

A sequence objective is built from ``k`` monotone submodular set functions
``f_1..f_k``.  Function ``f_j`` sees the first ``j`` items of a sequence, so

    F(pi) = sum_{j=1..k} f_j(pi[:min(j, len(pi))])

Sequences shorter than ``k`` are saturated: every ``f_j`` with ``j > len(pi)``
sees the whole sequence.
"""
from __future__ import annotations

import abc
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence as TypingSequence

import numpy as np


class InvalidSequenceError(ValueError):
    """Raised for sequences with duplicates, bad ids or excess length."""


class PreconditionError(ValueError):
    """Raised when an operation is called outside its domain."""


@dataclass(frozen=True)
class GroundSet:
    n: int

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError(f"ground set needs at least one item, got n={self.n}")

    def __iter__(self):
        return iter(range(self.n))

    def __len__(self):
        return self.n


class Sequence(tuple):
    """Ordered tuple of distinct item ids.

    Behaves as a tuple; :meth:`as_set` gives the set view.
    """

    def __new__(cls, items: Iterable[int] = ()):
        items = tuple(int(i) for i in items)
        if len(set(items)) != len(items):
            raise InvalidSequenceError(f"duplicate items in sequence {items}")
        if any(i < 0 for i in items):
            raise InvalidSequenceError(f"negative item id in {items}")
        return super().__new__(cls, items)

    def prefix(self, t: int) -> "Sequence":
        return Sequence(self[: max(0, min(t, len(self)))])

    def as_set(self) -> frozenset:
        return frozenset(self)

    def __repr__(self):
        return f"Sequence({tuple(self)!r})"


class SetFunction(abc.ABC):
    """Nonnegative set function on item ids ``0..n-1`` with ``f(empty) = 0``."""

    n: int

    @abc.abstractmethod
    def eval(self, S: Iterable[int]) -> float:
        ...

    def __call__(self, S: Iterable[int]) -> float:
        return self.eval(S)

    def affinity_form(self) -> Optional[tuple]:
        """``(A, q)`` with ``f(S) = q * sum_c max_{i in S} A[c, i]``, or None.

        ``A`` is a nonnegative clients-by-items matrix.  Families that admit
        this form are evaluated in bulk by the compiled kernels.
        """
        return None

    def to_params(self) -> dict:
        raise NotImplementedError(f"{type(self).__name__} is not serializable")


def marginal(f: SetFunction, i: int, S: Iterable[int]) -> float:
    """``f(S + {i}) - f(S)``; ``i`` must not already be in ``S``."""
    S = frozenset(S)
    if i in S:
        raise PreconditionError(f"item {i} already in the base set")
    return f.eval(S | {i}) - f.eval(S)


@dataclass(frozen=True)
class Instance:
    ground: GroundSet
    k: int
    functions: tuple
    curvature_hint: Optional[float] = None
    bernoulli_compatible: bool = False
    # reproducibility record, see ``seqfromsamples.functions.instance_from_record``
    record: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))
        if not 1 <= self.k <= self.ground.n:
            raise PreconditionError(f"need 1 <= k <= n, got k={self.k}, n={self.ground.n}")
        if len(self.functions) != self.k:
            raise PreconditionError(
                f"expected {self.k} functions, got {len(self.functions)}")
        if self.curvature_hint is not None and not 0.0 <= self.curvature_hint <= 1.0:
            raise PreconditionError(f"curvature must lie in [0, 1], got {self.curvature_hint}")

    @property
    def n(self) -> int:
        return self.ground.n

    def stacked_affinity(self) -> Optional[tuple]:
        """``(A, q)``: affinity tensor ``(k, C, n)`` zero-padded, scales ``(k,)``.

        None when some function has no affinity form.
        """
        forms = [f.affinity_form() for f in self.functions]
        if any(form is None for form in forms):
            return None
        clients = max(a.shape[0] for a, _ in forms)
        A = np.zeros((self.k, clients, self.n), dtype=np.float64)
        for t, (a, _) in enumerate(forms):
            A[t, : a.shape[0], :] = a
        return A, np.array([q for _, q in forms], dtype=np.float64)


def check_sequence(inst: Instance, pi: TypingSequence[int]) -> Sequence:
    pi = pi if isinstance(pi, Sequence) else Sequence(pi)
    if len(pi) > inst.k:
        raise InvalidSequenceError(f"sequence length {len(pi)} exceeds k={inst.k}")
    if any(i >= inst.n for i in pi):
        raise InvalidSequenceError(f"item id out of range for n={inst.n}: {tuple(pi)}")
    return pi


def eval_F(inst: Instance, pi: TypingSequence[int]) -> float:
    pi = check_sequence(inst, pi)
    if not pi:
        return 0.0
    total = 0.0
    for j, f in enumerate(inst.functions, start=1):
        total += f.eval(pi[: min(j, len(pi))])
    return total


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj
