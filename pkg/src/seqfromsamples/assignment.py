"""Exact item-to-position assignment maximizing total estimated weight.

Positions are rows, items are columns.  Every position gets exactly one item
and no item is used twice; weights may be negative.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .core import PreconditionError, Sequence

# totals closer than this (times k * max|W|) count as ties
TIE_RTOL = 1e-12


class InfeasibleAssignmentError(PreconditionError):
    pass


@dataclass(frozen=True)
class Assignment:
    position_to_item: Tuple[int, ...]
    total_weight: float


def _weights_array(weights) -> np.ndarray:
    values = getattr(weights, "values", weights)
    return np.asarray(values, dtype=np.float64)


def total_weight(W: np.ndarray, items) -> float:
    total = 0.0
    for p, i in enumerate(items):
        total += float(W[i, p])
    return total


def tie_tolerance(W: np.ndarray, k: int) -> float:
    return TIE_RTOL * k * max(1.0, float(np.abs(W).max()))


def _hungarian(cost: np.ndarray):
    """Min-cost assignment of every row to a distinct column (rows <= cols).

    Shortest augmenting paths with potentials, O(rows^2 * cols).  Returns the
    column of each row and the row/column potentials ``u, v`` satisfying
    ``u[r] + v[c] <= cost[r, c]`` with equality on the matching.
    """
    rows, cols = cost.shape
    inf = float("inf")
    u = [0.0] * (rows + 1)
    v = [0.0] * (cols + 1)
    match = [0] * (cols + 1)  # 1-based row matched to column, 0 = free
    way = [0] * (cols + 1)
    a = cost.tolist()
    for r in range(1, rows + 1):
        match[0] = r
        j0 = 0
        minv = [inf] * (cols + 1)
        used = [False] * (cols + 1)
        while True:
            used[j0] = True
            i0 = match[j0]
            row = a[i0 - 1]
            delta, j1 = inf, 0
            for j in range(1, cols + 1):
                if not used[j]:
                    cur = row[j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta, j1 = minv[j], j
            for j in range(cols + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    assign = [0] * rows
    for j in range(1, cols + 1):
        if match[j]:
            assign[match[j] - 1] = j - 1
    return assign, np.array(u[1:]), np.array(v[1:])


def _min_cost(cost: np.ndarray) -> float:
    if cost.shape[0] == 0:
        return 0.0
    assign, _, _ = _hungarian(cost)
    return float(sum(cost[r, c] for r, c in enumerate(assign)))


def solve_p1(weights, n: int, k: int) -> Assignment:
    """Optimal assignment; ties go to the lexicographically smallest item tuple.

    ``weights`` is an ``(n, k)`` array (or a :class:`DeltaMatrix`) where
    ``weights[i, t]`` is the value of item ``i`` at position ``t + 1``.
    """
    if not 1 <= k <= n:
        raise InfeasibleAssignmentError(f"cannot fill {k} positions with {n} items")
    W = _weights_array(weights)
    if W.shape != (n, k):
        raise PreconditionError(f"weights must have shape ({n}, {k}), got {W.shape}")
    if not np.isfinite(W).all():
        raise PreconditionError("weights must be finite")
    cost = -W.T
    assign, u, v = _hungarian(cost)
    best = float(sum(cost[p, i] for p, i in enumerate(assign)))
    tol = tie_tolerance(W, k)
    reduced = cost - u[:, None] - v[None, :]

    # walk positions in order, keeping the smallest item that still admits an
    # optimal completion; only tight edges can appear in an optimum
    chosen = []
    spent = 0.0
    free = list(range(n))
    for p in range(k):
        pick = None
        for i in free:
            if reduced[p, i] > tol:
                continue
            rest = [j for j in free if j != i]
            value = spent + cost[p, i] + _min_cost(cost[p + 1:][:, rest])
            if value <= best + tol:
                pick = i
                break
        if pick is None:  # numerical corner: keep the solver's own choice
            pick = assign[p] if assign[p] in free else free[0]
        chosen.append(pick)
        spent += cost[p, pick]
        free.remove(pick)
    return Assignment(tuple(chosen), total_weight(W, chosen))


def assignment_to_sequence(a: Assignment) -> Sequence:
    return Sequence(a.position_to_item)


def sequence_to_assignment(seq, weights) -> Assignment:
    W = _weights_array(weights)
    seq = Sequence(seq)
    return Assignment(tuple(seq), total_weight(W, seq))
