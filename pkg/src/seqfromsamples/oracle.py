"""Brute-force ground truth for small instances.

Everything here enumerates exactly and refuses work past explicit guards;
nothing is sampled.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .algorithm import compute_alpha
from .core import Instance, PreconditionError, Sequence, SetFunction, eval_F

log = logging.getLogger(__name__)

MAX_SEQUENCES = 10 ** 6
MAX_CURVATURE_N = 10
TOL = 1e-12
CURVATURE_SNAP = 1e-12


class TooLargeError(PreconditionError):
    pass


def _guard_sequences(pool_size: int, length: int) -> None:
    count = math.perm(pool_size, length)
    if count > MAX_SEQUENCES:
        raise TooLargeError(f"{count} ordered sequences exceed the enumeration guard "
                            f"of {MAX_SEQUENCES}")


@dataclass
class OracleResult:
    optimum_sequence: Sequence
    optimum_value: float
    cache: dict = field(default_factory=dict, repr=False)


def brute_force_optimal(inst: Instance) -> OracleResult:
    _guard_sequences(inst.n, inst.k)
    best_seq, best = None, -math.inf
    for pi in itertools.permutations(range(inst.n), inst.k):
        value = eval_F(inst, pi)
        if value > best:
            best_seq, best = pi, value
    return OracleResult(Sequence(best_seq), best)


def exact_expected_F(inst: Instance, restrict_to: Optional[Iterable[int]] = None,
                     length: Optional[int] = None) -> float:
    """Mean of ``F`` over all ordered sequences drawn from the pool.

    Length defaults to ``k``.
    """
    pool = sorted(set(restrict_to)) if restrict_to is not None else list(range(inst.n))
    length = inst.k if length is None else length
    if len(pool) < length:
        raise PreconditionError(f"pool of {len(pool)} items cannot fill length {length}")
    _guard_sequences(len(pool), length)
    total, count = 0.0, 0
    for pi in itertools.permutations(pool, length):
        total += eval_F(inst, pi)
        count += 1
    return total / count


def exact_delta(inst: Instance, i: int, t: int) -> float:
    """Expected gain of appending ``i`` at slot ``t`` to a random ``i``-free sequence.

    ``E[F(sigma + i)] - E[F(sigma)]`` over ordered ``t``-sequences ``sigma``
    that avoid ``i``.
    """
    if not 0 <= t < inst.k:
        raise PreconditionError(f"slot {t} outside 0..{inst.k - 1}")
    others = [j for j in range(inst.n) if j != i]
    _guard_sequences(len(others), t)
    with_i = without = 0.0
    count = 0
    for sigma in itertools.permutations(others, t):
        with_i += eval_F(inst, sigma + (i,))
        without += eval_F(inst, sigma)
        count += 1
    return with_i / count - without / count


def exact_delta_marginal_form(inst: Instance, i: int, t: int) -> float:
    """Same quantity as :func:`exact_delta`, summed marginal by marginal.

    ``sum_{j > t} E_R[f_j(i | R)]`` with ``R`` a uniform ``t``-subset avoiding ``i``.
    """
    if not 0 <= t < inst.k:
        raise PreconditionError(f"slot {t} outside 0..{inst.k - 1}")
    others = [j for j in range(inst.n) if j != i]
    total, count = 0.0, 0
    for R in itertools.combinations(others, t):
        for f in inst.functions[t:]:
            total += f.eval(R + (i,)) - f.eval(R)
        count += 1
    return total / count


def _subset_values(f: SetFunction, n: int) -> np.ndarray:
    if n > MAX_CURVATURE_N:
        raise TooLargeError(f"n={n} exceeds the subset enumeration guard of {MAX_CURVATURE_N}")
    values = np.empty(1 << n)
    for mask in range(1 << n):
        values[mask] = f.eval([i for i in range(n) if mask >> i & 1])
    return values


def measure_curvature(f: SetFunction, n: Optional[int] = None) -> float:
    """Smallest ``c`` with ``f(i | S) >= (1 - c) f({i})`` for all ``S``, ``i`` not in ``S``."""
    n = f.n if n is None else n
    values = _subset_values(f, n)
    worst = 1.0
    for i in range(n):
        single = values[1 << i]
        if single <= 0:
            continue
        bit = 1 << i
        for mask in range(1 << n):
            if mask & bit:
                continue
            ratio = (values[mask | bit] - values[mask]) / single
            if ratio < worst:
                worst = ratio
    c = 1.0 - worst
    # float marginals of a modular function miss f({i}) by a few ulps
    if c < CURVATURE_SNAP:
        return 0.0
    if c > 1.0 - CURVATURE_SNAP:
        return 1.0
    return c


def instance_curvature(inst: Instance) -> float:
    """Largest per-function curvature, so the value holds for every ``f_t``."""
    seen = {}
    for f in inst.functions:
        if id(f) not in seen:
            seen[id(f)] = measure_curvature(f, inst.n)
    return max(seen.values())


def check_monotone(f: SetFunction, n: Optional[int] = None, tol: float = TOL) -> bool:
    n = f.n if n is None else n
    values = _subset_values(f, n)
    if abs(values[0]) > tol:
        return False
    for mask in range(1 << n):
        for i in range(n):
            if not mask >> i & 1 and values[mask | 1 << i] < values[mask] - tol:
                return False
    return True


def check_submodular(f: SetFunction, n: Optional[int] = None, tol: float = TOL) -> bool:
    """Diminishing returns over every pair ``X subset Y`` and ``i`` outside ``Y``."""
    n = f.n if n is None else n
    values = _subset_values(f, n)
    # checking Y = X + {j} for every j suffices (chain argument)
    for X in range(1 << n):
        for i in range(n):
            if X >> i & 1:
                continue
            gain = values[X | 1 << i] - values[X]
            for j in range(n):
                if j == i or X >> j & 1:
                    continue
                Y = X | 1 << j
                if values[Y | 1 << i] - values[Y] > gain + tol:
                    return False
    return True


@dataclass(frozen=True)
class InequalityCheck:
    holds: Optional[bool]
    lhs: float
    rhs: float
    slack: float
    skipped: bool = False


def check_random_set_gain(f: SetFunction, S: Iterable[int], t: int, n: Optional[int] = None,
                 c: Optional[float] = None, tol: float = TOL) -> InequalityCheck:
    """``E_R[f(R | S)] >= (1 - c) E_R[f(R)]`` for uniform ``t``-subsets ``R`` of the complement."""
    n = f.n if n is None else n
    S = tuple(sorted(set(S)))
    rest = [i for i in range(n) if i not in S]
    if t > len(rest):
        raise PreconditionError(f"cannot draw {t} items from {len(rest)}")
    if math.comb(len(rest), t) > MAX_SEQUENCES:
        raise TooLargeError("too many subsets to enumerate")
    c = measure_curvature(f, n) if c is None else c
    base = f.eval(S)
    gain = plain = 0.0
    count = 0
    for R in itertools.combinations(rest, t):
        gain += f.eval(S + R) - base
        plain += f.eval(R)
        count += 1
    lhs = gain / count
    rhs = (1.0 - c) * plain / count
    return InequalityCheck(lhs - rhs >= -tol, lhs, rhs, lhs - rhs)


def virtual_union_F(inst: Instance, pi, other) -> float:
    """``sum_t f_t(pi[:t] | other[:t])`` evaluated on the union of both prefixes."""
    total = 0.0
    for t, f in enumerate(inst.functions, start=1):
        total += f.eval(set(pi[:t]) | set(other[:t]))
    return total


def check_avoidance_gain(inst: Instance, optimum: Optional[OracleResult] = None,
                 tol: float = TOL) -> InequalityCheck:
    """``sum_t Delta(e*_{t+1}, t) >= alpha E[F(P u pi*) - F(P)]``, ``P`` avoiding ``pi*``.

    Skipped (``holds=None``) when ``n < 2k``.
    """
    n, k = inst.n, inst.k
    if n < 2 * k:
        log.info("avoidance-gain check skipped: n=%d < 2k=%d", n, 2 * k)
        return InequalityCheck(None, math.nan, math.nan, math.nan, skipped=True)
    optimum = brute_force_optimal(inst) if optimum is None else optimum
    star = optimum.optimum_sequence
    lhs = 0.0
    for t in range(k):
        lhs += exact_delta(inst, star[t], t)
    pool = [i for i in range(n) if i not in star]
    _guard_sequences(len(pool), k)
    gap, count = 0.0, 0
    for pi in itertools.permutations(pool, k):
        gap += virtual_union_F(inst, pi, star) - eval_F(inst, pi)
        count += 1
    rhs = compute_alpha(n, k) * gap / count
    return InequalityCheck(lhs - rhs >= -tol, lhs, rhs, lhs - rhs)


def avoidance_probability(n: int, k: int) -> Fraction:
    """Exact P(uniform ordered k-sample avoids a fixed k-set), by counting."""
    return Fraction(math.perm(n - k, k) if n >= 2 * k else 0, math.perm(n, k))


def brute_force_assignment(W, n: int, k: int):
    """Best ``(items, total)`` over all ordered ``k``-tuples, first maximum in lex order."""
    W = np.asarray(W, dtype=np.float64)
    _guard_sequences(n, k)
    best_items, best = None, -math.inf
    for items in itertools.permutations(range(n), k):
        total = 0.0
        for p, i in enumerate(items):
            total += float(W[i, p])
        if total > best:
            best_items, best = items, total
    return best_items, best


def telescoped_F(inst: Instance, pi) -> float:
    """``sum_t F(pi[:t+1]) - F(pi[:t])``; equals ``F(pi)`` for a full sequence."""
    total = 0.0
    for t in range(len(pi)):
        total += eval_F(inst, pi[: t + 1]) - eval_F(inst, pi[:t])
    return total
