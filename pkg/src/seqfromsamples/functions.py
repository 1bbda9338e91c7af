"""Monotone submodular function families and seeded instance generators.

Every generator records a JSON-able ``record`` on the instance; feeding it
back through :func:`instance_from_record` rebuilds the same instance.
"""
from __future__ import annotations

import json
from typing import Iterable, Optional, Union

import numpy as np

from .core import GroundSet, Instance, PreconditionError, SetFunction, to_jsonable

FAMILIES = ("modular", "coverage", "facility", "patience-scaled")


class NormalizationError(ValueError):
    pass


class ModularFunction(SetFunction):
    def __init__(self, weights):
        self.weights = np.asarray(weights, dtype=np.float64)
        if self.weights.ndim != 1 or (self.weights < 0).any():
            raise ValueError("modular weights must be a nonnegative vector")
        self.n = len(self.weights)

    def eval(self, S: Iterable[int]) -> float:
        total = 0.0
        for i in sorted(S):
            total += self.weights[i]
        return float(total)

    def affinity_form(self):
        return np.diag(self.weights), 1.0

    def to_params(self):
        return {"weights": self.weights.tolist()}


class WeightedCoverageFunction(SetFunction):
    """``f(S)`` = total weight of universe elements covered by some item of S."""

    def __init__(self, universe_weights, cover_sets):
        self.universe_weights = np.asarray(universe_weights, dtype=np.float64)
        if (self.universe_weights < 0).any():
            raise ValueError("universe weights must be nonnegative")
        U = len(self.universe_weights)
        self.cover_sets = [frozenset(int(u) for u in c) for c in cover_sets]
        self.n = len(self.cover_sets)
        for c in self.cover_sets:
            if any(not 0 <= u < U for u in c):
                raise ValueError("cover set references an unknown universe element")
        self._cover = np.zeros((U, self.n), dtype=bool)
        for i, c in enumerate(self.cover_sets):
            self._cover[list(c), i] = True

    def eval(self, S):
        covered = set()
        for i in S:
            covered |= self.cover_sets[i]
        return float(sum(self.universe_weights[u] for u in sorted(covered)))

    def affinity_form(self):
        return self._cover * self.universe_weights[:, None], 1.0

    def to_params(self):
        return {
            "universe_weights": self.universe_weights.tolist(),
            "covers": [sorted(c) for c in self.cover_sets],
        }


class FacilityLocationFunction(SetFunction):
    """``f(S) = sum_c max_{i in S} affinity[c, i]`` and ``f(empty) = 0``."""

    def __init__(self, affinity):
        self._affinity = np.asarray(affinity, dtype=np.float64)
        if self._affinity.ndim != 2 or (self._affinity < 0).any():
            raise ValueError("affinity must be a nonnegative clients x items matrix")
        self.n = self._affinity.shape[1]

    def eval(self, S):
        S = list(S)
        if not S:
            return 0.0
        total = 0.0
        for v in self._affinity[:, S].max(axis=1):
            total += v
        return float(total)

    def affinity_form(self):
        return self._affinity, 1.0

    def to_params(self):
        return {"affinity": self._affinity.tolist()}


class ScaledFunction(SetFunction):
    """``q * g``; inherits the curvature of ``g``."""

    def __init__(self, base: SetFunction, scale: float):
        if scale < 0:
            raise ValueError("scale must be nonnegative")
        # flatten nested scaling so eval and the bulk kernels round identically
        if isinstance(base, ScaledFunction):
            scale = scale * base.scale
            base = base.base
        self.base = base
        self.scale = float(scale)
        self.n = base.n

    def eval(self, S):
        return self.scale * self.base.eval(S)

    def affinity_form(self):
        form = self.base.affinity_form()
        if form is None:
            return None
        return form[0], self.scale * form[1]


def _check_nk(n, k):
    if n < 1 or not 1 <= k <= n:
        raise PreconditionError(f"need 1 <= k <= n, got n={n}, k={k}")


def make_modular_instance(n: int, k: int, weight_rng_params: Optional[dict] = None,
                          seed: int = 0) -> Instance:
    """All ``k`` functions share one modular weight vector.

    ``weight_rng_params`` is either ``{"weights": [...]}`` for fixed weights or
    ``{"low": a, "high": b}`` for i.i.d. uniform draws (default ``[0, 1)``).
    """
    _check_nk(n, k)
    params = dict(weight_rng_params or {})
    if "weights" in params:
        weights = np.asarray(params["weights"], dtype=np.float64)
        if len(weights) != n:
            raise PreconditionError(f"got {len(weights)} weights for n={n}")
    else:
        params.setdefault("low", 0.0)
        params.setdefault("high", 1.0)
        rng = np.random.default_rng(seed)
        weights = rng.uniform(params["low"], params["high"], size=n)
    f = ModularFunction(weights)
    record = {"family": "modular", "n": n, "k": k, "seed": seed, "params": params}
    return Instance(GroundSet(n), k, [f] * k, curvature_hint=0.0, record=to_jsonable(record))


def make_coverage_instance(n: int, k: int, universe_size: int, density: float,
                           seed: int = 0) -> Instance:
    """Shared random covers; each ``f_t`` draws its own element weights in ``[0, 1)``."""
    _check_nk(n, k)
    if not 0.0 < density <= 1.0:
        raise PreconditionError(f"density must lie in (0, 1], got {density}")
    if universe_size < 1:
        raise PreconditionError("universe_size must be positive")
    rng = np.random.default_rng(seed)
    cover = rng.random((n, universe_size)) < density
    weights = rng.random((k, universe_size))
    covers = [np.flatnonzero(row).tolist() for row in cover]
    funcs = [WeightedCoverageFunction(weights[t], covers) for t in range(k)]
    record = {"family": "coverage", "n": n, "k": k, "seed": seed,
              "params": {"universe_size": universe_size, "density": density}}
    return Instance(GroundSet(n), k, funcs, record=to_jsonable(record))


def make_facility_instance(n: int, k: int, clients: int, seed: int = 0) -> Instance:
    _check_nk(n, k)
    if clients < 1:
        raise PreconditionError("clients must be positive")
    rng = np.random.default_rng(seed)
    aff = rng.random((k, clients, n))
    funcs = [FacilityLocationFunction(aff[t]) for t in range(k)]
    record = {"family": "facility", "n": n, "k": k, "seed": seed,
              "params": {"clients": clients}}
    return Instance(GroundSet(n), k, funcs, record=to_jsonable(record))


def make_patience_scaled_instance(base_spec: Union[dict, SetFunction], k: int,
                                  scales) -> Instance:
    """``f_t = scales[t] * g`` with ``g`` valued in ``[0, 1]`` and ``sum(scales) <= 1``.

    ``base_spec`` is either a :class:`SetFunction` already valued in ``[0, 1]``
    or an instance record of another family; a record's first function is
    normalized by its value on the whole ground set.
    """
    scales = np.asarray(scales, dtype=np.float64)
    if len(scales) != k:
        raise PreconditionError(f"need {k} scales, got {len(scales)}")
    if (scales < 0).any():
        raise NormalizationError("scales must be nonnegative")
    if scales.sum() > 1.0 + 1e-12:
        raise NormalizationError(f"scales sum to {scales.sum():.6g} > 1")
    if isinstance(base_spec, SetFunction):
        g = base_spec
        top = g.eval(range(g.n))
        if top > 1.0 + 1e-12:
            raise NormalizationError(f"base function reaches {top:.6g} > 1")
        base_record = None
    else:
        base_record = dict(base_spec)
        base_record["k"] = 1
        raw = instance_from_record(base_record).functions[0]
        top = raw.eval(range(raw.n))
        g = ScaledFunction(raw, 1.0 / top) if top > 0 else raw
    _check_nk(g.n, k)
    funcs = [ScaledFunction(g, q) for q in scales]
    record = None
    if base_record is not None:
        record = {"family": "patience-scaled", "n": g.n, "k": k,
                  "seed": base_record.get("seed"),
                  "params": {"base": base_record, "scales": scales.tolist()}}
    return Instance(GroundSet(g.n), k, funcs, bernoulli_compatible=True,
                    record=to_jsonable(record))


def instance_from_record(record: dict) -> Instance:
    family = record.get("family")
    n, k, seed = int(record["n"]), int(record["k"]), record.get("seed", 0)
    params = record.get("params", {})
    if family == "modular":
        return make_modular_instance(n, k, params, seed)
    if family == "coverage":
        return make_coverage_instance(n, k, int(params["universe_size"]),
                                      float(params["density"]), seed)
    if family == "facility":
        return make_facility_instance(n, k, int(params["clients"]), seed)
    if family == "patience-scaled":
        return make_patience_scaled_instance(params["base"], k, params["scales"])
    raise PreconditionError(f"unknown family tag {family!r}; expected one of {FAMILIES}")


def dumps_instance(inst: Instance) -> str:
    if inst.record is None:
        raise ValueError("instance carries no generator record")
    return json.dumps(inst.record, sort_keys=True, indent=2) + "\n"


def loads_instance(text: str) -> Instance:
    return instance_from_record(json.loads(text))


def save_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_instance(inst))


def load_instance(path) -> Instance:
    with open(path) as fh:
        return loads_instance(fh.read())
