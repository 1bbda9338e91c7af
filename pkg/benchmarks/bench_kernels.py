"""Time the compiled and numpy kernels on the same batch.

    python3 benchmarks/bench_kernels.py [--m 500000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from seqfromsamples import kernels
from seqfromsamples.functions import make_coverage_instance, make_facility_instance
from seqfromsamples.sampling import draw_sequences


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - start)
    return min(times), result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, default=500_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.ckernels is None:
        raise SystemExit("compiled kernels unavailable; build the extension first")

    cases = {"coverage n=6 k=2": make_coverage_instance(6, 2, 40, 0.1, 0),
             "facility n=10 k=4": make_facility_instance(10, 4, 20, 0)}
    print(f"{'kernel':<34}{'cython s':>10}{'python s':>10}{'speedup':>9}  equal")
    for label, inst in cases.items():
        A, scales = inst.stacked_affinity()
        seqs, lengths = draw_sequences(inst.n, inst.k, args.m, np.random.default_rng(1))
        evals = {}
        for name, mod in (("c", kernels.ckernels), ("py", kernels.pykernels)):
            evals[name] = best_of(lambda: mod.eval_affinity_batch(A, scales, seqs, lengths),
                                  args.repeat)
        same = np.array_equal(np.asarray(evals["c"][1]), np.asarray(evals["py"][1]))
        tc, tp = evals["c"][0], evals["py"][0]
        print(f"{'eval ' + label:<34}{tc:>10.3f}{tp:>10.3f}{tp / tc:>9.1f}  {same}")

        phi = np.asarray(evals["c"][1])
        buckets = {}
        for name, mod in (("c", kernels.ckernels), ("py", kernels.pykernels)):
            buckets[name] = best_of(
                lambda: mod.accumulate_buckets(seqs, lengths, phi, inst.n, inst.k), args.repeat)
        same = all(np.array_equal(np.asarray(a), np.asarray(b))
                   for a, b in zip(buckets["c"][1], buckets["py"][1]))
        tc, tp = buckets["c"][0], buckets["py"][0]
        print(f"{'buckets ' + label:<34}{tc:>10.3f}{tp:>10.3f}{tp / tc:>9.1f}  {same}")


if __name__ == "__main__":
    main()
