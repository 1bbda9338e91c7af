"""Pure numpy kernels; the reference the compiled core is checked against."""
import numpy as np

CHUNK = 1 << 15


def eval_affinity_batch(A, scales, seqs, lengths):
    A = np.ascontiguousarray(A, dtype=np.float64)
    seqs = np.asarray(seqs, dtype=np.int64)
    lengths = np.asarray(lengths, dtype=np.int64)
    k, C, _ = A.shape
    m = len(seqs)
    out = np.zeros(m, dtype=np.float64)
    pos = np.arange(seqs.shape[1])
    for lo in range(0, m, CHUNK):
        s = seqs[lo:lo + CHUNK]
        L = lengths[lo:lo + CHUNK]
        idx = np.where(s >= 0, s, 0)
        total = np.zeros(len(s))
        for t in range(k):
            visible = pos[None, :] < np.minimum(t + 1, L)[:, None]
            gathered = np.where(visible[None, :, :], A[t][:, idx], 0.0)
            mx = gathered.max(axis=2)
            acc = np.zeros(len(s))
            # client-by-client so rounding matches the scalar loop
            for c in range(C):
                acc += mx[c]
            total += scales[t] * acc
        out[lo:lo + CHUNK] = total
    return out


def accumulate_buckets(seqs, lengths, phi, n, k):
    seqs = np.asarray(seqs, dtype=np.int64)
    lengths = np.asarray(lengths, dtype=np.int64)
    phi = np.asarray(phi, dtype=np.float64)
    m = len(seqs)
    rows = np.arange(m)
    last = seqs[rows, lengths - 1]
    flat = last * (k + 1) + lengths
    size = n * (k + 1)
    last_sum = np.bincount(flat, weights=phi, minlength=size).reshape(n, k + 1)
    last_cnt = np.bincount(flat, minlength=size).reshape(n, k + 1).astype(np.int64)

    member = np.zeros((m, n), dtype=bool)
    for q in range(seqs.shape[1]):
        live = lengths > q
        member[rows[live], seqs[live, q]] = True
    excl_sum = np.zeros((n, k + 1))
    excl_cnt = np.zeros((n, k + 1), dtype=np.int64)
    for i in range(n):
        sel = ~member[:, i]
        excl_sum[i] = np.bincount(lengths[sel], weights=phi[sel], minlength=k + 1)
        excl_cnt[i] = np.bincount(lengths[sel], minlength=k + 1)

    full = lengths == k
    full_sum = float(np.bincount(np.zeros(int(full.sum()), dtype=np.int64),
                                 weights=phi[full], minlength=1)[0])
    return last_sum, last_cnt, excl_sum, excl_cnt, full_sum, int(full.sum())
