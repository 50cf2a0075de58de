"""Hot inner loops, each in a numba flavour and a vectorized numpy flavour.

Both flavours are always importable; the public names at the bottom of the
module point at whichever one ``_accel`` selected.  The two flavours are
required to agree bit for bit (the Wright-Fisher kernel in particular, since
its outputs are part of the reproducibility contract).
"""

import numpy as np

from ._accel import USE_NUMBA, njit

# splitmix64 constants
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 2.0 ** -53


# ---------------------------------------------------------------------------
# Gegenbauer three-term recurrence
# ---------------------------------------------------------------------------

@njit
def _gegenbauer_table_numba(alpha, nmax, x):
    nx = x.shape[0]
    out = np.empty((nmax + 1, nx))
    for i in range(nx):
        xi = x[i]
        prev = 1.0
        out[0, i] = prev
        if nmax == 0:
            continue
        cur = 2.0 * alpha * xi
        out[1, i] = cur
        for n in range(2, nmax + 1):
            nxt = (2.0 * xi * (n + alpha - 1.0) * cur - (n + 2.0 * alpha - 2.0) * prev) / n
            prev = cur
            cur = nxt
            out[n, i] = cur
    return out


def _gegenbauer_table_numpy(alpha, nmax, x):
    out = np.empty((nmax + 1, x.shape[0]))
    out[0] = 1.0
    if nmax == 0:
        return out
    out[1] = 2.0 * alpha * x
    for n in range(2, nmax + 1):
        out[n] = (2.0 * x * (n + alpha - 1.0) * out[n - 1] - (n + 2.0 * alpha - 2.0) * out[n - 2]) / n
    return out


# ---------------------------------------------------------------------------
# Counter-based uniforms: one splitmix64 stream per replicate
# ---------------------------------------------------------------------------

@njit
def _mix64_numba(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


def _mix64_numpy(z):
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _MIX1
        z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


def _counter(g):
    # wrapping uint64 product g * golden, without numpy's scalar overflow warning
    with np.errstate(over="ignore"):
        return np.uint64(g) * _GOLDEN


def replicate_keys(seed, replicates):
    """Per-replicate stream keys; replicate ``i`` depends only on (seed, i)."""
    idx = np.arange(1, replicates + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        spread = idx * _GOLDEN
    return _mix64_numpy(np.uint64(seed) ^ _mix64_numpy(spread))


# ---------------------------------------------------------------------------
# Neutral Wright-Fisher by inverse-CDF binomial draws
# ---------------------------------------------------------------------------

@njit
def _wf_kernel_numba(cdf, k0, generations, keys):
    pop = cdf.shape[0] - 1
    reps = keys.shape[0]
    fixed_at = np.zeros(generations + 1, dtype=np.int64)
    extinct_at = np.zeros(generations + 1, dtype=np.int64)
    sum_k = np.zeros(generations + 1, dtype=np.int64)
    sum_het = np.zeros(generations + 1, dtype=np.int64)
    sum_k2 = np.zeros(generations + 1, dtype=np.int64)
    sum_het2 = np.zeros(generations + 1, dtype=np.int64)
    for r in range(reps):
        key = keys[r]
        k = k0
        h = k * (pop - k)
        sum_k[0] += k
        sum_het[0] += h
        sum_k2[0] += k * k
        sum_het2[0] += h * h
        for g in range(1, generations + 1):
            z = _mix64_numba(key + np.uint64(g) * _GOLDEN)
            u = np.float64(z >> _S11) * _INV53
            lo = 0
            hi = pop
            while lo < hi:
                mid = (lo + hi) // 2
                if u < cdf[k, mid]:
                    hi = mid
                else:
                    lo = mid + 1
            k = lo
            if k == 0:
                extinct_at[g] += 1
                break
            if k == pop:
                fixed_at[g] += 1
                break
            h = k * (pop - k)
            sum_k[g] += k
            sum_het[g] += h
            sum_k2[g] += k * k
            sum_het2[g] += h * h
    return fixed_at, extinct_at, sum_k, sum_het, sum_k2, sum_het2


def _wf_kernel_numpy(cdf, k0, generations, keys):
    pop = cdf.shape[0] - 1
    fixed_at = np.zeros(generations + 1, dtype=np.int64)
    extinct_at = np.zeros(generations + 1, dtype=np.int64)
    sum_k = np.zeros(generations + 1, dtype=np.int64)
    sum_het = np.zeros(generations + 1, dtype=np.int64)
    sum_k2 = np.zeros(generations + 1, dtype=np.int64)
    sum_het2 = np.zeros(generations + 1, dtype=np.int64)
    k = np.full(keys.shape[0], k0, dtype=np.int64)
    live_keys = keys
    h = k * (pop - k)
    sum_k[0] = k.sum()
    sum_het[0] = h.sum()
    sum_k2[0] = (k * k).sum()
    sum_het2[0] = (h * h).sum()
    steps = int(np.ceil(np.log2(pop + 1))) + 1
    for g in range(1, generations + 1):
        if k.size == 0:
            break
        with np.errstate(over="ignore"):
            z = _mix64_numpy(live_keys + _counter(g))
        u = (z >> _S11).astype(np.float64) * _INV53
        lo = np.zeros_like(k)
        hi = np.full_like(k, pop)
        for _ in range(steps):
            open_ = lo < hi
            if not open_.any():
                break
            mid = (lo + hi) // 2
            below = u < cdf[k, mid]
            hi = np.where(open_ & below, mid, hi)
            lo = np.where(open_ & ~below, mid + 1, lo)
        k = lo
        fixed_at[g] = np.count_nonzero(k == pop)
        extinct_at[g] = np.count_nonzero(k == 0)
        live = (k > 0) & (k < pop)
        k = k[live]
        live_keys = live_keys[live]
        h = k * (pop - k)
        sum_k[g] = k.sum()
        sum_het[g] = h.sum()
        sum_k2[g] = (k * k).sum()
        sum_het2[g] = (h * h).sum()
    return fixed_at, extinct_at, sum_k, sum_het, sum_k2, sum_het2


if USE_NUMBA:
    gegenbauer_table_kernel = _gegenbauer_table_numba
    wf_kernel = _wf_kernel_numba
else:
    gegenbauer_table_kernel = _gegenbauer_table_numpy
    wf_kernel = _wf_kernel_numpy
