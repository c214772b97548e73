"""Hot grid kernels, compiled with numba when available.

Every kernel has two implementations: a numba ``@njit`` version and a pure
numpy reference version.  The numba path is used when numba imports cleanly
and the environment variable ``SQFORMS_DISABLE_NUMBA`` is unset (or "0");
setting it to "1" forces the numpy path.  Both paths perform the same
floating-point comparisons cell by cell, so their integer outputs agree
exactly; ``benchmarks/bench_kernels.py`` compares their speed.

Kernels:

* ``accumulate_multiplicity`` - for a batch of squared coefficient vectors,
  add 1 to a per-cell counter wherever the linear form a^2.x lies within
  psi of a perfect square (sample-point semantics).
* ``mark_box_touch`` - mark every cell of an R x R grid over [0,1]^2 whose
  closed cell meets some open strip c^2 - psi < a^2.x < c^2 + psi
  (covering semantics).
"""

import math
import os

import numpy as np

_ENV_FLAG = "SQFORMS_DISABLE_NUMBA"


def numba_disabled_by_env() -> bool:
    return os.environ.get(_ENV_FLAG, "").strip().lower() in {"1", "true", "yes"}


def _try_import_numba():
    if numba_disabled_by_env():
        return None
    try:
        import numba
    except ImportError:
        return None
    return numba


_numba = _try_import_numba()
NUMBA_ENABLED = _numba is not None


# ----------------------------------------------------------------------
# numpy reference implementations
# ----------------------------------------------------------------------

def nearest_square_dist(t: np.ndarray) -> np.ndarray:
    """Distance from each t >= 0 to the nearest perfect square, in t-units."""
    c = np.floor(np.sqrt(t))
    # sqrt is correctly rounded, so floor can be off by one near exact squares
    c = np.where(c * c > t, c - 1.0, c)
    c = np.where((c + 1.0) * (c + 1.0) <= t, c + 1.0, c)
    return np.minimum(t - c * c, (c + 1.0) ** 2 - t)


def accumulate_multiplicity_numpy(sq, psis, X, Y, inside, out):
    """Reference path: out[i,j] += #vectors whose strip union contains (X,Y)[i,j]."""
    for k in range(sq.shape[0]):
        t = sq[k, 0] * X + sq[k, 1] * Y
        hit = nearest_square_dist(t) < psis[k]
        if inside is not None:
            hit &= inside.astype(bool)
        out += hit
    return out


def _mark_lane_runs_numpy(major_sq, minor_sq, psi, res, lo_t, hi_t, out, transpose):
    """Mark cells along the minor axis for each major-axis lane.

    Lane m covers minor in [m/res, (m+1)/res]; marks major indices i with
    lo_t < major_sq*(i+1) + minor_sq*(m+1) and major_sq*i + minor_sq*m < hi_t
    (strict on both sides, matching the open strip).
    """
    if minor_sq > 0.0:
        m0 = max(0, math.floor((lo_t - major_sq * res) / minor_sq))
        m1 = min(res - 1, math.ceil(hi_t / minor_sq))
    else:
        m0, m1 = 0, res - 1
    if m1 < m0:
        return
    m = np.arange(m0, m1 + 1, dtype=np.float64)
    lo = np.floor((lo_t - minor_sq * (m + 1.0)) / major_sq - 1.0) + 1.0
    hi = np.ceil((hi_t - minor_sq * m) / major_sq) - 1.0
    lo = np.maximum(lo, 0.0)
    hi = np.minimum(hi, res - 1.0)
    width = int((hi - lo).max())
    for d in range(width + 1):
        ii = lo + d
        sel = ii <= hi
        if not sel.any():
            continue
        a_idx = ii[sel].astype(np.int64)
        b_idx = m[sel].astype(np.int64)
        if transpose:
            out[b_idx, a_idx] = 1
        else:
            out[a_idx, b_idx] = 1


def mark_box_touch_numpy(sq, psis, res, out):
    """Reference path: mark cells of the res x res grid touched by any strip.

    Marches each line a^2 x + b^2 y = c^2 along its major axis so that the
    per-lane index range stays short.
    """
    for k in range(sq.shape[0]):
        A = float(sq[k, 0])
        B = float(sq[k, 1])
        psi = float(psis[k])
        cmax = math.isqrt(int(A + B + psi)) + 1
        for c in range(cmax + 1):
            lo_t = res * (c * c - psi)
            hi_t = res * (c * c + psi)
            if A >= B:
                _mark_lane_runs_numpy(A, B, psi, res, lo_t, hi_t, out, transpose=False)
            else:
                _mark_lane_runs_numpy(B, A, psi, res, lo_t, hi_t, out, transpose=True)
    return out


# ----------------------------------------------------------------------
# numba implementations
# ----------------------------------------------------------------------

if NUMBA_ENABLED:
    from numba import njit, prange

    @njit(cache=True, parallel=True)
    def _accumulate_multiplicity_numba(sq, psis, X, Y, inside, use_inside, out):
        nx, ny = X.shape
        m = sq.shape[0]
        for i in prange(nx):
            for k in range(m):
                s1 = sq[k, 0]
                s2 = sq[k, 1]
                psi = psis[k]
                c = -1.0
                for j in range(ny):
                    if use_inside and inside[i, j] == 0:
                        continue
                    t = s1 * X[i, j] + s2 * Y[i, j]
                    if c < 0.0:
                        c = np.floor(np.sqrt(t))
                    while (c + 1.0) * (c + 1.0) <= t:
                        c += 1.0
                    while c * c > t:
                        c -= 1.0
                    d1 = t - c * c
                    d2 = (c + 1.0) * (c + 1.0) - t
                    d = d1 if d1 < d2 else d2
                    if d < psi:
                        out[i, j] += 1

    @njit(cache=True, parallel=True)
    def _mark_box_touch_numba(sq, psis, res, out):
        fres = np.float64(res)
        for k in prange(sq.shape[0]):
            A = sq[k, 0]
            B = sq[k, 1]
            psi = psis[k]
            cmax = int(np.sqrt(A + B + psi)) + 1
            swap = A < B
            major = B if swap else A
            minor = A if swap else B
            for c in range(cmax + 1):
                lo_t = fres * (float(c) * float(c) - psi)
                hi_t = fres * (float(c) * float(c) + psi)
                if minor > 0.0:
                    m0 = int(np.floor((lo_t - major * fres) / minor))
                    m1 = int(np.ceil(hi_t / minor))
                    if m0 < 0:
                        m0 = 0
                    if m1 > res - 1:
                        m1 = res - 1
                else:
                    m0, m1 = 0, res - 1
                for m in range(m0, m1 + 1):
                    lo = np.floor((lo_t - minor * (m + 1.0)) / major - 1.0) + 1.0
                    hi = np.ceil((hi_t - minor * m) / major) - 1.0
                    ilo = int(max(lo, 0.0))
                    ihi = int(min(hi, fres - 1.0))
                    if swap:
                        for i in range(ilo, ihi + 1):
                            out[m, i] = 1
                    else:
                        for i in range(ilo, ihi + 1):
                            out[i, m] = 1

    def accumulate_multiplicity_numba(sq, psis, X, Y, inside, out):
        use_inside = inside is not None
        if inside is None:
            inside = np.empty((0, 0), dtype=np.uint8)
        _accumulate_multiplicity_numba(sq, psis, X, Y, inside, use_inside, out)
        return out

    def mark_box_touch_numba(sq, psis, res, out):
        _mark_box_touch_numba(sq, psis, res, out)
        return out


# ----------------------------------------------------------------------
# dispatch
# ----------------------------------------------------------------------

def accumulate_multiplicity(sq, psis, X, Y, inside, out):
    """out[i,j] += number of vectors whose strip union contains the sample.

    sq: (m, 2) float64 squared coordinates; psis: (m,) half-widths;
    X, Y: 2-D sample coordinates; inside: optional uint8 mask; out: int32.
    """
    sq = np.ascontiguousarray(sq, dtype=np.float64)
    psis = np.ascontiguousarray(psis, dtype=np.float64)
    if NUMBA_ENABLED:
        return accumulate_multiplicity_numba(sq, psis, X, Y, inside, out)
    return accumulate_multiplicity_numpy(sq, psis, X, Y, inside, out)


def mark_box_touch(sq, psis, res, out):
    """Mark cells of the res x res grid over [0,1]^2 touched by any strip."""
    sq = np.ascontiguousarray(sq, dtype=np.float64)
    psis = np.ascontiguousarray(psis, dtype=np.float64)
    if NUMBA_ENABLED:
        return mark_box_touch_numba(sq, psis, res, out)
    return mark_box_touch_numpy(sq, psis, res, out)
