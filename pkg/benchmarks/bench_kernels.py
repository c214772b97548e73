"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run:  python benchmarks/bench_kernels.py [--res 1024] [--hmax 64]

The same workloads run through both paths and the outputs are asserted
equal, so the table is a like-for-like comparison.  Set
SQFORMS_DISABLE_NUMBA=1 on any sqforms run to force the numpy path
package-wide.
"""

import argparse
import time

import numpy as np

from sqforms import _kernels
from sqforms.lattice import sieved_array


def _workload(hmax: int, res: int):
    vecs = sieved_array(1, hmax)
    sq = (vecs.astype(np.float64)) ** 2
    psis = vecs.max(axis=1).astype(np.float64) ** -1.0
    idx = (np.arange(res) + 0.5) / res
    X = np.broadcast_to(idx[:, None], (res, res)).copy()
    Y = np.broadcast_to(idx[None, :], (res, res)).copy()
    return sq, psis, X, Y


def bench(make_out, fn, repeat=3):
    best, out = float("inf"), None
    for _ in range(repeat):
        out = make_out()
        t0 = time.perf_counter()
        fn(out)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--res", type=int, default=1024)
    ap.add_argument("--hmax", type=int, default=64)
    args = ap.parse_args()

    sq, psis, X, Y = _workload(args.hmax, args.res)
    print(f"{sq.shape[0]} vectors, grid {args.res}^2, numba={_kernels.NUMBA_ENABLED}")

    rows = []

    mk_mult = lambda: np.zeros(X.shape, dtype=np.int32)
    t_np, out_np = bench(
        mk_mult, lambda o: _kernels.accumulate_multiplicity_numpy(sq, psis, X, Y, None, o)
    )
    if _kernels.NUMBA_ENABLED:
        _kernels.accumulate_multiplicity_numba(sq, psis, X, Y, None, mk_mult())  # compile
        t_nb, out_nb = bench(
            mk_mult, lambda o: _kernels.accumulate_multiplicity_numba(sq, psis, X, Y, None, o)
        )
        assert (out_nb == out_np).all()
    else:
        t_nb = float("nan")
    rows.append(("multiplicity", t_np, t_nb))

    mk_box = lambda: np.zeros((args.res, args.res), dtype=np.uint8)
    t_np, box_np = bench(
        mk_box, lambda o: _kernels.mark_box_touch_numpy(sq, psis, args.res, o)
    )
    if _kernels.NUMBA_ENABLED:
        _kernels.mark_box_touch_numba(sq, psis, args.res, mk_box())  # compile
        t_nb, box_nb = bench(
            mk_box, lambda o: _kernels.mark_box_touch_numba(sq, psis, args.res, o)
        )
        assert (box_nb == box_np).all()
    else:
        t_nb = float("nan")
    rows.append(("box touch", t_np, t_nb))

    print(f"{'kernel':<14} {'numpy (s)':>10} {'numba (s)':>10} {'speedup':>8}")
    for name, tn, tb in rows:
        speed = tn / tb if tb == tb and tb > 0 else float("nan")
        print(f"{name:<14} {tn:>10.3f} {tb:>10.3f} {speed:>8.1f}")


if __name__ == "__main__":
    main()
