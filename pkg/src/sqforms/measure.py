"""Grid measure estimation, series dichotomies, and box-counting dimension.

Lebesgue measure is approximated deterministically: `CellCenter` samples the
middle of each grid cell, `Subsample(k)` draws k seeded uniform points per
cell (stratified; reproducible for a fixed seed).  Box counting uses covering
semantics instead (a box counts when a strip touches it), which is the right
notion for the dimension proxy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sqforms import _kernels
from sqforms.lattice import CoeffVector, SieveConfig, DEFAULT_SIEVE, sieved_array
from sqforms.strips import (
    ApproxFunction,
    Ball,
    Region,
    Strip,
    psi_eval,
    psi_values,
    region_bounds,
)


# ----------------------------------------------------------------------
# grids and sampling
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CellCenter:
    pass


@dataclass(frozen=True)
class Subsample:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("subsample count must be >= 1")


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid over the region's bounding box; resolution cells per axis."""

    resolution: int
    region: Region
    sample_rule: CellCenter | Subsample = CellCenter()
    cell_cap: int = 2**26

    def __post_init__(self):
        r = self.resolution
        if r < 16 or (r & (r - 1)) != 0:
            raise ValueError("resolution must be a power of two >= 16")
        n = self.region.n
        if r**n > self.cell_cap:
            raise ValueError(f"grid of {r}^{n} cells exceeds the cell cap")

    @property
    def n(self) -> int:
        return self.region.n

    @property
    def cell_width(self) -> float:
        lo, hi = region_bounds(self.region)
        return float(hi[0] - lo[0]) / self.resolution

    @property
    def passes(self) -> int:
        return self.sample_rule.k if isinstance(self.sample_rule, Subsample) else 1


def _sample_pass_2d(grid: GridSpec, rng):
    """One pass of sample coordinates (X, Y) plus the in-region mask."""
    lo, _ = region_bounds(grid.region)
    res = grid.resolution
    w = grid.cell_width
    idx = np.arange(res, dtype=np.float64)
    if isinstance(grid.sample_rule, CellCenter):
        xs = lo[0] + (idx + 0.5) * w
        ys = lo[1] + (idx + 0.5) * w
        X = np.broadcast_to(xs[:, None], (res, res)).copy()
        Y = np.broadcast_to(ys[None, :], (res, res)).copy()
    else:
        off = rng.random((2, res, res))
        X = lo[0] + (idx[:, None] + off[0]) * w
        Y = lo[1] + (idx[None, :] + off[1]) * w
    inside = None
    if isinstance(grid.region, Ball):
        cx, cy = grid.region.center
        r2 = grid.region.radius**2
        inside = ((X - cx) ** 2 + (Y - cy) ** 2 < r2).astype(np.uint8)
    return X, Y, inside


def _sample_pass_nd(grid: GridSpec, rng):
    """Flattened (m, n) sample points plus the in-region mask, one pass."""
    lo, _ = region_bounds(grid.region)
    res, n = grid.resolution, grid.n
    w = grid.cell_width
    shape = (res,) * n
    idx = np.indices(shape, dtype=np.float64).reshape(n, -1).T
    if isinstance(grid.sample_rule, CellCenter):
        pts = lo + (idx + 0.5) * w
    else:
        pts = lo + (idx + rng.random(idx.shape)) * w
    inside = None
    if isinstance(grid.region, Ball):
        c = np.asarray(grid.region.center)
        inside = ((pts - c) ** 2).sum(axis=1) < grid.region.radius**2
    return pts, inside


def _min_thickness(strips_thickness, grid: GridSpec) -> tuple[float, bool]:
    tmin = min(strips_thickness) if strips_thickness else math.inf
    return tmin, tmin < 2.0 * grid.cell_width


# ----------------------------------------------------------------------
# measure estimates
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class MeasureEstimate:
    """Grid estimate of a Lebesgue measure with a coarseness warning flag."""

    value: float
    coarse: bool
    cell_width: float
    min_thickness: float

    def __float__(self):
        return self.value


def estimate_measure(
    strips: list[Strip],
    region: Region,
    grid: GridSpec,
    seed: int = 0,
) -> MeasureEstimate:
    """Measure of region intersected with the union of the given strips.

    Counts sample points lying in any strip, scaled by cell volume; the
    result is deterministic for a fixed GridSpec and seed.
    """
    if grid.region != region:
        raise ValueError("grid must cover the requested region")
    n = grid.n
    for s in strips:
        if s.a.n != n:
            raise ValueError("strip dimension mismatch")
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(grid.passes):
        pts, inside = _sample_pass_nd(grid, rng)
        if strips:
            member = np.zeros(pts.shape[0], dtype=bool)
            for s in strips:
                t = pts @ np.asarray(s.a.squared, dtype=np.float64)
                member |= np.abs(t - float(s.c * s.c)) < s.half_width
        else:
            member = np.zeros(pts.shape[0], dtype=bool)
        if inside is not None:
            member &= inside
        hits += int(member.sum())
    value = hits * grid.cell_width**n / grid.passes
    tmin, coarse = _min_thickness([s.thickness for s in strips], grid)
    return MeasureEstimate(value, coarse, grid.cell_width, tmin)


def _union_multiplicity_counts(vectors, psis, grid: GridSpec, seed: int):
    """Accumulated (sum m, sum m^2, hits of m >= 1) over sample passes.

    vectors: (m, n) int64 coefficient coordinates (squared internally).
    The n = 2 path runs through the compiled kernels; other dimensions use
    the numpy broadcast path.
    """
    rng = np.random.default_rng(seed)
    sq = (vectors.astype(np.float64)) ** 2
    s1 = s2 = union_hits = 0
    for _ in range(grid.passes):
        if grid.n == 2:
            X, Y, inside = _sample_pass_2d(grid, rng)
            mult = np.zeros(X.shape, dtype=np.int32)
            _kernels.accumulate_multiplicity(sq, psis, X, Y, inside, mult)
        else:
            pts, inside = _sample_pass_nd(grid, rng)
            mult = np.zeros(pts.shape[0], dtype=np.int32)
            for k in range(sq.shape[0]):
                t = pts @ sq[k]
                hit = _kernels.nearest_square_dist(t) < psis[k]
                if inside is not None:
                    hit &= inside
                mult += hit
        m = mult.astype(np.int64)
        s1 += int(m.sum())
        s2 += int((m * m).sum())
        union_hits += int(np.count_nonzero(m))
    return s1, s2, union_hits


def _vector_thickness(vectors, psis):
    norms = np.sqrt((vectors.astype(np.float64) ** 4).sum(axis=1))
    return 2.0 * psis / norms


@dataclass(frozen=True)
class UnionMeasureResult:
    """|union_c sigma_a(c) meet B| estimate with the sandwich bounds."""

    estimate: MeasureEstimate
    lower_bound: float
    upper_bound: float

    @property
    def within_bounds(self) -> bool:
        return self.lower_bound <= self.estimate.value <= self.upper_bound


def union_measure_over_c(
    a: CoeffVector,
    f: ApproxFunction,
    ball: Ball,
    grid: GridSpec,
    seed: int = 0,
) -> UnionMeasureResult:
    """Estimate |(union over c of sigma_a(c)) meet B|.

    Reported alongside the bracket [c1 |B| psi/h, c2 |B| psi/h] with
    c1 = 1/(4 pi) and c2 = 40/(eps pi), eps taken from the ball.  The
    bracket constants are the planar ones; higher dimensions reuse them
    as an indicative envelope only.
    """
    if a.n != ball.n:
        raise ValueError("dimension mismatch")
    if grid.region != ball:
        raise ValueError("grid must cover the ball")
    vec = np.asarray([a.coords], dtype=np.int64)
    psi = psi_eval(f, a.height)
    psis = np.asarray([psi])
    _, _, hits = _union_multiplicity_counts(vec, psis, grid, seed)
    value = hits * grid.cell_width**ball.n / grid.passes
    tmin, coarse = _min_thickness(list(_vector_thickness(vec, psis)), grid)
    est = MeasureEstimate(value, coarse, grid.cell_width, tmin)
    vol = ball.volume
    base = vol * psi / a.height
    c1 = 1.0 / (4.0 * math.pi)
    c2 = 40.0 / (ball.epsilon * math.pi)
    return UnionMeasureResult(est, c1 * base, c2 * base)


def pairwise_intersection_measure(
    a: CoeffVector,
    a2: CoeffVector,
    f: ApproxFunction,
    ball: Ball,
    grid: GridSpec,
    seed: int = 0,
) -> MeasureEstimate:
    """Estimate |sigma_a meet sigma_a' meet B| for two distinct vectors."""
    if a == a2:
        raise ValueError("pairwise intersection needs distinct vectors")
    if a.n != ball.n or a2.n != ball.n:
        raise ValueError("dimension mismatch")
    if grid.region != ball:
        raise ValueError("grid must cover the ball")
    vecs = np.asarray([a.coords, a2.coords], dtype=np.int64)
    psis = psi_values(f, np.asarray([a.height, a2.height]))
    s1, s2, _ = _union_multiplicity_counts(vecs, psis, grid, seed)
    # with two sets, #cells where both hold = sum m(m-1)/2 = (s2 - s1)/2
    both = (s2 - s1) // 2
    value = both * grid.cell_width**ball.n / grid.passes
    tmin, coarse = _min_thickness(list(_vector_thickness(vecs, psis)), grid)
    return MeasureEstimate(value, coarse, grid.cell_width, tmin)


@dataclass(frozen=True)
class BCStatistics:
    """Second-moment statistics S1, S2 over sieved vectors with h <= H."""

    S1: float
    S2: float
    ratio: float | None
    n_vectors: int
    coarse: bool

    @property
    def no_data(self) -> bool:
        return self.n_vectors == 0


def bc_statistics(
    H: int,
    f: ApproxFunction,
    ball: Ball,
    grid: GridSpec,
    sieve: SieveConfig = DEFAULT_SIEVE,
    seed: int = 0,
) -> BCStatistics:
    """S1 = sum |sigma_a meet B|, S2 = sum over pairs (diagonal included) of
    |sigma_a meet sigma_a' meet B|, and the ratio S1^2/S2.

    S2 is computed via the per-sample multiplicity identity
    sum_{a,a'} |A_a meet A_a'| = integral of m(x)^2.
    """
    if H < 2:
        raise ValueError("need H >= 2")
    if grid.region != ball:
        raise ValueError("grid must cover the ball")
    vecs = sieved_array(1, H, sieve, ball.n)
    if vecs.shape[0] == 0:
        return BCStatistics(0.0, 0.0, None, 0, False)
    psis = psi_values(f, vecs.max(axis=1))
    s1c, s2c, _ = _union_multiplicity_counts(vecs, psis, grid, seed)
    w2 = grid.cell_width**ball.n / grid.passes
    S1, S2 = s1c * w2, s2c * w2
    ratio = (S1 * S1 / S2) if S2 > 0 else None
    _, coarse = _min_thickness(list(_vector_thickness(vecs, psis)), grid)
    return BCStatistics(S1, S2, ratio, int(vecs.shape[0]), coarse)


def windowed_union_measure(
    h_lo: int,
    h_hi: int,
    f: ApproxFunction,
    region: Region,
    grid: GridSpec,
    sieve: SieveConfig = DEFAULT_SIEVE,
    seed: int = 0,
) -> MeasureEstimate:
    """|E meet region| for E = union of sigma_a over sieved h_lo <= h_a <= h_hi."""
    if grid.region != region:
        raise ValueError("grid must cover the region")
    vecs = sieved_array(h_lo, h_hi, sieve, grid.n)
    psis = psi_values(f, vecs.max(axis=1)) if vecs.size else np.empty(0)
    _, _, hits = _union_multiplicity_counts(vecs, psis, grid, seed)
    value = hits * grid.cell_width**grid.n / grid.passes
    tmin, coarse = _min_thickness(list(_vector_thickness(vecs, psis)), grid)
    return MeasureEstimate(value, coarse, grid.cell_width, tmin)


# ----------------------------------------------------------------------
# series dichotomies
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class DichotomyReport:
    """Partial sums at dyadic cutoffs plus a convergence hint.

    The hint compares consecutive complete dyadic block sums: a final ratio
    below 0.9 reads as geometric decay (Converging), one at or above 0.98 as
    asymptotically non-decreasing blocks (Diverging), anything between is
    Inconclusive.  It is a heuristic about the finite window, not a guarantee.
    """

    partial_sums: tuple[tuple[int, float], ...]
    verdict_hint: str
    hausdorff_sums: tuple[tuple[int, float, float], ...] = ()


_CONVERGE_RATIO = 0.9
_DIVERGE_RATIO = 0.98


def _dyadic_verdict(terms: np.ndarray) -> str:
    H = terms.size
    blocks = []
    j = 0
    while 2 ** (j + 1) - 1 <= H:  # complete blocks [2^j, 2^(j+1))
        blocks.append(terms[2**j - 1 : 2 ** (j + 1) - 1].sum())
        j += 1
    blocks = [b for b in blocks if b > 0]
    if len(blocks) < 2:
        return "Inconclusive"
    ratio = blocks[-1] / blocks[-2]
    if ratio < _CONVERGE_RATIO:
        return "Converging"
    if ratio >= _DIVERGE_RATIO:
        return "Diverging"
    return "Inconclusive"


def _partial_records(h: np.ndarray, terms: np.ndarray):
    csum = np.cumsum(terms)
    H = h[-1]
    cuts = [2**j for j in range(int(math.log2(H)) + 1)]
    if cuts[-1] != H:
        cuts.append(int(H))
    return tuple((int(c), float(csum[c - 1])) for c in cuts)


def khintchine_sum(f: ApproxFunction, n: int, H: int) -> DichotomyReport:
    """Partial sums of sum_h h^(n-2) psi(h) with a convergence hint."""
    if H < 1:
        raise ValueError("need H >= 1")
    if n < 2:
        raise ValueError("need n >= 2")
    h = np.arange(1, H + 1, dtype=np.int64)
    terms = h.astype(np.float64) ** (n - 2) * psi_values(f, h)
    return DichotomyReport(_partial_records(h, terms), _dyadic_verdict(terms))


def hausdorff_sum(f: ApproxFunction, n: int, s: float, H: int) -> DichotomyReport:
    """Partial sums of sum_h psi(h)^(s-(n-1)) h^(3n-2-2s) for n-1 < s < n."""
    if not (n - 1 < s < n):
        raise ValueError("s must lie strictly between n-1 and n")
    if H < 1:
        raise ValueError("need H >= 1")
    h = np.arange(1, H + 1, dtype=np.int64)
    hf = h.astype(np.float64)
    terms = psi_values(f, h) ** (s - (n - 1)) * hf ** (3 * n - 2 - 2 * s)
    records = _partial_records(h, terms)
    return DichotomyReport(
        records,
        _dyadic_verdict(terms),
        tuple((H_, float(s), v) for H_, v in records),
    )


def hausdorff_term_exponent(v, s, n: int):
    """Exponent e with psi(h)^(s-(n-1)) h^(3n-2-2s) = h^e for psi = h^-v.

    Works on exact Fractions as well as floats; the series converges iff
    e < -1, with the boundary e = -1 (s = n-1 + (n+1)/(2+v)) diverging.
    """
    return -v * (s - (n - 1)) + (3 * n - 2 - 2 * s)


def predicted_dimension(lam, n: int):
    """Dimension prediction (n-1) + (n+1)/(2+lambda) for lambda >= n-1."""
    if not lam >= n - 1:
        raise ValueError("the formula requires lambda >= n-1")
    return (n - 1) + (n + 1) / (2 + lam)


# ----------------------------------------------------------------------
# box counting
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class BoxCountResult:
    slope: float
    intercept: float
    resolutions: tuple[int, ...]
    counts: tuple[int, ...]
    used: tuple[bool, ...]
    residuals: tuple[float, ...]
    n_vectors: int
    bias_uncontrolled: bool = False

    @property
    def estimate(self) -> float:
        return self.slope


def _window_vectors(h_lo: int, h_hi: int, n: int, sieve: SieveConfig | None):
    if sieve is not None:
        return sieved_array(h_lo, h_hi, sieve, n)
    if n != 2:
        from itertools import product

        rows = [
            c
            for c in product(range(h_hi + 1), repeat=n)
            if h_lo <= max(c) <= h_hi
        ]
        return np.asarray(rows, dtype=np.int64).reshape(-1, n)
    b = np.arange(h_hi + 1, dtype=np.int64)[None, :]
    chunks = []
    for a0 in range(0, h_hi + 1, 512):
        a = np.arange(a0, min(a0 + 512, h_hi + 1), dtype=np.int64)[:, None]
        h = np.maximum(a, b)
        mask = (h >= h_lo) & (h <= h_hi)
        ii, jj = np.nonzero(mask)
        if ii.size:
            chunks.append(np.stack([a[ii, 0], b[0, jj]], axis=1))
    return np.concatenate(chunks, axis=0) if chunks else np.empty((0, 2), np.int64)


def _box_occupancy_nd(vectors, psis, res: int, n: int) -> int:
    """Occupied-box count on [0,1]^n via the per-cell interval test."""
    shape = (res,) * n
    idx = np.indices(shape, dtype=np.float64).reshape(n, -1).T
    occupied = np.zeros(idx.shape[0], dtype=bool)
    for vec, psi in zip(vectors, psis):
        sq = (vec.astype(np.float64)) ** 2
        tlo = (idx / res) @ sq - psi
        thi = ((idx + 1.0) / res) @ sq + psi
        cc = np.floor(np.sqrt(np.maximum(tlo, 0.0)))
        cc = np.where(cc * cc > tlo, cc - 1.0, cc)
        c0 = np.where(tlo < 0.0, 0.0, cc + 1.0)
        c0 = np.where(c0 * c0 <= tlo, c0 + 1.0, c0)
        occupied |= c0 * c0 < thi
    return int(occupied.sum())


def _fit_box_counts(resolutions, counts, thickness, n_vectors) -> BoxCountResult:
    used = []
    for r, cnt in zip(resolutions, counts):
        frac_violating = float((1.0 / r <= 2.0 * thickness).mean())
        used.append(frac_violating < 0.01 and cnt > 0)
    bias_flag = False
    if sum(used) < 3:
        used = [c > 0 for c in counts]
        bias_flag = True
    xs = np.log([r for r, u in zip(resolutions, used) if u])
    ys = np.log([c for c, u in zip(counts, used) if u])
    slope, intercept = np.polyfit(xs, ys, 1)
    fit_resid = iter(ys - (slope * xs + intercept))
    residuals = [float(next(fit_resid)) if u else float("nan") for u in used]
    return BoxCountResult(
        float(slope),
        float(intercept),
        tuple(resolutions),
        tuple(counts),
        tuple(used),
        tuple(residuals),
        n_vectors,
        bias_flag,
    )


def box_counting_strips(strips: list[Strip], resolutions: list[int]) -> BoxCountResult:
    """Box-counting fit for an explicit list of strips on [0,1]^2.

    Mainly a diagnostic: a single thin strip should fit a slope near 1 and a
    cube-covering strip a slope near 2.
    """
    if len(resolutions) < 3:
        raise ValueError("need at least 3 resolutions for a fit")
    if not strips:
        raise ValueError("need at least one strip")
    if any(s.a.n != 2 for s in strips):
        raise ValueError("explicit strip box counting is implemented for n = 2")
    resolutions = sorted(int(r) for r in resolutions)
    counts = []
    for r in resolutions:
        idx = np.indices((r, r), dtype=np.float64).reshape(2, -1).T
        occupied = np.zeros(idx.shape[0], dtype=bool)
        for s in strips:
            sq = np.asarray(s.a.squared, dtype=np.float64)
            tlo = (idx / r) @ sq
            thi = ((idx + 1.0) / r) @ sq
            c2 = float(s.c * s.c)
            occupied |= (tlo < c2 + s.half_width) & (thi > c2 - s.half_width)
        counts.append(int(occupied.sum()))
    thickness = np.asarray([s.thickness for s in strips])
    return _fit_box_counts(resolutions, counts, thickness, len(strips))


def box_counting_dimension(
    f: ApproxFunction,
    n: int,
    h_window: tuple[int, int],
    resolutions: list[int],
    sieve: SieveConfig | None = None,
) -> BoxCountResult:
    """Box-counting slope for E = union of sigma_a over the height window.

    Counts boxes the union touches at each resolution (cells per axis over
    the unit cube) and fits log N against log(resolution).  This finite
    proxy is biased toward n wherever boxes are small relative to strip
    thickness or the strip family saturates the grid; resolutions where
    more than 1% of the strips are thicker than half a cell are dropped
    from the fit (unless that leaves fewer than 3 points, in which case all
    points are kept and the result is flagged).
    """
    h_lo, h_hi = h_window
    if h_lo < 2:
        raise ValueError("height window must start at 2 or above")
    if h_hi < h_lo:
        raise ValueError("empty height window")
    if len(resolutions) < 3:
        raise ValueError("need at least 3 resolutions for a fit")
    resolutions = sorted(int(r) for r in resolutions)
    finest = resolutions[-1]
    for r in resolutions:
        if r < 2 or finest % r != 0:
            raise ValueError("resolutions must form a divisor ladder of the finest")
    vectors = _window_vectors(h_lo, h_hi, n, sieve)
    if vectors.shape[0] == 0:
        raise ValueError("no vectors in the height window")
    heights = vectors.max(axis=1)
    psis = psi_values(f, heights)
    thickness = _vector_thickness(vectors, psis)

    counts = []
    if n == 2:
        bitmap = np.zeros((finest, finest), dtype=np.uint8)
        sq = (vectors.astype(np.float64)) ** 2
        _kernels.mark_box_touch(sq, psis, finest, bitmap)
        for r in resolutions:
            fct = finest // r
            occ = bitmap.reshape(r, fct, r, fct).any(axis=(1, 3))
            counts.append(int(occ.sum()))
    else:
        for r in resolutions:
            counts.append(_box_occupancy_nd(vectors, psis, r, n))

    return _fit_box_counts(resolutions, counts, thickness, int(vectors.shape[0]))
