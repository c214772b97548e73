"""Integer coefficient vectors, the coprimality/ratio sieve, totient counting,
and angles between squared-vector directions.

All arithmetic on lattice data is exact: vector coordinates, determinant
minors and gcds are Python/numpy integers, and potential int64 overflow in
the bulk numpy paths raises instead of wrapping.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterator

import numpy as np

_INT64_MAX = 2**63 - 1


class ZeroVectorError(ValueError):
    """A nonzero coefficient vector was required."""


@dataclass(frozen=True)
class CoeffVector:
    """A vector a in Z>=0^n with cached height max|a_i|."""

    coords: tuple[int, ...]
    height: int = field(init=False)

    def __post_init__(self):
        coords = tuple(int(c) for c in self.coords)
        if len(coords) < 2:
            raise ValueError("coefficient vectors need at least 2 coordinates")
        if any(c < 0 for c in coords):
            raise ValueError("coefficient vectors live in Z>=0^n")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "height", max(abs(c) for c in coords))

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def squared(self) -> tuple[int, ...]:
        """The componentwise square (a_1^2, ..., a_n^2)."""
        return tuple(c * c for c in self.coords)

    def is_zero(self) -> bool:
        return self.height == 0


def height(v: CoeffVector) -> int:
    """Height h_a = max |a_i|."""
    return v.height


@dataclass(frozen=True)
class SieveConfig:
    """gcd(a_1,...,a_n) = 1 plus the first-two-coordinates ratio window."""

    require_coprime: bool = True
    ratio_lo: Fraction = Fraction(1, 2)
    ratio_hi: Fraction = Fraction(2, 1)

    def __post_init__(self):
        lo = Fraction(self.ratio_lo)
        hi = Fraction(self.ratio_hi)
        if not (0 < lo <= 1 <= hi):
            raise ValueError("ratio bounds must satisfy 0 < lo <= 1 <= hi")
        object.__setattr__(self, "ratio_lo", lo)
        object.__setattr__(self, "ratio_hi", hi)


DEFAULT_SIEVE = SieveConfig()


def passes_sieve(v: CoeffVector, cfg: SieveConfig = DEFAULT_SIEVE) -> bool:
    """True iff gcd of the coordinates is 1 and lo <= a_1/a_2 <= hi.

    The ratio test applies to the first two coordinates only (no reordering)
    and is evaluated as an exact rational comparison; a_2 = 0 fails it.
    """
    if v.is_zero():
        raise ZeroVectorError("the zero vector cannot be sieved")
    if cfg.require_coprime and math.gcd(*v.coords) != 1:
        return False
    a1, a2 = v.coords[0], v.coords[1]
    if a2 == 0:
        return False
    return cfg.ratio_lo <= Fraction(a1, a2) <= cfg.ratio_hi


def _check_height_width(h_max: int, n: int):
    if n * h_max * h_max > _INT64_MAX:
        raise OverflowError(
            f"n*h_max^2 = {n * h_max * h_max} exceeds the exact integer width"
        )


def enumerate_sieved(
    h_min: int,
    h_max: int,
    cfg: SieveConfig = DEFAULT_SIEVE,
    n: int = 2,
) -> Iterator[CoeffVector]:
    """Yield the sieved vectors with h_min <= h_a <= h_max, once each, in
    lexicographic coordinate order."""
    if not (1 <= h_min <= h_max):
        raise ValueError("need 1 <= h_min <= h_max")
    _check_height_width(h_max, n)
    for coords in product(range(h_max + 1), repeat=n):
        h = max(coords)
        if h < h_min or h > h_max:
            continue
        v = CoeffVector(coords)
        if passes_sieve(v, cfg):
            yield v


def sieved_array(
    h_min: int,
    h_max: int,
    cfg: SieveConfig = DEFAULT_SIEVE,
    n: int = 2,
) -> np.ndarray:
    """Sieved vectors as an (m, n) int64 array in lexicographic order.

    Fast bulk path for n = 2; higher n falls back to the generator.
    """
    if not (1 <= h_min <= h_max):
        raise ValueError("need 1 <= h_min <= h_max")
    _check_height_width(h_max, n)
    if n != 2:
        return np.array(
            [v.coords for v in enumerate_sieved(h_min, h_max, cfg, n)], dtype=np.int64
        ).reshape(-1, n)
    lo, hi = cfg.ratio_lo, cfg.ratio_hi
    b = np.arange(h_max + 1, dtype=np.int64)[None, :]
    chunks = []
    for a0 in range(0, h_max + 1, 512):  # row-chunked to bound memory
        a = np.arange(a0, min(a0 + 512, h_max + 1), dtype=np.int64)[:, None]
        h = np.maximum(a, b)
        mask = (h >= h_min) & (h <= h_max) & (b >= 1)
        mask &= (lo.denominator * a >= lo.numerator * b) & (
            hi.denominator * a <= hi.numerator * b
        )
        if cfg.require_coprime:
            mask &= np.gcd(a, b) == 1
        ii, jj = np.nonzero(mask)
        if ii.size:
            chunks.append(np.stack([a[ii, 0], b[0, jj]], axis=1))
    if not chunks:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(chunks, axis=0)


def count_sieved_dyadic(k: int, n: int = 2, cfg: SieveConfig = DEFAULT_SIEVE) -> int:
    """N_k: the number of sieved vectors with 2^k <= h_a < 2^(k+1)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    _check_height_width(2 ** (k + 1), n)
    if n != 2:
        return sum(1 for _ in enumerate_sieved(2**k, 2 ** (k + 1) - 1, cfg, n))
    return int(sieved_array(2**k, 2 ** (k + 1) - 1, cfg, 2).shape[0])


def totient_sieve(limit: int) -> np.ndarray:
    """Euler phi for 0..limit via a multiplicative sieve; phi[0] = 0."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    phi = np.arange(limit + 1, dtype=np.int64)
    phi[0] = 0
    for p in range(2, limit + 1):
        if phi[p] == p:  # p prime
            phi[p::p] -= phi[p::p] // p
    return phi


def totient_summatory(Q: int) -> int:
    """Exact sum of phi(q) for 1 <= q <= Q."""
    if Q < 1:
        raise ValueError("Q must be >= 1")
    if Q * Q > _INT64_MAX:  # sum ~ (3/pi^2) Q^2 must stay exact in int64
        raise OverflowError("totient summatory range exceeds the exact integer width")
    return int(totient_sieve(Q)[1:].sum())


def totient_identity_dyadic(k: int) -> int:
    """The totient-difference count 2 * sum_{2^k <= a < 2^(k+1)} (phi(a) - phi(a//2)).

    Companion to count_sieved_dyadic for n = 2; both scale like
    (9/pi^2) 4^k, but they are distinct finite counts (see tests).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    phi = totient_sieve(2 ** (k + 1))
    a = np.arange(2**k, 2 ** (k + 1))
    return int(2 * (phi[a] - phi[a // 2]).sum())


@dataclass(frozen=True)
class AnglePair:
    """Two coefficient vectors with the angle data of their squared images."""

    first: CoeffVector
    second: CoeffVector
    sin_alpha: float
    det_squares: int


def angle_between(v: CoeffVector, w: CoeffVector) -> AnglePair:
    """Angle between v^2 and w^2 via the full wedge product.

    sin(alpha) = ||v^2 ^ w^2|| / (|v^2| |w^2|); det_squares is the 2x2 minor
    of the squared vectors with the largest absolute value (ties resolved by
    first index pair), which for n = 2 is the lone determinant.
    """
    if v.is_zero() or w.is_zero():
        raise ZeroVectorError("angles need nonzero vectors")
    if v.n != w.n:
        raise ValueError("dimension mismatch")
    vs, ws = v.squared, w.squared
    wedge_sq = 0  # exact ||v^2 ^ w^2||^2
    best = 0
    for i in range(v.n):
        for j in range(i + 1, v.n):
            m = vs[i] * ws[j] - vs[j] * ws[i]
            wedge_sq += m * m
            if abs(m) > abs(best):
                best = m
    norm_v = math.sqrt(sum(x * x for x in vs))
    norm_w = math.sqrt(sum(x * x for x in ws))
    sin_alpha = min(1.0, math.sqrt(wedge_sq) / (norm_v * norm_w))
    return AnglePair(v, w, sin_alpha, best)


class AngleClass(enum.Enum):
    BIG = "Big"
    MODERATELY_SMALL = "ModeratelySmall"
    ULTRA_SMALL = "UltraSmall"


def classify_angle(pair: AnglePair, r: float) -> AngleClass:
    """Partition by angle size relative to a ball of radius r.

    Big iff sin(alpha) >= 1/(r h); UltraSmall iff sin(alpha) < 1/(r^2 h h');
    ModeratelySmall otherwise, with h >= h' the ordered heights.  Big takes
    precedence where the raw thresholds overlap (possible when r h' < 1), so
    the three classes partition all inputs.
    """
    if not (0.0 < r < 1.0):
        raise ValueError("ball radius must lie in (0, 1)")
    h = max(pair.first.height, pair.second.height)
    h2 = min(pair.first.height, pair.second.height)
    if h2 < 1:
        raise ValueError("both vectors must have height >= 1")
    if pair.sin_alpha >= 1.0 / (r * h):
        return AngleClass.BIG
    if pair.sin_alpha < 1.0 / (r * r * h * h2):
        return AngleClass.ULTRA_SMALL
    return AngleClass.MODERATELY_SMALL
