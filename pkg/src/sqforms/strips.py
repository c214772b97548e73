"""Strip geometry: approximating functions, the sets sigma_a(c), admissible
c-windows relative to a ball, and solution search at a point.

A strip is the hyperplane neighbourhood
    sigma_a(c) = {x in [0,1]^n : |a^2 . x - c^2| < psi(h_a)}
with strict inequality; its half-width is measured in linear-form units, so
the Euclidean thickness is 2 psi(h_a)/|a^2|.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from sqforms.lattice import CoeffVector, ZeroVectorError


# ----------------------------------------------------------------------
# approximating functions
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class PowerLaw:
    """psi(h) = h^(-exponent) with exponent > 0."""

    exponent: float

    def __post_init__(self):
        if not self.exponent > 0:
            raise ValueError("power-law exponent must be positive")


@dataclass(frozen=True)
class StepTable:
    """Tabulated psi with right-continuous step interpolation.

    heights must start at 1 and increase strictly; values must be positive
    and non-increasing.  Beyond the last tabulated height the last value
    persists.
    """

    heights: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        heights = tuple(int(h) for h in self.heights)
        values = tuple(float(v) for v in self.values)
        if len(heights) != len(values) or not heights:
            raise ValueError("need matching, non-empty height/value columns")
        if heights[0] != 1:
            raise ValueError("tabulated psi must start at height 1")
        if any(b <= a for a, b in zip(heights, heights[1:])):
            raise ValueError("tabulated heights must increase strictly")
        if any(v <= 0 for v in values):
            raise ValueError("psi must be positive")
        if any(b > a for a, b in zip(values, values[1:])):
            raise ValueError("psi must be non-increasing")
        object.__setattr__(self, "heights", heights)
        object.__setattr__(self, "values", values)


ApproxFunction = PowerLaw | StepTable


def psi_eval(f: ApproxFunction, h: int) -> float:
    """psi(h) for integer h >= 1."""
    if h < 1:
        raise ValueError("psi is defined for heights h >= 1")
    if isinstance(f, PowerLaw):
        return float(h) ** -f.exponent
    return f.values[bisect_right(f.heights, h) - 1]


def psi_values(f: ApproxFunction, h: np.ndarray) -> np.ndarray:
    """Vectorised psi over an integer height array."""
    h = np.asarray(h)
    if (h < 1).any():
        raise ValueError("psi is defined for heights h >= 1")
    if isinstance(f, PowerLaw):
        return h.astype(np.float64) ** -f.exponent
    idx = np.searchsorted(f.heights, h, side="right") - 1
    return np.asarray(f.values, dtype=np.float64)[idx]


def load_table_csv(path) -> StepTable:
    """Load a two-column (h, psi) CSV; a non-numeric first row is a header."""
    heights, values = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                h = int(row[0])
            except ValueError:
                continue  # header line
            heights.append(h)
            values.append(float(row[1]))
    return StepTable(tuple(heights), tuple(values))


def parse_psi_spec(spec: str) -> ApproxFunction:
    """Parse the CLI mini-grammar: 'pow:<v>' or 'table:<path>'."""
    kind, _, arg = spec.partition(":")
    if kind == "pow" and arg:
        return PowerLaw(float(arg))
    if kind == "table" and arg:
        return load_table_csv(arg)
    raise ValueError(f"bad psi spec {spec!r}; expected pow:<v> or table:<path>")


def lower_order(f: ApproxFunction, r_max: int) -> float:
    """Finite-window proxy for the lower order of 1/psi(2^r).

    Returns min over r in [r_max/2, r_max] of -log(psi(2^r)) / (r log 2);
    exact for power laws, where every term equals the exponent.
    """
    if r_max < 4:
        raise ValueError("need r_max >= 4")
    if isinstance(f, PowerLaw):
        return float(f.exponent)
    r_lo = math.ceil(r_max / 2)
    return min(
        -math.log(psi_eval(f, 2**r)) / (r * math.log(2.0))
        for r in range(r_lo, r_max + 1)
    )


# ----------------------------------------------------------------------
# regions
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class UnitCube:
    n: int = 2

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")


@dataclass(frozen=True)
class ShavedCube:
    """The cube [epsilon, 1]^n."""

    epsilon: float = 0.25
    n: int = 2

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")
        if self.n < 1:
            raise ValueError("dimension must be >= 1")


@dataclass(frozen=True)
class Ball:
    """A ball inside the shaved cube [epsilon, 1]^n it is associated with."""

    center: tuple[float, ...]
    radius: float
    epsilon: float = 0.25

    def __post_init__(self):
        center = tuple(float(c) for c in self.center)
        object.__setattr__(self, "center", center)
        if not (0.0 < self.radius < 1.0):
            raise ValueError("ball radius must lie in (0, 1)")
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")
        for c in center:
            if c - self.radius < self.epsilon or c + self.radius > 1.0:
                raise ValueError("ball must lie inside [epsilon, 1]^n")

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        n = self.n
        return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0) * self.radius**n


Region = UnitCube | ShavedCube | Ball


def region_bounds(region: Region) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned bounding box (lo, hi) of the region."""
    if isinstance(region, UnitCube):
        return np.zeros(region.n), np.ones(region.n)
    if isinstance(region, ShavedCube):
        return np.full(region.n, region.epsilon), np.ones(region.n)
    c = np.asarray(region.center)
    return c - region.radius, c + region.radius


# ----------------------------------------------------------------------
# strips
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Strip:
    """sigma_a(c) with half-width in linear-form units."""

    a: CoeffVector
    c: int
    half_width: float

    def __post_init__(self):
        if self.a.is_zero():
            raise ZeroVectorError("strips need a nonzero coefficient vector")
        if self.c < 0:
            raise ValueError("c must be a non-negative integer")
        if not self.half_width > 0:
            raise ValueError("half-width must be positive")

    @property
    def sq_norm(self) -> float:
        """|a^2|, which lies in [h^2, sqrt(n) h^2]."""
        return math.sqrt(sum(s * s for s in self.a.squared))

    @property
    def thickness(self) -> float:
        """Euclidean distance between the bounding hyperplanes."""
        return 2.0 * self.half_width / self.sq_norm


def make_strip(a: CoeffVector, c: int, f: ApproxFunction) -> Strip:
    return Strip(a, c, psi_eval(f, a.height))


def _is_exact_point(x: Sequence) -> bool:
    return all(isinstance(t, (int, Fraction)) for t in x)


def strip_contains(s: Strip, x: Sequence) -> bool:
    """Membership |a^2 . x - c^2| < half_width (strict).

    Points given as ints/Fractions are decided in exact rational arithmetic,
    so membership near the open boundary is never a rounding artefact.
    """
    if len(x) != s.a.n:
        raise ValueError("point dimension mismatch")
    sq = s.a.squared
    if _is_exact_point(x):
        t = sum(si * Fraction(xi) for si, xi in zip(sq, x))
        return abs(t - s.c * s.c) < Fraction(s.half_width)
    t = sum(si * float(xi) for si, xi in zip(sq, x))
    return abs(t - s.c * s.c) < s.half_width


@dataclass(frozen=True)
class CInterval:
    """Real c-interval whose squares the hyperplanes through a ball sweep."""

    c_lo: float
    c_hi: float

    @property
    def length(self) -> float:
        return self.c_hi - self.c_lo

    def integer_candidates(self, slack: int = 2) -> range:
        """Integers c that can give sigma_a(c) meeting the ball, widened by
        `slack` on each side to absorb the strip half-width."""
        lo = max(0, math.ceil(self.c_lo) - slack)
        hi = math.floor(self.c_hi) + slack
        return range(lo, hi + 1)


def admissible_c_interval(a: CoeffVector, ball: Ball) -> CInterval:
    """The interval [sqrt(a^2.x0 - r|a^2|), sqrt(a^2.x0 + r|a^2|)].

    Valid in any dimension: the linear form a^2 . x sweeps exactly
    [a^2.x0 - r|a^2|, a^2.x0 + r|a^2|] over the ball.
    """
    if a.is_zero():
        raise ZeroVectorError("admissible intervals need a nonzero vector")
    if a.n != ball.n:
        raise ValueError("dimension mismatch")
    sq = a.squared
    t0 = sum(s * c for s, c in zip(sq, ball.center))
    norm = math.sqrt(sum(s * s for s in sq))
    lo2 = t0 - ball.radius * norm
    if lo2 < 0:
        raise ValueError("degenerate ball: a^2.x0 - r|a^2| < 0 (ball outside the shaved cube?)")
    return CInterval(math.sqrt(lo2), math.sqrt(t0 + ball.radius * norm))


def solutions_at_point(
    x: Sequence,
    f: ApproxFunction,
    h_max: int,
) -> list[tuple[CoeffVector, int]]:
    """All (a, c) with h_a <= h_max, a nonzero, c >= 0, |a^2.x - c^2| < psi(h_a).

    The c search is confined to the window around sqrt(a^2 . x) that
    |c^2 - t| < psi allows (at most 3 candidates when psi <= 1).  Exact
    arithmetic is used when x has int/Fraction coordinates.
    """
    if h_max < 1:
        raise ValueError("h_max must be >= 1")
    n = len(x)
    if n < 2:
        raise ValueError("points need at least 2 coordinates")
    exact = _is_exact_point(x)
    xs = [Fraction(t) for t in x] if exact else [float(t) for t in x]
    out = []
    for coords in product(range(h_max + 1), repeat=n):
        h = max(coords)
        if h < 1:
            continue
        psi = psi_eval(f, h)
        t = sum(c * c * xi for c, xi in zip(coords, xs))
        c_min = max(0, math.isqrt(int(max(0, t - psi))) - 1)
        c_max = math.isqrt(int(t + psi)) + 1
        hits = []
        for c in range(c_min, c_max + 1):
            diff = abs(t - c * c)
            ok = diff < Fraction(psi) if exact else diff < psi
            if ok:
                hits.append(c)
        if hits:
            v = CoeffVector(coords)
            out.extend((v, c) for c in hits)
    out.sort(key=lambda vc: (vc[0].height, vc[0].coords, vc[1]))
    return out
