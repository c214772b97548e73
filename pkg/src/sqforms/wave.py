"""Fourier treatment of the periodic forced wave equation u_tt - Lap(u) = f.

Modes are exp(2 pi i [sum_i a_i x_i / alpha_i + b t / beta]) indexed by
integer tuples (a, b).  The operator acts diagonally: each coefficient is
multiplied by (4 pi^2 / beta^2) D(a, b) with the small denominator

    D(a, b) = sum_i a_i^2 beta^2/alpha_i^2 - b^2 = sum_i a_i^2 delta_i - b^2.

Period ratios delta_i may be given as exact ``Fraction``s, in which case D is
evaluated in exact rational arithmetic and resonances (D = 0) are decided
exactly rather than to rounding.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable

import numpy as np

_TWO_PI_SQ = 4.0 * math.pi**2


class ResonantModeError(ValueError):
    def __init__(self, a, b):
        super().__init__(f"resonant mode (a={a}, b={b}): zero denominator")
        self.mode = (a, b)


class NearResonanceError(ValueError):
    def __init__(self, a, b, d):
        super().__init__(f"near-resonant mode (a={a}, b={b}): |D|={abs(d)} below threshold")
        self.mode = (a, b)
        self.denominator = d


class NonZeroMeanSourceError(ValueError):
    def __init__(self):
        super().__init__("source has a nonzero mean mode; the operator cannot invert it")


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


@dataclass(frozen=True)
class WaveParams:
    """Spatial periods alpha_i and temporal period beta.

    Either `alphas` or `deltas` is given.  `deltas` always reflects the
    current periods: it is derived on access when `alphas` is stored, and is
    the stored ground truth when constructed via `from_deltas` (alphas are
    then the implied beta/sqrt(delta_i) as floats).
    """

    alphas: tuple | None
    beta: object = 1
    deltas_given: tuple | None = None

    def __post_init__(self):
        if (self.alphas is None) == (self.deltas_given is None):
            raise ValueError("give exactly one of alphas or deltas")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.alphas is not None:
            alphas = tuple(self.alphas)
            if len(alphas) < 1 or any(not (a > 0) for a in alphas):
                raise ValueError("alphas must be positive")
            object.__setattr__(self, "alphas", alphas)
        else:
            deltas = tuple(self.deltas_given)
            if len(deltas) < 1 or any(not (d > 0) for d in deltas):
                raise ValueError("deltas must be positive")
            object.__setattr__(self, "deltas_given", deltas)
            object.__setattr__(
                self,
                "alphas",
                tuple(float(self.beta) / math.sqrt(float(d)) for d in deltas),
            )

    @classmethod
    def from_deltas(cls, deltas: Iterable, beta=1) -> "WaveParams":
        return cls(alphas=None, beta=beta, deltas_given=tuple(deltas))

    @property
    def n(self) -> int:
        return len(self.alphas)

    @property
    def deltas(self) -> tuple:
        """delta_i = beta^2 / alpha_i^2, exact when the inputs are exact."""
        if self.deltas_given is not None:
            return self.deltas_given
        b2 = self.beta * self.beta
        out = []
        for a in self.alphas:
            if _is_exact(a) and _is_exact(self.beta):
                out.append(Fraction(b2, a * a))
            else:
                out.append(float(b2) / float(a) ** 2)
        return tuple(out)

    @property
    def exact(self) -> bool:
        return all(_is_exact(d) for d in self.deltas)


def denominator(params: WaveParams, a: Iterable[int], b: int):
    """D = sum_i a_i^2 delta_i - b^2; a Fraction when all deltas are exact."""
    a = tuple(int(ai) for ai in a)
    if len(a) != params.n:
        raise ValueError("mode dimension mismatch")
    d = sum(ai * ai * di for ai, di in zip(a, params.deltas)) - b * b
    return d


class FourierField:
    """Sparse map from mode (a, b) in Z^(n+1) to a complex coefficient."""

    def __init__(self, modes: dict | None = None):
        self.modes: dict[tuple[tuple[int, ...], int], complex] = {}
        if modes:
            for (a, b), coeff in modes.items():
                self.modes[(tuple(int(x) for x in a), int(b))] = complex(coeff)

    @classmethod
    def single_mode(cls, a, b, coeff) -> "FourierField":
        return cls({(tuple(a), b): coeff})

    def __len__(self):
        return len(self.modes)

    def get(self, a, b) -> complex:
        return self.modes.get((tuple(a), int(b)), 0j)

    def sorted_modes(self):
        """Modes ordered by (height of a, a, b) for deterministic output."""
        return sorted(self.modes.items(), key=lambda kv: (max((abs(x) for x in kv[0][0]), default=0), kv[0][0], kv[0][1]))

    @property
    def band_limit(self) -> int:
        if not self.modes:
            return 0
        return max(max((abs(x) for x in a), default=0) for a, _ in self.modes)

    def __add__(self, other: "FourierField") -> "FourierField":
        out = dict(self.modes)
        for k, v in other.modes.items():
            out[k] = out.get(k, 0j) + v
        return FourierField(out)

    def scaled(self, factor) -> "FourierField":
        return FourierField({k: v * factor for k, v in self.modes.items()})

    def is_hermitian(self) -> bool:
        """True iff the coefficient at (-a, -b) is exactly the conjugate."""
        for (a, b), coeff in self.modes.items():
            neg = tuple(-x for x in a)
            if self.modes.get((neg, -b)) != coeff.conjugate():
                return False
        return True

    def to_jsonl(self, fh):
        for (a, b), coeff in self.sorted_modes():
            fh.write(
                json.dumps(
                    {"a": list(a), "b": b, "re": coeff.real, "im": coeff.imag}
                )
                + "\n"
            )

    @classmethod
    def from_jsonl(cls, fh) -> "FourierField":
        modes = {}
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            modes[(tuple(rec["a"]), rec["b"])] = complex(rec["re"], rec["im"])
        return cls(modes)


def apply_operator(u: FourierField, params: WaveParams) -> FourierField:
    """Forward operator u_tt - Lap(u): multiply each mode by (4 pi^2/beta^2) D."""
    pref = _TWO_PI_SQ / float(params.beta) ** 2
    out = {}
    for (a, b), coeff in u.modes.items():
        out[(a, b)] = coeff * (pref * float(denominator(params, a, b)))
    return FourierField(out)


def solve_wave(
    f: FourierField,
    params: WaveParams,
    min_denominator: float = 1e-8,
) -> FourierField:
    """Invert the operator: u_(a,b) = (beta^2 / 4 pi^2) f_(a,b) / D(a, b).

    The mean mode is obstructed: f at (0, 0) must vanish and u's mean is
    fixed to zero (the solution is unique only up to constants).  Modes with
    D = 0 raise ResonantModeError, 0 < |D| < min_denominator raise
    NearResonanceError.
    """
    pref = float(params.beta) ** 2 / _TWO_PI_SQ
    out = {}
    for (a, b), coeff in f.modes.items():
        if coeff == 0:
            continue
        if all(x == 0 for x in a) and b == 0:
            raise NonZeroMeanSourceError()
        d = denominator(params, a, b)
        if d == 0:
            raise ResonantModeError(a, b)
        if abs(float(d)) < min_denominator:
            raise NearResonanceError(a, b, d)
        out[(a, b)] = coeff * pref / float(d)
    return FourierField(out)


def evaluate_field(field: FourierField, samples_per_axis: int, n: int) -> np.ndarray:
    """Sample the field on the uniform periodic grid (one period per axis).

    Sampling at index k of M points puts x_i = alpha_i k / M, so the phases
    reduce to integer frequencies over the index grid and the periods drop
    out of the evaluation entirely.
    """
    M = samples_per_axis
    shape = (M,) * (n + 1)
    vals = np.zeros(shape, dtype=np.complex128)
    base = 2j * np.pi * np.arange(M) / M
    for (a, b), coeff in field.modes.items():
        phase = np.zeros(shape, dtype=np.complex128)
        for axis, freq in enumerate((*a, b)):
            sl = [None] * (n + 1)
            sl[axis] = slice(None)
            phase += (base * freq)[tuple(sl)]
        vals += coeff * np.exp(phase)
    return vals


def residual_check(
    u: FourierField,
    f: FourierField,
    params: WaveParams,
    samples_per_axis: int = 16,
) -> float:
    """Max |u_tt - Lap(u) - f| over the sample grid.

    Derivatives are applied analytically per mode straight from the periods
    (independent of the solver's denominator bookkeeping), then summed as
    trigonometric series at the sample points.
    """
    n = params.n
    alphas = [float(a) for a in params.alphas]
    beta = float(params.beta)
    resid = {}
    for (a, b), coeff in u.modes.items():
        factor = _TWO_PI_SQ * (
            sum((ai / al) ** 2 for ai, al in zip(a, alphas)) - (b / beta) ** 2
        )
        resid[(a, b)] = coeff * factor
    for (a, b), coeff in f.modes.items():
        resid[(a, b)] = resid.get((a, b), 0j) - coeff
    vals = evaluate_field(FourierField(resid), samples_per_axis, n)
    return float(np.abs(vals).max())


# ----------------------------------------------------------------------
# resonance scanning
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ResonanceScanConfig:
    """Threshold |D| < C h^(-w) with w > 1, scanned up to height h_max."""

    C: float
    w: float
    h_max: int

    def __post_init__(self):
        if not self.w > 1:
            raise ValueError("w must exceed 1")
        if self.C < 0:
            raise ValueError("C must be non-negative")
        if self.h_max < 1:
            raise ValueError("h_max must be >= 1")


@dataclass(frozen=True)
class ScanHit:
    a: tuple[int, ...]
    b: int
    denominator: object  # Fraction in exact mode, float otherwise
    margin: float


def _scan_b_max(h: int, deltas) -> int:
    dmax = max(float(d) for d in deltas)
    return int(2 * h * max(1.0, math.sqrt(dmax)))


def resonance_scan(params: WaveParams, cfg: ResonanceScanConfig) -> list[ScanHit]:
    """All canonical modes with 0 < h_a <= h_max and |D| < C h_a^(-w).

    Enumerates a in Z>=0^n (D is even in every index, so signed modes are
    redundant) and 0 <= b <= 2 h_a max(1, sqrt(max delta)), a window wide
    enough that no violator of the threshold escapes for thresholds <= 1.
    With rational deltas the scan runs over a common denominator in exact
    integer arithmetic, so resonances D = 0 are decided exactly.  Hits are
    sorted by decreasing margin C h^(-w) - |D|, ties by (h, a, b).
    """
    deltas = params.deltas
    n = params.n
    exact = params.exact
    if exact:
        fracs = [Fraction(d) for d in deltas]
        L = math.lcm(*(fr.denominator for fr in fracs))
        nums = [fr.numerator * (L // fr.denominator) for fr in fracs]
    hits = []
    for a in product(range(cfg.h_max + 1), repeat=n):
        h = max(a)
        if h < 1:
            continue
        threshold = cfg.C * float(h) ** -cfg.w
        if threshold <= 0:
            continue
        b_max = _scan_b_max(h, deltas)
        if exact:
            t_num = sum(ai * ai * ni for ai, ni in zip(a, nums))
            cut = threshold * L
            for b in range(b_max + 1):
                d_num = t_num - b * b * L
                if d_num < -cut:
                    break  # decreasing in b, no further hits
                if abs(d_num) < cut:
                    hits.append(
                        ScanHit(a, b, Fraction(d_num, L), threshold - abs(d_num) / L)
                    )
        else:
            t = sum(ai * ai * float(di) for ai, di in zip(a, deltas))
            for b in range(b_max + 1):
                d = t - b * b
                if d < -threshold:
                    break
                if abs(d) < threshold:
                    hits.append(ScanHit(a, b, d, threshold - abs(d)))
    hits.sort(key=lambda s: (-s.margin, max(s.a), s.a, s.b))
    return hits
