"""Command-line front end: each subcommand wraps exactly one library call
and serialises its result as CSV or JSON.

Exit codes: 0 success, 2 usage/validation, 3 resonance abort (wave-solve),
4 estimator warning under --strict.  Output is deterministic for a fixed
seed; every artifact carries the fully resolved run configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from sqforms import _kernels, measure, strips, wave
from sqforms.lattice import DEFAULT_SIEVE, CoeffVector

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESONANCE = 3
EXIT_WARNING = 4


# ----------------------------------------------------------------------
# serialisation helpers
# ----------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _config_dict(args) -> dict:
    skip = {"func"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, Fraction):
            v = str(v)
        out[k] = v
    return out


def _write_csv(fh, config: dict, header: list[str], rows, comments=()):
    fh.write("# config: " + json.dumps(config, sort_keys=True, default=str) + "\n")
    for c in comments:
        fh.write(f"# {c}\n")
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(_fmt(x) for x in row) + "\n")


def _write_json(fh, config: dict, payload: dict):
    doc = {"schema_version": SCHEMA_VERSION, "config": config}
    doc.update(payload)
    fh.write(json.dumps(doc, sort_keys=True, default=str, indent=2) + "\n")


class _Out:
    def __init__(self, path):
        self.path = path

    def __enter__(self):
        if self.path in (None, "-"):
            self._fh, self._close = sys.stdout, False
        else:
            self._fh, self._close = open(self.path, "w"), True
        return self._fh

    def __exit__(self, *exc):
        if self._close:
            self._fh.close()


# ----------------------------------------------------------------------
# argument conversions (ValueError -> argparse usage error, exit 2)
# ----------------------------------------------------------------------

def _floats_csv(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(","))


def _ints_csv(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(","))


def _number(text):
    """Float, or exact Fraction when written as p/q."""
    if isinstance(text, dict):
        return Fraction(text["num"], text["den"])
    if isinstance(text, str) and "/" in text:
        num, den = text.split("/")
        return Fraction(int(num), int(den))
    if isinstance(text, (int, Fraction)):
        return text
    f = float(text)
    return int(f) if f.is_integer() else f


def _numbers_csv(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(_number(t) for t in text)
    return tuple(_number(t) for t in text.split(","))


def _window(text: str) -> tuple[int, int]:
    lo, hi = text.split(":")
    return int(lo), int(hi)


def _resolution_ladder(text: str) -> list[int]:
    if ":" in text:
        lo, hi = (int(t) for t in text.split(":"))
        out = []
        r = lo
        while r <= hi:
            out.append(r)
            r *= 2
        if not out or out[-1] != hi:
            raise ValueError("ladder endpoints must differ by a power of two")
        return out
    return [int(t) for t in text.split(",")]


def _apply_config_file(args, parser):
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data = json.load(fh)
        for k, v in data.items():
            key = k.replace("-", "_")
            if not hasattr(args, key):
                parser.error(f"unknown config key {k!r}")
            setattr(args, key, v)


def _psi(args, parser):
    try:
        return strips.parse_psi_spec(args.psi)
    except (ValueError, OSError) as e:
        parser.error(str(e))


def _grid_args(sub, resolution_default=1024):
    sub.add_argument("--center", type=_floats_csv, default=(0.5, 0.5))
    sub.add_argument("--r", type=float, default=0.2)
    sub.add_argument("--eps", type=float, default=0.25)
    sub.add_argument("--resolution", type=int, default=resolution_default)
    sub.add_argument("--subsample", type=int, default=0, help="samples per cell (0 = cell centers)")


def _common_args(sub):
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", default="-")
    sub.add_argument("--config", default=None, help="JSON file overriding flags")
    sub.add_argument("--strict", action="store_true")
    sub.add_argument("--threads", type=int, default=0, help="numba threads (0 = default)")


def _set_threads(args):
    if args.threads and _kernels.NUMBA_ENABLED:
        import numba

        numba.set_num_threads(args.threads)


def _ball_and_grid(args, parser):
    try:
        ball = strips.Ball(args.center, args.r, args.eps)
        rule = measure.Subsample(args.subsample) if args.subsample else measure.CellCenter()
        grid = measure.GridSpec(args.resolution, ball, rule)
    except ValueError as e:
        parser.error(str(e))
    return ball, grid


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def cmd_solutions(args, parser) -> int:
    if len(args.x) < 2:
        parser.error("--x needs at least 2 coordinates")
    f = _psi(args, parser)
    if args.hmax < 1:
        parser.error("--hmax must be >= 1")
    sols = strips.solutions_at_point(args.x, f, args.hmax)
    n = len(args.x)
    header = [f"a{i+1}" for i in range(n)] + ["c", "err"]
    rows = []
    for v, c in sols:
        t = sum(s * xi for s, xi in zip(v.squared, args.x))
        rows.append(list(v.coords) + [c, abs(t - c * c)])
    cfg = _config_dict(args)
    with _Out(args.out) as fh:
        if args.format == "json":
            _write_json(fh, cfg, {"solutions": [
                {"a": list(v.coords), "c": c} for v, c in sols]})
        else:
            _write_csv(fh, cfg, header, rows)
    return EXIT_OK


def cmd_dichotomy(args, parser) -> int:
    f = _psi(args, parser)
    if args.s is not None and not (args.n - 1 < args.s < args.n):
        parser.error("--s must lie strictly between n-1 and n")
    if args.s is not None:
        report = measure.hausdorff_sum(f, args.n, args.s, args.H)
    else:
        report = measure.khintchine_sum(f, args.n, args.H)
    cfg = _config_dict(args)
    with _Out(args.out) as fh:
        if args.format == "json":
            _write_json(fh, cfg, {
                "verdict_hint": report.verdict_hint,
                "partial_sums": [[H, v] for H, v in report.partial_sums],
            })
        else:
            _write_csv(
                fh, cfg, ["H", "sum"], report.partial_sums,
                comments=[f"verdict: {report.verdict_hint}"],
            )
    return EXIT_OK


def cmd_measure(args, parser) -> int:
    f = _psi(args, parser)
    ball, grid = _ball_and_grid(args, parser)
    try:
        a = CoeffVector(args.a)
        res = measure.union_measure_over_c(a, f, ball, grid, seed=args.seed)
    except ValueError as e:
        parser.error(str(e))
    cfg = _config_dict(args)
    payload = {
        "estimate": res.estimate.value,
        "lower_bound": res.lower_bound,
        "upper_bound": res.upper_bound,
        "within_bounds": res.within_bounds,
        "coarse_warning": res.estimate.coarse,
    }
    with _Out(args.out) as fh:
        if args.format == "csv":
            _write_csv(fh, cfg, list(payload), [list(payload.values())])
        else:
            _write_json(fh, cfg, payload)
    if args.strict and res.estimate.coarse:
        return EXIT_WARNING
    return EXIT_OK


def cmd_bc(args, parser) -> int:
    f = _psi(args, parser)
    ball, grid = _ball_and_grid(args, parser)
    if args.H < 2:
        parser.error("--H must be >= 2")
    try:
        stats = measure.bc_statistics(args.H, f, ball, grid, seed=args.seed)
    except ValueError as e:
        parser.error(str(e))
    cfg = _config_dict(args)
    payload = {
        "S1": stats.S1,
        "S2": stats.S2,
        "ratio": stats.ratio,
        "ball_volume": ball.volume,
        "n_vectors": stats.n_vectors,
        "no_data": stats.no_data,
        "coarse_warning": stats.coarse,
    }
    with _Out(args.out) as fh:
        if args.format == "csv":
            _write_csv(fh, cfg, list(payload), [list(payload.values())])
        else:
            _write_json(fh, cfg, payload)
    if args.strict and stats.coarse:
        return EXIT_WARNING
    return EXIT_OK


def cmd_boxdim(args, parser) -> int:
    f = _psi(args, parser)
    try:
        result = measure.box_counting_dimension(
            f, args.n, args.window, args.res,
            sieve=DEFAULT_SIEVE if args.sieved else None,
        )
    except ValueError as e:
        parser.error(str(e))
    cfg = _config_dict(args)
    payload = {
        "slope": result.slope,
        "intercept": result.intercept,
        "resolutions": list(result.resolutions),
        "counts": list(result.counts),
        "used_in_fit": list(result.used),
        "residuals": result.residuals,
        "n_vectors": result.n_vectors,
        "bias_uncontrolled": result.bias_uncontrolled,
    }
    with _Out(args.out) as fh:
        if args.format == "csv":
            _write_csv(fh, cfg, ["resolution", "count"],
                       zip(result.resolutions, result.counts),
                       comments=[f"slope: {_fmt(result.slope)}"])
        else:
            _write_json(fh, cfg, payload)
    return EXIT_OK


def _wave_params(args, parser) -> wave.WaveParams:
    if args.deltas is not None and args.alphas is not None:
        parser.error("give either --alphas or --deltas, not both")
    try:
        beta = _number(args.beta)
        if args.deltas is not None:
            return wave.WaveParams.from_deltas(_numbers_csv(args.deltas), beta=beta)
        if args.alphas is not None:
            return wave.WaveParams(alphas=_numbers_csv(args.alphas), beta=beta)
    except (ValueError, KeyError) as e:
        parser.error(str(e))
    parser.error("give --alphas or --deltas")


def cmd_wave_solve(args, parser) -> int:
    params = _wave_params(args, parser)
    try:
        with open(args.field) as fh:
            f = wave.FourierField.from_jsonl(fh)
    except (OSError, ValueError, KeyError) as e:
        parser.error(f"bad field file: {e}")
    try:
        u = wave.solve_wave(f, params, min_denominator=args.min_denom)
    except (wave.ResonantModeError, wave.NearResonanceError) as e:
        print(f"resonance abort: {e}", file=sys.stderr)
        return EXIT_RESONANCE
    except wave.NonZeroMeanSourceError as e:
        parser.error(str(e))
    with _Out(args.out) as fh:
        u.to_jsonl(fh)
    return EXIT_OK


def cmd_scan(args, parser) -> int:
    params = _wave_params(args, parser)
    try:
        cfg_scan = wave.ResonanceScanConfig(args.C, args.w, args.hmax)
    except ValueError as e:
        parser.error(str(e))
    hits = wave.resonance_scan(params, cfg_scan)
    cfg = _config_dict(args)
    n = params.n
    header = [f"a{i+1}" for i in range(n)] + ["b", "D", "margin"]
    rows = [list(h.a) + [h.b, float(h.denominator), h.margin] for h in hits]
    with _Out(args.out) as fh:
        if args.format == "json":
            _write_json(fh, cfg, {"hits": [
                {"a": list(h.a), "b": h.b, "D": float(h.denominator),
                 "margin": h.margin} for h in hits]})
        else:
            _write_csv(fh, cfg, header, rows)
    return EXIT_OK


# ----------------------------------------------------------------------
# parser assembly
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sqforms",
        description="Square-linear-form strips, measures, dimension and wave resonances",
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solutions", help="strips containing a given point")
    s.add_argument("--x", type=_floats_csv, required=True)
    s.add_argument("--psi", required=True)
    s.add_argument("--hmax", type=int, required=True)
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    _common_args(s)
    s.set_defaults(func=cmd_solutions)

    s = sub.add_parser("dichotomy", help="convergence/divergence partial sums")
    s.add_argument("--psi", required=True)
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--H", type=int, default=2**16)
    s.add_argument("--s", type=float, default=None)
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    _common_args(s)
    s.set_defaults(func=cmd_dichotomy)

    s = sub.add_parser("measure", help="union-over-c strip measure on a ball")
    s.add_argument("--a", type=_ints_csv, required=True)
    s.add_argument("--psi", required=True)
    s.add_argument("--format", choices=["csv", "json"], default="json")
    _grid_args(s)
    _common_args(s)
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("bc", help="second-moment statistics S1, S2 on a ball")
    s.add_argument("--H", type=int, required=True)
    s.add_argument("--psi", required=True)
    s.add_argument("--format", choices=["csv", "json"], default="json")
    _grid_args(s, resolution_default=512)
    _common_args(s)
    s.set_defaults(func=cmd_bc)

    s = sub.add_parser("boxdim", help="box-counting dimension of a height window")
    s.add_argument("--psi", required=True)
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--window", type=_window, required=True)
    s.add_argument("--res", type=_resolution_ladder, required=True)
    s.add_argument("--sieved", action="store_true")
    s.add_argument("--format", choices=["csv", "json"], default="json")
    _common_args(s)
    s.set_defaults(func=cmd_boxdim)

    s = sub.add_parser("wave-solve", help="solve u_tt - Lap(u) = f from a JSONL field")
    s.add_argument("--field", required=True)
    s.add_argument("--alphas", default=None)
    s.add_argument("--deltas", default=None)
    s.add_argument("--beta", default="1")
    s.add_argument("--min-denom", dest="min_denom", type=float, default=1e-8)
    _common_args(s)
    s.set_defaults(func=cmd_wave_solve)

    s = sub.add_parser("scan", help="small-denominator resonance scan")
    s.add_argument("--deltas", default=None)
    s.add_argument("--alphas", default=None)
    s.add_argument("--beta", default="1")
    s.add_argument("--hmax", type=int, required=True)
    s.add_argument("--C", type=float, default=1.0)
    s.add_argument("--w", type=float, default=2.0)
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    _common_args(s)
    s.set_defaults(func=cmd_scan)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config_file(args, parser)
    _set_threads(args)
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
