"""Command line entry point: ``ebthresh {thresh,denoise,simulate}``."""

import argparse
import json
import sys
from typing import List, Optional

import numpy as np

from . import bench
from .core import Rule, ebthresh_sequence
from .denoise import BASELINES, DenoiseConfig, SdPolicy, Transform, denoise
from .priors import make_prior
from .wavelets import DegenerateNoiseError, get_filter

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class DataError(ValueError):
    pass


class UsageError(ValueError):
    pass


def read_values(path: str) -> np.ndarray:
    """One decimal real per line; blank lines are ignored."""
    vals = []
    stream = sys.stdin if path == "-" else open(path)
    try:
        for lineno, line in enumerate(stream, 1):
            s = line.strip()
            if not s:
                continue
            try:
                vals.append(float(s))
            except ValueError:
                raise DataError(f"line {lineno}: not a number: {s!r}") from None
    finally:
        if stream is not sys.stdin:
            stream.close()
    x = np.array(vals, dtype=float)
    if x.size == 0:
        raise DataError("no data")
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite entries in data")
    return x


def write_values(path: str, x) -> None:
    text = "".join(f"{float(v)!r}\n" for v in np.asarray(x, dtype=float) + 0.0)
    _write_text(path, text)


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _positive(s):
    v = float(s)
    if not (np.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be positive, got {s}")
    return v


def _nonneg(s):
    v = float(s)
    if not (np.isfinite(v) and v >= 0):
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {s}")
    return v


def _add_prior_args(p):
    p.add_argument("--prior", choices=["laplace", "cauchy", "gaussian"], default="laplace")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--scale", type=_positive, help="Laplace a or Gaussian tau")
    g.add_argument("--estimate-scale", action="store_true")
    p.add_argument("--rule", choices=[r.value for r in Rule], default="median")
    p.add_argument("--no-cap", action="store_true", help="do not bound the threshold by sqrt(2 log n)")
    p.add_argument("--mod-a", type=_nonneg, default=0.0, metavar="A",
                   help="threshold inflation exponent for derivative estimation")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ebthresh", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("thresh", help="empirical Bayes estimate of a sparse sequence")
    _add_prior_args(t)
    g = t.add_mutually_exclusive_group()
    g.add_argument("--sd", type=_positive, default=None)
    g.add_argument("--estimate-sd", action="store_true")
    t.add_argument("--input", required=True)
    t.add_argument("--output", required=True)

    d = sub.add_parser("denoise", help="wavelet denoising of a power-of-two length signal")
    d.add_argument("--wavelet", default="sym8")
    d.add_argument("--ti", action="store_true", help="translation-invariant transform")
    d.add_argument("--coarsest", type=int, default=4, metavar="L")
    _add_prior_args(d)
    d.add_argument("--sd-policy", choices=[s.value for s in SdPolicy], default="global")
    d.add_argument("--baseline", choices=sorted(BASELINES))
    d.add_argument("--q", type=float, default=0.05)
    d.add_argument("--input", required=True)
    d.add_argument("--output", required=True)
    d.add_argument("--report", metavar="FILE.json")

    s = sub.add_parser("simulate", help="simulation study on the standard test signals")
    s.add_argument("--signals", default=",".join(bench.signals.SIGNAL_NAMES))
    s.add_argument("--n", type=int, default=1024)
    s.add_argument("--noise", choices=sorted(bench.NOISE_RATIOS), default="high")
    s.add_argument("--reps", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--methods", default="ti:laplace-median")
    s.add_argument("--wavelet", default="sym8")
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--output", required=True)
    return ap


def _prior(args):
    try:
        return make_prior(args.prior, args.scale)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _thresh(args) -> None:
    prior = _prior(args)
    x = read_values(args.input)
    sd = "estimate" if args.estimate_sd else (1.0 if args.sd is None else args.sd)
    try:
        res = ebthresh_sequence(x, prior, args.rule, args.estimate_scale, sd,
                                cap=not args.no_cap, A=args.mod_a)
    except DegenerateNoiseError:
        raise
    except ValueError as e:
        if "scale to estimate" in str(e):
            raise UsageError(str(e)) from None
        raise DataError(str(e)) from None
    write_values(args.output, res.estimates)


def _denoise(args) -> None:
    try:
        cfg = DenoiseConfig(
            prior=_prior(args), rule=args.rule,
            estimate_scale=args.estimate_scale,
            transform=Transform.TRANSLATION_INVARIANT if args.ti else Transform.DECIMATED,
            wavelet=args.wavelet, coarsest_level=args.coarsest, sd_policy=args.sd_policy,
            A=args.mod_a, cap=not args.no_cap, baseline=args.baseline, q=args.q,
        )
        get_filter(cfg.wavelet)
    except ValueError as e:
        raise UsageError(str(e)) from None
    x = read_values(args.input)
    try:
        res = denoise(x, cfg)
    except DegenerateNoiseError:
        raise
    except ValueError as e:
        raise DataError(str(e)) from None
    write_values(args.output, res.estimate)
    if args.report:
        levels = []
        for lf in res.fits:
            row = {"level": lf.level, "n": lf.n, "sigma": lf.sigma,
                   "threshold": float(lf.threshold_used)}
            if lf.fit is not None:
                row.update(weight=float(lf.weight_used), w_hat=lf.fit.w_hat,
                           scale=lf.fit.a_hat, hit_lower_bound=lf.fit.hit_lower_bound)
            levels.append(row)
        _write_text(args.report, json.dumps({"levels": levels}, indent=2) + "\n")


def _simulate(args) -> None:
    try:
        spec = bench.SimulationSpec(
            signals=[s.strip() for s in args.signals.split(",") if s.strip()],
            n=args.n, noise=args.noise, reps=args.reps, seed=args.seed,
            methods=[m.strip() for m in args.methods.split(",") if m.strip()],
            wavelet=args.wavelet,
        )
        get_filter(spec.wavelet)
        for m in spec.methods:
            bench.Method.parse(m, spec.wavelet, spec.coarsest)
    except ValueError as e:
        raise UsageError(str(e)) from None
    rep = bench.run_simulation(spec, jobs=args.jobs)
    _write_text(args.output, rep.to_csv() if args.format == "csv" else rep.to_json())


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    handler = {"thresh": _thresh, "denoise": _denoise, "simulate": _simulate}[args.command]
    try:
        handler(args)
    except UsageError as e:
        ap.print_usage(sys.stderr)
        print(f"ebthresh: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateNoiseError as e:
        print(f"ebthresh: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError) as e:
        print(f"ebthresh: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
