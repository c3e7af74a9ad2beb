"""Command-line interface.

Subcommands:

* ``blf``     fast bilateral / joint-bilateral filtering
* ``nlm``     fast PCA-NLM denoising (box spatial kernel, patch-PCA guide)
* ``oracle``  brute-force reference filtering
* ``compare`` PSNR / SSIM / MSE between two images, as a CSV record
* ``bench``   sweep m0 / strategy / window radius against the oracle
* ``diag``    Nystrom kernel-error diagnostics on small inputs

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numeric failure.
Identical invocations (same ``--seed``) produce byte-identical output
images and reports; per-stage wall-clock timings go to stderr and are only
embedded in reports when ``--timings`` is passed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .filters import (
    FilterParams,
    FilterReport,
    brute_force_filter,
    build_guide,
    fast_filter,
)
from .image import Image, ImageFormatError, extract_range_list, load_image, save_image
from .metrics import mse as metric_mse
from .metrics import psnr as metric_psnr
from .metrics import ssim as metric_ssim
from .nystrom import (
    KERNEL_ERROR_MAX_POINTS,
    DegenerateKernelError,
    RangeKernel,
    fit,
    kernel_error,
)
from .spatial import SpatialKernel

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERIC = 3

TIMING_STAGES = (
    "clustering",
    "eigendecomposition",
    "extrapolation",
    "convolutions",
    "normalization",
    "total",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A002 - argparse signature
        raise UsageError(message)


def _add_common(parser: argparse.ArgumentParser, default_m0: int) -> None:
    parser.add_argument("--m0", type=int, default=default_m0,
                        help=f"number of landmarks (default {default_m0})")
    parser.add_argument("--seed", type=int, default=0,
                        help="RNG seed for landmark selection (default 0)")
    parser.add_argument("--strategy", choices=("kmeans", "uniform"), default="kmeans",
                        help="landmark selection strategy (default kmeans)")
    parser.add_argument("--eps-drop", type=float, default=1e-8,
                        help="relative eigenvalue drop threshold (default 1e-8)")
    parser.add_argument("--max-iter", type=int, default=50,
                        help="k-means iteration cap (default 50)")
    parser.add_argument("--range-max", type=float, default=None,
                        help="dynamic range override (cubes default to 255)")
    parser.add_argument("--report", type=Path, default=None,
                        help="write a machine-readable report (.csv or .json)")
    parser.add_argument("--timings", action="store_true",
                        help="include wall-clock timings in --report output")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker thread cap (output does not depend on it)")


def build_parser() -> _Parser:
    parser = _Parser(prog="nysfilter", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    blf = sub.add_parser("blf", help="fast bilateral / joint-bilateral filter")
    blf.add_argument("input", type=Path)
    blf.add_argument("output", type=Path)
    blf.add_argument("--sigma", type=float, default=5.0,
                     help="spatial Gaussian scale (default 5, window radius 3*sigma)")
    blf.add_argument("--theta", type=float, default=50.0,
                     help="range Gaussian scale (default 50)")
    blf.add_argument("--guide", type=Path, default=None,
                     help="external guide image (joint bilateral mode)")
    blf.add_argument("--spatial", choices=("recursive", "fir"), default="recursive",
                     help="Gaussian convolution backend (default recursive)")
    _add_common(blf, default_m0=15)
    blf.set_defaults(func=_cmd_blf)

    nlm = sub.add_parser("nlm", help="fast PCA-NLM denoising")
    nlm.add_argument("input", type=Path)
    nlm.add_argument("output", type=Path)
    nlm.add_argument("--noise", type=float, default=None,
                     help="noise level; sets theta = 3 * noise")
    nlm.add_argument("--theta", type=float, default=None,
                     help="range Gaussian scale (overrides --noise)")
    nlm.add_argument("--S", type=int, default=10, dest="S",
                     help="box window radius (default 10)")
    nlm.add_argument("--r", type=int, default=3, dest="r",
                     help="patch radius (default 3)")
    nlm.add_argument("--pca-dim", type=int, default=25,
                     help="guide dimension after PCA (default 25)")
    _add_common(nlm, default_m0=31)
    nlm.set_defaults(func=_cmd_nlm)

    oracle = sub.add_parser("oracle", help="brute-force reference filter")
    oracle.add_argument("input", type=Path)
    oracle.add_argument("output", type=Path)
    oracle.add_argument("--mode", choices=("bilateral", "nlm"), default="bilateral")
    oracle.add_argument("--sigma", type=float, default=5.0)
    oracle.add_argument("--theta", type=float, default=None,
                        help="range scale (default 50 for bilateral)")
    oracle.add_argument("--noise", type=float, default=None,
                        help="nlm mode: sets theta = 3 * noise")
    oracle.add_argument("--guide", type=Path, default=None)
    oracle.add_argument("--S", type=int, default=10, dest="S",
                        help="box window radius for nlm mode (default 10)")
    oracle.add_argument("--r", type=int, default=3, dest="r")
    oracle.add_argument("--pca-dim", type=int, default=25)
    oracle.add_argument("--range-max", type=float, default=None)
    oracle.set_defaults(func=_cmd_oracle)

    compare = sub.add_parser("compare", help="print psnr_db,ssim,mse for two images")
    compare.add_argument("a", type=Path)
    compare.add_argument("b", type=Path)
    compare.add_argument("--per-band", action="store_true",
                         help="average per-band PSNR (hyperspectral convention)")
    compare.add_argument("--range-max", type=float, default=None)
    compare.set_defaults(func=_cmd_compare)

    bench = sub.add_parser("bench", help="accuracy/timing sweeps vs the oracle")
    bench.add_argument("input", type=Path)
    bench.add_argument("--sigma", type=float, default=5.0)
    bench.add_argument("--theta", type=float, default=50.0)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--m0-list", type=str, default="4,8,16,32,64",
                       help="comma-separated m0 sweep (default 4,8,16,32,64)")
    bench.add_argument("--strategies", type=str, default="kmeans",
                       help="comma-separated subset of kmeans,uniform")
    bench.add_argument("--s-list", type=str, default=None,
                       help="sweep window radius S instead (sigma = S/3)")
    bench.add_argument("--spatial", choices=("recursive", "fir"), default="recursive")
    bench.add_argument("--range-max", type=float, default=None)
    bench.add_argument("--output", type=Path, default=None,
                       help="write the CSV table here instead of stdout")
    bench.set_defaults(func=_cmd_bench)

    diag = sub.add_parser("diag", help="Nystrom kernel-error diagnostics")
    diag.add_argument("input", type=Path)
    diag.add_argument("--theta", type=float, default=50.0)
    diag.add_argument("--m0", type=int, default=15)
    diag.add_argument("--seed", type=int, default=0)
    diag.add_argument("--strategy", choices=("kmeans", "uniform"), default="kmeans")
    diag.add_argument("--range-max", type=float, default=None)
    diag.set_defaults(func=_cmd_diag)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"nysfilter: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"nysfilter: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ImageFormatError as exc:
        print(f"nysfilter: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"nysfilter: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DegenerateKernelError, FloatingPointError, ZeroDivisionError) as exc:
        print(f"nysfilter: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def _set_threads(n: int | None) -> None:
    if n is None:
        return
    if n < 1:
        raise UsageError("--threads must be >= 1")
    import numba

    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def _load(path: Path, range_max: float | None) -> Image:
    img = load_image(path)
    if range_max is not None:
        img = Image(data=img.data, range_max=range_max)
    return img


def _validate_output(path: Path, channels: int) -> None:
    suffix = path.suffix.lower()
    if suffix == ".kfc":
        return
    if suffix == ".png" and channels in (1, 3):
        return
    if suffix == ".pgm" and channels == 1:
        return
    if suffix == ".ppm" and channels == 3:
        return
    raise UsageError(
        f"cannot write {channels}-channel output to {path.name!r} "
        "(use .png/.pgm/.ppm for 8-bit or .kfc for cubes)"
    )


def _print_summary(tag: str, f: Image, params: FilterParams, report: FilterReport) -> None:
    print(
        f"nysfilter {tag}: {f.width}x{f.height}x{f.channels}, "
        f"m0={params.m0} ({params.landmark_strategy}), "
        f"retained rank {report.retained_rank}",
        file=sys.stderr,
    )
    for stage in TIMING_STAGES:
        print(f"  {stage:<18} {report.timings[stage] * 1e3:9.2f} ms", file=sys.stderr)
    print(
        f"  quant error {report.quant_error:.6g}, "
        f"min |denominator| {report.min_denominator:.3g}, "
        f"guarded pixels {report.guarded_pixels}",
        file=sys.stderr,
    )


def _report_fields(params: FilterParams, report: FilterReport, with_timings: bool) -> dict:
    fields: dict[str, object] = {
        "mode": params.mode,
        "strategy": params.landmark_strategy,
        "m0": params.m0,
        "seed": params.seed,
        "theta": params.theta,
        "retained_rank": report.retained_rank,
        "quant_error": report.quant_error,
        "min_denominator": report.min_denominator,
        "guarded_pixels": report.guarded_pixels,
    }
    if with_timings:
        for stage in TIMING_STAGES:
            fields[f"t_{stage}_s"] = report.timings[stage]
    return fields


def _write_report(path: Path, fields: dict) -> None:
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(fields, indent=2, sort_keys=True) + "\n")
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(fields))
        writer.writeheader()
        writer.writerow(fields)
        path.write_text(buf.getvalue())


def _run_fast(args, f: Image, p: Image, params: FilterParams, tag: str) -> int:
    _validate_output(args.output, f.channels)
    if args.report is not None and args.report.suffix.lower() not in (".csv", ".json"):
        raise UsageError("--report must end in .csv or .json")
    report = fast_filter(f, p, params)
    _print_summary(tag, f, params, report)
    save_image(report.output, args.output)
    if args.report is not None:
        _write_report(args.report, _report_fields(params, report, args.timings))
    return EXIT_OK


def _cmd_blf(args) -> int:
    _set_threads(args.threads)
    f = _load(args.input, args.range_max)
    if args.guide is not None:
        p = _load(args.guide, args.range_max)
        mode = "joint"
    else:
        p = f
        mode = "bilateral"
    spatial = (
        SpatialKernel.recursive(args.sigma)
        if args.spatial == "recursive"
        else SpatialKernel.gaussian(args.sigma)
    )
    params = FilterParams(
        spatial=spatial,
        theta=args.theta,
        m0=args.m0,
        seed=args.seed,
        landmark_strategy=args.strategy,
        mode=mode,
        eps_drop=args.eps_drop,
        kmeans_max_iter=args.max_iter,
    )
    p = build_guide(f, mode=mode, guide=p if mode == "joint" else None)
    return _run_fast(args, f, p, params, "blf")


def _nlm_theta(args) -> float:
    if args.theta is not None:
        return args.theta
    if args.noise is not None:
        return 3.0 * args.noise
    raise UsageError("nlm requires --noise (theta = 3 * noise) or --theta")


def _cmd_nlm(args) -> int:
    _set_threads(args.threads)
    theta = _nlm_theta(args)
    f = _load(args.input, args.range_max)
    params = FilterParams(
        spatial=SpatialKernel.box(args.S),
        theta=theta,
        m0=args.m0,
        seed=args.seed,
        landmark_strategy=args.strategy,
        mode="nlm",
        patch_radius=args.r,
        pca_dim=args.pca_dim,
        eps_drop=args.eps_drop,
        kmeans_max_iter=args.max_iter,
    )
    p = build_guide(f, mode="nlm", patch_radius=args.r, pca_dim=args.pca_dim)
    return _run_fast(args, f, p, params, "nlm")


def _cmd_oracle(args) -> int:
    f = _load(args.input, args.range_max)
    if args.mode == "bilateral":
        theta = args.theta if args.theta is not None else 50.0
        spatial = SpatialKernel.gaussian(args.sigma)
        if args.guide is not None:
            p = _load(args.guide, args.range_max)
        else:
            p = f
        mode = "joint" if args.guide is not None else "bilateral"
    else:
        theta = _nlm_theta(args)
        spatial = SpatialKernel.box(args.S)
        p = build_guide(f, mode="nlm", patch_radius=args.r, pca_dim=args.pca_dim)
        mode = "nlm"
    params = FilterParams(spatial=spatial, theta=theta, mode=mode)
    _validate_output(args.output, f.channels)
    t0 = time.perf_counter()
    out = brute_force_filter(f, p, params)
    elapsed = time.perf_counter() - t0
    print(
        f"nysfilter oracle: {f.width}x{f.height}x{f.channels}, "
        f"S={params.spatial.effective_radius()}, {elapsed:.3f} s",
        file=sys.stderr,
    )
    save_image(out, args.output)
    return EXIT_OK


def _cmd_compare(args) -> int:
    a = _load(args.a, args.range_max)
    b = _load(args.b, args.range_max)
    p = metric_psnr(a, b, per_band=args.per_band)
    s = metric_ssim(a, b)
    m = metric_mse(a, b)
    print(f"{p:.4f},{s:.4f},{m:.4f}")
    return EXIT_OK


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"{flag} expects comma-separated integers") from exc
    if not values:
        raise UsageError(f"{flag} must not be empty")
    return values


def _cmd_bench(args) -> int:
    f = _load(args.input, args.range_max)
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    for s in strategies:
        if s not in ("kmeans", "uniform"):
            raise UsageError(f"unknown strategy {s!r}")
    rows = []
    oracle_cache: dict[int, tuple[Image, float]] = {}

    def oracle_at(S: int, sigma: float) -> tuple[Image, float]:
        if S not in oracle_cache:
            params = FilterParams(spatial=SpatialKernel.gaussian(sigma, S), theta=args.theta)
            t0 = time.perf_counter()
            ref = brute_force_filter(f, f, params)
            oracle_cache[S] = (ref, time.perf_counter() - t0)
        return oracle_cache[S]

    def fast_at(S: int, sigma: float, m0: int, strategy: str) -> tuple[FilterReport, float]:
        spatial = (
            SpatialKernel.recursive(sigma)
            if args.spatial == "recursive"
            else SpatialKernel.gaussian(sigma, S)
        )
        params = FilterParams(
            spatial=spatial, theta=args.theta, m0=m0, seed=args.seed,
            landmark_strategy=strategy,
        )
        rep = fast_filter(f, f, params)
        return rep, rep.timings["total"]

    if args.s_list is not None:
        m0 = _parse_int_list(args.m0_list, "--m0-list")[0]
        for S in _parse_int_list(args.s_list, "--s-list"):
            sigma = S / 3.0
            ref, t_oracle = oracle_at(S, sigma)
            rep, t_fast = fast_at(S, sigma, m0, strategies[0])
            rows.append(_bench_row(S, m0, strategies[0], rep, ref, t_oracle, t_fast))
    else:
        S = math.ceil(3.0 * args.sigma)
        ref, t_oracle = oracle_at(S, args.sigma)
        for strategy in strategies:
            for m0 in _parse_int_list(args.m0_list, "--m0-list"):
                rep, t_fast = fast_at(S, args.sigma, m0, strategy)
                rows.append(_bench_row(S, m0, strategy, rep, ref, t_oracle, t_fast))

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]))
    writer.writeheader()
    writer.writerows(rows)
    if args.output is not None:
        args.output.write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def _bench_row(S, m0, strategy, rep: FilterReport, ref: Image, t_oracle, t_fast) -> dict:
    row = {
        "S": S,
        "m0": m0,
        "strategy": strategy,
        "quant_error": f"{rep.quant_error:.6g}",
        "psnr_vs_oracle_db": f"{metric_psnr(ref, rep.output):.4f}",
        "t_oracle_s": f"{t_oracle:.4f}",
        "t_fast_s": f"{t_fast:.4f}",
    }
    for stage in TIMING_STAGES[:-1]:
        row[f"t_{stage}_s"] = f"{rep.timings[stage]:.4f}"
    row["speedup"] = f"{t_oracle / t_fast:.2f}"
    return row


def _cmd_diag(args) -> int:
    f = _load(args.input, args.range_max)
    range_list = extract_range_list(f)
    if range_list.m > KERNEL_ERROR_MAX_POINTS:
        raise UsageError(
            f"diag materializes the full kernel matrix; {range_list.m} pixels "
            f"exceed the {KERNEL_ERROR_MAX_POINTS}-pixel guard (crop the input)"
        )
    from .landmarks import kmeans_landmarks, uniform_landmarks

    if args.strategy == "kmeans":
        lm = kmeans_landmarks(range_list.vectors, args.m0, seed=args.seed)
    else:
        lm = uniform_landmarks(range_list.vectors, args.m0, seed=args.seed)
    kernel = RangeKernel(theta=args.theta)
    model = fit(range_list, lm, kernel)
    err = kernel_error(model, range_list, kernel)
    print("m,m0,strategy,quant_error,kernel_error,retained_rank")
    print(
        f"{range_list.m},{args.m0},{args.strategy},"
        f"{lm.quant_error:.6g},{err:.6g},{model.retained_rank}"
    )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
