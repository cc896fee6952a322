"""Command-line surface.

Subcommands: ``pattern`` (checker / bars / sources generators), ``warp``
(build + apply the area-resampling matrix), ``resample`` (bilinear
comparison path), ``selftest`` (geometry oracle equivalence), ``bench``
(timings and matrix sizes on the standard configurations), ``photometry``
(the synthetic-source estimator experiment).

Exit codes: 0 success, 2 usage errors, 3 I/O errors, 4 numeric errors
(singular maps, degenerate geometry, failed self-test).
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import baseline, formats, patterns, photometry, selftest, warp
from .errors import (AreaWarpError, DegenerateTriangleError, FormatError,
                     MapSpecError, SingularMapError)
from .grid import GridFrame, IntensityImage
from .mappings import parse_map_spec

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

BENCH_CONFIGS = ((64, 100), (64, 1000), (512, 100), (512, 1000))


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        w, h = int(w), int(h)
    except ValueError as exc:
        raise ValueError(f"size must look like 640x480, got {text!r}") from exc
    if w < 1 or h < 1:
        raise ValueError(f"size must be positive, got {text!r}")
    return w, h


def _load_image(path) -> IntensityImage:
    try:
        return formats.read_image(path)
    except FileNotFoundError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


def cmd_pattern(args) -> int:
    if args.kind == "checker":
        w, h = _parse_size(args.size or "8x8")
        img = patterns.checker(w, h, cell=args.cell)
    elif args.kind == "bars":
        w, h = _parse_size(args.size or "512x100")
        img = patterns.bars(w, h)
    else:  # sources
        w, h = _parse_size(args.size or "400x400")
        if args.sigma <= 0:
            raise ValueError("sigma must be positive")
        field = photometry.synthesize_sources(
            GridFrame.unit(w, h), k=args.k, sigma=args.sigma, seed=args.seed)
        img = field.image
    formats.write_image(img, args.out)
    return EXIT_OK


def _build_from_args(args, src_frame):
    mapping = parse_map_spec(args.map)
    w, h = _parse_size(args.size)
    dst_frame = warp.destination_frame(mapping, src_frame, w, h)
    t0 = time.perf_counter()
    if args.matrix_in:
        B = warp.read_matrix(args.matrix_in, src_frame=src_frame,
                             dst_frame=dst_frame,
                             rule=warp.WeightingRule.from_name(args.rule))
    else:
        B = warp.build_matrix(mapping, src_frame, dst_frame,
                              rule=args.rule, dup_tol=args.tolerance_dup,
                              n_threads=args.threads)
    build_ms = (time.perf_counter() - t0) * 1000.0
    return mapping, B, build_ms


def cmd_warp(args) -> int:
    img = _load_image(getattr(args, "in"))
    mapping, B, build_ms = _build_from_args(args, img.frame)
    t0 = time.perf_counter()
    out = warp.apply(B, img)
    apply_ms = (time.perf_counter() - t0) * 1000.0
    formats.write_image(out, args.out)
    if args.matrix_out:
        warp.write_matrix(B, args.matrix_out)
    if args.report:
        rep = warp.report(B, mapping, img, out).as_dict()
        rep["build_ms"] = build_ms
        rep["apply_ms"] = apply_ms
        with open(args.report, "w", encoding="ascii") as fh:
            json.dump(rep, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


def cmd_resample(args) -> int:
    img = _load_image(getattr(args, "in"))
    mapping = parse_map_spec(args.map)
    if mapping.inverse is None:
        raise SingularMapError(
            f"map {mapping.name!r} has no analytic inverse; "
            "resample needs one (use warp instead)")
    w, h = _parse_size(args.size)
    dst_frame = warp.destination_frame(mapping, img.frame, w, h)
    out = baseline.resample_bilinear(mapping.inverse, img, dst_frame)
    formats.write_image(out, args.out)
    return EXIT_OK


def cmd_selftest(args) -> int:
    rep = selftest.run_selftest(n_random=args.pairs, mc_samples=args.samples,
                                seed=args.seed,
                                progress=lambda msg: print(f"  .. {msg}"))
    for case in rep.cases:
        status = "pass" if case.passed else "FAIL"
        print(f"{status}  {case.name:44s} area={case.area:.9g} "
              f"clip={case.clip_area:.9g} mc={case.mc_area:.9g}")
    print(f"random pairs: {rep.n_random - rep.n_random_failed}/{rep.n_random} pass")
    print(f"max clip deviation (relative): {rep.max_clip_dev:.3e}")
    print(f"max Monte Carlo deviation: {rep.max_mc_sigma:.2f} sigma")
    print("SELFTEST " + ("PASSED" if rep.passed else "FAILED"))
    return EXIT_OK if rep.passed else EXIT_NUMERIC


def cmd_bench(args) -> int:
    from .mappings import map_sin
    mapping = map_sin()
    rng = np.random.default_rng(args.seed)
    lines = ["src,dst,build_ms,apply_ms,nnz,bilinear_ms"]
    for n_src, n_dst in BENCH_CONFIGS:
        src = GridFrame.unit(n_src, n_src)
        img = IntensityImage(src, rng.uniform(0.0, 255.0, size=(n_src, n_src)))
        dst = warp.destination_frame(mapping, src, n_dst, n_dst)
        t0 = time.perf_counter()
        B = warp.build_matrix(mapping, src, dst, "area", n_threads=args.threads)
        build_ms = (time.perf_counter() - t0) * 1000.0
        t0 = time.perf_counter()
        warp.apply(B, img)
        apply_ms = (time.perf_counter() - t0) * 1000.0
        t0 = time.perf_counter()
        baseline.resample_bilinear(mapping.inverse, img, dst)
        bilinear_ms = (time.perf_counter() - t0) * 1000.0
        lines.append(f"{n_src}x{n_src},{n_dst}x{n_dst},{build_ms:.1f},"
                     f"{apply_ms:.1f},{B.nnz},{bilinear_ms:.2f}")
    table = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(table)
    else:
        sys.stdout.write(table)
    return EXIT_OK


def cmd_photometry(args) -> int:
    if args.sigma <= 0:
        raise ValueError("sigma must be positive")
    mapping = parse_map_spec(args.map)
    sw, sh = _parse_size(args.src_size)
    dw, dh = _parse_size(args.dst_size)
    src = GridFrame.unit(sw, sh)
    field = photometry.synthesize_sources(src, k=args.k, sigma=args.sigma,
                                          seed=args.seed)
    dst = warp.destination_frame(mapping, src, dw, dh)
    results = photometry.run_estimators(field, mapping, dst,
                                        radius_factor=args.radius_factor,
                                        n_threads=args.threads)
    photometry.write_photometry_csv(args.out, field, mapping, results)
    for res in results:
        print(f"epsilon[{res.method}] = {res.epsilon:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="areawarp",
        description="Intensity-conserving image warping by area resampling")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pattern", help="generate a test pattern image")
    p.add_argument("--kind", choices=("checker", "bars", "sources"),
                   required=True)
    p.add_argument("--size", help="WxH in pixels")
    p.add_argument("--cell", type=int, default=1, help="checker cell size")
    p.add_argument("--k", type=int, default=40, help="number of sources")
    p.add_argument("--sigma", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("warp", help="area-resampling warp of an image")
    p.add_argument("--in", required=True, help="input image (.pgm or .awf)")
    p.add_argument("--out", required=True)
    p.add_argument("--map", default="identity()",
                   help="map spec, e.g. wavy() or perspective(a=0.25)")
    p.add_argument("--size", required=True, help="destination WxH")
    p.add_argument("--rule", default="pixel", choices=("hemi", "pixel", "area"))
    p.add_argument("--report", help="write a JSON diagnostics report here")
    p.add_argument("--matrix-out", help="write the AWM1 matrix here")
    p.add_argument("--matrix-in", help="apply a stored AWM1 matrix instead")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--tolerance-dup", type=float, default=None,
                   help="absolute duplicate-merge tolerance override")
    p.set_defaults(func=cmd_warp)

    p = sub.add_parser("resample",
                       help="bilinear inverse-lookup resampling (comparison)")
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--map", default="identity()")
    p.add_argument("--size", required=True)
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("selftest", help="geometry oracle equivalence suite")
    p.add_argument("--pairs", type=int, default=10_000)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("bench", help="timing table on the sin-map configurations")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("photometry", help="synthetic-source estimator experiment")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--map", default="sin()")
    p.add_argument("--src-size", default="400x400")
    p.add_argument("--dst-size", default="50x50")
    p.add_argument("--k", type=int, default=40)
    p.add_argument("--sigma", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--radius-factor", type=float, default=4.0)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_photometry)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except (MapSpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SingularMapError, DegenerateTriangleError, ArithmeticError,
            RuntimeError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except AreaWarpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
