"""Command-line front door.

Subcommands: segment, benchmark, sweep, erode-seeds, netstats, serve.
Exit codes: 0 success, 1 usage error, 2 runtime error. All defaults mirror
SegConfig, so a bare `segment` reproduces the default configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bench import (
    OPTIMIZED_K_GRID,
    parameter_sweep,
    run_grabcut,
    run_scribble_set,
    seed_sensitivity,
)
from .errors import LapsegError, ParameterError
from .features import normalize_and_scale, extract_raw_features
from .graphs import build_knn_digraph
from .netmetrics import small_world_ness
from .pipeline import SegConfig, parse_scribbles, parse_trimap, segment
from .resample import decode_image, downscale_bicubic, downscale_nearest, encode_labelmap


class _UsageError(Exception):
    def __init__(self, parser, message):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(self, message)


def _parse_lambda(text: str):
    if text in ("uniform", "location"):
        return text
    parts = text.split(",")
    if len(parts) != 9:
        raise ParameterError(
            f"--lambda expects 'uniform', 'location', or 9 comma-separated weights, got {text!r}"
        )
    return [float(p) for p in parts]


def _parse_color(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise ParameterError(f"expected R,G,B color triple, got {text!r}")
    color = tuple(int(p) for p in parts)
    if any(not 0 <= c <= 255 for c in color):
        raise ParameterError(f"color channels must be 0..255, got {text!r}")
    return color


def _parse_grid(text: str, as_int: bool):
    """Grid spec: either 'a,b,c' values or an inclusive 'start:step:stop' range."""
    cast = int if as_int else float
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ParameterError(f"range grid must be START:STEP:STOP, got {text!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise ParameterError("grid step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        values = [start + i * step for i in range(max(count, 0))]
    else:
        values = [float(p) for p in text.split(",") if p]
    if not values:
        raise ParameterError(f"empty grid {text!r}")
    return [cast(v) for v in values]


def _build_parser() -> _Parser:
    parser = _Parser(prog="lapseg", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add_config_flags(p):
        p.add_argument("--k", type=int, default=10, help="neighbor count (default 10)")
        p.add_argument("--sigma", type=float, default=0.5, help="kernel width (default 0.5)")
        p.add_argument("--omega", type=float, default=1e-4,
                       help="convergence threshold (default 1e-4)")
        p.add_argument("--lambda", dest="lambda_spec", default="uniform",
                       help="feature weights: uniform | location | w1,...,w9")
        p.add_argument("--tau", type=float, default=0.999,
                       help="stage-1 confidence threshold (default 0.999)")

    def add_dataset_flags(p):
        p.add_argument("--images", required=True, help="directory of input images")
        p.add_argument("--trimaps", required=True, help="directory of trimaps")
        p.add_argument("--truth", required=True, help="directory of ground-truth masks")

    p = sub.add_parser("segment", help="segment one image from scribbles or a trimap")
    p.add_argument("-i", "--image", required=True, help="input image (PNG or PPM)")
    seed_group = p.add_mutually_exclusive_group(required=True)
    seed_group.add_argument("-s", "--scribbles", help="color scribble image")
    seed_group.add_argument("-t", "--trimap", help="{0,64,128,255} trimap image")
    p.add_argument("-o", "--output", required=True, help="output label PNG")
    p.add_argument("--background", default="255,255,255",
                   help="scribble background color R,G,B (default white)")
    p.add_argument("--report", help="also write the JSON telemetry to this file")
    add_config_flags(p)

    p = sub.add_parser("benchmark", help="run the seeded benchmark over a dataset")
    p.add_argument("--images", required=True, help="directory of input images")
    seed_dirs = p.add_mutually_exclusive_group(required=True)
    seed_dirs.add_argument("--trimaps", help="directory of trimaps")
    seed_dirs.add_argument("--scribbles", help="directory of color scribble images")
    p.add_argument("--truth", required=True, help="directory of ground-truth masks")
    p.add_argument("--background", default="255,255,255",
                   help="scribble background color R,G,B (default white)")
    p.add_argument("--optimize-k", action="store_true",
                   help="also search k per image over the documented grid")
    p.add_argument("--repeats", type=int, default=1,
                   help="average wall times over this many runs per image")
    p.add_argument("--csv", help="write per-image rows to this CSV file")
    p.add_argument("--json", dest="json_path", help="write the full report to this JSON file")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: LAPSEG_THREADS or 1; 0 = auto)")
    add_config_flags(p)

    p = sub.add_parser("sweep", help="mean error across a parameter grid")
    add_dataset_flags(p)
    p.add_argument("--param", required=True, choices=("k", "sigma", "omega"))
    p.add_argument("--grid", required=True,
                   help="grid values 'a,b,c' or inclusive range 'start:step:stop'")
    p.add_argument("--csv", help="write the curve to this CSV file")
    p.add_argument("--workers", type=int, default=None)
    add_config_flags(p)

    p = sub.add_parser("erode-seeds", help="seed-erosion sensitivity curves")
    add_dataset_flags(p)
    p.add_argument("--p-grid", required=True,
                   help="erosion probabilities 'a,b,c' or 'start:step:stop'")
    p.add_argument("--trials", type=int, default=20, help="trials per probability")
    p.add_argument("--seed", type=int, default=0, help="master RNG seed")
    p.add_argument("--csv", help="write the curves to this CSV file")
    add_config_flags(p)

    p = sub.add_parser("netstats", help="small-world statistics of the stage-1 graph")
    p.add_argument("-i", "--image", required=True)
    p.add_argument("-s", "--scribbles", required=True)
    p.add_argument("--background", default="255,255,255")
    p.add_argument("--samples", type=int, default=20, help="random baselines (default 20)")
    p.add_argument("--seed", type=int, default=0)
    add_config_flags(p)

    p = sub.add_parser("serve", help="run the local HTTP service (and web UI)")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui-dir", default=None,
                   help="static frontend directory (default: bundled frontend/dist if present)")
    return parser


def _config_from_args(args) -> SegConfig:
    return SegConfig(
        k=args.k,
        sigma=args.sigma,
        omega=args.omega,
        lambda_weights=_parse_lambda(args.lambda_spec),
        tau=args.tau,
    )


def _load_seeds(args):
    if args.scribbles:
        scrib = decode_image(Path(args.scribbles).read_bytes())
        return parse_scribbles(scrib, _parse_color(args.background))
    seeds, _eval_mask = parse_trimap(decode_image(Path(args.trimap).read_bytes()))
    return seeds


def _cmd_segment(args) -> int:
    cfg = _config_from_args(args)
    img = decode_image(Path(args.image).read_bytes())
    seeds = _load_seeds(args)
    result = segment(img, seeds, cfg)
    Path(args.output).write_bytes(encode_labelmap(result.labels))
    payload = result.to_json_dict()
    payload["output"] = args.output
    text = json.dumps(payload, indent=2)
    print(text)
    if args.report:
        Path(args.report).write_text(text)
    return 0


def _cmd_benchmark(args) -> int:
    cfg = _config_from_args(args)
    common = dict(
        k_grid=OPTIMIZED_K_GRID if args.optimize_k else None,
        csv_path=args.csv, json_path=args.json_path,
        workers=args.workers, repeats=args.repeats,
    )
    if args.scribbles:
        summary = run_scribble_set(args.images, args.scribbles, args.truth, cfg,
                                   background=_parse_color(args.background), **common)
    else:
        summary = run_grabcut(args.images, args.trimaps, args.truth, cfg, **common)
    print(f"images={summary['images']}")
    print(f"mean_error={summary['mean_error']:.4f}")
    print(f"mean_wall_time_s={summary['mean_wall_time']:.3f}")
    if "optimized" in summary:
        print(f"optimized_mean_error={summary['optimized']['mean_error']:.4f}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    grid = _parse_grid(args.grid, as_int=args.param == "k")
    points = parameter_sweep(args.images, args.trimaps, args.truth,
                             args.param, grid, cfg, csv_path=args.csv,
                             workers=args.workers)
    for point in points:
        print(f"{args.param}={point['value']} mean_error={point['mean_error']:.4f} "
              f"mean_time_s={point['mean_time']:.3f}")
    return 0


def _cmd_erode_seeds(args) -> int:
    cfg = _config_from_args(args)
    p_grid = _parse_grid(args.p_grid, as_int=False)
    curve = seed_sensitivity(args.images, args.trimaps, args.truth, p_grid,
                             trials=args.trials, cfg=cfg, rng_seed=args.seed,
                             csv_path=args.csv)
    for point in curve:
        print(f"p={point['p']:.2f} error_all={point['mean_error_all_unlabeled']:.4f} "
              f"error_excl_seeds={point['mean_error_excluding_former_seeds']:.4f}")
    return 0


def _cmd_netstats(args) -> int:
    cfg = _config_from_args(args)
    img = decode_image(Path(args.image).read_bytes())
    scrib = decode_image(Path(args.scribbles).read_bytes())
    seeds = parse_scribbles(scrib, _parse_color(args.background))
    small = downscale_bicubic(img)
    small_seeds = downscale_nearest(seeds, small.width, small.height)
    feats = normalize_and_scale(extract_raw_features(small), cfg.lambda_weights)
    graph = build_knn_digraph(feats, small_seeds.flat(), cfg.k, cfg.sigma)
    stats = small_world_ness(graph, samples=args.samples, rng_seed=args.seed)
    print(json.dumps(stats.to_json_dict(), indent=2))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, default_ui_dir

    ui_dir = args.ui_dir if args.ui_dir is not None else default_ui_dir()
    app = create_app(ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


_COMMANDS = {
    "segment": _cmd_segment,
    "benchmark": _cmd_benchmark,
    "sweep": _cmd_sweep,
    "erode-seeds": _cmd_erode_seeds,
    "netstats": _cmd_netstats,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError(parser, "a subcommand is required")
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        exc.parser.print_usage(sys.stderr)
        print(f"lapseg: error: {exc}", file=sys.stderr)
        return 1
    except (LapsegError, OSError) as exc:
        print(f"lapseg: error: {exc}", file=sys.stderr)
        return 2


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
