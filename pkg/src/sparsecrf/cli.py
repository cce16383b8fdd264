"""Batch command-line surface.

Subcommands: segment (one image), eval (metric CSV over directories),
bounds (sparsification bounds for n, epsilon), sweep (parameter grid),
graphlab (random-graph regime Monte-Carlo as CSV).

Exit codes: 0 success, 2 missing input file (or nothing to evaluate),
3 scribbles missing a class, 4 invalid configuration or arguments.
"""

import argparse
import itertools
import json
import sys
from pathlib import Path

from . import imageio
from .energy import MissingSeedsError
from .pipeline import (ConfigError, RunConfig, config_from_mapping,
                       load_config_file, segment)

EXIT_MISSING_FILE = 2
EXIT_MISSING_CLASS = 3
EXIT_BAD_CONFIG = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_BAD_CONFIG)


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--divergence", choices=["bregman", "kl", "hellinger"])
    p.add_argument("--mode", choices=["similarity", "literal"])
    p.add_argument("--degree", type=float)
    p.add_argument("--q", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--window", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--lambda-local", type=float, dest="lambda_local")
    p.add_argument("--lambda-long", type=float, dest="lambda_long")


def _build_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        if not Path(args.config).is_file():
            print(f"config file not found: {args.config}", file=sys.stderr)
            raise SystemExit(EXIT_MISSING_FILE)
        cfg = load_config_file(args.config, cfg)
    overrides = {}
    for key in ("seed", "divergence", "mode", "degree", "q", "sigma", "beta",
                "tau", "epsilon", "window", "bins", "lambda_local",
                "lambda_long"):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    return config_from_mapping(overrides, cfg)


def _require_file(path, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        print(f"{what} not found: {path}", file=sys.stderr)
        raise SystemExit(EXIT_MISSING_FILE)
    return p


def cmd_segment(args) -> int:
    cfg = _build_config(args)
    img_path = _require_file(args.image, "image")
    scr_path = _require_file(args.scribbles, "scribbles")
    img = imageio.load_image(img_path)
    try:
        scribbles = imageio.load_scribbles(scr_path, img.width, img.height)
    except ValueError as exc:
        print(f"bad scribbles: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_BAD_CONFIG)
    try:
        mask, report = segment(img, scribbles, cfg)
    except MissingSeedsError as exc:
        print(f"scribbles incomplete: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_MISSING_CLASS)
    out = Path(args.out)
    imageio.save_mask_png(mask, out)
    report_path = out.with_suffix(out.suffix + ".report.json")
    report_path.write_text(json.dumps(report.to_dict(), indent=2,
                                      sort_keys=True) + "\n")
    d = report.degree
    print(f"mask written to {out}")
    print(f"energy {report.energy:.6f}  edges {report.edges}  "
          f"gamma {report.gamma:.6g}")
    print(f"degree mean {d.mean_degree:.3f} min {d.min_degree} "
          f"max {d.max_degree}  implied_p {d.implied_p:.4e}")
    print(f"bounds eps={d.epsilon}: lower_ok={d.lower_ok} "
          f"upper_ok={d.upper_ok}")
    return 0


def cmd_eval(args) -> int:
    pred_dir = Path(args.pred)
    gt_dir = Path(args.gt)
    if not pred_dir.is_dir() or not gt_dir.is_dir():
        print("pred/gt directory not found", file=sys.stderr)
        return EXIT_MISSING_FILE
    from .metrics import evaluate_pair, records_to_csv

    records = []
    gt_files = sorted(p for p in gt_dir.iterdir() if p.is_file())
    if not gt_files:
        print("no ground-truth files", file=sys.stderr)
        return EXIT_MISSING_FILE
    for gt_path in gt_files:
        pred_path = pred_dir / gt_path.name
        if not pred_path.is_file():
            print(f"warning: no prediction for {gt_path.name}, skipped",
                  file=sys.stderr)
            continue
        pred = imageio.load_mask(pred_path)
        gt = imageio.load_mask(gt_path)
        if pred.shape != gt.shape:
            print(f"warning: size mismatch for {gt_path.name}, skipped",
                  file=sys.stderr)
            continue
        records.append(evaluate_pair(pred, gt, name=gt_path.name))
    if not records:
        print("nothing evaluated", file=sys.stderr)
        return EXIT_MISSING_FILE
    csv_text = records_to_csv(records)
    if args.out:
        Path(args.out).write_text(csv_text)
    else:
        print(csv_text, end="")
    return 0


def cmd_bounds(args) -> int:
    from .randgraph import sparsification_bounds

    try:
        b = sparsification_bounds(args.n, args.epsilon)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    # display precision follows the worked reference figures
    print(f"n = {b.n}")
    print(f"epsilon = {b.epsilon}")
    print(f"p_lower = {b.p_lower:.4e}")
    print(f"p_upper = {b.p_upper:.4f}")
    print(f"degree_lower = {b.degree_lower:.2f}")
    print(f"max_edges = {b.max_edges:.4e}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _build_config(args)
    img_path = _require_file(args.image, "image")
    scr_path = _require_file(args.scribbles, "scribbles")
    img = imageio.load_image(img_path)
    scribbles = imageio.load_scribbles(scr_path, img.width, img.height)
    gt = imageio.load_mask(_require_file(args.gt, "ground truth")) \
        if args.gt else None

    grid_axes = {}
    for spec in args.grid or []:
        if "=" not in spec:
            print(f"bad --grid {spec!r}, expected key=v1,v2,...",
                  file=sys.stderr)
            return EXIT_BAD_CONFIG
        key, vals = spec.split("=", 1)
        grid_axes[key.strip()] = [v.strip() for v in vals.split(",") if v.strip()]
    if not grid_axes:
        grid_axes = {"seed": [str(cfg.seed)]}

    keys = sorted(grid_axes)
    points = []
    seen = set()
    for combo in itertools.product(*(grid_axes[k] for k in keys)):
        if combo in seen:
            print(f"warning: duplicate grid point {dict(zip(keys, combo))}, "
                  "skipped", file=sys.stderr)
            continue
        seen.add(combo)
        points.append(dict(zip(keys, combo)))

    header = keys + ["edges", "energy", "runtime_ms"]
    if gt is not None:
        header += ["region_f1", "boundary_f1", "iou"]
    lines = [",".join(header)]
    for point in points:
        try:
            run_cfg = config_from_mapping(point, cfg)
        except ConfigError as exc:
            print(f"bad grid point {point}: {exc}", file=sys.stderr)
            return EXIT_BAD_CONFIG
        try:
            mask, report = segment(img, scribbles, run_cfg)
        except MissingSeedsError as exc:
            print(f"scribbles incomplete: {exc}", file=sys.stderr)
            return EXIT_MISSING_CLASS
        row = [point[k] for k in keys]
        row += [str(report.edges), f"{report.energy:.6f}",
                f"{report.timings_ms['total_ms']:.1f}"]
        if gt is not None:
            from .metrics import evaluate_pair

            rec = evaluate_pair(mask.labels, gt)
            row += [f"{rec.region_f1:.5f}", f"{rec.boundary_f1:.5f}",
                    f"{rec.iou:.5f}"]
        lines.append(",".join(row))
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(csv_text)
    else:
        print(csv_text, end="")
    return 0


def cmd_graphlab(args) -> int:
    from .randgraph import regime_summary

    print("n,p,trials,fraction_connected,mean_largest_component")
    for p in args.p:
        s = regime_summary(args.n, p, args.trials, seed=args.seed or 0)
        print(f"{s.n},{s.p:.6g},{s.trials},{s.fraction_connected:.4f},"
              f"{s.mean_largest_component:.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sparsecrf",
                     description="Sparse stochastic-clique CRF segmentation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment one image")
    p.add_argument("image")
    p.add_argument("scribbles")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("eval", help="metric CSV over mask directories")
    p.add_argument("pred")
    p.add_argument("gt")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bounds", help="sparsification bounds for n, epsilon")
    p.add_argument("n", type=int)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="grid of segmentation runs")
    p.add_argument("image")
    p.add_argument("scribbles")
    p.add_argument("--gt")
    p.add_argument("--grid", action="append",
                   help="axis as key=v1,v2,... (repeatable)")
    p.add_argument("--out")
    _add_config_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("graphlab", help="random-graph regime Monte-Carlo")
    p.add_argument("n", type=int)
    p.add_argument("--p", type=float, action="append", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_graphlab)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())
