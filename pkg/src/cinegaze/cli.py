"""Command-line interface.

Subcommands mirror the pipeline stages:

    cinegaze ingest    raw gaze exports -> per-clip fixation files + report
    cinegaze saliency  fixation files -> blurred maps, averages, center prior
    cinegaze ioc       fixation file -> congruency series, summary, cut drops
    cinegaze bench     prediction maps -> per-frame score table
    cinegaze stats     score tables -> ANOVA / pairwise tests / correlation
    cinegaze report    score tables -> aggregates, dataset means, bias record

A JSON config file (--config) supplies defaults for any flag; explicit
flags win. The resolved configuration is echoed into every report header.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .annotations import (PartitionKind, cuts_of, parse_annotations,
                          shot_stats)
from .bench import (DirectoryPredictions, ReportFormat, aggregate_by_annotation,
                    benchmark_model, bias_report, dataset_means, emit_report,
                    per_clip_means, read_score_rows)
from .core import ClipMeta, SaliencyMap
from .errors import CinegazeError, InputError
from .gridio import read_map, write_map
from .ingest import (ColumnMap, IngestReport, clean_and_bin, filter_observers,
                     fixation_map_for_frame, parse_gaze_samples,
                     read_fixations, write_fixations)
from .ioc import (IocConfig, cut_drop_analysis, loo_window_ioc,
                  sequence_ioc_summary, write_ioc_series)
from .metrics import Metric
from .saliency import blur_fixations, center_prior, make_kernel, to_reference_grid
from .stats import one_way_anova, pearson, welch_t_test

DEFAULTS = {
    "sigma_px": 45.0,
    "truncation": 3.0,
    "window": 20,
    "skip_first": 10,
    "min_valid_rate": 0.9,
    "min_observers": 2,
    "auc_b_seed": 1,
    "auc_b_splits": 100,
    "ref_width": 640,
    "ref_height": 400,
    "sigma_fraction": 1.0 / 6.0,
    "pre_frames": 5,
    "post_frames": 5,
    "fps": 24.0,
}


def _resolve(args, config: dict, key: str):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return DEFAULTS[key]


def _load_config(args) -> dict:
    if getattr(args, "config", None):
        with open(args.config) as f:
            loaded = json.load(f)
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        return loaded
    return {}


def _load_meta(path) -> ClipMeta:
    with open(path) as f:
        return ClipMeta.from_dict(json.load(f))


def _echo_config(config_keys, args, config) -> dict:
    return {k: _resolve(args, config, k) for k in config_keys}


def cmd_ingest(args):
    config = _load_config(args)
    min_rate = float(_resolve(args, config, "min_valid_rate"))
    meta = _load_meta(args.meta)
    colmap = ColumnMap.from_json(args.colmap) if args.colmap else ColumnMap()
    report = IngestReport()
    with open(args.gaze) as f:
        records, report = parse_gaze_samples(f, colmap, report)
    records = [r for r in records if r.clip_id == meta.clip_id]
    kept, rejected = filter_observers(records, min_rate)
    report.add("observers_rejected", len(rejected))
    cleaned = clean_and_bin(kept, meta, report)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fix_path = out_dir / f"{meta.clip_id}_fixations.csv"
    write_fixations(cleaned, fix_path)
    report.write(out_dir / f"{meta.clip_id}_ingest_report.json")
    print(f"{meta.clip_id}: {len(kept)} observers kept, {len(rejected)} rejected, "
          f"{cleaned.n_points()} fixation points -> {fix_path}")
    return 0


def cmd_saliency(args):
    config = _load_config(args)
    sigma = float(_resolve(args, config, "sigma_px"))
    truncation = float(_resolve(args, config, "truncation"))

    if args.center_prior:
        if not (args.width and args.height):
            raise InputError("--center-prior requires --width and --height")
        fraction = float(_resolve(args, config, "sigma_fraction"))
        prior = center_prior(args.width, args.height, fraction)
        write_map(args.center_prior, prior.values)
        print(f"center prior {args.width}x{args.height} -> {args.center_prior}")
        return 0

    if not args.fixations:
        raise InputError("saliency needs --fixations (or --center-prior)")
    kernel = make_kernel(sigma, truncation)

    if args.average:
        skip = int(_resolve(args, config, "skip_first"))
        ref_w = int(_resolve(args, config, "ref_width"))
        ref_h = int(_resolve(args, config, "ref_height"))
        frame_filter = None
        if args.frames_file:
            with open(args.frames_file) as f:
                frame_filter = {clip: set(frames)
                                for clip, frames in json.load(f).items()}
        acc = np.zeros((ref_h, ref_w))
        count = 0
        for path in args.fixations:
            cleaned = read_fixations(path)
            wanted = frame_filter.get(cleaned.clip_id) if frame_filter else None
            for f in range(skip, cleaned.frame_count):
                if wanted is not None and f not in wanted:
                    continue
                points = cleaned.frame_points(f)
                if not points:
                    continue
                blurred = blur_fixations(fixation_map_for_frame(cleaned, f), kernel)
                acc += to_reference_grid(blurred, ref_w, ref_h).values
                count += 1
        if count == 0:
            raise InputError("no frames remain after exclusion")
        write_map(args.average, acc / count)
        print(f"average of {count} frames -> {args.average}")
        return 0

    if not args.out_dir:
        raise InputError("per-frame saliency needs --out-dir")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    suffix = args.format
    written = 0
    for path in args.fixations:
        cleaned = read_fixations(path)
        if args.frames:
            lo, hi = (int(v) for v in args.frames.split(":"))
            frame_range = range(lo, min(hi, cleaned.frame_count))
        else:
            frame_range = range(cleaned.frame_count)
        for f in frame_range:
            if not cleaned.frame_points(f) and not args.frames:
                continue
            blurred = blur_fixations(fixation_map_for_frame(cleaned, f), kernel)
            write_map(out_dir / f"{f:06d}.{suffix}", blurred.values)
            written += 1
    print(f"{written} saliency maps -> {out_dir}")
    return 0


def cmd_ioc(args):
    config = _load_config(args)
    cfg = IocConfig(
        n=int(_resolve(args, config, "window")),
        sigma_px=float(_resolve(args, config, "sigma_px")),
        min_observers=int(_resolve(args, config, "min_observers")),
        truncation=float(_resolve(args, config, "truncation")),
    )
    meta = _load_meta(args.meta)
    cleaned = read_fixations(args.fixations)
    series = loo_window_ioc(cleaned, meta, cfg)
    echo = {"window": cfg.n, "sigma_px": cfg.sigma_px,
            "truncation": cfg.truncation, "min_observers": cfg.min_observers}
    write_ioc_series(series, args.out, meta=echo)
    print(f"{series.clip_id}: {len(series.values)} windows -> {args.out}")
    if args.summary:
        s = sequence_ioc_summary(series)
        with open(args.summary, "w") as f:
            json.dump({"clip_id": series.clip_id, "n": series.n, "mean": s.mean,
                       "median": s.median, "std": s.std, "count": s.count},
                      f, indent=2, sort_keys=True)
            f.write("\n")
        print(f"summary mean={s.mean:.4f} -> {args.summary}")
    if args.cut_drop:
        if not args.annotation:
            raise InputError("--cut-drop needs --annotation for the cut list")
        ann = parse_annotations(Path(args.annotation).read_text())
        records = cut_drop_analysis(
            series, cuts_of(ann),
            pre_frames=int(_resolve(args, config, "pre_frames")),
            post_frames=int(_resolve(args, config, "post_frames")))
        with open(args.cut_drop, "w") as f:
            f.write("cut,pre_mean,post_mean,drop,overlaps_context\n")
            for r in records:
                cells = [str(r.cut)] + ["" if v is None else repr(v)
                                        for v in (r.pre_mean, r.post_mean, r.drop)]
                f.write(",".join(cells) + f",{int(r.overlaps_context)}\n")
        print(f"{len(records)} cuts -> {args.cut_drop}")
    return 0


def cmd_bench(args):
    config = _load_config(args)
    sigma = float(_resolve(args, config, "sigma_px"))
    seed = int(_resolve(args, config, "auc_b_seed"))
    splits = int(_resolve(args, config, "auc_b_splits"))
    kernel = make_kernel(sigma, float(_resolve(args, config, "truncation")))
    cleaned = read_fixations(args.fixations)
    annotation = None
    if args.annotation:
        annotation = parse_annotations(Path(args.annotation).read_text())
    metric_set = ([m.strip() for m in args.metrics.split(",")]
                  if args.metrics else [m.value for m in Metric])
    result = benchmark_model(
        DirectoryPredictions(args.predictions), cleaned, kernel,
        annotation=annotation, metric_set=metric_set,
        aucb_seed=seed, aucb_splits=splits)
    echo = {"sigma_px": sigma, "auc_b_splits": splits,
            "metrics": ",".join(metric_set),
            "predictions": Path(args.predictions).name}
    emit_report(result.rows, args.out, meta=echo, aucb_seed=seed)
    print(f"{len(result.rows)} scores, {len(result.errors)} frame errors -> {args.out}")
    if args.errors_out and result.errors:
        with open(args.errors_out, "w") as f:
            f.write("frame_index,reason\n")
            for frame, reason in result.errors:
                f.write(f"{frame},{reason}\n")
    return 0


def cmd_stats(args):
    config = _load_config(args)
    out = {}
    if args.pairs:
        xs, ys = [], []
        with open(args.pairs) as f:
            header = None
            for line in f:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if header is None:
                    header = line.split(",")
                    ix, iy = header.index(args.x_col), header.index(args.y_col)
                    continue
                parts = line.split(",")
                xs.append(float(parts[ix]))
                ys.append(float(parts[iy]))
        r, p = pearson(xs, ys)
        out = {"test": "pearson", "x": args.x_col, "y": args.y_col,
               "n": len(xs), "r": r, "p": p}
    else:
        if not (args.scores and args.metric and args.partition):
            raise InputError("stats needs --scores/--metric/--partition or --pairs")
        rows = read_score_rows(args.scores)
        kind = PartitionKind(args.partition)
        groups: dict = {}
        for row in rows:
            if row.metric != args.metric:
                continue
            if kind is PartitionKind.MOTION:
                labels = row.motions
            elif kind is PartitionKind.ANGLE:
                labels = (row.angle,) if row.angle else ()
            else:
                labels = (row.size,) if row.size else ()
            for label in labels:
                groups.setdefault(label, []).append(row.value)
        usable = {k: v for k, v in sorted(groups.items()) if len(v) >= 2}
        if len(usable) < 2:
            raise InputError("fewer than two usable groups for ANOVA")
        res = one_way_anova(list(usable.values()), names=list(usable))
        pairwise = {}
        labels = list(usable)
        for i, a in enumerate(labels):
            for b in labels[i + 1:]:
                t, p = welch_t_test(usable[a], usable[b])
                pairwise[f"{a}|{b}"] = {"t": t, "p": p}
        out = {"test": "one_way_anova", "metric": args.metric,
               "partition": kind.value, "f": res.f, "p": res.p,
               "df_between": res.df_between, "df_within": res.df_within,
               "group_sizes": dict(zip(res.group_names, res.group_sizes)),
               "pairwise_welch": pairwise}
    with open(args.out, "w") as f:
        json.dump(out, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"stats -> {args.out}")
    return 0


def cmd_report(args):
    config = _load_config(args)
    fmt = ReportFormat(args.format)
    if args.bias:
        avg = SaliencyMap(read_map(args.average))
        prior = SaliencyMap(read_map(args.prior))
        record = bias_report(avg, prior)
        with open(args.out, "w") as f:
            json.dump({"cc_with_prior": record.cc_with_prior,
                       "peak_offset_px": list(record.peak_offset_px)},
                      f, indent=2, sort_keys=True)
            f.write("\n")
    elif args.shot_stats:
        fps = float(_resolve(args, config, "fps"))
        stats_rows = []
        for path in sorted(Path(args.shot_stats).glob("*.json")):
            ann = parse_annotations(path.read_text())
            stats_rows.append(shot_stats(ann, fps))
        if not stats_rows:
            raise InputError(f"no annotation documents under {args.shot_stats}")
        with open(args.out, "w") as f:
            f.write("clip_id,sequence_length_s,longest_s,shortest_s,average_s\n")
            for s in sorted(stats_rows, key=lambda s: s.average_s):
                f.write(f"{s.clip_id},{s.sequence_length_s!r},{s.longest_s!r},"
                        f"{s.shortest_s!r},{s.average_s!r}\n")
    else:
        if not args.scores:
            raise InputError("report needs --scores, --bias or --shot-stats")
        rows = read_score_rows(args.scores)
        seed = int(_resolve(args, config, "auc_b_seed"))
        if args.partition:
            data = aggregate_by_annotation(rows, PartitionKind(args.partition))
            echo = {"aggregate": args.partition}
        elif args.per_clip:
            data = per_clip_means(rows)
            echo = {"aggregate": "per_clip"}
        else:
            data = {"all": dataset_means(rows)}
            echo = {"aggregate": "dataset_means"}
        emit_report(data, args.out, fmt=fmt, meta=echo, aucb_seed=seed)
    print(f"report -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cinegaze",
        description="Eye-tracking analytics for film clips")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and clean raw gaze exports")
    p.add_argument("--gaze", required=True, help="raw gaze samples (delimited text)")
    p.add_argument("--meta", required=True, help="clip metadata JSON")
    p.add_argument("--colmap", help="column mapping descriptor JSON")
    p.add_argument("--min-valid-rate", type=float, dest="min_valid_rate")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("saliency", help="blur fixations into saliency maps")
    p.add_argument("--fixations", action="append", help="fixation file (repeatable)")
    p.add_argument("--out-dir", help="write one map per frame here")
    p.add_argument("--format", choices=("f32", "pgm"), default="f32")
    p.add_argument("--frames", help="frame range lo:hi for per-frame output")
    p.add_argument("--average", help="write the cross-clip average map here")
    p.add_argument("--frames-file", help="JSON {clip_id: [frames]} filter for --average")
    p.add_argument("--center-prior", help="write a centered Gaussian baseline here")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--sigma-px", type=float, dest="sigma_px")
    p.add_argument("--truncation", type=float)
    p.add_argument("--skip-first", type=int, dest="skip_first")
    p.add_argument("--ref-width", type=int, dest="ref_width")
    p.add_argument("--ref-height", type=int, dest="ref_height")
    p.add_argument("--sigma-fraction", type=float, dest="sigma_fraction")
    p.add_argument("--config")
    p.set_defaults(func=cmd_saliency)

    p = sub.add_parser("ioc", help="leave-one-out congruency series")
    p.add_argument("--fixations", required=True)
    p.add_argument("--meta", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=int, help="window size in frames (5 or 20)")
    p.add_argument("--sigma-px", type=float, dest="sigma_px")
    p.add_argument("--truncation", type=float)
    p.add_argument("--min-observers", type=int, dest="min_observers")
    p.add_argument("--summary", help="write a summary JSON here")
    p.add_argument("--cut-drop", dest="cut_drop", help="write per-cut drops here")
    p.add_argument("--annotation", help="annotation JSON (for --cut-drop)")
    p.add_argument("--pre-frames", type=int, dest="pre_frames")
    p.add_argument("--post-frames", type=int, dest="post_frames")
    p.add_argument("--config")
    p.set_defaults(func=cmd_ioc)

    p = sub.add_parser("bench", help="score prediction maps against ground truth")
    p.add_argument("--fixations", required=True)
    p.add_argument("--predictions", required=True, help="directory of per-frame maps")
    p.add_argument("--out", required=True)
    p.add_argument("--annotation")
    p.add_argument("--metrics", help="comma-separated subset of CC,SIM,AUC_J,AUC_B,NSS,KLD")
    p.add_argument("--sigma-px", type=float, dest="sigma_px")
    p.add_argument("--truncation", type=float)
    p.add_argument("--auc-b-seed", type=int, dest="auc_b_seed")
    p.add_argument("--auc-b-splits", type=int, dest="auc_b_splits")
    p.add_argument("--errors-out", dest="errors_out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stats", help="significance tests over score tables")
    p.add_argument("--scores", help="score table from bench")
    p.add_argument("--metric", help="metric column to test, e.g. NSS")
    p.add_argument("--partition", choices=[k.value for k in PartitionKind])
    p.add_argument("--pairs", help="CSV of paired series for --pearson style test")
    p.add_argument("--x-col", dest="x_col")
    p.add_argument("--y-col", dest="y_col")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("report", help="aggregate tables and bias records")
    p.add_argument("--scores")
    p.add_argument("--partition", choices=[k.value for k in PartitionKind])
    p.add_argument("--per-clip", action="store_true", dest="per_clip")
    p.add_argument("--bias", action="store_true")
    p.add_argument("--average", help="average map file (for --bias)")
    p.add_argument("--prior", help="center prior map file (for --bias)")
    p.add_argument("--shot-stats", dest="shot_stats",
                   help="directory of annotation JSONs for a shot length table")
    p.add_argument("--fps", type=float)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--auc-b-seed", type=int, dest="auc_b_seed")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CinegazeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
