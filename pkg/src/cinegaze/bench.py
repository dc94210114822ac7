"""Model benchmarking, annotation-conditioned aggregation, report files.

Scores are long-form rows (clip, frame, metric, value) joined with the
frame's editing labels. Dataset aggregates are unweighted means over
frames, so longer clips weigh more; per-clip means are also available for
transparency. Every report carries a metadata header with the tool
version, a hash of the run configuration, the KLD epsilon and the
AUC-Borji seed, so scores stay comparable across runs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from . import __version__
from .annotations import ClipAnnotation, PartitionKind, shot_at
from .core import SaliencyMap
from .errors import CinegazeError, InputError
from .gridio import read_map
from .ingest import CleanedFixations, fixation_map_for_frame
from .metrics import (KLD_EPSILON, Metric, auc_borji, auc_judd, cc, kld, nss,
                      sim)
from .saliency import GaussianKernel, blur_fixations, resize_bilinear

METRIC_ORDER = [m.value for m in
                (Metric.CC, Metric.SIM, Metric.AUC_J, Metric.AUC_B, Metric.NSS, Metric.KLD)]


@dataclass(frozen=True)
class ScoreRow:
    clip_id: str
    frame_index: int
    metric: str
    value: float
    motions: tuple = ()
    angle: str = ""
    size: str = ""


@dataclass
class BenchResult:
    rows: list
    errors: list  # of (frame_index, reason)


class DirectoryPredictions:
    """Prediction maps in a directory, one file per frame.

    Filenames are the zero-padded frame index plus a map extension:
    000042.f32 or 000042.pgm.
    """

    def __init__(self, path):
        self.path = Path(path)

    def load(self, frame: int) -> np.ndarray:
        for name in (f"{frame:06d}.f32", f"{frame:06d}.pgm"):
            p = self.path / name
            if p.exists():
                return read_map(p)
        raise FileNotFoundError(f"no prediction for frame {frame} under {self.path}")


def _load_prediction(predictions, frame: int) -> np.ndarray:
    if hasattr(predictions, "load"):
        return predictions.load(frame)
    if isinstance(predictions, Mapping):
        if frame not in predictions:
            raise FileNotFoundError(f"no prediction for frame {frame}")
        return np.asarray(predictions[frame], dtype=float)
    raise InputError("predictions must expose .load(frame) or be a frame mapping")


def benchmark_model(predictions, cleaned: CleanedFixations, kernel: GaussianKernel,
                    *, annotation: Optional[ClipAnnotation] = None,
                    metric_set: Sequence[str] = tuple(METRIC_ORDER),
                    aucb_seed: int = 0, aucb_splits: int = 100,
                    negatives_per_fixation: int = 1,
                    frames: Optional[Sequence[int]] = None) -> BenchResult:
    """Score per-frame prediction maps against the clip's ground truth.

    Ground truth per frame is the pooled binary fixation map (location
    metrics) and its Gaussian blur (distribution metrics). Predictions at
    a different resolution are resampled bilinearly onto the ground-truth
    grid. Frames whose prediction is missing or unreadable, and metrics
    undefined on a frame, become error entries; the run continues.

    When ``frames`` is omitted, every frame with at least one fixation is
    evaluated. AUC-Borji uses a per-frame generator seeded with
    aucb_seed + frame_index.
    """
    metric_set = [Metric(m).value for m in metric_set]
    if frames is None:
        frames = [f for f in range(cleaned.frame_count) if cleaned.frame_points(f)]
    rows = []
    errors = []
    for f in frames:
        points = cleaned.frame_points(f)
        if not points:
            errors.append((f, "no fixations on frame"))
            continue
        fmap = fixation_map_for_frame(cleaned, f)
        gt_blur = blur_fixations(fmap, kernel)
        try:
            pred = _load_prediction(predictions, f)
            if pred.shape != gt_blur.values.shape:
                pred = resize_bilinear(pred, cleaned.width, cleaned.height)
            pred_map = SaliencyMap(np.maximum(pred, 0.0))
        except (OSError, CinegazeError, ValueError) as exc:
            errors.append((f, f"prediction unusable: {exc}"))
            continue
        if annotation is not None:
            shot = shot_at(annotation, f)
            motions = tuple(sorted(m.value for m in shot.motions))
            angle = shot.angle.value
            size = shot.size.value
        else:
            motions, angle, size = (), "", ""
        for name in metric_set:
            try:
                if name == Metric.CC.value:
                    value = cc(pred_map, gt_blur)
                elif name == Metric.SIM.value:
                    value = sim(pred_map, gt_blur)
                elif name == Metric.AUC_J.value:
                    value = auc_judd(pred_map, fmap)
                elif name == Metric.AUC_B.value:
                    value = auc_borji(pred_map, fmap, negatives_per_fixation,
                                      aucb_splits, seed=aucb_seed + f)
                elif name == Metric.NSS.value:
                    value = nss(pred_map, fmap)
                else:
                    value = kld(pred_map, gt_blur)
            except CinegazeError as exc:
                errors.append((f, f"{name}: {exc}"))
                continue
            rows.append(ScoreRow(cleaned.clip_id, f, name, value, motions, angle, size))
    return BenchResult(rows, errors)


def _sorted_rows(rows: Sequence[ScoreRow]) -> list:
    return sorted(rows, key=lambda r: (r.clip_id, r.frame_index, r.metric))


def dataset_means(rows: Sequence[ScoreRow]) -> dict:
    """Unweighted per-metric mean over all rows (frames weigh equally)."""
    sums: dict = {}
    counts: dict = {}
    for row in _sorted_rows(rows):
        sums[row.metric] = sums.get(row.metric, 0.0) + row.value
        counts[row.metric] = counts.get(row.metric, 0) + 1
    return {m: sums[m] / counts[m] for m in sums}


def per_clip_means(rows: Sequence[ScoreRow]) -> dict:
    out: dict = {}
    for row in _sorted_rows(rows):
        bucket = out.setdefault(row.clip_id, {})
        total, count = bucket.get(row.metric, (0.0, 0))
        bucket[row.metric] = (total + row.value, count + 1)
    return {clip: {m: t / c for m, (t, c) in metrics.items()}
            for clip, metrics in out.items()}


def aggregate_by_annotation(rows: Sequence[ScoreRow], kind) -> dict:
    """Per-label per-metric means.

    Motion is multi-label: a frame's scores count toward every motion of
    its shot. Labels with no rows are simply absent. Rows without labels
    (scored with no annotation) are excluded.
    """
    kind = PartitionKind(kind)
    sums: dict = {}
    counts: dict = {}
    for row in _sorted_rows(rows):
        if kind is PartitionKind.MOTION:
            labels = row.motions
        elif kind is PartitionKind.ANGLE:
            labels = (row.angle,) if row.angle else ()
        else:
            labels = (row.size,) if row.size else ()
        for label in labels:
            key = (label, row.metric)
            sums[key] = sums.get(key, 0.0) + row.value
            counts[key] = counts.get(key, 0) + 1
    out: dict = {}
    for (label, metric), total in sums.items():
        out.setdefault(label, {})[metric] = total / counts[(label, metric)]
    return out


@dataclass(frozen=True)
class BiasRecord:
    cc_with_prior: float
    peak_offset_px: tuple  # (dx, dy) of the average map's argmax from center


def bias_report(avg: SaliencyMap, prior: SaliencyMap) -> BiasRecord:
    """Correlation of an average map with a center prior, plus the offset
    of the average map's density peak from the geometric center.

    Ties in the argmax resolve to the first pixel in row-major order.
    """
    correlation = cc(avg, prior)
    iy, ix = np.unravel_index(int(np.argmax(avg.values)), avg.values.shape)
    dx = ix - (avg.width - 1) / 2.0
    dy = iy - (avg.height - 1) / 2.0
    return BiasRecord(correlation, (dx, dy))


def read_score_rows(path) -> list:
    """Read back a delimited score table written by emit_report."""
    rows = []
    with open(path) as f:
        header = None
        for line in f:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
                expected = ["clip_id", "frame_index", "metric", "value",
                            "motions", "angle", "size"]
                if header != expected:
                    raise InputError(f"{path}: not a score table (columns {header})")
                continue
            clip, frame, metric, value, motions, angle, size = line.split(",")
            rows.append(ScoreRow(clip, int(frame), metric, float(value),
                                 tuple(m for m in motions.split("|") if m),
                                 angle, size))
    if header is None:
        raise InputError(f"{path}: empty score table")
    return rows


class ReportFormat(str, Enum):
    DELIMITED = "csv"
    STRUCTURED = "json"


def _config_hash(meta: Mapping) -> str:
    canonical = json.dumps(meta, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _report_meta(meta: Optional[Mapping], aucb_seed) -> dict:
    merged = {
        "tool_version": __version__,
        "kld_epsilon": repr(KLD_EPSILON),
        "aucb_seed": "" if aucb_seed is None else str(aucb_seed),
    }
    if meta:
        merged.update({str(k): str(v) for k, v in meta.items()})
    merged["config_hash"] = _config_hash(merged)
    return merged


def emit_report(data, path, fmt: ReportFormat = ReportFormat.DELIMITED,
                meta: Optional[Mapping] = None, aucb_seed=None) -> None:
    """Write a score table or an aggregate as a deterministic report file.

    ``data`` is either a sequence of ScoreRow or a mapping label ->
    {metric: value}. Column order and row sort are fixed; rerunning on the
    same input produces a byte-identical file.
    """
    fmt = ReportFormat(fmt)
    header = _report_meta(meta, aucb_seed)
    if isinstance(data, Mapping):
        if not data:
            raise InputError("refusing to emit an empty report")
        metrics_present = {m for row in data.values() for m in row}
        columns = [m for m in METRIC_ORDER if m in metrics_present]
        columns += sorted(metrics_present - set(columns))
        table = [{"label": label,
                  **{m: data[label].get(m) for m in columns}}
                 for label in sorted(data)]
        field_names = ["label"] + columns
    else:
        rows = _sorted_rows(data)
        if not rows:
            raise InputError("refusing to emit an empty report")
        table = [{"clip_id": r.clip_id, "frame_index": r.frame_index,
                  "metric": r.metric, "value": r.value,
                  "motions": "|".join(r.motions), "angle": r.angle, "size": r.size}
                 for r in rows]
        field_names = ["clip_id", "frame_index", "metric", "value",
                       "motions", "angle", "size"]

    def cell(v):
        if v is None:
            return ""
        if isinstance(v, float):
            return repr(v)
        return str(v)

    with open(path, "w") as f:
        if fmt is ReportFormat.DELIMITED:
            for key in sorted(header):
                f.write(f"# {key}={header[key]}\n")
            f.write(",".join(field_names) + "\n")
            for entry in table:
                f.write(",".join(cell(entry[name]) for name in field_names) + "\n")
        else:
            json.dump({"meta": header, "columns": field_names, "rows": table},
                      f, indent=2, sort_keys=True)
            f.write("\n")
