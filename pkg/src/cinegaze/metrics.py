"""Saliency evaluation metrics.

Six classic scores between a predicted map and ground truth: CC, SIM,
AUC-Judd, AUC-Borji, NSS and KLD. Location-based metrics (NSS, both AUCs)
take a binary fixation map as ground truth; distribution-based metrics
(CC, SIM, KLD) compare two real-valued maps.

Conventions pinned here and echoed in report headers:

* NSS z-scores with the population standard deviation (the map is the
  whole population, not a sample);
* AUC thresholds use >= comparisons on both axes, so ties score at chance
  and a constant map gets exactly 0.5;
* KLD(P, Q) treats Q as ground truth and regularizes only the prediction:
  sum Q * log(Q / (P + eps)) on unit-sum maps, eps = 1e-7.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import FixationMap
from .errors import InputError, UndefinedValueError

KLD_EPSILON = 1e-7


class Metric(str, Enum):
    CC = "CC"
    SIM = "SIM"
    AUC_J = "AUC_J"
    AUC_B = "AUC_B"
    NSS = "NSS"
    KLD = "KLD"


@dataclass(frozen=True)
class MetricValue:
    metric: Metric
    value: float
    frame_index: int


def _grid(m) -> np.ndarray:
    """Accept a SaliencyMap or a bare 2-D array."""
    v = np.asarray(getattr(m, "values", m), dtype=float)
    if v.ndim != 2:
        raise InputError("expected a 2-D map")
    return v


def _paired(p, q):
    pv, qv = _grid(p), _grid(q)
    if pv.shape != qv.shape:
        raise InputError(f"map dimensions differ: {pv.shape} vs {qv.shape}")
    return pv, qv


def _fixation_mask(f: FixationMap, shape) -> np.ndarray:
    if (f.height, f.width) != shape:
        raise InputError(
            f"fixation map is {f.width}x{f.height}, saliency map is {shape[1]}x{shape[0]}")
    mask = np.zeros(shape, dtype=bool)
    for (x, y) in f.points:
        mask[y, x] = True
    return mask


def cc(p, q) -> float:
    """Pearson correlation over pixels treated as paired observations.

    Undefined when both maps are constant. When exactly one map is
    constant the correlation carries no signal and 0.0 is returned.
    """
    pv, qv = _paired(p, q)
    dp = pv - pv.mean()
    dq = qv - qv.mean()
    sp = float(np.sqrt((dp * dp).sum()))
    sq = float(np.sqrt((dq * dq).sum()))
    if sp == 0.0 and sq == 0.0:
        raise UndefinedValueError("cc undefined: both maps are constant")
    if sp == 0.0 or sq == 0.0:
        return 0.0
    r = float((dp * dq).sum()) / (sp * sq)
    return min(1.0, max(-1.0, r))


def sim(p, q) -> float:
    """Histogram intersection: sum of pixelwise minima of unit-sum maps."""
    pv, qv = _paired(p, q)
    ps, qs = float(pv.sum()), float(qv.sum())
    if ps <= 0 or qs <= 0:
        raise InputError("sim requires maps with positive total mass")
    return float(np.minimum(pv / ps, qv / qs).sum())


def nss(s, f: FixationMap) -> float:
    """Normalized scanpath saliency: mean z-scored value at fixated pixels."""
    sv = _grid(s)
    if len(f.points) == 0:
        raise InputError("nss requires at least one fixation")
    mask = _fixation_mask(f, sv.shape)
    mu = float(sv.mean())
    sd = float(sv.std())  # population standard deviation
    if sd == 0.0:
        raise UndefinedValueError("nss undefined: saliency map is constant")
    return float(((sv[mask] - mu) / sd).mean())


def _roc_area(fix_vals: np.ndarray, neg_vals: np.ndarray) -> float:
    """Trapezoidal ROC area, thresholds swept over the fixation values.

    True positive rate: fraction of fixations at or above the threshold.
    False positive rate: fraction of negatives at or above the threshold.
    Counts are exact integers so the ROC points are reproducible bit for
    bit; the trapezoid is accumulated sequentially for the same reason.
    """
    nfix = fix_vals.size
    nneg = neg_vals.size
    fix_sorted = np.sort(fix_vals)
    neg_sorted = np.sort(neg_vals)
    thresholds = fix_sorted[::-1]
    tp = [0.0]
    fp = [0.0]
    for t in thresholds:
        n_tp = nfix - int(np.searchsorted(fix_sorted, t, side="left"))
        n_fp = nneg - int(np.searchsorted(neg_sorted, t, side="left"))
        tp.append(n_tp / nfix)
        fp.append(n_fp / nneg)
    tp.append(1.0)
    fp.append(1.0)
    area = 0.0
    for i in range(1, len(tp)):
        area += (fp[i] - fp[i - 1]) * (tp[i] + tp[i - 1]) / 2.0
    return area


def _auc_inputs(s, f: FixationMap):
    sv = _grid(s)
    mask = _fixation_mask(f, sv.shape)
    nfix = int(mask.sum())
    if nfix == 0:
        raise InputError("AUC requires at least one fixation")
    if nfix == mask.size:
        raise InputError("AUC requires at least one non-fixated pixel")
    return sv[mask], sv[~mask]


def auc_judd(s, f: FixationMap) -> float:
    """AUC with every non-fixated pixel serving as a negative."""
    fix_vals, nonfix_vals = _auc_inputs(s, f)
    return _roc_area(fix_vals, nonfix_vals)


def auc_borji(s, f: FixationMap, negatives_per_fixation: int = 1,
              splits: int = 100, *, seed: int) -> float:
    """AUC against random negatives, averaged over seeded resampling splits.

    Each split draws ``len(f) * negatives_per_fixation`` negative locations
    uniformly (with replacement) from the non-fixated pixels, using a
    generator owned by this call. Identical inputs and seed give a
    bit-identical result.
    """
    if negatives_per_fixation < 1:
        raise InputError("negatives_per_fixation must be >= 1")
    if splits < 1:
        raise InputError("splits must be >= 1")
    fix_vals, nonfix_vals = _auc_inputs(s, f)
    n_neg = fix_vals.size * negatives_per_fixation
    rng = np.random.default_rng(seed)
    total = 0.0
    for _ in range(splits):
        idx = rng.integers(0, nonfix_vals.size, size=n_neg)
        total += _roc_area(fix_vals, nonfix_vals[idx])
    return total / splits


def kld(p, q, epsilon: float = KLD_EPSILON) -> float:
    """Kullback-Leibler divergence of ground truth Q from prediction P.

    Both maps are normalized to unit sum; epsilon regularizes P inside the
    logarithm so empty predicted regions stay finite. 0 * log(0/.) is 0.
    """
    pv, qv = _paired(p, q)
    ps, qs = float(pv.sum()), float(qv.sum())
    if ps <= 0 or qs <= 0:
        raise InputError("kld requires maps with positive total mass")
    pn = pv / ps
    qn = qv / qs
    support = qn > 0
    return float((qn[support] * (np.log(qn[support]) - np.log(pn[support] + epsilon))).sum())
