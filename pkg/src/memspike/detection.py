"""Noise-band estimation, spike classification and benchmarking.

Volatile mode: a device relaxing back after a spike produces positive changes,
so positive noise-pair changes are dropped, the remaining magnitudes give
``threshold = mean + 2*std``, and a bin is a spike iff its change falls below
``-threshold``. Non-volatile mode uses the signed noise distribution and a
``mean +/- 3*std`` band on both sides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .device import NONVOLATILE, VOLATILE
from .errors import InsufficientNoiseError, InvalidInputError

VOLATILE_SIGMAS = 2.0
NONVOLATILE_SIGMAS = 3.0

TP, FP, FN, TN = "TP", "FP", "FN", "TN"


@dataclass(frozen=True)
class NoiseBand:
    mode: str
    threshold_neg: float
    threshold_pos: float | None = None
    n_used: int = 0
    center: float = 0.0  # non-volatile only: band mean

    def __post_init__(self):
        if self.mode not in (VOLATILE, NONVOLATILE):
            raise InvalidInputError(f"unknown mode {self.mode!r}")
        if self.threshold_neg < 0 or (self.threshold_pos is not None and self.threshold_pos < 0):
            raise InvalidInputError("noise-band thresholds must be >= 0")
        if self.mode == VOLATILE and self.threshold_pos is not None:
            raise InvalidInputError("volatile band has no positive threshold")

    def is_significant(self, delta: float) -> bool:
        if self.mode == VOLATILE:
            return delta < -self.threshold_neg
        return (delta < self.center - self.threshold_neg
                or delta > self.center + self.threshold_pos)

    def to_dict(self) -> dict:
        return {"mode": self.mode, "threshold_neg": self.threshold_neg,
                "threshold_pos": self.threshold_pos, "center": self.center,
                "n_used": self.n_used}


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise InvalidInputError("confusion counts must be >= 0")

    @property
    def tpr(self) -> float:
        """True-positive rate in percent; NaN without reference positives."""
        pos = self.tp + self.fn
        return 100.0 * self.tp / pos if pos else math.nan

    @property
    def fpr(self) -> float:
        """False-positive rate in percent; NaN without reference negatives."""
        neg = self.fp + self.tn
        return 100.0 * self.fp / neg if neg else math.nan

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict:
        def clean(x):
            return None if math.isnan(x) else x
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
                "tpr": clean(self.tpr), "fpr": clean(self.fpr),
                "tpr_2dp": clean(truncate(self.tpr)), "fpr_2dp": clean(truncate(self.fpr))}


def truncate(percent: float, decimals: int = 2) -> float:
    """Cut (not round) a percentage to ``decimals`` places, matching two-decimal reference rates."""
    if math.isnan(percent):
        return percent
    scale = 10 ** decimals
    # tolerate representation error just below a boundary, e.g. 65.0 stored as 64.99999...
    return math.floor(percent * scale + 1e-9) / scale


def _deltas(noise):
    return np.array([n.delta_rel if hasattr(n, "delta_rel") else float(n) for n in noise], dtype=float)


def noise_band(noise, mode: str = VOLATILE) -> NoiseBand:
    """Estimate the significance band from noise pairs (BinRecords or plain floats)."""
    d = _deltas(noise)
    if mode == VOLATILE:
        neg = np.abs(d[d <= 0])
        if neg.size < 2:
            raise InsufficientNoiseError(
                f"only {neg.size} non-positive noise measurements; at least 2 are needed "
                "(use a longer recording so more batch boundaries are available)")
        thr = float(neg.mean() + VOLATILE_SIGMAS * neg.std(ddof=1))
        return NoiseBand(VOLATILE, threshold_neg=thr, n_used=int(neg.size))
    if mode == NONVOLATILE:
        if d.size < 2:
            raise InsufficientNoiseError("at least 2 noise measurements are needed")
        half = float(NONVOLATILE_SIGMAS * d.std(ddof=1))
        return NoiseBand(NONVOLATILE, threshold_neg=half, threshold_pos=half,
                         n_used=int(d.size), center=float(d.mean()))
    raise InvalidInputError(f"unknown mode {mode!r}")


def _is_supra(v_peak, v_th, mode):
    if mode == VOLATILE:
        return v_peak < v_th if v_th < 0 else v_peak > v_th
    return abs(v_peak) > abs(v_th)


def detect(bins, band: NoiseBand, v_th: float):
    """Classify bins as spikes and label each against the stimulus threshold.

    Returns ``(spikes, quadrants)``. A significant bin whose peak voltage is
    beyond ``v_th`` is TP, significant but not beyond is FP, insignificant but
    beyond is FN, and the rest TN. These labels describe the stimulus, not the
    benchmark; see :func:`benchmark` for the latter.
    """
    spikes, quadrants = [], []
    for b in bins:
        sig = band.is_significant(b.delta_rel)
        supra = _is_supra(b.v_peak, v_th, band.mode)
        spikes.append(sig)
        quadrants.append((TP if supra else FP) if sig else (FN if supra else TN))
    return spikes, quadrants


def benchmark(ours, reference) -> ConfusionCounts:
    """Per-bin agreement between our spike flags and a reference detector's."""
    ours = np.asarray(ours, dtype=bool)
    reference = np.asarray(reference, dtype=bool)
    if ours.shape != reference.shape or ours.ndim != 1:
        raise InvalidInputError(f"length mismatch: {ours.shape} vs {reference.shape}")
    return ConfusionCounts(
        tp=int(np.sum(ours & reference)),
        fp=int(np.sum(ours & ~reference)),
        tn=int(np.sum(~ours & ~reference)),
        fn=int(np.sum(~ours & reference)),
    )
