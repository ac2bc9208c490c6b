"""End-to-end encode, detect and benchmark runs, and gain sweeps over them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .detection import ConfusionCounts, NoiseBand, benchmark, detect, noise_band
from .device import Memristor
from .encoder import EncoderConfig, MeasurementLog, bin_changes, drive_and_measure, preprocess
from .errors import InvalidInputError, MemspikeError, PipelineError
from .recording import Recording
from .synth import ReferenceConfig, indices_to_bins, reference_detect


@dataclass
class PipelineResult:
    log: MeasurementLog
    bins: list
    noise: list
    band: NoiseBand
    spikes: list
    quadrants: list
    reference: list | None = None
    counts: ConfusionCounts | None = None


def run_pipeline(recording: Recording, device: Memristor, enc: EncoderConfig,
                 ref: ReferenceConfig | None = None, mode: str | None = None,
                 v_th: float | None = None) -> PipelineResult:
    """Pre-process, drive, bin, detect and (optionally) score one recording.

    ``mode`` and ``v_th`` default to the device's regime and negative threshold.
    The reference detector always runs on the raw recording.
    """
    mode = mode or device.params.regime
    v_th = device.params.v_th_neg if v_th is None else v_th
    driven = preprocess(recording, enc.gain, enc.offset)
    log = drive_and_measure(device, driven, enc)
    bins, noise = bin_changes(log, driven)
    band = noise_band(noise, mode)
    spikes, quadrants = detect(bins, band, v_th)
    result = PipelineResult(log, bins, noise, band, spikes, quadrants)
    if ref is not None:
        indices = reference_detect(recording, ref)
        result.reference = indices_to_bins(indices, [b.span for b in bins])
        result.counts = benchmark(spikes, result.reference)
    return result


@dataclass(frozen=True)
class RocPoint:
    gain: float
    repeat: int
    seed: int
    counts: ConfusionCounts


@dataclass(frozen=True)
class RocSummary:
    gain: float
    mean_tpr: float
    mean_fpr: float
    points: tuple


def run_seeds(seed: int, repeats: int) -> list[int]:
    """Per-repeat device seeds derived from the master seed.

    The same seeds are reused at every gain, so gain comparisons see identical
    device noise (common random numbers).
    """
    children = np.random.SeedSequence(seed).spawn(repeats)
    return [int(c.generate_state(1)[0]) for c in children]


def roc_sweep(recording: Recording, device_factory: Callable[[int], Memristor], gains,
              v_off: float = 0.0, repeats: int = 5, seed: int = 0,
              enc: EncoderConfig | None = None, ref: ReferenceConfig | None = None,
              mode: str | None = None, v_th: float | None = None) -> list[RocSummary]:
    """Run the scored pipeline ``repeats`` times per gain on fresh seeded devices."""
    gains = list(gains)
    if not gains:
        raise InvalidInputError("at least one gain is required")
    if repeats < 1:
        raise InvalidInputError("repeats must be >= 1")
    enc = enc or EncoderConfig()
    ref = ref or ReferenceConfig()
    seeds = run_seeds(seed, repeats)
    out = []
    for g in gains:
        cfg = EncoderConfig(gain=g, offset=v_off, batch_size=enc.batch_size,
                            read_stride=enc.read_stride, v_read=enc.v_read,
                            pulse_width=enc.pulse_width)
        points = []
        for rep, s in enumerate(seeds):
            try:
                res = run_pipeline(recording, device_factory(s), cfg, ref, mode, v_th)
            except MemspikeError as exc:
                raise PipelineError(str(exc), gain=g, repeat=rep) from exc
            points.append(RocPoint(g, rep, s, res.counts))
        tprs = [p.counts.tpr for p in points]
        fprs = [p.counts.fpr for p in points]
        out.append(RocSummary(g, _nanmean(tprs), _nanmean(fprs), tuple(points)))
    return out


def _nanmean(values) -> float:
    arr = np.asarray(values, dtype=float)
    if np.all(np.isnan(arr)):
        return float("nan")
    return float(np.nanmean(arr))
