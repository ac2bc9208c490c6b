"""Batch biasing of a device with a recording, and per-bin change extraction.

The pre-processed recording is fed to the device in batches. Inside a batch the
device is read when the batch opens, every ``read_stride`` samples and at the
batch end, and a single baseline read precedes the whole run. With the defaults
(1000-sample batches, stride 300) a batch yields five reads and four bins, and
63 000 samples compress to 1 + 5*63 = 316 reads. The baseline and the first
batch-start read enclose no samples and form neither a bin nor a noise pair.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .device import Memristor
from .errors import InvalidInputError, PerturbingReadError
from .recording import Recording

BASELINE = "baseline"
INTRA = "intra_batch"
BATCH_END = "batch_end"
BATCH_START = "batch_start"


@dataclass(frozen=True)
class EncoderConfig:
    gain: float = 1.0
    offset: float = 0.0
    batch_size: int = 1000
    read_stride: int = 300
    v_read: float = 0.2
    # width of the write pulse carrying each sample; None = whole sample period
    pulse_width: float | None = 1e-6

    def __post_init__(self):
        if not 0 < self.read_stride < self.batch_size:
            raise InvalidInputError("need batch_size > read_stride > 0")
        if not (math.isfinite(self.gain) and self.gain != 0 and math.isfinite(self.offset)):
            raise InvalidInputError("gain must be finite and nonzero, offset finite")
        if self.pulse_width is not None and not self.pulse_width > 0:
            raise InvalidInputError("pulse_width must be > 0")


class Measurement(NamedTuple):
    sample_index: int
    r: float
    kind: str


class MeasurementLog(list):
    """Ordered list of :class:`Measurement`."""

    @property
    def n_samples(self) -> int:
        return self[-1].sample_index if self else 0

    def resistances(self) -> np.ndarray:
        return np.array([m.r for m in self])

    def of_kind(self, kind: str) -> list[Measurement]:
        return [m for m in self if m.kind == kind]


@dataclass(frozen=True)
class BinRecord:
    start: int
    end: int  # exclusive
    r_before: float
    r_after: float
    delta_rel: float
    v_peak: float
    is_noise_pair: bool = False

    @property
    def span(self) -> tuple[int, int]:
        return self.start, self.end


def preprocess(rec: Recording, gain: float, offset: float) -> Recording:
    """Apply the gain/offset stage sample-wise: ``gain * v + offset``."""
    if not (math.isfinite(gain) and gain != 0):
        raise InvalidInputError("gain must be finite and nonzero")
    return rec.with_samples(gain * rec.samples + offset)


def batch_read_offsets(length: int, cfg: EncoderConfig) -> list[int]:
    """Offsets (within a batch of ``length`` samples) after which the device is read."""
    offsets = list(range(cfg.read_stride, length, cfg.read_stride))
    return offsets + [length]


def drive_and_measure(device: Memristor, rec: Recording, cfg: EncoderConfig) -> MeasurementLog:
    """Feed the (already pre-processed) recording through ``device`` batch by batch.

    The stream pauses while the device is read; reads consume no samples.
    A trailing partial batch is processed with whichever reads it reaches and
    closed with a batch-end read.
    """
    samples = rec.samples
    n = samples.size
    if n == 0:
        raise InvalidInputError("empty recording")
    if abs(cfg.v_read) >= device.params.read_limit:
        raise PerturbingReadError(f"v_read={cfg.v_read} V would write to the device")
    period = 1.0 / rec.fs
    pulse = cfg.pulse_width
    if pulse is not None and pulse > period:
        raise InvalidInputError(f"pulse_width {pulse} s exceeds the sample period {period} s")

    log = MeasurementLog()
    log.append(Measurement(0, device.read(cfg.v_read), BASELINE))
    for start in range(0, n, cfg.batch_size):
        length = min(cfg.batch_size, n - start)
        log.append(Measurement(start, device.read(cfg.v_read), BATCH_START))
        done = 0
        offsets = batch_read_offsets(length, cfg)
        for off in offsets:
            device.drive(samples[start + done:start + off], period, pulse)
            done = off
            kind = BATCH_END if off == length else INTRA
            log.append(Measurement(start + off, device.read(cfg.v_read), kind))
    return log


def bin_changes(log: MeasurementLog, rec: Recording):
    """Split consecutive read pairs into signal bins and noise pairs.

    Returns ``(bins, noise)``. A signal bin spans the samples between two reads
    and carries ``(R_after - R_before) / R_before`` and the signed sample of
    largest magnitude in its span. A noise pair is a batch-end read followed by
    the next batch-start read; no samples separate them and ``v_peak`` is 0.
    """
    if len(log) < 2:
        raise InvalidInputError("measurement log needs at least two reads")
    if log[-1].sample_index != len(rec):
        raise InvalidInputError(
            f"log covers {log[-1].sample_index} samples but the recording has {len(rec)}")
    samples = rec.samples
    bins, noise = [], []
    for a, b in zip(log[:-1], log[1:]):
        if b.sample_index < a.sample_index:
            raise InvalidInputError("measurement indices must be non-decreasing")
        delta = (b.r - a.r) / a.r
        if a.kind == BATCH_END and b.kind == BATCH_START:
            noise.append(BinRecord(a.sample_index, b.sample_index, a.r, b.r, delta, 0.0, True))
        elif b.sample_index > a.sample_index:
            seg = samples[a.sample_index:b.sample_index]
            v_peak = float(seg[np.argmax(np.abs(seg))])
            bins.append(BinRecord(a.sample_index, b.sample_index, a.r, b.r, delta, v_peak, False))
    return bins, noise


BIN_COLUMNS = ["start_index", "end_index", "r_before_ohm", "r_after_ohm", "delta_rel",
               "v_peak_volt", "is_noise_pair"]


def write_bins_csv(path, bins, noise=(), extra_columns=None):
    """Write bins then noise pairs in the documented column order.

    ``extra_columns`` maps column name to a per-row sequence covering
    ``bins + noise`` in that order.
    """
    rows = list(bins) + list(noise)
    extra_columns = extra_columns or {}
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(BIN_COLUMNS + list(extra_columns))
        for i, b in enumerate(rows):
            w.writerow([b.start, b.end, repr(b.r_before), repr(b.r_after), repr(b.delta_rel),
                        repr(b.v_peak), int(b.is_noise_pair)]
                       + [col[i] for col in extra_columns.values()])


def write_log_csv(path, log: MeasurementLog):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["sample_index", "r_ohm", "kind"])
        for m in log:
            w.writerow([m.sample_index, repr(m.r), m.kind])
