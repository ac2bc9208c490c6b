"""Voltage recordings and their on-disk formats.

Two formats are supported (see ``docs/formats.md``):

* text: ``# key=value`` header lines followed by one decimal voltage per line;
* binary: raw little-endian float32 samples plus a ``<path>.meta`` sidecar
  holding the same ``key=value`` pairs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, RecordingFormatError

log = logging.getLogger(__name__)

DEFAULT_FS = 12200.0
FRONT_END_RANGE = 0.5  # V


@dataclass(frozen=True, eq=False)
class Recording:
    samples: np.ndarray
    fs: float = DEFAULT_FS
    ground_truth: tuple[int, ...] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise InvalidInputError("recording needs a non-empty 1-D sample array")
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("recording samples must be finite")
        if not (self.fs > 0 and math.isfinite(self.fs)):
            raise InvalidInputError("fs must be positive")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        if self.ground_truth is not None:
            gt = tuple(int(i) for i in self.ground_truth)
            if any(i < 0 or i >= samples.size for i in gt):
                raise InvalidInputError("ground-truth index outside the recording")
            object.__setattr__(self, "ground_truth", gt)

    def __len__(self):
        return self.samples.size

    def __eq__(self, other):
        if not isinstance(other, Recording):
            return NotImplemented
        return (self.fs == other.fs and self.ground_truth == other.ground_truth
                and np.array_equal(self.samples, other.samples))

    @property
    def duration(self) -> float:
        return self.samples.size / self.fs

    def with_samples(self, samples) -> "Recording":
        return replace(self, samples=samples)

    def check_front_end_range(self, limit: float = FRONT_END_RANGE) -> bool:
        """Warn (and return False) when raw samples exceed the front-end range."""
        peak = float(np.max(np.abs(self.samples)))
        if peak > limit:
            log.warning("raw recording peaks at %.3f V, beyond the +/-%.1f V front-end range", peak, limit)
            return False
        return True


def _header_lines(rec: Recording) -> list[str]:
    fs = int(rec.fs) if float(rec.fs).is_integer() else repr(float(rec.fs))
    lines = [f"fs_hz={fs}"]
    if rec.ground_truth is not None:
        lines.append("ground_truth=" + ",".join(str(i) for i in rec.ground_truth))
    return lines


def _parse_header(pairs, source):
    """``pairs`` is an iterable of ``(line_number, text)`` holding ``key=value``."""
    meta = {}
    for lineno, text in pairs:
        if "=" not in text:
            raise RecordingFormatError(f"{source}: malformed header {text!r}, expected key=value", lineno)
        key, value = (part.strip() for part in text.split("=", 1))
        meta[key] = (value, lineno)
    if "fs_hz" not in meta:
        raise RecordingFormatError(f"{source}: missing required header key 'fs_hz'")
    value, lineno = meta.pop("fs_hz")
    try:
        fs = float(value)
    except ValueError:
        raise RecordingFormatError(f"{source}: fs_hz={value!r} is not a number", lineno) from None
    if not (fs > 0 and math.isfinite(fs)):
        raise RecordingFormatError(f"{source}: fs_hz must be positive", lineno)
    gt = None
    if "ground_truth" in meta:
        value, lineno = meta.pop("ground_truth")
        try:
            gt = tuple(int(x) for x in value.split(",") if x.strip()) if value else ()
        except ValueError:
            raise RecordingFormatError(f"{source}: ground_truth must be comma-separated integers",
                                       lineno) from None
    extra = {k: v for k, (v, _) in meta.items()}
    return fs, gt, extra


def save_recording(rec: Recording, path, fmt: str | None = None):
    """Write ``rec`` as text (default) or ``fmt="binary"``.

    Text stores every sample with 17 significant digits, so float64 values
    round-trip exactly. Binary stores float32.
    """
    path = Path(path)
    fmt = fmt or ("binary" if path.suffix in (".f32", ".bin") else "text")
    if fmt == "text":
        with open(path, "w") as f:
            for line in _header_lines(rec):
                f.write(f"# {line}\n")
            for v in rec.samples.tolist():
                f.write(f"{v:.17g}\n")
    elif fmt == "binary":
        rec.samples.astype("<f4").tofile(path)
        with open(str(path) + ".meta", "w") as f:
            for line in _header_lines(rec):
                f.write(line + "\n")
    else:
        raise InvalidInputError(f"unknown recording format {fmt!r}")


def load_recording(path, fmt: str | None = None) -> Recording:
    path = Path(path)
    fmt = fmt or ("binary" if path.suffix in (".f32", ".bin") else "text")
    if fmt == "binary":
        return _load_binary(path)
    if fmt != "text":
        raise InvalidInputError(f"unknown recording format {fmt!r}")

    header, values = [], []
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if values:
                    raise RecordingFormatError(f"{path}: header line after data", lineno)
                header.append((lineno, line[1:].strip()))
                continue
            try:
                v = float(line)
            except ValueError:
                raise RecordingFormatError(f"{path}: not a number: {line!r}", lineno) from None
            if not math.isfinite(v):
                raise RecordingFormatError(f"{path}: non-finite sample {line!r}", lineno)
            values.append(v)
    fs, gt, extra = _parse_header(header, path)
    if not values:
        raise RecordingFormatError(f"{path}: no samples")
    try:
        return Recording(np.array(values), fs=fs, ground_truth=gt, meta=extra)
    except InvalidInputError as exc:
        raise RecordingFormatError(f"{path}: {exc}") from None


def _load_binary(path: Path) -> Recording:
    meta_path = Path(str(path) + ".meta")
    if not meta_path.exists():
        raise RecordingFormatError(f"{path}: missing metadata sidecar {meta_path.name}")
    with open(meta_path) as f:
        pairs = [(i, line.strip()) for i, line in enumerate(f, start=1) if line.strip()]
    fs, gt, extra = _parse_header(pairs, meta_path)
    raw = path.read_bytes()
    if len(raw) % 4:
        raise RecordingFormatError(f"{path}: size {len(raw)} is not a multiple of 4 bytes")
    samples = np.frombuffer(raw, dtype="<f4").astype(float)
    bad = np.flatnonzero(~np.isfinite(samples))
    if bad.size:
        raise RecordingFormatError(f"{path}: non-finite sample at index {bad[0]}")
    if samples.size == 0:
        raise RecordingFormatError(f"{path}: no samples")
    try:
        return Recording(samples, fs=fs, ground_truth=gt, meta=extra)
    except InvalidInputError as exc:
        raise RecordingFormatError(f"{path}: {exc}") from None
