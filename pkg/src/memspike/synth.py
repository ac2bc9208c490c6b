"""Synthetic extracellular recordings and reference spike detectors.

Recordings are white Gaussian noise plus a biphasic template placed at Poisson
spike times (refractory-thinned), hard-clipped to the front-end range. The
reference detectors stand in for an offline template-matching benchmark:
``matched_filter`` correlates with the known template, ``amplitude_threshold``
looks for negative threshold crossings and ``ground_truth`` returns the
generator's own spike indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .recording import DEFAULT_FS, FRONT_END_RANGE, Recording

MATCHED_FILTER = "matched_filter"
AMPLITUDE_THRESHOLD = "amplitude_threshold"
GROUND_TRUTH = "ground_truth"
METHODS = (MATCHED_FILTER, AMPLITUDE_THRESHOLD, GROUND_TRUTH)


def default_template(fs: float = DEFAULT_FS, duration: float = 2e-3, peak: float = -0.35) -> np.ndarray:
    """Biphasic spike: a sharp negative trough followed by a slower positive lobe.

    The trough sits exactly on a sample and equals ``peak``.
    """
    n = max(int(round(duration * fs)), 3)
    t = np.arange(n) / fs
    i_trough = int(round(0.25 * n))
    t0 = i_trough / fs
    trough = -np.exp(-0.5 * ((t - t0) / 1.5e-4) ** 2)
    lobe = 0.3 * np.exp(-0.5 * ((t - t0 - 4.5e-4) / 3e-4) ** 2)
    w = trough + lobe
    return w * (peak / w[i_trough])


def template_peak_index(template) -> int:
    template = np.asarray(template)
    return int(np.argmax(np.abs(template)))


@dataclass(frozen=True)
class SynthSpec:
    n_samples: int = 63_000
    fs: float = DEFAULT_FS
    spike_rate: float = 5.0
    template: tuple = field(default_factory=lambda: tuple(default_template()))
    amplitude_jitter: float = 0.1
    noise_sigma: float = 0.035
    refractory: float = 2e-3
    seed: int = 0
    clip: float = FRONT_END_RANGE
    # explicit peak indices; replaces the Poisson draw when given
    spike_indices: tuple | None = None

    def __post_init__(self):
        tmpl = np.asarray(self.template, dtype=float)
        if tmpl.ndim != 1 or tmpl.size == 0:
            raise InvalidInputError("template must be a non-empty 1-D waveform")
        if self.n_samples <= tmpl.size:
            raise InvalidInputError("recording must be longer than the template")
        if self.spike_rate < 0 or self.noise_sigma < 0 or not 0 <= self.amplitude_jitter < 1:
            raise InvalidInputError("rate and noise must be >= 0, jitter in [0, 1)")
        if np.max(np.abs(tmpl)) + 3 * self.noise_sigma > self.clip:
            raise InvalidInputError("template peak + 3 noise sigmas exceeds the clip level")
        if self.refractory < tmpl.size / self.fs:
            raise InvalidInputError("refractory period shorter than the template")

    @property
    def snr(self) -> float:
        peak = float(np.max(np.abs(self.template)))
        return peak / self.noise_sigma if self.noise_sigma else float("inf")


def _poisson_peaks(spec: SynthSpec, rng, lead: int, tail: int) -> list[int]:
    if spec.spike_rate == 0:
        return []
    duration = spec.n_samples / spec.fs
    # draw generously, then cut to the recording
    n_draw = rng.poisson(spec.spike_rate * duration * 1.5 + 20)
    times = np.cumsum(rng.exponential(1.0 / spec.spike_rate, size=n_draw))
    times = times[times < duration]
    refr = int(np.ceil(spec.refractory * spec.fs))
    peaks, last = [], None
    for t in times:
        i = int(t * spec.fs)
        if i < lead or i >= spec.n_samples - tail:
            continue
        if last is not None and i - last < refr:
            continue
        peaks.append(i)
        last = i
    return peaks


def generate_recording(spec: SynthSpec) -> Recording:
    """Deterministic synthetic recording with ground-truth peak indices."""
    rng = np.random.default_rng(spec.seed)
    tmpl = np.asarray(spec.template, dtype=float)
    ip = template_peak_index(tmpl)
    lead, tail = ip, tmpl.size - ip - 1
    if spec.spike_indices is not None:
        peaks = sorted(int(i) for i in spec.spike_indices)
        if any(i < lead or i >= spec.n_samples - tail for i in peaks):
            raise InvalidInputError("forced spike does not fit inside the recording")
    else:
        peaks = _poisson_peaks(spec, rng, lead, tail)
    x = np.zeros(spec.n_samples)
    scales = 1.0 + rng.uniform(-spec.amplitude_jitter, spec.amplitude_jitter, size=len(peaks))
    for i, s in zip(peaks, scales):
        x[i - lead:i + tail + 1] += s * tmpl
    if spec.noise_sigma > 0:
        x += rng.normal(0.0, spec.noise_sigma, size=spec.n_samples)
    np.clip(x, -spec.clip, spec.clip, out=x)
    return Recording(x, fs=spec.fs, ground_truth=tuple(peaks))


@dataclass(frozen=True)
class ReferenceConfig:
    method: str = GROUND_TRUTH
    # matched_filter: z-score of the filter output; amplitude_threshold: volts (magnitude)
    threshold: float = 5.0
    refractory: float = 2e-3
    template: tuple | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidInputError(f"unknown reference method {self.method!r}; choose from {METHODS}")
        if not np.isfinite(self.threshold):
            raise InvalidInputError("threshold must be finite")


def _suppress(score, candidates, refr):
    """Greedy non-maximum suppression: keep the best, drop neighbours within ``refr``."""
    order = candidates[np.argsort(-score[candidates], kind="stable")]
    taken = np.zeros(score.size, dtype=bool)
    keep = []
    for i in order:
        if taken[max(0, i - refr):i + refr + 1].any():
            continue
        taken[i] = True
        keep.append(int(i))
    return sorted(keep)


def matched_filter_score(samples, template) -> np.ndarray:
    """Correlation with the zero-mean, unit-norm template, in units of its own noise.

    ``score[i]`` belongs to the window starting at sample ``i``. The noise
    scale is the median absolute deviation of the raw output, so the score is
    roughly a z-value in white noise.
    """
    x = np.asarray(samples, dtype=float)
    t = np.asarray(template, dtype=float)
    t = t - t.mean()
    norm = np.linalg.norm(t)
    if norm == 0:
        raise InvalidInputError("template has no shape")
    out = np.correlate(x, t / norm, mode="valid")
    mad = np.median(np.abs(out - np.median(out))) * 1.4826
    if mad == 0:
        mad = max(np.max(np.abs(out)), 1.0) * 1e-12
    return out / mad


def reference_detect(rec: Recording, cfg: ReferenceConfig) -> list[int]:
    """Spike peak indices according to the configured reference method."""
    refr = max(int(round(cfg.refractory * rec.fs)), 1)
    if cfg.method == GROUND_TRUTH:
        if rec.ground_truth is None:
            raise InvalidInputError("recording carries no ground truth")
        return list(rec.ground_truth)
    if cfg.method == MATCHED_FILTER:
        if cfg.template is None:
            raise InvalidInputError("matched_filter needs a template")
        tmpl = np.asarray(cfg.template, dtype=float)
        score = matched_filter_score(rec.samples, tmpl)
        cand = np.flatnonzero(score > cfg.threshold)
        starts = _suppress(score, cand, refr)
        return [s + template_peak_index(tmpl) for s in starts]
    # amplitude_threshold: negative-going crossings, reported at the local minimum
    x = rec.samples
    cand = np.flatnonzero(x < -abs(cfg.threshold))
    return _suppress(-x, cand, refr)


def indices_to_bins(indices, spans) -> list[bool]:
    """Flag each ``(start, end)`` span that contains at least one index."""
    spans = [(int(s), int(e)) for s, e in spans]
    if not spans:
        return []
    starts = np.array([s for s, _ in spans])
    ends = np.array([e for _, e in spans])
    lo, hi = starts.min(), ends.max()
    flags = np.zeros(len(spans), dtype=bool)
    # empty spans (noise pairs) can never hold an index
    live = np.flatnonzero(ends > starts)
    order = live[np.argsort(starts[live], kind="stable")]
    sorted_starts = starts[order]
    for i in indices:
        i = int(i)
        if i < lo or i >= hi:
            raise InvalidInputError(f"index {i} outside the binned range [{lo}, {hi})")
        k = np.searchsorted(sorted_starts, i, side="right") - 1
        if k < 0:
            continue
        j = order[k]
        if starts[j] <= i < ends[j]:
            flags[j] = True
    return flags.tolist()
