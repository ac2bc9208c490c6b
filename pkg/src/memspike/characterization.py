"""Volatility characterisation: pulse sweep, relaxation monitoring, retention check.

For every write amplitude of a one-polarity sweep the device is read before and
right after the pulse, then read in batches until a two-mean t-test between the
first and last ``k`` reads of a batch falls below a threshold, and finally
watched over a retention window. Comparing the retention-end resistance with
the pre- and post-pulse reads separates volatile from residual (non-volatile)
change, and the first amplitude that produces clean volatile change marks the
device threshold.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .device import Memristor
from .errors import InvalidInputError, NonSettlingError

#: relative scale below which a sample standard deviation counts as zero
DEGENERATE_EPS = 1e-12


@dataclass(frozen=True)
class SweepConfig:
    v_start: float = -0.2
    v_stop: float = -4.0
    v_step: float = -0.2
    t_w: float = 1e-6
    v_read: float = 0.2
    n_per_test_batch: int = 30
    k: int = 10
    t_threshold: float = 1.0
    retention_window: float = 60.0
    retention_read_period: float = 1.0
    # time between relaxation-monitor reads (s)
    read_period: float = 0.05
    resolution: float = 2e-3
    retention_t_threshold: float = 3.0
    max_batches: int = 10_000

    def __post_init__(self):
        if self.v_start == 0 or self.v_stop == 0 or math.copysign(1, self.v_start) != math.copysign(1, self.v_stop):
            raise InvalidInputError("v_start and v_stop must be nonzero with the same sign")
        if self.v_step == 0:
            raise InvalidInputError("v_step must be nonzero")
        if self.k < 2 or 2 * self.k > self.n_per_test_batch:
            raise InvalidInputError("need k >= 2 and 2k <= n_per_test_batch")
        if self.t_w <= 0 or self.read_period < 0 or self.retention_read_period <= 0:
            raise InvalidInputError("pulse width and read periods must be positive")
        if self.retention_window < self.retention_read_period * (2 * self.k - 1):
            raise InvalidInputError("retention window too short for 2k reads")

    def amplitudes(self) -> list[float]:
        """Write amplitudes in order of increasing magnitude."""
        lo, hi = sorted((abs(self.v_start), abs(self.v_stop)))
        step = abs(self.v_step)
        sign = math.copysign(1.0, self.v_start)
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [sign * round(lo + i * step, 12) for i in range(n)]


@dataclass(frozen=True)
class VolatilityRecord:
    v_w: float
    r_I: float
    r_II: float
    r_III: float
    r_IV: float
    delta_volatile: float
    delta_nonvolatile: float
    settle_time: float
    retention_passed: bool = True


@dataclass
class VolatilityReport:
    records: list[VolatilityRecord]
    extracted_v_th: float | None
    safe_band: tuple[float, float] | None
    noise_floor: float = 0.0
    traces: dict = field(default_factory=dict, repr=False)

    @property
    def found(self) -> bool:
        return self.extracted_v_th is not None

    def to_dict(self) -> dict:
        return {
            "threshold_found": self.found,
            "extracted_v_th": self.extracted_v_th,
            "safe_band": list(self.safe_band) if self.safe_band else None,
            "noise_floor": self.noise_floor,
            "records": [asdict(r) for r in self.records],
        }

    def write_json(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    def write_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["v_w", "delta_volatile", "delta_nonvolatile", "r_I", "r_II", "r_III",
                        "r_IV", "settle_time_s", "retention_passed"])
            for r in self.records:
                w.writerow([repr(r.v_w), repr(r.delta_volatile), repr(r.delta_nonvolatile),
                            repr(r.r_I), repr(r.r_II), repr(r.r_III), repr(r.r_IV),
                            repr(r.settle_time), int(r.retention_passed)])


def t_statistic(first_k, last_k, sigma_floor: float = 0.0) -> float:
    """Two-mean t statistic ``(mu1 - mu2) / sqrt(s1**2/k1 + s2**2/k2)``.

    Sample standard deviations (ddof=1). When both deviations are negligible
    relative to the means the result is 0 for equal means and a signed infinity
    otherwise. ``sigma_floor`` is an absolute lower bound applied to each
    deviation, modelling the read-out resolution.
    """
    a = np.asarray(first_k, dtype=float)
    b = np.asarray(last_k, dtype=float)
    if a.ndim != 1 or b.ndim != 1 or a.size < 2 or b.size < 2:
        raise InvalidInputError("t_statistic needs two 1-D samples of length >= 2")
    mu1, mu2 = a.mean(), b.mean()
    s1 = max(a.std(ddof=1), sigma_floor)
    s2 = max(b.std(ddof=1), sigma_floor)
    scale = max(abs(mu1), abs(mu2), np.finfo(float).tiny)
    if s1 < DEGENERATE_EPS * scale and s2 < DEGENERATE_EPS * scale:
        if mu1 == mu2:
            return 0.0
        return math.copysign(math.inf, mu1 - mu2)
    return float((mu1 - mu2) / math.sqrt(s1 * s1 / a.size + s2 * s2 / b.size))


def _read_series(device, v_read, n, period):
    t, r = [], []
    for i in range(n):
        t.append(device.t)
        r.append(device.read(v_read))
        if period > 0 and i < n - 1:
            device.relax(period)
    return t, r


def _batch_t(values, cfg: SweepConfig):
    first, last = values[: cfg.k], values[-cfg.k:]
    floor = cfg.resolution * abs(float(np.mean(values)))
    return t_statistic(first, last, sigma_floor=floor)


def monitor_relaxation(device: Memristor, cfg: SweepConfig):
    """Read in batches until the first-k/last-k t-test says the decay has stopped.

    Returns ``(trace, r_equilibrium, settle_time)`` where ``trace`` is a list of
    ``(time, resistance)`` pairs and ``r_equilibrium`` the mean of the final
    batch. Nothing about the device's equilibrium is assumed.
    """
    start = device.t
    trace = []
    for _ in range(cfg.max_batches):
        if trace:
            device.relax(cfg.read_period)
        times, values = _read_series(device, cfg.v_read, cfg.n_per_test_batch, cfg.read_period)
        trace.extend(zip(times, values))
        if abs(_batch_t(values, cfg)) < cfg.t_threshold:
            return trace, float(np.mean(values)), device.t - start
    raise NonSettlingError(f"no equilibrium after {cfg.max_batches} batches", trace=trace)


def retention_test(device: Memristor, cfg: SweepConfig):
    """Watch the settled device over the retention window.

    Returns ``(passed, residual_drift, trace)``; ``residual_drift`` is the
    relative change between the first-k and last-k read means.
    """
    n = int(math.floor(cfg.retention_window / cfg.retention_read_period + 1e-9)) + 1
    times, values = _read_series(device, cfg.v_read, n, cfg.retention_read_period)
    t = _batch_t(values, cfg)
    first = float(np.mean(values[: cfg.k]))
    last = float(np.mean(values[-cfg.k:]))
    drift = (last - first) / first
    return abs(t) < cfg.retention_t_threshold, drift, list(zip(times, values))


def default_noise_floor(records, below: float = 1.0) -> float:
    """``mean + 2*std`` of the |deltas| of records whose amplitude is below ``below`` volts."""
    recs = sorted(records, key=lambda r: abs(r.v_w))
    quiet = [r for r in recs if abs(r.v_w) < below - 1e-9]
    if len(quiet) < 2:
        quiet = recs[:3]
    vals = np.abs([d for r in quiet for d in (r.delta_volatile, r.delta_nonvolatile)])
    floor = float(vals.mean() + 2 * vals.std(ddof=1))
    return max(floor, DEGENERATE_EPS)


def extract_threshold(records, noise_floor: float | None = None,
                      nonvolatile_floor: float | None = None):
    """Find the onset of clean volatile change.

    Returns ``(v_th, safe_band)``; both are ``None`` when no record qualifies.
    A record qualifies when its volatile change exceeds ``noise_floor``, its
    residual change stays below ``nonvolatile_floor``, and the same holds for
    every larger-amplitude record up to the first one whose residual change
    breaks the bound. ``nonvolatile_floor`` defaults to three noise floors so a
    single noisy retention read does not cut the band short.
    """
    if len(records) < 3:
        raise InvalidInputError("extract_threshold needs at least 3 records")
    if noise_floor is None:
        noise_floor = default_noise_floor(records)
    if not noise_floor > 0:
        raise InvalidInputError("noise_floor must be > 0")
    if nonvolatile_floor is None:
        nonvolatile_floor = 3.0 * noise_floor
    recs = sorted(records, key=lambda r: abs(r.v_w))
    for i, rec in enumerate(recs):
        if not (abs(rec.delta_volatile) > noise_floor
                and abs(rec.delta_nonvolatile) < nonvolatile_floor):
            continue
        last = i
        for j in range(i + 1, len(recs)):
            if abs(recs[j].delta_nonvolatile) >= nonvolatile_floor:
                break
            if abs(recs[j].delta_volatile) <= noise_floor:
                last = None
                break
            last = j
        if last is not None:
            return rec.v_w, (rec.v_w, recs[last].v_w)
    return None, None


def volatility_sweep(device: Memristor, cfg: SweepConfig, noise_floor: float | None = None,
                     keep_traces: bool = False) -> VolatilityReport:
    """Run the full progressive-pulse characterisation on ``device``."""
    records = []
    traces = {}
    for v_w in cfg.amplitudes():
        # r_I, r_II: means of k back-to-back reads just before / just after the pulse
        _, before = _read_series(device, cfg.v_read, cfg.k, 0.0)
        r_I = float(np.mean(before))
        device.apply(v_w, cfg.t_w)
        _, after = _read_series(device, cfg.v_read, cfg.k, 0.0)
        r_II = float(np.mean(after))
        try:
            trace, r_III, settle = monitor_relaxation(device, cfg)
        except NonSettlingError as exc:
            raise NonSettlingError(f"v_w={v_w} V: {exc}", trace=exc.trace, v_w=v_w) from exc
        passed, _, ret_trace = retention_test(device, cfg)
        r_IV = float(np.mean([r for _, r in ret_trace[-cfg.k:]]))
        records.append(VolatilityRecord(
            v_w=v_w, r_I=r_I, r_II=r_II, r_III=r_III, r_IV=r_IV,
            delta_volatile=(r_IV - r_II) / r_II,
            delta_nonvolatile=(r_IV - r_I) / r_I,
            settle_time=settle, retention_passed=passed,
        ))
        if keep_traces:
            traces[v_w] = trace + ret_trace
    if noise_floor is None:
        noise_floor = default_noise_floor(records)
    v_th, band = extract_threshold(records, noise_floor) if len(records) >= 3 else (None, None)
    return VolatilityReport(records=records, extracted_v_th=v_th, safe_band=band,
                            noise_floor=noise_floor, traces=traces)
