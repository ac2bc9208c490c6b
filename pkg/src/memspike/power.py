"""Energy and average power of the batch biasing schedule.

Every sample is one write pulse, every batch carries a fixed number of reads,
and optional reset pulses are spread evenly over the batches of a recording.
Reads see the device in series with the compliance resistor; writes and resets
see the device alone unless ``include_series_on_write`` is set.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

from .errors import ConfigError, InvalidInputError


def pulse_energy(v: float, r: float, t: float) -> float:
    """Energy in joules of a rectangular pulse ``v`` across ``r`` for ``t``."""
    if r <= 0:
        raise InvalidInputError("resistance must be > 0")
    if t < 0:
        raise InvalidInputError("pulse width must be >= 0")
    return v * v * t / r


@dataclass(frozen=True)
class PowerConfig:
    r_device: float = 1e6
    r_series: float = 1e5
    v_read: float = 0.2
    v_write: float = 3.0
    t_read: float = 1e-6
    t_write: float = 1e-6
    reads_per_batch: int = 5
    samples_per_batch: int = 1000
    fs: float = 12200.0
    resets_per_recording: int = 0
    t_reset: float = 1e-4
    v_reset: float = 0.0
    batches_per_recording: int = 63
    include_series_on_write: bool = False

    def __post_init__(self):
        if self.r_device <= 0 or self.r_series < 0:
            raise InvalidInputError("r_device must be > 0 and r_series >= 0")
        if min(self.t_read, self.t_write, self.t_reset) <= 0 or self.fs <= 0:
            raise InvalidInputError("pulse widths and fs must be > 0")
        if min(self.reads_per_batch, self.resets_per_recording) < 0 or self.samples_per_batch <= 0:
            raise InvalidInputError("counts must be >= 0 (samples_per_batch > 0)")
        if self.batches_per_recording <= 0:
            raise InvalidInputError("batches_per_recording must be > 0")


@dataclass(frozen=True)
class PowerReport:
    e_read_total: float
    e_write_total: float
    e_reset_total: float
    e_reset_per_batch: float
    e_reset_each: float
    e_read_each: float
    e_write_each: float
    e_read_device: float
    e_read_series: float
    batch_duration: float
    p_avg: float
    p_read: float
    p_write: float
    p_reset: float

    def to_dict(self) -> dict:
        return asdict(self)


def batch_report(cfg: PowerConfig) -> PowerReport:
    """Per-batch energies and the average power they imply."""
    r_read = cfg.r_device + cfg.r_series
    r_write = r_read if cfg.include_series_on_write else cfg.r_device
    e_read_each = pulse_energy(cfg.v_read, r_read, cfg.t_read)
    e_write_each = pulse_energy(cfg.v_write, r_write, cfg.t_write)
    e_reset_each = pulse_energy(cfg.v_reset, r_write, cfg.t_reset)

    e_read = cfg.reads_per_batch * e_read_each
    e_write = cfg.samples_per_batch * e_write_each
    e_reset = cfg.resets_per_recording * e_reset_each
    e_reset_batch = e_reset / cfg.batches_per_recording
    duration = cfg.samples_per_batch / cfg.fs
    # the read current splits its energy between device and series resistor
    share = cfg.r_device / r_read
    return PowerReport(
        e_read_total=e_read, e_write_total=e_write, e_reset_total=e_reset,
        e_reset_per_batch=e_reset_batch, e_reset_each=e_reset_each,
        e_read_each=e_read_each, e_write_each=e_write_each,
        e_read_device=e_read * share, e_read_series=e_read * (1 - share),
        batch_duration=duration,
        p_avg=(e_read + e_write + e_reset_batch) / duration,
        p_read=e_read / duration, p_write=e_write / duration, p_reset=e_reset_batch / duration,
    )


PRESETS = {
    # volatile device at 1 MOhm: 0.2 V / 1 us reads, 3 V / 1 us writes
    "note2": PowerConfig(),
    "note2-100ns": PowerConfig(t_write=1e-7),
    # non-volatile device at 10 kOhm with 11 manual resets over a 63-batch recording
    "note1": PowerConfig(r_device=1e4, r_series=1e3, v_read=0.5, v_write=5.0, t_read=1e-4,
                         t_write=1e-4, resets_per_recording=11, v_reset=5.0, t_reset=1e-4),
}


def preset(name: str, **overrides) -> PowerConfig:
    try:
        base = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown power preset {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(base, **overrides) if overrides else base


def format_table(name: str, rep: PowerReport) -> str:
    rows = [
        ("read energy / batch", rep.e_read_total, "J"),
        ("  device share", rep.e_read_device, "J"),
        ("  series share", rep.e_read_series, "J"),
        ("write energy / batch", rep.e_write_total, "J"),
        ("reset energy / pulse", rep.e_reset_each, "J"),
        ("reset energy / recording", rep.e_reset_total, "J"),
        ("reset energy / batch", rep.e_reset_per_batch, "J"),
        ("batch duration", rep.batch_duration, "s"),
        ("average power", rep.p_avg, "W"),
    ]
    width = max(len(r[0]) for r in rows)
    lines = [f"power preset: {name}"]
    lines += [f"{label:<{width}}  {value:.6g} {unit}" for label, value, unit in rows]
    return "\n".join(lines)
