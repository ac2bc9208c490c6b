"""Behavioural model of a single TiOx memristive cell.

The model is a thresholded power-law writer with exponential relaxation toward
an equilibrium resistance:

* below ``v_th_neg`` the resistance falls by ``write_gain * (|v| - |v_th_neg|)**p * dt``,
  above ``v_th_pos`` it rises by the same law;
* in the volatile regime the result relaxes toward ``r_eq`` with time constant
  ``tau``; in the non-volatile regime there is no relaxation and the write is
  scaled by the remaining distance to the bound it moves toward.

Writes are deterministic. Reads add multiplicative Gaussian noise drawn from the
device's own seeded generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, InvalidInputError, PerturbingReadError

VOLATILE = "volatile"
NONVOLATILE = "nonvolatile"
REGIMES = (VOLATILE, NONVOLATILE)

#: duration of one read pulse; reads advance the device clock by this much
DEFAULT_READ_DURATION = 1e-6


@dataclass(frozen=True)
class DeviceParams:
    r_eq: float = 1e6
    r_min: float = 3e5
    r_max: float = 3e6
    v_th_neg: float = -1.5
    v_th_pos: float = 1.6
    write_gain: float = 3e11  # ohm / (V**p * s)
    write_exp: float = 1.0
    tau: float = 1.0  # s; math.inf disables relaxation
    r_series: float = 1e5
    read_noise_sigma: float = 0.0  # relative
    regime: str = VOLATILE
    seed: int = 0

    def __post_init__(self):
        for name in ("r_eq", "r_min", "r_max", "v_th_neg", "v_th_pos", "write_gain",
                     "write_exp", "r_series", "read_noise_sigma"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidInputError(f"{name} must be finite")
        if not 0 < self.r_min <= self.r_eq <= self.r_max:
            raise InvalidInputError("need 0 < r_min <= r_eq <= r_max")
        if not self.v_th_neg < 0 < self.v_th_pos:
            raise InvalidInputError("need v_th_neg < 0 < v_th_pos")
        if not (self.tau > 0 and not math.isnan(self.tau)):
            raise InvalidInputError("tau must be > 0")
        if self.write_gain < 0 or self.read_noise_sigma < 0 or self.r_series < 0:
            raise InvalidInputError("write_gain, read_noise_sigma and r_series must be >= 0")
        if self.write_exp <= 0:
            raise InvalidInputError("write_exp must be > 0")
        if self.regime not in REGIMES:
            raise InvalidInputError(f"regime must be one of {REGIMES}, got {self.regime!r}")

    @property
    def read_limit(self) -> float:
        """Largest read magnitude that cannot write."""
        return min(-self.v_th_neg, self.v_th_pos)


@dataclass(frozen=True)
class DeviceState:
    r: float
    t: float = 0.0


def _write_delta(r, v, dt, p: DeviceParams):
    """Signed resistance change from one write of amplitude ``v`` lasting ``dt``."""
    if v < p.v_th_neg:
        dr = -p.write_gain * (p.v_th_neg - v) ** p.write_exp * dt
        if p.regime == NONVOLATILE:
            dr *= (r - p.r_min) / (p.r_max - p.r_min)
        return dr
    if v > p.v_th_pos:
        dr = p.write_gain * (v - p.v_th_pos) ** p.write_exp * dt
        if p.regime == NONVOLATILE:
            dr *= (p.r_max - r) / (p.r_max - p.r_min)
        return dr
    return 0.0


def _relax_r(r, dt, p: DeviceParams):
    if p.regime == NONVOLATILE or dt == 0:
        return r
    decay = math.exp(-dt / p.tau)
    if decay == 1.0:
        return r
    return p.r_eq + (r - p.r_eq) * decay


def _step_r(r, v, dt, p: DeviceParams):
    dr = _write_delta(r, v, dt, p)
    if dr:
        r = min(max(r + dr, p.r_min), p.r_max)
    return _relax_r(r, dt, p)


def _check_finite(**values):
    for name, value in values.items():
        if not math.isfinite(value):
            raise InvalidInputError(f"{name} must be finite, got {value!r}")


def apply_sample(state: DeviceState, params: DeviceParams, v: float, dt: float) -> DeviceState:
    """Drive the device with voltage ``v`` for ``dt`` seconds and return the new state."""
    _check_finite(v=v, dt=dt)
    if dt <= 0:
        raise InvalidInputError(f"dt must be > 0, got {dt!r}")
    return DeviceState(r=_step_r(state.r, float(v), float(dt), params), t=state.t + dt)


def relax(state: DeviceState, params: DeviceParams, dt: float) -> DeviceState:
    """Let the device rest for ``dt`` seconds with no stimulus."""
    if not dt >= 0:
        raise InvalidInputError(f"dt must be >= 0, got {dt!r}")
    if math.isinf(dt):
        r = params.r_eq if params.regime == VOLATILE else state.r
        return DeviceState(r=r, t=state.t + dt)
    return DeviceState(r=_relax_r(state.r, float(dt), params), t=state.t + dt)


def read_state(state: DeviceState, params: DeviceParams, v_read: float,
               rng: np.random.Generator | None = None) -> float:
    """Non-destructive read of the resistance with multiplicative Gaussian noise."""
    _check_finite(v_read=v_read)
    if abs(v_read) >= params.read_limit:
        raise PerturbingReadError(
            f"|v_read|={abs(v_read)} V would write (read limit {params.read_limit} V)")
    if params.read_noise_sigma == 0:
        return state.r
    if rng is None:
        raise InvalidInputError("a generator is required when read_noise_sigma > 0")
    return state.r * (1.0 + rng.normal(0.0, params.read_noise_sigma))


class Memristor:
    """Stateful device: parameters, current state and a private seeded generator.

    One instance belongs to one caller at a time. ``seed`` overrides
    ``params.seed`` when given.
    """

    def __init__(self, params: DeviceParams, r0: float | None = None, seed: int | None = None,
                 read_duration: float = DEFAULT_READ_DURATION):
        self.params = params
        r0 = params.r_eq if r0 is None else float(r0)
        if not params.r_min <= r0 <= params.r_max:
            raise InvalidInputError(f"initial resistance {r0} outside [r_min, r_max]")
        self.state = DeviceState(r=r0, t=0.0)
        self.rng = np.random.default_rng(params.seed if seed is None else seed)
        self.read_duration = read_duration

    @property
    def r(self) -> float:
        return self.state.r

    @property
    def t(self) -> float:
        return self.state.t

    def apply(self, v: float, dt: float) -> float:
        self.state = apply_sample(self.state, self.params, v, dt)
        return self.state.r

    def relax(self, dt: float) -> float:
        self.state = relax(self.state, self.params, dt)
        return self.state.r

    def read(self, v_read: float) -> float:
        """Read, then let the clock run for one read pulse."""
        value = read_state(self.state, self.params, v_read, self.rng)
        if self.read_duration > 0:
            self.relax(self.read_duration)
        return value

    def drive(self, samples, period: float, pulse_width: float | None = None) -> float:
        """Feed a block of samples, one write pulse per sample period.

        Each sample is applied for ``pulse_width`` seconds and the device then
        rests for the remainder of ``period``. ``pulse_width=None`` applies the
        sample for the whole period. Equivalent to calling :meth:`apply` and
        :meth:`relax` per sample, only faster.
        """
        if pulse_width is None:
            pulse_width = period
        if not (0 < pulse_width <= period) or not math.isfinite(period):
            raise InvalidInputError("need 0 < pulse_width <= period")
        samples = np.asarray(samples, dtype=float)
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("samples must be finite")
        rest = period - pulse_width
        p = self.params
        r = self.state.r
        t = self.state.t
        for v in samples.tolist():
            r = _step_r(r, v, pulse_width, p)
            t += pulse_width
            if rest > 0:
                r = _relax_r(r, rest, p)
                t += rest
        self.state = DeviceState(r=r, t=t)
        return r


PRESETS = {
    # 300 kOhm - 3 MOhm volatile window, -1.5 V device
    "volatile": DeviceParams(),
    # narrower 700 kOhm - 1.4 MOhm window, -1.8 V thresholds
    "volatile-narrow": DeviceParams(r_eq=1e6, r_min=7e5, r_max=1.4e6, v_th_neg=-1.8, v_th_pos=1.8),
    "volatile-noisy": DeviceParams(read_noise_sigma=0.005),
    # 2 - 15 kOhm non-volatile switching, asymmetric thresholds
    "nonvolatile": DeviceParams(r_eq=8e3, r_min=2e3, r_max=1.5e4, v_th_neg=-1.2, v_th_pos=1.0,
                                write_gain=2e7, tau=math.inf, r_series=1e3,
                                regime=NONVOLATILE),
}


def preset(name: str, **overrides) -> DeviceParams:
    try:
        base = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown device preset {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(base, **overrides) if overrides else base
