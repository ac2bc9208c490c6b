"""Run configuration: one INI file with a section per module.

Every key maps onto a field of the matching dataclass; values are coerced to
the type of the field's default. ``[device]`` and ``[power]`` start from a
named preset and apply the remaining keys as overrides. All randomness is
derived from ``[run] seed``, so module-level ``seed`` keys are rejected.

Example::

    [run]
    seed = 7
    out = results

    [device]
    preset = volatile-noisy
    tau = 0.5

    [encoder]
    gain = 6

    [bench]
    gains = 3, 4, 5, 6
    repeats = 5
"""

from __future__ import annotations

import configparser
import dataclasses
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import device as device_mod
from . import power as power_mod
from .characterization import SweepConfig
from .device import DeviceParams
from .encoder import EncoderConfig
from .errors import ConfigError, MemspikeError
from .power import PowerConfig
from .synth import ReferenceConfig, SynthSpec, default_template

CONFIG_ENV = "MEMSPIKE_CONFIG"

SECTIONS = ("run", "device", "encoder", "sweep", "synth", "reference", "power", "bench")


@dataclass(frozen=True)
class BenchConfig:
    gains: tuple = (3.0, 4.0, 5.0, 6.0)
    repeats: int = 5
    v_off: float = 0.0


@dataclass(frozen=True)
class RunConfig:
    device_preset: str = "volatile-noisy"
    device: DeviceParams = field(default_factory=lambda: device_mod.preset("volatile-noisy"))
    encoder: EncoderConfig = field(default_factory=lambda: EncoderConfig(gain=6.0))
    sweep: SweepConfig = field(default_factory=SweepConfig)
    synth: SynthSpec = field(default_factory=SynthSpec)
    reference: ReferenceConfig = field(default_factory=ReferenceConfig)
    power_preset: str = "note2"
    power: PowerConfig = field(default_factory=lambda: power_mod.preset("note2"))
    bench: BenchConfig = field(default_factory=BenchConfig)
    seed: int = 0
    out: str = "out"


def derived_seeds(master: int) -> dict[str, int]:
    """Independent stream seeds for each consumer of randomness."""
    names = ("synth", "device", "bench")
    children = np.random.SeedSequence(master).spawn(len(names))
    return {n: int(c.generate_state(1)[0]) for n, c in zip(names, children)}


def _coerce(name, raw: str, default, optional: bool = False):
    text = raw.strip()
    if optional and text.lower() == "none":
        return None
    try:
        if isinstance(default, bool):
            lowered = text.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float) or default is None:
            value = float(text)
            if math.isnan(value):
                raise ValueError(text)
            return value
        if isinstance(default, tuple):
            return tuple(float(x) for x in text.split(",") if x.strip())
        return text
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r}") from None


def _overrides(section: str, items: dict, cls, skip=()) -> dict:
    fields = {f.name: f for f in dataclasses.fields(cls)}
    out = {}
    for key, raw in items.items():
        if key in skip:
            continue
        if key == "seed":
            raise ConfigError(f"[{section}] seed: all seeds derive from [run] seed")
        if key not in fields:
            allowed = sorted(set(fields) - {"seed"} - set(skip)) + list(skip)
            raise ConfigError(f"[{section}] unknown key {key!r}; allowed: {', '.join(sorted(allowed))}")
        f = fields[key]
        if f.default is not dataclasses.MISSING:
            default = f.default
        elif f.default_factory is not dataclasses.MISSING:
            default = f.default_factory()
        else:
            default = ""
        optional = "None" in str(f.type)
        out[key] = _coerce(f"[{section}] {key}", raw, default, optional)
    return out


def _build(section, cls, base, overrides):
    try:
        return dataclasses.replace(base, **overrides) if overrides else base
    except (MemspikeError, ValueError, TypeError) as exc:
        raise ConfigError(f"[{section}] {exc}") from None


def load_config(path=None) -> RunConfig:
    """Read ``path`` (or ``$MEMSPIKE_CONFIG``); with neither, return defaults."""
    if path is None:
        path = os.environ.get(CONFIG_ENV) or None
    parser = configparser.ConfigParser(interpolation=None)
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            parser.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return from_parser(parser)


def from_parser(parser: configparser.ConfigParser) -> RunConfig:
    unknown = set(parser.sections()) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config section(s) {sorted(unknown)}; allowed: {list(SECTIONS)}")
    sec = {name: dict(parser[name]) if parser.has_section(name) else {} for name in SECTIONS}
    base = RunConfig()

    run = dict(sec["run"])
    extra = set(run) - {"seed", "out"}
    if extra:
        raise ConfigError(f"[run] unknown key(s) {sorted(extra)}; allowed: out, seed")
    seed = _coerce("[run] seed", run["seed"], 0) if "seed" in run else base.seed
    if seed < 0:
        raise ConfigError("[run] seed must be >= 0")
    out = run.get("out", base.out)

    dev_name = sec["device"].get("preset", base.device_preset)
    dev = _build("device", DeviceParams, device_mod.preset(dev_name),
                 _overrides("device", sec["device"], DeviceParams, skip=("preset",)))

    enc = _build("encoder", EncoderConfig, base.encoder,
                 _overrides("encoder", sec["encoder"], EncoderConfig))
    sweep = _build("sweep", SweepConfig, base.sweep, _overrides("sweep", sec["sweep"], SweepConfig))

    syn_items = dict(sec["synth"])
    shape = {k: _coerce(f"[synth] {k}", syn_items.pop(k), 0.0)
             for k in ("template_peak", "template_duration") if k in syn_items}
    syn_over = _overrides("synth", syn_items, SynthSpec, skip=("template", "spike_indices"))
    if "template" in syn_items or "spike_indices" in syn_items:
        raise ConfigError("[synth] template/spike_indices are not configurable; "
                          "use template_peak and template_duration")
    fs = syn_over.get("fs", base.synth.fs)
    if shape or "fs" in syn_over:
        syn_over["template"] = tuple(default_template(
            fs, duration=shape.get("template_duration", 2e-3), peak=shape.get("template_peak", -0.35)))
    synth = _build("synth", SynthSpec, base.synth, syn_over)

    ref = _build("reference", ReferenceConfig, base.reference,
                 _overrides("reference", sec["reference"], ReferenceConfig, skip=("template",)))

    pw_name = sec["power"].get("preset", base.power_preset)
    pw = _build("power", PowerConfig, power_mod.preset(pw_name),
                _overrides("power", sec["power"], PowerConfig, skip=("preset",)))

    bench = _build("bench", BenchConfig, base.bench, _overrides("bench", sec["bench"], BenchConfig))
    if not bench.gains:
        raise ConfigError("[bench] gains must list at least one gain")
    if bench.repeats < 1:
        raise ConfigError("[bench] repeats must be >= 1")

    return RunConfig(device_preset=dev_name, device=dev, encoder=enc, sweep=sweep, synth=synth,
                     reference=ref, power_preset=pw_name, power=pw, bench=bench, seed=seed, out=out)
