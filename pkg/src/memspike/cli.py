"""Command-line entry point.

    memspike [--config PATH] [--seed N] [--out DIR] [--format {csv,json}] COMMAND ...

Commands write their artifacts into ``--out`` and print a short summary on
stdout in the chosen format. Exit status is 0 only when every artifact was
written; on failure the files created by the run are removed again. Usage and
configuration errors (including unknown presets) exit with 2, runtime errors
with 1.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__
from . import device as device_mod
from . import power as power_mod
from .characterization import volatility_sweep
from .config import CONFIG_ENV, RunConfig, derived_seeds, load_config
from .detection import truncate
from .device import Memristor
from .encoder import write_bins_csv, write_log_csv
from .errors import ConfigError, InvalidInputError, MemspikeError
from .pipeline import roc_sweep, run_pipeline
from .recording import load_recording, save_recording
from .synth import METHODS, ReferenceConfig, default_template, generate_recording

log = logging.getLogger("memspike")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(MemspikeError):
    """Bad command-line input discovered after argument parsing."""


class Outputs:
    """Tracks files a command creates so a failed run leaves nothing behind."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.created_root = False
        self.paths: list[Path] = []

    def prepare(self):
        if not self.root.exists():
            self.root.mkdir(parents=True)
            self.created_root = True
        elif not self.root.is_dir():
            raise UsageError(f"--out {self.root} exists and is not a directory")

    def path(self, name: str) -> Path:
        p = self.root / name
        self.paths.append(p)
        return p

    def discard(self):
        for p in self.paths:
            p.unlink(missing_ok=True)
        if self.created_root:
            try:
                self.root.rmdir()
            except OSError:
                pass


def _json_clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _json_clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_clean(v) for v in obj]
    return obj


def write_json(path, obj):
    with open(path, "w") as f:
        json.dump(_json_clean(obj), f, indent=2, sort_keys=True, allow_nan=False)
        f.write("\n")


def _emit(summary: dict, fmt: str):
    if fmt == "json":
        print(json.dumps(_json_clean(summary), indent=2, sort_keys=True))
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in summary.items():
            w.writerow([k, v])


def _config_dict(cfg) -> dict:
    d = dataclasses.asdict(cfg)
    d.pop("template", None)
    return d


# -- commands ---------------------------------------------------------------

def _device_params(cfg: RunConfig, args):
    if getattr(args, "device", None):
        return device_mod.preset(args.device)
    return cfg.device


def cmd_characterize(cfg: RunConfig, args, out: Outputs) -> dict:
    params = _device_params(cfg, args)
    seeds = derived_seeds(cfg.seed)
    dev = Memristor(params, seed=seeds["device"])
    report = volatility_sweep(dev, cfg.sweep, noise_floor=args.noise_floor)
    report.write_csv(out.path("volatility.csv"))
    report.write_json(out.path("volatility.json"))
    if not args.no_plot:
        from .plotting import plot_volatility
        plot_volatility(report, out.path("volatility.png"))
    return {"records": len(report.records), "threshold_found": report.found,
            "extracted_v_th": report.extracted_v_th,
            "safe_band": list(report.safe_band) if report.safe_band else None,
            "noise_floor": report.noise_floor}


def _recording(cfg: RunConfig, args):
    if args.recording is not None:
        rec = load_recording(args.recording)
        template = default_template(rec.fs)
    else:
        spec = dataclasses.replace(cfg.synth, seed=derived_seeds(cfg.seed)["synth"])
        rec = generate_recording(spec)
        template = spec.template
    rec.check_front_end_range()
    return rec, template


def _reference(cfg: RunConfig, args, template) -> ReferenceConfig | None:
    method = args.reference or cfg.reference.method
    if method == "none":
        return None
    threshold = cfg.reference.threshold if args.threshold is None else args.threshold
    return dataclasses.replace(cfg.reference, method=method, threshold=threshold,
                               template=tuple(template) if method == "matched_filter" else None)


def _encoder(cfg: RunConfig, args):
    over = {}
    if args.gain is not None:
        over["gain"] = args.gain
    if args.offset is not None:
        over["offset"] = args.offset
    return dataclasses.replace(cfg.encoder, **over) if over else cfg.encoder


def cmd_encode_detect(cfg: RunConfig, args, out: Outputs) -> dict:
    params = _device_params(cfg, args)
    rec, template = _recording(cfg, args)
    ref = _reference(cfg, args, template)
    if ref is not None and ref.method == "ground_truth" and rec.ground_truth is None:
        raise InvalidInputError("recording carries no ground truth; choose another --reference")
    enc = _encoder(cfg, args)
    dev = Memristor(params, seed=derived_seeds(cfg.seed)["device"])
    res = run_pipeline(rec, dev, enc, ref, args.mode)

    n = len(res.bins)
    extra = {
        "significant": [int(s) for s in res.spikes] + [""] * len(res.noise),
        "quadrant": list(res.quadrants) + [""] * len(res.noise),
    }
    if res.reference is not None:
        extra["reference"] = [int(r) for r in res.reference] + [""] * len(res.noise)
    write_bins_csv(out.path("bins.csv"), res.bins, res.noise, extra)
    write_log_csv(out.path("measurements.csv"), res.log)
    write_json(out.path("band.json"), res.band.to_dict())
    summary = {"samples": len(rec), "measurements": len(res.log), "bins": n,
               "noise_pairs": len(res.noise), "spikes": int(sum(res.spikes)),
               "compression": len(rec) / len(res.log),
               "band_threshold_neg": res.band.threshold_neg}
    report = {"summary": dict(summary), "band": res.band.to_dict(),
              "encoder": _config_dict(enc), "device": _config_dict(params),
              "reference": _config_dict(ref) if ref else None, "seed": cfg.seed}
    if res.counts is not None:
        counts = res.counts.to_dict()
        write_json(out.path("confusion.json"), counts)
        report["confusion"] = counts
        summary.update(tp=res.counts.tp, fp=res.counts.fp, tn=res.counts.tn, fn=res.counts.fn,
                       tpr=truncate(res.counts.tpr), fpr=truncate(res.counts.fpr))
    write_json(out.path("report.json"), report)
    if not args.no_plot:
        from .plotting import plot_bins, plot_trace
        plot_bins(res.bins, res.spikes, res.band, out.path("bins.png"))
        plot_trace(rec.with_samples(enc.gain * rec.samples + enc.offset), res.log,
                   out.path("trace.png"))
    return summary


def _parse_gains(text):
    try:
        gains = [float(g) for g in text.split(",") if g.strip()]
    except ValueError:
        raise UsageError(f"--gains: cannot parse {text!r}") from None
    if not gains:
        raise UsageError("--gains needs at least one value")
    return gains


def cmd_bench(cfg: RunConfig, args, out: Outputs) -> dict:
    gains = _parse_gains(args.gains) if args.gains is not None else list(cfg.bench.gains)
    repeats = cfg.bench.repeats if args.repeats is None else args.repeats
    if repeats < 1:
        raise UsageError("--repeats must be >= 1")
    v_off = cfg.bench.v_off if args.offset is None else args.offset
    params = _device_params(cfg, args)
    rec, template = _recording(cfg, args)
    ref = _reference(cfg, args, template)
    if ref is None:
        raise UsageError("bench needs a reference detector")

    summaries = roc_sweep(rec, lambda s: Memristor(params, seed=s), gains, v_off=v_off,
                          repeats=repeats, seed=derived_seeds(cfg.seed)["bench"],
                          enc=cfg.encoder, ref=ref, mode=args.mode)

    def fmt(x):
        return "" if math.isnan(x) else repr(x)

    with open(out.path("roc.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["kind", "gain", "repeat", "seed", "tp", "fp", "tn", "fn", "tpr", "fpr"])
        for s in summaries:
            for p in s.points:
                c = p.counts
                w.writerow(["point", repr(s.gain), p.repeat, p.seed, c.tp, c.fp, c.tn, c.fn,
                            fmt(c.tpr), fmt(c.fpr)])
            w.writerow(["average", repr(s.gain), "", "", "", "", "", "",
                        fmt(s.mean_tpr), fmt(s.mean_fpr)])
    write_json(out.path("roc.json"), {
        "v_off": v_off, "repeats": repeats, "seed": cfg.seed,
        "gains": [{"gain": s.gain, "mean_tpr": s.mean_tpr, "mean_fpr": s.mean_fpr,
                   "points": [dict(repeat=p.repeat, seed=p.seed, **p.counts.to_dict())
                              for p in s.points]} for s in summaries]})
    if not args.no_plot:
        from .plotting import plot_roc
        plot_roc(summaries, out.path("roc.png"))
    summary = {}
    for s in summaries:
        summary[f"mean_tpr@{s.gain:g}"] = s.mean_tpr
        summary[f"mean_fpr@{s.gain:g}"] = s.mean_fpr
    return summary


def _parse_set(items, cls):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    over = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = (x.strip() for x in item.split("=", 1))
        if key not in fields:
            raise UsageError(f"--set: unknown power field {key!r}")
        default = fields[key].default
        try:
            if isinstance(default, bool):
                over[key] = value.lower() in ("1", "true", "yes", "on")
            elif isinstance(default, int):
                over[key] = int(value)
            else:
                over[key] = float(value)
        except ValueError:
            raise UsageError(f"--set {key}: cannot parse {value!r}") from None
    return over


def cmd_power(cfg: RunConfig, args, out: Outputs) -> dict:
    if args.preset:
        name, pcfg = args.preset, power_mod.preset(args.preset)
    else:
        name, pcfg = cfg.power_preset, cfg.power
    over = _parse_set(args.set, power_mod.PowerConfig)
    if over:
        pcfg = dataclasses.replace(pcfg, **over)
    rep = power_mod.batch_report(pcfg)
    data = rep.to_dict()
    with open(out.path("power.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["quantity", "value"])
        for k, v in data.items():
            w.writerow([k, repr(v)])
    write_json(out.path("power.json"), {"preset": name, "config": dataclasses.asdict(pcfg),
                                         "report": data})
    args._table = power_mod.format_table(name, rep)
    return {"preset": name, **data}


def cmd_synth(cfg: RunConfig, args, out: Outputs) -> dict:
    spec = dataclasses.replace(cfg.synth, seed=derived_seeds(cfg.seed)["synth"])
    rec = generate_recording(spec)
    if args.binary:
        path = out.path("recording.f32")
        out.path("recording.f32.meta")
        save_recording(rec, path, "binary")
    else:
        path = out.path("recording.txt")
        save_recording(rec, path, "text")
    if not args.no_plot:
        from .plotting import plot_recording
        plot_recording(rec, out.path("recording.png"))
    return {"path": str(path), "samples": len(rec), "fs_hz": rec.fs,
            "spikes": len(rec.ground_truth), "snr": spec.snr}


COMMANDS = {
    "characterize": cmd_characterize,
    "encode-detect": cmd_encode_detect,
    "bench": cmd_bench,
    "power": cmd_power,
    "synth": cmd_synth,
}


# -- argument parsing -------------------------------------------------------

def _global_flags(parser, suppress):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", metavar="PATH", default=d,
                        help=f"INI configuration file (default: ${CONFIG_ENV})")
    parser.add_argument("--seed", type=int, metavar="N", default=d, help="master seed")
    parser.add_argument("--out", metavar="DIR", default=d, help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), default=d,
                        help="stdout summary format (files are always written as CSV and JSON)")
    parser.add_argument("--no-plot", action="store_true",
                        default=argparse.SUPPRESS if suppress else False, help="skip figures")
    parser.add_argument("-v", "--verbose", action="store_true",
                        default=argparse.SUPPRESS if suppress else False)


def _source_flags(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--synth", action="store_true", help="generate the recording from [synth]")
    src.add_argument("--recording", metavar="PATH", help="recording file (text or .f32)")
    p.add_argument("--device", metavar="PRESET", help=f"device preset {sorted(device_mod.PRESETS)}")
    p.add_argument("--reference", choices=METHODS + ("none",))
    p.add_argument("--threshold", type=float, help="reference detector threshold")
    p.add_argument("--mode", choices=device_mod.REGIMES, help="noise-band mode (default: device regime)")
    p.add_argument("--offset", type=float, help="offset stage voltage")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memspike", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("characterize", parents=[common], help="volatility sweep of a simulated device")
    p.add_argument("--device", metavar="PRESET")
    p.add_argument("--noise-floor", type=float, help="relative change floor for threshold extraction")

    p = sub.add_parser("encode-detect", parents=[common], help="encode a recording and detect spikes")
    _source_flags(p)
    p.add_argument("--gain", type=float, help="gain stage")

    p = sub.add_parser("bench", parents=[common], help="ROC sweep over gains")
    _source_flags(p)
    p.add_argument("--gains", metavar="G1,G2,...")
    p.add_argument("--repeats", type=int)

    p = sub.add_parser("power", parents=[common], help="energy and average power of the schedule")
    p.add_argument("preset", nargs="?", help=f"one of {sorted(power_mod.PRESETS)}")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a power field")

    p = sub.add_parser("synth", parents=[common], help="write a synthetic recording")
    p.add_argument("--binary", action="store_true", help="float32 samples plus .meta sidecar")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    out = None
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise UsageError("--seed must be >= 0")
            cfg = dataclasses.replace(cfg, seed=args.seed)
        out = Outputs(Path(args.out if args.out is not None else cfg.out))
        out.prepare()
        summary = COMMANDS[args.command](cfg, args, out)
    except (ConfigError, UsageError) as exc:
        if out is not None:
            out.discard()
        print(f"memspike: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MemspikeError, OSError) as exc:
        if out is not None:
            out.discard()
        print(f"memspike: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except BaseException:
        if out is not None:
            out.discard()
        raise
    fmt = args.format or "csv"
    if args.command == "power" and fmt == "csv":
        print(args._table)
    else:
        _emit(summary, fmt)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
