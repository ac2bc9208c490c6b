"""Spike detection with a simulated volatile memristor as the sensing element.

A recording is amplified, streamed through the device in 1000-sample batches
and read back a few times per batch. Spikes show up as resistance drops larger
than the read-noise band estimated at batch boundaries.
"""

__version__ = "0.1.0"

from .characterization import SweepConfig, VolatilityReport, extract_threshold, t_statistic, volatility_sweep
from .detection import ConfusionCounts, NoiseBand, benchmark, detect, noise_band
from .device import DeviceParams, DeviceState, Memristor, apply_sample, read_state, relax
from .encoder import BinRecord, EncoderConfig, MeasurementLog, bin_changes, drive_and_measure, preprocess
from .errors import MemspikeError
from .pipeline import run_pipeline, roc_sweep
from .power import PowerConfig, PowerReport, batch_report, pulse_energy
from .recording import Recording, load_recording, save_recording
from .synth import ReferenceConfig, SynthSpec, generate_recording, indices_to_bins, reference_detect

__all__ = [
    "ConfusionCounts", "BinRecord", "DeviceParams", "DeviceState", "EncoderConfig", "Memristor",
    "MeasurementLog", "MemspikeError", "NoiseBand", "PowerConfig", "PowerReport", "Recording",
    "ReferenceConfig", "SweepConfig", "SynthSpec", "VolatilityReport", "apply_sample", "batch_report",
    "benchmark", "bin_changes", "detect", "drive_and_measure", "extract_threshold",
    "generate_recording", "indices_to_bins", "load_recording", "noise_band", "preprocess",
    "pulse_energy", "read_state", "reference_detect", "relax", "roc_sweep", "run_pipeline",
    "save_recording", "t_statistic", "volatility_sweep",
]
