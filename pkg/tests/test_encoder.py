import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from memspike.device import DeviceParams, Memristor
from memspike.encoder import (BASELINE, BATCH_END, BATCH_START, INTRA, EncoderConfig, Measurement,
                              MeasurementLog, batch_read_offsets, bin_changes, drive_and_measure,
                              preprocess, write_bins_csv, write_log_csv)
from memspike.errors import InvalidInputError, PerturbingReadError
from memspike.recording import Recording


def test_preprocess_examples():
    rec = Recording([-0.5, 0.0, 0.25], ground_truth=(1,))
    assert np.array_equal(preprocess(rec, 1, 0).samples, rec.samples)
    assert preprocess(rec, 3.2, 0).samples[0] == pytest.approx(-1.6)
    out = preprocess(rec, 2.6, -0.6)
    assert out.samples[1] == pytest.approx(-0.6)
    assert out.fs == rec.fs and out.ground_truth == (1,)
    with pytest.raises(InvalidInputError):
        preprocess(rec, 0, 0)
    with pytest.raises(InvalidInputError):
        preprocess(rec, math.inf, 0)


def test_encoder_config_validation():
    with pytest.raises(InvalidInputError):
        EncoderConfig(batch_size=300, read_stride=300)
    with pytest.raises(InvalidInputError):
        EncoderConfig(read_stride=0)
    with pytest.raises(InvalidInputError):
        EncoderConfig(pulse_width=0)


def test_read_offsets():
    cfg = EncoderConfig()
    assert batch_read_offsets(1000, cfg) == [300, 600, 900, 1000]
    assert batch_read_offsets(250, cfg) == [250]
    assert batch_read_offsets(600, cfg) == [300, 600]


def _run(n, params=None, cfg=None, samples=None):
    params = params or DeviceParams()
    cfg = cfg or EncoderConfig()
    rec = Recording(np.zeros(n) if samples is None else samples)
    log = drive_and_measure(Memristor(params), rec, cfg)
    return log, rec


def test_full_recording_counts():
    log, rec = _run(63_000)
    bins, noise = bin_changes(log, rec)
    assert len(log) == 316
    assert len(bins) == 252
    assert len(noise) == 62
    assert 199 <= 63_000 / len(log) <= 200
    assert len(log.of_kind(BASELINE)) == 1
    assert len(log.of_kind(BATCH_START)) == 63
    assert len(log.of_kind(BATCH_END)) == 63
    assert len(log.of_kind(INTRA)) == 189


def test_single_batch():
    log, rec = _run(1000)
    bins, noise = bin_changes(log, rec)
    assert len(log) == 6 and len(bins) == 4 and noise == []
    assert [m.sample_index for m in log] == [0, 0, 300, 600, 900, 1000]


def test_partial_trailing_batch():
    log, rec = _run(2450)
    bins, noise = bin_changes(log, rec)
    # two full batches (5 reads each) plus a 450-sample tail read at 300 and 450
    assert len(log) == 1 + 5 + 5 + 3
    assert [b.span for b in bins][-2:] == [(2000, 2300), (2300, 2450)]
    assert len(noise) == 2


def test_zero_recording_at_equilibrium():
    log, _ = _run(5000)
    assert all(m.r == 1e6 for m in log)


def test_no_relaxation_subthreshold_deltas_zero():
    p = DeviceParams(tau=math.inf)
    rng = np.random.default_rng(0)
    samples = rng.uniform(-1.4, 1.5, 4000)
    log, rec = _run(4000, p, samples=samples)
    bins, noise = bin_changes(log, rec)
    assert all(b.delta_rel == 0 for b in bins + noise)


def test_spike_lowers_resistance():
    samples = np.zeros(1000)
    samples[450] = -3.0
    log, rec = _run(1000, samples=samples)
    bins, _ = bin_changes(log, rec)
    assert bins[1].span == (300, 600)
    assert bins[1].v_peak == -3.0
    assert bins[1].delta_rel < -0.3
    assert bins[2].delta_rel > 0  # relaxing back


def test_delta_definition():
    log = MeasurementLog([Measurement(0, 1.3e6, BASELINE), Measurement(0, 1.3e6, BATCH_START),
                          Measurement(10, 1.15e6, BATCH_END)])
    bins, noise = bin_changes(log, Recording(np.linspace(-0.1, 0.2, 10)))
    assert len(bins) == 1 and noise == []
    assert bins[0].delta_rel == pytest.approx(-0.11538461538461539, rel=1e-12)
    assert bins[0].v_peak == pytest.approx(0.2)


def test_length_mismatch_rejected():
    log, _ = _run(1000)
    with pytest.raises(InvalidInputError):
        bin_changes(log, Recording(np.zeros(999)))


def test_rejects_empty_and_perturbing():
    with pytest.raises(InvalidInputError):
        drive_and_measure(Memristor(DeviceParams()), Recording(np.zeros(1)).with_samples([]),
                          EncoderConfig())


def test_perturbing_read_rejected():
    with pytest.raises(PerturbingReadError):
        drive_and_measure(Memristor(DeviceParams()), Recording(np.zeros(10)), EncoderConfig(v_read=1.5))


def test_csv_layout(tmp_path):
    log, rec = _run(2000)
    bins, noise = bin_changes(log, rec)
    write_bins_csv(tmp_path / "b.csv", bins, noise, {"quadrant": ["TN"] * 8 + [""]})
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == ("start_index,end_index,r_before_ohm,r_after_ohm,delta_rel,v_peak_volt,"
                        "is_noise_pair,quadrant")
    assert lines[1] == "0,300,1000000.0,1000000.0,0.0,0.0,0,TN"
    assert lines[-1] == "1000,1000,1000000.0,1000000.0,0.0,0.0,1,"
    write_log_csv(tmp_path / "m.csv", log)
    mlines = (tmp_path / "m.csv").read_text().splitlines()
    assert mlines[:3] == ["sample_index,r_ohm,kind", "0,1000000.0,baseline", "0,1000000.0,batch_start"]


@given(st.integers(1, 5000), st.integers(2, 400), st.integers(1, 5))
def test_bins_partition_recording(n, batch, stride_div):
    stride = max(1, batch // (stride_div + 1))
    if stride >= batch:
        return
    cfg = EncoderConfig(batch_size=batch, read_stride=stride)
    log, rec = _run(n, cfg=cfg)
    bins, noise = bin_changes(log, rec)
    covered = np.zeros(n, dtype=int)
    for b in bins:
        covered[b.start:b.end] += 1
    assert np.all(covered == 1)
    assert all(b.v_peak == 0 and b.start == b.end for b in noise)
    n_batches = math.ceil(n / batch)
    assert len(noise) == n_batches - 1
    idx = [m.sample_index for m in log]
    assert idx == sorted(idx)
    full = n // batch
    per_batch = len(batch_read_offsets(batch, cfg)) + 1
    tail = n - full * batch
    assert len(log) == 1 + per_batch * full + (len(batch_read_offsets(tail, cfg)) + 1 if tail else 0)
