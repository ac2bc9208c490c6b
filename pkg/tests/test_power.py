import pytest
from hypothesis import given
from hypothesis import strategies as st

from memspike.errors import ConfigError, InvalidInputError
from memspike.power import PowerConfig, batch_report, format_table, preset, pulse_energy


def test_pulse_energy_examples():
    assert pulse_energy(0, 1e6, 1e-6) == 0
    assert pulse_energy(0.2, 1.1e6, 1e-6) == pytest.approx(3.6363636e-14, rel=1e-6)
    assert pulse_energy(5, 1e4, 1e-4) == pytest.approx(250e-9, rel=1e-12)
    with pytest.raises(InvalidInputError):
        pulse_energy(1, 0, 1)
    with pytest.raises(InvalidInputError):
        pulse_energy(1, 1, -1)


def test_preset_note2():
    rep = batch_report(preset("note2"))
    assert rep.e_read_total == pytest.approx(5 * 0.04 * 1e-6 / 1.1e6, rel=1e-12)
    assert rep.e_write_total == pytest.approx(9e-9, rel=1e-12)
    assert rep.batch_duration == pytest.approx(1000 / 12200)
    assert rep.p_avg == pytest.approx(109.8e-9, rel=2e-3)
    assert rep.e_read_device + rep.e_read_series == pytest.approx(rep.e_read_total)


def test_preset_note2_short_pulses():
    assert batch_report(preset("note2-100ns")).p_avg == pytest.approx(11e-9, rel=0.02)


def test_preset_note1():
    rep = batch_report(preset("note1"))
    assert rep.e_reset_each == pytest.approx(250e-9, rel=1e-12)
    assert rep.e_write_total == pytest.approx(250e-6, rel=1e-12)
    assert rep.e_read_total == pytest.approx(5 * 0.25 * 1e-4 / 1.1e4, rel=1e-12)
    assert rep.e_reset_per_batch == pytest.approx(11 * 250e-9 / 63, rel=1e-12)
    assert rep.p_avg == pytest.approx(3.05e-3, rel=0.02)


def test_series_on_write_flag():
    a = batch_report(PowerConfig())
    b = batch_report(PowerConfig(include_series_on_write=True))
    assert b.e_write_total == pytest.approx(a.e_write_total / 1.1)


def test_zero_voltage_is_zero_power():
    rep = batch_report(PowerConfig(v_read=0, v_write=0, v_reset=0, resets_per_recording=3))
    assert rep.p_avg == 0


def test_validation_and_presets():
    with pytest.raises(InvalidInputError):
        PowerConfig(r_device=0)
    with pytest.raises(InvalidInputError):
        PowerConfig(t_write=0)
    with pytest.raises(ConfigError):
        preset("note3")
    assert preset("note2", t_write=2e-6).t_write == 2e-6
    assert "average power" in format_table("note2", batch_report(preset("note2")))


positive = st.floats(1e-9, 1e-3)


@given(positive, st.floats(0.1, 10))
def test_write_energy_linear_in_pulse_width(t_write, v):
    cfg = PowerConfig(v_write=v, t_write=t_write, reads_per_batch=0)
    full = batch_report(cfg)
    half = batch_report(PowerConfig(v_write=v, t_write=t_write / 2, reads_per_batch=0))
    assert half.e_write_total == pytest.approx(full.e_write_total / 2, rel=1e-12)
    assert half.p_avg == pytest.approx(full.p_avg / 2, rel=1e-12)


@given(st.floats(1e3, 1e7), st.floats(1.01, 10))
def test_power_decreases_with_device_resistance(r, factor):
    lo = batch_report(PowerConfig(r_device=r))
    hi = batch_report(PowerConfig(r_device=r * factor))
    assert hi.p_avg < lo.p_avg


@given(st.integers(0, 20), st.floats(0, 1), st.floats(1e-7, 1e-3), st.floats(1e3, 1e7))
def test_report_is_plain_sum(n_reads, v_read, t_read, r):
    cfg = PowerConfig(r_device=r, reads_per_batch=n_reads, v_read=v_read, t_read=t_read)
    rep = batch_report(cfg)
    assert rep.e_read_total == n_reads * pulse_energy(v_read, r + cfg.r_series, t_read)
    assert rep.p_avg * rep.batch_duration == pytest.approx(
        rep.e_read_total + rep.e_write_total + rep.e_reset_per_batch, rel=1e-12)
