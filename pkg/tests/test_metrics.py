import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cascade_indi.errors import SchemaError
from cascade_indi.metrics import (SETTLE_BAND, aggregate, jet_entries, metrics_from_trace,
                                  reference_events, retrack_time, settling_time)
from cascade_indi.trace import Trace

DT = 1.0 / 512
POS_COLUMNS = ("tick", "time_s", "pos_n", "pos_e", "pos_d", "ref_n", "ref_e", "ref_d")


def make_trace(error_n, ref=None, extra=None):
    n = len(error_n)
    extra = extra or {}
    tr = Trace(POS_COLUMNS + tuple(extra), n)
    ref = np.zeros((n, 3)) if ref is None else ref
    for k in range(n):
        row = tr.append_row()
        row[:8] = [k, k * DT, ref[k, 0] + error_n[k], ref[k, 1], ref[k, 2], *ref[k]]
        for j, col in enumerate(extra):
            row[8 + j] = extra[col][k]
    return tr


def test_zero_error_trace():
    m = metrics_from_trace(make_trace(np.zeros(2048)))
    assert np.all(m.peak == 0) and m.peak_horizontal == 0
    assert [w.settling_time for w in m.windows] == [0.0]
    assert math.isnan(m.rms_accel_error) and math.isnan(m.saturation_fraction)


def test_triangular_pulse_peak_and_settling():
    # 0.3 m apex at 0.5 s, decaying linearly so that the error re-enters the
    # 0.05 m band at exactly t = 2 s and reaches zero at 2.3 s
    t = np.arange(5 * 512) * DT
    rise = 0.3 * t / 0.5
    fall = 0.3 * (2.3 - t) / 1.8
    err = np.clip(np.minimum(rise, fall), 0.0, None)
    m = metrics_from_trace(make_trace(err), events=[])
    w = m.windows[0]
    assert w.peak[0] == pytest.approx(0.3, abs=0.3 * DT / 0.5)
    assert w.peak_time == pytest.approx(0.5, abs=DT)
    assert w.settling_time == pytest.approx(2.0, abs=DT)


def test_never_settles_is_nan():
    err = np.full(2048, 0.2)
    w = metrics_from_trace(make_trace(err)).windows[0]
    assert not w.settled and math.isnan(w.settling_time)


def test_hold_must_fit_inside_window():
    # error enters the band 0.5 s before the trace ends: a 1 s hold is impossible
    err = np.r_[np.full(1024, 0.2), np.zeros(256)]
    assert math.isnan(metrics_from_trace(make_trace(err)).windows[0].settling_time)


def test_brief_band_entry_does_not_count():
    t = np.arange(4 * 512) * DT
    err = np.where((t > 1.0) & (t < 1.5), 0.0, 0.2)
    err[t >= 2.0] = 0.0
    assert settling_time(t, err, 0.0, 0) == pytest.approx(2.0, abs=DT)


@given(arrays(np.float64, 600, elements=st.floats(0, 0.5)), st.integers(0, 599))
def test_settling_is_nonnegative_or_nan(err, k_peak):
    t = np.arange(err.size) * 0.01
    s = settling_time(t, err, 0.0, k_peak)
    assert math.isnan(s) or s >= 0


@given(arrays(np.float64, 600, elements=st.floats(0, 0.5)))
def test_settled_error_stays_in_band(err):
    t = np.arange(err.size) * 0.01
    k_peak = int(np.argmax(err))
    s = settling_time(t, err, 0.0, k_peak)
    if not math.isnan(s) and s > 0:
        k = int(round(s / 0.01))
        assert np.all(err[k:k + 101] <= SETTLE_BAND)


def test_windows_split_at_reference_changes():
    n = 6 * 512
    ref = np.zeros((n, 3))
    ref[2 * 512:, 1] = 2.0
    pos_e = np.zeros(n)
    pos_e[2 * 512:] = 2.0 - 2.0 * np.exp(-(np.arange(n - 2 * 512) * DT) / 0.3)
    tr = make_trace(np.zeros(n), ref=ref)
    tr.data[:, tr.index["pos_e"]] = pos_e
    assert reference_events(tr) == [2.0]
    m = metrics_from_trace(tr)
    assert len(m.windows) == 2
    w0, w1 = m.windows
    assert w0.peak_norm == 0 and w0.settling_time == 0
    assert w1.start == 2.0 and w1.peak[1] == pytest.approx(2.0)
    # exponential 2 e^{-t/0.3} leaves the band at 0.3 ln 40
    assert w1.settling_time == pytest.approx(0.3 * math.log(40), abs=DT)


def test_missing_columns_schema_error():
    tr = Trace(("tick", "time_s", "pos_n"), 3)
    with pytest.raises(SchemaError):
        metrics_from_trace(tr)


def test_rms_and_saturation_columns():
    n = 512
    extra = {"accf_n": np.ones(n), "accf_e": np.zeros(n), "accf_d": np.zeros(n),
             "nu_n": np.zeros(n), "nu_e": np.zeros(n), "nu_d": np.zeros(n),
             "rotor_saturated": (np.arange(n) < 128).astype(float)}
    m = metrics_from_trace(make_trace(np.zeros(n), extra=extra))
    assert m.rms_accel_error == pytest.approx(1.0)
    assert m.saturation_fraction == pytest.approx(0.25)


def test_aggregate_single_run_is_exact():
    t = np.arange(3 * 512) * DT
    row = metrics_from_trace(make_trace(0.2 * np.exp(-t))).as_row()
    agg = aggregate([row])
    for k, v in row.items():
        mean, std = agg[k]
        assert (mean == v) or (math.isnan(mean) and math.isnan(v))
        assert std == 0 or math.isnan(v)


def test_aggregate_mean_and_std():
    agg = aggregate([{"a": 1.0}, {"a": 3.0}])
    assert agg["a"] == (2.0, 1.0)
    with pytest.raises(SchemaError):
        aggregate([{"a": 1.0}, {"b": 1.0}])


def test_jet_entries_and_retrack_oracle():
    n = 3 * 512
    t = np.arange(n) * DT
    inside = t >= 1.0
    wind_n = np.where(inside, -10.0, 0.0)
    tau = 0.1
    dev = np.where(inside, np.exp(-(t - 1.0) / tau), 0.0)
    extra = {"wind_n": wind_n, "wind_e": np.zeros(n), "wind_d": np.zeros(n),
             "accf_n": dev, "accf_e": np.zeros(n), "accf_d": np.zeros(n),
             "nu_n": np.zeros(n), "nu_e": np.zeros(n), "nu_d": np.zeros(n)}
    tr = make_trace(np.zeros(n), extra=extra)
    entries = jet_entries(tr, 10.0)
    assert entries == [pytest.approx(1.0, abs=DT)]
    # a 50 ms moving average of e^{-s/tau} peaks once the window fills and then
    # decays with the same time constant: 10% is reached tau ln 10 later
    assert retrack_time(tr, entries[0]) == pytest.approx(0.05 + tau * math.log(10), abs=2 * DT)


def test_retrack_never_is_nan():
    n = 1024
    ramp = np.arange(n) * DT
    extra = {"accf_n": ramp, "accf_e": np.zeros(n), "accf_d": np.zeros(n),
             "nu_n": np.zeros(n), "nu_e": np.zeros(n), "nu_d": np.zeros(n)}
    assert math.isnan(retrack_time(make_trace(np.zeros(n), extra=extra), 0.0))
