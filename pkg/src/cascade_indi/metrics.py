"""Run metrics computed from a trace: peak errors, settling, tracking, saturation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError

SETTLE_BAND = 0.05   # m
SETTLE_HOLD = 1.0    # s
AXES = ("n", "e", "d")


@dataclass
class WindowMetrics:
    """Metrics over one inter-event window ``[start, end)``."""

    start: float
    end: float
    peak: np.ndarray            # per-axis max |position error|, m
    peak_norm: float
    peak_time: float            # time of the largest error norm, s
    settling_time: float        # from ``start``; NaN means "not settled"

    @property
    def settled(self):
        return not math.isnan(self.settling_time)


@dataclass
class RunMetrics:
    peak: np.ndarray
    peak_time: np.ndarray
    peak_horizontal: float
    rms_accel_error: float      # NaN for controllers without an acceleration reference
    saturation_fraction: float
    windows: list = field(default_factory=list)

    def as_row(self):
        """Flat ``name -> value`` mapping; keys depend only on the window count."""
        row = {}
        for i, a in enumerate(AXES):
            row[f"peak_{a}"] = float(self.peak[i])
            row[f"peak_time_{a}"] = float(self.peak_time[i])
        row["peak_horizontal"] = self.peak_horizontal
        row["rms_accel_error"] = self.rms_accel_error
        row["saturation_fraction"] = self.saturation_fraction
        for j, w in enumerate(self.windows):
            row[f"w{j}_start"] = w.start
            for i, a in enumerate(AXES):
                row[f"w{j}_peak_{a}"] = float(w.peak[i])
            row[f"w{j}_peak_time"] = w.peak_time
            row[f"w{j}_settling_time"] = w.settling_time
        return row


def _require(trace, *names):
    missing = [n for n in names if not trace.has(n)]
    if missing:
        raise SchemaError(f"trace is missing columns {missing}")


def reference_events(trace):
    """Times at which the position reference changes."""
    _require(trace, "time_s", "ref_n", "ref_e", "ref_d")
    ref = trace.vec("ref")
    t = trace["time_s"]
    changed = np.any(ref[1:] != ref[:-1], axis=1)
    return [float(v) for v in t[1:][changed]]


def settling_time(time, error_norm, start, peak_index, end_index=None, band=SETTLE_BAND,
                  hold=SETTLE_HOLD):
    """Time from ``start`` until the error enters ``band`` and then stays there for ``hold``.

    The search runs from ``peak_index`` up to ``end_index`` (exclusive, default
    the end of the trace) and the hold must also fit before ``end_index``.
    A window whose peak is inside the band has settling time 0; NaN means
    there is no qualifying entry.
    """
    end_index = len(error_norm) if end_index is None else end_index
    if error_norm[peak_index] <= band:
        return 0.0  # never left the band
    inside = error_norm[peak_index:end_index] <= band
    dt = time[1] - time[0] if len(time) > 1 else 1.0
    need = int(round(hold / dt)) + 1   # samples covering [entry, entry + hold]
    # length of the in-band run starting at each sample
    run = np.zeros(inside.size + 1, dtype=int)
    for i in range(inside.size - 1, -1, -1):
        run[i] = run[i + 1] + 1 if inside[i] else 0
    hits = np.nonzero(run[:-1] >= need)[0]
    if hits.size == 0:
        return math.nan
    return float(time[peak_index + hits[0]] - start)


def metrics_from_trace(trace, events=None) -> RunMetrics:
    """Peak errors per inter-event window and overall; events default to reference changes."""
    _require(trace, "time_s", "pos_n", "pos_e", "pos_d", "ref_n", "ref_e", "ref_d")
    t = trace["time_s"]
    err = trace.vec("pos") - trace.vec("ref")
    abs_err = np.abs(err)
    norm = np.linalg.norm(err, axis=1)
    if len(t) == 0:
        raise SchemaError("empty trace")

    bounds = [float(t[0])] + sorted(float(e) for e in (events if events is not None
                                                        else reference_events(trace)))
    windows = []
    for j, start in enumerate(bounds):
        end = bounds[j + 1] if j + 1 < len(bounds) else math.inf
        idx = np.nonzero((t >= start) & (t < end))[0]
        if idx.size == 0:
            continue
        k_peak = idx[np.argmax(norm[idx])]
        windows.append(WindowMetrics(
            start=start, end=end,
            peak=abs_err[idx].max(axis=0),
            peak_norm=float(norm[k_peak]),
            peak_time=float(t[k_peak]),
            settling_time=settling_time(t, norm, start, k_peak, idx[-1] + 1),
        ))

    k_axis = np.argmax(abs_err, axis=0)
    horizontal = np.hypot(err[:, 0], err[:, 1])
    rms = math.nan
    if trace.has("accf_n", "nu_n"):
        dev = trace.vec("accf") - trace.vec("nu")
        rms = float(np.sqrt(np.mean(np.sum(dev * dev, axis=1))))
    sat = float(np.mean(trace["rotor_saturated"])) if trace.has("rotor_saturated") else math.nan
    return RunMetrics(
        peak=abs_err.max(axis=0),
        peak_time=t[k_axis].astype(float),
        peak_horizontal=float(horizontal.max()),
        rms_accel_error=rms,
        saturation_fraction=sat,
        windows=windows,
    )


def aggregate(rows):
    """Mean and population standard deviation per metric over a list of ``as_row`` dicts."""
    if not rows:
        raise ValueError("nothing to aggregate")
    keys = list(rows[0])
    for r in rows[1:]:
        if list(r) != keys:
            raise SchemaError("runs produced different metric sets")
    out = {}
    for k in keys:
        vals = np.array([r[k] for r in rows], dtype=float)
        out[k] = (float(np.mean(vals)), float(np.std(vals)))
    return out


# ----------------------------------------------------------------------------
# wind-disturbance helpers
# ----------------------------------------------------------------------------

def jet_entries(trace, jet_speed, fraction=0.5):
    """Times at which the wind speed at the vehicle rises through ``fraction * jet_speed``."""
    _require(trace, "time_s", "wind_n", "wind_e", "wind_d")
    speed = np.linalg.norm(trace.vec("wind"), axis=1)
    above = speed >= fraction * jet_speed
    rising = np.nonzero(above[1:] & ~above[:-1])[0] + 1
    if above[0]:
        rising = np.r_[0, rising]
    return [float(trace["time_s"][i]) for i in rising]


def retrack_time(trace, entry_time, axis=0, fraction=0.1, horizon=2.0, smooth=0.05):
    """Seconds after ``entry_time`` until the filtered acceleration re-tracks ``nu``.

    The tracking error ``|accf - nu|`` on ``axis`` is averaged over a moving
    window of ``smooth`` seconds to suppress turbulence noise; re-tracked means
    the smoothed error falls back to ``fraction`` of its peak in the ``horizon``
    after entry.  Returns NaN if that never happens within the horizon.
    """
    a = AXES[axis]
    _require(trace, "time_s", f"accf_{a}", f"nu_{a}")
    t = trace["time_s"]
    sel = np.nonzero((t >= entry_time) & (t <= entry_time + horizon))[0]
    if sel.size < 2:
        return math.nan
    dev = np.abs(trace[f"accf_{a}"][sel] - trace[f"nu_{a}"][sel])
    dt = t[1] - t[0]
    width = max(1, int(round(smooth / dt)))
    if width > 1:
        dev = np.convolve(dev, np.ones(width) / width, mode="full")[: dev.size]
    k_peak = int(np.argmax(dev))
    below = np.nonzero(dev[k_peak:] <= fraction * dev[k_peak])[0]
    if below.size == 0:
        return math.nan
    return float(t[sel[k_peak + below[0]]] - entry_time)
