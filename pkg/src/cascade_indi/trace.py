"""Tick-indexed telemetry table with a fixed column schema per controller."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import SchemaError

_XYZ = ("n", "e", "d")
_RPY = ("p", "q", "r")


def _vec(prefix, names):
    return [f"{prefix}_{n}" for n in names]


COMMON_COLUMNS = (
    ["tick", "time_s"]
    + _vec("pos", _XYZ) + _vec("vel", _XYZ) + _vec("ref", _XYZ)
    + ["phi", "theta", "psi"]
    + _vec("rate", _RPY)
    + _vec("acc", _XYZ)
    + _vec("wind", _XYZ)
    + ["phi_c", "theta_c", "thrust_c", "thrust_est"]
    + _vec("nu_omega", _RPY)
    + [f"rotor_cmd_{i}" for i in range(4)]
    + [f"rotor_{i}" for i in range(4)]
    + ["rotor_saturated", "on_ground"]
)
INDI_COLUMNS = (
    _vec("nu", _XYZ) + _vec("accf", _XYZ) + _vec("bias", _XYZ)
    + ["thrust_increment", "outer_singular", "outer_infeasible", "outer_saturated"]
)
PID_COLUMNS = _vec("integ", _XYZ)


def columns_for(controller):
    """Column names of a trace; depends on the controller selection only."""
    extra = PID_COLUMNS if controller == "pid" else INDI_COLUMNS
    return tuple(COMMON_COLUMNS + extra)


class Trace:
    def __init__(self, columns, n_rows):
        self.columns = tuple(columns)
        self.index = {c: i for i, c in enumerate(self.columns)}
        self.data = np.full((n_rows, len(self.columns)), np.nan)
        self.n = 0

    @classmethod
    def for_controller(cls, controller, n_rows):
        return cls(columns_for(controller), n_rows)

    def slot(self, *names):
        """Column slice for a run of adjacent columns starting at ``names[0]``."""
        i = self.index[names[0]]
        return slice(i, i + len(names))

    def append_row(self):
        row = self.data[self.n]
        self.n += 1
        return row

    def finalize(self):
        self.data = self.data[: self.n]
        return self

    def __len__(self):
        return self.n

    def __getitem__(self, name):
        try:
            return self.data[: self.n, self.index[name]]
        except KeyError:
            raise SchemaError(f"trace has no column {name!r}") from None

    def vec(self, prefix, names=_XYZ):
        cols = [f"{prefix}_{n}" for n in names]
        missing = [c for c in cols if c not in self.index]
        if missing:
            raise SchemaError(f"trace is missing columns {missing}")
        return self.data[: self.n, [self.index[c] for c in cols]]

    def has(self, *names):
        return all(n in self.index for n in names)

    def equals(self, other):
        """Bit-level equality (NaN matches NaN)."""
        return (self.columns == other.columns and self.n == other.n
                and np.array_equal(self.data[: self.n], other.data[: other.n], equal_nan=True))

    def to_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(",".join(self.columns) + "\n")
            np.savetxt(fh, self.data[: self.n], delimiter=",", fmt="%.17g")
        return path

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="", encoding="utf-8") as fh:
            header = next(csv.reader(fh))
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        if data.size and data.shape[1] != len(header):
            raise SchemaError(f"{path}: {data.shape[1]} values per row but {len(header)} columns")
        tr = cls(header, len(data))
        tr.data[:] = data.reshape(len(data), len(header))
        tr.n = len(data)
        return tr
