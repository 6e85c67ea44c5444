"""Wind fields: constant wind, a windtunnel open jet, and a timed gust step."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolation

WIND_MODES = ("none", "constant", "windtunnel-jet", "gust-step")


@dataclass
class WindField:
    """Wind velocity as a function of position and time.

    ``windtunnel-jet`` models a horizontal open jet of square cross-section
    ``jet_size`` centred on ``jet_center`` and blowing along the horizontal
    unit vector ``jet_direction``.  The edge is blended linearly over
    ``blend_width``; white-noise turbulence of ``turbulence`` (m/s, per axis)
    is added inside the jet, or everywhere for the other modes.
    """

    mode: str = "none"
    vector: tuple = (0.0, 0.0, 0.0)
    jet_center: tuple = (0.0, 0.0, -1.0)
    jet_size: float = 2.85
    jet_speed: float = 10.0
    jet_direction: tuple = (-1.0, 0.0, 0.0)
    blend_width: float = 0.1
    turbulence: float = 0.0
    gust_time: float = 0.0

    def __post_init__(self):
        if self.mode not in WIND_MODES:
            raise ContractViolation(f"unknown wind mode {self.mode!r}")
        numbers = (*self.vector, *self.jet_center, *self.jet_direction, self.jet_size,
                   self.blend_width, self.turbulence, self.gust_time)
        if not np.all(np.isfinite(numbers)):
            raise ContractViolation("wind parameters must be finite")
        if not 0.0 <= self.jet_speed <= 30.0:
            raise ContractViolation("jet speed must lie in [0, 30] m/s")
        if self.turbulence < 0 or self.blend_width < 0 or self.jet_size <= 0:
            raise ContractViolation("turbulence, blend width must be >= 0 and jet size > 0")
        d = np.asarray(self.jet_direction, dtype=float)
        d[2] = 0.0
        n = np.linalg.norm(d)
        if n == 0:
            raise ContractViolation("jet direction must have a horizontal component")
        self._dir = d / n
        self._lat = np.array([-self._dir[1], self._dir[0], 0.0])
        self._center = np.asarray(self.jet_center, dtype=float)
        self._vector = np.asarray(self.vector, dtype=float)

    def jet_fraction(self, position):
        """0 outside the jet, 1 in its core, linear across the blended edge."""
        rel = np.asarray(position, dtype=float) - self._center
        half = 0.5 * self.jet_size
        frac = 1.0
        for d in (abs(float(rel @ self._lat)), abs(float(rel[2]))):
            if self.blend_width > 0:
                frac *= min(max((half - d) / self.blend_width + 0.5, 0.0), 1.0)
            else:
                frac *= 1.0 if d <= half else 0.0
        return frac

    def mean_wind(self, position, t=0.0):
        if self.mode == "none":
            return np.zeros(3)
        if self.mode == "constant":
            return self._vector.copy()
        if self.mode == "gust-step":
            return self._vector.copy() if t >= self.gust_time else np.zeros(3)
        return self.jet_speed * self.jet_fraction(position) * self._dir

    def sample(self, position, t, rng):
        w = self.mean_wind(position, t)
        if self.turbulence > 0.0:
            if self.mode == "windtunnel-jet":
                scale = self.turbulence * self.jet_fraction(position)
            else:
                scale = self.turbulence
            noise = rng.standard_normal(3)
            if scale > 0.0:
                w = w + scale * noise
        return w
