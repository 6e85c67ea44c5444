"""IMU and position-fix models driven by a seeded generator."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from ..errors import ContractViolation
from ..mathutil import rotmat_k
from .vehicle import GRAVITY, VehicleState

_G = np.array([0.0, 0.0, GRAVITY])


@dataclass
class SensorModels:
    accel_noise: float = 0.0
    accel_bias: tuple = (0.0, 0.0, 0.0)
    gyro_noise: float = 0.0
    fix_rate: float = 4.0
    pos_noise: float = 0.0
    vel_noise: float = 0.0

    def __post_init__(self):
        self.accel_bias = tuple(float(v) for v in self.accel_bias)
        if min(self.accel_noise, self.gyro_noise, self.pos_noise, self.vel_noise) < 0:
            raise ContractViolation("noise levels must be non-negative")
        if self.fix_rate <= 0:
            raise ContractViolation("fix rate must be positive")


class Fix(NamedTuple):
    position: np.ndarray
    velocity: np.ndarray


class SensorReading(NamedTuple):
    accel: np.ndarray  # body-frame specific force, m/s^2
    gyro: np.ndarray
    fix: Optional[Fix]


class SensorSuite:
    def __init__(self, models: SensorModels, sample_rate, rng: np.random.Generator):
        self.models = models
        self.rng = rng
        self.fix_period = max(1, int(round(sample_rate / models.fix_rate)))
        self._bias = np.asarray(models.accel_bias, dtype=float)

    def sample(self, state: VehicleState, accel_ned, tick) -> SensorReading:
        m = self.models
        R = rotmat_k(state.q)
        f_body = R.T @ (np.asarray(accel_ned, dtype=float) - _G)
        accel = f_body + self._bias + m.accel_noise * self.rng.standard_normal(3)
        gyro = state.Omega + m.gyro_noise * self.rng.standard_normal(3)
        fix = None
        if tick % self.fix_period == 0:
            fix = Fix(state.xi + m.pos_noise * self.rng.standard_normal(3),
                      state.xi_dot + m.vel_noise * self.rng.standard_normal(3))
        return SensorReading(accel, gyro, fix)


def sample_sensors(state: VehicleState, plant, wind, suite: SensorSuite, tick) -> SensorReading:
    """Read the IMU (and a fix on fix ticks) at ``state``."""
    return suite.sample(state, plant.acceleration(state, wind), tick)


def accel_to_ned(accel_body, q):
    """NED kinematic acceleration from a body specific-force reading."""
    return rotmat_k(np.asarray(q, dtype=float)) @ np.asarray(accel_body, dtype=float) + _G
