"""PID position controller used as the comparison baseline.

Gains are expressed in attitude units like a hand-tuned autopilot: the D gain
maps the velocity error (with the P gain mapping position error to a
velocity reference) to a tilt angle in rad, the I gain maps integrated
position error to a tilt angle.  The vertical axis uses the same laws with
tilt angles read as multiples of g.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolation
from .vehicle import GRAVITY


@dataclass(frozen=True)
class PidGains:
    p: float = 0.65
    i: float = 0.05
    d: float = 0.20
    i_limit: float = 0.3

    def __post_init__(self):
        if self.p < 0 or self.i < 0 or self.d < 0 or self.i_limit < 0:
            raise ContractViolation("PID gains and integrator limit must be non-negative")

    @property
    def mapped_p(self):
        """Equivalent acceleration per metre of position error (1/s^2)."""
        return GRAVITY * self.d * self.p


class PidBaseline:
    def __init__(self, gains: PidGains, mass, attitude_limit=0.7, thrust_range=(-np.inf, 0.0)):
        self.gains = gains
        self.mass = float(mass)
        self.attitude_limit = float(attitude_limit)
        self.thrust_range = thrust_range
        self.integrator = np.zeros(3)
        self._prev_error = None

    def reset(self):
        self.integrator[:] = 0.0
        self._prev_error = None

    def acceleration(self, xi_ref, xi, xi_dot, dt):
        g = self.gains
        e = np.asarray(xi_ref, dtype=float) - np.asarray(xi, dtype=float)
        if self._prev_error is not None and g.i > 0:
            self.integrator += 0.5 * (e + self._prev_error) * dt
            bound = g.i_limit / g.i
            np.clip(self.integrator, -bound, bound, out=self.integrator)
        self._prev_error = e
        tilt = g.d * (g.p * e - np.asarray(xi_dot, dtype=float)) + g.i * self.integrator
        return GRAVITY * tilt

    def step(self, xi_ref, xi, xi_dot, psi, dt):
        """Roll, pitch and absolute (negative) thrust commands."""
        a = self.acceleration(xi_ref, xi, xi_dot, dt)
        cpsi, spsi = math.cos(psi), math.sin(psi)
        ax = cpsi * a[0] + spsi * a[1]
        ay = -spsi * a[0] + cpsi * a[1]
        lim = self.attitude_limit
        theta_c = min(max(-ax / GRAVITY, -lim), lim)
        phi_c = min(max(ay / GRAVITY, -lim), lim)
        T_c = self.mass * (a[2] - GRAVITY) / (math.cos(phi_c) * math.cos(theta_c))
        lo, hi = self.thrust_range
        return phi_c, theta_c, min(max(T_c, lo), hi)


def pid_step(baseline: PidBaseline, xi_ref, xi, xi_dot, dt, psi=0.0):
    return baseline.step(xi_ref, xi, xi_dot, psi, dt)
