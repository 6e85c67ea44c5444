"""Vehicle parameters and state, plus the nominal effectiveness derived from them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..adaptation import ThrustCurve
from ..errors import ContractViolation
from ..inner import EffectivenessModel

GRAVITY = 9.81


@dataclass
class VehicleParams:
    """Physical model of an X-configuration quadrotor.

    Rotor order: front-left, front-right, rear-right, rear-left.  ``arm_l`` is
    the distance of each rotor from the centre of gravity along body X and
    ``arm_b`` along body Y.  ``spin`` gives the sign of each rotor's reaction
    torque about body Z.
    """

    mass: float = 0.5
    inertia: tuple = (2.2e-3, 2.9e-3, 4.5e-3)
    arm_l: float = 0.08
    arm_b: float = 0.11
    k_thrust: float = 6.0e-6
    k_torque: float = 1.0e-7
    rotor_inertia: float = 1.5e-6
    spin: tuple = (1.0, -1.0, 1.0, -1.0)
    alpha: float = 0.1
    omega_min: float = 150.0
    omega_max: float = 800.0
    drag: tuple = (0.15, 0.15, 0.15)

    def __post_init__(self):
        self.inertia = tuple(float(v) for v in self.inertia)
        self.spin = tuple(float(v) for v in self.spin)
        self.drag = tuple(float(v) for v in self.drag)
        if self.mass <= 0 or min(self.inertia) <= 0 or self.arm_l <= 0 or self.arm_b <= 0:
            raise ContractViolation("mass, inertia and arm lengths must be positive")
        if min(self.drag) < 0:
            raise ContractViolation("drag coefficients must be non-negative")
        if len(self.inertia) != 3 or len(self.drag) != 3 or len(self.spin) != 4:
            raise ContractViolation("inertia/drag need 3 entries and spin 4")
        if self.k_thrust <= 0 or self.k_torque < 0 or self.rotor_inertia < 0:
            raise ContractViolation("rotor coefficients must be non-negative (thrust > 0)")
        if not 0 < self.alpha <= 1:
            raise ContractViolation("actuator alpha must lie in (0, 1]")
        if not 0 <= self.omega_min < self.omega_max:
            raise ContractViolation("rotor speed limits must satisfy 0 <= min < max")

    @property
    def rotor_x(self):
        l = self.arm_l
        return np.array([l, l, -l, -l])

    @property
    def rotor_y(self):
        b = self.arm_b
        return np.array([-b, b, b, -b])

    @property
    def hover_speed(self):
        return math.sqrt(self.mass * GRAVITY / (4.0 * self.k_thrust))

    @property
    def thrust_range(self):
        """Achievable total thrust interval (negative values, body Z down)."""
        return (-4.0 * self.k_thrust * self.omega_max ** 2, -4.0 * self.k_thrust * self.omega_min ** 2)

    def kernel_params(self):
        return np.array([self.mass, *self.inertia, self.k_thrust, self.k_torque,
                         self.rotor_inertia, GRAVITY, *self.drag])

    def thrust_curve(self):
        return ThrustCurve(0.0, 0.0, self.k_thrust, self.omega_min, self.omega_max)


def nominal_effectiveness(params: VehicleParams, sample_time, omega0=None):
    """G1/G2 linearized about rotor speed ``omega0`` (hover by default)."""
    w0 = params.hover_speed if omega0 is None else float(omega0)
    jx, jy, jz = params.inertia
    kt2 = 2.0 * params.k_thrust * w0
    spin = np.array(params.spin)
    g1 = np.vstack([
        -params.rotor_y * kt2 / jx,
        params.rotor_x * kt2 / jy,
        spin * 2.0 * params.k_torque * w0 / jz,
        np.full(4, -kt2),
    ])
    g2 = np.zeros((4, 4))
    g2[2] = spin * params.rotor_inertia / (jz * sample_time)
    return EffectivenessModel(g1, g2, sample_time)


@dataclass
class VehicleState:
    xi: np.ndarray = field(default_factory=lambda: np.zeros(3))
    xi_dot: np.ndarray = field(default_factory=lambda: np.zeros(3))
    q: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    Omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega: np.ndarray = field(default_factory=lambda: np.zeros(4))
    on_ground: bool = False

    def __post_init__(self):
        self.xi = np.asarray(self.xi, dtype=float).copy()
        self.xi_dot = np.asarray(self.xi_dot, dtype=float).copy()
        self.q = np.asarray(self.q, dtype=float).copy()
        self.Omega = np.asarray(self.Omega, dtype=float).copy()
        self.omega = np.asarray(self.omega, dtype=float).copy()

    @classmethod
    def hover(cls, params: VehicleParams, xi=(0.0, 0.0, 0.0), yaw=0.0, on_ground=False):
        q = np.array([math.cos(0.5 * yaw), 0.0, 0.0, math.sin(0.5 * yaw)])
        return cls(xi=np.asarray(xi, dtype=float), q=q,
                   omega=np.full(4, params.hover_speed), on_ground=on_ground)

    def rigid_body(self):
        return np.concatenate([self.xi, self.xi_dot, self.q, self.Omega])

    def copy(self):
        return VehicleState(self.xi, self.xi_dot, self.q, self.Omega, self.omega, self.on_ground)

    def is_finite(self):
        return bool(np.isfinite(self.rigid_body()).all() and np.isfinite(self.omega).all())
