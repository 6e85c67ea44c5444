"""Rigid-body quadrotor dynamics with fixed-step RK4.

The rigid-body vector is ``[xi(3), xi_dot(3), q(4), Omega(3)]``.  Rotor speeds
are held over a tick; the rotor spin-up torque uses the speed change of the
tick divided by the sample time.
"""
from __future__ import annotations

import math

import numpy as np

from .._jit import njit
from ..mathutil import actuator_step_k
from .vehicle import VehicleParams, VehicleState

# indices into VehicleParams.kernel_params()
_M, _JX, _JY, _JZ, _KT, _KQ, _IR, _G, _DN, _DE, _DD = range(11)


@njit
def derivative_k(x, omega, domega, wind, p, rx, ry, spin):
    qw, qx, qy, qz = x[6], x[7], x[8], x[9]
    wx, wy, wz = x[10], x[11], x[12]

    thrust = 0.0
    mx = 0.0
    my = 0.0
    mz = 0.0
    for i in range(4):
        f = p[_KT] * omega[i] * omega[i]
        thrust += f
        mx -= ry[i] * f
        my += rx[i] * f
        mz += spin[i] * (p[_KQ] * omega[i] * omega[i] + p[_IR] * domega[i])

    # third column of the body-to-NED rotation
    r02 = 2.0 * (qx * qz + qw * qy)
    r12 = 2.0 * (qy * qz - qw * qx)
    r22 = 1.0 - 2.0 * (qx * qx + qy * qy)

    m = p[_M]
    dx = np.empty(13)
    dx[0] = x[3]
    dx[1] = x[4]
    dx[2] = x[5]
    dx[3] = (-r02 * thrust - p[_DN] * (x[3] - wind[0])) / m
    dx[4] = (-r12 * thrust - p[_DE] * (x[4] - wind[1])) / m
    dx[5] = p[_G] + (-r22 * thrust - p[_DD] * (x[5] - wind[2])) / m

    dx[6] = 0.5 * (-qx * wx - qy * wy - qz * wz)
    dx[7] = 0.5 * (qw * wx + qy * wz - qz * wy)
    dx[8] = 0.5 * (qw * wy - qx * wz + qz * wx)
    dx[9] = 0.5 * (qw * wz + qx * wy - qy * wx)

    jx, jy, jz = p[_JX], p[_JY], p[_JZ]
    dx[10] = (mx - (jz - jy) * wy * wz) / jx
    dx[11] = (my - (jx - jz) * wz * wx) / jy
    dx[12] = (mz - (jy - jx) * wx * wy) / jz
    return dx


@njit
def rk4_k(x, omega, domega, wind, p, rx, ry, spin, dt):
    k1 = derivative_k(x, omega, domega, wind, p, rx, ry, spin)
    k2 = derivative_k(x + 0.5 * dt * k1, omega, domega, wind, p, rx, ry, spin)
    k3 = derivative_k(x + 0.5 * dt * k2, omega, domega, wind, p, rx, ry, spin)
    k4 = derivative_k(x + dt * k3, omega, domega, wind, p, rx, ry, spin)
    out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    n = math.sqrt(out[6] ** 2 + out[7] ** 2 + out[8] ** 2 + out[9] ** 2)
    for i in range(6, 10):
        out[i] /= n
    return out


class Plant:
    """Packed kernel arguments for one :class:`VehicleParams`."""

    def __init__(self, params: VehicleParams):
        self.params = params
        self.p = params.kernel_params()
        self.rx = params.rotor_x
        self.ry = params.rotor_y
        self.spin = np.array(params.spin, dtype=float)

    def acceleration(self, state: VehicleState, wind):
        """NED acceleration at ``state`` with its current rotor speeds."""
        if state.on_ground:
            return np.zeros(3)
        dx = derivative_k(state.rigid_body(), state.omega, np.zeros(4),
                          np.asarray(wind, dtype=float), self.p, self.rx, self.ry, self.spin)
        return dx[3:6]

    def step(self, state: VehicleState, rotor_commands, wind, dt, ground_level=None):
        prm = self.params
        omega = actuator_step_k(state.omega, np.asarray(rotor_commands, dtype=float),
                                prm.alpha, prm.omega_min, prm.omega_max)
        domega = (omega - state.omega) / dt
        x = state.rigid_body()
        wind = np.zeros(3) if state.on_ground else np.asarray(wind, dtype=float)
        out = rk4_k(x, omega, domega, wind, self.p, self.rx, self.ry, self.spin, dt)
        on_ground = False
        if ground_level is not None and (state.on_ground or out[2] > ground_level):
            # below or resting on the ground: stay put unless net force lifts off
            if out[2] >= ground_level or (state.on_ground and out[5] >= 0.0):
                out[0:3] = x[0:3]
                out[2] = ground_level
                out[3:6] = 0.0
                on_ground = True
        return VehicleState(out[0:3], out[3:6], out[6:10], out[10:13], omega, on_ground)


def dynamics_step(state: VehicleState, params: VehicleParams, rotor_commands, wind, dt=1.0 / 512,
                  ground_level=None):
    """Advance ``state`` by one tick; see :class:`Plant` for repeated use."""
    return Plant(params).step(state, rotor_commands, wind, dt, ground_level)
