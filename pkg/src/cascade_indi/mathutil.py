"""Quaternions, rotations, the synchronized second-order filter and the
first-order actuator model.

Conventions: quaternions are ``[w, x, y, z]`` Hamilton quaternions rotating
body-frame vectors into the NED frame; Euler angles are ZYX (yaw, pitch, roll).
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from ._jit import njit
from .errors import ContractViolation, SingularAttitudeError

# |theta| must stay this far from pi/2 for Euler extraction
GIMBAL_MARGIN = 1e-6
_SIN_GIMBAL = math.cos(GIMBAL_MARGIN)


class EulerAngles(NamedTuple):
    phi: float
    theta: float
    psi: float


# ----------------------------------------------------------------------------
# kernels
# ----------------------------------------------------------------------------

@njit
def quat_mul_k(p, q):
    pw, px, py, pz = p[0], p[1], p[2], p[3]
    qw, qx, qy, qz = q[0], q[1], q[2], q[3]
    out = np.empty(4)
    out[0] = pw * qw - px * qx - py * qy - pz * qz
    out[1] = pw * qx + px * qw + py * qz - pz * qy
    out[2] = pw * qy - px * qz + py * qw + pz * qx
    out[3] = pw * qz + px * qy - py * qx + pz * qw
    return out


@njit
def rotmat_k(q):
    w, x, y, z = q[0], q[1], q[2], q[3]
    m = np.empty((3, 3))
    m[0, 0] = 1.0 - 2.0 * (y * y + z * z)
    m[0, 1] = 2.0 * (x * y - w * z)
    m[0, 2] = 2.0 * (x * z + w * y)
    m[1, 0] = 2.0 * (x * y + w * z)
    m[1, 1] = 1.0 - 2.0 * (x * x + z * z)
    m[1, 2] = 2.0 * (y * z - w * x)
    m[2, 0] = 2.0 * (x * z - w * y)
    m[2, 1] = 2.0 * (y * z + w * x)
    m[2, 2] = 1.0 - 2.0 * (x * x + y * y)
    return m


@njit
def biquad_step_k(coeffs, s1, s2, x):
    """Direct form II transposed biquad, all channels at once (in place)."""
    b0, b1, b2, a1, a2 = coeffs[0], coeffs[1], coeffs[2], coeffs[3], coeffs[4]
    y = b0 * x + s1
    s1[:] = b1 * x - a1 * y + s2
    s2[:] = b2 * x - a2 * y
    return y


# ----------------------------------------------------------------------------
# quaternion helpers
# ----------------------------------------------------------------------------

def quat_normalize(q):
    q = np.asarray(q, dtype=float)
    n = math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])
    if not n > 0.0 or not math.isfinite(n):
        raise ContractViolation(f"cannot normalize quaternion {q}")
    return q / n


def quat_conj(q):
    q = np.asarray(q, dtype=float)
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_mul(p, q):
    return quat_mul_k(np.asarray(p, dtype=float), np.asarray(q, dtype=float))


def _check_unit(q, tol=1e-6):
    n = float(np.dot(q, q))
    if not abs(math.sqrt(n) - 1.0) <= tol:
        raise ContractViolation(f"quaternion norm {math.sqrt(n):.3g} is not unit")


def quat_to_rotation(q) -> np.ndarray:
    """Body-to-NED rotation matrix of a unit quaternion."""
    q = np.asarray(q, dtype=float)
    if q.shape != (4,):
        raise ContractViolation(f"quaternion must have shape (4,), got {q.shape}")
    _check_unit(q)
    return rotmat_k(q)


def quat_from_euler(e) -> np.ndarray:
    phi, theta, psi = e
    cr, sr = math.cos(0.5 * phi), math.sin(0.5 * phi)
    cp, sp = math.cos(0.5 * theta), math.sin(0.5 * theta)
    cy, sy = math.cos(0.5 * psi), math.sin(0.5 * psi)
    return np.array([
        cr * cp * cy + sr * sp * sy,
        sr * cp * cy - cr * sp * sy,
        cr * sp * cy + sr * cp * sy,
        cr * cp * sy - sr * sp * cy,
    ])


def euler_from_quat(q) -> EulerAngles:
    """ZYX Euler angles; raises :class:`SingularAttitudeError` near |pitch| = pi/2."""
    w, x, y, z = (float(v) for v in q)
    s = 2.0 * (w * y - z * x)
    if abs(s) >= _SIN_GIMBAL:
        raise SingularAttitudeError(f"pitch too close to +-pi/2 (sin={s!r})")
    phi = math.atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y))
    theta = math.asin(s)
    psi = math.atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z))
    return EulerAngles(phi, theta, psi)


def finite_difference(current, previous, sample_time):
    if not sample_time > 0:
        raise ContractViolation("sample time must be positive")
    return (np.asarray(current, dtype=float) - np.asarray(previous, dtype=float)) / sample_time


# ----------------------------------------------------------------------------
# filters and actuators
# ----------------------------------------------------------------------------

def bilinear_coefficients(omega_n, zeta, sample_time):
    """Tustin discretization of wn^2 / (s^2 + 2 zeta wn s + wn^2).

    Returns ``[b0, b1, b2, a1, a2]`` with the leading denominator coefficient
    normalized to one.
    """
    k = 2.0 / sample_time
    w2 = omega_n * omega_n
    d = k * k + 2.0 * zeta * omega_n * k + w2
    b0 = w2 / d
    return np.array([
        b0,
        2.0 * b0,
        b0,
        (2.0 * w2 - 2.0 * k * k) / d,
        (k * k - 2.0 * zeta * omega_n * k + w2) / d,
    ])


class SyncFilter:
    """Discretized second-order low-pass filter over ``channels`` signals.

    Every incremental feedback signal in both control loops goes through an
    instance of this class built from the same ``(omega_n, zeta, sample_time)``;
    identical parameters give identical coefficients and therefore identical
    delay, which is what lets increments be combined across loops.
    """

    def __init__(self, omega_n, zeta, sample_time, channels=1):
        if not (omega_n > 0 and zeta > 0 and sample_time > 0):
            raise ContractViolation("filter needs omega_n > 0, zeta > 0, sample_time > 0")
        if channels < 1:
            raise ContractViolation("filter needs at least one channel")
        self.omega_n = float(omega_n)
        self.zeta = float(zeta)
        self.sample_time = float(sample_time)
        self.channels = int(channels)
        self.coeffs = bilinear_coefficients(self.omega_n, self.zeta, self.sample_time)
        self._s1 = np.zeros(self.channels)
        self._s2 = np.zeros(self.channels)
        self.output = np.zeros(self.channels)

    @property
    def params(self):
        return (self.omega_n, self.zeta, self.sample_time)

    def twin(self, channels=None):
        """A fresh filter with the same parameterization."""
        return SyncFilter(self.omega_n, self.zeta, self.sample_time,
                          self.channels if channels is None else channels)

    def _as_input(self, sample):
        x = np.asarray(sample, dtype=float).reshape(-1)
        if x.shape[0] != self.channels:
            raise ContractViolation(
                f"filter has {self.channels} channels, got sample of size {x.shape[0]}")
        return x

    def step(self, sample):
        x = self._as_input(sample)
        self.output = biquad_step_k(self.coeffs, self._s1, self._s2, x)
        return self.output

    def reset(self, steady_value=0.0):
        """Put the filter at the equilibrium for a constant input; returns that output."""
        c = np.broadcast_to(np.asarray(steady_value, dtype=float), (self.channels,)).copy()
        b0, b1, b2, a1, a2 = self.coeffs
        self._s2[:] = (b2 - a2) * c
        self._s1[:] = (b1 - a1) * c + self._s2
        self.output = c
        return c

    def impulse_response(self, n):
        f = self.twin(1)
        out = np.empty(n)
        for k in range(n):
            out[k] = f.step([1.0 if k == 0 else 0.0])[0]
        return out


@njit
def actuator_step_k(state, command, alpha, lo, hi):
    out = state + alpha * (command - state)
    for i in range(out.shape[0]):
        if out[i] < lo:
            out[i] = lo
        elif out[i] > hi:
            out[i] = hi
    return out


class ActuatorModel:
    """First-order discrete rotor dynamics ``w(k+1) = w(k) + alpha (w_c(k) - w(k))``."""

    def __init__(self, alpha=0.1, omega_min=0.0, omega_max=np.inf, n=4, initial=None):
        if not 0.0 < alpha <= 1.0:
            raise ContractViolation("actuator alpha must lie in (0, 1]")
        if omega_min > omega_max:
            raise ContractViolation("omega_min exceeds omega_max")
        self.alpha = float(alpha)
        self.omega_min = float(omega_min)
        self.omega_max = float(omega_max)
        init = np.full(n, self.omega_min) if initial is None else np.asarray(initial, dtype=float)
        self.state = np.clip(init.astype(float), self.omega_min, self.omega_max)

    def step(self, command):
        self.state = actuator_step_k(self.state, np.asarray(command, dtype=float),
                                     self.alpha, self.omega_min, self.omega_max)
        return self.state
