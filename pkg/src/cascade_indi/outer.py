"""Outer INDI loop: linear-acceleration control through the thrust vector.

Sign conventions: NED inertial frame, body Z pointing down, so hover thrust is
negative (``T = -m g``) and gravity is ``(0, 0, +g)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, InfeasibleThrustVectorError, SingularInversionError
from .mathutil import EulerAngles, SyncFilter

GRAVITY = 9.81


@dataclass(frozen=True)
class PositionGains:
    k_xi: float = 0.70
    k_xidot: float = 0.15 * GRAVITY

    def __post_init__(self):
        if not (self.k_xi > 0 and self.k_xidot > 0):
            raise ContractViolation("position gains must be positive")


@dataclass
class ThrustVectorCommand:
    phi_c: float
    theta_c: float
    T_tilde: float
    T_c: float
    singular: bool = False
    infeasible: bool = False
    saturated: bool = False


def thrust_vector_ned(eta, T):
    """NED thrust vector for body thrust ``[0, 0, T]`` at attitude ``eta``."""
    phi, theta, psi = eta[0], eta[1], eta[2]
    sphi, cphi = math.sin(phi), math.cos(phi)
    sth, cth = math.sin(theta), math.cos(theta)
    spsi, cpsi = math.sin(psi), math.cos(psi)
    return np.array([
        (sphi * spsi + cphi * cpsi * sth) * T,
        (cphi * spsi * sth - cpsi * sphi) * T,
        cphi * cth * T,
    ])


def effectiveness_jacobian(eta, T):
    """Partial derivatives of :func:`thrust_vector_ned` w.r.t. (phi, theta, T)."""
    phi, theta, psi = eta[0], eta[1], eta[2]
    sphi, cphi = math.sin(phi), math.cos(phi)
    sth, cth = math.sin(theta), math.cos(theta)
    spsi, cpsi = math.sin(psi), math.cos(psi)
    return np.array([
        [(cphi * spsi - sphi * cpsi * sth) * T, cphi * cpsi * cth * T, sphi * spsi + cphi * cpsi * sth],
        [(-sphi * spsi * sth - cpsi * cphi) * T, cphi * spsi * cth * T, cphi * spsi * sth - cpsi * sphi],
        [-cth * sphi * T, -sth * cphi * T, cphi * cth],
    ])


def invert_thrust_vector(thrust_ned, psi, strict=False):
    """Roll, pitch and (negative) thrust producing ``thrust_ned`` at yaw ``psi``.

    Returns ``(phi, theta, T, feasible)``.  Both arcsine arguments are within
    [-1, 1] up to rounding, which is saturated.  A vector with a downward
    component needs inverted flight that the arcsine branches cannot express:
    the returned attitude then matches only the horizontal part and
    ``feasible`` is False.  With ``strict`` both cases raise
    :class:`InfeasibleThrustVectorError` instead.
    """
    tx, ty, tz = float(thrust_ned[0]), float(thrust_ned[1]), float(thrust_ned[2])
    T = -math.sqrt(tx * tx + ty * ty + tz * tz)
    if T == 0.0:
        raise InfeasibleThrustVectorError("zero thrust vector has no attitude")
    spsi, cpsi = math.sin(psi), math.cos(psi)
    feasible = tz <= 0.0
    if not feasible and strict:
        raise InfeasibleThrustVectorError(f"thrust vector points down (z = {tz:.6g})")
    arg = (spsi * tx - cpsi * ty) / T
    if abs(arg) > 1.0:
        if strict:
            raise InfeasibleThrustVectorError(f"roll arcsine argument {arg:.6g}")
        feasible = False
        arg = math.copysign(1.0, arg)
    phi = math.asin(arg)
    denom = T * math.cos(phi)
    if denom == 0.0:
        if strict:
            raise InfeasibleThrustVectorError("roll at +-pi/2 leaves pitch undefined")
        return phi, 0.0, T, False
    arg = (cpsi * tx + spsi * ty) / denom
    if abs(arg) > 1.0:
        if strict:
            raise InfeasibleThrustVectorError(f"pitch arcsine argument {arg:.6g}")
        feasible = False
        arg = math.copysign(1.0, arg)
    theta = math.asin(arg)
    return phi, theta, T, feasible


def position_pd(xi_ref, xi, xi_dot, gains: PositionGains):
    """Acceleration reference ``K_xidot (K_xi (xi_ref - xi) - xi_dot)``."""
    xi_ref = np.asarray(xi_ref, dtype=float)
    return gains.k_xidot * (gains.k_xi * (xi_ref - np.asarray(xi, dtype=float))
                            - np.asarray(xi_dot, dtype=float))


class BiasEstimator:
    """Accelerometer bias from two identically filtered acceleration sources.

    The NED acceleration derived from the accelerometer and the acceleration
    obtained by differencing successive velocity fixes are both low-passed by
    the same slow second-order filter; their difference is the bias.  Without
    any fix for ``stale_after`` seconds the estimate freezes.
    """

    def __init__(self, sample_time, omega_n=0.25, zeta=1.0, stale_after=5.0):
        self.sample_time = float(sample_time)
        self.accel_filter = SyncFilter(omega_n, zeta, sample_time, 3)
        self.fix_filter = self.accel_filter.twin()
        self.stale_after = float(stale_after)
        self.bias = np.zeros(3)
        self.stale = False
        self._t = 0.0
        self._last_fix_t = None
        self._last_fix_v = None
        self._fix_accel = np.zeros(3)
        self._started = False

    def step(self, accel_ned, velocity_fix=None):
        accel_ned = np.asarray(accel_ned, dtype=float)
        if velocity_fix is not None:
            v = np.asarray(velocity_fix, dtype=float)
            if self._last_fix_v is not None and not self.stale:
                dt = self._t - self._last_fix_t
                if dt > 0:
                    self._fix_accel = (v - self._last_fix_v) / dt
            self._last_fix_v = v
            self._last_fix_t = self._t
            self.stale = False
        elif self._last_fix_t is None or self._t - self._last_fix_t > self.stale_after:
            self.stale = True

        if not self._started:
            self.accel_filter.reset(accel_ned)
            self.fix_filter.reset(self._fix_accel)
            self._started = True

        if not self.stale:
            a = self.accel_filter.step(accel_ned)
            b = self.fix_filter.step(self._fix_accel)
            self.bias = a - b
        self._t += self.sample_time
        return self.bias


class OuterIndi:
    """Incremental thrust-vector controller (linearized or nonlinear inversion).

    ``accel_ned`` handed to :meth:`step` is the accelerometer specific force
    rotated to NED plus gravity; the current bias estimate is subtracted before
    filtering.  Attitude and thrust feedback share the acceleration filter's
    parameters so the thrust increment can be handed to the inner loop.
    """

    def __init__(self, mass, omega_n, zeta, sample_time, mode="linear", attitude_limit=0.7,
                 thrust_range=(-np.inf, 0.0), min_thrust=0.5, max_pitch=1.3,
                 bias_estimator: BiasEstimator | None = None):
        if mode not in ("linear", "nonlinear"):
            raise ContractViolation(f"unknown outer-loop mode {mode!r}")
        self.mass = float(mass)
        self.mode = mode
        self.sample_time = float(sample_time)
        self.accel_filter = SyncFilter(omega_n, zeta, sample_time, 3)
        self.feedback_filter = self.accel_filter.twin()
        self.attitude_limit = float(attitude_limit)
        self.thrust_range = (float(thrust_range[0]), float(thrust_range[1]))
        self.min_thrust = float(min_thrust)
        self.max_pitch = float(max_pitch)
        self.bias_estimator = bias_estimator
        self.bias = np.zeros(3)
        self.accel_f = np.zeros(3)
        self.phi_f = 0.0
        self.theta_f = 0.0
        self.T_f = 0.0
        self.last = None
        self.engaged = False

    def engage(self, accel_ned, eta, T_est):
        self.accel_f = self.accel_filter.reset(np.asarray(accel_ned, dtype=float) - self.bias).copy()
        fb = self.feedback_filter.reset([eta[0], eta[1], T_est])
        self.phi_f, self.theta_f, self.T_f = float(fb[0]), float(fb[1]), float(fb[2])
        self.last = ThrustVectorCommand(self.phi_f, self.theta_f, 0.0, self.T_f)
        self.engaged = True

    def update_feedback(self, accel_ned, eta, T_est, velocity_fix=None):
        """Advance bias estimate and filters by one tick."""
        if self.bias_estimator is not None:
            self.bias = self.bias_estimator.step(accel_ned, velocity_fix).copy()
        if not self.engaged:
            self.engage(accel_ned, eta, T_est)
        self.accel_f = self.accel_filter.step(np.asarray(accel_ned, dtype=float) - self.bias).copy()
        fb = self.feedback_filter.step(np.array([eta[0], eta[1], T_est]))
        self.phi_f, self.theta_f, self.T_f = float(fb[0]), float(fb[1]), float(fb[2])

    def step(self, nu, accel_ned, eta, T_est, velocity_fix=None) -> ThrustVectorCommand:
        nu = np.asarray(nu, dtype=float)
        self.update_feedback(accel_ned, eta, T_est, velocity_fix)
        eta_f = (self.phi_f, self.theta_f, float(eta[2]))
        try:
            if self.mode == "linear":
                cmd = self._linear(nu, eta_f)
            else:
                cmd = self._nonlinear(nu, eta_f)
        except SingularInversionError:
            prev = self.last
            cmd = ThrustVectorCommand(prev.phi_c, prev.theta_c, prev.T_c - self.T_f, prev.T_c,
                                      singular=True)
        self.last = cmd
        return cmd

    def _check_invertible(self, eta_f):
        if abs(self.T_f) < self.min_thrust or abs(eta_f[1]) > self.max_pitch:
            raise SingularInversionError(
                f"thrust vector Jacobian near singular (T_f={self.T_f:.3g}, theta_f={eta_f[1]:.3g})")

    def _finish(self, phi_c, theta_c, T_c, infeasible=False):
        lim = self.attitude_limit
        sat = abs(phi_c) > lim or abs(theta_c) > lim
        phi_c = min(max(phi_c, -lim), lim)
        theta_c = min(max(theta_c, -lim), lim)
        lo, hi = self.thrust_range
        if T_c < lo or T_c > hi:
            sat = True
            T_c = min(max(T_c, lo), hi)
        return ThrustVectorCommand(phi_c, theta_c, T_c - self.T_f, T_c,
                                   infeasible=infeasible, saturated=sat)

    def _linear(self, nu, eta_f):
        self._check_invertible(eta_f)
        G = effectiveness_jacobian(eta_f, self.T_f)
        du = self.mass * np.linalg.solve(G, nu - self.accel_f)
        return self._finish(self.phi_f + du[0], self.theta_f + du[1], self.T_f + du[2])

    def _nonlinear(self, nu, eta_f):
        if abs(self.T_f) < self.min_thrust:
            raise SingularInversionError(f"filtered thrust {self.T_f:.3g} too small")
        tn = self.mass * (nu - self.accel_f) + thrust_vector_ned(eta_f, self.T_f)
        try:
            phi_c, theta_c, T_c, feasible = invert_thrust_vector(tn, eta_f[2])
        except InfeasibleThrustVectorError as exc:
            raise SingularInversionError(str(exc)) from exc
        return self._finish(phi_c, theta_c, T_c, infeasible=not feasible)


def hover_state(mass):
    """(eta, T) at level hover for a vehicle of ``mass``."""
    return EulerAngles(0.0, 0.0, 0.0), -mass * GRAVITY
