"""Inner INDI loop: angular-acceleration tracking and quaternion attitude PD."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import ContractViolation, SingularInversionError
from .mathutil import SyncFilter, quat_conj, quat_mul_k

MAX_CONDITION = 1e6


@dataclass(frozen=True)
class AttitudeGains:
    k_eta: float = 10.7
    k_omega: float = 28.0

    def __post_init__(self):
        if not (self.k_eta > 0 and self.k_omega > 0):
            raise ContractViolation("attitude gains must be positive")


class EffectivenessModel:
    """Rotor control effectiveness ``[G1 G2]``.

    Rows are roll, pitch and yaw angular acceleration and total thrust; columns
    are rotors.  ``g2`` multiplies rotor-speed differences between consecutive
    ticks (the sample time is already folded in).
    """

    def __init__(self, g1, g2, sample_time, allow_thrust_g2=False):
        g1 = np.array(g1, dtype=float)
        g2 = np.array(g2, dtype=float)
        if g1.shape != (4, 4) or g2.shape != (4, 4):
            raise ContractViolation("G1 and G2 must be 4x4")
        if not allow_thrust_g2 and np.any(g2[3] != 0.0):
            raise ContractViolation("thrust row of G2 must be zero")
        total = g1 + g2
        cond = np.linalg.cond(total)
        if not np.isfinite(cond) or cond >= MAX_CONDITION:
            raise SingularInversionError(f"G1 + G2 is singular or ill-conditioned (cond={cond:.3g})")
        self.g1 = g1
        self.g2 = g2
        self.sample_time = float(sample_time)
        self.inverse = np.linalg.inv(total)

    @property
    def combined(self):
        return np.hstack([self.g1, self.g2])

    @classmethod
    def from_combined(cls, g, sample_time, allow_thrust_g2=False):
        g = np.asarray(g, dtype=float)
        return cls(g[:, :4], g[:, 4:], sample_time, allow_thrust_g2=allow_thrust_g2)


class InnerIndi:
    """Incremental angular-acceleration controller.

    Each tick::

        w_c = w_f + (G1 + G2)^-1 ([nu - dOmega_f; T~] + G2 (w_c - w_f)(k-1))

    where ``w_f`` is the filtered rotor-speed feedback and ``dOmega_f`` the
    finite difference of the identically filtered gyro signal.
    """

    def __init__(self, eff: EffectivenessModel, omega_n, zeta, omega_min=0.0, omega_max=np.inf):
        self.eff = eff
        self.sample_time = eff.sample_time
        self.rate_filter = SyncFilter(omega_n, zeta, self.sample_time, 3)
        self.rotor_filter = self.rate_filter.twin(4)
        self.omega_min = float(omega_min)
        self.omega_max = float(omega_max)
        self.omega_f = np.zeros(4)
        self.Omega_f = np.zeros(3)
        self.dOmega_f = np.zeros(3)
        self.increment = np.zeros(4)
        self.raw_increment = np.zeros(4)
        self.saturated = False
        self.engaged = False

    def set_effectiveness(self, eff: EffectivenessModel):
        self.eff = eff

    def engage(self, gyro, rotor_speeds):
        """Warm-start both filters on the current measurements."""
        self.Omega_f = self.rate_filter.reset(gyro).copy()
        self.omega_f = self.rotor_filter.reset(rotor_speeds).copy()
        self.dOmega_f = np.zeros(3)
        self.increment = np.zeros(4)
        self.engaged = True

    def step(self, nu, thrust_increment, gyro, rotor_speeds):
        nu = np.asarray(nu, dtype=float)
        gyro = np.asarray(gyro, dtype=float)
        rotor_speeds = np.asarray(rotor_speeds, dtype=float)
        if not (np.isfinite(nu).all() and np.isfinite(gyro).all()
                and np.isfinite(rotor_speeds).all() and np.isfinite(thrust_increment)):
            raise ContractViolation("non-finite input to inner INDI step")
        if not self.engaged:
            self.engage(gyro, rotor_speeds)

        rates = self.rate_filter.step(gyro)
        self.dOmega_f = (rates - self.Omega_f) / self.sample_time
        self.Omega_f = rates.copy()
        self.omega_f = self.rotor_filter.step(rotor_speeds).copy()

        rhs = np.empty(4)
        rhs[:3] = nu - self.dOmega_f
        rhs[3] = thrust_increment
        rhs += self.eff.g2 @ self.increment
        self.raw_increment = self.eff.inverse @ rhs

        command = self.omega_f + self.raw_increment
        clipped = np.clip(command, self.omega_min, self.omega_max)
        self.saturated = bool(np.any(clipped != command))
        self.increment = clipped - self.omega_f
        return clipped


def attitude_pd(q_ref, q, Omega, gains: AttitudeGains):
    """Virtual angular acceleration from the shortest-arc quaternion error.

    ``nu = K_Omega (2 K_eta vec(q^-1 * q_ref) - Omega)``; the factor two turns
    the half-angle quaternion vector part back into an angle.
    """
    err = quat_mul_k(quat_conj(q), np.asarray(q_ref, dtype=float))
    if err[0] < 0.0:
        err = -err
    return gains.k_omega * (2.0 * gains.k_eta * err[1:] - np.asarray(Omega, dtype=float))


def _design_polynomials(gains: AttitudeGains, alpha, sample_time):
    ko, ke, a, ts = gains.k_omega, gains.k_eta, float(alpha), float(sample_time)
    num = np.array([0.0, 0.0, 0.0, ko * ke * a * ts * ts])
    den = np.array([
        1.0,
        -(3.0 - a),
        3.0 - 2.0 * a + ko * a * ts,
        -1.0 + a - ko * a * ts + ko * ke * a * ts * ts,
    ])
    return num, den


def closed_loop_poles(gains: AttitudeGains, alpha, sample_time):
    """Poles of the designed attitude loop, sorted by real part (descending)."""
    if not sample_time > 0:
        raise ContractViolation("sample time must be positive")
    if not 0.0 < alpha <= 1.0:
        raise ContractViolation("alpha must lie in (0, 1]")
    _, den = _design_polynomials(gains, alpha, sample_time)
    poles = np.roots(den)
    return sorted(poles.astype(complex), key=lambda p: (-p.real, -p.imag))


def closed_loop_polynomial(gains: AttitudeGains, alpha, sample_time):
    return _design_polynomials(gains, alpha, sample_time)[1]


def designed_step_response(gains: AttitudeGains, alpha, sample_time, n):
    """Unit-step response of the designed attitude loop over ``n`` ticks."""
    num, den = _design_polynomials(gains, alpha, sample_time)
    return signal.lfilter(num, den, np.ones(n))


def actuator_step_response(alpha, n):
    """Unit-step response of A(z) = alpha / (z - (1 - alpha)) over ``n`` ticks."""
    return signal.lfilter([0.0, alpha], [1.0, -(1.0 - alpha)], np.ones(n))
