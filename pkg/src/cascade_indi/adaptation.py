"""Online LMS adaptation of the rotor effectiveness and the static thrust curve."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractViolation, FitError


def _diag(values, n, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    elif arr.ndim == 2:
        arr = np.diag(arr).copy()
    if arr.shape != (n,):
        raise ContractViolation(f"{name} needs {n} diagonal entries")
    if np.any(arr < 0):
        raise ContractViolation(f"{name} must be non-negative")
    return arr


class LmsAdapter:
    """Least-mean-squares estimate of ``G = [G1 G2]`` (4x8).

    ``step`` applies ``G <- G - mu2 (G x - y) x^T mu1`` with regressor
    ``x = [d_omega_f; d2_omega_f]`` and target ``y = [d_dOmega_f; d_T]``.
    The rotor-acceleration part of the regressor is the second difference of
    the filtered rotor speed, matching the sample-time-free G2 of the inner
    loop.
    """

    def __init__(self, g_init, mu1=None, mu2=1.0, freeze_thrust_g2=True):
        g = np.array(g_init, dtype=float)
        if g.shape != (4, 8):
            raise ContractViolation("G must be 4x8")
        if mu1 is None:
            mu1 = np.r_[np.full(4, 1e-3), np.full(4, 1e-4)]
        self.G = g
        self.mu1 = _diag(mu1, 8, "mu1")
        self.mu2 = _diag(mu2, 4, "mu2")
        self.freeze_thrust_g2 = freeze_thrust_g2
        if freeze_thrust_g2:
            self.G[3, 4:] = 0.0
        self._prev = None

    def step(self, delta_omega_f, delta_domega_f, delta_dOmega_f, delta_T):
        x = np.concatenate([np.asarray(delta_omega_f, dtype=float),
                            np.asarray(delta_domega_f, dtype=float)])
        y = np.append(np.asarray(delta_dOmega_f, dtype=float), float(delta_T))
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ContractViolation("non-finite LMS regressor or target")
        return self.update(x, y)

    def update(self, x, y):
        residual = self.G @ x - y
        self.G -= np.outer(self.mu2 * residual, x * self.mu1)
        if self.freeze_thrust_g2:
            self.G[3, 4:] = 0.0
        return self.G

    def observe(self, omega_f, dOmega_f, T_f):
        """Feed one tick of filtered signals; differences are formed internally."""
        omega_f = np.array(omega_f, dtype=float)
        dOmega_f = np.array(dOmega_f, dtype=float)
        if self._prev is not None:
            prev_omega, prev_dOmega, prev_T, prev_d_omega = self._prev
            d_omega = omega_f - prev_omega
            if prev_d_omega is not None:
                self.step(d_omega, d_omega - prev_d_omega, dOmega_f - prev_dOmega, T_f - prev_T)
        else:
            d_omega = None
        self._prev = (omega_f, dOmega_f, float(T_f), d_omega)
        return self.G


@dataclass
class ThrustCurve:
    """Per-rotor static thrust magnitude ``c0 + c1 w + c2 w^2`` (N)."""

    c0: float
    c1: float
    c2: float
    omega_min: float = 0.0
    omega_max: float = np.inf
    rms_residual: float = 0.0

    def per_rotor(self, omega):
        omega = np.asarray(omega, dtype=float)
        return self.c0 + self.c1 * omega + self.c2 * omega * omega

    def slope(self, omega):
        return self.c1 + 2.0 * self.c2 * np.asarray(omega, dtype=float)

    def is_monotone(self):
        lo, hi = self.omega_min, self.omega_max
        if not np.isfinite(hi):
            return self.c2 >= 0 and self.slope(lo) > 0
        return bool(self.slope(lo) > 0 and self.slope(hi) > 0)


def thrust_from_speeds(curve: ThrustCurve, omega, tol=1e-9):
    """Total thrust of all rotors, negative along body Z."""
    omega = np.asarray(omega, dtype=float)
    span = max(1.0, abs(curve.omega_max) if np.isfinite(curve.omega_max) else 1.0)
    if np.any(omega < curve.omega_min - tol * span) or np.any(omega > curve.omega_max + tol * span):
        raise ContractViolation(
            f"rotor speed outside [{curve.omega_min}, {curve.omega_max}]: {omega}")
    return -float(np.sum(curve.per_rotor(omega)))


def fit_thrust_curve(samples, omega_range=None) -> ThrustCurve:
    """Least-squares quadratic thrust curve through ``(omega, thrust)`` samples."""
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise FitError("samples must be a sequence of (omega, thrust) pairs")
    omega, thrust = data[:, 0], data[:, 1]
    if np.unique(omega).size < 3:
        raise FitError("need at least three distinct rotor speeds for a quadratic fit")
    # scale the regressor so the Vandermonde columns are comparable
    scale = float(np.max(np.abs(omega))) or 1.0
    w = omega / scale
    A = np.column_stack([np.ones_like(w), w, w * w])
    coef, _, rank, _ = np.linalg.lstsq(A, thrust, rcond=None)
    if rank < 3:
        raise FitError("rank-deficient thrust samples")
    residual = thrust - A @ coef
    lo, hi = (float(omega.min()), float(omega.max())) if omega_range is None else omega_range
    return ThrustCurve(float(coef[0]), float(coef[1] / scale), float(coef[2] / scale ** 2),
                       omega_min=lo, omega_max=hi,
                       rms_residual=float(np.sqrt(np.mean(residual ** 2))))


def load_thrust_samples(path):
    """Read a two-column ``omega_rad_s,thrust_N`` CSV (header optional)."""
    rows = []
    with open(Path(path), newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if i == 0:
                    continue  # header
                raise FitError(f"{path}: malformed row {i + 1}: {row}") from None
    return rows


def save_thrust_samples(path, samples):
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["omega_rad_s", "thrust_N"])
        for omega, thrust in samples:
            w.writerow([repr(float(omega)), repr(float(thrust))])
