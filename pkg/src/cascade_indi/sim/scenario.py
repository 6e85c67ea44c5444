"""Closed-loop scenario runner and the inner-loop step experiments.

Per tick ``k`` (time ``k T_s``) the loop samples the wind and the sensors at
the current state, runs position control (INDI outer loop or PID), turns the
attitude command into an angular-acceleration reference, runs the inner INDI
loop, logs the tick and finally advances the plant to ``k + 1``.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..adaptation import LmsAdapter, thrust_from_speeds
from ..config import ScenarioConfig
from ..errors import IndiError, NumericDivergence, SingularInversionError
from ..inner import (AttitudeGains, EffectivenessModel, InnerIndi, actuator_step_response,
                     attitude_pd, designed_step_response)
from ..mathutil import SyncFilter, euler_from_quat, quat_from_euler
from ..outer import BiasEstimator, OuterIndi, PositionGains, position_pd
from ..trace import Trace
from .dynamics import Plant
from .pid import PidBaseline, PidGains
from .sensors import SensorSuite, accel_to_ned
from .vehicle import VehicleParams, VehicleState, nominal_effectiveness


def make_rngs(seed):
    """Independent sensor and wind generators derived from one seed."""
    sensor_seq, wind_seq = np.random.SeedSequence(int(seed)).spawn(2)
    return np.random.default_rng(sensor_seq), np.random.default_rng(wind_seq)


def build_effectiveness(cfg: ScenarioConfig) -> EffectivenessModel:
    eff = cfg.effectiveness
    nominal = nominal_effectiveness(cfg.vehicle, cfg.sample_time)
    g1 = np.reshape(eff.g1, (4, 4)) if eff.g1 else nominal.g1
    g2 = np.reshape(eff.g2, (4, 4)) if eff.g2 else nominal.g2
    allow = not cfg.adaptation.freeze_thrust_g2
    return EffectivenessModel(eff.scale * g1, eff.scale * g2, cfg.sample_time, allow_thrust_g2=allow)


def model_mass(cfg: ScenarioConfig):
    return cfg.control.model_mass or cfg.vehicle.mass


def initial_state(cfg: ScenarioConfig) -> VehicleState:
    init = cfg.initial
    xi = np.array(init.position, dtype=float)
    if init.ground_contact:
        xi[2] = init.ground_level
    return VehicleState.hover(cfg.vehicle, xi=xi, yaw=init.yaw, on_ground=init.ground_contact)


def run_scenario(cfg: ScenarioConfig) -> Trace:
    """Simulate ``cfg`` for its full duration and return the telemetry trace."""
    ts = cfg.sample_time
    prm: VehicleParams = cfg.vehicle
    plant = Plant(prm)
    curve = prm.thrust_curve()
    sensor_rng, wind_rng = make_rngs(cfg.scenario.seed)
    suite = SensorSuite(cfg.sensors, cfg.scenario.sample_rate, sensor_rng)
    wind_field = cfg.wind
    ground = cfg.initial.ground_level if cfg.initial.ground_contact else None
    mass = model_mass(cfg)
    filt = cfg.filter
    ctl = cfg.control
    gains = cfg.gains
    att_gains = AttitudeGains(gains.k_eta, gains.k_omega)
    yaw_ref = cfg.initial.yaw

    inner = InnerIndi(build_effectiveness(cfg), filt.omega_n, filt.zeta, prm.omega_min, prm.omega_max)
    controller = cfg.scenario.controller
    is_indi = controller != "pid"
    if is_indi:
        bias = (BiasEstimator(ts, filt.bias_omega_n, filt.bias_zeta)
                if filt.bias_estimation else None)
        outer = OuterIndi(mass, filt.omega_n, filt.zeta, ts,
                          mode="linear" if controller == "indi-linear" else "nonlinear",
                          attitude_limit=ctl.attitude_limit, thrust_range=prm.thrust_range,
                          min_thrust=ctl.min_thrust, max_pitch=ctl.max_pitch, bias_estimator=bias)
        pos_gains = PositionGains(gains.k_xi, gains.k_xidot)
    else:
        pid = PidBaseline(PidGains(gains.pid_p, gains.pid_i, gains.pid_d, gains.pid_i_limit),
                          mass, ctl.attitude_limit, prm.thrust_range)
        # the PID thrust command is handed to the inner loop as an increment
        # on the identically filtered thrust estimate
        thrust_filter = SyncFilter(filt.omega_n, filt.zeta, ts, 1)

    adapter = None
    if cfg.scenario.adaptation:
        ad = cfg.adaptation
        mu1 = np.r_[np.full(4, ad.mu1_speed), np.full(4, ad.mu1_accel)]
        adapter = LmsAdapter(inner.eff.combined, mu1=mu1, mu2=ad.mu2,
                             freeze_thrust_g2=ad.freeze_thrust_g2)
        target_filter = SyncFilter(filt.omega_n, filt.zeta, ts, 1)
        use_accel_target = ad.thrust_target == "accelerometer"

    n_ticks = int(round(cfg.scenario.duration * cfg.scenario.sample_rate))
    trace = Trace.for_controller(controller, n_ticks)
    col = trace.index
    s_pos, s_vel, s_ref = trace.slot("pos_n", "pos_e", "pos_d"), trace.slot("vel_n", "vel_e", "vel_d"), \
        trace.slot("ref_n", "ref_e", "ref_d")
    s_eul = trace.slot("phi", "theta", "psi")
    s_rate = trace.slot("rate_p", "rate_q", "rate_r")
    s_acc = trace.slot("acc_n", "acc_e", "acc_d")
    s_wind = trace.slot("wind_n", "wind_e", "wind_d")
    s_cmd = trace.slot("phi_c", "theta_c", "thrust_c", "thrust_est")
    s_nuo = trace.slot("nu_omega_p", "nu_omega_q", "nu_omega_r")
    s_rcmd = trace.slot(*(f"rotor_cmd_{i}" for i in range(4)))
    s_rot = trace.slot(*(f"rotor_{i}" for i in range(4)))
    s_flags = trace.slot("rotor_saturated", "on_ground")
    if is_indi:
        s_nu = trace.slot("nu_n", "nu_e", "nu_d")
        s_accf = trace.slot("accf_n", "accf_e", "accf_d")
        s_bias = trace.slot("bias_n", "bias_e", "bias_d")
        s_outer = trace.slot("thrust_increment", "outer_singular", "outer_infeasible", "outer_saturated")
    else:
        s_integ = trace.slot("integ_n", "integ_e", "integ_d")

    state = initial_state(cfg)
    held_fix = None
    for k in range(n_ticks):
        t = k * ts
        wind = wind_field.sample(state.xi, t, wind_rng)
        acc_true = plant.acceleration(state, wind)
        reading = suite.sample(state, acc_true, k)
        new_fix = reading.fix
        if new_fix is not None:
            held_fix = new_fix
        try:
            eta = euler_from_quat(state.q)
        except IndiError as exc:
            raise NumericDivergence(k, str(exc)) from exc
        accel_ned = accel_to_ned(reading.accel, state.q)
        T_est = thrust_from_speeds(curve, state.omega)
        xi_ref = cfg.reference_at(t)

        if is_indi:
            override = cfg.maneuver_at(t)
            if override is None:
                nu = position_pd(xi_ref, held_fix.position, held_fix.velocity, pos_gains)
            else:
                nu = np.asarray(override, dtype=float)
            cmd = outer.step(nu, accel_ned, eta, T_est,
                             None if new_fix is None else new_fix.velocity)
            phi_c, theta_c, T_c, T_tilde = cmd.phi_c, cmd.theta_c, cmd.T_c, cmd.T_tilde
        else:
            phi_c, theta_c, T_c = pid.step(xi_ref, held_fix.position, held_fix.velocity, eta.psi, ts)
            if k == 0:
                thrust_filter.reset(T_est)
            T_tilde = T_c - float(thrust_filter.step(T_est)[0])

        q_ref = quat_from_euler((phi_c, theta_c, yaw_ref))
        nu_omega = attitude_pd(q_ref, state.q, reading.gyro, att_gains)
        rotor_cmd = inner.step(nu_omega, T_tilde, reading.gyro, state.omega)

        if adapter is not None:
            if use_accel_target:
                target = mass * float(reading.accel[2])
            else:
                target = T_est
            if k == 0:
                target_filter.reset(target)
            T_f = float(target_filter.step(target)[0])
            G = adapter.observe(inner.omega_f, inner.dOmega_f, T_f)
            try:
                inner.set_effectiveness(EffectivenessModel.from_combined(
                    G, ts, allow_thrust_g2=not adapter.freeze_thrust_g2))
            except SingularInversionError:
                pass  # keep the last invertible estimate

        row = trace.append_row()
        row[col["tick"]] = k
        row[col["time_s"]] = t
        row[s_pos] = state.xi
        row[s_vel] = state.xi_dot
        row[s_ref] = xi_ref
        row[s_eul] = eta
        row[s_rate] = state.Omega
        row[s_acc] = acc_true
        row[s_wind] = wind
        row[s_cmd] = (phi_c, theta_c, T_c, T_est)
        row[s_nuo] = nu_omega
        row[s_rcmd] = rotor_cmd
        row[s_rot] = state.omega
        row[s_flags] = (inner.saturated, state.on_ground)
        if is_indi:
            row[s_nu] = nu
            row[s_accf] = outer.accel_f
            row[s_bias] = outer.bias
            row[s_outer] = (T_tilde, cmd.singular, cmd.infeasible, cmd.saturated)
        else:
            row[s_integ] = pid.integrator

        state = plant.step(state, rotor_cmd, wind, ts, ground)
        if not state.is_finite():
            raise NumericDivergence(k + 1, "vehicle state became non-finite")
    return trace.finalize()


# ----------------------------------------------------------------------------
# inner-loop experiments
# ----------------------------------------------------------------------------

class StepExperiment(NamedTuple):
    time: np.ndarray
    measured: np.ndarray
    expected: np.ndarray
    magnitude: float

    @property
    def max_deviation(self):
        """Largest absolute deviation as a fraction of the step magnitude."""
        return float(np.max(np.abs(self.measured - self.expected)) / abs(self.magnitude))


def _inner_only(cfg: ScenarioConfig, nu_of, n_ticks):
    """Run the inner loop alone from hover with ``T~ = 0`` and a perfect model.

    ``nu_of(k, state, gyro)`` returns the angular-acceleration reference.
    Returns the visited states (length ``n_ticks + 1``).
    """
    ts = cfg.sample_time
    prm = cfg.vehicle
    plant = Plant(prm)
    inner = InnerIndi(nominal_effectiveness(prm, ts), cfg.filter.omega_n, cfg.filter.zeta,
                      prm.omega_min, prm.omega_max)
    state = VehicleState.hover(prm, xi=cfg.initial.position, yaw=cfg.initial.yaw)
    states = [state]
    zero = np.zeros(3)
    for k in range(n_ticks):
        nu = nu_of(k, state, state.Omega)
        cmd = inner.step(nu, 0.0, state.Omega, state.omega)
        state = plant.step(state, cmd, zero, ts)
        states.append(state)
    return states


def attitude_step_experiment(cfg: ScenarioConfig) -> StepExperiment:
    """Attitude step through attitude PD and inner INDI vs the designed loop."""
    ts = cfg.sample_time
    step = cfg.step
    n = int(round(step.duration / ts))
    ref = (step.magnitude, 0.0, cfg.initial.yaw) if step.axis == "roll" else \
        (0.0, step.magnitude, cfg.initial.yaw)
    q_ref = quat_from_euler(ref)
    gains = AttitudeGains(cfg.gains.k_eta, cfg.gains.k_omega)
    states = _inner_only(cfg, lambda k, s, gyro: attitude_pd(q_ref, s.q, gyro, gains), n)
    axis = 0 if step.axis == "roll" else 1
    measured = np.array([euler_from_quat(s.q)[axis] for s in states[1:]])
    expected = step.magnitude * designed_step_response(gains, cfg.vehicle.alpha, ts, n + 1)[1:]
    return StepExperiment(ts * np.arange(1, n + 1), measured, expected, step.magnitude)


def rate_step_experiment(cfg: ScenarioConfig, magnitude=2.0, duration=0.5, axis=0) -> StepExperiment:
    """Angular-acceleration reference step vs the actuator response ``A(z)``.

    The measured angular acceleration at tick ``k`` is the backward difference
    of the body rates across the tick that ends at ``k``.
    """
    ts = cfg.sample_time
    n = int(round(duration / ts))
    nu = np.zeros(3)
    nu[axis] = magnitude
    states = _inner_only(cfg, lambda k, s, gyro: nu, n)
    rates = np.array([s.Omega[axis] for s in states])
    measured = np.diff(rates) / ts
    expected = magnitude * actuator_step_response(cfg.vehicle.alpha, n + 1)[1:]
    return StepExperiment(ts * np.arange(1, n + 1), measured, expected, magnitude)
