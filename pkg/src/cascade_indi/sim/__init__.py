"""6-DOF quadrotor simulator: vehicle, dynamics, wind, sensors and the PID baseline.

The scenario runner lives in :mod:`cascade_indi.sim.scenario`; it is not
imported here because it depends on :mod:`cascade_indi.config`, which in turn
uses the types below.
"""
from .dynamics import Plant, dynamics_step
from .pid import PidBaseline, PidGains, pid_step
from .sensors import SensorModels, SensorSuite, accel_to_ned, sample_sensors
from .vehicle import VehicleParams, VehicleState, nominal_effectiveness
from .wind import WindField

__all__ = [
    "Plant", "dynamics_step", "PidBaseline", "PidGains", "pid_step", "SensorModels", "SensorSuite",
    "accel_to_ned", "sample_sensors", "VehicleParams", "VehicleState", "nominal_effectiveness",
    "WindField",
]
