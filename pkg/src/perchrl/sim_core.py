"""Planar rigid-body quadrotor dynamics with first-order motor response.

The vehicle lives in the x-z plane with three degrees of freedom: x, z and
pitch. The four rotors collapse to a front pair and a rear pair offset by
``arm_length`` along the body x-axis; thrust acts along the body z-axis and
the pitch moment is ``arm_length * (T_front - T_rear)``. Pitch is measured
counterclockwise (x right, z up), so thrusting the front pair alone rotates
the nose up and over, which is the direction of the perching flip.

Each rotor pair tracks its commanded speed as a first-order lag with time
constant ``motor_time_constant``; the lag is integrated with its exact
exponential solution, while the rigid body uses fixed-step RK4.
"""

import math
from dataclasses import dataclass, replace

GRAVITY = 9.81

_TWO_PI = 2.0 * math.pi


def wrap_to_pi(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = (angle + math.pi) % _TWO_PI - math.pi
    if wrapped == -math.pi:
        return math.pi
    return wrapped


@dataclass(frozen=True, slots=True)
class VehicleParams:
    """Inertial and actuation constants of the planar vehicle.

    ``arm_length`` doubles as the differential-thrust-to-moment constant:
    pitch moment = arm_length * (front pair thrust - rear pair thrust).
    Defaults are representative of a leg-equipped nano quadrotor in the
    35 g class; every value is expected to be overridden from config.
    """

    mass: float = 0.0343               # kg
    inertia_yy: float = 1.65e-5        # kg m^2 about the pitch axis
    arm_length: float = 0.033          # m, pair offset from center
    max_thrust_per_pair: float = 0.30  # N at command 1.0
    motor_time_constant: float = 0.030 # s

    def __post_init__(self):
        if not (self.mass > 0.0):
            raise ValueError(f"mass must be positive, got {self.mass}")
        if not (self.inertia_yy > 0.0):
            raise ValueError(f"inertia_yy must be positive, got {self.inertia_yy}")
        if not (self.arm_length > 0.0):
            raise ValueError(f"arm_length must be positive, got {self.arm_length}")
        if not (self.max_thrust_per_pair > 0.0):
            raise ValueError("max_thrust_per_pair must be positive")
        if not (self.motor_time_constant > 0.0):
            raise ValueError("motor_time_constant must be positive")

    def pair_thrust(self, speed: float) -> float:
        """Thrust in N of one rotor pair at normalized speed."""
        return speed * self.max_thrust_per_pair

    def pitch_moment(self, front_thrust: float, rear_thrust: float) -> float:
        """Pitch moment in N m from the two pair thrusts."""
        return self.arm_length * (front_thrust - rear_thrust)


@dataclass(frozen=True, slots=True)
class WorldParams:
    ceiling_height: float = 2.5  # m
    gravity: float = GRAVITY     # m/s^2

    def __post_init__(self):
        if not (self.ceiling_height > 0.0):
            raise ValueError("ceiling_height must be positive")
        if not (self.gravity > 0.0):
            raise ValueError("gravity must be positive")


@dataclass(frozen=True, slots=True)
class MotorState:
    """Normalized speeds of the front and rear rotor pairs, each in [0, 1]."""

    front_pair_speed: float = 0.0
    rear_pair_speed: float = 0.0

    def __post_init__(self):
        for name, v in (("front_pair_speed", self.front_pair_speed),
                        ("rear_pair_speed", self.rear_pair_speed)):
            if not math.isfinite(v) or not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {v}")


@dataclass(frozen=True, slots=True)
class RigidBodyState:
    """Pose, velocity, motor speeds and time of the vehicle.

    Pitch is kept wrapped to (-pi, pi]; callers that need accumulated
    rotation (e.g. the flip cutoff) must unwrap increments themselves.
    """

    x: float
    z: float
    vx: float
    vz: float
    pitch: float
    pitch_rate: float
    motors: MotorState
    time: float = 0.0

    def __post_init__(self):
        for name in ("x", "z", "vx", "vz", "pitch", "pitch_rate", "time"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite state field {name}")
        object.__setattr__(self, "pitch", wrap_to_pi(self.pitch))


def motor_step(motors: MotorState, cmd_front: float, cmd_rear: float,
               dt: float, params: VehicleParams) -> MotorState:
    """Advance both pair speeds toward their commands by dt.

    Uses the exact solution of the first-order lag,
    speed' = cmd + (speed - cmd) * exp(-dt / tau), so composing two half
    steps equals one full step to machine precision.
    """
    if not (math.isfinite(dt) and dt > 0.0):
        raise ValueError(f"dt must be positive and finite, got {dt}")
    for name, c in (("cmd_front", cmd_front), ("cmd_rear", cmd_rear)):
        if not math.isfinite(c) or not (0.0 <= c <= 1.0):
            raise ValueError(f"{name} must be in [0, 1], got {c}")
    decay = math.exp(-dt / params.motor_time_constant)
    return MotorState(
        front_pair_speed=cmd_front + (motors.front_pair_speed - cmd_front) * decay,
        rear_pair_speed=cmd_rear + (motors.rear_pair_speed - cmd_rear) * decay,
    )


def _accelerations(vehicle: VehicleParams, world: WorldParams,
                   pitch: float, thrust_front: float, thrust_rear: float):
    thrust = thrust_front + thrust_rear
    ax = -thrust * math.sin(pitch) / vehicle.mass
    az = thrust * math.cos(pitch) / vehicle.mass - world.gravity
    alpha = vehicle.pitch_moment(thrust_front, thrust_rear) / vehicle.inertia_yy
    return ax, az, alpha


def step_free_flight(state: RigidBodyState, cmd_front: float, cmd_rear: float,
                     params: VehicleParams, world: WorldParams,
                     dt: float) -> RigidBodyState:
    """One fixed-step RK4 integration of the free-flight dynamics.

    The rotor-pair speeds evolve along their exact exponential response to
    the (constant over the step) commands, and the RK4 stages sample that
    response at the stage times, so the motor lag couples into the rigid
    body at full integrator order. With zero thrust the translational
    update is exact ballistic motion.
    """
    if not (math.isfinite(dt) and dt > 0.0):
        raise ValueError(f"dt must be positive and finite, got {dt}")

    tau_m = params.motor_time_constant
    kmax = params.max_thrust_per_pair
    f0, r0 = state.motors.front_pair_speed, state.motors.rear_pair_speed

    def thrusts_at(h: float):
        decay = math.exp(-h / tau_m) if h > 0.0 else 1.0
        sf = cmd_front + (f0 - cmd_front) * decay
        sr = cmd_rear + (r0 - cmd_rear) * decay
        return sf * kmax, sr * kmax

    tf_0, tr_0 = thrusts_at(0.0)
    tf_h, tr_h = thrusts_at(0.5 * dt)
    tf_1, tr_1 = thrusts_at(dt)

    def deriv(y, tf, tr):
        x, z, vx, vz, pitch, rate = y
        ax, az, alpha = _accelerations(params, world, pitch, tf, tr)
        return (vx, vz, ax, az, rate, alpha)

    y0 = (state.x, state.z, state.vx, state.vz, state.pitch, state.pitch_rate)
    k1 = deriv(y0, tf_0, tr_0)
    y1 = tuple(y + 0.5 * dt * k for y, k in zip(y0, k1))
    k2 = deriv(y1, tf_h, tr_h)
    y2 = tuple(y + 0.5 * dt * k for y, k in zip(y0, k2))
    k3 = deriv(y2, tf_h, tr_h)
    y3 = tuple(y + dt * k for y, k in zip(y0, k3))
    k4 = deriv(y3, tf_1, tr_1)
    ynew = tuple(y + (dt / 6.0) * (a + 2.0 * b + 2.0 * c + d)
                 for y, a, b, c, d in zip(y0, k1, k2, k3, k4))

    names = ("x", "z", "vx", "vz", "pitch", "pitch_rate")
    for name, v in zip(names, ynew):
        if not math.isfinite(v):
            raise ValueError(f"non-finite {name} after integration step")

    motors = motor_step(state.motors, cmd_front, cmd_rear, dt, params)
    return RigidBodyState(
        x=ynew[0], z=ynew[1], vx=ynew[2], vz=ynew[3],
        pitch=ynew[4], pitch_rate=ynew[5],
        motors=motors, time=state.time + dt,
    )


MOMENT_MAX = 8.0e-3  # N m, upper bound of the commandable flip moment


class FlipController:
    """Open-loop flip command generator.

    Commands the front pair to realize a fixed pitch moment (rear pair at
    zero) until the body has rotated 90 degrees from the trigger attitude,
    then latches both commands to zero for the rest of the episode. The
    rotation is accumulated from wrapped pitch increments so it is immune
    to the (-pi, pi] wrap of the state.
    """

    def __init__(self, moment: float, pitch_at_trigger: float,
                 params: VehicleParams):
        if not math.isfinite(moment) or not (0.0 <= moment <= MOMENT_MAX):
            raise ValueError(
                f"flip moment must be in [0, {MOMENT_MAX}] N m, got {moment}")
        cmd = moment / (params.arm_length * params.max_thrust_per_pair)
        if cmd > 1.0:
            raise ValueError(
                "commanded moment exceeds what the front pair can realize "
                f"({moment} N m with arm {params.arm_length} m, "
                f"max pair thrust {params.max_thrust_per_pair} N)")
        self.moment = moment
        self._cmd_front = cmd
        self._last_pitch = pitch_at_trigger
        self._rotation = 0.0
        self._cutoff = False

    @property
    def cutoff(self) -> bool:
        """True once the 90-degree rotation has been reached (motors off)."""
        return self._cutoff

    @property
    def rotation(self) -> float:
        """Accumulated rotation since trigger, rad."""
        return self._rotation

    def commands(self, state: RigidBodyState) -> tuple[float, float]:
        """Pair commands for the current state."""
        self._rotation += wrap_to_pi(state.pitch - self._last_pitch)
        self._last_pitch = state.pitch
        if abs(self._rotation) >= 0.5 * math.pi:
            self._cutoff = True
        if self._cutoff:
            return (0.0, 0.0)
        return (self._cmd_front, 0.0)


def hover_trim(params: VehicleParams, world: WorldParams) -> MotorState:
    """Motor state whose total thrust balances gravity at level attitude."""
    per_pair = 0.5 * params.mass * world.gravity / params.max_thrust_per_pair
    if per_pair > 1.0:
        raise ValueError("vehicle cannot hover: weight exceeds max thrust")
    return MotorState(front_pair_speed=per_pair, rear_pair_speed=per_pair)


def interpolate_state(a: RigidBodyState, b: RigidBodyState,
                      f: float) -> RigidBodyState:
    """Linear interpolation between two sampled states (wrap-aware pitch)."""
    g = 1.0 - f
    return RigidBodyState(
        x=g * a.x + f * b.x,
        z=g * a.z + f * b.z,
        vx=g * a.vx + f * b.vx,
        vz=g * a.vz + f * b.vz,
        pitch=a.pitch + f * wrap_to_pi(b.pitch - a.pitch),
        pitch_rate=g * a.pitch_rate + f * b.pitch_rate,
        motors=b.motors,
        time=g * a.time + f * b.time,
    )


def ballistic_state(state: RigidBodyState, world: WorldParams,
                    t: float) -> tuple[float, float, float, float]:
    """Closed-form thrust-free trajectory (x, z, vx, vz) after time t."""
    return (
        state.x + state.vx * t,
        state.z + state.vz * t - 0.5 * world.gravity * t * t,
        state.vx,
        state.vz - world.gravity * t,
    )
