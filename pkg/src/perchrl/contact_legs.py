"""Leg geometry, ceiling contact, pinned swing-up, and outcome scoring.

Contact model: when a fore-leg tip reaches the ceiling plane it sticks and
becomes a frictionless pin (adhesive tips, perfectly plastic impact). The
body then swings about the pin as a rigid pendulum; if the swing carries
the hind tips up to the plane before the rotation reverses, the landing
counts as four-leg. Body contact is flagged whenever the body collision
circle touches the plane, in any phase.

During the pinned phase the body pose is parameterized by the swing angle
of the pin-to-center vector, so the fore tip stays exactly on the plane by
construction and hind-tip / body-circle clearances follow from geometry
alone rather than from integration error.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

from .sim_core import RigidBodyState, VehicleParams, WorldParams, wrap_to_pi


@dataclass(frozen=True, slots=True)
class LegGeometry:
    """Planar two-leg gear; each leg stands in for a fore or hind pair.

    Legs attach at the body-frame mount points and extend ``leg_length``
    away from the body plane, splayed outward by ``mount_angle`` (fore leg
    toward +x, hind toward -x). ``body_radius`` is the collision circle
    used for body/propeller strikes.
    """

    fore_attach: tuple[float, float] = (0.02, 0.0)
    hind_attach: tuple[float, float] = (-0.02, 0.0)
    leg_length: float = 0.05
    mount_angle: float = math.radians(25.0)
    body_radius: float = 0.045

    def __post_init__(self):
        if not (self.leg_length > 0.0):
            raise ValueError("leg_length must be positive")
        if not (self.body_radius > 0.0):
            raise ValueError("body_radius must be positive")
        if self.fore_tip_body() == self.hind_tip_body():
            raise ValueError("fore and hind leg tips coincide")

    def fore_tip_body(self) -> tuple[float, float]:
        s, c = math.sin(self.mount_angle), math.cos(self.mount_angle)
        ax, az = self.fore_attach
        return (ax + self.leg_length * s, az - self.leg_length * c)

    def hind_tip_body(self) -> tuple[float, float]:
        s, c = math.sin(self.mount_angle), math.cos(self.mount_angle)
        ax, az = self.hind_attach
        return (ax - self.leg_length * s, az - self.leg_length * c)


class ContactKind(Enum):
    FORE_LEGS = "fore_legs"
    HIND_LEGS = "hind_legs"
    BODY = "body"


# Tie-break priority when several crossings interpolate to the same time.
_KIND_ORDER = {ContactKind.FORE_LEGS: 0, ContactKind.HIND_LEGS: 1,
               ContactKind.BODY: 2}


@dataclass(frozen=True, slots=True)
class ContactEvent:
    kind: ContactKind
    time: float
    body_pitch_at_contact: float
    contact_point_world: tuple[float, float]


def _rot(pitch: float, v: tuple[float, float]) -> tuple[float, float]:
    c, s = math.cos(pitch), math.sin(pitch)
    return (v[0] * c - v[1] * s, v[0] * s + v[1] * c)


def tip_world(state_x: float, state_z: float, pitch: float,
              tip_body: tuple[float, float]) -> tuple[float, float]:
    wx, wz = _rot(pitch, tip_body)
    return (state_x + wx, state_z + wz)


def detect_contact(prev: RigidBodyState, curr: RigidBodyState,
                   legs: LegGeometry, world: WorldParams) -> ContactEvent | None:
    """First ceiling crossing between two sampled states, if any.

    Candidate points are the two leg tips and the top of the body circle;
    crossing times are found by linear interpolation of each point's
    height between the samples. Passing the same state twice degenerates
    to an instantaneous at-the-plane check.
    """
    ceiling = world.ceiling_height
    hits: list[tuple[float, int, ContactKind, float, float]] = []

    candidates = [
        (ContactKind.FORE_LEGS, legs.fore_tip_body()),
        (ContactKind.HIND_LEGS, legs.hind_tip_body()),
    ]
    for kind, tip in candidates:
        x0, z0 = tip_world(prev.x, prev.z, prev.pitch, tip)
        x1, z1 = tip_world(curr.x, curr.z, curr.pitch, tip)
        f = _crossing_fraction(z0, z1, ceiling)
        if f is not None:
            hits.append((f, _KIND_ORDER[kind], kind, x0 + f * (x1 - x0), ceiling))

    z0 = prev.z + legs.body_radius
    z1 = curr.z + legs.body_radius
    f = _crossing_fraction(z0, z1, ceiling)
    if f is not None:
        x = prev.x + f * (curr.x - prev.x)
        hits.append((f, _KIND_ORDER[ContactKind.BODY], ContactKind.BODY, x, ceiling))

    if not hits:
        return None
    f, _, kind, cx, cz = min(hits)
    return ContactEvent(
        kind=kind,
        time=prev.time + f * (curr.time - prev.time),
        body_pitch_at_contact=prev.pitch + f * wrap_to_pi(curr.pitch - prev.pitch),
        contact_point_world=(cx, cz),
    )


def _crossing_fraction(z0: float, z1: float, ceiling: float) -> float | None:
    if z1 < ceiling:
        return None
    if z0 >= ceiling:
        return 0.0
    return (ceiling - z0) / (z1 - z0)


@dataclass(frozen=True, slots=True)
class PinnedState:
    """Rigid body pinned at the fore-leg tip on the ceiling.

    ``swing_angle`` is the world angle of the pin-to-center vector
    (so the center of mass sits at pin + com_dist * (cos, sin) of it) and
    ``pitch_offset`` recovers body pitch as swing_angle + pitch_offset.
    Angles are kept unwrapped so the swing history is monotone.
    """

    pin_point: tuple[float, float]
    swing_angle: float
    swing_rate: float
    attached: bool
    com_dist: float
    pitch_offset: float
    time: float = 0.0


def attach_pin(event: ContactEvent, state: RigidBodyState,
               params: VehicleParams, legs: LegGeometry) -> PinnedState:
    """Convert free flight into rotation about the fore-leg contact point.

    Angular momentum about the pin is conserved through the (plastic)
    impact: L = I_yy * pitch_rate + m * (r x v) with r the pin-to-center
    vector, giving swing_rate = L / (I_yy + m |r|^2). The pin-to-center
    vector is derived rigidly from the contact pitch and leg geometry, so
    later hind-tip and body-circle clearances are exact.

    ``state`` should be the contact-interpolated state; only its velocity,
    pitch rate and time feed the momentum balance.
    """
    if event.kind is not ContactKind.FORE_LEGS:
        raise ValueError(f"cannot attach pin on a {event.kind.value} contact")

    tip = legs.fore_tip_body()
    pitch_c = event.body_pitch_at_contact
    off = _rot(pitch_c, tip)           # pin - com in world frame
    rx, rz = -off[0], -off[1]          # com - pin
    d = math.hypot(rx, rz)

    m, iyy = params.mass, params.inertia_yy
    l_pin = iyy * state.pitch_rate + m * (rx * state.vz - rz * state.vx)
    i_pin = iyy + m * d * d

    beta0 = math.atan2(rz, rx)
    return PinnedState(
        pin_point=event.contact_point_world,
        swing_angle=beta0,
        swing_rate=l_pin / i_pin,
        attached=True,
        com_dist=d,
        pitch_offset=pitch_c - beta0,
        time=event.time,
    )


def pinned_inertia(p: PinnedState, params: VehicleParams) -> float:
    return params.inertia_yy + params.mass * p.com_dist * p.com_dist


def pinned_com(p: PinnedState) -> tuple[float, float]:
    return (p.pin_point[0] + p.com_dist * math.cos(p.swing_angle),
            p.pin_point[1] + p.com_dist * math.sin(p.swing_angle))


def pinned_pitch(p: PinnedState) -> float:
    return p.swing_angle + p.pitch_offset


def pinned_com_velocity(p: PinnedState) -> tuple[float, float]:
    speed = p.swing_rate * p.com_dist
    return (-speed * math.sin(p.swing_angle), speed * math.cos(p.swing_angle))


def pinned_tip(p: PinnedState, tip_body: tuple[float, float]) -> tuple[float, float]:
    cx, cz = pinned_com(p)
    wx, wz = _rot(pinned_pitch(p), tip_body)
    return (cx + wx, cz + wz)


def pinned_energy(p: PinnedState, params: VehicleParams,
                  world: WorldParams) -> float:
    """Mechanical energy about the pin (kinetic + center-of-mass potential)."""
    i_pin = pinned_inertia(p, params)
    _, com_z = pinned_com(p)
    return 0.5 * i_pin * p.swing_rate ** 2 + params.mass * world.gravity * com_z


def step_pinned(p: PinnedState, params: VehicleParams, legs: LegGeometry,
                world: WorldParams, dt: float) -> PinnedState:
    """RK4 step of the frictionless pendulum about the pin, motors off."""
    if not p.attached:
        raise ValueError("step_pinned requires an attached state")
    if not (math.isfinite(dt) and dt > 0.0):
        raise ValueError(f"dt must be positive and finite, got {dt}")

    k = params.mass * world.gravity * p.com_dist / pinned_inertia(p, params)

    def deriv(beta, omega):
        return (omega, -k * math.cos(beta))

    b0, w0 = p.swing_angle, p.swing_rate
    k1 = deriv(b0, w0)
    k2 = deriv(b0 + 0.5 * dt * k1[0], w0 + 0.5 * dt * k1[1])
    k3 = deriv(b0 + 0.5 * dt * k2[0], w0 + 0.5 * dt * k2[1])
    k4 = deriv(b0 + dt * k3[0], w0 + dt * k3[1])
    beta = b0 + (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    omega = w0 + (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])

    return PinnedState(
        pin_point=p.pin_point,
        swing_angle=beta,
        swing_rate=omega,
        attached=True,
        com_dist=p.com_dist,
        pitch_offset=p.pitch_offset,
        time=p.time + dt,
    )


def detect_pinned_contact(prev: PinnedState, curr: PinnedState,
                          legs: LegGeometry,
                          world: WorldParams) -> ContactEvent | None:
    """Hind-tip or body-circle crossing during the pinned swing."""
    ceiling = world.ceiling_height
    hits: list[tuple[float, int, ContactKind, float]] = []

    tip = legs.hind_tip_body()
    x0, z0 = pinned_tip(prev, tip)
    x1, z1 = pinned_tip(curr, tip)
    f = _crossing_fraction(z0, z1, ceiling)
    if f is not None:
        hits.append((f, _KIND_ORDER[ContactKind.HIND_LEGS],
                     ContactKind.HIND_LEGS, x0 + f * (x1 - x0)))

    c0x, c0z = pinned_com(prev)
    c1x, c1z = pinned_com(curr)
    f = _crossing_fraction(c0z + legs.body_radius, c1z + legs.body_radius, ceiling)
    if f is not None:
        hits.append((f, _KIND_ORDER[ContactKind.BODY], ContactKind.BODY,
                     c0x + f * (c1x - c0x)))

    if not hits:
        return None
    f, _, kind, cx = min(hits)
    pitch0, pitch1 = pinned_pitch(prev), pinned_pitch(curr)
    return ContactEvent(
        kind=kind,
        time=prev.time + f * (curr.time - prev.time),
        body_pitch_at_contact=pitch0 + f * (pitch1 - pitch0),
        contact_point_world=(cx, ceiling),
    )


@dataclass(frozen=True, slots=True)
class LandingOutcome:
    """Scored result of one landing attempt."""

    n_legs: int
    body_contact: bool
    d_min: float
    tau_trg: float        # nan when the episode never triggered
    theta_impact: float   # deg in [0, 180]; 0 when no leg contact occurred
    triggered: bool


@dataclass(slots=True)
class EpisodeTrace:
    """Accumulated contact history of one episode.

    Filled in by the episode loop; ``hind_reached`` is only set for hind
    crossings that happen during the pinned swing before it reverses.
    """

    events: list[ContactEvent] = field(default_factory=list)
    fore_attached: bool = False
    hind_reached: bool = False
    swing_reversed: bool = False
    d_min: float = math.inf
    terminated: bool = False


@dataclass(frozen=True, slots=True)
class TriggerInfo:
    triggered: bool
    tau_trg: float = math.nan
    trigger_time: float = math.nan
    moment: float = math.nan


def classify_outcome(trace: EpisodeTrace, trigger: TriggerInfo) -> LandingOutcome:
    """Map a terminated episode trace to its landing outcome.

    Four legs requires fore attachment plus a hind crossing before swing
    reversal; fore attachment alone scores two legs. Body contact is
    orthogonal. The impact angle is the absolute wrapped pitch at the
    first leg contact, in degrees.
    """
    if not trace.terminated:
        raise ValueError("cannot classify an unterminated episode")

    if trace.fore_attached and trace.hind_reached:
        n_legs = 4
    elif trace.fore_attached:
        n_legs = 2
    else:
        n_legs = 0

    body_contact = any(e.kind is ContactKind.BODY for e in trace.events)

    theta_impact = 0.0
    for e in trace.events:
        if e.kind in (ContactKind.FORE_LEGS, ContactKind.HIND_LEGS):
            theta_impact = abs(math.degrees(wrap_to_pi(e.body_pitch_at_contact)))
            break

    d_min = trace.d_min if math.isfinite(trace.d_min) else 0.0
    return LandingOutcome(
        n_legs=n_legs,
        body_contact=body_contact,
        d_min=max(d_min, 0.0),
        tau_trg=trigger.tau_trg,
        theta_impact=theta_impact,
        triggered=trigger.triggered,
    )
