import math

import numpy as np
import pytest

from perchrl.contact_legs import (ContactEvent, ContactKind, EpisodeTrace,
                                  LegGeometry, TriggerInfo, attach_pin,
                                  classify_outcome, detect_contact,
                                  pinned_com, pinned_energy, pinned_inertia,
                                  pinned_pitch, step_pinned, tip_world)
from perchrl.sim_core import (MotorState, RigidBodyState, VehicleParams,
                              WorldParams)

VEH = VehicleParams()
WORLD = WorldParams(ceiling_height=2.0)
LEGS = LegGeometry()


def make_state(**kw):
    base = dict(x=0.0, z=1.0, vx=0.0, vz=0.0, pitch=0.0, pitch_rate=0.0,
                motors=MotorState(), time=0.0)
    base.update(kw)
    return RigidBodyState(**base)


def fore_event(pitch: float, point=(0.0, WORLD.ceiling_height), time=0.0):
    return ContactEvent(kind=ContactKind.FORE_LEGS, time=time,
                        body_pitch_at_contact=pitch,
                        contact_point_world=point)


class TestDetectContact:
    def test_no_event_when_everything_below(self):
        s = make_state(z=1.0)
        assert detect_contact(s, s, LEGS, WORLD) is None

    def test_fore_tip_at_plane(self):
        # Inverted attitude: the fore tip leads; place it exactly on the plane.
        pitch = math.radians(150.0)
        tip = LEGS.fore_tip_body()
        tip_dz = tip[0] * math.sin(pitch) + tip[1] * math.cos(pitch)
        s = make_state(z=WORLD.ceiling_height - tip_dz, pitch=pitch)
        ev = detect_contact(s, s, LEGS, WORLD)
        assert ev is not None and ev.kind is ContactKind.FORE_LEGS
        assert ev.body_pitch_at_contact == pytest.approx(pitch)
        assert abs(ev.contact_point_world[1] - WORLD.ceiling_height) < 1e-9

    def test_body_circle_tangent(self):
        s = make_state(z=WORLD.ceiling_height - LEGS.body_radius)
        ev = detect_contact(s, s, LEGS, WORLD)
        assert ev is not None and ev.kind is ContactKind.BODY

    def test_substep_interpolation_time(self):
        # Level flight rising at 1 m/s: body top crosses 40% into the step.
        z0 = WORLD.ceiling_height - LEGS.body_radius - 0.004
        a = make_state(z=z0, vz=1.0, time=0.0)
        b = make_state(z=z0 + 0.01, vz=1.0, time=0.01)
        ev = detect_contact(a, b, LEGS, WORLD)
        assert ev is not None and ev.kind is ContactKind.BODY
        assert ev.time == pytest.approx(0.004, rel=1e-9)

    def test_earliest_crossing_wins(self):
        # From an inverted attitude move straight up; fore tip leads hind/body.
        pitch = math.radians(160.0)
        a = make_state(z=WORLD.ceiling_height - 0.08, pitch=pitch, vz=2.0)
        b = make_state(z=WORLD.ceiling_height - 0.04, pitch=pitch, vz=2.0,
                       time=0.02)
        ev = detect_contact(a, b, LEGS, WORLD)
        assert ev is not None and ev.kind is ContactKind.FORE_LEGS


class TestAttachPin:
    def test_requires_fore_event(self):
        ev = ContactEvent(kind=ContactKind.BODY, time=0.0,
                          body_pitch_at_contact=0.0,
                          contact_point_world=(0.0, 2.0))
        with pytest.raises(ValueError):
            attach_pin(ev, make_state(), VEH, LEGS)

    def test_pure_radial_translation_gives_zero_rate(self):
        # Straight legs pointing down, flat inverted: r is vertical, so a
        # vertical velocity has zero moment arm about the pin.
        legs = LegGeometry(fore_attach=(0.0, 0.0), hind_attach=(-0.02, 0.0),
                           mount_angle=0.0, leg_length=0.05)
        p = attach_pin(fore_event(math.pi), make_state(vz=2.0), VEH, legs)
        assert p.swing_rate == pytest.approx(0.0, abs=1e-12)
        assert p.com_dist == pytest.approx(0.05, rel=1e-12)

    def test_pure_rotation_conserves_angular_momentum(self):
        omega = 10.0
        p = attach_pin(fore_event(math.radians(150.0)),
                       make_state(pitch_rate=omega), VEH, LEGS)
        d = p.com_dist
        expect = VEH.inertia_yy * omega / (VEH.inertia_yy + VEH.mass * d * d)
        assert p.swing_rate == pytest.approx(expect, rel=1e-12)

    def test_tangential_velocity_conversion(self):
        legs = LegGeometry(fore_attach=(0.0, 0.0), hind_attach=(-0.02, 0.0),
                           mount_angle=0.0, leg_length=0.05)
        # Flat inverted: com sits 0.05 below the pin; tangential v is +x.
        p = attach_pin(fore_event(math.pi), make_state(vx=2.0), VEH, legs)
        expect = VEH.mass * 0.05 * 2.0 / (VEH.inertia_yy + VEH.mass * 0.05 ** 2)
        assert p.swing_rate == pytest.approx(expect, rel=1e-12)

    def test_momentum_continuity_random(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            pitch = rng.uniform(-math.pi, math.pi)
            state = make_state(vx=rng.uniform(-3, 3), vz=rng.uniform(-3, 3),
                               pitch=pitch, pitch_rate=rng.uniform(-40, 40))
            p = attach_pin(fore_event(pitch), state, VEH, LEGS)
            # Recompute the pre-impact angular momentum about the pin.
            c, s = math.cos(pitch), math.sin(pitch)
            tx, tz = LEGS.fore_tip_body()
            rx, rz = -(tx * c - tz * s), -(tx * s + tz * c)
            l_pre = (VEH.inertia_yy * state.pitch_rate
                     + VEH.mass * (rx * state.vz - rz * state.vx))
            l_post = pinned_inertia(p, VEH) * p.swing_rate
            assert l_post == pytest.approx(l_pre, rel=1e-12, abs=1e-15)


class TestStepPinned:
    def test_equilibrium_unchanged(self):
        p = attach_pin(fore_event(math.pi), make_state(), VEH, LEGS)
        # Move the swing angle to hang the com straight below the pin.
        p = type(p)(pin_point=p.pin_point, swing_angle=-math.pi / 2,
                    swing_rate=0.0, attached=True, com_dist=p.com_dist,
                    pitch_offset=p.pitch_offset, time=0.0)
        q = step_pinned(p, VEH, LEGS, WORLD, 1e-3)
        assert q.swing_angle == pytest.approx(-math.pi / 2, abs=1e-12)
        assert q.swing_rate == pytest.approx(0.0, abs=1e-12)

    def test_energy_conserved_over_one_second(self):
        p = attach_pin(fore_event(math.radians(150.0)),
                       make_state(vx=1.0, vz=1.0, pitch_rate=10.0), VEH, LEGS)
        e0 = pinned_energy(p, VEH, WORLD)
        for _ in range(1000):
            p = step_pinned(p, VEH, LEGS, WORLD, 1e-3)
        e1 = pinned_energy(p, VEH, WORLD)
        assert abs(e1 - e0) / abs(e0) < 1e-6

    def test_small_oscillation_period(self):
        p0 = attach_pin(fore_event(math.pi), make_state(), VEH, LEGS)
        d = p0.com_dist
        # Start slightly off the hanging equilibrium, zero rate.
        p = type(p0)(pin_point=p0.pin_point, swing_angle=-math.pi / 2 + 0.01,
                     swing_rate=0.0, attached=True, com_dist=d,
                     pitch_offset=p0.pitch_offset, time=0.0)
        i_pin = pinned_inertia(p, VEH)
        expect = 2.0 * math.pi * math.sqrt(i_pin / (VEH.mass * WORLD.gravity * d))
        # Count several full periods via crossings of the equilibrium angle.
        crossings = []
        prev = p
        for _ in range(30000):
            p = step_pinned(prev, VEH, LEGS, WORLD, 1e-3)
            a0 = prev.swing_angle + math.pi / 2
            a1 = p.swing_angle + math.pi / 2
            if a0 < 0.0 <= a1:
                crossings.append(p.time + (0.0 - a1) * 1e-3 / (a1 - a0))
            prev = p
            if len(crossings) >= 6:
                break
        period = (crossings[-1] - crossings[0]) / (len(crossings) - 1)
        assert period == pytest.approx(expect, rel=0.01)

    def test_requires_attached(self):
        p = attach_pin(fore_event(math.pi), make_state(), VEH, LEGS)
        loose = type(p)(pin_point=p.pin_point, swing_angle=p.swing_angle,
                        swing_rate=p.swing_rate, attached=False,
                        com_dist=p.com_dist, pitch_offset=p.pitch_offset,
                        time=0.0)
        with pytest.raises(ValueError):
            step_pinned(loose, VEH, LEGS, WORLD, 1e-3)

    def test_pitch_tracks_swing(self):
        p = attach_pin(fore_event(math.radians(160.0)),
                       make_state(pitch_rate=20.0), VEH, LEGS)
        assert pinned_pitch(p) == pytest.approx(math.radians(160.0), rel=1e-12)
        q = step_pinned(p, VEH, LEGS, WORLD, 1e-3)
        assert pinned_pitch(q) - pinned_pitch(p) == pytest.approx(
            q.swing_angle - p.swing_angle)


class TestClassifyOutcome:
    def _trace(self, events, fore=False, hind=False, d_min=0.1):
        t = EpisodeTrace(events=list(events), fore_attached=fore,
                         hind_reached=hind, d_min=d_min, terminated=True)
        return t

    def test_four_leg(self):
        ev = fore_event(math.radians(170.0))
        trace = self._trace([ev], fore=True, hind=True, d_min=0.05)
        out = classify_outcome(trace, TriggerInfo(True, 0.2, 0.1, 4e-3))
        assert out.n_legs == 4 and not out.body_contact
        assert out.theta_impact == pytest.approx(170.0)

    def test_two_leg_when_swing_reverses(self):
        ev = fore_event(math.radians(150.0))
        trace = self._trace([ev], fore=True, hind=False)
        trace.swing_reversed = True
        out = classify_outcome(trace, TriggerInfo(True, 0.3, 0.1, 4e-3))
        assert out.n_legs == 2

    def test_zero_legs_empty_trace(self):
        out = classify_outcome(self._trace([], d_min=0.4),
                               TriggerInfo(False))
        assert out.n_legs == 0 and not out.triggered
        assert out.theta_impact == 0.0

    def test_unterminated_errors(self):
        trace = self._trace([])
        trace.terminated = False
        with pytest.raises(ValueError):
            classify_outcome(trace, TriggerInfo(False))

    def test_pure_function_of_trace(self):
        ev = fore_event(math.radians(200.0))  # wraps to -160 -> |.| = 160
        trace = self._trace([ev], fore=True, hind=True)
        info = TriggerInfo(True, 0.18, 0.1, 8e-3)
        a = classify_outcome(trace, info)
        b = classify_outcome(trace, info)
        assert a == b
        assert a.theta_impact == pytest.approx(160.0)


def test_leg_geometry_tips():
    tip_f = LEGS.fore_tip_body()
    tip_h = LEGS.hind_tip_body()
    assert tip_f[0] > 0 > tip_h[0]
    assert tip_f[1] == pytest.approx(tip_h[1])
    # Legs reach beyond the body circle, otherwise clean leg contact is
    # geometrically impossible.
    assert math.hypot(*tip_f) > LEGS.body_radius
    wx, wz = tip_world(1.0, 2.0, 0.0, tip_f)
    assert (wx, wz) == pytest.approx((1.0 + tip_f[0], 2.0 + tip_f[1]))


def test_leg_geometry_invariants():
    with pytest.raises(ValueError):
        LegGeometry(leg_length=0.0)
    with pytest.raises(ValueError):
        LegGeometry(fore_attach=(0.0, 0.0), hind_attach=(0.0, 0.0),
                    mount_angle=0.0)
