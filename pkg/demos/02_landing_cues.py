#!/usr/bin/env python3
"""The three emulated landing cues along straight approaches.

Shows the countdown property that makes time-to-contact such a clean
trigger signal: along any constant-velocity collision course, tau loses
exactly one second per second, independent of speed or angle.
"""

import numpy as np

from perchrl.sensing import observe
from perchrl.sim_core import MotorState, RigidBodyState, WorldParams

world = WorldParams(ceiling_height=2.5)

for v, phi_deg in [(2.0, 90.0), (2.5, 45.0), (3.5, 30.0)]:
    phi = np.radians(phi_deg)
    vx, vz = v * np.cos(phi), v * np.sin(phi)
    print(f"\napproach {v} m/s at {phi_deg:.0f} deg "
          f"(vx={vx:.2f}, vz={vz:.2f}):")
    print(f"  {'t [s]':>6} {'gap [m]':>8} {'tau [s]':>8} "
          f"{'theta_x':>8} {'d(tau)/dt':>10}")
    prev_tau = None
    for k in range(0, 60, 6):
        t = 0.01 * k
        gap = 1.3 - vz * t
        if gap <= 0.05:
            break
        s = RigidBodyState(x=vx * t, z=world.ceiling_height - gap,
                           vx=vx, vz=vz, pitch=0.0, pitch_rate=0.0,
                           motors=MotorState())
        obs = observe(s, world)
        rate = ""
        if prev_tau is not None and obs.tau < 4.9:
            rate = f"{(obs.tau - prev_tau[0]) / (t - prev_tau[1]):10.4f}"
        print(f"  {t:6.2f} {gap:8.3f} {obs.tau:8.3f} {obs.theta_x:8.3f} "
              f"{rate:>10}")
        prev_tau = (obs.tau, t)

print("\ntau falls at exactly -1 s/s while closing; theta_x grows as the"
      "\ngap shrinks, encoding lateral speed relative to the surface.")
