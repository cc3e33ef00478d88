#!/usr/bin/env python3
"""How the landing reward is built, one component at a time.

Each component saturates in its own regime, staging the learning problem:
get close, then time the trigger, then hit the right impact angle, then
stick all four legs without touching the body.
"""

import math

import numpy as np

from perchrl.contact_legs import LandingOutcome
from perchrl.env import episode_reward


def outcome(**kw):
    base = dict(n_legs=4, body_contact=False, d_min=0.05, tau_trg=0.2,
                theta_impact=170.0, triggered=True)
    base.update(kw)
    return LandingOutcome(**base)


print("closest-approach term (saturates inside 10 cm):")
for d in (1.0, 0.5, 0.2, 0.1, 0.05, 0.0):
    print(f"  d_min {d:4.2f} m -> r_d {episode_reward(outcome(d_min=d)).r_d:.3f}")

print("\ntrigger-timing term (plateau over tau in [0.15, 0.25] s):")
for tau in (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.5, 1.0):
    print(f"  tau_trg {tau:4.2f} s -> r_tau "
          f"{episode_reward(outcome(tau_trg=tau)).r_tau:.3f}")

print("\nimpact-angle term (full credit beyond 120 deg):")
for th in (0.0, 30.0, 60.0, 90.0, 120.0, 150.0, 180.0):
    print(f"  theta {th:5.1f} deg -> r_theta "
          f"{episode_reward(outcome(theta_impact=th)).r_theta:.3f}")

print("\nleg term with and without body contact (divided by 3 on strike):")
for n in (0, 2, 4):
    clean = episode_reward(outcome(n_legs=n)).r_legs
    dirty = episode_reward(outcome(n_legs=n, body_contact=True)).r_legs
    print(f"  {n} legs -> {clean:.3f} clean, {dirty:.3f} with body contact")

print("\nweighted totals for a few whole episodes:")
cases = [
    ("perfect four-leg perch", outcome(d_min=0.0)),
    ("four-leg, slightly early trigger", outcome(tau_trg=0.3)),
    ("two-leg hang", outcome(n_legs=2)),
    ("two-leg hang with body strike", outcome(n_legs=2, body_contact=True)),
    ("never triggered, close pass", outcome(n_legs=0, d_min=0.045,
                                            tau_trg=math.nan,
                                            theta_impact=0.0,
                                            triggered=False)),
]
for name, o in cases:
    print(f"  {name:35s} -> {episode_reward(o).total:.3f}")
