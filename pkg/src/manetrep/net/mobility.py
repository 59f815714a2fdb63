"""Random-waypoint mobility."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class WaypointState:
    position: tuple[float, float]
    target: tuple[float, float]
    speed: float
    pause_remaining: float = 0.0


def _draw_leg(rng: np.random.Generator, area: tuple[float, float], v_max: float) -> tuple[tuple[float, float], float]:
    target = (float(rng.uniform(0.0, area[0])), float(rng.uniform(0.0, area[1])))
    # speed in (0, v_max]: reflect the half-open uniform draw
    speed = float(v_max - rng.uniform(0.0, v_max)) if v_max > 0 else 0.0
    return target, speed


def initial_state(
    rng: np.random.Generator, area: tuple[float, float], v_max: float, pause_max: float
) -> WaypointState:
    pos = (float(rng.uniform(0.0, area[0])), float(rng.uniform(0.0, area[1])))
    pause = float(rng.uniform(0.0, pause_max)) if pause_max > 0 else 0.0
    target, speed = _draw_leg(rng, area, v_max)
    return WaypointState(pos, target, speed, pause)


def step_waypoint(
    state: WaypointState,
    dt: float,
    rng: np.random.Generator,
    area: tuple[float, float],
    v_max: float,
    pause_max: float,
) -> WaypointState:
    """Advance ``state`` by ``dt`` seconds.

    Time left over after a pause ends or a waypoint is reached is spent on the
    next phase, so the motion does not depend on the step size.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    remaining = dt
    s = state
    while remaining > 1e-12:
        if s.pause_remaining > 0:
            used = min(remaining, s.pause_remaining)
            s = replace(s, pause_remaining=s.pause_remaining - used)
            remaining -= used
            continue
        if s.speed <= 0:
            break
        (x, y), (tx, ty) = s.position, s.target
        dist = math.hypot(tx - x, ty - y)
        travel = s.speed * remaining
        if travel < dist:
            f = travel / dist
            s = replace(s, position=(x + (tx - x) * f, y + (ty - y) * f))
            remaining = 0.0
        else:
            remaining -= dist / s.speed
            pause = float(rng.uniform(0.0, pause_max)) if pause_max > 0 else 0.0
            target, speed = _draw_leg(rng, area, v_max)
            s = WaypointState((tx, ty), target, speed, pause)
    return s
