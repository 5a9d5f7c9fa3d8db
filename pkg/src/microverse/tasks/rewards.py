"""Reward, success, and termination rules shared by the benchmark tasks.

Everything here is a pure function of its arguments so the rules can be
tested against closed-form oracles without running physics.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def sparse_goal_reward(achieved, desired, threshold: float) -> float:
    """0 when the achieved point lies within threshold of the desired one,
    else -1. The boundary itself counts as a miss."""
    if threshold <= 0.0:
        raise ValueError("threshold must be positive")
    distance = float(np.linalg.norm(np.asarray(desired, dtype=float)
                                    - np.asarray(achieved, dtype=float)))
    return 0.0 if distance < threshold else -1.0


def cloth_success(corner_a, corner_b) -> bool:
    """True when the two selected corners lie within 0.05 m."""
    d = np.asarray(corner_b, dtype=float) - np.asarray(corner_a, dtype=float)
    return float(np.linalg.norm(d)) < 0.05


def sponge_failure(sponge_bottom_z: float, table_top_z: float) -> bool:
    """True when the sponge has been lifted off the surface.

    A 2 cm slop keeps solver-level hovering and small bumps from counting
    as a lift.
    """
    return sponge_bottom_z > table_top_z + 0.02


def stair_reward(v, v_star, o, o_star) -> float:
    """Velocity-tracking and orientation-alignment product, in [0, 1].

    r = [1 - (clamp(|v* - v|, 0, |v*|) / |v*|)^2]^2 * (o* . o + 1) / 2

    v/v_star are linear velocities; o/o_star are unit facing directions.
    """
    v = np.asarray(v, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    speed_star = float(np.linalg.norm(v_star))
    if speed_star <= 0.0:
        raise ValueError("target velocity must be non-zero")
    err = min(float(np.linalg.norm(v_star - v)), speed_star) / speed_star
    velocity_term = (1.0 - err * err) ** 2
    facing = float(np.dot(np.asarray(o_star, dtype=float),
                          np.asarray(o, dtype=float)))
    return velocity_term * (facing + 1.0) / 2.0


def stair_termination(touching_parts, toy_touched: bool,
                      step_reward: float,
                      foot_parts=("foot_left", "foot_right")):
    """Episode-ending rules for the stair-climbing agent.

    Any body part other than the feet touching the terrain ends the
    episode with -1; touching the target toy ends it with +1; otherwise
    the per-step tracking reward passes through.
    """
    for part in touching_parts:
        if part not in foot_parts:
            return -1.0, True
    if toy_touched:
        return 1.0, True
    return step_reward, False


@dataclass
class CoverageGrid:
    """8x8 cleaned-cell map over a rectangular room.

    Cells only ever transition to cleaned; nothing un-cleans them.
    """

    room_min: tuple[float, float]
    room_max: tuple[float, float]
    cells: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.cells is None:
            self.cells = np.zeros((8, 8), dtype=bool)

    @property
    def cleaned_count(self) -> int:
        return int(self.cells.sum())

    def mark(self, position) -> None:
        row, col = grid_cell_of(position, self)
        self.cells[row, col] = True


def grid_cell_of(position, grid: CoverageGrid):
    """Map an (x, y) position to its (row, col) cell by floor division."""
    x = float(position[0])
    y = float(position[1])
    if not (grid.room_min[0] <= x <= grid.room_max[0]
            and grid.room_min[1] <= y <= grid.room_max[1]):
        raise ValueError(f"position ({x}, {y}) outside room bounds")
    nrows, ncols = grid.cells.shape
    cell_w = (grid.room_max[0] - grid.room_min[0]) / ncols
    cell_h = (grid.room_max[1] - grid.room_min[1]) / nrows
    col = min(int((x - grid.room_min[0]) / cell_w), ncols - 1)
    row = min(int((y - grid.room_min[1]) / cell_h), nrows - 1)
    return row, col


def room_reward(agent_speeds, cleaned_count: int, collision: bool):
    """Mean agent speed plus cumulative cleaned cells; -50 and episode end
    on any agent-agent collision."""
    if collision:
        return -50.0, True
    return float(np.mean(agent_speeds)) + float(cleaned_count), False
