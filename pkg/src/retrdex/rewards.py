"""Reward stack with potential-based shaping.

The potential over states is

    Phi(s) = r_dist(s) + r_clean(s) + r_pixel(s)

with r_dist = exp(-dist_gain * min(d - e0, 0)) for palm-target distance d,
r_clean = beta * r_dist * sum of the k nearest clutter-target distances, and
r_pixel = C / pixel_divisor for the cached visible-pixel count C. The total
per-step reward is

    R = Phi(s') - Phi(s) + r_stir - penalties

where r_stir = alpha * ||p_all - p_all_prev||_2 over stacked clutter
positions, and the penalties charge action magnitude, palm contact with the
container, and target displacement. r_stir and the penalties sit outside the
potential, so the shaping term telescopes over an episode to
Phi(s_T) - Phi(s_0) exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RewardParams:
    e0: float = 0.15
    dist_gain: float = 5.0
    alpha: float = 1.0
    beta: float = 0.5
    k_nearest: int = 5
    pixel_divisor: float = 15.0
    smoothing_lambda: float = 0.3
    penalty_action: float = 0.001
    penalty_contact: float = 0.1
    penalty_target_move: float = 1.0
    measure_period: int = 10
    episode_cap: int = 210
    success_exposure: float = 0.95
    arm_action_scale: float = 0.05

    def __post_init__(self):
        if self.episode_cap % self.measure_period != 0:
            raise ValueError("measure_period must divide episode_cap")
        if not (0.0 < self.smoothing_lambda <= 1.0):
            raise ValueError("smoothing_lambda must be in (0, 1]")


@dataclass
class RewardBreakdown:
    r_dist: float = 0.0
    r_stir: float = 0.0
    r_clean: float = 0.0
    r_pixel: float = 0.0
    penalty_action: float = 0.0
    penalty_contact: float = 0.0
    penalty_target_move: float = 0.0
    phi: float = 0.0
    shaped: float = 0.0

    FIELDS = ("r_dist", "r_stir", "r_clean", "r_pixel", "penalty_action",
              "penalty_contact", "penalty_target_move", "phi", "shaped")

    def to_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in self.FIELDS}

    @staticmethod
    def from_dict(d: dict) -> "RewardBreakdown":
        return RewardBreakdown(**{k: d[k] for k in RewardBreakdown.FIELDS})


@dataclass
class StateSummary:
    """The reward-relevant view of one state."""

    palm_target_dist: float
    knear_sum: float                 # sum of k nearest clutter-target distances
    pixel_count: float               # cached C
    clutter_positions: np.ndarray    # (n_clutter, 3)
    target_position: np.ndarray      # (3,)
    action_sq: float = 0.0           # ||a||^2 of the action taken to reach here
    palm_contact: bool = False       # palm touching floor/wall here


def distance_reward(d, params: RewardParams = RewardParams()):
    """exp(-gain * min(d - e0, 0)); 1 beyond e0, rising to exp(gain*e0) at 0."""
    d = np.asarray(d, dtype=np.float64)
    return np.exp(-params.dist_gain * np.minimum(d - params.e0, 0.0))


def potential(r_dist: float, knear_sum: float, pixel_count: float,
              params: RewardParams) -> float:
    r_clean = params.beta * r_dist * knear_sum
    r_pixel = pixel_count / params.pixel_divisor
    return r_dist + r_clean + r_pixel


def smooth_hand_action(new: np.ndarray, prev: np.ndarray, lam: float) -> np.ndarray:
    """Elementwise blend lam*new + (1-lam)*prev; the result is next step's prev."""
    if not (0.0 < lam <= 1.0):
        raise ValueError("lambda must be in (0, 1]")
    return lam * np.asarray(new, dtype=np.float64) + (1.0 - lam) * np.asarray(prev, dtype=np.float64)


def compute_reward(prev: StateSummary, curr: StateSummary,
                   params: RewardParams = RewardParams()) -> RewardBreakdown:
    """Shaped reward for the transition prev -> curr."""
    rd_prev = float(distance_reward(prev.palm_target_dist, params))
    rd_curr = float(distance_reward(curr.palm_target_dist, params))
    phi_prev = potential(rd_prev, prev.knear_sum, prev.pixel_count, params)
    phi_curr = potential(rd_curr, curr.knear_sum, curr.pixel_count, params)

    stir = params.alpha * float(
        np.linalg.norm(curr.clutter_positions - prev.clutter_positions)
    )
    pen_action = params.penalty_action * curr.action_sq
    pen_contact = params.penalty_contact * (1.0 if curr.palm_contact else 0.0)
    pen_target = params.penalty_target_move * float(
        np.linalg.norm(curr.target_position - prev.target_position)
    )
    return RewardBreakdown(
        r_dist=rd_curr,
        r_stir=stir,
        r_clean=params.beta * rd_curr * curr.knear_sum,
        r_pixel=curr.pixel_count / params.pixel_divisor,
        penalty_action=pen_action,
        penalty_contact=pen_contact,
        penalty_target_move=pen_target,
        phi=phi_curr,
        shaped=(phi_curr - phi_prev) + stir - pen_action - pen_contact - pen_target,
    )
