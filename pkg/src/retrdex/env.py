"""The retrieval MDP over batched worlds.

Each environment owns one world slot in a shared WorldBatch. A control step
clips the 13-dim action, turns the arm part into relative joint targets and
the hand part into smoothed absolute targets, advances physics, refreshes the
pixel statistics every `measure_period` steps from a hand-free render, and
returns the 95-dim privileged observation together with the shaped reward.

Observation layout (95 scalars):

    [ 0:13)  q            arm + hand joint positions
    [13:17)  b            target bbox (x, y, w, h) in pixels, cached
    [17:18)  a            bbox area in px^2, cached
    [18:19)  d            depth at bbox center in m, cached
    [19:54)  fingertips   5 x (position 3, quaternion 4)
    [54:61)  T_obj        target pose (position 3, quaternion 4)
    [61:74)  qdot         joint velocities
    [74:80)  v_obj        target linear + angular velocity
    [80:95)  near         positions of the 5 clutter bodies nearest the target

The visual fields (b, a, d) hold the zero sentinel while the target is
invisible and refresh only at measurement steps, mirroring the
move-aside-and-measure cadence. Success is declared when measured exposure
reaches the success threshold; episodes cap at episode_cap steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .catalog import ObjectCatalog, default_catalog
from .errors import OcclusionUnattainable
from .geom import quat_about, quat_mul
from .physics.manipulator import (
    ARM_LIMITS,
    HAND_LIMITS,
    PALM_RADIUS,
    fk_palm,
    prepare_pose,
)
from .physics.world import Box, PhysicsParams, WorldBatch, make_body
from .render import CameraModel, target_window_stats
from .rewards import RewardParams, distance_reward, smooth_hand_action
from .rng import ENV, stream
from .scenegen import RandomizationConfig, SceneSpec, generate_scene

OBS_DIM = 95
ACT_DIM = 13

HAND_MID = 0.5 * (HAND_LIMITS[:, 0] + HAND_LIMITS[:, 1])
HAND_HALF = 0.5 * (HAND_LIMITS[:, 1] - HAND_LIMITS[:, 0])

PREPARE_PALM = (0.0, 0.0, 0.32)
HAND_OPEN = np.array([0.2, 0.2, 0.2, 0.2, 0.2, 0.0])


@dataclass
class EnvConfig:
    scene: SceneSpec = field(default_factory=SceneSpec)
    rand: RandomizationConfig = field(default_factory=RandomizationConfig)
    reward: RewardParams = field(default_factory=RewardParams)
    physics: PhysicsParams = field(default_factory=PhysicsParams)
    target_split: str = "train"
    target_name: str | None = None  # fix one target instead of drawing


class RetrievalEnv:
    """n_envs data-parallel retrieval environments with per-env PRNG streams."""

    def __init__(self, cfg: EnvConfig, n_envs: int, seed: int,
                 catalog: ObjectCatalog | None = None):
        self.cfg = cfg
        self.n_envs = n_envs
        self.seed = int(seed)
        self.catalog = catalog or default_catalog()
        if cfg.target_name is None:
            self.target_pool = [e.name for e in self.catalog.targets(cfg.target_split)]
        else:
            self.target_pool = [cfg.target_name]

        nb = 1 + cfg.scene.n_clutter
        placeholder = [make_body(1, self.catalog.entry(self.target_pool[0]).shape,
                                 0.1, (0, 0, 1.0), is_target=True)]
        for i in range(cfg.scene.n_clutter):
            placeholder.append(make_body(2 + i, self.catalog.clutter[i % len(self.catalog.clutter)].shape,
                                         0.1, (0, 0, 2.0 + i)))
        self.world = WorldBatch(placeholder, cfg.scene.box, n_envs=n_envs, params=cfg.physics)

        self.control_dt = cfg.physics.dt * cfg.physics.substeps
        self.episode_index = np.zeros(n_envs, dtype=np.int64)
        self.scene_seed = np.zeros(n_envs, dtype=np.int64)
        self.step_count = np.zeros(n_envs, dtype=np.int64)
        self.target_names = [""] * n_envs
        self.cameras: list[CameraModel | None] = [None] * n_envs

        self.hand_smoothed = np.zeros((n_envs, 6))
        self.prev_q = np.zeros((n_envs, 13))
        self.phi_prev = np.zeros(n_envs)
        self.prev_clutter_pos = np.zeros((n_envs, cfg.scene.n_clutter, 3))
        self.prev_target_pos = np.zeros((n_envs, 3))

        # cached measurement state
        self.cache_bbox = np.zeros((n_envs, 4))
        self.cache_area = np.zeros(n_envs)
        self.cache_depth = np.zeros(n_envs)
        self.cache_count = np.zeros(n_envs)
        self.exposure = np.zeros(n_envs)
        self.initial_exposure = np.zeros(n_envs)
        self.success = np.zeros(n_envs, dtype=bool)
        self.failed = np.zeros(n_envs, dtype=bool)

    # -- episode lifecycle --------------------------------------------------

    def _episode_rng(self, e: int):
        return stream(self.seed, ENV, e, int(self.episode_index[e]))

    def reset_env(self, e: int) -> np.ndarray:
        """Build a fresh scene for env e and return its first observation.

        The episode is fully determined by (run seed, env index, episode
        index); the replay machinery rebuilds it from those three integers.
        """
        self.scene_seed[e] = self.episode_index[e]
        rng = self._episode_rng(e)
        target_name = self.target_pool[int(rng.integers(len(self.target_pool)))]
        world, camera, info = generate_scene(
            self.catalog, self.cfg.rand, self.cfg.scene, target_name, rng,
            physics=self.cfg.physics,
        )
        self.world.copy_env_from(world, 0, e)
        self.cameras[e] = camera
        self.target_names[e] = info.target_name
        self.episode_index[e] += 1

        q_arm = prepare_pose(self.world.base_pos, PREPARE_PALM)
        self.world.set_joints(q_arm, HAND_OPEN, env=e)
        self.hand_smoothed[e] = HAND_OPEN
        self.prev_q[e] = np.concatenate([q_arm, HAND_OPEN])

        self.step_count[e] = 0
        self.success[e] = False
        self.failed[e] = False
        self._measure(e)
        self.initial_exposure[e] = self.exposure[e]
        self.phi_prev[e] = self._phi_of(e)
        self.prev_clutter_pos[e] = self.world.pos[e, 1:]
        self.prev_target_pos[e] = self.world.pos[e, 0]
        return self._observe()[e]

    def reset_done(self, done: np.ndarray) -> None:
        """Start fresh episodes in every env flagged done."""
        for e in np.nonzero(done)[0]:
            self.reset_env(int(e))

    def reset(self) -> np.ndarray:
        for e in range(self.n_envs):
            self.reset_env(e)
        return self._observe()

    # -- measurement ---------------------------------------------------------

    def _measure(self, e: int):
        ws = target_window_stats(self.world, self.cameras[e], env=e)
        self.cache_bbox[e] = ws.stats.bbox
        self.cache_area[e] = ws.stats.area
        self.cache_depth[e] = ws.stats.center_depth
        self.cache_count[e] = ws.stats.count
        self.exposure[e] = ws.exposure

    def measurement_stats(self, e: int):
        """Cached (bbox, area, center_depth, count, exposure) for env e."""
        return (self.cache_bbox[e].copy(), float(self.cache_area[e]),
                float(self.cache_depth[e]), float(self.cache_count[e]),
                float(self.exposure[e]))

    # -- reward pieces -------------------------------------------------------

    def _palm_pos(self) -> np.ndarray:
        # hand sphere 5 is the palm; world.hand_prev tracks current centers
        return self.world.hand_prev[:, 5]

    def _palm_dist(self) -> np.ndarray:
        return np.linalg.norm(self._palm_pos() - self.world.pos[:, 0], axis=-1)

    def _knear(self):
        """Distances of clutter to target: (sorted_dists, sort_index)."""
        d = np.linalg.norm(self.world.pos[:, 1:] - self.world.pos[:, 0:1], axis=-1)
        idx = np.argsort(d, axis=-1, kind="stable")
        return np.take_along_axis(d, idx, axis=-1), idx

    def _knear_sum(self, dists_sorted: np.ndarray) -> np.ndarray:
        k = min(self.cfg.reward.k_nearest, self.cfg.scene.n_clutter)
        return dists_sorted[:, :k].sum(axis=-1)

    def _phi_of(self, e: int) -> float:
        rd = float(distance_reward(self._palm_dist()[e], self.cfg.reward))
        ds, _ = self._knear()
        ks = float(self._knear_sum(ds)[e])
        return rd + self.cfg.reward.beta * rd * ks + float(self.cache_count[e]) / self.cfg.reward.pixel_divisor

    def _palm_contact(self) -> np.ndarray:
        """Palm sphere intersecting the floor or one of the wall slabs."""
        palm = self._palm_pos()
        box = self.cfg.scene.box
        hx, hy = box.half_x, box.half_y
        t, wh = box.wall_thickness, box.wall_height
        slabs = np.array([
            [-hx, hx, -hy, hy, -t, 0.0],                       # floor
            [hx, hx + t, -hy - t, hy + t, 0.0, wh],            # +x wall
            [-hx - t, -hx, -hy - t, hy + t, 0.0, wh],          # -x wall
            [-hx - t, hx + t, hy, hy + t, 0.0, wh],            # +y wall
            [-hx - t, hx + t, -hy - t, -hy, 0.0, wh],          # -y wall
        ])
        contact = np.zeros(self.n_envs, dtype=bool)
        for lo_x, hi_x, lo_y, hi_y, lo_z, hi_z in slabs:
            cx = np.clip(palm[:, 0], lo_x, hi_x)
            cy = np.clip(palm[:, 1], lo_y, hi_y)
            cz = np.clip(palm[:, 2], lo_z, hi_z)
            d2 = (palm[:, 0] - cx) ** 2 + (palm[:, 1] - cy) ** 2 + (palm[:, 2] - cz) ** 2
            contact |= d2 < PALM_RADIUS**2
        return contact

    # -- stepping ------------------------------------------------------------

    def step(self, actions: np.ndarray):
        """Returns (obs (N,95), reward (N,), done (N,), info dict of arrays)."""
        rp = self.cfg.reward
        a = np.clip(np.asarray(actions, dtype=np.float64).reshape(self.n_envs, ACT_DIM), -1.0, 1.0)
        arm_target = np.clip(
            self.world.q_arm + rp.arm_action_scale * a[:, :7],
            ARM_LIMITS[:, 0], ARM_LIMITS[:, 1],
        )
        hand_raw = HAND_MID + a[:, 7:] * HAND_HALF
        self.hand_smoothed = smooth_hand_action(hand_raw, self.hand_smoothed, rp.smoothing_lambda)
        q_before = np.concatenate([self.world.q_arm, self.world.q_hand], axis=1)

        bad = self.world.step(
            np.concatenate([arm_target, self.hand_smoothed], axis=1),
            raise_on_nonfinite=False,
        )
        self.step_count += 1

        # measurement cadence: refresh the cached pixel term from a fresh render
        measured = (self.step_count % rp.measure_period == 0)
        for e in np.nonzero(measured)[0]:
            self._measure(e)
            if self.exposure[e] >= rp.success_exposure:
                self.success[e] = True

        # rewards (vectorized; equals rewards.compute_reward per env)
        dpalm = self._palm_dist()
        rd = distance_reward(dpalm, rp)
        dists_sorted, near_idx = self._knear()
        ksum = self._knear_sum(dists_sorted)
        phi = rd + rp.beta * rd * ksum + self.cache_count / rp.pixel_divisor
        stir = rp.alpha * np.linalg.norm(
            (self.world.pos[:, 1:] - self.prev_clutter_pos).reshape(self.n_envs, -1), axis=-1
        )
        pen_action = rp.penalty_action * np.sum(a * a, axis=-1)
        pen_contact = rp.penalty_contact * self._palm_contact().astype(np.float64)
        pen_target = rp.penalty_target_move * np.linalg.norm(
            self.world.pos[:, 0] - self.prev_target_pos, axis=-1
        )
        shaped = (phi - self.phi_prev) + stir - pen_action - pen_contact - pen_target

        self.failed |= bad
        done = self.success | (self.step_count >= rp.episode_cap) | self.failed

        info = {
            "r_dist": rd,
            "r_stir": stir,
            "r_clean": rp.beta * rd * ksum,
            "r_pixel": self.cache_count / rp.pixel_divisor,
            "penalty_action": pen_action,
            "penalty_contact": pen_contact,
            "penalty_target_move": pen_target,
            "phi": phi,
            "shaped": shaped,
            "success": self.success.copy(),
            "failed": self.failed.copy(),
            "exposure": self.exposure.copy(),
            "measured": measured,
            "step": self.step_count.copy(),
        }

        self.phi_prev = phi
        self.prev_clutter_pos = self.world.pos[:, 1:].copy()
        self.prev_target_pos = self.world.pos[:, 0].copy()
        obs = self._observe(q_before=q_before, near_idx=near_idx)
        self.prev_q = np.concatenate([self.world.q_arm, self.world.q_hand], axis=1)
        info["fingertip_min_z"] = self._fingertip_min_z
        return obs, shaped, done, info

    # -- observation ---------------------------------------------------------

    def _observe(self, q_before: np.ndarray | None = None,
                 near_idx: np.ndarray | None = None) -> np.ndarray:
        w = self.world
        q_now = np.concatenate([w.q_arm, w.q_hand], axis=1)
        if q_before is None:
            q_before = self.prev_q
        qdot = (q_now - q_before) / self.control_dt

        tip_p = w.hand_prev[:, :5]
        self._fingertip_min_z = tip_p[:, :, 2].min(axis=1)
        _, palm_q = fk_palm(w.q_arm, w.base_pos)
        mount = np.zeros((self.n_envs, 5))
        mount[:, 4] = w.q_hand[:, 5]
        flex_q = quat_mul(quat_about(2, mount), quat_about(1, w.q_hand[:, :5]))
        tip_q = quat_mul(palm_q[:, None, :], flex_q)
        tips = np.concatenate([tip_p, tip_q], axis=-1).reshape(self.n_envs, 35)

        t_obj = np.concatenate([w.pos[:, 0], w.quat[:, 0]], axis=-1)
        v_obj = np.concatenate([w.vel[:, 0], w.omega[:, 0]], axis=-1)

        if near_idx is None:
            _, near_idx = self._knear()
        k = 5
        nc = self.cfg.scene.n_clutter
        near = np.zeros((self.n_envs, k, 3))
        kk = min(k, nc)
        if kk > 0:
            sel = near_idx[:, :kk, None] + 1  # clutter rows start at body 1
            near[:, :kk] = np.take_along_axis(w.pos, np.broadcast_to(sel, (self.n_envs, kk, 3)), axis=1)

        obs = np.concatenate(
            [
                q_now,
                self.cache_bbox,
                self.cache_area[:, None],
                self.cache_depth[:, None],
                tips,
                t_obj,
                qdot,
                v_obj,
                near.reshape(self.n_envs, 15),
            ],
            axis=1,
        )
        assert obs.shape == (self.n_envs, OBS_DIM)
        return obs
