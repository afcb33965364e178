"""World state: a box container, dynamic bodies, and the kinematic arm-hand.

WorldBatch stores N structurally identical worlds in stacked float64 arrays
and steps them together through the numba kernel; World is the single-world
(N = 1) view with convenience accessors. Stepping is in-place; a world is
owned by exactly one environment and batching is data-parallel with no
cross-env coupling, so slicing env e out of a batch and stepping it alone
reproduces the batched trajectory bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteState
from ..geom import QUAT_IDENTITY
from . import kernels
from .manipulator import (
    ARM_LIMITS,
    ARM_RATE,
    DEFAULT_BASE,
    HAND_LIMITS,
    HAND_RATE,
    HAND_SPHERE_RADII,
    hand_sphere_centers,
)
from .shapes import Shape


@dataclass(frozen=True)
class Box:
    """Inner container dimensions; the floor is z = 0, walls rise wall_height."""

    size_x: float = 0.35
    size_y: float = 0.45
    wall_height: float = 0.15
    wall_thickness: float = 0.01

    @property
    def half_x(self) -> float:
        return 0.5 * self.size_x

    @property
    def half_y(self) -> float:
        return 0.5 * self.size_y


@dataclass
class RigidBody:
    """Snapshot of one body; editing it does not write back into a World."""

    body_id: int
    shape: Shape
    mass: float
    position: np.ndarray
    quaternion: np.ndarray
    linear_velocity: np.ndarray
    angular_velocity: np.ndarray
    is_target: bool = False
    is_static: bool = False
    default_mass: float = 0.0

    def __post_init__(self):
        if not self.is_static and self.mass <= 0:
            raise ValueError("dynamic bodies need positive mass")
        if self.default_mass == 0.0:
            self.default_mass = self.mass


@dataclass
class PhysicsParams:
    dt: float = 1.0 / 240.0
    substeps: int = 4
    friction: float = 0.6
    baumgarte: float = 0.2
    slop: float = 5e-4
    velocity_iters: int = 10
    position_iters: int = 4
    gravity: tuple = (0.0, 0.0, -9.81)
    arm_rate: float = ARM_RATE
    hand_rate: float = HAND_RATE


class WorldBatch:
    """N structurally identical worlds in stacked arrays."""

    def __init__(self, bodies: list, box: Box, n_envs: int = 1,
                 params: PhysicsParams | None = None,
                 base_pos: np.ndarray = DEFAULT_BASE):
        nb = len(bodies)
        if nb == 0:
            raise ValueError("need at least one body")
        ids = [b.body_id for b in bodies]
        if len(set(ids)) != nb:
            raise ValueError("body ids must be unique")
        self.n_envs = n_envs
        self.n_bodies = nb
        self.box = box
        self.params = params or PhysicsParams()
        self.base_pos = np.asarray(base_pos, dtype=np.float64).copy()

        self.body_ids = np.array(ids, dtype=np.int32)
        self.shape_kind = np.repeat(
            np.array([b.shape.code for b in bodies], dtype=np.int8)[None], n_envs, axis=0
        )
        self.shape_dims = np.repeat(
            np.array([b.shape.packed_dims() for b in bodies])[None], n_envs, axis=0
        )
        self.shapes = [[b.shape for b in bodies] for _ in range(n_envs)]

        def rep(x):
            return np.repeat(np.asarray(x, dtype=np.float64)[None], n_envs, axis=0)

        self.pos = rep([b.position for b in bodies])
        self.quat = rep([b.quaternion for b in bodies])
        self.vel = rep([b.linear_velocity for b in bodies])
        self.omega = rep([b.angular_velocity for b in bodies])
        self.mass = rep([b.mass for b in bodies])
        self.default_mass = rep([b.default_mass for b in bodies])
        self.inv_mass = np.where(
            np.array([b.is_static for b in bodies])[None, :], 0.0, 1.0 / self.mass
        )
        self.coll_r = rep([b.shape.collision_radius for b in bodies])
        self.floor_r = rep([b.shape.floor_radius for b in bodies])
        self.wall_r = rep([b.shape.wall_radius for b in bodies])
        self.active = np.ones((n_envs, nb), dtype=np.uint8)
        self.is_target = np.repeat(
            np.array([b.is_target for b in bodies], dtype=bool)[None], n_envs, axis=0
        )
        self.is_static = np.array([b.is_static for b in bodies], dtype=bool)

        self.q_arm = np.zeros((n_envs, 7))
        self.q_hand = np.zeros((n_envs, 6))
        self.hand_prev = hand_sphere_centers(self.q_arm, self.q_hand, self.base_pos)
        self.time = np.zeros(n_envs)

    # -- manipulator ------------------------------------------------------

    def set_joints(self, q_arm, q_hand, env=None):
        idx = slice(None) if env is None else env
        self.q_arm[idx] = np.clip(q_arm, ARM_LIMITS[:, 0], ARM_LIMITS[:, 1])
        self.q_hand[idx] = np.clip(q_hand, HAND_LIMITS[:, 0], HAND_LIMITS[:, 1])
        self.hand_prev[idx] = hand_sphere_centers(self.q_arm[idx], self.q_hand[idx], self.base_pos)

    def _joint_move(self, targets: np.ndarray, seconds: float):
        """Rate-clamped joint advance toward targets over `seconds`."""
        targets = np.asarray(targets, dtype=np.float64)
        arm_t = np.clip(targets[:, :7], ARM_LIMITS[:, 0], ARM_LIMITS[:, 1])
        hand_t = np.clip(targets[:, 7:13], HAND_LIMITS[:, 0], HAND_LIMITS[:, 1])
        lim_a = self.params.arm_rate * seconds
        lim_h = self.params.hand_rate * seconds
        self.q_arm += np.clip(arm_t - self.q_arm, -lim_a, lim_a)
        self.q_hand += np.clip(hand_t - self.q_hand, -lim_h, lim_h)

    # -- stepping ---------------------------------------------------------

    def step(self, joint_targets: np.ndarray, substeps: int | None = None,
             hand_on: bool = True, raise_on_nonfinite: bool = True):
        """Advance every env by one control step (`substeps` physics substeps).

        Joints advance toward joint_targets under the per-joint velocity
        clamp; the six hand contact spheres sweep linearly from their previous
        to their new centers across the substeps. Returns the per-env
        non-finite flags (all zero normally); raises NonFiniteState instead
        when raise_on_nonfinite is set.
        """
        p = self.params
        S = int(substeps if substeps is not None else p.substeps)
        if S < 1:
            raise ValueError("substeps must be >= 1")
        joint_targets = np.asarray(joint_targets, dtype=np.float64)
        if joint_targets.ndim == 1:
            joint_targets = np.repeat(joint_targets[None], self.n_envs, axis=0)
        if not np.all(np.isfinite(joint_targets)):
            raise NonFiniteState("joint targets are non-finite", module="physics")

        start = self.hand_prev.copy()
        self._joint_move(joint_targets, S * p.dt)
        end = hand_sphere_centers(self.q_arm, self.q_hand, self.base_pos)
        frac = (np.arange(1, S + 1) / S)[None, :, None, None]
        hand_traj = start[:, None] + (end - start)[:, None] * frac

        bad = np.zeros(self.n_envs, dtype=np.uint8)
        kernels.run_substeps(
            self.pos, self.quat, self.vel, self.omega, self.inv_mass,
            self.coll_r, self.floor_r, self.wall_r, self.active,
            hand_traj, self.hand_prev, HAND_SPHERE_RADII, 1 if hand_on else 0,
            self.box.half_x, self.box.half_y,
            p.gravity[0], p.gravity[1], p.gravity[2],
            p.dt, p.friction, p.baumgarte, p.slop,
            p.velocity_iters, p.position_iters, 1.0, bad,
        )
        self.time += S * p.dt
        if raise_on_nonfinite and bad.any():
            raise NonFiniteState("body state became non-finite", module="physics")
        return bad.astype(bool)

    def run_passive(self, substeps: int, damping: float = 1.0):
        """Advance without manipulator interaction (scene settling)."""
        p = self.params
        hand_traj = np.repeat(self.hand_prev[:, None], substeps, axis=1)
        bad = np.zeros(self.n_envs, dtype=np.uint8)
        kernels.run_substeps(
            self.pos, self.quat, self.vel, self.omega, self.inv_mass,
            self.coll_r, self.floor_r, self.wall_r, self.active,
            hand_traj, self.hand_prev, HAND_SPHERE_RADII, 0,
            self.box.half_x, self.box.half_y,
            p.gravity[0], p.gravity[1], p.gravity[2],
            p.dt, p.friction, p.baumgarte, p.slop,
            p.velocity_iters, p.position_iters, damping, bad,
        )
        self.time += substeps * p.dt
        if bad.any():
            raise NonFiniteState("body state became non-finite", module="physics")
        return self

    # -- queries ----------------------------------------------------------

    def kinetic_energy(self) -> np.ndarray:
        """Translational kinetic energy per env (J); only active dynamic bodies."""
        live = (self.active != 0) & (self.inv_mass > 0)
        ke = 0.5 * self.mass * np.sum(self.vel**2, axis=-1)
        return np.sum(np.where(live, ke, 0.0), axis=-1)

    def target_index(self, env: int = 0) -> int:
        idx = np.nonzero(self.is_target[env])[0]
        if idx.size != 1:
            raise ValueError("world needs exactly one target body")
        return int(idx[0])

    def body(self, i: int, env: int = 0) -> RigidBody:
        return RigidBody(
            body_id=int(self.body_ids[i]),
            shape=self.shapes[env][i],
            mass=float(self.mass[env, i]),
            position=self.pos[env, i].copy(),
            quaternion=self.quat[env, i].copy(),
            linear_velocity=self.vel[env, i].copy(),
            angular_velocity=self.omega[env, i].copy(),
            is_target=bool(self.is_target[env, i]),
            is_static=bool(self.is_static[i]),
            default_mass=float(self.default_mass[env, i]),
        )

    @property
    def bodies(self) -> list:
        return [self.body(i) for i in range(self.n_bodies)]

    # -- batch plumbing ----------------------------------------------------

    _ENV_ARRAYS = ("pos", "quat", "vel", "omega", "mass", "default_mass",
                   "inv_mass", "coll_r", "floor_r", "wall_r", "active",
                   "is_target", "shape_kind", "shape_dims", "q_arm", "q_hand",
                   "hand_prev", "time")

    def clone(self) -> "WorldBatch":
        out = object.__new__(type(self))
        out.__dict__.update(self.__dict__)
        for name in self._ENV_ARRAYS:
            setattr(out, name, getattr(self, name).copy())
        out.shapes = [list(s) for s in self.shapes]
        return out

    def copy_env_from(self, other: "WorldBatch", src: int, dst: int):
        """Overwrite env `dst` with env `src` of a same-body-count batch."""
        if other.n_bodies != self.n_bodies:
            raise ValueError("body counts differ")
        for name in self._ENV_ARRAYS:
            getattr(self, name)[dst] = getattr(other, name)[src]
        self.shapes[dst] = list(other.shapes[src])

    def extract(self, env: int) -> "World":
        w = World(self.bodies_of(env), self.box, self.params, self.base_pos)
        w.set_joints(self.q_arm[env], self.q_hand[env])
        w.time[0] = self.time[env]
        w.active[0] = self.active[env]
        return w

    def bodies_of(self, env: int) -> list:
        return [self.body(i, env) for i in range(self.n_bodies)]


class World(WorldBatch):
    """A single world: WorldBatch with n_envs = 1 and scalar accessors."""

    def __init__(self, bodies, box: Box, params: PhysicsParams | None = None,
                 base_pos: np.ndarray = DEFAULT_BASE):
        super().__init__(bodies, box, n_envs=1, params=params, base_pos=base_pos)


def step_world(w: WorldBatch, joint_targets: np.ndarray, substeps: int) -> WorldBatch:
    """Advance `w` in place by one control step and return it."""
    w.step(joint_targets, substeps)
    return w


def make_body(body_id: int, shape: Shape, mass: float, position,
              yaw: float = 0.0, is_target: bool = False) -> RigidBody:
    q = np.array([np.cos(yaw / 2.0), 0.0, 0.0, np.sin(yaw / 2.0)])
    return RigidBody(
        body_id=body_id, shape=shape, mass=mass,
        position=np.asarray(position, dtype=np.float64),
        quaternion=q, linear_velocity=np.zeros(3), angular_velocity=np.zeros(3),
        is_target=is_target,
    )
