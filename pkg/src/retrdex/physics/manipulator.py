"""Kinematic 7-DoF arm with a 6-DoF five-fingered hand.

The arm is a serial chain of 7 revolute joints with axes alternating
z, y, z, y, z, y, z and a fixed translation along the local +z after each
joint. At the zero configuration the palm therefore sits at
base + (0, 0, sum(LINK_LENGTHS)) with identity orientation (the documented
home pose). The chain is not a model of any specific robot; it is a generic
~0.7 m-reach arm whose palm can reach everywhere inside the container.

The hand is abstracted as five fingertips mounted on the palm plate. Joint
q_hand[i] (i < 5) flexes fingertip i along a 40 mm arc in the palm frame and
q_hand[5] rotates the thumb mount about the palm normal. Fingertips extend
along the palm +z axis, so when the palm faces down the tips hang below it.
For contact purposes the hand is six spheres: five tips (12 mm) plus the
palm (35 mm); it pushes objects but is never pushed back.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geom import quat_about, quat_mul, quat_normalize, quat_rotate

LINK_LENGTHS = np.array([0.10, 0.25, 0.02, 0.25, 0.02, 0.10, 0.05])
JOINT_AXES = (2, 1, 2, 1, 2, 1, 2)  # 0=x, 1=y, 2=z

ARM_LIMITS = np.array([[-2.967, 2.967]] * 7)
HAND_LIMITS = np.array([[0.0, 1.5]] * 5 + [[-0.8, 0.8]])

# fingertip mount points in the palm frame (4 fingers along +x edge, thumb offset)
FINGER_MOUNTS = np.array(
    [
        [0.030, -0.027, 0.0],
        [0.030, -0.009, 0.0],
        [0.030, 0.009, 0.0],
        [0.030, 0.027, 0.0],
        [-0.010, -0.040, 0.0],
    ]
)
FLEX_ARC_RADIUS = 0.040
TIP_RADIUS = 0.012
PALM_RADIUS = 0.035
HAND_SPHERE_RADII = np.array([TIP_RADIUS] * 5 + [PALM_RADIUS])

ARM_RATE = 2.0   # rad/s joint velocity clamp
HAND_RATE = 4.0

DEFAULT_BASE = np.array([-0.35, 0.0, 0.10])


@dataclass
class Manipulator:
    q_arm: np.ndarray = field(default_factory=lambda: np.zeros(7))
    q_hand: np.ndarray = field(default_factory=lambda: np.zeros(6))
    base_pos: np.ndarray = field(default_factory=lambda: DEFAULT_BASE.copy())

    def __post_init__(self):
        self.q_arm = np.asarray(self.q_arm, dtype=np.float64).copy()
        self.q_hand = np.asarray(self.q_hand, dtype=np.float64).copy()
        self.base_pos = np.asarray(self.base_pos, dtype=np.float64).copy()
        self.clamp()

    def clamp(self):
        np.clip(self.q_arm, ARM_LIMITS[:, 0], ARM_LIMITS[:, 1], out=self.q_arm)
        np.clip(self.q_hand, HAND_LIMITS[:, 0], HAND_LIMITS[:, 1], out=self.q_hand)

    @property
    def q(self) -> np.ndarray:
        return np.concatenate([self.q_arm, self.q_hand])

    def copy(self) -> "Manipulator":
        return Manipulator(self.q_arm.copy(), self.q_hand.copy(), self.base_pos.copy())


def fk_palm(q_arm: np.ndarray, base_pos: np.ndarray = DEFAULT_BASE):
    """Palm position and orientation; q_arm may carry leading batch axes."""
    q_arm = np.asarray(q_arm, dtype=np.float64)
    lead = q_arm.shape[:-1]
    pos = np.broadcast_to(base_pos, lead + (3,)).astype(np.float64).copy()
    rot = np.zeros(lead + (4,))
    rot[..., 0] = 1.0
    for i in range(7):
        rot = quat_mul(rot, quat_about(JOINT_AXES[i], q_arm[..., i]))
        link = np.zeros(lead + (3,))
        link[..., 2] = LINK_LENGTHS[i]
        pos = pos + quat_rotate(rot, link)
    return pos, quat_normalize(rot)


def fingertip_local(q_hand: np.ndarray) -> np.ndarray:
    """Fingertip centers in the palm frame, (..., 5, 3)."""
    q_hand = np.asarray(q_hand, dtype=np.float64)
    lead = q_hand.shape[:-1]
    tips = np.broadcast_to(FINGER_MOUNTS, lead + (5, 3)).astype(np.float64).copy()
    flex = q_hand[..., :5]
    sin_f, cos_f = np.sin(flex), np.cos(flex)
    # flexion plane direction: +x for fingers, rotated by the thumb mount joint
    thumb = q_hand[..., 5]
    dirx = np.ones(lead + (5,))
    diry = np.zeros(lead + (5,))
    dirx[..., 4] = np.cos(thumb)
    diry[..., 4] = np.sin(thumb)
    tips[..., 0] += FLEX_ARC_RADIUS * sin_f * dirx
    tips[..., 1] += FLEX_ARC_RADIUS * sin_f * diry
    tips[..., 2] += FLEX_ARC_RADIUS * cos_f
    return tips


def fingertip_poses(q_arm: np.ndarray, q_hand: np.ndarray, base_pos: np.ndarray = DEFAULT_BASE):
    """World fingertip positions (..., 5, 3) and orientations (..., 5, 4)."""
    palm_p, palm_q = fk_palm(q_arm, base_pos)
    tips = fingertip_local(q_hand)
    world = palm_p[..., None, :] + quat_rotate(palm_q[..., None, :], tips)
    q_hand = np.asarray(q_hand, dtype=np.float64)
    lead = q_hand.shape[:-1]
    mount = np.zeros(lead + (5,))
    mount[..., 4] = q_hand[..., 5]
    flex_q = quat_mul(quat_about(2, mount), quat_about(1, q_hand[..., :5]))
    quats = quat_mul(palm_q[..., None, :], flex_q)
    return world, quats


def fk_all(q_arm: np.ndarray, q_hand: np.ndarray, base_pos: np.ndarray = DEFAULT_BASE):
    """One-pass kinematics bundle: (palm_p, palm_q, tip_p, tip_q, spheres).

    spheres stacks the 6 contact-sphere centers (5 tips + palm), (..., 6, 3).
    """
    palm_p, palm_q = fk_palm(q_arm, base_pos)
    tips_local = fingertip_local(q_hand)
    tip_p = palm_p[..., None, :] + quat_rotate(palm_q[..., None, :], tips_local)
    q_hand = np.asarray(q_hand, dtype=np.float64)
    lead = q_hand.shape[:-1]
    mount = np.zeros(lead + (5,))
    mount[..., 4] = q_hand[..., 5]
    flex_q = quat_mul(quat_about(2, mount), quat_about(1, q_hand[..., :5]))
    tip_q = quat_mul(palm_q[..., None, :], flex_q)
    spheres = np.concatenate([tip_p, palm_p[..., None, :]], axis=-2)
    return palm_p, palm_q, tip_p, tip_q, spheres


def hand_sphere_centers(q_arm: np.ndarray, q_hand: np.ndarray, base_pos: np.ndarray = DEFAULT_BASE) -> np.ndarray:
    """Centers of the 6 contact spheres (5 tips + palm), (..., 6, 3)."""
    tips, _ = fingertip_poses(q_arm, q_hand, base_pos)
    palm_p, _ = fk_palm(q_arm, base_pos)
    return np.concatenate([tips, palm_p[..., None, :]], axis=-2)


def forward_kinematics(m: Manipulator):
    """(palm_pose, fingertip_poses[5]) with each pose a (position, quaternion) pair."""
    palm_p, palm_q = fk_palm(m.q_arm, m.base_pos)
    tip_p, tip_q = fingertip_poses(m.q_arm, m.q_hand, m.base_pos)
    palm = (palm_p, palm_q)
    tips = [(tip_p[i], tip_q[i]) for i in range(5)]
    return palm, tips


def _planar_reach(base_pos: np.ndarray, target: np.ndarray):
    """Closed-form q_arm placing the palm at `target` with the palm facing down.

    Joints 2/4/6 (y axes) solve a planar two-link reach with the constraint
    q2 + q4 + q6 = pi (net Ry(pi) flips the palm normal to -z); joint 1 yaws
    the plane toward the target. Raises ValueError when out of reach.
    """
    dx = target[0] - base_pos[0]
    dy = target[1] - base_pos[1]
    yaw = np.arctan2(dy, dx) if (abs(dx) > 1e-12 or abs(dy) > 1e-12) else 0.0
    r = np.hypot(dx, dy)
    # chain: +0.10 up, two 0.27 links, then -0.15 down after the Ry(pi) flip
    e = (target[2] - base_pos[2]) - LINK_LENGTHS[0] + LINK_LENGTHS[5] + LINK_LENGTHS[6]
    f = r
    ll = LINK_LENGTHS[1] + LINK_LENGTHS[2]  # == LINK_LENGTHS[3] + LINK_LENGTHS[4]
    m = np.hypot(e, f)
    if m > 2.0 * ll:
        raise ValueError(f"target {target} out of planar reach ({m:.3f} > {2*ll:.3f})")
    half = np.arccos(np.clip(m / (2.0 * ll), -1.0, 1.0))
    mid = np.arctan2(f, e)
    u = mid - half
    v = mid + half
    return np.array([yaw, u, 0.0, v - u, 0.0, np.pi - v, 0.0])


def prepare_pose(base_pos: np.ndarray = DEFAULT_BASE, palm_target=(0.0, 0.0, 0.32)) -> np.ndarray:
    """Arm configuration holding the palm above the box center, facing down."""
    return _planar_reach(np.asarray(base_pos, float), np.asarray(palm_target, float))


def suspending_pose(base_pos: np.ndarray = DEFAULT_BASE) -> np.ndarray:
    """Arm configuration parking the palm behind the box, out of the camera footprint."""
    base = np.asarray(base_pos, float)
    return _planar_reach(base, np.array([base[0] + 0.06, base[1], 0.55]))
