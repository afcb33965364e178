from .shapes import Shape, SPHERE, BOX, CYLINDER
from .world import Box, PhysicsParams, RigidBody, World, WorldBatch, make_body, step_world
from .manipulator import (
    Manipulator,
    forward_kinematics,
    fk_palm,
    fingertip_poses,
    hand_sphere_centers,
    prepare_pose,
    suspending_pose,
    HAND_SPHERE_RADII,
    LINK_LENGTHS,
)
from .ik import dls_ik, dls_update, dls_servo_step

__all__ = [
    "Shape", "SPHERE", "BOX", "CYLINDER",
    "Box", "PhysicsParams", "RigidBody", "World", "WorldBatch", "make_body", "step_world",
    "Manipulator", "forward_kinematics", "fk_palm", "fingertip_poses",
    "hand_sphere_centers", "prepare_pose", "suspending_pose",
    "HAND_SPHERE_RADII", "LINK_LENGTHS",
    "dls_ik", "dls_update", "dls_servo_step",
]
