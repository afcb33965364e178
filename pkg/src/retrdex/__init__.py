"""Cluttered object-retrieval toolkit: simulation, training, baselines, evaluation.

Subpackages:
    physics   -- batched rigid-body world, manipulator kinematics, DLS IK
    scenegen  -- randomized cluttered-scene construction
    render    -- top-down orthographic id/depth rasterizer
    env       -- the retrieval MDP (observation, smoothed actions, shaped rewards)
    ppo       -- actor-critic PPO trainer over batched environments
    baselines -- VMP state machine and Grasp-Pick removal harness
    evalx     -- exposure protocol, episode metrics, occlusion sweeps
    distill   -- expert data selection and behavior-cloned sequence policy
    cli       -- batch command-line harness and persistence formats
"""

__version__ = "0.1.0"
