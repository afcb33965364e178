"""Damped least-squares inverse kinematics for the palm position.

The positional Jacobian is built by central differences (h = 1e-5 rad) over
batched forward kinematics; the update is tau = J^T (J J^T + lambda^2 I)^-1 dx,
which stays bounded near singularities.
"""

from __future__ import annotations

import numpy as np

from ..errors import Unreachable
from .manipulator import ARM_LIMITS, DEFAULT_BASE, fk_palm

FD_STEP = 1e-5


def dls_update(J: np.ndarray, dx: np.ndarray, lam: float) -> np.ndarray:
    """One damped least-squares step: J^T (J J^T + lam^2 I)^-1 dx."""
    J = np.atleast_2d(np.asarray(J, dtype=np.float64))
    dx = np.atleast_1d(np.asarray(dx, dtype=np.float64))
    m = J.shape[0]
    A = J @ J.T + (lam * lam) * np.eye(m)
    return J.T @ np.linalg.solve(A, dx)


def palm_jacobian(q_arm: np.ndarray, base_pos: np.ndarray = DEFAULT_BASE) -> np.ndarray:
    """(3, 7) positional Jacobian of the palm by central differences."""
    q_arm = np.asarray(q_arm, dtype=np.float64)
    probes = np.repeat(q_arm[None, :], 14, axis=0)
    for i in range(7):
        probes[2 * i, i] += FD_STEP
        probes[2 * i + 1, i] -= FD_STEP
    pos, _ = fk_palm(probes, base_pos)
    return ((pos[0::2] - pos[1::2]) / (2.0 * FD_STEP)).T


def dls_servo_step(
    q_arm: np.ndarray,
    target_pos: np.ndarray,
    base_pos: np.ndarray = DEFAULT_BASE,
    lam: float = 0.05,
    step_clamp: float = 0.2,
):
    """One IK iteration toward target_pos; returns (tau, residual_norm)."""
    pos, _ = fk_palm(q_arm, base_pos)
    dx = np.asarray(target_pos, dtype=np.float64) - pos
    J = palm_jacobian(q_arm, base_pos)
    tau = dls_update(J, dx, lam)
    m = np.max(np.abs(tau))
    if m > step_clamp:
        tau *= step_clamp / m
    return tau, float(np.linalg.norm(dx))


def dls_ik(
    target_pos: np.ndarray,
    q_arm: np.ndarray,
    base_pos: np.ndarray = DEFAULT_BASE,
    lam: float = 0.05,
    iters: int = 50,
    tol: float = 0.005,
    raise_on_fail: bool = True,
):
    """Iterate damped least-squares updates until the palm reaches target_pos.

    Returns (deltas, q_final, residual) where deltas stacks the per-iteration
    joint updates actually applied. Raises Unreachable if the residual never
    drops below tol (q_final is attached to the exception for fallback use).
    """
    target_pos = np.asarray(target_pos, dtype=np.float64)
    if not np.all(np.isfinite(target_pos)):
        raise ValueError("ik target must be finite")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    q = np.asarray(q_arm, dtype=np.float64).copy()
    deltas = []
    residual = np.inf
    for _ in range(iters):
        tau, residual = dls_servo_step(q, target_pos, base_pos, lam)
        if residual < tol:
            break
        q_next = np.clip(q + tau, ARM_LIMITS[:, 0], ARM_LIMITS[:, 1])
        deltas.append(q_next - q)
        q = q_next
    else:
        pos, _ = fk_palm(q, base_pos)
        residual = float(np.linalg.norm(target_pos - pos))
    if residual >= tol and raise_on_fail:
        err = Unreachable(f"ik residual {residual:.4f} >= tol {tol} after {iters} iterations", module="physics")
        err.q_best = q
        raise err
    return np.array(deltas) if deltas else np.zeros((0, 7)), q, float(residual)
