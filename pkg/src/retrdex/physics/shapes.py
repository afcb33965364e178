"""Primitive shape descriptions shared by collision, rendering, and the catalog."""

from __future__ import annotations

import math
from dataclasses import dataclass

SPHERE = 0
BOX = 1
CYLINDER = 2

_KIND_NAMES = {"sphere": SPHERE, "box": BOX, "cylinder": CYLINDER}
_KIND_CODES = {v: k for k, v in _KIND_NAMES.items()}


@dataclass(frozen=True)
class Shape:
    """A convex primitive.

    dims by kind:
        sphere   -- (radius,)
        box      -- (hx, hy, hz) half-extents
        cylinder -- (radius, half_height), axis fixed to local z
    """

    kind: str
    dims: tuple

    def __post_init__(self):
        if self.kind not in _KIND_NAMES:
            raise ValueError(f"unknown shape kind {self.kind!r}")
        n = {"sphere": 1, "box": 3, "cylinder": 2}[self.kind]
        if len(self.dims) != n:
            raise ValueError(f"{self.kind} needs {n} dims, got {len(self.dims)}")
        if any(d <= 0 for d in self.dims):
            raise ValueError(f"shape dims must be positive: {self.dims}")
        object.__setattr__(self, "dims", tuple(float(d) for d in self.dims))

    @property
    def code(self) -> int:
        return _KIND_NAMES[self.kind]

    @property
    def collision_radius(self) -> float:
        """Body-body contact sphere: the smallest principal half-extent.

        Bodies keep their initial yaw-only orientation (contacts carry no
        torque) and rest on the floor at their true bottom, so a snug contact
        sphere lets piles pack densely and lets objects come to rest over a
        flat buried target. Rendered footprints may interpenetrate, which a
        top-down depth sort tolerates.
        """
        if self.kind == "sphere":
            return self.dims[0]
        return min(self.dims)

    @property
    def floor_radius(self) -> float:
        """Vertical half-extent: resting height of the center above the floor.
        Exact for yaw-only orientations, so settled AABBs touch the floor."""
        if self.kind == "sphere":
            return self.dims[0]
        if self.kind == "box":
            return self.dims[2]
        return self.dims[1]

    @property
    def wall_radius(self) -> float:
        """Horizontal circumradius: conservative wall clearance for any yaw."""
        if self.kind == "sphere":
            return self.dims[0]
        if self.kind == "box":
            return math.sqrt(self.dims[0] ** 2 + self.dims[1] ** 2)
        return self.dims[0]

    def packed_dims(self) -> tuple:
        """Fixed-width (3,) dims for the raster/contact kernels."""
        d = list(self.dims) + [0.0, 0.0]
        return (d[0], d[1], d[2])

    @staticmethod
    def from_dict(d: dict) -> "Shape":
        return Shape(kind=d["kind"], dims=tuple(d["dims"]))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "dims": list(self.dims)}
