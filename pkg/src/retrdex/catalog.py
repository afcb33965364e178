"""Object catalog: named primitive proxies for household objects.

Loaded from a JSON file with schema::

    {"entries": [
        {"name": str,
         "shape": {"kind": "sphere"|"box"|"cylinder", "dims": [...]},
         "mass": float,            # kg, default before randomization
         "split": "clutter"|"train_target"|"test_small"|"test_large"},
        ...]}

Box dims are half-extents in meters; cylinder dims are (radius, half_height).
The packaged default catalog carries 18 clutter proxies, 2 training targets,
8 small test targets, and 6 large test targets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .errors import DataError
from .physics.shapes import Shape

SPLITS = ("clutter", "train_target", "test_small", "test_large")


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    shape: Shape
    mass: float
    split: str


@dataclass
class ObjectCatalog:
    entries: tuple

    def __post_init__(self):
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            raise DataError("catalog names must be unique", module="scenegen")
        for e in self.entries:
            if e.split not in SPLITS:
                raise DataError(f"unknown split {e.split!r} for {e.name!r}", module="scenegen")
            if e.mass <= 0:
                raise DataError(f"non-positive mass for {e.name!r}", module="scenegen")

    def split_entries(self, split: str) -> list:
        return [e for e in self.entries if e.split == split]

    @property
    def clutter(self) -> list:
        return self.split_entries("clutter")

    def targets(self, split: str = "train") -> list:
        key = {"train": "train_target", "small": "test_small", "large": "test_large",
               "train_target": "train_target", "test_small": "test_small",
               "test_large": "test_large"}.get(split)
        if key is None:
            raise DataError(f"unknown target split {split!r}", module="scenegen")
        return self.split_entries(key)

    def entry(self, name: str) -> CatalogEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise DataError(f"no catalog entry named {name!r}", module="scenegen")

    def validate_sizes(self):
        counts = {s: len(self.split_entries(s)) for s in SPLITS}
        need = {"clutter": 18, "train_target": 2, "test_small": 8, "test_large": 6}
        for split, n in need.items():
            if counts[split] < n:
                raise DataError(
                    f"catalog needs >= {n} {split} entries, found {counts[split]}",
                    module="scenegen",
                )

    @staticmethod
    def from_json(text: str) -> "ObjectCatalog":
        raw = json.loads(text)
        entries = tuple(
            CatalogEntry(
                name=e["name"],
                shape=Shape.from_dict(e["shape"]),
                mass=float(e["mass"]),
                split=e["split"],
            )
            for e in raw["entries"]
        )
        return ObjectCatalog(entries)

    @staticmethod
    def load(path) -> "ObjectCatalog":
        with open(path) as f:
            return ObjectCatalog.from_json(f.read())

    def to_json(self) -> str:
        return json.dumps(
            {
                "entries": [
                    {"name": e.name, "shape": e.shape.to_dict(), "mass": e.mass, "split": e.split}
                    for e in self.entries
                ]
            },
            indent=2,
        )


def default_catalog() -> ObjectCatalog:
    text = resources.files("retrdex").joinpath("data/catalog.json").read_text()
    cat = ObjectCatalog.from_json(text)
    cat.validate_sizes()
    return cat
