"""Discord-versus-distance samples shared by the solvers and the fitters."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError

NEG_Q_TOL = 1e-9


@dataclass(frozen=True)
class DecayProfile:
    """Ordered ``(n, q)`` samples with a free-form provenance mapping.

    Samples are sorted by distance on construction; slightly negative discord
    values (round-off) are clamped to zero.
    """

    distances: tuple[int, ...]
    values: tuple[float, ...]
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.distances) != len(self.values):
            raise PreconditionError("distances and values differ in length")
        order = sorted(range(len(self.distances)), key=lambda i: self.distances[i])
        d = tuple(int(self.distances[i]) for i in order)
        if any(b <= a for a, b in zip(d, d[1:])):
            raise PreconditionError("distances must be distinct")
        q = []
        for i in order:
            v = float(self.values[i])
            if v < -NEG_Q_TOL:
                raise PreconditionError(f"negative discord sample {v} at n={self.distances[i]}")
            q.append(max(v, 0.0))
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "values", tuple(q))

    @classmethod
    def from_samples(cls, samples, provenance=None) -> "DecayProfile":
        samples = list(samples)
        return cls(tuple(n for n, _ in samples), tuple(q for _, q in samples), dict(provenance or {}))

    @property
    def n(self) -> np.ndarray:
        return np.array(self.distances, dtype=float)

    @property
    def q(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    def __len__(self):
        return len(self.distances)

    def samples(self) -> list[tuple[int, float]]:
        return list(zip(self.distances, self.values))
