"""Uniform grid functions shared by the PDE solvers."""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridFunction:
    """Values on ``z_min + j (z_max - z_min) / M`` for ``j = 0..M``."""

    z_min: float
    z_max: float
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 3:
            raise ValueError("a grid function needs M + 1 >= 3 values")
        if not self.z_max > self.z_min:
            raise ValueError("grid spacing must be positive")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function has non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def M(self):
        return self.values.size - 1

    @property
    def spacing(self):
        return (self.z_max - self.z_min) / self.M

    @property
    def z(self):
        return self.z_min + np.arange(self.M + 1) * self.spacing

    @classmethod
    def sample(cls, fn, z_min, z_max, M, time=0.0):
        z = z_min + np.arange(M + 1) * ((z_max - z_min) / M)
        return cls(z_min, z_max, np.broadcast_to(np.asarray(fn(z), dtype=float), z.shape), time)

    def node_index(self, z, tol=1e-9):
        """Index of the node at ``z``; ``None`` when ``z`` is not a node."""
        s = (z - self.z_min) / self.spacing
        j = int(round(s))
        if abs(s - j) > tol or not 0 <= j <= self.M:
            return None
        return j
