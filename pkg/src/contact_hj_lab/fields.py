"""Periodic grid functions on the flat 1-torus.

The torus is R/Z sampled at n uniform nodes x_i = i/n. Grid functions are
immutable value arrays with periodic indexing; between nodes they are read
through linear interpolation, which preserves the ordering and monotonicity
properties the comparison tests rely on. The module also provides the small
discrete calculus used everywhere else: one-sided slopes, sup-norm distance,
and an upper second-difference profile that serves as a semiconcavity
diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch

# decimal formatting shared by every CSV artifact; 17 significant digits
# round-trips IEEE doubles exactly
FLOAT_FMT = "%.17g"


def fmt(v: float) -> str:
    return FLOAT_FMT % float(v)


def wrap(x):
    """Map positions to the fundamental domain [0, 1)."""
    return np.mod(x, 1.0)


def torus_dist(x, y):
    """Geodesic distance on R/Z, vectorized."""
    d = np.abs(wrap(x) - wrap(y))
    return np.minimum(d, 1.0 - d)


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid on the torus; coordinates are i/n so n*h closes exactly."""

    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ValueError("grid needs at least 16 nodes, got %d" % self.n)

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def nodes(self) -> np.ndarray:
        xs = np.arange(self.n) / self.n
        xs.flags.writeable = False
        return xs


@dataclass(frozen=True)
class GridFn:
    """Immutable sampled function on a TorusGrid."""

    grid: TorusGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise ValueError(
                "value array shape %s does not match grid n=%d"
                % (vals.shape, self.grid.n)
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function contains non-finite values")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, grid: TorusGrid, fn) -> "GridFn":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float))

    @classmethod
    def constant(cls, grid: TorusGrid, c: float) -> "GridFn":
        return cls(grid, np.full(grid.n, float(c)))

    def __call__(self, x):
        """Periodic linear interpolation at arbitrary positions."""
        pos = wrap(x) * self.grid.n
        i0 = np.floor(pos).astype(int) % self.grid.n
        frac = pos - np.floor(pos)
        i1 = (i0 + 1) % self.grid.n
        return (1.0 - frac) * self.values[i0] + frac * self.values[i1]

    def cell_slope(self, x):
        """Slope of the interpolant in the cell containing x (constant per cell)."""
        pos = wrap(x) * self.grid.n
        i0 = np.floor(pos).astype(int) % self.grid.n
        i1 = (i0 + 1) % self.grid.n
        return (self.values[i1] - self.values[i0]) / self.grid.h

    def left_slopes(self) -> np.ndarray:
        return (self.values - np.roll(self.values, 1)) / self.grid.h

    def right_slopes(self) -> np.ndarray:
        return (np.roll(self.values, -1) - self.values) / self.grid.h

    def to_csv(self, path) -> None:
        xs = self.grid.nodes
        with open(path, "w") as fh:
            fh.write("x,value\n")
            for x, v in zip(xs, self.values):
                fh.write("%s,%s\n" % (fmt(x), fmt(v)))

    @classmethod
    def from_csv(cls, path) -> "GridFn":
        xs, vs = [], []
        with open(path) as fh:
            header = fh.readline().strip()
            if header != "x,value":
                raise ValueError("expected 'x,value' header in %s" % path)
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                sx, sv = line.split(",")
                xs.append(float(sx))
                vs.append(float(sv))
        grid = TorusGrid(len(vs))
        if not np.allclose(xs, grid.nodes, atol=1e-12):
            raise ValueError("node coordinates in %s are not i/n" % path)
        return cls(grid, np.asarray(vs))


def one_sided_slopes(f: GridFn, i: int):
    """Left and right difference quotients at node i with periodic wrap."""
    v = f.values
    n = f.grid.n
    h = f.grid.h
    left = (v[i % n] - v[(i - 1) % n]) / h
    right = (v[(i + 1) % n] - v[i % n]) / h
    return left, right


def sup_dist(f: GridFn, g: GridFn) -> float:
    """Sup-norm distance between two grid functions on the same grid."""
    if f.grid.n != g.grid.n:
        raise GridMismatch(
            "grids differ: n=%d vs n=%d" % (f.grid.n, g.grid.n)
        )
    return float(np.max(np.abs(f.values - g.values)))


def semiconcavity_profile(f: GridFn) -> float:
    """Largest upper second difference (f_{i+1} - 2 f_i + f_{i-1}) / h^2.

    Values bounded in h indicate a one-sided C^2 bound from above
    (semiconcavity with a linear modulus); a convex kink makes the profile
    grow like 2*jump/h and is the negative control.
    """
    v = f.values
    second = np.roll(v, -1) - 2.0 * v + np.roll(v, 1)
    return float(np.max(second) / f.grid.h**2)
