"""1-jet extraction and Hausdorff geometry for grid functions.

A jet point is (x, u(x), p) with p a reachable differential of u at x. On a
grid in one dimension the complete proxy for the reachable set is the pair of
one-sided slopes: a smooth node carries the central slope, a corner carries
both one-sided slopes. Clouds of jet points are compared in the flat sum
metric torus_dist + |du| + |dp|; on compact slabs any Riemannian choice is
bi-Lipschitz equivalent, so measured rate exponents do not depend on this
choice.

Corner classification at a node: left - right > corner_tol is a semiconcave
(concave) corner; right - left > corner_tol is a convex kink, which is legal
data early in an evolution but indicates non-semiconcave input, so it is
flagged rather than rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCloud
from .fields import GridFn, fmt, torus_dist

FLAG_SMOOTH = 0
FLAG_CONCAVE_CORNER = 1
FLAG_CONVEX_KINK = 2


@dataclass(frozen=True)
class JetPoint:
    x: float
    u: float
    p: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.u) and np.isfinite(self.p)):
            raise ValueError("jet point must be finite")


@dataclass(frozen=True)
class JetCloud:
    """Parallel arrays of jet points plus a provenance tag."""

    xs: np.ndarray = field(repr=False)
    us: np.ndarray = field(repr=False)
    ps: np.ndarray = field(repr=False)
    flags: np.ndarray = field(repr=False)
    source: str = ""

    def __post_init__(self):
        for name in ("xs", "us", "ps", "flags"):
            arr = np.asarray(getattr(self, name))
            arr = arr.astype(int if name == "flags" else float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if not (len(self.xs) == len(self.us) == len(self.ps) == len(self.flags)):
            raise ValueError("jet cloud arrays must have equal length")

    def __len__(self) -> int:
        return len(self.xs)

    def points(self):
        return [JetPoint(x, u, p) for x, u, p in zip(self.xs, self.us, self.ps)]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("x,u,p,corner_flag\n")
            for x, u, p, fl in zip(self.xs, self.us, self.ps, self.flags):
                fh.write("%s,%s,%s,%d\n" % (fmt(x), fmt(u), fmt(p), fl))


def default_corner_tol(f: GridFn) -> float:
    # slope jump at a genuine corner is O(1) while smooth variation across
    # one cell is O(h), so 10*h separates the two at practical resolutions
    return 10.0 * f.grid.h


def reachable_differentials(f: GridFn, i: int, corner_tol: float = None):
    """Slopes representing D*u at node i: one central value or both one-sided."""
    if corner_tol is None:
        corner_tol = default_corner_tol(f)
    n = f.grid.n
    v = f.values
    h = f.grid.h
    left = (v[i % n] - v[(i - 1) % n]) / h
    right = (v[(i + 1) % n] - v[i % n]) / h
    if abs(left - right) > corner_tol:
        return (left, right)
    return (0.5 * (left + right),)


def extract_jets(f: GridFn, corner_tol: float = None) -> JetCloud:
    """Jet cloud of a grid function; corners contribute two points per node."""
    if corner_tol is None:
        corner_tol = default_corner_tol(f)
    if corner_tol <= 0:
        raise ValueError("corner_tol must be positive")
    left = f.left_slopes()
    right = f.right_slopes()
    gap = left - right
    concave = gap > corner_tol
    convex = -gap > corner_tol
    double = concave | convex
    counts = np.where(double, 2, 1)
    idx = np.repeat(np.arange(f.grid.n), counts)
    is_first = np.ones(len(idx), dtype=bool)
    is_first[1:] = idx[1:] != idx[:-1]
    central = 0.5 * (left + right)
    # corners emit p = right then p = left (the endpoints of D*u)
    ps = np.where(double[idx], np.where(is_first, right[idx], left[idx]), central[idx])
    flags = np.where(concave[idx], FLAG_CONCAVE_CORNER, np.where(convex[idx], FLAG_CONVEX_KINK, FLAG_SMOOTH))
    return JetCloud(
        xs=f.grid.nodes[idx],
        us=f.values[idx],
        ps=ps,
        flags=flags,
        source="jets(n=%d, corner_tol=%g)" % (f.grid.n, corner_tol),
    )


def directional_derivative(f: GridFn, i: int, v: float, corner_tol: float = None) -> float:
    """min over reachable differentials p at node i of p*v."""
    if not np.isfinite(v):
        raise ValueError("direction must be finite")
    slopes = reachable_differentials(f, i, corner_tol)
    return min(p * v for p in slopes)


def jet_metric(a: JetPoint, b: JetPoint) -> float:
    """Flat sum metric on jets: torus distance plus value and slope gaps."""
    return float(torus_dist(a.x, b.x)) + abs(a.u - b.u) + abs(a.p - b.p)


def _directed(A: JetCloud, B: JetCloud, chunk: int = 1024) -> float:
    worst = 0.0
    for s in range(0, len(A), chunk):
        xa = A.xs[s : s + chunk, None]
        ua = A.us[s : s + chunk, None]
        pa = A.ps[s : s + chunk, None]
        d = (
            torus_dist(xa, B.xs[None, :])
            + np.abs(ua - B.us[None, :])
            + np.abs(pa - B.ps[None, :])
        )
        worst = max(worst, float(np.max(np.min(d, axis=1))))
    return worst


def hausdorff(A: JetCloud, B: JetCloud) -> float:
    """Hausdorff distance by exhaustive max-min scan in both directions."""
    if len(A) == 0 or len(B) == 0:
        raise EmptyCloud("hausdorff distance needs nonempty clouds")
    return max(_directed(A, B), _directed(B, A))
