"""Exact Wasserstein-1 distances on finite metric spaces.

The primal solver is a transportation simplex (u-v / MODI method) started
from a north-west corner basis. Pivoting uses Bland's rule: the entering cell
is the first cell in row-major order with a negative reduced cost and the
leaving cell is the lowest-indexed blocking cell, so the returned plans are
reproducible.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import InvariantError

TRIANGLE_CHECK_MAX_POINTS = 64
_METRIC_TOL = 1e-12
_MARGINAL_TOL = 1e-10
_EQUAL_TOL = 8 * np.finfo(float).eps


def _as_probs(x) -> np.ndarray:
    probs = getattr(x, "probs", x)
    arr = np.asarray(probs, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"expected a probability vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class MetricSpace:
    """A finite metric space given by its distance matrix."""

    support: tuple
    dist: np.ndarray

    def __post_init__(self):
        support = tuple(self.support)
        dist = np.array(self.dist, dtype=float)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "dist", dist)
        dist.setflags(write=False)
        k = len(support)
        if len(set(support)) != k:
            raise InvariantError("metric support ids must be unique")
        if dist.shape != (k, k):
            raise InvariantError(f"distance matrix shape {dist.shape} does not match support size {k}")
        if not np.all(np.isfinite(dist)):
            raise InvariantError("distances must be finite")
        if np.any(np.diag(dist) != 0.0):
            raise InvariantError("metric must have a zero diagonal")
        if not np.allclose(dist, dist.T, rtol=0.0, atol=_METRIC_TOL):
            raise InvariantError("metric must be symmetric")
        off = dist[~np.eye(k, dtype=bool)]
        if np.any(off <= 0.0):
            raise InvariantError("metric must be strictly positive between distinct points")
        if k <= TRIANGLE_CHECK_MAX_POINTS:
            # d[i, j] <= d[i, l] + d[l, j] for every intermediate l
            via = (dist[:, :, None] + dist[None, :, :]).min(axis=1)
            if np.any(dist > via + _METRIC_TOL * max(1.0, float(dist.max(initial=0.0)))):
                raise InvariantError("metric violates the triangle inequality")

    @classmethod
    def discrete(cls, support: Sequence[Hashable]) -> "MetricSpace":
        """The metric 1[x != y]."""
        k = len(support)
        return cls(tuple(support), 1.0 - np.eye(k))

    @classmethod
    def from_points(cls, points, support: Sequence[Hashable] | None = None) -> "MetricSpace":
        """Euclidean distances between points (1-D values or rows of a 2-D array)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff ** 2).sum(axis=-1))
        if support is None:
            support = tuple(range(len(pts)))
        return cls(tuple(support), dist)

    @property
    def size(self) -> int:
        return len(self.support)

    @property
    def diameter(self) -> float:
        return float(self.dist.max(initial=0.0))

    @property
    def is_discrete(self) -> bool:
        return bool(np.array_equal(self.dist, 1.0 - np.eye(self.size)))


@dataclass(frozen=True)
class Coupling:
    """A transport plan with prescribed row and column marginals."""

    matrix: np.ndarray

    def validate(self, p, q, tol: float = _MARGINAL_TOL) -> None:
        m = self.matrix
        p, q = _as_probs(p), _as_probs(q)
        if m.shape != (len(p), len(q)):
            raise InvariantError("coupling shape does not match the marginals")
        if np.any(m < -tol):
            raise InvariantError("coupling has negative entries")
        if np.max(np.abs(m.sum(axis=1) - p)) > tol:
            raise InvariantError("coupling row sums differ from P")
        if np.max(np.abs(m.sum(axis=0) - q)) > tol:
            raise InvariantError("coupling column sums differ from Q")

    def cost(self, dist: np.ndarray) -> float:
        return float((self.matrix * dist).sum())


def _northwest_corner(a: np.ndarray, b: np.ndarray):
    m, k = len(a), len(b)
    supply, demand = a.copy(), b.copy()
    x = np.zeros((m, k))
    basis = []
    i = j = 0
    while True:
        flow = min(supply[i], demand[j])
        x[i, j] = flow
        basis.append((i, j))
        supply[i] -= flow
        demand[j] -= flow
        if i == m - 1 and j == k - 1:
            break
        # the staircase walk always yields m + k - 1 basic cells (a spanning tree)
        if j == k - 1 or (i < m - 1 and supply[i] <= demand[j]):
            i += 1
        else:
            j += 1
    return x, basis


def _potentials(cost: np.ndarray, basis, m: int, k: int):
    u = np.full(m, np.nan)
    v = np.full(k, np.nan)
    rows = [[] for _ in range(m)]
    cols = [[] for _ in range(k)]
    for i, j in basis:
        rows[i].append(j)
        cols[j].append(i)
    u[0] = 0.0
    queue = deque([("r", 0)])
    while queue:
        kind, idx = queue.popleft()
        if kind == "r":
            for j in rows[idx]:
                if np.isnan(v[j]):
                    v[j] = cost[idx, j] - u[idx]
                    queue.append(("c", j))
        else:
            for i in cols[idx]:
                if np.isnan(u[i]):
                    u[i] = cost[i, idx] - v[idx]
                    queue.append(("r", i))
    return u, v


def _cycle(basis, m: int, k: int, enter):
    """Cells of the tree path from column ``enter[1]`` back to row ``enter[0]``."""
    adj = {("r", i): [] for i in range(m)}
    adj.update({("c", j): [] for j in range(k)})
    for i, j in basis:
        adj[("r", i)].append(("c", j))
        adj[("c", j)].append(("r", i))
    start, goal = ("c", enter[1]), ("r", enter[0])
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nxt in adj[node]:
            if nxt not in parent:
                parent[nxt] = node
                queue.append(nxt)
    path = []
    node = goal
    while parent[node] is not None:
        prev = parent[node]
        a, b = (node, prev) if node[0] == "r" else (prev, node)
        path.append((a[1], b[1]))
        node = prev
    # path runs from the row end; the cell adjacent to the entering column is last
    return path[::-1]


def _transport_simplex(a, b, cost, max_iter=10_000):
    m, k = len(a), len(b)
    x, basis = _northwest_corner(a, b)
    tol = 1e-12 * max(1.0, float(np.abs(cost).max(initial=0.0)))
    for _ in range(max_iter):
        u, v = _potentials(cost, basis, m, k)
        reduced = cost - u[:, None] - v[None, :]
        in_basis = np.zeros((m, k), dtype=bool)
        for cell in basis:
            in_basis[cell] = True
        candidates = np.argwhere((reduced < -tol) & ~in_basis)
        if len(candidates) == 0:
            return x
        enter = tuple(int(t) for t in candidates[0])
        path = _cycle(basis, m, k, enter)
        minus = path[0::2]
        plus = path[1::2]
        theta = min(max(x[c], 0.0) for c in minus)
        leaving = min(c for c in minus if max(x[c], 0.0) <= theta)
        x[enter] += theta
        for c in minus:
            x[c] = max(x[c] - theta, 0.0)
        for c in plus:
            x[c] += theta
        x[leaving] = 0.0
        basis.remove(leaving)
        basis.append(enter)
    raise RuntimeError("transportation simplex did not converge")


def wasserstein1_exact(p, q, space: MetricSpace) -> tuple[float, Coupling]:
    """Optimal transport cost between ``p`` and ``q`` under ``space.dist``.

    Returns the value and an optimal coupling over the full support.
    Zero-mass points are removed before solving.
    """
    p, q = _as_probs(p), _as_probs(q)
    if len(p) != space.size or len(q) != space.size:
        raise ValueError("distributions must live on the metric support")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("probabilities must be nonnegative")
    sp, sq = p.sum(), q.sum()
    if abs(sp - 1.0) > 1e-9 or abs(sq - 1.0) > 1e-9:
        raise ValueError("marginals must each sum to one")
    rows = np.flatnonzero(p > 0)
    cols = np.flatnonzero(q > 0)
    a = p[rows] / sp
    b = q[cols] / sq
    sub = space.dist[np.ix_(rows, cols)]
    x = _transport_simplex(a, b, sub)
    plan = np.zeros((space.size, space.size))
    plan[np.ix_(rows, cols)] = x
    return float((sub * x).sum()), Coupling(plan)


def wasserstein1(p, q, space: MetricSpace) -> float:
    """Value-only shortcut for :func:`wasserstein1_exact`.

    Laws that agree to within a few ulps are treated as equal, so rounding
    in upstream conditioning does not produce spurious ``1e-17`` distances.
    """
    p, q = _as_probs(p), _as_probs(q)
    if len(p) != space.size or len(q) != space.size:
        raise ValueError("distributions must live on the metric support")
    if np.max(np.abs(p - q), initial=0.0) <= _EQUAL_TOL:
        return 0.0
    return wasserstein1_exact(p, q, space)[0]


def wasserstein1_line(points, p, q) -> float:
    """W1 between two laws on the real line sharing the support ``points``.

    Computed as the integral of |F_P - F_Q|.
    """
    x = np.asarray(points, dtype=float)
    p, q = _as_probs(p), _as_probs(q)
    order = np.argsort(x, kind="stable")
    x, p, q = x[order], p[order], q[order]
    gap = np.abs(np.cumsum(p) - np.cumsum(q))[:-1]
    return float((gap * np.diff(x)).sum())


def wasserstein1_samples(x, y) -> float:
    """W1 between two equal-size empirical measures on the line."""
    x = np.sort(np.asarray(x, dtype=float))
    y = np.sort(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise ValueError("samples must have equal size")
    return float(np.abs(x - y).mean())


def gaussian_w2_isotropic(mean1, mean2, var1: float, var2: float, d: int | None = None) -> float:
    """W2 between N(mean1, var1 I_d) and N(mean2, var2 I_d)."""
    m1 = np.atleast_1d(np.asarray(mean1, dtype=float))
    m2 = np.atleast_1d(np.asarray(mean2, dtype=float))
    if d is None:
        d = m1.size
    if d < 1:
        raise ValueError("dimension must be at least 1")
    if var1 < 0 or var2 < 0:
        raise ValueError("variances must be nonnegative")
    shift = float(((m1 - m2) ** 2).sum())
    return math.sqrt(shift + d * (math.sqrt(var1) - math.sqrt(var2)) ** 2)


def kr_dual_value(p, q, space: MetricSpace, step: float = 1e-3, max_grid: int = 20_000_000) -> float:
    """Kantorovich-Rubinstein dual value by exhaustive search over potentials.

    The potential is pinned to 0 at the first point. All but the last free
    potential range over the lattice ``step * Z`` inside their Lipschitz
    window around the pinned point; the last one is set to the optimal end of
    its feasible interval. When every distance is a multiple of ``step`` the
    maximiser lies on the lattice and the search is exact.
    """
    p, q = _as_probs(p), _as_probs(q)
    k = space.size
    if k > 5:
        raise ValueError("dual grid search is limited to spaces with at most 5 points")
    if len(p) != k or len(q) != k:
        raise ValueError("distributions must live on the metric support")
    c = p - q
    d = space.dist
    if k == 1:
        return 0.0
    grids = []
    for i in range(1, k - 1):
        lim = int(math.floor(d[0, i] / step + 1e-9))
        grids.append(np.arange(-lim, lim + 1) * step)
    size = int(np.prod([len(g) for g in grids])) if grids else 1
    if size > max_grid:
        raise ValueError(f"dual grid of {size} points exceeds max_grid={max_grid}; use a coarser step")
    if grids:
        mesh = np.meshgrid(*grids, indexing="ij")
        free = [g.ravel() for g in mesh]
    else:
        free = []
    f = [np.zeros(size)] + free
    feasible = np.ones(size, dtype=bool)
    for i, j in itertools.combinations(range(len(f)), 2):
        feasible &= np.abs(f[i] - f[j]) <= d[i, j] + 1e-9
    last = k - 1
    lo = np.max([fi - d[i, last] for i, fi in enumerate(f)], axis=0)
    hi = np.min([fi + d[i, last] for i, fi in enumerate(f)], axis=0)
    feasible &= lo <= hi + 1e-12
    f_last = hi if c[last] >= 0 else lo
    value = sum(c[i] * f[i] for i in range(len(f))) + c[last] * f_last
    return float(np.max(value[feasible]))
