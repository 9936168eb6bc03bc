"""Interfaces between configurations and their domain walls.

A dual edge belongs to the interface when its primal coupling is satisfied in
exactly one of the two source configurations.  Domain walls are connected
components of the interface, where connectivity runs through shared dual
vertices (never through diagonal plaquette contact).  A wall is tethered when
it touches the dual x-axis.

Sources need not live on identical coupling realizations: proxies built from
nested volumes or window-preserving perturbations provide per-side
satisfaction vectors and restrict the interface to the edges where a
comparison is meaningful.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .disorder import CouplingConfig
from .errors import ConfigError
from .lattice import BoxGeometry, DualGeometry
from .solver import SpinPair


def satisfaction(geom: BoxGeometry, J: CouplingConfig, spins) -> np.ndarray:
    """Boolean per edge: J_e * s_u * s_v > 0.  Invariant under global flip."""
    signs = spins.signs if isinstance(spins, SpinPair) else np.asarray(spins)
    eu = np.array([e.u for e in geom.edges])
    ev = np.array([e.v for e in geom.edges])
    return (J.values * signs[eu] * signs[ev]) > 0


@dataclass(frozen=True)
class Interface:
    geom: BoxGeometry
    dual: DualGeometry
    edge_ids: frozenset[int]
    label: str = ""

    @property
    def dual_vertices(self) -> frozenset[int]:
        out = set()
        for eid in self.edge_ids:
            d = self.dual.dual_edges[eid]
            out.add(d.a)
            out.add(d.b)
        return frozenset(out)

    def is_empty(self) -> bool:
        return not self.edge_ids


def interface_from_satisfaction(geom, dual, sat_a, sat_b,
                                edge_ids=None, label="") -> Interface:
    sat_a = np.asarray(sat_a, dtype=bool)
    sat_b = np.asarray(sat_b, dtype=bool)
    differ = sat_a ^ sat_b
    if edge_ids is None:
        ids = np.flatnonzero(differ)
    else:
        ids = [eid for eid in edge_ids if differ[eid]]
    return Interface(geom, dual, frozenset(int(i) for i in ids), label)


def interface(geom: BoxGeometry, dual: DualGeometry, J: CouplingConfig,
              spins_a, spins_b, edge_ids=None, label="") -> Interface:
    """Symmetric difference of the satisfaction sets of two configurations."""
    return interface_from_satisfaction(
        geom, dual, satisfaction(geom, J, spins_a), satisfaction(geom, J, spins_b),
        edge_ids=edge_ids, label=label)


@dataclass(frozen=True)
class DomainWall:
    edge_ids: frozenset[int]
    dual_vertices: frozenset[int]
    tethered: bool


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        while p != self.parent[p]:
            self.parent[p] = self.parent[self.parent[p]]
            p = self.parent[p]
        self.parent[x] = p
        return p

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def domain_walls(iface: Interface, dual: DualGeometry) -> list[DomainWall]:
    """Partition an interface into connected components of the dual graph."""
    uf = _UnionFind()
    for eid in iface.edge_ids:
        d = dual.dual_edges[eid]
        uf.union(d.a, d.b)
    groups: dict[int, dict] = {}
    x_axis = set(dual.dual_x_axis)
    for eid in sorted(iface.edge_ids):
        d = dual.dual_edges[eid]
        root = uf.find(d.a)
        g = groups.setdefault(root, {"edges": set(), "verts": set()})
        g["edges"].add(eid)
        g["verts"].add(d.a)
        g["verts"].add(d.b)
    walls = []
    for root in sorted(groups):
        g = groups[root]
        walls.append(DomainWall(frozenset(g["edges"]), frozenset(g["verts"]),
                                tethered=not x_axis.isdisjoint(g["verts"])))
    return walls


# --------------------------------------------------------------------------
# tethered-wall statistics


def _segment_columns(dual: DualGeometry, n: int) -> set[int]:
    """Local dual columns whose vertex x-coordinate lies in [-n, n]."""
    if n < 1:
        raise ConfigError("segment half-length n must be >= 1")
    off = -((dual.width - 1) // 2)
    cols = {c for c in range(dual.width) if abs(2 * (c + off) + 1) <= 2 * n}
    if not cols or len(cols) == dual.width:
        raise ConfigError(
            f"segment n={n} does not fit inside width {dual.width} without wrapping")
    return cols


def count_Nnk(walls, n: int, k: int, dual: DualGeometry) -> int:
    """Number of distinct tethered walls meeting the segment at height k-1/2,
    columns [-n, n]."""
    if not 0 <= k <= dual.height:
        raise ConfigError(f"segment height k={k} outside box")
    cols = _segment_columns(dual, n)
    hits = {dual.dual_vertex_id(c, k) for c in cols}
    return sum(1 for w in walls if w.tethered and not hits.isdisjoint(w.dual_vertices))


@dataclass(frozen=True)
class WallCountGrid:
    n_values: tuple[int, ...]
    k_values: tuple[int, ...]
    counts: dict  # (n, k) -> int

    def count(self, n, k) -> int:
        return self.counts[(n, k)]


def wall_count_grid(walls, n_values, k_values, dual: DualGeometry) -> WallCountGrid:
    counts = {(n, k): count_Nnk(walls, n, k, dual)
              for n in n_values for k in k_values}
    return WallCountGrid(tuple(n_values), tuple(k_values), counts)


@dataclass(frozen=True)
class BoundReport:
    violations: tuple[dict, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def wall_bound_check(grid: WallCountGrid) -> BoundReport:
    """Check N_{n,k} - N_{n,0} >= -2k on every grid entry."""
    if 0 not in grid.k_values:
        raise ConfigError("grid must contain the k=0 row")
    violations = []
    for n in grid.n_values:
        base = grid.count(n, 0)
        for k in grid.k_values:
            if grid.count(n, k) - base < -2 * k:
                violations.append({"n": n, "k": k, "N_nk": grid.count(n, k),
                                   "N_n0": base})
    return BoundReport(tuple(violations))


@dataclass(frozen=True)
class TetherReport:
    violations: tuple[dict, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def no_double_tether_check(walls, dual: DualGeometry,
                           excluded_dual_edges=()) -> TetherReport:
    """Assert tethered walls are pairwise vertex-disjoint and that no wall
    joins two distinct dual-x-axis vertices by a dual path.

    ``excluded_dual_edges`` removes edges whose flip region necessarily meets
    a clamped set (the clamped edge of a critical contour): joins that exist
    only through them are legitimate and not reported.
    """
    excluded = frozenset(excluded_dual_edges)
    x_axis = set(dual.dual_x_axis)
    violations = []

    tethered = [w for w in walls if w.tethered]
    for i in range(len(tethered)):
        for j in range(i + 1, len(tethered)):
            common = tethered[i].dual_vertices & tethered[j].dual_vertices
            if common:
                violations.append({"kind": "shared_vertex",
                                   "walls": (i, j),
                                   "vertices": tuple(sorted(common))})

    for wi, w in enumerate(walls):
        allowed = sorted(w.edge_ids - excluded)
        uf = _UnionFind()
        for eid in allowed:
            d = dual.dual_edges[eid]
            uf.union(d.a, d.b)
        by_root: dict[int, list[int]] = {}
        for v in sorted(w.dual_vertices & x_axis):
            by_root.setdefault(uf.find(v) if v in uf.parent else v, []).append(v)
        for root, verts in by_root.items():
            if len(verts) > 1:
                path = _dual_path(dual, allowed, verts[0], verts[1])
                violations.append({"kind": "x_axis_join", "wall": wi,
                                   "vertices": (verts[0], verts[1]),
                                   "path_edges": tuple(path)})
    return TetherReport(tuple(violations))


def interface_cycle_check(iface: Interface, dual: DualGeometry,
                          excluded_dual_edges=()) -> TetherReport:
    """Assert no dual circuit lies entirely inside the interface.

    Flipping the region a circuit encloses is admissible for both exact
    source states (given clamp-crossing edges are excluded), so a circuit
    inside the interface would make a strictly positive sum equal its own
    negation.  Detected as a cycle of the interface's dual subgraph.
    """
    excluded = frozenset(excluded_dual_edges)
    uf = _UnionFind()
    violations = []
    allowed = sorted(iface.edge_ids - excluded)
    placed = []
    for eid in allowed:
        d = dual.dual_edges[eid]
        if d.a == d.b or uf.find(d.a) == uf.find(d.b):
            cycle = _dual_path(dual, placed, d.a, d.b) if d.a != d.b else []
            violations.append({"kind": "interface_cycle", "closing_edge": eid,
                               "cycle_edges": tuple(cycle) + (eid,)})
        else:
            uf.union(d.a, d.b)
            placed.append(eid)
    return TetherReport(tuple(violations))


def _dual_path(dual, edge_ids, a, b):
    """BFS path (as dual edge ids) from a to b inside the given edge set."""
    adj: dict[int, list[tuple[int, int]]] = {}
    for eid in edge_ids:
        d = dual.dual_edges[eid]
        adj.setdefault(d.a, []).append((eid, d.b))
        adj.setdefault(d.b, []).append((eid, d.a))
    prev = {a: None}
    queue = [a]
    while queue:
        v = queue.pop(0)
        if v == b:
            break
        for eid, w in adj.get(v, ()):
            if w not in prev:
                prev[w] = (eid, v)
                queue.append(w)
    if b not in prev:
        return []
    path = []
    v = b
    while prev[v] is not None:
        eid, v = prev[v]
        path.append(eid)
    return path[::-1]


def dump_interface_csv(iface: Interface, walls, path) -> None:
    """One row per interface dual edge: doubled coords halved to decimals."""
    wall_of = {}
    tether_of = {}
    for wid, w in enumerate(walls):
        for eid in w.edge_ids:
            wall_of[eid] = wid
            tether_of[eid] = w.tethered
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["edge_id", "x1", "y1", "x2", "y2", "wall_id", "tethered"])
        for eid in sorted(iface.edge_ids):
            d = iface.dual.dual_edges[eid]
            x1, y1 = iface.dual.dual_coords2(d.a)
            x2, y2 = iface.dual.dual_coords2(d.b)
            w.writerow([eid, x1 / 2.0, y1 / 2.0, x2 / 2.0, y2 / 2.0,
                        wall_of[eid], int(tether_of[eid])])
