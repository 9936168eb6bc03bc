"""Half-plane cylinder boxes and their dual lattice.

A box of ``width`` columns and ``height`` rows is wrapped periodically in the
horizontal direction and has free boundaries at the top and bottom.  Degenerate
widths follow the convention that W=1 has no horizontal edges and W=2 has a
single horizontal edge per row (the wrap would duplicate it).

The dual lattice puts one vertex at each plaquette center, including the row of
centers just below the bottom spin row (the dual x-axis) and just above the top
row, so that every primal edge has a dual edge with both endpoints present.
Dual coordinates are kept as doubled integers to stay exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, NamedTuple

from .errors import BudgetExceededError

DEFAULT_ENUM_BUDGET = 10**7


class Edge(NamedTuple):
    id: int
    u: int
    v: int
    kind: str          # "h" or "v"
    wrap: bool
    col: int           # local column of the anchor (left / bottom endpoint)
    row: int
    key: tuple         # (kind, absolute column, row), stable across box sizes


class DualEdge(NamedTuple):
    id: int            # equals the primal edge id
    a: int             # dual vertex ids; a == b only for the W=1 self-loop
    b: int


@dataclass(frozen=True)
class BoxGeometry:
    width: int
    height: int
    periodic_horizontal: bool
    edges: tuple[Edge, ...]
    incident: tuple[tuple[int, ...], ...] = field(repr=False)
    edge_by_key: dict = field(repr=False, hash=False, compare=False)

    @property
    def n_vertices(self) -> int:
        return self.width * self.height

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def vertex_id(self, c: int, r: int) -> int:
        return r * self.width + c % self.width

    def vertex_cr(self, v: int) -> tuple[int, int]:
        return v % self.width, v // self.width

    @property
    def col_offset(self) -> int:
        # centering: local column c sits at absolute column c + col_offset
        return -((self.width - 1) // 2)

    def abs_col(self, c: int) -> int:
        return c + self.col_offset

    def local_col(self, c_abs: int) -> int:
        return c_abs - self.col_offset

    def vertex_by_abs(self, c_abs: int, r: int) -> int:
        return self.vertex_id(self.local_col(c_abs), r)

    def shift_vertex_map(self, k: int) -> list[int]:
        """Permutation of vertex ids induced by shifting columns by k (with wrap)."""
        W = self.width
        return [r * W + (c + k) % W for r in range(self.height) for c in range(W)]


@dataclass(frozen=True)
class DualGeometry:
    width: int
    height: int
    dual_edges: tuple[DualEdge, ...]
    dual_x_axis: tuple[int, ...]
    adjacency: tuple[tuple[tuple[int, int], ...], ...] = field(repr=False)
    # adjacency[dv] = ((dual edge id, other dual vertex), ...)

    @property
    def n_dual_vertices(self) -> int:
        return self.width * (self.height + 1)

    def dual_vertex_id(self, c: int, rd: int) -> int:
        return rd * self.width + c % self.width

    def dual_vertex_cr(self, dv: int) -> tuple[int, int]:
        return dv % self.width, dv // self.width

    def dual_coords2(self, dv: int) -> tuple[int, int]:
        """Doubled geometric coordinates (2x, 2y) of a dual vertex.

        The vertex in dual row rd of column c sits at (abs_col(c) + 1/2, rd - 1/2).
        """
        c, rd = self.dual_vertex_cr(dv)
        off = -((self.width - 1) // 2)
        return (2 * (c + off) + 1, 2 * rd - 1)

    def primal_edge_of(self, dual_edge_id: int) -> int:
        return dual_edge_id  # bijection by construction


def horizontal_edges_per_row(width: int) -> int:
    if width >= 3:
        return width
    if width == 2:
        return 1
    return 0


@lru_cache(maxsize=64)
def build_box(width: int, height: int) -> BoxGeometry:
    """Construct the cylinder box geometry.

    Vertices are indexed row-major from the bottom row.  Horizontal edges are
    anchored at their left endpoint; the wrap edge (W >= 3) is anchored at the
    last column.
    """
    if width < 1:
        raise ValueError("width must be >= 1")
    if height < 2:
        raise ValueError("height must be >= 2")
    W, H = width, height
    off = -((W - 1) // 2)
    edges: list[Edge] = []

    def vid(c, r):
        return r * W + c % W

    for r in range(H):
        for c in range(horizontal_edges_per_row(W)):
            u, v = vid(c, r), vid(c + 1, r)
            edges.append(Edge(len(edges), u, v, "h", c == W - 1 and W >= 3,
                              c, r, ("h", c + off, r)))
    for r in range(H - 1):
        for c in range(W):
            edges.append(Edge(len(edges), vid(c, r), vid(c, r + 1), "v", False,
                              c, r, ("v", c + off, r)))

    incident: list[list[int]] = [[] for _ in range(W * H)]
    for e in edges:
        incident[e.u].append(e.id)
        if e.v != e.u:
            incident[e.v].append(e.id)
    by_key = {e.key: e.id for e in edges}
    return BoxGeometry(W, H, True, tuple(edges),
                       tuple(tuple(x) for x in incident), by_key)


@lru_cache(maxsize=64)
def build_dual(width: int, height: int) -> DualGeometry:
    """Construct the dual of ``build_box(width, height)``.

    Dual vertex (c, rd) is the plaquette center at (abs_col(c)+1/2, rd-1/2);
    rd runs 0..height so the duals of top-row horizontal edges have both
    endpoints.  Row rd=0 is the dual x-axis; it carries no dual edges between
    its own vertices because the box has no couplings below the bottom row.
    """
    geom = build_box(width, height)
    W, H = width, height

    def dvid(c, rd):
        return rd * W + c % W

    duals: list[DualEdge] = []
    for e in geom.edges:
        if e.kind == "h":
            # vertical dual segment through the edge midpoint
            duals.append(DualEdge(e.id, dvid(e.col, e.row), dvid(e.col, e.row + 1)))
        else:
            # horizontal dual segment at height row + 1/2
            duals.append(DualEdge(e.id, dvid(e.col - 1, e.row + 1), dvid(e.col, e.row + 1)))

    adjacency: list[list[tuple[int, int]]] = [[] for _ in range(W * (H + 1))]
    for d in duals:
        adjacency[d.a].append((d.id, d.b))
        if d.b != d.a:
            adjacency[d.b].append((d.id, d.a))
    x_axis = tuple(dvid(c, 0) for c in range(W))
    return DualGeometry(W, H, tuple(duals), x_axis,
                        tuple(tuple(x) for x in adjacency))


def dual_of(geom: BoxGeometry) -> DualGeometry:
    return build_dual(geom.width, geom.height)


def connected_subsets(geom: BoxGeometry, max_size: int,
                      budget: int = DEFAULT_ENUM_BUDGET) -> Iterator[tuple[int, ...]]:
    """Stream every connected vertex subset of size <= max_size exactly once.

    Enumeration grows subsets from their minimum vertex using an exclusive
    extension set, so no subset is produced twice.  Raises BudgetExceededError
    if more than ``budget`` subsets would be emitted.
    """
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    neighbors: list[list[int]] = [[] for _ in range(geom.n_vertices)]
    for e in geom.edges:
        if e.u != e.v:
            neighbors[e.u].append(e.v)
            neighbors[e.v].append(e.u)
    for ns in neighbors:
        ns.sort()

    emitted = 0

    def emit(subset):
        nonlocal emitted
        emitted += 1
        if emitted > budget:
            raise BudgetExceededError(
                f"connected_subsets exceeded budget of {budget} items")
        return tuple(sorted(subset))

    def extend(root, subset, ext, seen):
        # seen: vertices already in the subset or its frontier, never re-added
        for i, w in enumerate(ext):
            subset.append(w)
            yield emit(subset)
            if len(subset) < max_size:
                new_ext = ext[i + 1:]
                added = []
                for u in neighbors[w]:
                    if u > root and u not in seen:
                        new_ext = new_ext + [u]
                        seen.add(u)
                        added.append(u)
                yield from extend(root, subset, new_ext, seen)
                for u in added:
                    seen.discard(u)
            subset.pop()

    for v in range(geom.n_vertices):
        yield emit([v])
        if max_size >= 2:
            ext = [u for u in neighbors[v] if u > v]
            yield from extend(v, [v], ext, set(ext) | {v})


def dual_circuits_and_paths(dual: DualGeometry, max_len: int,
                            budget: int = DEFAULT_ENUM_BUDGET
                            ) -> Iterator[tuple[str, tuple[int, ...]]]:
    """Stream ("circuit", edge ids) and ("path", edge ids) items.

    Circuits are vertex-simple dual cycles (self-loops excluded; the W=2
    doubled dual edge does form a 2-circuit around the cylinder).  Paths are
    vertex-simple and begin and end at distinct dual-x-axis vertices.  Each
    item appears once, in a canonical orientation.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    emitted = 0

    def emit(kind, seq):
        nonlocal emitted
        emitted += 1
        if emitted > budget:
            raise BudgetExceededError(
                f"dual_circuits_and_paths exceeded budget of {budget} items")
        return kind, tuple(seq)

    n = dual.n_dual_vertices
    adj = dual.adjacency

    # --- circuits: root = smallest vertex on the cycle ---------------------
    def circuits_from(root):
        # path_v: vertex sequence, path_e: edge ids
        stack = [(root, [root], [])]
        while stack:
            v, path_v, path_e = stack.pop()
            for eid, w in adj[v]:
                if eid in path_e or w == v:
                    continue
                if w == root and len(path_e) >= 1:
                    if len(path_e) + 1 < 2:
                        continue
                    # canonical orientation: for 2-circuits order the two
                    # parallel edges; longer circuits fix second < last vertex
                    if len(path_e) + 1 == 2:
                        if path_e[0] < eid:
                            yield emit("circuit", path_e + [eid])
                    elif path_v[1] < v:
                        yield emit("circuit", path_e + [eid])
                    continue
                if w < root or w in path_v:
                    continue
                if len(path_e) + 1 < max_len:
                    stack.append((w, path_v + [w], path_e + [eid]))

    x_axis = set(dual.dual_x_axis)

    def paths_from(a):
        stack = [(a, {a}, [])]
        while stack:
            v, used, path_e = stack.pop()
            for eid, w in adj[v]:
                if w == v or w in used:
                    continue
                if w in x_axis:
                    if w > a:
                        yield emit("path", path_e + [eid])
                    continue
                if len(path_e) + 1 < max_len:
                    stack.append((w, used | {w}, path_e + [eid]))

    for root in range(n):
        yield from circuits_from(root)
    for a in dual.dual_x_axis:
        yield from paths_from(a)
