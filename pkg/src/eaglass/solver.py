"""Exact minimizers of the box Hamiltonian, with a brute-force oracle.

``solve`` runs a row-by-row dynamic program over per-row spin bitmasks.  The
row-to-row transition is factorized per column (one bit replaced at a time),
so the cost is O(height * width * 2^width); the wrap coupling enters through
the intra-row cost, which sees the whole row mask.  Backpointers record every
optimal choice, so exact ties can be enumerated and broken deterministically:
the returned configuration has the lexicographically smallest canonical bit
pattern among all minimizers, and the pair is flagged as tied.

Configurations are pairs modulo a global flip.  Internally one representative
is pinned by forcing the clamp's anchor vertex (or vertex 0) to +1; the stored
canonical form instead gives +1 to the lowest-indexed vertex not determined by
the clamp, so equal pairs compare equal elementwise.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import lru_cache
from math import fsum

import numpy as np

from .errors import BudgetExceededError
from .disorder import CouplingConfig
from .lattice import (BoxGeometry, DualGeometry, build_box, build_dual,
                      connected_subsets, dual_circuits_and_paths,
                      horizontal_edges_per_row)

MAX_SOLVE_WIDTH = 16
MAX_BRUTE_VERTICES = 24
_TIE_CAP = 20000
# penalty for clamp-violating masks; finite because inf arithmetic falls off
# the fast path on some CPUs, and couplings keep real energies far below it
_REJECT = 1e30


@dataclass(frozen=True)
class Clamp:
    """Relative spins on a vertex set, stored with the lowest vertex at +1."""

    vertices: tuple[int, ...]
    signs: tuple[int, ...]

    def __init__(self, vertices, signs):
        pairs = sorted(zip(vertices, signs))
        if not pairs:
            raise ValueError("clamp must cover at least one vertex")
        vs = tuple(v for v, _ in pairs)
        if len(set(vs)) != len(vs):
            raise ValueError("duplicate clamp vertices")
        ss = tuple(int(s) for _, s in pairs)
        if any(s not in (1, -1) for s in ss):
            raise ValueError("clamp signs must be +1 or -1")
        if ss[0] < 0:
            ss = tuple(-s for s in ss)
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "signs", ss)

    def sign_of(self, v: int) -> int:
        return self.signs[self.vertices.index(v)]

    @staticmethod
    def equal_pair(u: int, v: int) -> "Clamp":
        return Clamp((u, v), (1, 1))

    @staticmethod
    def opposite_pair(u: int, v: int) -> "Clamp":
        return Clamp((u, v), (1, -1))


@dataclass(frozen=True)
class SpinPair:
    """A spin configuration modulo global flip, in canonical form."""

    geom: BoxGeometry
    signs: np.ndarray = field(compare=False)
    energy: float
    tied: bool = False
    canonical: bool = True

    def __post_init__(self):
        self.signs.setflags(write=False)

    def edge_product(self, edge_id: int) -> int:
        e = self.geom.edges[edge_id]
        return int(self.signs[e.u]) * int(self.signs[e.v])

    def same_pair(self, other: "SpinPair") -> bool:
        return bool(np.array_equal(self.signs, other.signs)
                    or np.array_equal(self.signs, -other.signs))


def energy(geom: BoxGeometry, J: CouplingConfig, signs: np.ndarray) -> float:
    """-sum of J_e * s_u * s_v over all box edges, compensated summation."""
    vals = J.values
    return -fsum(vals[e.id] * signs[e.u] * signs[e.v] for e in geom.edges)


def canonical_anchor(geom: BoxGeometry, clamp: Clamp | None) -> int:
    if clamp is None:
        return 0
    clamped = set(clamp.vertices)
    for v in range(geom.n_vertices):
        if v not in clamped:
            return v
    return clamp.vertices[0]


def canonicalize(geom: BoxGeometry, signs: np.ndarray, clamp: Clamp | None) -> np.ndarray:
    anchor = canonical_anchor(geom, clamp)
    out = signs if signs[anchor] > 0 else -signs
    return np.ascontiguousarray(out, dtype=np.int8)


def _forced_signs(geom: BoxGeometry, clamp: Clamp | None) -> dict[int, int]:
    """Absolute signs pinning one representative of each pair modulo flip."""
    if clamp is None:
        return {0: 1}
    for v in clamp.vertices:
        if not 0 <= v < geom.n_vertices:
            raise ValueError(f"clamp vertex {v} outside geometry")
    return dict(zip(clamp.vertices, clamp.signs))


def _pattern(signs: np.ndarray) -> bytes:
    return ((1 - signs) // 2).astype(np.uint8).tobytes()


# --------------------------------------------------------------------------
# transfer-matrix solver


def _transition_column(cur, nxt, j_vert, bp, c):
    """One column step of the row-to-row transition (numpy fallback).

    Replaces bit c of the frontier: for each target mask the cost of the
    vertical edge is -J * old * new; bp gets 1 / 2 / 3 for old-bit-0 optimal,
    old-bit-1 optimal, or an exact tie.
    """
    hi, lo = cur.shape[0] >> (c + 1), 1 << c
    f3 = cur.reshape(hi, 2, lo)
    f0, f1 = f3[:, 0, :], f3[:, 1, :]
    t0, t1 = f0 - j_vert, f1 + j_vert   # new spin -1
    u0, u1 = f0 + j_vert, f1 - j_vert   # new spin +1
    n3 = nxt.reshape(hi, 2, lo)
    b3 = bp.reshape(hi, 2, lo)
    np.minimum(t0, t1, out=n3[:, 0, :])
    np.minimum(u0, u1, out=n3[:, 1, :])
    b3[:, 0, :] = (t0 == n3[:, 0, :]) | ((t1 == n3[:, 0, :]) << 1)
    b3[:, 1, :] = (u0 == n3[:, 1, :]) | ((u1 == n3[:, 1, :]) << 1)


try:
    import numba as _numba

    @_numba.njit(cache=True)
    def _transition_column_jit(cur, nxt, j_vert, bp, c):  # pragma: no cover
        bit = 1 << c
        hi_count = cur.shape[0] >> (c + 1)
        lo_count = 1 << c
        for h in range(hi_count):
            base = h << (c + 1)
            for lo in range(lo_count):
                m0 = base | lo
                m1 = m0 | bit
                a = cur[m0]
                b = cur[m1]
                t0 = a - j_vert
                t1 = b + j_vert
                if t0 < t1:
                    nxt[m0] = t0
                    bp[m0] = 1
                elif t1 < t0:
                    nxt[m0] = t1
                    bp[m0] = 2
                else:
                    nxt[m0] = t0
                    bp[m0] = 3
                u0 = a + j_vert
                u1 = b - j_vert
                if u0 < u1:
                    nxt[m1] = u0
                    bp[m1] = 1
                elif u1 < u0:
                    nxt[m1] = u1
                    bp[m1] = 2
                else:
                    nxt[m1] = u0
                    bp[m1] = 3

    _transition = _transition_column_jit
except ImportError:  # pragma: no cover
    _transition = _transition_column


class _Workspace:
    """Per-width mask tables shared across solves."""

    def __init__(self, width: int):
        n = 1 << width
        self.masks = np.arange(n, dtype=np.int64)
        self.colsign = [(((self.masks >> c) & 1) * 2.0 - 1.0)
                        for c in range(width)]
        self.h_anchors = list(range(horizontal_edges_per_row(width)))
        # column a: endpoint sign product of the horizontal edge anchored at a
        if self.h_anchors:
            self.pair_matrix = np.column_stack(
                [self.colsign[a] * self.colsign[(a + 1) % width]
                 for a in self.h_anchors])
        else:
            self.pair_matrix = np.zeros((n, 0))


@lru_cache(maxsize=8)
def _workspace(width: int) -> _Workspace:
    return _Workspace(width)


_DP_BUFFERS = threading.local()


def _buffers(width: int, height: int):
    """Reused DP arrays; fresh per-solve allocation of the multi-megabyte
    backpointer block measurably stalls repeated solves."""
    store = getattr(_DP_BUFFERS, "store", None)
    if store is None:
        store = _DP_BUFFERS.store = {}
    key = (width, height)
    if key not in store:
        if len(store) >= 8:
            store.clear()
        n = 1 << width
        store[key] = (np.empty(n), np.empty(n),
                      np.empty((height - 1, width, n), dtype=np.uint8),
                      np.empty((n, height)))
    return store[key]


def _row_cost_matrix(geom, J, ws, out):
    """(2^W, H) matrix of intra-row energies, wrap edge included."""
    j_rows = np.zeros((len(ws.h_anchors), geom.height))
    for e in geom.edges:
        if e.kind == "h":
            j_rows[e.col, e.row] = J.values[e.id]
    np.matmul(ws.pair_matrix, j_rows, out=out)
    np.negative(out, out=out)
    return out


def _row_admissible(geom, forced, masks):
    per_row: dict[int, np.ndarray] = {}
    for v, s in forced.items():
        c, r = geom.vertex_cr(v)
        ok = ((masks >> c) & 1) == (1 if s > 0 else 0)
        per_row[r] = ok if r not in per_row else (per_row[r] & ok)
    return per_row


def solve(geom: BoxGeometry, J: CouplingConfig, clamp: Clamp | None = None,
          max_width: int = MAX_SOLVE_WIDTH, tie_cap: int = _TIE_CAP) -> SpinPair:
    """Exact minimizer over configurations modulo flip respecting the clamp."""
    W, H = geom.width, geom.height
    if W > max_width:
        raise BudgetExceededError(f"width {W} exceeds solver budget {max_width}")
    forced = _forced_signs(geom, clamp)
    ws = _workspace(W)
    cur, nxt, backptr, rc_buf = _buffers(W, H)
    rowcost = _row_cost_matrix(geom, J, ws, rc_buf)
    admissible = _row_admissible(geom, forced, ws.masks)
    vert_j = np.zeros((W, H - 1))
    for e in geom.edges:
        if e.kind == "v":
            vert_j[e.col, e.row] = J.values[e.id]

    np.copyto(cur, rowcost[:, 0])
    if 0 in admissible:
        cur[~admissible[0]] = _REJECT

    for r in range(H - 1):
        bp_r = backptr[r]
        for c in range(W):
            _transition(cur, nxt, float(vert_j[c, r]), bp_r[c], c)
            cur, nxt = nxt, cur
        cur += rowcost[:, r + 1]
        if r + 1 in admissible:
            cur[~admissible[r + 1]] = _REJECT

    dp = cur
    best = dp.min()
    if best >= _REJECT / 2:
        raise RuntimeError("no admissible configuration (unsatisfiable clamp?)")
    finals = [int(m) for m in np.flatnonzero(dp == best)]

    configs = _enumerate_optimal(backptr, finals, W, H, tie_cap)
    tied = len(configs) > 1
    best_signs = None
    best_pat = None
    for rows in configs:
        signs = _rows_to_signs(rows, W, H)
        canon = canonicalize(geom, signs, clamp)
        pat = _pattern(canon)
        if best_pat is None or pat < best_pat:
            best_pat, best_signs = pat, canon
    return SpinPair(geom, best_signs, energy(geom, J, best_signs), tied=tied)


def _rows_to_signs(rows, W, H):
    signs = np.empty(W * H, dtype=np.int8)
    for r, m in enumerate(rows):
        for c in range(W):
            signs[r * W + c] = 1 if (m >> c) & 1 else -1
    return signs


def _enumerate_optimal(backptr, finals, W, H, cap):
    """All optimal row-mask sequences, deduplicated; raises past the cap."""

    def prev_masks(rt, mask):
        states = {mask}
        for c in reversed(range(W)):
            bit = 1 << c
            nxt = set()
            bp = backptr[rt][c]
            for st in states:
                ch = bp[st]
                if ch & 1:
                    nxt.add(st & ~bit)
                if ch & 2:
                    nxt.add(st | bit)
            states = nxt
        return states

    results = []
    seen = set()

    def expand(r, mask, suffix):
        if len(results) > cap:
            raise BudgetExceededError("tie degeneracy exceeds enumeration cap")
        if r == 0:
            rows = (mask,) + suffix
            if rows not in seen:
                seen.add(rows)
                results.append(rows)
            return
        for prev in sorted(prev_masks(r - 1, mask)):
            expand(r - 1, prev, (mask,) + suffix)

    for m in finals:
        expand(H - 1, m, ())
    return results


# --------------------------------------------------------------------------
# brute-force oracle

_CHUNK_BITS = 16


def brute_force(geom: BoxGeometry, J: CouplingConfig,
                clamp: Clamp | None = None) -> SpinPair:
    """Exhaustive minimum over all configurations modulo flip.

    Same canonicalization and tie policy as ``solve``; kept independent of it
    (plain enumeration, no dynamic programming).
    """
    V = geom.n_vertices
    if V > MAX_BRUTE_VERTICES:
        raise BudgetExceededError(f"{V} vertices exceed brute-force budget")
    forced = _forced_signs(geom, clamp)
    free = [v for v in range(V) if v not in forced]
    k = len(free)
    eu = np.array([e.u for e in geom.edges])
    ev = np.array([e.v for e in geom.edges])
    base = np.zeros(V, dtype=np.int8)
    for v, s in forced.items():
        base[v] = s

    best_energy = np.inf
    best_pat = None
    best_signs = None
    n_best = 0
    total = 1 << k
    step = 1 << min(k, _CHUNK_BITS)
    for start in range(0, total, step):
        idx = np.arange(start, min(start + step, total), dtype=np.int64)
        S = np.repeat(base[None, :], len(idx), axis=0)
        for j, v in enumerate(free):
            S[:, v] = (((idx >> j) & 1) * 2 - 1).astype(np.int8)
        prod = (S[:, eu] * S[:, ev]).astype(np.float64)
        E = -(prod @ J.values)
        m = float(E.min())
        if m < best_energy:
            best_energy = m
            best_pat = None
            best_signs = None
            n_best = 0
        if m <= best_energy:
            for row in np.flatnonzero(E == best_energy):
                n_best += 1
                canon = canonicalize(geom, S[row], clamp)
                pat = _pattern(canon)
                if best_pat is None or pat < best_pat:
                    best_pat, best_signs = pat, canon
    return SpinPair(geom, best_signs, energy(geom, J, best_signs),
                    tied=n_best > 1)


# --------------------------------------------------------------------------
# ground-state-pair verification


@dataclass(frozen=True)
class GspViolation:
    kind: str            # "subset" | "circuit" | "path"
    items: tuple         # vertex ids for subsets, edge ids for dual objects
    value: float


@dataclass(frozen=True)
class GspReport:
    checked_subsets: int
    checked_duals: int
    violations: tuple[GspViolation, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


@lru_cache(maxsize=32)
def _subset_boundaries(width, height, max_size):
    geom = build_box(width, height)
    out = []
    for subset in connected_subsets(geom, max_size):
        inside = set(subset)
        bids = set()
        for v in subset:
            for eid in geom.incident[v]:
                e = geom.edges[eid]
                if (e.u in inside) != (e.v in inside):
                    bids.add(eid)
        out.append((subset, np.fromiter(sorted(bids), dtype=np.int64)))
    return out


@lru_cache(maxsize=32)
def _dual_flip_sets(width, height, max_len):
    dual = build_dual(width, height)
    return [(kind, np.array(eids, dtype=np.int64))
            for kind, eids in dual_circuits_and_paths(dual, max_len)]


def verify_gsp(geom: BoxGeometry, dual: DualGeometry, J: CouplingConfig,
               spins, max_subset_size: int = 3, max_dual_len: int = 6,
               exclude: tuple[int, ...] = ()) -> GspReport:
    """Report every finite-volume ground-state-property violation.

    Subsets S intersecting ``exclude`` (a clamp's vertex set) are skipped;
    with a non-empty ``exclude`` the dual circuit/path route is skipped too,
    since those flips are not clamp-preserving in general.
    """
    signs = spins.signs if isinstance(spins, SpinPair) else np.asarray(spins)
    eu = np.array([e.u for e in geom.edges])
    ev = np.array([e.v for e in geom.edges])
    contrib = J.values * signs[eu] * signs[ev]
    excluded = frozenset(exclude)

    violations = []
    n_sub = 0
    for subset, bids in _subset_boundaries(geom.width, geom.height, max_subset_size):
        if excluded and not excluded.isdisjoint(subset):
            continue
        n_sub += 1
        val = float(contrib[bids].sum())
        if val <= 0.0:
            violations.append(GspViolation("subset", subset, val))
    n_dual = 0
    if not excluded:
        for kind, eids in _dual_flip_sets(geom.width, geom.height, max_dual_len):
            n_dual += 1
            val = float(contrib[eids].sum())
            if val <= 0.0:
                violations.append(GspViolation(kind, tuple(int(i) for i in eids), val))
    return GspReport(n_sub, n_dual, tuple(violations))
