"""Experiment harness: seeded ensembles, per-sample records, reports.

Every experiment is a pure function of its configuration: per-edge couplings
come from the counter-based sampler, per-sample auxiliary choices from a
seed-sequence keyed by (master seed, sample index), and records are sorted by
sample index before aggregation, so the report content hash is identical at
any parallelism degree.  Hard per-sample assertions abort the run with a
reproducer line naming (seed, sample index, config).
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import excitation as exc
from . import walls as wl
from .disorder import (CouplingConfig, DistributionSpec, sample_couplings,
                       super_satisfy, supersatisfied_threshold)
from .errors import ConfigError, HardAssertionFailure
from .lattice import BoxGeometry, build_box, build_dual
from .solver import (MAX_SOLVE_WIDTH, Clamp, brute_force, solve,
                     verify_gsp)

SCHEMA_VERSION = 1
_ALT_SAMPLE_OFFSET = 1 << 32   # index space for perturbed-exterior redraws

EXPERIMENT_KINDS = ("solve", "flip_sweep", "two_bond_map", "contour_stats",
                    "wall_stats", "convergence", "uniqueness_probe",
                    "property_suite")
PROXY_KINDS = ("excited_pair", "nested_volumes", "perturbed_exterior")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    width: int = 7
    height: int = 7
    dist: DistributionSpec = DistributionSpec("gaussian", sigma=1.0)
    master_seed: int = 0
    samples: int = 1
    parallel: int = 1
    out: str | None = None
    edge: tuple | None = None        # ("h"|"v", absolute column, row)
    edge2: tuple | None = None
    grid_lo: float = -3.0
    grid_hi: float = 3.0
    grid_points: int = 41
    window_width: int = 3
    window_height: int = 2
    n_list: tuple = ()
    k_list: tuple = ()
    n_pairs: tuple = ()
    proxy: str = "excited_pair"
    band_height: int | None = None
    probes: int = 10
    subset_budget: int = 2
    dual_budget: int = 4
    tol: float = 1e-9

    def core_dict(self) -> dict:
        """Config content that determines results: excludes parallelism and
        output location, which must not affect the report hash."""
        d = asdict(self)
        d.pop("parallel")
        d.pop("out")
        d["dist"] = self.dist.to_dict()
        d["schema_version"] = SCHEMA_VERSION
        return _jsonable(d)

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        d = dict(d)
        version = d.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version}")
        if "dist" in d and not isinstance(d["dist"], DistributionSpec):
            d["dist"] = DistributionSpec.from_dict(d["dist"])
        for key in ("edge", "edge2"):
            if d.get(key) is not None:
                d[key] = _edge_tuple(d[key])
        for key in ("n_list", "k_list"):
            if key in d:
                d[key] = tuple(int(x) for x in d[key])
        if "n_pairs" in d:
            d["n_pairs"] = tuple((int(a), int(b)) for a, b in d["n_pairs"])
        unknown = set(d) - set(ExperimentConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        try:
            cfg = ExperimentConfig(**d)
        except TypeError as e:
            raise ConfigError(str(e)) from e
        validate_config(cfg)
        return cfg


def _edge_tuple(spec) -> tuple:
    try:
        if isinstance(spec, str):
            kind, _, rest = spec.partition(":")
            c, _, r = rest.partition(",")
            spec = (kind, int(c), int(r))
        kind, c, r = spec
        c, r = int(c), int(r)
    except (ValueError, TypeError):
        raise ConfigError(f"bad edge spec {spec!r}; use kind:col,row") from None
    if kind not in ("h", "v"):
        raise ConfigError(f"edge kind must be 'h' or 'v', got {kind!r}")
    return (kind, c, r)


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"unknown experiment kind {cfg.kind!r}")
    if cfg.samples < 1:
        raise ConfigError("sample count must be >= 1")
    if cfg.parallel < 1:
        raise ConfigError("parallelism degree must be >= 1")
    if cfg.kind in ("convergence", "uniqueness_probe"):
        ns = [n for pair in cfg.n_pairs for n in pair] if cfg.kind == "uniqueness_probe" \
            else list(cfg.n_list)
        if cfg.kind == "convergence":
            if len(cfg.n_list) < 1:
                raise ConfigError("convergence requires a non-empty n_list")
            if list(cfg.n_list) != sorted(set(cfg.n_list)):
                raise ConfigError("n_list must be strictly increasing")
        else:
            if not cfg.n_pairs:
                raise ConfigError("uniqueness_probe requires n_pairs")
        if not ns:
            raise ConfigError("no volumes requested")
        n_min, n_max = min(ns), max(ns)
        if n_min < 1:
            raise ConfigError("box index n must be >= 1")
        if 2 * n_max + 1 > MAX_SOLVE_WIDTH:
            raise ConfigError(f"n={n_max} exceeds solver width budget")
        if cfg.window_width < 1 or cfg.window_height < 1:
            raise ConfigError("window must be at least 1x1")
        # window columns span -floor((w-1)/2) .. ceil((w-1)/2) around center
        if (cfg.window_width - 1) - (cfg.window_width - 1) // 2 > n_min \
                or cfg.window_height > 2 * n_min + 1:
            raise ConfigError("window does not fit in the smallest box")
        return
    if cfg.width < 1 or cfg.height < 2:
        raise ConfigError("box must have width >= 1 and height >= 2")
    if cfg.width > MAX_SOLVE_WIDTH:
        raise ConfigError(f"width {cfg.width} exceeds solver budget")
    if cfg.kind == "two_bond_map":
        if cfg.grid_points < 11:
            raise ConfigError("two-bond map grid must be at least 11x11")
        if not cfg.grid_lo < cfg.grid_hi:
            raise ConfigError("grid_lo must be below grid_hi")
        if cfg.width * cfg.height > 22:
            raise ConfigError("two-bond grid oracle needs at most 22 vertices")
    if cfg.kind == "wall_stats":
        if cfg.proxy not in PROXY_KINDS:
            raise ConfigError(f"unknown proxy kind {cfg.proxy!r}")
        if not cfg.n_list or not cfg.k_list:
            raise ConfigError("wall_stats requires n_list and k_list")
        if 0 not in cfg.k_list:
            raise ConfigError("k_list must contain 0")
        half = (cfg.width - 1) // 2
        n_cap = half - 1 if cfg.proxy == "nested_volumes" else half
        if max(cfg.n_list) > n_cap:
            raise ConfigError(f"segment n exceeds cap {n_cap} for this proxy")
        if cfg.proxy == "excited_pair" and cfg.width < 3:
            raise ConfigError("excited_pair proxy needs width >= 3")
        if cfg.proxy == "nested_volumes":
            if cfg.width % 2 == 0:
                raise ConfigError("nested_volumes proxy needs odd width")
            if cfg.width + 2 > MAX_SOLVE_WIDTH:
                raise ConfigError("outer nested box exceeds solver budget")
        band = cfg.band_height if cfg.band_height is not None else cfg.height // 2
        if cfg.proxy == "perturbed_exterior":
            if not 1 <= band < cfg.height - 1:
                raise ConfigError("band_height must lie strictly inside the box")
            if max(cfg.k_list) > band:
                raise ConfigError("k_list exceeds the preserved band")
        if max(cfg.k_list) > cfg.height:
            raise ConfigError("k_list exceeds box height")
    if cfg.kind == "contour_stats" and cfg.width < 3:
        raise ConfigError("contour_stats needs width >= 3")


# --------------------------------------------------------------------------
# shared helpers


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def _sample_rng(cfg: ExperimentConfig, index: int, tag: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=cfg.master_seed & ((1 << 64) - 1),
                                spawn_key=(tag, index))
    return np.random.Generator(np.random.Philox(ss))


def _reproducer(cfg: ExperimentConfig, index: int) -> str:
    return json.dumps({"seed": cfg.master_seed, "sample": index,
                       "config": cfg.core_dict()}, sort_keys=True)


def _hard(cond: bool, message: str, cfg: ExperimentConfig, index: int) -> None:
    if not cond:
        raise HardAssertionFailure(
            f"sample {index}: {message}", reproducer=_reproducer(cfg, index))


def _resolve_edge(geom: BoxGeometry, spec) -> int:
    key = _edge_tuple(spec)
    try:
        return geom.edge_by_key[key]
    except KeyError:
        raise ConfigError(f"edge {key} not in geometry "
                          f"{geom.width}x{geom.height}") from None


def _default_edge(geom: BoxGeometry) -> int:
    # a central vertical edge exists for every valid box
    return geom.edge_by_key[("v", 0, geom.height // 2)]


def _pattern_string(signs) -> str:
    return "".join("+" if s > 0 else "-" for s in signs)


def _window_keys(window_width: int, window_height: int) -> list[tuple]:
    lo = -((window_width - 1) // 2)
    hi = lo + window_width - 1
    keys = []
    for r in range(window_height):
        for c in range(lo, hi):
            keys.append(("h", c, r))
    for r in range(window_height - 1):
        for c in range(lo, hi + 1):
            keys.append(("v", c, r))
    return keys


def _window_signature(geom, pair, keys) -> tuple:
    sig = []
    for key in keys:
        e = geom.edges[geom.edge_by_key[key]]
        sig.append(int(pair.signs[e.u]) * int(pair.signs[e.v]))
    return tuple(sig)


# --------------------------------------------------------------------------
# proxy pair sources


def proxy_excited_pair(cfg, J, geom, dual, edge_id):
    iface = exc.critical_contour(geom, dual, J, edge_id)
    return iface, frozenset((edge_id,))


def proxy_nested_volumes(cfg, index):
    """GSPs of nested boxes compared on the shared edges.

    The comparison cuts the smaller cylinder open along its wrap seam: wrap
    couplings have no counterpart edge in the bigger box, and the duals of
    column-0 vertical edges cross the seam, so dual paths through them do not
    map into the bigger box's dual and the interface invariants would not be
    theorems across them.
    """
    small = build_box(cfg.width, cfg.height)
    big = build_box(cfg.width + 2, cfg.height + 2)
    j_small = sample_couplings(small, cfg.dist, cfg.master_seed, index)
    j_big = sample_couplings(big, cfg.dist, cfg.master_seed, index)
    alpha = solve(small, j_small)
    beta = solve(big, j_big)
    shared = [e.id for e in small.edges
              if not e.wrap and not (e.kind == "v" and e.col == 0)]
    sat_a = wl.satisfaction(small, j_small, alpha)
    sat_b = np.zeros(small.n_edges, dtype=bool)
    for eid in shared:
        e = small.edges[eid]
        kind, c_abs, r = e.key
        if kind == "h":
            u = big.vertex_by_abs(c_abs, r)
            v = big.vertex_by_abs(c_abs + 1, r)
        else:
            u = big.vertex_by_abs(c_abs, r)
            v = big.vertex_by_abs(c_abs, r + 1)
        prod = int(beta.signs[u]) * int(beta.signs[v])
        sat_b[eid] = j_small.values[eid] * prod > 0
    dual = build_dual(cfg.width, cfg.height)
    iface = wl.interface_from_satisfaction(small, dual, sat_a, sat_b,
                                           edge_ids=shared,
                                           label="nested_volumes")
    return iface, frozenset()


def proxy_perturbed_exterior(cfg, index):
    """GSPs of the same couplings inside a bottom band, redrawn outside it."""
    geom = build_box(cfg.width, cfg.height)
    band = cfg.band_height if cfg.band_height is not None else cfg.height // 2
    j_base = sample_couplings(geom, cfg.dist, cfg.master_seed, index)
    j_alt = sample_couplings(geom, cfg.dist, cfg.master_seed,
                             index + _ALT_SAMPLE_OFFSET)
    window = []
    vals = j_alt.values.copy()
    for e in geom.edges:
        rows = (geom.vertex_cr(e.u)[1], geom.vertex_cr(e.v)[1])
        if max(rows) <= band:
            vals[e.id] = j_base.values[e.id]
            window.append(e.id)
    j_pert = CouplingConfig(geom, vals, {"perturbed_from": index, "band": band})
    alpha = solve(geom, j_base)
    beta = solve(geom, j_pert)
    sat_a = wl.satisfaction(geom, j_base, alpha)
    sat_b = wl.satisfaction(geom, j_pert, beta)
    dual = build_dual(cfg.width, cfg.height)
    iface = wl.interface_from_satisfaction(geom, dual, sat_a, sat_b,
                                           edge_ids=window,
                                           label="perturbed_exterior")
    return iface, frozenset()


# --------------------------------------------------------------------------
# per-sample experiment bodies


def _run_solve(cfg: ExperimentConfig, i: int) -> dict:
    geom = build_box(cfg.width, cfg.height)
    dual = build_dual(cfg.width, cfg.height)
    J = sample_couplings(geom, cfg.dist, cfg.master_seed, i)
    gsp = solve(geom, J)
    report = verify_gsp(geom, dual, J, gsp,
                        max_subset_size=cfg.subset_budget,
                        max_dual_len=cfg.dual_budget)
    _hard(report.passed, "ground state fails finite-volume verification", cfg, i)
    return {"sample": i, "energy": gsp.energy, "tied": gsp.tied,
            "pattern": _pattern_string(gsp.signs),
            "checked_subsets": report.checked_subsets,
            "checked_duals": report.checked_duals}


def _run_flip_sweep(cfg: ExperimentConfig, i: int) -> dict:
    geom = build_box(cfg.width, cfg.height)
    J = sample_couplings(geom, cfg.dist, cfg.master_seed, i)
    b = _resolve_edge(geom, cfg.edge) if cfg.edge else _default_edge(geom)
    c_val = exc.critical_value(geom, J, b)
    span = max(1.0, 0.5 * (cfg.grid_hi - cfg.grid_lo))
    grid = c_val + np.linspace(-span, span, cfg.grid_points) + span * 1e-3
    census = exc.flip_census(geom, J, b, grid)
    _hard(census.n_transitions == 1,
          f"expected exactly one GSP flip, got {census.n_transitions}", cfg, i)
    lo, hi = census.transition_interval
    _hard(lo <= c_val <= hi,
          "flip interval does not bracket the exterior-energy critical value",
          cfg, i)
    for x, lab in zip(census.values, census.labels):
        if abs(x - c_val) > cfg.tol:
            _hard(lab == (1 if x > c_val else -1),
                  f"label at J_b={x} contradicts critical value", cfg, i)
    return {"sample": i, "edge": b, "critical_value": c_val,
            "interval": [lo, hi], "n_transitions": census.n_transitions}


def _run_two_bond(cfg: ExperimentConfig, i: int) -> dict:
    geom = build_box(cfg.width, cfg.height)
    J = sample_couplings(geom, cfg.dist, cfg.master_seed, i)
    b = _resolve_edge(geom, cfg.edge) if cfg.edge else \
        geom.edge_by_key[("h", 0, geom.height // 2)]
    e = _resolve_edge(geom, cfg.edge2) if cfg.edge2 else \
        geom.edge_by_key[("v", 0, geom.height // 2)]
    cs = exc.two_bond_critical_set(geom, J, b, e)
    dev = abs((cs.c1 - cs.c2) - (cs.c3 - cs.c4))
    _hard(dev <= cfg.tol, f"C1-C2 != C3-C4 (deviation {dev})", cfg, i)

    xs = np.linspace(cfg.grid_lo, cfg.grid_hi, cfg.grid_points)
    ys = np.linspace(cfg.grid_lo, cfg.grid_hi, cfg.grid_points)
    oracle = exc.grid_labels_enumeration(geom, J, b, e, xs, ys)
    cell = max(xs[1] - xs[0], ys[1] - ys[0])
    mismatches = 0
    interior_cells = 0
    for ix, x in enumerate(xs):
        for iy, y in enumerate(ys):
            if exc.critical_set_distance(cs, x, y) < cell:
                continue
            interior_cells += 1
            want = exc.analytic_label(cs, x, y)
            got = (int(oracle[ix, iy, 0]), int(oracle[ix, iy, 1]))
            if want != got:
                mismatches += 1
    _hard(mismatches == 0,
          f"{mismatches} grid cells disagree with the analytic critical set",
          cfg, i)
    cons = exc.consistency_check(geom, J, b, e, cs)
    _hard(cons.max_abs_err <= cfg.tol,
          f"piecewise critical-value identity off by {cons.max_abs_err}", cfg, i)
    return {"sample": i, "critical_set": cs.to_json_dict(),
            "case": cs.case_kind, "cross_dev": dev,
            "interior_cells": interior_cells, "mismatches": mismatches,
            "consistency_err": cons.max_abs_err}


def _run_contour_stats(cfg: ExperimentConfig, i: int) -> dict:
    geom = build_box(cfg.width, cfg.height)
    dual = build_dual(cfg.width, cfg.height)
    J = sample_couplings(geom, cfg.dist, cfg.master_seed, i)
    if cfg.edge:
        b = _resolve_edge(geom, cfg.edge)
    else:
        # bottom-row horizontal edge, column randomized to keep the ensemble
        # invariant under rotations of the cylinder
        rng = _sample_rng(cfg, i, tag=3)
        col = int(rng.integers(geom.width))
        b = geom.edge_by_key[("h", geom.abs_col(col), 0)]
    iface = exc.critical_contour(geom, dual, J, b)
    _hard(b in iface.edge_ids, "contour misses the flipped edge's dual", cfg, i)
    walls = wl.domain_walls(iface, dual)
    tether = wl.no_double_tether_check(walls, dual, excluded_dual_edges={b})
    _hard(tether.passed, "tethered-wall structure violated", cfg, i)
    cyc = wl.interface_cycle_check(iface, dual, excluded_dual_edges={b})
    _hard(cyc.passed, "dual circuit inside contour avoiding the flipped edge",
          cfg, i)
    return {"sample": i, "edge": b, "contour_size": len(iface.edge_ids),
            "n_walls": len(walls),
            "n_tethered": sum(1 for w in walls if w.tethered)}


def _run_wall_stats(cfg: ExperimentConfig, i: int) -> dict:
    if cfg.proxy == "excited_pair":
        geom = build_box(cfg.width, cfg.height)
        dual = build_dual(cfg.width, cfg.height)
        J = sample_couplings(geom, cfg.dist, cfg.master_seed, i)
        if cfg.edge:
            b = _resolve_edge(geom, cfg.edge)
        else:
            rng = _sample_rng(cfg, i, tag=3)
            b = geom.edge_by_key[("h", geom.abs_col(int(rng.integers(geom.width))), 0)]
        iface, excluded = proxy_excited_pair(cfg, J, geom, dual, b)
    elif cfg.proxy == "nested_volumes":
        iface, excluded = proxy_nested_volumes(cfg, i)
        dual = iface.dual
    else:
        iface, excluded = proxy_perturbed_exterior(cfg, i)
        dual = iface.dual
    walls = wl.domain_walls(iface, dual)
    grid = wl.wall_count_grid(walls, cfg.n_list, cfg.k_list, dual)
    bound = wl.wall_bound_check(grid)
    _hard(bound.passed, f"wall count bound violated: {bound.violations}", cfg, i)
    tether = wl.no_double_tether_check(walls, dual, excluded_dual_edges=excluded)
    _hard(tether.passed, f"tether structure violated: {tether.violations}", cfg, i)
    cyc = wl.interface_cycle_check(iface, dual, excluded_dual_edges=excluded)
    _hard(cyc.passed, f"dual circuit inside interface: {cyc.violations}", cfg, i)
    record = {"sample": i, "proxy": cfg.proxy,
              "interface_size": len(iface.edge_ids),
              "n_walls": len(walls),
              "n_tethered": sum(1 for w in walls if w.tethered),
              "counts": {f"{n},{k}": grid.count(n, k)
                         for n in cfg.n_list for k in cfg.k_list}}
    return record


def _run_convergence(cfg: ExperimentConfig, i: int) -> dict:
    keys = _window_keys(cfg.window_width, cfg.window_height)
    sigs = []
    for n in cfg.n_list:
        geom = build_box(2 * n + 1, 2 * n + 1)
        J = sample_couplings(geom, cfg.dist, cfg.master_seed, i)
        gsp = solve(geom, J)
        sigs.append(_window_signature(geom, gsp, keys))
    agrees = [sigs[j] == sigs[j + 1] for j in range(len(sigs) - 1)]
    return {"sample": i, "agrees": agrees}


def _run_uniqueness(cfg: ExperimentConfig, i: int) -> dict:
    keys = _window_keys(cfg.window_width, cfg.window_height)
    cache: dict[int, tuple] = {}

    def signature(n):
        if n not in cache:
            geom = build_box(2 * n + 1, 2 * n + 1)
            J = sample_couplings(geom, cfg.dist, cfg.master_seed, i)
            cache[n] = _window_signature(geom, solve(geom, J), keys)
        return cache[n]

    results = []
    for n_lo, n_hi in cfg.n_pairs:
        sig_a, sig_b = signature(n_lo), signature(n_hi)
        agree = sig_a == sig_b
        entry = {"pair": [n_lo, n_hi], "agree": agree}
        if not agree:
            entry["disagreeing_edges"] = [list(keys[j]) for j in range(len(keys))
                                          if sig_a[j] != sig_b[j]]
        results.append(entry)
    return {"sample": i, "pairs": results}


def _connected_random_set(geom, rng, size) -> tuple:
    v = int(rng.integers(geom.n_vertices))
    chosen = {v}
    frontier = [v]
    while len(chosen) < size and frontier:
        u = frontier[int(rng.integers(len(frontier)))]
        nbrs = []
        for eid in geom.incident[u]:
            e = geom.edges[eid]
            w = e.v if e.u == u else e.u
            if w not in chosen:
                nbrs.append(w)
        if not nbrs:
            frontier.remove(u)
            continue
        w = nbrs[int(rng.integers(len(nbrs)))]
        chosen.add(w)
        frontier.append(w)
    return tuple(sorted(chosen))


def _random_clamp(rng, vertices) -> Clamp:
    signs = [1] + [int(rng.integers(2)) * 2 - 1 for _ in vertices[1:]]
    return Clamp(vertices, signs)


def _run_property_suite(cfg: ExperimentConfig, i: int) -> dict:
    geom = build_box(cfg.width, cfg.height)
    dual = build_dual(cfg.width, cfg.height)
    J = sample_couplings(geom, cfg.dist, cfg.master_seed, i)
    rng = _sample_rng(cfg, i, tag=5)
    checks = {}

    gsp = solve(geom, J)
    if geom.n_vertices <= 20:
        oracle = brute_force(geom, J)
        checks["oracle_equivalence"] = (gsp.same_pair(oracle)
                                        and abs(gsp.energy - oracle.energy)
                                        <= 1e-12 * (1 + abs(gsp.energy)))
    report = verify_gsp(geom, dual, J, gsp, cfg.subset_budget, cfg.dual_budget)
    checks["gsp_verified"] = report.passed

    # single-bond critical structure
    b = int(rng.integers(geom.n_edges))
    c_val = exc.critical_value(geom, J, b)
    c_repl = exc.critical_value(
        geom, J.with_value(b, float(rng.normal() * 3.0)), b)
    checks["critical_value_jb_free"] = abs(c_val - c_repl) <= 1e-12
    plus, minus = exc.b_excited_states(geom, J, b)
    above = solve(geom, J.with_value(b, c_val + 1e-6))
    below = solve(geom, J.with_value(b, c_val - 1e-6))
    checks["gsp_selection"] = above.same_pair(plus) and below.same_pair(minus)

    # exterior energy difference properties on a random small set
    a_set = _connected_random_set(geom, rng, 2 + int(rng.integers(3)))
    cl1, cl2, cl3 = (_random_clamp(rng, a_set) for _ in range(3))
    r12 = exc.excitation(geom, J, a_set, cl1, cl2)
    r23 = exc.excitation(geom, J, a_set, cl2, cl3)
    r13 = exc.excitation(geom, J, a_set, cl1, cl3)
    checks["additivity"] = abs(r12.delta_e_ext + r23.delta_e_ext
                               - r13.delta_e_ext) <= cfg.tol
    r21 = exc.excitation(geom, J, a_set, cl2, cl1)
    checks["antisymmetry"] = abs(r12.delta_e_ext + r21.delta_e_ext) <= cfg.tol
    inner = exc.interior_edges(geom, a_set)
    J_re = J.with_values({eid: float(rng.normal() * 2.0) for eid in inner})
    r12b = exc.excitation(geom, J_re, a_set, cl1, cl2)
    checks["interior_independence"] = (
        abs(r12.delta_e_ext - r12b.delta_e_ext) <= cfg.tol
        and r12.state_a.same_pair(r12b.state_a)
        and r12.state_b.same_pair(r12b.state_b))
    clamped_report = verify_gsp(geom, dual, J, r12.state_a,
                                cfg.subset_budget, cfg.dual_budget,
                                exclude=a_set)
    checks["clamped_gsp_off_A"] = clamped_report.passed

    # super-satisfaction forces the edge in every ground state
    f = int(rng.integers(geom.n_edges))
    s = int(rng.integers(2)) * 2 - 1
    J_ss = super_satisfy(J, f, s)
    checks["supersatisfied_strict"] = (abs(J_ss.value(f))
                                       > supersatisfied_threshold(J_ss, f))
    forced = solve(geom, J_ss)
    checks["supersatisfy_forces_sign"] = forced.edge_product(f) == s
    fe = geom.edges[f]
    probes = [e.id for e in geom.edges
              if e.id != f and not {e.u, e.v} & {fe.u, fe.v}]
    rng.shuffle(probes)
    ok = True
    for p in probes[:max(1, cfg.probes)]:
        contour = exc.critical_contour(geom, dual, J_ss, p)
        ok = ok and f not in contour.edge_ids
    checks["supersatisfied_not_in_contours"] = ok

    # interface sanity
    checks["self_interface_empty"] = \
        wl.interface(geom, dual, J, gsp, gsp).is_empty()
    sa, sb, sc = (np.where(rng.integers(2, size=geom.n_vertices) > 0, 1, -1)
                  .astype(np.int8) for _ in range(3))
    iab = wl.interface(geom, dual, J, sa, sb).edge_ids
    ibc = wl.interface(geom, dual, J, sb, sc).edge_ids
    iac = wl.interface(geom, dual, J, sa, sc).edge_ids
    checks["interface_triangle"] = iac <= (iab | ibc)

    for name, passed in checks.items():
        _hard(passed, f"property {name} failed", cfg, i)
    return {"sample": i, **{k: bool(v) for k, v in checks.items()}}


_RUNNERS = {
    "solve": _run_solve,
    "flip_sweep": _run_flip_sweep,
    "two_bond_map": _run_two_bond,
    "contour_stats": _run_contour_stats,
    "wall_stats": _run_wall_stats,
    "convergence": _run_convergence,
    "uniqueness_probe": _run_uniqueness,
    "property_suite": _run_property_suite,
}


# --------------------------------------------------------------------------
# aggregation


def _mean_se(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    if len(arr) < 2:
        return mean, 0.0
    return mean, float(arr.std(ddof=1) / math.sqrt(len(arr)))


def _aggregate(cfg: ExperimentConfig, records: list[dict]) -> tuple[dict, list]:
    aggregates: dict = {"n_samples": len(records)}
    properties: list[dict] = []
    if cfg.kind == "solve":
        mean, se = _mean_se([r["energy"] for r in records])
        aggregates["energy_mean"] = mean
        aggregates["energy_se"] = se
        properties.append({"name": "gsp_verified", "passed": True,
                           "detail": "hard per-sample"})
    elif cfg.kind == "flip_sweep":
        mean, se = _mean_se([r["critical_value"] for r in records])
        aggregates["critical_value_mean"] = mean
        aggregates["critical_value_se"] = se
        properties.append({"name": "single_flip", "passed": True,
                           "detail": "hard per-sample"})
    elif cfg.kind == "two_bond_map":
        cases = {"cross": 0, "positive_diag": 0, "negative_diag": 0}
        for r in records:
            cases[r["case"]] += 1
        total = len(records)
        aggregates["case_frequencies"] = {k: v / total for k, v in cases.items()}
        aggregates["max_cross_dev"] = max(r["cross_dev"] for r in records)
        aggregates["max_consistency_err"] = max(r["consistency_err"]
                                                for r in records)
        aggregates["grid_mismatches"] = sum(r["mismatches"] for r in records)
        properties.append({"name": "two_bond_exact", "passed": True,
                           "detail": "hard per-sample"})
    elif cfg.kind == "contour_stats":
        mean, se = _mean_se([r["contour_size"] for r in records])
        aggregates["contour_size_mean"] = mean
        aggregates["contour_size_se"] = se
        aggregates["tethered_fraction"] = float(
            np.mean([1.0 if r["n_tethered"] else 0.0 for r in records]))
        properties.append({"name": "contour_structure", "passed": True,
                           "detail": "hard per-sample"})
    elif cfg.kind == "wall_stats":
        means = {}
        for n in cfg.n_list:
            for k in cfg.k_list:
                mean, se = _mean_se([r["counts"][f"{n},{k}"] for r in records])
                means[f"{n},{k}"] = {"mean": mean, "se": se}
        aggregates["counts"] = means
        splits = []
        n_bad = 0
        for k in cfg.k_list:
            for i1, n1 in enumerate(cfg.n_list):
                for n2 in cfg.n_list[i1:]:
                    if (n1 + n2) not in cfg.n_list:
                        continue
                    m12 = means[f"{n1 + n2},{k}"]
                    m1 = means[f"{n1},{k}"]
                    m2 = means[f"{n2},{k}"]
                    se_comb = math.sqrt(m12["se"] ** 2 + m1["se"] ** 2
                                        + m2["se"] ** 2)
                    excess = m12["mean"] - m1["mean"] - m2["mean"]
                    violated = excess > 2.0 * se_comb + 1e-12
                    n_bad += violated
                    splits.append({"k": k, "n1": n1, "n2": n2,
                                   "excess": excess, "se": se_comb,
                                   "z": excess / se_comb if se_comb > 0 else None,
                                   "violated": violated})
        aggregates["subadditivity"] = splits
        properties.append({"name": "wall_bound", "passed": True,
                           "detail": "hard per-sample"})
        properties.append({"name": "no_double_tether", "passed": True,
                           "detail": "hard per-sample"})
        properties.append({"name": "subadditivity_2sigma",
                           "passed": n_bad == 0,
                           "detail": f"{n_bad} of {len(splits)} splits beyond "
                                     "two combined standard errors"})
    elif cfg.kind == "convergence":
        pairs = []
        n_levels = len(cfg.n_list)
        for j in range(n_levels - 1):
            disagreements = sum(1 for r in records if not r["agrees"][j])
            freq = disagreements / len(records)
            se = math.sqrt(max(freq * (1 - freq), 0.0) / len(records))
            pairs.append({"n_lo": cfg.n_list[j], "n_hi": cfg.n_list[j + 1],
                          "disagreements": disagreements,
                          "frequency": freq, "stderr": se})
        aggregates["pairs"] = pairs
        aggregates["insufficient_levels"] = n_levels < 2
        mono = all(pairs[j]["frequency"] >= pairs[j + 1]["frequency"]
                   for j in range(len(pairs) - 1)) if len(pairs) > 1 else None
        aggregates["monotone_trend"] = mono
        properties.append({"name": "report_complete", "passed": True,
                           "detail": "diagnostic only"})
    elif cfg.kind == "uniqueness_probe":
        table = []
        for idx, (n_lo, n_hi) in enumerate(cfg.n_pairs):
            disagreements = sum(1 for r in records
                                if not r["pairs"][idx]["agree"])
            freq = disagreements / len(records)
            se = math.sqrt(max(freq * (1 - freq), 0.0) / len(records))
            table.append({"n_lo": n_lo, "n_hi": n_hi, "min_n": min(n_lo, n_hi),
                          "disagreements": disagreements,
                          "frequency": freq, "stderr": se})
        aggregates["pairs"] = sorted(table, key=lambda t: t["min_n"])
        properties.append({"name": "report_complete", "passed": True,
                           "detail": "diagnostic only"})
    elif cfg.kind == "property_suite":
        names = [k for k in records[0] if k != "sample"]
        for name in names:
            passed = all(r[name] for r in records)
            properties.append({"name": name, "passed": passed,
                               "detail": f"{len(records)} samples"})
        aggregates["all_properties_pass"] = all(p["passed"] for p in properties)
    return aggregates, properties


# --------------------------------------------------------------------------
# runner


@dataclass
class RunReport:
    config: dict
    records: list
    aggregates: dict
    properties: list
    wallclock_s: float
    content_hash: str
    summary_path: str | None = None
    records_path: str | None = None

    def summary_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION,
                "kind": self.config["kind"],
                "config": self.config,
                "n_samples": len(self.records),
                "aggregates": self.aggregates,
                "properties": self.properties,
                "content_hash": self.content_hash,
                "wallclock_s": self.wallclock_s}


def _sample_worker(payload):
    core, index = payload
    cfg = ExperimentConfig.from_dict(core)
    try:
        return index, "ok", _jsonable(_RUNNERS[cfg.kind](cfg, index))
    except HardAssertionFailure as exc_:
        return index, "hard_fail", {"message": str(exc_),
                                    "reproducer": exc_.reproducer}


def run(config: ExperimentConfig | dict) -> RunReport:
    """Execute the configured experiment and write its report files."""
    if isinstance(config, dict):
        cfg = ExperimentConfig.from_dict(config)
    else:
        cfg = config
        validate_config(cfg)
    start = time.monotonic()
    core = cfg.core_dict()
    payloads = [(core, i) for i in range(cfg.samples)]
    if cfg.parallel <= 1:
        raw = [_sample_worker(p) for p in payloads]
    else:
        chunk = max(1, cfg.samples // (4 * cfg.parallel))
        with ProcessPoolExecutor(max_workers=cfg.parallel) as pool:
            raw = list(pool.map(_sample_worker, payloads, chunksize=chunk))
    raw.sort(key=lambda t: t[0])
    for index, status, payload in raw:
        if status == "hard_fail":
            raise HardAssertionFailure(payload["message"],
                                       reproducer=payload["reproducer"])
    records = [payload for _, _, payload in raw]
    aggregates, properties = _aggregate(cfg, records)
    aggregates = _jsonable(aggregates)
    properties = _jsonable(properties)
    digest = hashlib.sha256(json.dumps(
        {"config": core, "records": records, "aggregates": aggregates,
         "properties": properties},
        sort_keys=True, separators=(",", ":"), allow_nan=False).encode()
    ).hexdigest()
    report = RunReport(core, records, aggregates, properties,
                       time.monotonic() - start, digest)
    if cfg.out:
        base = str(cfg.out)
        report.records_path = base + ".records.jsonl"
        report.summary_path = base + ".summary.json"
        with open(report.records_path, "w") as fh:
            for rec in records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        with open(report.summary_path, "w") as fh:
            json.dump(report.summary_dict(), fh, sort_keys=True, indent=1)
            fh.write("\n")
    return report


def run_convergence(window_width: int, window_height: int, n_list,
                    samples: int, master_seed: int, **kw) -> RunReport:
    """Window-restricted GSP agreement across a nested-volume ladder."""
    return run(dict(kind="convergence", window_width=window_width,
                    window_height=window_height, n_list=list(n_list),
                    samples=samples, master_seed=master_seed, **kw))


def run_wall_stats(width: int, height: int, n_list, k_list, samples: int,
                   master_seed: int, proxy: str = "excited_pair",
                   **kw) -> RunReport:
    """Tethered-wall counts, hard bound checks, and subadditivity report."""
    return run(dict(kind="wall_stats", width=width, height=height,
                    n_list=list(n_list), k_list=list(k_list), samples=samples,
                    master_seed=master_seed, proxy=proxy, **kw))


def run_two_bond_map(width: int, height: int, samples: int, master_seed: int,
                     edge=None, edge2=None, **kw) -> RunReport:
    """Two-coupling critical sets with grid-sweep and consistency checks."""
    cfg = dict(kind="two_bond_map", width=width, height=height,
               samples=samples, master_seed=master_seed, **kw)
    if edge is not None:
        cfg["edge"] = edge
    if edge2 is not None:
        cfg["edge2"] = edge2
    return run(cfg)


def run_uniqueness_probe(window_width: int, window_height: int, n_pairs,
                         samples: int, master_seed: int, **kw) -> RunReport:
    """Cross-volume window disagreement frequencies."""
    return run(dict(kind="uniqueness_probe", window_width=window_width,
                    window_height=window_height,
                    n_pairs=[list(p) for p in n_pairs], samples=samples,
                    master_seed=master_seed, **kw))


def validate_summary(summary: dict) -> list[str]:
    """Schema check for a summary document; returns a list of problems."""
    problems = []

    def need(key, types):
        if key not in summary:
            problems.append(f"missing key {key}")
            return False
        if not isinstance(summary[key], types):
            problems.append(f"key {key} has wrong type")
            return False
        return True

    if need("schema_version", int) and summary["schema_version"] != SCHEMA_VERSION:
        problems.append("wrong schema_version")
    if need("kind", str) and summary["kind"] not in EXPERIMENT_KINDS:
        problems.append("unknown kind")
    need("config", dict)
    if need("n_samples", int) and summary["n_samples"] < 1:
        problems.append("n_samples must be >= 1")
    need("aggregates", dict)
    if need("properties", list):
        for p in summary["properties"]:
            if not isinstance(p, dict) or "name" not in p or "passed" not in p:
                problems.append(f"malformed property entry {p!r}")
    if need("content_hash", str) and len(summary["content_hash"]) != 64:
        problems.append("content_hash must be 64 hex chars")
    need("wallclock_s", (int, float))
    if summary.get("kind") in ("convergence", "uniqueness_probe"):
        agg = summary.get("aggregates", {})
        if "pairs" not in agg:
            problems.append("missing pairs table")
        else:
            for row in agg["pairs"]:
                for key in ("n_lo", "n_hi", "disagreements", "frequency",
                            "stderr"):
                    if key not in row:
                        problems.append(f"pairs row missing {key}")
    return problems
