"""Consistency checking on the cell grid.

The main entry points are :func:`solve` (backtracking search with forward
checking), :func:`brute_force_solve` (an independent enumeration oracle),
:func:`feasible_directions` / :func:`classify_query` (answer-level analysis
of a query pair) and the constraint-tightness calculators.

Search determinism is part of the contract: variables are picked by highest
degree among unassigned neighbours, then smallest live domain, then smallest
variable index; values are tried in row-major cell order.  Domains are kept
as integer bitmasks (bit ``row * s + col``), which keeps the inner loop at
big-integer AND speed and makes 9-direction probing cheap enough to run on
every generated instance.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .calculus import (
    Band,
    DIRECTION_ORDER,
    Direction9,
    DistanceBand,
    DistanceScheme,
    GridCell,
    Region9,
    Relation,
    TopoWall,
    direction_holds_for_cells,
    distance_band_between_cells,
    region_holds_for_cell,
    relation_token,
    topo_holds_for_cell,
)
from .network import Binary, ConstraintNetwork


class Verdict(Enum):
    SAT = "Sat"
    UNSAT = "Unsat"


class CountClass(Enum):
    NO = "No"
    SINGLE = "Single"
    MULTIPLE = "Multiple"


@dataclass
class SolveStats:
    nodes: int = 0        # tentative assignments tried
    backtracks: int = 0   # tentative assignments retracted
    elapsed: float = 0.0  # wall-clock seconds around the search only

    def merged(self, other: "SolveStats") -> "SolveStats":
        return SolveStats(
            nodes=self.nodes + other.nodes,
            backtracks=self.backtracks + other.backtracks,
            elapsed=self.elapsed + other.elapsed,
        )


@dataclass
class SolveOutcome:
    verdict: Verdict
    n_solutions: int
    exhausted: bool
    first_solution: dict[str, GridCell] | None
    stats: SolveStats

    @property
    def count_class(self) -> CountClass | None:
        """Assignment-level solution class.

        ``None`` when the cap stopped the search at a single solution, in
        which case one vs many is genuinely undecided; callers that need the
        distinction should search with a cap of at least 2.
        """
        if self.verdict is Verdict.UNSAT:
            return CountClass.NO
        if self.n_solutions == 1 and self.exhausted:
            return CountClass.SINGLE
        if self.n_solutions >= 2:
            return CountClass.MULTIPLE
        return None


class InstanceTooLarge(Exception):
    """Raised when the brute-force oracle would enumerate too many states."""


# ---------------------------------------------------------------------------
# predicate evaluation on single cells / cell pairs


def check_binary(
    rel: Relation, cell_a: GridCell, cell_b: GridCell, s: int, w: float = 12.0
) -> bool:
    """Does ``(cell_a, rel, cell_b)`` hold on an s-by-s grid of width ``w``?

    Distance bands compare cell centres ((i + ½)·w/s) against thresholds
    that are themselves proportional to ``w``, so the verdict is independent
    of ``w``; the parameter is accepted for interface completeness.
    """
    if isinstance(rel, Direction9):
        return direction_holds_for_cells(rel, cell_a, cell_b)
    if isinstance(rel, DistanceBand):
        return distance_band_between_cells(cell_a, cell_b, s, rel.scheme) == rel
    raise TypeError(f"not a binary relation: {rel!r}")


def check_unary(rel: Relation, cell: GridCell, s: int) -> bool:
    if isinstance(rel, Region9):
        return region_holds_for_cell(rel, cell, s)
    if isinstance(rel, TopoWall):
        return topo_holds_for_cell(rel, cell, s)
    raise TypeError(f"not a unary relation: {rel!r}")


# ---------------------------------------------------------------------------
# cached bitmask tables

_unary_mask_cache: dict[tuple[str, int], int] = {}
_binary_mask_cache: dict[tuple[str, int], list[int]] = {}


def _unary_mask(rel: Relation, s: int) -> int:
    key = (relation_token(rel), s)
    mask = _unary_mask_cache.get(key)
    if mask is None:
        mask = 0
        for idx in range(s * s):
            if check_unary(rel, GridCell(idx % s, idx // s), s):
                mask |= 1 << idx
        _unary_mask_cache[key] = mask
    return mask


def _partner_masks(rel: Relation, s: int) -> list[int]:
    """``masks[cb]`` = cells ``ca`` such that ``(ca, rel, cb)`` holds."""
    key = (relation_token(rel), s)
    masks = _binary_mask_cache.get(key)
    if masks is None:
        d = s * s
        cells = [GridCell(i % s, i // s) for i in range(d)]
        masks = [0] * d
        for cb in range(d):
            m = 0
            for ca in range(d):
                if check_binary(rel, cells[ca], cells[cb], s):
                    m |= 1 << ca
            masks[cb] = m
        _binary_mask_cache[key] = masks
    return masks


def _inverse_rel(rel: Relation) -> Relation:
    from .calculus import inverse_direction

    if isinstance(rel, Direction9):
        return inverse_direction(rel)
    return rel  # distance bands are symmetric


# ---------------------------------------------------------------------------
# unary propagation


def propagate_unary(network: ConstraintNetwork) -> dict[str, frozenset[GridCell]]:
    """Per-variable live cells after applying all unary constraints.

    A variable with no unary constraints keeps the full grid.  Empty sets are
    returned as-is; :func:`solve` treats them as an immediate Unsat.
    """
    masks = _live_masks(network)
    s = network.s
    out: dict[str, frozenset[GridCell]] = {}
    for name, mask in zip(network.variables, masks):
        cells = frozenset(
            GridCell(i % s, i // s) for i in range(s * s) if mask >> i & 1
        )
        out[name] = cells
    return out


def _live_masks(network: ConstraintNetwork) -> list[int]:
    full = (1 << network.d) - 1
    live = [full] * len(network.variables)
    for c in network.unary:
        vi = network.index_of(c.obj)
        live[vi] &= _unary_mask(c.rel, network.s)
    return live


def _iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# ---------------------------------------------------------------------------
# backtracking search


def solve(network: ConstraintNetwork, solution_cap: int | None = 2) -> SolveOutcome:
    """Search for grid assignments satisfying every constraint.

    ``solution_cap`` bounds how many solutions are counted before stopping;
    ``None`` lifts the cap, producing an exact count.  The first solution
    found (under the fixed orderings) is reported whenever one exists.
    """
    if solution_cap is not None and solution_cap < 1:
        raise ValueError("solution_cap must be at least 1")
    n = len(network.variables)
    s = network.s
    stats = SolveStats()

    live = _live_masks(network)

    # adjacency: per variable, (neighbour index, masks giving this
    # variable's allowed cells for a fixed neighbour cell, and vice versa)
    adj: list[list[tuple[int, list[int], list[int]]]] = [[] for _ in range(n)]
    for c in network.binary:
        si = network.index_of(c.subject)
        ri = network.index_of(c.reference)
        subj_given_ref = _partner_masks(c.rel, s)
        ref_given_subj = _partner_masks(_inverse_rel(c.rel), s)
        adj[si].append((ri, subj_given_ref, ref_given_subj))
        adj[ri].append((si, ref_given_subj, subj_given_ref))

    start = time.perf_counter()

    if any(m == 0 for m in live):
        stats.elapsed = time.perf_counter() - start
        return SolveOutcome(Verdict.UNSAT, 0, True, None, stats)

    assigned = [-1] * n
    unassigned = set(range(n))
    found = 0
    first: list[int] | None = None
    exhausted = True

    def pick_variable() -> int:
        best = -1
        best_key: tuple[int, int, int] | None = None
        for v in unassigned:
            degree = sum(1 for (u, _, _) in adj[v] if u in unassigned)
            key = (-degree, live[v].bit_count(), v)
            if best_key is None or key < best_key:
                best_key = key
                best = v
        return best

    def search() -> bool:
        """Returns True when the cap was reached (stop everything)."""
        nonlocal found, first
        if not unassigned:
            found += 1
            if first is None:
                first = assigned.copy()
            return solution_cap is not None and found >= solution_cap
        v = pick_variable()
        unassigned.discard(v)
        saved = live[v]
        for cell in _iter_bits(saved):
            stats.nodes += 1
            assigned[v] = cell
            pruned: list[tuple[int, int]] = []
            ok = True
            for (u, _mine_given_theirs, theirs_given_mine) in adj[v]:
                if u not in unassigned:
                    continue
                new = live[u] & theirs_given_mine[cell]
                if new != live[u]:
                    pruned.append((u, live[u]))
                    live[u] = new
                if new == 0:
                    ok = False
                    break
            if ok:
                live[v] = 1 << cell
                if search():
                    return True
                live[v] = saved
            # reverse order: a neighbour constrained twice (direction and
            # distance on one pair) appears twice; the first snapshot must win
            for (u, old) in reversed(pruned):
                live[u] = old
            assigned[v] = -1
            stats.backtracks += 1
        unassigned.add(v)
        return False

    capped = search()
    exhausted = not capped
    stats.elapsed = time.perf_counter() - start

    if found == 0:
        return SolveOutcome(Verdict.UNSAT, 0, True, None, stats)
    first_solution = {
        network.variables[v]: GridCell(first[v] % s, first[v] // s) for v in range(n)
    }
    return SolveOutcome(Verdict.SAT, found, exhausted, first_solution, stats)


def brute_force_solve(network: ConstraintNetwork) -> SolveOutcome:
    """Count all solutions by plain enumeration.

    Deliberately naive: no propagation beyond unary filtering, no ordering
    heuristics; serves as the oracle the search is validated against.
    """
    n = len(network.variables)
    if network.d ** n > 10**7:
        raise InstanceTooLarge(f"{network.d}^{n} assignments exceed the oracle guard")
    s = network.s
    stats = SolveStats()
    start = time.perf_counter()

    domains: list[list[GridCell]] = []
    for name in network.variables:
        cells = [GridCell(i % s, i // s) for i in range(network.d)]
        for c in network.unary:
            if c.obj == name:
                cells = [cell for cell in cells if check_unary(c.rel, cell, s)]
        domains.append(cells)

    index = {name: i for i, name in enumerate(network.variables)}
    checks = [(index[c.subject], c.rel, index[c.reference]) for c in network.binary]

    found = 0
    first: tuple[GridCell, ...] | None = None
    for combo in itertools.product(*domains):
        stats.nodes += 1
        if all(check_binary(rel, combo[i], combo[j], s) for (i, rel, j) in checks):
            found += 1
            if first is None:
                first = combo
    stats.elapsed = time.perf_counter() - start
    if found == 0:
        return SolveOutcome(Verdict.UNSAT, 0, True, None, stats)
    return SolveOutcome(
        Verdict.SAT,
        found,
        True,
        dict(zip(network.variables, first)),
        stats,
    )


# ---------------------------------------------------------------------------
# query-level analysis


def probe_directions(
    network: ConstraintNetwork, query_pair: tuple[str, str]
) -> dict[Direction9, SolveOutcome]:
    """Consistency of each of the nine candidate directions for the pair."""
    subject, reference = query_pair
    out: dict[Direction9, SolveOutcome] = {}
    for d in DIRECTION_ORDER:
        probe = network.extended(Binary(subject, d, reference))
        out[d] = solve(probe, solution_cap=1)
    return out


def feasible_directions(
    network: ConstraintNetwork, query_pair: tuple[str, str]
) -> set[Direction9]:
    """Directions of subject relative to reference consistent with the network."""
    return {
        d
        for d, outcome in probe_directions(network, query_pair).items()
        if outcome.verdict is Verdict.SAT
    }


def classify_query(network: ConstraintNetwork, query_pair: tuple[str, str]) -> CountClass:
    """No solution / single feasible direction / multiple feasible directions."""
    base = solve(network, solution_cap=1)
    if base.verdict is Verdict.UNSAT:
        return CountClass.NO
    k = len(feasible_directions(network, query_pair))
    return CountClass.SINGLE if k == 1 else CountClass.MULTIPLE


# ---------------------------------------------------------------------------
# constraint tightness

#: Relation kinds the tightness report covers, in print order.
TIGHTNESS_KINDS: tuple[str, ...] = (
    ("InR",)
    + tuple(r.value for r in Region9)
    + ("TPP", "NTPP")
    + tuple(d.value for d in DIRECTION_ORDER)
    + ("close:D2", "far:D2", "close:D3", "medium:D3", "far:D3")
)


@dataclass(frozen=True)
class TightnessReport:
    kind: str
    d: int
    analytic: float
    empirical: float

    @property
    def abs_error(self) -> float:
        return abs(self.analytic - self.empirical)


def _square_distance_cdf(t: float) -> float:
    """P(distance <= t) for two independent uniform points in a unit square."""
    if t <= 0:
        return 0.0
    if t >= math.sqrt(2):
        return 1.0
    if t <= 1:
        return math.pi * t * t - (8.0 / 3.0) * t**3 + 0.5 * t**4
    a = math.sqrt(t * t - 1)
    return (
        1.0 / 3.0
        - 2.0 * t * t
        - 0.5 * t**4
        + (4.0 / 3.0) * (2.0 * t * t + 1.0) * a
        + 2.0 * t * t * (math.asin(1.0 / t) - math.acos(1.0 / t))
    )


def analytic_tightness(kind: str, d: int) -> Fraction | float:
    """Closed-form fraction of disallowed cells (unary) or cell pairs (binary).

    Exact rationals for containment, regions, wall topology, directions and
    overlap.  Distance bands use a circle-area approximation: the band disc
    radii (in index units, so a grid span of ``sqrt(d) - 1``) are averaged
    over wall-clipped placements of the central object, which keeps the
    estimate inside [0, 1] on every grid.
    """
    s = math.isqrt(d)
    if s * s != d or s % 3 != 0:
        raise ValueError("d must be a square with side divisible by 3")
    if kind == "InR":
        return Fraction(0)
    if kind in {r.value for r in Region9}:
        return Fraction(8, 9)
    if kind == "TPP":
        return Fraction((s - 2) ** 2, d)
    if kind == "NTPP":
        return Fraction(4 * (s - 1), d)
    if kind in ("N", "S", "E", "W"):
        return 1 - Fraction(s - 1, 2 * d)
    if kind in ("NE", "NW", "SE", "SW"):
        return 1 - Fraction(s - 1, 2 * s) ** 2
    if kind == "O":
        return 1 - Fraction(1, d)
    span = s - 1
    if kind in ("close:D2", "far:D2"):
        t1 = (span / 2) / span  # = 1/2: disc radius half the index span
        inside = _square_distance_cdf(t1)
        return 1.0 - inside if kind == "close:D2" else inside
    if kind in ("close:D3", "medium:D3", "far:D3"):
        t1 = (math.sqrt(2) * span / 3) / span
        t2 = (2 * math.sqrt(2) * span / 3) / span
        if kind == "close:D3":
            return 1.0 - _square_distance_cdf(t1)
        if kind == "medium:D3":
            return 1.0 - (_square_distance_cdf(t2) - _square_distance_cdf(t1))
        return _square_distance_cdf(t2)
    raise ValueError(f"unknown relation kind: {kind!r}")


def empirical_tightness(kind: str, d: int, w: float = 12.0) -> Fraction:
    """Exhaustively counted fraction of disallowed cells / cell pairs."""
    s = math.isqrt(d)
    if s * s != d or s % 3 != 0:
        raise ValueError("d must be a square with side divisible by 3")
    if d > 20736:
        raise InstanceTooLarge("empirical tightness guard: d too large")

    if kind == "InR":
        return Fraction(0)
    if kind in {r.value for r in Region9}:
        rel: Relation = Region9(kind)
        disallowed = sum(
            1 for i in range(d) if not check_unary(rel, GridCell(i % s, i // s), s)
        )
        return Fraction(disallowed, d)
    if kind in ("TPP", "NTPP"):
        rel = TopoWall(kind)
        disallowed = sum(
            1 for i in range(d) if not check_unary(rel, GridCell(i % s, i // s), s)
        )
        return Fraction(disallowed, d)

    # binary kinds: enumerate all d^2 (cell, cell) pairs with numpy
    cols = np.arange(d) % s
    rows = np.arange(d) // s
    allowed = 0
    if kind in {dd.value for dd in Direction9}:
        direction = Direction9(kind)
        want_sx, want_sy = _direction_signs(direction)
        for cb in range(d):
            sx = np.sign(cols - cols[cb])
            sy = np.sign(rows - rows[cb])
            allowed += int(np.count_nonzero((sx == want_sx) & (sy == want_sy)))
    else:
        band = None
        for scheme in DistanceScheme:
            for candidate in ("close", "medium", "far"):
                if kind == f"{candidate}:{scheme.value}":
                    band = DistanceBand(scheme, Band(candidate))
        if band is None:
            raise ValueError(f"unknown relation kind: {kind!r}")
        lo_sq, hi_sq = _band_bounds_index_sq(band, s)
        # exact float comparisons: integer squared distances against bounds
        # whose denominators are 1 or a power of two
        lo = None if lo_sq is None else float(lo_sq)
        hi = None if hi_sq is None else float(hi_sq)
        for cb in range(d):
            dist_sq = (cols - cols[cb]) ** 2 + (rows - rows[cb]) ** 2
            ok = dist_sq <= hi if hi is not None else np.ones(d, dtype=bool)
            if lo is not None:
                ok &= dist_sq > lo
            allowed += int(np.count_nonzero(ok))
    return Fraction(d * d - allowed, d * d)


def _direction_signs(direction: Direction9) -> tuple[int, int]:
    return {
        Direction9.N: (0, 1),
        Direction9.S: (0, -1),
        Direction9.E: (1, 0),
        Direction9.W: (-1, 0),
        Direction9.NE: (1, 1),
        Direction9.NW: (-1, 1),
        Direction9.SE: (1, -1),
        Direction9.SW: (-1, -1),
        Direction9.O: (0, 0),
    }[direction]


def _band_bounds_index_sq(band: DistanceBand, s: int) -> tuple[Fraction | None, Fraction | None]:
    """(exclusive lower, inclusive upper) squared index-distance bounds."""
    if band.scheme is DistanceScheme.D2:
        close_sq = Fraction(s * s, 4)
        return (None, close_sq) if band.band is Band.CLOSE else (close_sq, None)
    close_sq = Fraction(2 * s * s, 9)
    med_sq = Fraction(8 * s * s, 9)
    if band.band is Band.CLOSE:
        return (None, close_sq)
    if band.band is Band.MEDIUM:
        return (close_sq, med_sq)
    return (med_sq, None)


def tightness_table(d: int, w: float = 12.0) -> list[TightnessReport]:
    reports = []
    for kind in TIGHTNESS_KINDS:
        analytic = analytic_tightness(kind, d)
        empirical = empirical_tightness(kind, d, w)
        reports.append(TightnessReport(kind, d, float(analytic), float(empirical)))
    return reports
