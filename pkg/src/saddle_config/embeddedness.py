"""Embeddedness of the Scherk ends, decided tier by tier.

Rays are labelled anticlockwise by direction.  Parallel rays with
direction ``d`` are ordered by their offset ``Im(p conj(d))`` (the
position of their origin ``p`` measured in the direction ``i d``), and
rays leaving one vertex in the same direction by the rotation.  For an
adjacent parallel pair ``(r, r')`` the ends move apart when the angle of
``r'`` ends up larger than that of ``r``.

Tiers:

1. no parallel rays at all;
2. first order, the ray part of ``xi + zeta_dot``;
3. the analytic solution ``chi~(eps)`` at a few probe values of eps;
4. the flat correction ``zeta_hat``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NotLineArrangement, NotRigid, PhaseNotBalanced
from .horizontal import (
    NEWTON_TOL,
    ContinuationResult,
    continuation_solve,
    deformation_space,
    is_balanced,
    solve_zeta_dot,
    solve_zeta_hat,
    u_of_chi,
)
from .model import ANGLE_TOL, TWO_PI, Configuration, DeformationVector, GeometricGraph, wrap_pi
from .vertical import K_values, is_balanced_phase, vertical_rigidity

DEFAULT_PROBES = (0.08, 0.04, 0.02)
FIRST_ORDER_TOL = 1e-9
FLAT_TOL = 1e-10
TAYLOR_MARGIN = 10 * NEWTON_TOL
FLAT_EXPONENT_LIMIT = 300.0


class Tier:
    DISTINCT_RAYS = "DistinctRays"
    FIRST_ORDER = "FirstOrder"
    TAYLOR = "Taylor"
    FLAT_ORDER = "FlatOrder"


class Outcome:
    EMBEDDED = "Embedded"
    NOT_EMBEDDED = "NotEmbedded"
    INCONCLUSIVE = "Inconclusive"


# ---------------------------------------------------------------------------
# ray order
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RayOrder:
    labels: tuple[int, ...]  # ray half-edges, label r is labels[r - 1]
    groups: tuple[tuple[int, ...], ...]  # parallel groups in label order
    pairs: tuple[tuple[int, int], ...]  # adjacent parallel pairs (r, r')
    offset: float  # rotation making the smallest angle 0

    def label_of(self, h: int) -> int:
        return self.labels.index(h) + 1


def _same_direction(a: float, b: float) -> bool:
    return abs(wrap_pi(a - b)) < ANGLE_TOL


def _rotation_position(graph: GeometricGraph, group: Sequence[int]) -> dict[int, int]:
    """Anticlockwise position of same-vertex parallel rays, read off the rotation."""
    out = {}
    by_vertex: dict[int, list[int]] = {}
    for r in group:
        by_vertex.setdefault(int(graph.vertex_of[r]), []).append(r)
    for v, rs in by_vertex.items():
        if len(rs) == 1:
            out[rs[0]] = 0
            continue
        t = graph.half_edge_theta[rs[0]]
        hs = graph.vertices[v]
        start = next((h for h in hs if not _same_direction(graph.half_edge_theta[h], t)), hs[0])
        h, i = graph.sigma[start], 0
        while h != start:
            if h in rs:
                out[h] = i
                i += 1
            h = graph.sigma[h]
    return out


def ray_order(graph: GeometricGraph) -> RayOrder:
    rays = [int(r) for r in graph.rays]
    if not rays:
        return RayOrder((), (), (), 0.0)
    theta = {r: float(graph.half_edge_theta[r]) for r in rays}
    # group by direction, merging across the 0 / 2 pi seam
    srt = sorted(rays, key=lambda r: theta[r])
    groups: list[list[int]] = [[srt[0]]]
    for r in srt[1:]:
        if _same_direction(theta[r], theta[groups[-1][0]]):
            groups[-1].append(r)
        else:
            groups.append([r])
    if len(groups) > 1 and _same_direction(theta[groups[-1][0]], theta[groups[0][0]]):
        groups[0] = groups.pop() + groups[0]
    offset = theta[groups[0][0]]

    ordered = []
    for grp in groups:
        d = complex(math.cos(theta[grp[0]]), math.sin(theta[grp[0]]))
        rot = _rotation_position(graph, grp)
        key = {}
        for r in grp:
            p = graph.positions[graph.vertex_of[r]]
            shift = (p * d.conjugate()).imag
            key[r] = (round(shift, 9), rot[r])
        ordered.append(tuple(sorted(grp, key=lambda r: key[r])))
    labels = tuple(r for grp in ordered for r in grp)
    pairs = tuple((grp[i], grp[i + 1]) for grp in ordered for i in range(len(grp) - 1))
    return RayOrder(labels, tuple(ordered), pairs, offset)


# ---------------------------------------------------------------------------
# line arrangements
# ---------------------------------------------------------------------------

def _opposite(graph: GeometricGraph, h: int) -> int:
    return graph.sigma[graph.sigma[h]]


def detect_line_arrangement(graph: GeometricGraph) -> bool:
    """Every vertex is 4-valent with two straight crossings and every line ends in two rays."""
    for v, hs in enumerate(graph.vertices):
        if len(hs) != 4:
            return False
        for h in hs:
            d = graph.half_edge_theta[_opposite(graph, h)] - graph.half_edge_theta[h] - math.pi
            if abs(wrap_pi(d)) > ANGLE_TOL:
                return False
    seen: set[int] = set()
    for r in graph.rays:
        h = _opposite(graph, int(r))
        while graph.iota[h] != h:
            seen.add(int(graph.edge_of[h]))
            h = _opposite(graph, graph.iota[h])
    return len(seen) == graph.n_edges


def half_edge_angles(graph: GeometricGraph, chi: DeformationVector) -> np.ndarray:
    """Direction angle of every half-edge at the deformation point ``chi``."""
    return np.angle(u_of_chi(graph, chi))


def lemma_lines_residual(graph: GeometricGraph, theta) -> float:
    """max |theta_{varsigma^2(h)} - theta_h - pi| (mod 2 pi) over half-edges."""
    if not detect_line_arrangement(graph):
        raise NotLineArrangement("graph is not a simple line arrangement")
    theta = np.asarray(theta, dtype=float)
    worst = 0.0
    for h in range(graph.n_half_edges):
        worst = max(worst, abs(float(wrap_pi(theta[_opposite(graph, h)] - theta[h] - math.pi))))
    return worst


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairEvidence:
    pair: tuple[int, int]  # ray half-edges (r, r') in label order
    labels: tuple[int, int]
    tier: str
    separation: float  # angle of r' minus angle of r at the deciding order
    resolution: str  # "outward", "inward" or "tied"

    def to_dict(self) -> dict:
        return {"pair": list(self.pair), "labels": list(self.labels), "tier": self.tier,
                "separation": self.separation, "resolution": self.resolution}


@dataclass(frozen=True)
class EmbeddednessVerdict:
    tier: str
    outcome: str
    evidence: tuple[PairEvidence, ...]
    heuristic: bool = False
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"tier": self.tier, "outcome": self.outcome, "heuristic": self.heuristic,
                "evidence": [e.to_dict() for e in self.evidence], "notes": list(self.notes)}


def _resolve(sep: float, tol: float) -> str:
    if sep > tol:
        return "outward"
    if sep < -tol:
        return "inward"
    return "tied"


def _ray_values(graph: GeometricGraph, theta: np.ndarray, r: int) -> float:
    return float(theta[graph.ray_index[r]])


def _finish(tier: str, decided: dict, pending: list, order: RayOrder, seps: dict,
            heuristic: bool = False, notes: Sequence[str] = ()) -> EmbeddednessVerdict | None:
    """Verdict once every pair is decided or one points inward; ``None`` to continue."""
    inward = any(res == "inward" for _, res in decided.values())
    if not inward and pending and tier != Tier.FLAT_ORDER:
        return None
    evidence = []
    for p in order.pairs:
        labels = (order.label_of(p[0]), order.label_of(p[1]))
        if p in decided:
            t, res = decided[p]
            evidence.append(PairEvidence(p, labels, t, seps[p], res))
        else:
            evidence.append(PairEvidence(p, labels, tier, seps.get(p, 0.0), "tied"))
    notes = list(notes)
    if inward:
        outcome = Outcome.NOT_EMBEDDED
        notes.append("an adjacent parallel pair bends inward, so the ends cross "
                     "(as for two towers glued in opposite phases)")
    elif pending:
        outcome = Outcome.INCONCLUSIVE
    else:
        outcome = Outcome.EMBEDDED
    return EmbeddednessVerdict(tier, outcome, tuple(evidence), heuristic, tuple(notes))


def classify(config: Configuration,
             xi_fn: Callable[[float], DeformationVector] | None = None,
             eps_probe: Sequence[float] = DEFAULT_PROBES) -> EmbeddednessVerdict:
    g = config.graph
    order = ray_order(g)
    if not order.pairs:
        return EmbeddednessVerdict(Tier.DISTINCT_RAYS, Outcome.EMBEDDED, ())

    if not is_balanced(g):
        raise NotRigid("graph is not balanced")
    space = deformation_space(config)
    if not space.rigid:
        raise NotRigid(f"graph is not rigid (dim D = {space.dim}, expected {g.n_rays - 2})")
    zeta_dot = solve_zeta_dot(config, space).vector
    chi_dot = config.xi + zeta_dot
    K = K_values(config, chi_dot)
    if not is_balanced_phase(config, config.phase, K):
        raise PhaseNotBalanced("phase function is not balanced")
    if not vertical_rigidity(config, config.phase, K).is_rigid:
        raise NotRigid("phase function is not vertically rigid")

    decided: dict[tuple[int, int], tuple[str, str]] = {}
    seps: dict[tuple[int, int], float] = {}

    # tier 2: first order
    pending = []
    for p in order.pairs:
        sep = _ray_values(g, chi_dot.theta, p[1]) - _ray_values(g, chi_dot.theta, p[0])
        seps[p] = sep
        res = _resolve(sep, FIRST_ORDER_TOL)
        if res == "tied":
            pending.append(p)
        else:
            decided[p] = (Tier.FIRST_ORDER, res)
    v = _finish(Tier.FIRST_ORDER, decided, pending, order, seps)
    if v is not None:
        return v

    # tier 3: analytic solution at probe values of eps
    runs: list[ContinuationResult] = [continuation_solve(config, eps, xi_fn, space=space)
                                      for eps in eps_probe]
    still = []
    for p in pending:
        diffs = [float(wrap_pi(_ray_values(g, run.chi.theta, p[1]) - _ray_values(g, run.chi.theta, p[0])))
                 for run in runs]
        signs = {int(np.sign(d)) if abs(d) >= TAYLOR_MARGIN else 0 for d in diffs}
        if len(signs) == 1 and 0 not in signs:
            seps[p] = diffs[-1]
            decided[p] = (Tier.TAYLOR, "outward" if signs.pop() > 0 else "inward")
        else:
            seps[p] = diffs[-1]
            still.append(p)
    v = _finish(Tier.TAYLOR, decided, still, order, seps)
    if v is not None:
        return v

    # tier 4: flat correction
    line = detect_line_arrangement(g)
    notes = [] if line else ["graph is not a line arrangement; flat-order comparison is heuristic"]
    zeta_hat = solve_zeta_hat(config, K, space).vector
    pending = []
    for p in still:
        sep = _ray_values(g, zeta_hat.theta, p[1]) - _ray_values(g, zeta_hat.theta, p[0])
        seps[p] = sep
        res = _resolve(sep, FLAT_TOL)
        if res == "tied":
            pending.append(p)
        else:
            decided[p] = (Tier.FLAT_ORDER, res)
    return _finish(Tier.FLAT_ORDER, decided, pending, order, seps, heuristic=not line, notes=notes)


# ---------------------------------------------------------------------------
# deformed graph
# ---------------------------------------------------------------------------

def tau(eps: float, l_min: float) -> float:
    """exp(-l_min / eps^2), reported as 0 once the exponent passes the underflow limit."""
    if eps <= 0:
        return 0.0
    a = l_min / (eps * eps)
    return 0.0 if a > FLAT_EXPONENT_LIMIT else math.exp(-a)


@dataclass(frozen=True, eq=False)
class DeformedGraph:
    eps: float
    positions: np.ndarray
    ray_angles: np.ndarray
    chi: DeformationVector
    tau: float
    notes: tuple[str, ...] = ()


def positions_from_edges(graph: GeometricGraph, x: np.ndarray, anchor: int = 0) -> np.ndarray:
    """Integrate edge vectors from ``anchor`` (kept at its original position)."""
    pos = np.full(graph.n_vertices, np.nan, dtype=complex)
    pos[anchor] = graph.positions[anchor]
    stack = [anchor]
    adj: dict[int, list[tuple[int, complex]]] = {v: [] for v in range(graph.n_vertices)}
    for e in range(graph.n_edges):
        a, b = int(graph.edge_tail[e]), int(graph.edge_head[e])
        adj[a].append((b, x[e]))
        adj[b].append((a, -x[e]))
    while stack:
        v = stack.pop()
        for w, d in adj[v]:
            if np.isnan(pos[w]):
                pos[w] = pos[v] + d
                stack.append(w)
    return pos


def deformed_graph(config: Configuration, eps: float,
                   xi_fn: Callable[[float], DeformationVector] | None = None) -> DeformedGraph:
    """chi(eps) = chi~(eps) + tau(eps) zeta_hat as vertex positions and ray angles.

    Positions are integrated along a spanning tree from vertex 0.  When
    mu forces nonzero periods the edges off the tree do not close up
    exactly; the gap is the prescribed period, of order eps^2.
    """
    g = config.graph
    if eps == 0:
        return DeformedGraph(0.0, np.array(g.positions), np.array(g.ray_theta),
                             DeformationVector.center(g), 0.0)
    space = deformation_space(config)
    run = continuation_solve(config, eps, xi_fn, space=space)
    notes = []
    t = 0.0
    if g.n_edges:
        lmin = float(g.lengths.min())
        t = tau(eps, lmin)
        if t == 0.0:
            notes.append(f"flat term below double precision (l_min/eps^2 = {lmin / eps**2:.1f})")
    chi = run.chi
    if t > 0:
        zd = solve_zeta_dot(config, space).vector
        K = K_values(config, config.xi + zd)
        chi = chi + t * solve_zeta_hat(config, K, space).vector
    pos = positions_from_edges(g, chi.x)
    return DeformedGraph(float(eps), pos, np.array(chi.theta), chi, t, tuple(notes))


__all__ = [
    "RayOrder", "PairEvidence", "EmbeddednessVerdict", "Tier", "Outcome", "ray_order",
    "detect_line_arrangement", "lemma_lines_residual", "half_edge_angles", "classify",
    "tau", "deformed_graph", "DeformedGraph", "positions_from_edges", "TWO_PI",
]
