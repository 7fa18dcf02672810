"""Combinatorial and geometric data model.

A graph is given by a pseudo rotation system (half-edges with an
involution ``iota`` whose fixed points are rays, and a rotation ``sigma``
whose orbits are vertices) together with vertex positions in the complex
plane and an angle for every ray.

Closed edges are stored once, through a representative half-edge (the
smaller index of the pair).  Antisymmetric functions are arrays indexed
by closed edge holding the value on the representative; the value on the
partner is the negation.  ``graph.edge_sign[h]`` gives the sign that
converts between the two.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    CoincidentVertices,
    EdgeInteriorOverlap,
    EulerViolation,
    InvariantViolation,
    LoopEdge,
    NotInvolution,
    NotTransitive,
    PhaseNotAntisymmetric,
    RotationMismatch,
    SchemaViolation,
    UpsilonNotPositive,
)

ANGLE_TOL = 1e-9
POS_TOL = 1e-9
TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Map an angle to [0, 2pi), snapping values within ANGLE_TOL of 2pi to 0."""
    a = math.fmod(a, TWO_PI)
    if a < 0:
        a += TWO_PI
    if a > TWO_PI - ANGLE_TOL:
        a = 0.0
    return a


def wrap_pi(a):
    """Map angles to (-pi, pi].  Values already in range are returned untouched."""
    a = np.asarray(a, dtype=float)
    out = np.where((a > -math.pi) & (a <= math.pi), a, math.pi - np.mod(math.pi - a, TWO_PI))
    return out if out.ndim else float(out)


def _cross(a: complex, b: complex) -> float:
    return a.real * b.imag - a.imag * b.real


# ---------------------------------------------------------------------------
# pseudo rotation system
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PseudoRotationSystem:
    """Half-edges ``0..n-1`` with involution ``iota`` and rotation ``sigma``."""

    iota: tuple[int, ...]
    sigma: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "iota", tuple(int(i) for i in self.iota))
        object.__setattr__(self, "sigma", tuple(int(s) for s in self.sigma))
        n = len(self.iota)
        if n == 0:
            raise SchemaViolation("a pseudo rotation system needs at least one half-edge")
        if len(self.sigma) != n:
            raise SchemaViolation("iota and sigma must have the same length")
        for name, perm in (("iota", self.iota), ("sigma", self.sigma)):
            if sorted(perm) != list(range(n)):
                raise SchemaViolation(f"{name} is not a permutation of 0..{n - 1}")
        for h in range(n):
            if self.iota[self.iota[h]] != h:
                raise NotInvolution(f"iota(iota({h})) = {self.iota[self.iota[h]]} != {h}")
        # transitivity of the group generated by iota and sigma
        seen = {0}
        todo = [0]
        while todo:
            h = todo.pop()
            for g in (self.iota[h], self.sigma[h]):
                if g not in seen:
                    seen.add(g)
                    todo.append(g)
        # orbits are finite, so closure under sigma gives closure under sigma^-1
        if len(seen) != n:
            raise NotTransitive(f"only {len(seen)} of {n} half-edges reachable from 0")

    @property
    def n(self) -> int:
        return len(self.iota)

    @cached_property
    def rays(self) -> tuple[int, ...]:
        return tuple(h for h in range(self.n) if self.iota[h] == h)

    @cached_property
    def closed_edges(self) -> tuple[int, ...]:
        """Representative half-edge of each closed edge, in increasing order."""
        return tuple(h for h in range(self.n) if self.iota[h] > h)

    @cached_property
    def vertices(self) -> tuple[tuple[int, ...], ...]:
        """Orbits of sigma, each listed in rotation order from its smallest element."""
        seen = set()
        orbits = []
        for h in range(self.n):
            if h in seen:
                continue
            orbit = [h]
            seen.add(h)
            g = self.sigma[h]
            while g != h:
                orbit.append(g)
                seen.add(g)
                g = self.sigma[g]
            orbits.append(tuple(orbit))
        return tuple(orbits)

    @cached_property
    def vertex_of(self) -> np.ndarray:
        out = np.empty(self.n, dtype=int)
        for i, orbit in enumerate(self.vertices):
            out[list(orbit)] = i
        out.flags.writeable = False
        return out

    @cached_property
    def edge_of(self) -> np.ndarray:
        """Closed-edge index of each half-edge, -1 on rays."""
        out = np.full(self.n, -1, dtype=int)
        for e, h in enumerate(self.closed_edges):
            out[h] = e
            out[self.iota[h]] = e
        out.flags.writeable = False
        return out

    @cached_property
    def edge_sign(self) -> np.ndarray:
        """+1 on representatives, -1 on their partners, 0 on rays."""
        out = np.zeros(self.n, dtype=int)
        for h in self.closed_edges:
            out[h] = 1
            out[self.iota[h]] = -1
        out.flags.writeable = False
        return out

    @cached_property
    def ray_index(self) -> np.ndarray:
        out = np.full(self.n, -1, dtype=int)
        for k, r in enumerate(self.rays):
            out[r] = k
        out.flags.writeable = False
        return out

    def degree(self, v: int) -> int:
        return len(self.vertices[v])

    def sigma_iota_orbits(self) -> list[tuple[int, ...]]:
        """All orbits of h -> sigma(iota(h))."""
        seen = set()
        orbits = []
        for h in range(self.n):
            if h in seen:
                continue
            orbit = [h]
            seen.add(h)
            g = self.sigma[self.iota[h]]
            while g != h:
                orbit.append(g)
                seen.add(g)
                g = self.sigma[self.iota[g]]
            orbits.append(tuple(orbit))
        return orbits


# ---------------------------------------------------------------------------
# geometric graph
# ---------------------------------------------------------------------------

class GeometricGraph:
    """A pseudo rotation system with a validated planar representation.

    Use :func:`build_graph` to construct one.  Instances are treated as
    immutable; all cached arrays are read-only.
    """

    def __init__(self, prs: PseudoRotationSystem, positions: np.ndarray, ray_angles: np.ndarray):
        self.prs = prs
        self.positions = positions
        self.ray_theta = ray_angles

        self.n_half_edges = prs.n
        self.n_vertices = len(prs.vertices)
        self.vertices = prs.vertices
        self.vertex_of = prs.vertex_of
        self.iota = prs.iota
        self.sigma = prs.sigma
        self.rays = np.array(prs.rays, dtype=int)
        self.closed_edges = np.array(prs.closed_edges, dtype=int)
        self.edge_of = prs.edge_of
        self.edge_sign = prs.edge_sign
        self.ray_index = prs.ray_index
        self.n_edges = len(self.closed_edges)
        self.n_rays = len(self.rays)

        partners = np.array([prs.iota[h] for h in self.closed_edges], dtype=int)
        self.edge_tail = self.vertex_of[self.closed_edges] if self.n_edges else np.zeros(0, int)
        self.edge_head = self.vertex_of[partners] if self.n_edges else np.zeros(0, int)
        self.x0 = positions[self.edge_head] - positions[self.edge_tail]
        self.lengths = np.abs(self.x0)
        with np.errstate(invalid="ignore", divide="ignore"):
            self.edge_u = self.x0 / self.lengths

        # per half-edge unit vectors and angles
        u = np.empty(prs.n, dtype=complex)
        theta = np.empty(prs.n, dtype=float)
        length = np.full(prs.n, np.nan)
        for h in range(prs.n):
            e = self.edge_of[h]
            if e >= 0:
                u[h] = self.edge_sign[h] * self.edge_u[e]
                length[h] = self.lengths[e]
                theta[h] = wrap_angle(math.atan2(u[h].imag, u[h].real))
            else:
                t = ray_angles[self.ray_index[h]]
                u[h] = complex(math.cos(t), math.sin(t))
                theta[h] = wrap_angle(t)
        self.half_edge_u = u
        self.half_edge_theta = theta
        self.half_edge_length = length
        for arr in (self.positions, self.ray_theta, self.x0, self.lengths, self.edge_u,
                    self.half_edge_u, self.half_edge_theta, self.half_edge_length):
            arr.flags.writeable = False

    # --- convenience -------------------------------------------------------

    def degree(self, v: int) -> int:
        return len(self.vertices[v])

    def is_ray(self, h: int) -> bool:
        return self.iota[h] == h

    @cached_property
    def face_cycles(self) -> tuple[tuple[int, ...], ...]:
        """Orbits of sigma*iota that avoid rays, each starting at its smallest half-edge."""
        out = []
        for orbit in self.prs.sigma_iota_orbits():
            if any(self.iota[h] == h for h in orbit):
                continue
            k = orbit.index(min(orbit))
            out.append(tuple(orbit[k:] + orbit[:k]))
        return tuple(out)

    @property
    def n_faces(self) -> int:
        return len(self.face_cycles)

    def euler_characteristic(self) -> int:
        """|V| - |E| + |R| + |F|, where |E| counts open and closed edges."""
        n_all_edges = self.n_edges + self.n_rays
        return self.n_vertices - n_all_edges + self.n_rays + self.n_faces

    def vertex_half_edges(self, v: int) -> tuple[int, ...]:
        return self.vertices[v]

    def __repr__(self) -> str:
        return (f"GeometricGraph(V={self.n_vertices}, closed={self.n_edges}, "
                f"rays={self.n_rays}, faces={self.n_faces})")


def _rotation_winding(angles: Sequence[float]) -> int:
    """Number of full turns made by walking the angles in the given cyclic order."""
    if len(angles) <= 1:
        return 0
    total = 0.0
    for a, b in zip(angles, list(angles[1:]) + [angles[0]]):
        total += wrap_angle(b - a)
    return int(round(total / TWO_PI))


def _check_rotation(graph: GeometricGraph) -> None:
    for v, orbit in enumerate(graph.vertices):
        angles = [graph.half_edge_theta[h] for h in orbit]
        all_equal = all(wrap_angle(a - angles[0]) == 0.0 for a in angles)
        expected = 0 if all_equal else 1
        if _rotation_winding(angles) != expected:
            raise RotationMismatch(
                f"sigma at vertex {v} does not list half-edges in anticlockwise order")


@dataclass(frozen=True)
class _Piece:
    edge: tuple  # ("closed", e) or ("ray", r)
    origin: complex
    direction: complex  # full segment vector, or unit vector for rays
    is_ray: bool
    ends: frozenset  # vertex indices at the ends


def _pieces(graph: GeometricGraph) -> list[_Piece]:
    out = []
    for e in range(graph.n_edges):
        a, b = int(graph.edge_tail[e]), int(graph.edge_head[e])
        out.append(_Piece(("closed", e), complex(graph.positions[a]), complex(graph.x0[e]),
                          False, frozenset((a, b))))
    for k, r in enumerate(graph.rays):
        v = int(graph.vertex_of[r])
        out.append(_Piece(("ray", k), complex(graph.positions[v]), complex(graph.half_edge_u[r]),
                          True, frozenset((v,))))
    return out


def _identical(p: _Piece, q: _Piece) -> bool:
    if p.is_ray != q.is_ray or p.ends != q.ends:
        return False
    if p.is_ray:
        return abs(_cross(p.direction, q.direction)) < ANGLE_TOL and \
            (p.direction * q.direction.conjugate()).real > 0
    return True


def _vertex_at(graph: GeometricGraph, z: complex) -> int | None:
    d = np.abs(graph.positions - z)
    k = int(np.argmin(d))
    return k if d[k] < 1e3 * POS_TOL else None


def _touch_ok(graph: GeometricGraph, p: _Piece, q: _Piece, z: complex) -> bool:
    v = _vertex_at(graph, z)
    return v is not None and v in p.ends and v in q.ends


def _conflict(graph: GeometricGraph, p: _Piece, q: _Piece) -> bool:
    if _identical(p, q):
        return False
    dp, dq = p.direction, q.direction
    tp = math.inf if p.is_ray else 1.0
    tq = math.inf if q.is_ray else 1.0
    sin = _cross(dp, dq) / (abs(dp) * abs(dq))
    w = q.origin - p.origin
    if abs(sin) > ANGLE_TOL:
        den = _cross(dp, dq)
        t = _cross(w, dq) / den
        s = _cross(w, dp) / den
        ep = POS_TOL / abs(dp)
        eq = POS_TOL / abs(dq)
        if -ep <= t <= tp + ep and -eq <= s <= tq + eq:
            return not _touch_ok(graph, p, q, p.origin + t * dp)
        return False
    # parallel: only collinear pieces can meet
    unit = dp / abs(dp)
    if abs(_cross(unit, w)) > POS_TOL:
        return False
    lo1, hi1 = 0.0, abs(dp) * tp
    a = (w * unit.conjugate()).real
    b = ((w + dq * (tq if not q.is_ray else 1.0)) * unit.conjugate()).real
    if q.is_ray:
        b = math.inf if (dq * unit.conjugate()).real > 0 else -math.inf
    lo2, hi2 = min(a, b), max(a, b)
    lo, hi = max(lo1, lo2), min(hi1, hi2)
    if hi - lo > POS_TOL:
        return True
    if hi - lo >= -POS_TOL:
        return not _touch_ok(graph, p, q, p.origin + lo * unit)
    return False


def _check_overlaps(graph: GeometricGraph) -> None:
    pieces = _pieces(graph)
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            if _conflict(graph, pieces[i], pieces[j]):
                raise EdgeInteriorOverlap(
                    f"images of {pieces[i].edge} and {pieces[j].edge} overlap")


def build_graph(prs: PseudoRotationSystem, positions, ray_angles) -> GeometricGraph:
    """Validate a geometric representation and return a :class:`GeometricGraph`.

    ``positions`` is a sequence (indexed like ``prs.vertices``) or mapping of
    vertex index to a complex number or ``(x, y)`` pair.  ``ray_angles``
    maps each ray half-edge to its direction in radians.
    """
    nv = len(prs.vertices)
    if isinstance(positions, Mapping):
        missing = set(range(nv)) - set(int(k) for k in positions)
        if missing:
            raise SchemaViolation(f"no position for vertices {sorted(missing)}")
        pos_list = [positions[k] for k in range(nv)]
    else:
        pos_list = list(positions)
        if len(pos_list) != nv:
            raise SchemaViolation(f"expected {nv} vertex positions, got {len(pos_list)}")
    pos = np.array([complex(*p) if isinstance(p, (tuple, list)) else complex(p) for p in pos_list])

    ray_angles = {int(k): float(v) for k, v in dict(ray_angles).items()}
    if set(ray_angles) != set(prs.rays):
        raise SchemaViolation(
            f"ray angles given for {sorted(ray_angles)}, rays are {list(prs.rays)}")
    theta = np.array([ray_angles[r] for r in prs.rays], dtype=float)
    if not np.all(np.isfinite(theta)) or not np.all(np.isfinite(pos)):
        raise SchemaViolation("non-finite coordinate")

    for h in prs.closed_edges:
        if prs.vertex_of[h] == prs.vertex_of[prs.iota[h]]:
            raise LoopEdge(f"half-edges {h} and {prs.iota[h]} share vertex {prs.vertex_of[h]}")
    for a in range(nv):
        for b in range(a + 1, nv):
            if abs(pos[a] - pos[b]) < POS_TOL:
                raise CoincidentVertices(f"vertices {a} and {b} share position {pos[a]}")

    graph = GeometricGraph(prs, pos, theta)
    _check_rotation(graph)
    _check_overlaps(graph)
    chi = graph.euler_characteristic()
    if chi != 1:
        raise EulerViolation(f"|V|-|E|+|R|+|F| = {chi}, expected 1")
    return graph


# ---------------------------------------------------------------------------
# orientation, vertex classes, parallelism
# ---------------------------------------------------------------------------

def orientation(graph: GeometricGraph) -> np.ndarray | None:
    """An orientation with sigma(varsigma(h)) = -sigma(h), or ``None``.

    Signs are propagated breadth-first over the constraint graph whose
    edges are ``h -- varsigma(h)`` and ``h -- iota(h)`` (closed only), each
    demanding opposite signs.
    """
    n = graph.n_half_edges
    sign = np.zeros(n, dtype=int)
    sigma_inv = [0] * n
    for h, g in enumerate(graph.sigma):
        sigma_inv[g] = h
    for start in range(n):
        if sign[start]:
            continue
        sign[start] = 1
        queue = deque([start])
        while queue:
            h = queue.popleft()
            # sigma^-1 as well, so the constraint graph is undirected
            nbrs = [graph.sigma[h], sigma_inv[h]]
            if graph.iota[h] != h:
                nbrs.append(graph.iota[h])
            for g in nbrs:
                if sign[g] == 0:
                    sign[g] = -sign[h]
                    queue.append(g)
                elif sign[g] == sign[h]:
                    return None
    return sign


class VertexClass:
    DEGENERATE = "degenerate"
    SPECIAL = "special"
    ORDINARY = "ordinary"


def _max_collinear(angles: Sequence[float]) -> int:
    mods = sorted(math.fmod(a, math.pi) for a in angles)
    best = 0
    for a in mods:
        count = sum(1 for b in mods
                    if min(abs(a - b), math.pi - abs(a - b)) < ANGLE_TOL)
        best = max(best, count)
    return best


def classify_vertex(graph: GeometricGraph, v: int) -> str:
    angles = [graph.half_edge_theta[h] for h in graph.vertices[v]]
    deg = len(angles)
    m = _max_collinear(angles)
    if m == deg:
        return VertexClass.DEGENERATE
    if deg >= 6 and m == deg - 2:
        return VertexClass.SPECIAL
    return VertexClass.ORDINARY


@dataclass(frozen=True)
class ParallelClasses:
    edge_classes: tuple[tuple[int, ...], ...]  # closed-edge indices sharing a segment
    ray_groups: tuple[tuple[int, ...], ...]  # ray half-edges sharing a direction
    ray_pairs: tuple[tuple[int, int], ...]  # all unordered parallel ray pairs

    @property
    def has_parallel_edges(self) -> bool:
        return any(len(c) > 1 for c in self.edge_classes)

    @property
    def has_parallel_rays(self) -> bool:
        return bool(self.ray_pairs)


def parallel_classes(graph: GeometricGraph) -> ParallelClasses:
    by_ends: dict[frozenset, list[int]] = {}
    for e in range(graph.n_edges):
        key = frozenset((int(graph.edge_tail[e]), int(graph.edge_head[e])))
        by_ends.setdefault(key, []).append(e)
    edge_classes = tuple(sorted(tuple(v) for v in by_ends.values()))

    groups: list[list[int]] = []
    for r in graph.rays:
        t = graph.half_edge_theta[r]
        for g in groups:
            if abs(wrap_pi(t - graph.half_edge_theta[g[0]])) < ANGLE_TOL:
                g.append(int(r))
                break
        else:
            groups.append([int(r)])
    ray_groups = tuple(tuple(g) for g in groups)
    pairs = tuple((g[i], g[j]) for g in ray_groups
                  for i in range(len(g)) for j in range(i + 1, len(g)))
    return ParallelClasses(edge_classes, ray_groups, pairs)


# ---------------------------------------------------------------------------
# deformation vectors
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DeformationVector:
    """An element of A^2 x R: complex edge part plus real ray angles.

    ``x[e]`` is the value on the representative half-edge of closed edge
    ``e``; ``theta[k]`` belongs to ray ``graph.rays[k]``.
    """

    x: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=complex).copy())
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float).copy())

    @classmethod
    def zeros(cls, graph: GeometricGraph) -> "DeformationVector":
        return cls(np.zeros(graph.n_edges, complex), np.zeros(graph.n_rays))

    @classmethod
    def center(cls, graph: GeometricGraph) -> "DeformationVector":
        """The undeformed point (x0, theta0) of the graph."""
        return cls(graph.x0, graph.ray_theta)

    @classmethod
    def from_real(cls, z, n_edges: int) -> "DeformationVector":
        z = np.asarray(z, dtype=float)
        x = z[0:2 * n_edges:2] + 1j * z[1:2 * n_edges:2]
        return cls(x, z[2 * n_edges:])

    def to_real(self) -> np.ndarray:
        xr = np.column_stack([self.x.real, self.x.imag]).ravel()
        return np.concatenate([xr, self.theta])

    def on_half_edge(self, graph: GeometricGraph, h: int) -> complex:
        e = graph.edge_of[h]
        if e < 0:
            raise ValueError(f"half-edge {h} is a ray")
        return graph.edge_sign[h] * self.x[e]

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_real()))

    def __add__(self, other: "DeformationVector") -> "DeformationVector":
        return DeformationVector(self.x + other.x, self.theta + other.theta)

    def __sub__(self, other: "DeformationVector") -> "DeformationVector":
        return DeformationVector(self.x - other.x, self.theta - other.theta)

    def __mul__(self, c: float) -> "DeformationVector":
        return DeformationVector(self.x * c, self.theta * c)

    __rmul__ = __mul__

    def __neg__(self) -> "DeformationVector":
        return DeformationVector(-self.x, -self.theta)


# ---------------------------------------------------------------------------
# configurations and their files
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Configuration:
    graph: GeometricGraph
    phase: np.ndarray  # per closed edge, on the representative, in (-pi, pi]
    upsilon: np.ndarray  # per half-edge, > 0
    mu: np.ndarray  # per half-edge, complex
    xi: DeformationVector
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        g = self.graph
        phase = wrap_pi(np.asarray(self.phase, dtype=float).reshape(g.n_edges))
        upsilon = np.asarray(self.upsilon, dtype=float).reshape(g.n_half_edges)
        mu = np.asarray(self.mu, dtype=complex).reshape(g.n_half_edges)
        if np.any(~(upsilon > 0)):
            bad = [int(h) for h in np.nonzero(~(upsilon > 0))[0]]
            raise UpsilonNotPositive(f"upsilon must be positive, fails on half-edges {bad}")
        if self.xi.x.shape != (g.n_edges,) or self.xi.theta.shape != (g.n_rays,):
            raise SchemaViolation("xi does not match the graph dimensions")
        object.__setattr__(self, "phase", np.atleast_1d(phase).astype(float))
        object.__setattr__(self, "upsilon", upsilon)
        object.__setattr__(self, "mu", mu)

    def phase_on(self, h: int) -> float:
        e = self.graph.edge_of[h]
        return float(wrap_pi(self.graph.edge_sign[h] * self.phase[e]))

    @property
    def mu_antisym(self) -> np.ndarray:
        """mu_h - mu_{-h} on representatives."""
        g = self.graph
        partners = np.array([g.iota[h] for h in g.closed_edges], dtype=int)
        if g.n_edges == 0:
            return np.zeros(0, complex)
        return self.mu[g.closed_edges] - self.mu[partners]

    def replace(self, **changes) -> "Configuration":
        kw = dict(graph=self.graph, phase=self.phase, upsilon=self.upsilon, mu=self.mu,
                  xi=self.xi, name=self.name, meta=dict(self.meta))
        kw.update(changes)
        return Configuration(**kw)


def make_configuration(graph: GeometricGraph, phase=None, upsilon=None, mu=None, xi=None,
                       name: str = "", meta: dict | None = None) -> Configuration:
    """Configuration with defaults phase = 0, upsilon = 1, mu = 0, xi = 0."""
    return Configuration(
        graph=graph,
        phase=np.zeros(graph.n_edges) if phase is None else phase,
        upsilon=np.ones(graph.n_half_edges) if upsilon is None else upsilon,
        mu=np.zeros(graph.n_half_edges, complex) if mu is None else mu,
        xi=DeformationVector.zeros(graph) if xi is None else xi,
        name=name,
        meta=meta or {},
    )


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise SchemaViolation(msg)


def _int_key(k, n: int) -> int:
    try:
        h = int(k)
    except (TypeError, ValueError):
        raise SchemaViolation(f"half-edge key {k!r} is not an integer") from None
    _require(0 <= h < n, f"half-edge {h} out of range")
    return h


def _pair(val) -> complex:
    _require(isinstance(val, (list, tuple)) and len(val) == 2
             and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in val),
             f"expected [re, im], got {val!r}")
    return complex(float(val[0]), float(val[1]))


def _number(val) -> float:
    _require(isinstance(val, (int, float)) and not isinstance(val, bool),
             f"expected a number, got {val!r}")
    return float(val)


def config_from_dict(doc: dict, check_xi: bool = True) -> Configuration:
    """Build a :class:`Configuration` from the JSON document layout."""
    _require(isinstance(doc, dict), "configuration must be a JSON object")
    for key in ("half_edges", "iota", "sigma", "vertices", "vertex_of", "ray_angles"):
        _require(key in doc, f"missing key {key!r}")
    n = doc["half_edges"]
    _require(isinstance(n, int) and not isinstance(n, bool) and n > 0,
             "half_edges must be a positive integer")
    for key in ("iota", "sigma", "vertex_of"):
        _require(isinstance(doc[key], list) and len(doc[key]) == n,
                 f"{key} must be an array of length {n}")
    for key in ("iota", "sigma"):
        _require(all(isinstance(i, int) and not isinstance(i, bool) for i in doc[key]),
                 f"{key} entries must be integers")
    prs = PseudoRotationSystem(tuple(doc["iota"]), tuple(doc["sigma"]))

    verts = doc["vertices"]
    _require(isinstance(verts, list), "vertices must be an array")
    pos_by_id = {}
    for item in verts:
        _require(isinstance(item, dict) and "id" in item and "position" in item,
                 "each vertex needs 'id' and 'position'")
        _require(item["id"] not in pos_by_id, f"duplicate vertex id {item['id']!r}")
        pos_by_id[item["id"]] = _pair(item["position"])
    vertex_of = doc["vertex_of"]
    positions = []
    used = set()
    for orbit in prs.vertices:
        ids = {vertex_of[h] for h in orbit}
        _require(len(ids) == 1, f"half-edges {orbit} form one sigma orbit but carry ids {ids}")
        vid = ids.pop()
        _require(vid in pos_by_id, f"unknown vertex id {vid!r}")
        _require(vid not in used, f"vertex id {vid!r} used by two sigma orbits")
        used.add(vid)
        positions.append(pos_by_id[vid])
    _require(used == set(pos_by_id), "vertices listed that carry no half-edges")

    ray_angles = doc["ray_angles"]
    _require(isinstance(ray_angles, dict), "ray_angles must be an object")
    ray_angles = {_int_key(k, n): _number(v) for k, v in ray_angles.items()}
    graph = build_graph(prs, positions, ray_angles)

    phase = np.zeros(graph.n_edges)
    if "phase" in doc:
        raw = doc["phase"]
        _require(isinstance(raw, dict), "phase must be an object")
        given = {_int_key(k, n): _number(v) for k, v in raw.items()}
        for h in given:
            _require(graph.edge_of[h] >= 0, f"phase given on ray {h}")
        for e, h in enumerate(graph.closed_edges):
            hp = graph.iota[h]
            if h in given and hp in given:
                if abs(wrap_pi(given[h] + given[hp])) > ANGLE_TOL:
                    raise PhaseNotAntisymmetric(
                        f"phase {given[h]} on {h} and {given[hp]} on {hp} do not cancel mod 2pi")
                phase[e] = given[h]
            elif h in given:
                phase[e] = given[h]
            elif hp in given:
                phase[e] = -given[hp]
            else:
                raise SchemaViolation(f"no phase for closed edge ({h}, {hp})")

    upsilon = np.ones(n)
    for k, v in (doc.get("upsilon") or {}).items():
        upsilon[_int_key(k, n)] = _number(v)
    if np.any(~(upsilon > 0)):
        raise UpsilonNotPositive(
            f"upsilon must be positive, got {[float(u) for u in upsilon if not u > 0]}")
    mu = np.zeros(n, complex)
    for k, v in (doc.get("mu") or {}).items():
        mu[_int_key(k, n)] = _pair(v)

    xi = DeformationVector.zeros(graph)
    if doc.get("xi") is not None:
        xi = deformation_from_dict(graph, doc["xi"])

    meta = doc.get("meta") or {}
    _require(isinstance(meta, dict), "meta must be an object")
    config = Configuration(graph, phase, upsilon, mu, xi, name=str(doc.get("name", "")),
                           meta=meta)
    if check_xi and xi.norm() > 0:
        from .horizontal import in_deformation_space
        if not in_deformation_space(config, xi):
            raise InvariantViolation("prescribed xi does not lie in the deformation space D")
    return config


def deformation_from_dict(graph: GeometricGraph, doc: dict) -> DeformationVector:
    _require(isinstance(doc, dict), "a deformation vector must be an object")
    n = graph.n_half_edges
    x = np.zeros(graph.n_edges, complex)
    theta = np.zeros(graph.n_rays)
    for k, v in (doc.get("x") or {}).items():
        h = _int_key(k, n)
        _require(graph.edge_of[h] >= 0, f"x given on ray {h}")
        x[graph.edge_of[h]] = graph.edge_sign[h] * _pair(v)
    for k, v in (doc.get("theta") or {}).items():
        h = _int_key(k, n)
        _require(graph.ray_index[h] >= 0, f"theta given on closed half-edge {h}")
        theta[graph.ray_index[h]] = _number(v)
    return DeformationVector(x, theta)


def deformation_to_dict(graph: GeometricGraph, xi: DeformationVector) -> dict:
    return {
        "x": {str(int(h)): [float(z.real), float(z.imag)]
              for h, z in zip(graph.closed_edges, xi.x)},
        "theta": {str(int(r)): float(t) for r, t in zip(graph.rays, xi.theta)},
    }


def config_to_dict(config: Configuration) -> dict:
    g = config.graph
    doc = {
        "name": config.name,
        "half_edges": g.n_half_edges,
        "iota": list(g.iota),
        "sigma": list(g.sigma),
        "vertices": [{"id": v, "position": [float(p.real), float(p.imag)]}
                     for v, p in enumerate(g.positions)],
        "vertex_of": [int(v) for v in g.vertex_of],
        "ray_angles": {str(int(r)): float(t) for r, t in zip(g.rays, g.ray_theta)},
        "phase": {str(int(h)): float(p) for h, p in zip(g.closed_edges, config.phase)},
        "upsilon": {str(h): float(u) for h, u in enumerate(config.upsilon)},
        "mu": {str(h): [float(m.real), float(m.imag)] for h, m in enumerate(config.mu)},
    }
    if config.xi.norm() > 0:
        doc["xi"] = deformation_to_dict(g, config.xi)
    if config.meta:
        doc["meta"] = config.meta
    return doc


def dumps_config(config: Configuration) -> str:
    return json.dumps(config_to_dict(config), indent=2) + "\n"


def load_config(path) -> Configuration:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"malformed JSON: {exc}") from None
    return config_from_dict(doc)


def save_config(config: Configuration, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_config(config))
