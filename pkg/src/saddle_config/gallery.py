"""Built-in example configurations.

Graphs are built from geometry: vertex positions, closed edges as vertex
pairs and rays as (vertex, angle).  The rotation at each vertex is the
anticlockwise order of directions.  Parallel closed edges listed in order
``e1, e2`` between ``a`` and ``b`` appear as ``(e1, e2)`` at ``a`` and
``(e2, e1)`` at ``b``, which is the planar (nested) order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import (
    Configuration,
    DeformationVector,
    GeometricGraph,
    PseudoRotationSystem,
    build_graph,
    make_configuration,
    wrap_angle,
)

PI = math.pi


def _direction_key(theta: float) -> float:
    return round(wrap_angle(theta), 9) % round(2 * PI, 9)


def assemble(positions, edges, rays) -> GeometricGraph:
    """Graph from vertex positions, closed edges ``(a, b)`` and rays ``(v, angle)``.

    Closed edge ``k`` gets half-edges ``2k`` (at ``a``) and ``2k + 1`` (at
    ``b``); ray ``j`` gets half-edge ``2 * len(edges) + j``.
    """
    pos = np.asarray(positions, dtype=complex)
    n = 2 * len(edges) + len(rays)
    iota = list(range(n))
    at: list[list[tuple[float, float, int]]] = [[] for _ in range(len(pos))]
    for k, (a, b) in enumerate(edges):
        iota[2 * k], iota[2 * k + 1] = 2 * k + 1, 2 * k
        d = pos[b] - pos[a]
        t = math.atan2(d.imag, d.real)
        at[a].append((_direction_key(t), k + 1, 2 * k))
        at[b].append((_direction_key(t + PI), -(k + 1), 2 * k + 1))
    ray_angles = {}
    for j, (v, t) in enumerate(rays):
        h = 2 * len(edges) + j
        at[v].append((_direction_key(t), j + 1, h))
        ray_angles[h] = float(t)
    sigma = [0] * n
    vertex_of = [0] * n
    for v, items in enumerate(at):
        items.sort()
        hs = [h for _, _, h in items]
        for i, h in enumerate(hs):
            sigma[h] = hs[(i + 1) % len(hs)]
            vertex_of[h] = v
    prs = PseudoRotationSystem(tuple(iota), tuple(sigma))
    # vertices of the rotation system are ordered by smallest half-edge
    by_orbit = np.array([pos[vertex_of[orbit[0]]] for orbit in prs.vertices])
    return build_graph(prs, by_orbit, ray_angles)


def assemble_lines(lines, tol: float = 1e-9) -> GeometricGraph:
    """Graph of a line arrangement; ``lines`` are ``(point, angle)`` pairs."""
    lines = [(complex(p), float(a)) for p, a in lines]
    points: list[complex] = []
    on_line: list[list[tuple[float, int]]] = [[] for _ in lines]

    def vertex_id(z: complex) -> int:
        for i, w in enumerate(points):
            if abs(z - w) < tol:
                return i
        points.append(z)
        return len(points) - 1

    for i, (p, a) in enumerate(lines):
        d = complex(math.cos(a), math.sin(a))
        for j, (q, b) in enumerate(lines):
            if j <= i:
                continue
            e = complex(math.cos(b), math.sin(b))
            cross = (d.conjugate() * e).imag
            if abs(cross) < tol:
                continue
            # p + t d = q + s e
            t = ((q - p).conjugate() * e).imag / cross
            s = ((q - p).conjugate() * d).imag / cross
            z = p + t * d
            v = vertex_id(z)
            on_line[i].append((t, v))
            on_line[j].append((s, v))

    edges, rays = [], []
    for i, (p, a) in enumerate(lines):
        seq = []
        for t, v in sorted(on_line[i]):
            if not seq or seq[-1] != v:
                seq.append(v)
        if not seq:
            raise ValueError(f"line {i} meets no other line")
        edges += list(zip(seq, seq[1:]))
        rays += [(seq[0], a + PI), (seq[-1], a)]
    return assemble(points, edges, rays)


# ---------------------------------------------------------------------------
# entries
# ---------------------------------------------------------------------------

def tree1(phase: float = 0.0) -> Configuration:
    """Three lines: the x-axis and the verticals x = 0 and x = 1."""
    g = assemble_lines([(0, 0.0), (0, PI / 2), (1, PI / 2)])
    return make_configuration(g, phase=np.full(g.n_edges, phase), name="tree1")


def tree2() -> Configuration:
    """The x-axis and four verticals x = 0, 1, 2, 3; unit edges."""
    g = assemble_lines([(0, 0.0)] + [(x, PI / 2) for x in range(4)])
    return make_configuration(g, name="tree2")


def tree3_ray_angles() -> list[float]:
    """Rays at the left vertex of tree3: pi/2, 5pi/6 and two more balancing the double edge."""
    fixed = [PI / 2, 5 * PI / 6]
    rest = -2.0 - sum(complex(math.cos(t), math.sin(t)) for t in fixed)
    half = math.acos(abs(rest) / 2)
    centre = math.atan2(rest.imag, rest.real)
    return fixed + [wrap_angle(centre - half), wrap_angle(centre + half)]


def tree3() -> Configuration:
    """Two vertices joined by two parallel edges; the vertical rays are parallel."""
    left = tree3_ray_angles()
    right = [wrap_angle(PI - t) for t in left]
    rays = [(0, t) for t in left] + [(1, t) for t in right]
    g = assemble([0, 1], [(0, 1), (0, 1)], rays)
    return make_configuration(g, name="tree3")


def _triangle_lines(a: complex, b: complex, c: complex):
    out = []
    for p, q in ((a, b), (b, c), (c, a)):
        d = q - p
        out.append((p, math.atan2(d.imag, d.real) % PI))
    return out


def triangle() -> Configuration:
    """Three lines through the sides of an equilateral triangle, trivial phase."""
    g = assemble_lines(_triangle_lines(0, 1, complex(0.5, math.sqrt(3) / 2)))
    return make_configuration(g, name="triangle")


def gyroid3() -> Configuration:
    """Equiangular triangle with vertex phases 0, 2pi/3, 4pi/3."""
    from .vertical import potential_to_phase

    g = triangle().graph
    pot = _potentials_by_angle(g, [0.0, 2 * PI / 3, 4 * PI / 3])
    return make_configuration(g, phase=potential_to_phase(g, pot), name="gyroid3")


def triangle_scalene() -> Configuration:
    """A triangle with three distinct side lengths; only trivial phases balance."""
    g = assemble_lines(_triangle_lines(0, 2, complex(0.5, 1.0)))
    return make_configuration(g, name="triangle-scalene")


def square() -> Configuration:
    """Four lines through the sides of the unit square, trivial phase."""
    g = assemble_lines([(0, 0.0), (1j, 0.0), (0, PI / 2), (1, PI / 2)])
    return make_configuration(g, name="square")


def gyroid4() -> Configuration:
    """Square with vertex phases 0, pi/2, pi, 3pi/2 going around."""
    from .vertical import potential_to_phase

    g = square().graph
    pot = _potentials_by_angle(g, [0.0, PI / 2, PI, 3 * PI / 2])
    return make_configuration(g, phase=potential_to_phase(g, pot), name="gyroid4")


def _potentials_by_angle(g: GeometricGraph, values) -> np.ndarray:
    """Assign ``values`` to vertices in anticlockwise order about their centroid."""
    c = g.positions.mean()
    order = sorted(range(g.n_vertices),
                   key=lambda v: math.atan2((g.positions[v] - c).imag, (g.positions[v] - c).real))
    pot = np.zeros(g.n_vertices)
    for v, val in zip(order, values):
        pot[v] = val
    return pot


def polygram_graph(k: int) -> GeometricGraph:
    """Lines tangent to the unit circle at angles 2 pi j / k."""
    if k < 3:
        raise ValueError("polygram needs k >= 3")
    lines = []
    for j in range(k):
        a = 2 * PI * j / k
        normal = complex(math.cos(a), math.sin(a))
        lines.append((normal, (a + PI / 2) % PI))
    return assemble_lines(lines)


def polygram(k: int = 5) -> Configuration:
    """Regular polygram arrangement of k lines with a nontrivial balanced phase.

    Newton's method on the vertical balance and period equations starts
    from 2 pi / n on a face cycle of n shortest edges (the inner k-gon when
    there is none), then from the generic seeds; the first nontrivial root
    is used, and the trivial phase if there is none.
    """
    from .vertical import is_trivial, newton_phase, phase_seeds

    g = polygram_graph(k)
    lmin = g.lengths.min()
    cycles = [c for c in g.face_cycles if all(abs(g.half_edge_length[h] - lmin) < 1e-9 for h in c)]
    cycles = cycles or [c for c in g.face_cycles if len(c) == k]
    seeds = []
    for c in sorted(cycles, key=len, reverse=True)[:1]:
        seed = np.zeros(g.n_edges)
        for h in c:
            seed[g.edge_of[h]] = g.edge_sign[h] * (2 * PI / len(c))
        seeds.append(seed)
    phase = np.zeros(g.n_edges)
    for seed in seeds + phase_seeds(g):
        phi, _, ok = newton_phase(g, np.ones(g.n_edges), seed)
        if ok and not is_trivial(phi):
            phase = phi
            break
    return make_configuration(g, phase=phase, name=f"polygram-{k}", meta={"k": k})


def misc1_graph() -> GeometricGraph:
    """Equilateral triangle P, Q, S with an extra horizontal line of rays at S."""
    h = math.sqrt(3)
    P, Q, S = complex(-1, 0), complex(1, 0), complex(0, h)
    g = assemble_lines(_triangle_lines(P, Q, S))
    pos, edges, rays = _explode(g)
    s = int(np.argmin(np.abs(np.asarray(pos) - S)))
    rays += [(s, 0.0), (s, PI)]
    return assemble(pos, edges, rays)


def _explode(g: GeometricGraph):
    pos = list(g.positions)
    edges = [(int(g.edge_tail[e]), int(g.edge_head[e])) for e in range(g.n_edges)]
    rays = [(int(g.vertex_of[r]), float(g.ray_theta[k])) for k, r in enumerate(g.rays)]
    return pos, edges, rays


def misc1_xi(g: GeometricGraph) -> DeformationVector:
    """Element of D with xdot = 0 that turns only the rays at the degree-6 vertex.

    It is computed from the kernel of the horizontal Jacobian restricted to
    those four ray angles, normalised so the horizontal rays turn by +-1.
    """
    from .horizontal import jacobian_matrix
    from .linalg import row_and_null_space

    s = next(v for v in range(g.n_vertices) if g.degree(v) == 6)
    cols = [k for k, r in enumerate(g.rays) if g.vertex_of[r] == s]
    J = jacobian_matrix(g)[:, 2 * g.n_edges + np.array(cols)]
    _, kernel, _ = row_and_null_space(J)
    # two-dimensional; pick the member turning the horizontal rays by +1 and -1
    # (the right ray anticlockwise, away from its parallel partner below)
    angles = [g.ray_theta[k] for k in cols]
    right = next(i for i, t in enumerate(angles) if abs(math.sin(t)) < 1e-9 and math.cos(t) > 0)
    left = next(i for i, t in enumerate(angles) if abs(math.sin(t)) < 1e-9 and math.cos(t) < 0)
    coef = np.linalg.solve(kernel[:, [right, left]].T, [1.0, -1.0])
    theta = np.zeros(g.n_rays)
    theta[cols] = coef @ kernel
    return DeformationVector(np.zeros(g.n_edges, complex), theta)


def misc1() -> Configuration:
    g = misc1_graph()
    return make_configuration(g, xi=misc1_xi(g), name="misc1")


def benzene() -> Configuration:
    """Regular hexagon with doubled edges and two outward radial rays per vertex."""
    pos = [complex(math.cos(PI * j / 3), math.sin(PI * j / 3)) for j in range(6)]
    edges = []
    for j in range(6):
        edges += [(j, (j + 1) % 6), (j, (j + 1) % 6)]
    rays = []
    for j in range(6):
        rays += [(j, PI * j / 3), (j, PI * j / 3)]
    g = assemble(pos, edges, rays)
    return make_configuration(g, name="benzene")


def scherk4() -> Configuration:
    """A single saddle tower with four ends."""
    g = assemble([0], [], [(0, 0.0), (0, PI / 2), (0, PI), (0, 3 * PI / 2)])
    return make_configuration(g, name="scherk4")


@dataclass(frozen=True)
class GalleryEntry:
    name: str
    build: Callable[..., Configuration]
    facts: dict = field(default_factory=dict)
    doc: str = ""


GALLERY: dict[str, GalleryEntry] = {
    e.name: e for e in [
        GalleryEntry("tree1", tree1, {"balanced": True, "rigid": True, "dim_D": 4,
                                      "phases": "{0, pi}", "verdict": ("Embedded", "FlatOrder")},
                     "two saddle towers glued in phase"),
        GalleryEntry("tree1-antiphase", lambda: tree1(PI).replace(name="tree1-antiphase"),
                     {"balanced": True, "rigid": True, "verdict": ("NotEmbedded", "FlatOrder")},
                     "two saddle towers in opposite phases"),
        GalleryEntry("tree2", tree2, {"balanced": True, "rigid": True,
                                      "verdict": ("Inconclusive", "FlatOrder")},
                     "five lines, middle ends undecided"),
        GalleryEntry("tree3", tree3, {"balanced": True, "parallel_edges": True},
                     "a tree with parallel edges"),
        GalleryEntry("triangle", triangle, {"balanced": True, "rigid": True, "dim_D": 4,
                                            "verdict": ("Embedded", "DistinctRays")},
                     "equiangular triangle arrangement"),
        GalleryEntry("gyroid3", gyroid3, {"balanced": True, "rigid": True, "vertically_rigid": True},
                     "singly periodic rGL"),
        GalleryEntry("triangle-scalene", triangle_scalene, {"balanced": True, "only_trivial_phases": True},
                     "non-equilateral triangle"),
        GalleryEntry("square", square, {"balanced": True, "rigid": True, "dim_D": 6},
                     "square arrangement"),
        GalleryEntry("gyroid4", gyroid4, {"balanced": True, "rigid": True, "vertically_rigid": False},
                     "singly periodic tG"),
        GalleryEntry("polygram", polygram, {"balanced": True, "rigid": True},
                     "regular polygram arrangement (use k)"),
        GalleryEntry("misc1", misc1, {"balanced": True, "verdict": ("Embedded", "FirstOrder")},
                     "two 4-valent and one 6-valent vertex"),
        GalleryEntry("benzene", benzene, {"balanced": True, "rigid": False, "dim_D": 11},
                     "hexagon with doubled edges"),
        GalleryEntry("scherk4", scherk4, {"balanced": True, "rigid": True, "dim_D": 2},
                     "single saddle tower"),
    ]
}


def names() -> list[str]:
    return list(GALLERY)


def get(name: str, k: int | None = None) -> Configuration:
    if name not in GALLERY:
        raise KeyError(name)
    if name == "polygram":
        return polygram(5 if k is None else k)
    return GALLERY[name].build()


def all_configs() -> list[Configuration]:
    """Every entry, with polygrams for k = 5 and k = 8."""
    out = []
    for name in GALLERY:
        if name == "polygram":
            out += [polygram(5), polygram(8)]
        else:
            out.append(get(name))
    return out
