"""Face cycles, vertex cuts and the operators curl, div and mdiv.

Antisymmetric functions are arrays over closed edges (value on the
representative half-edge); functions on all half-edges additionally carry
an array over rays.  Operators are exposed both pointwise and as dense
matrices, since every instance here is small.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoClosedEdges
from .linalg import numerical_rank
from .model import POS_TOL, GeometricGraph

RANK_TOL = 1e-10


@dataclass(frozen=True)
class FaceCycle:
    half_edges: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.half_edges)

    def __iter__(self):
        return iter(self.half_edges)


@dataclass(frozen=True)
class VertexCut:
    vertex: int
    half_edges: tuple[int, ...]


@dataclass(frozen=True)
class MinimalEdges:
    per_cut: tuple[tuple[int, ...], ...]  # m(b(v)) for each vertex, closed half-edges
    cut_length: np.ndarray  # minimal closed length at each vertex (nan if none)
    global_set: tuple[int, ...]  # m(H)
    min_length: float


@dataclass(frozen=True)
class MdivBasis:
    vertices: tuple[int, ...]
    rank: int
    full_rank: int  # rank of mdiv over all vertex cuts
    deficient: bool  # True when rank < |V|; diagnostic only


def face_cycles(graph: GeometricGraph) -> list[FaceCycle]:
    return [FaceCycle(c) for c in graph.face_cycles]


def vertex_cuts(graph: GeometricGraph) -> list[VertexCut]:
    # no loops, so b(v) is the whole vertex
    return [VertexCut(v, graph.vertices[v]) for v in range(graph.n_vertices)]


def value_on(graph: GeometricGraph, f, h: int):
    """Value of an antisymmetric function at a closed half-edge."""
    return graph.edge_sign[h] * f[graph.edge_of[h]]


# --- curl ---------------------------------------------------------------

def curl_matrix(graph: GeometricGraph) -> np.ndarray:
    """|F| x |E_closed| matrix with curl_c(f) = (C @ f)[c]."""
    C = np.zeros((graph.n_faces, graph.n_edges))
    for i, c in enumerate(graph.face_cycles):
        for h in c:
            C[i, graph.edge_of[h]] += graph.edge_sign[h]
    return C


def curl(graph: GeometricGraph, f, c) -> complex | float:
    hs = c.half_edges if isinstance(c, FaceCycle) else c
    return sum(value_on(graph, f, h) for h in hs)


def curl_all(graph: GeometricGraph, f) -> np.ndarray:
    return curl_matrix(graph) @ np.asarray(f)


# --- div ------------------------------------------------------------------

def div_matrix(graph: GeometricGraph) -> np.ndarray:
    """|V| x (|E_closed| + |R|) matrix acting on (closed part, ray part)."""
    D = np.zeros((graph.n_vertices, graph.n_edges + graph.n_rays))
    for v, hs in enumerate(graph.vertices):
        for h in hs:
            e = graph.edge_of[h]
            if e >= 0:
                D[v, e] += graph.edge_sign[h]
            else:
                D[v, graph.n_edges + graph.ray_index[h]] += 1.0
    return D


def div(graph: GeometricGraph, f, v: int, rays=None):
    total = 0.0
    for h in graph.vertices[v]:
        e = graph.edge_of[h]
        if e >= 0:
            total = total + graph.edge_sign[h] * f[e]
        elif rays is not None:
            total = total + rays[graph.ray_index[h]]
    return total


def div_all(graph: GeometricGraph, f, rays=None) -> np.ndarray:
    f = np.asarray(f)
    rays = np.zeros(graph.n_rays, dtype=f.dtype) if rays is None else np.asarray(rays)
    return div_matrix(graph) @ np.concatenate([f, rays])


# --- minimal edges and mdiv -------------------------------------------------

def minimal_edges(graph: GeometricGraph) -> MinimalEdges:
    if graph.n_edges == 0:
        raise NoClosedEdges("minimal edges need at least one closed edge")
    per_cut = []
    cut_len = np.full(graph.n_vertices, np.nan)
    for v, hs in enumerate(graph.vertices):
        closed = [h for h in hs if graph.edge_of[h] >= 0]
        if not closed:
            per_cut.append(())
            continue
        lmin = min(graph.half_edge_length[h] for h in closed)
        cut_len[v] = lmin
        per_cut.append(tuple(h for h in closed if graph.half_edge_length[h] <= lmin + POS_TOL))
    lmin = float(graph.lengths.min())
    global_set = tuple(h for h in range(graph.n_half_edges)
                       if graph.edge_of[h] >= 0 and graph.half_edge_length[h] <= lmin + POS_TOL)
    return MinimalEdges(tuple(per_cut), cut_len, global_set, lmin)


def mdiv_matrix(graph: GeometricGraph, minimal: MinimalEdges | None = None) -> np.ndarray:
    """|V| x |E_closed| matrix of mdiv over all vertex cuts."""
    minimal = minimal or minimal_edges(graph)
    M = np.zeros((graph.n_vertices, graph.n_edges))
    for v, hs in enumerate(minimal.per_cut):
        for h in hs:
            M[v, graph.edge_of[h]] += graph.edge_sign[h]
    return M


def mdiv(graph: GeometricGraph, phi, v: int, minimal: MinimalEdges | None = None):
    minimal = minimal or minimal_edges(graph)
    return sum(value_on(graph, phi, h) for h in minimal.per_cut[v])


def select_mdiv_basis(graph: GeometricGraph, order=None) -> MdivBasis:
    """Greedily choose vertex cuts whose mdiv rows are independent.

    Vertices are scanned in ``order`` (default: index order); a row is kept
    when it raises the numerical rank.  The scan stops once the rank over
    all cuts is reached.
    """
    M = mdiv_matrix(graph)
    full = numerical_rank(M, RANK_TOL)
    chosen: list[int] = []
    rank = 0
    for v in (range(graph.n_vertices) if order is None else order):
        if rank == full:
            break
        trial = chosen + [int(v)]
        r = numerical_rank(M[trial], RANK_TOL)
        if r > rank:
            chosen, rank = trial, r
    return MdivBasis(tuple(chosen), rank, full, deficient=rank < graph.n_vertices)
