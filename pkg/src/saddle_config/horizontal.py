"""Horizontal forces and periods, rigidity, and the deformation systems.

Deformations live in real coordinates
``(Re x_0, Im x_0, ..., Re x_{E-1}, Im x_{E-1}, theta_0, ..., theta_{R-1})``
with one complex entry per closed edge (representative orientation) and
one angle per ray.  Residual vectors stack ``(Re F_v, Im F_v)`` over
vertices followed by ``(Re P_c, Im P_c)`` over face cycles.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .discrete import curl_matrix, minimal_edges
from .errors import (
    LeftEdgeLemmaFailure,
    NewtonDivergence,
    NotRigid,
    PreconditionViolated,
    ZeroLengthEdge,
)
from .linalg import row_and_null_space
from .model import (
    ANGLE_TOL,
    Configuration,
    DeformationVector,
    GeometricGraph,
    VertexClass,
    classify_vertex,
    orientation,
    parallel_classes,
)

log = logging.getLogger(__name__)

RANK_TOL = 1e-10
BALANCE_TOL = 1e-9
NEWTON_TOL = 1e-12

__all__ = [
    "DeformationVector", "HorizontalJacobian", "DeformationSpace", "RigidityCertificate",
    "ContinuationResult", "u_of_chi", "P_hor", "F_hor", "is_balanced", "jacobian",
    "deformation_space", "is_rigid", "contains_trivial_deformations", "solve_zeta_dot",
    "solve_zeta_hat", "continuation_solve", "certify_rigidity_simple",
]


def _graph(obj) -> GeometricGraph:
    return obj.graph if isinstance(obj, Configuration) else obj


# ---------------------------------------------------------------------------
# maps
# ---------------------------------------------------------------------------

def u_of_chi(graph: GeometricGraph, chi: DeformationVector) -> np.ndarray:
    """Unit vectors u_eta(chi) on every half-edge."""
    lengths = np.abs(chi.x)
    if np.any(lengths == 0):
        raise ZeroLengthEdge(f"closed edges {np.nonzero(lengths == 0)[0].tolist()} have zero length")
    u_edge = chi.x / lengths
    u = np.empty(graph.n_half_edges, complex)
    closed = graph.edge_of >= 0
    u[closed] = graph.edge_sign[closed] * u_edge[graph.edge_of[closed]]
    u[graph.rays] = np.exp(1j * chi.theta)
    return u


def P_hor(graph: GeometricGraph, chi: DeformationVector) -> np.ndarray:
    """curl(x) over face cycles."""
    return curl_matrix(graph) @ chi.x


def F_hor(graph: GeometricGraph, chi: DeformationVector) -> np.ndarray:
    """div(u(chi)) over vertices."""
    u = u_of_chi(graph, chi)
    return np.array([u[list(hs)].sum() for hs in graph.vertices])


def residual(graph: GeometricGraph, chi: DeformationVector) -> np.ndarray:
    F = F_hor(graph, chi)
    P = P_hor(graph, chi)
    return np.concatenate([np.column_stack([F.real, F.imag]).ravel(),
                           np.column_stack([P.real, P.imag]).ravel()])


def is_balanced(obj, tol: float = BALANCE_TOL) -> bool:
    g = _graph(obj)
    return bool(np.max(np.abs(F_hor(g, DeformationVector.center(g))), initial=0.0) < tol)


def jacobian_matrix(graph: GeometricGraph, chi: DeformationVector | None = None) -> np.ndarray:
    """Analytic derivative of (F_hor, P_hor) at ``chi`` (default: the graph itself)."""
    chi = DeformationVector.center(graph) if chi is None else chi
    V, E, R, F = graph.n_vertices, graph.n_edges, graph.n_rays, graph.n_faces
    J = np.zeros((2 * V + 2 * F, 2 * E + R))
    lengths = np.abs(chi.x)
    if np.any(lengths == 0):
        raise ZeroLengthEdge("zero-length closed edge")
    for v, hs in enumerate(graph.vertices):
        for h in hs:
            e = graph.edge_of[h]
            if e >= 0:
                uh = chi.x[e] / lengths[e]
                a = np.array([uh.real, uh.imag])
                block = (np.eye(2) - np.outer(a, a)) / lengths[e]
                J[2 * v:2 * v + 2, 2 * e:2 * e + 2] += graph.edge_sign[h] * block
            else:
                k = graph.ray_index[h]
                t = chi.theta[k]
                J[2 * v, 2 * E + k] += -math.sin(t)
                J[2 * v + 1, 2 * E + k] += math.cos(t)
    C = curl_matrix(graph)
    for c in range(F):
        for e in range(E):
            if C[c, e]:
                J[2 * V + 2 * c, 2 * e] += C[c, e]
                J[2 * V + 2 * c + 1, 2 * e + 1] += C[c, e]
    return J


@dataclass(frozen=True, eq=False)
class HorizontalJacobian:
    matrix: np.ndarray
    rank: int
    row_space: np.ndarray  # orthonormal rows spanning D^perp
    kernel: np.ndarray  # orthonormal rows spanning D

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def surjective(self) -> bool:
        return self.rank == self.n_rows


def jacobian(obj, rtol: float = RANK_TOL) -> HorizontalJacobian:
    g = _graph(obj)
    if not is_balanced(g):
        log.warning("graph is not balanced; Jacobian evaluated at the unbalanced centre")
    J = jacobian_matrix(g)
    row, ker, r = row_and_null_space(J, rtol)
    return HorizontalJacobian(J, r, row, ker)


# ---------------------------------------------------------------------------
# deformation space
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DeformationSpace:
    basis: np.ndarray  # rows: orthonormal basis of D
    complement: np.ndarray  # rows: orthonormal basis of D^perp
    jacobian: HorizontalJacobian

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rigid(self) -> bool:
        return self.jacobian.surjective

    def vectors(self, n_edges: int) -> list[DeformationVector]:
        return [DeformationVector.from_real(b, n_edges) for b in self.basis]

    def residual(self, vec: DeformationVector) -> float:
        """||J v|| relative to ||J||."""
        J = self.jacobian.matrix
        scale = np.linalg.norm(J, 2) if J.size else 1.0
        return float(np.linalg.norm(J @ vec.to_real()) / max(scale, 1e-300))


def deformation_space(obj, rtol: float = RANK_TOL) -> DeformationSpace:
    jac = jacobian(obj, rtol)
    return DeformationSpace(jac.kernel, jac.row_space, jac)


def is_rigid(obj) -> bool:
    return jacobian(obj).surjective


def in_deformation_space(obj, vec: DeformationVector, tol: float = 1e-9) -> bool:
    space = deformation_space(obj)
    return space.residual(vec) <= tol * max(1.0, vec.norm())


def scaling_vector(graph: GeometricGraph) -> DeformationVector:
    return DeformationVector(graph.x0, np.zeros(graph.n_rays))


def rotation_vector(graph: GeometricGraph) -> DeformationVector:
    return DeformationVector(1j * graph.x0, np.ones(graph.n_rays))


def trivial_deformation_residuals(obj) -> dict[str, float]:
    space = deformation_space(obj)
    g = _graph(obj)
    return {"scaling": space.residual(scaling_vector(g)),
            "rotation": space.residual(rotation_vector(g))}


def contains_trivial_deformations(obj, tol: float = 1e-9) -> bool:
    """Whether the scaling and rotation vectors lie in D."""
    return all(r < tol for r in trivial_deformation_residuals(obj).values())


# ---------------------------------------------------------------------------
# linear systems in D^perp
# ---------------------------------------------------------------------------

def _require_rigid(space: DeformationSpace) -> None:
    if not space.rigid:
        raise NotRigid(f"Jacobian rank {space.jacobian.rank} < {space.jacobian.n_rows} rows")


def _solve_in_complement(space: DeformationSpace, rhs: np.ndarray) -> np.ndarray:
    """Minimum-norm solution of J z = rhs, with z orthogonal to D enforced by extra rows."""
    J = space.jacobian.matrix
    A = np.vstack([J, space.basis])
    b = np.concatenate([rhs, np.zeros(space.dim)])
    z, *_ = np.linalg.lstsq(A, b, rcond=None)
    return z


@dataclass(frozen=True, eq=False)
class LinearSolution:
    vector: DeformationVector
    rhs: np.ndarray
    residual: float  # ||J z - rhs|| / max(||rhs||, 1)
    orthogonality: float  # max |<z, d>| over the D basis


def _finish(space: DeformationSpace, z: np.ndarray, rhs: np.ndarray, n_edges: int) -> LinearSolution:
    J = space.jacobian.matrix
    res = float(np.linalg.norm(J @ z - rhs) / max(np.linalg.norm(rhs), 1.0))
    orth = float(np.max(np.abs(space.basis @ z), initial=0.0))
    return LinearSolution(DeformationVector.from_real(z, n_edges), rhs, res, orth)


def _complex_rows(values: np.ndarray) -> np.ndarray:
    return np.column_stack([values.real, values.imag]).ravel()


def zeta_dot_rhs(config: Configuration) -> np.ndarray:
    g = config.graph
    periods = -(curl_matrix(g) @ config.mu_antisym)
    return np.concatenate([np.zeros(2 * g.n_vertices), _complex_rows(periods)])


def solve_zeta_dot(config: Configuration, space: DeformationSpace | None = None) -> LinearSolution:
    """First-order deformation: P(z) = -P(mu^a), DF(z) = 0, z in D^perp."""
    space = space or deformation_space(config)
    _require_rigid(space)
    rhs = zeta_dot_rhs(config)
    return _finish(space, _solve_in_complement(space, rhs), rhs, config.graph.n_edges)


def zeta_hat_rhs(config: Configuration, K: np.ndarray) -> np.ndarray:
    """Right-hand side of the flat-order system for coupling constants ``K`` (per closed edge)."""
    g = config.graph
    m = minimal_edges(g)
    weight = np.zeros(g.n_edges)
    for h in m.global_set:
        if g.edge_sign[h] > 0:
            e = g.edge_of[h]
            weight[e] = K[e] * math.cos(config.phase[e])
    # x_h K_h cos(phi_h) is antisymmetric, so work on representatives
    periods = -(curl_matrix(g) @ (g.x0 * weight))
    in_m = set(m.global_set)
    forces = np.zeros(g.n_vertices, complex)
    for v, hs in enumerate(g.vertices):
        for h in hs:
            if h in in_m:
                forces[v] -= g.half_edge_u[h] * weight[g.edge_of[h]]
    return np.concatenate([_complex_rows(forces), _complex_rows(periods)])


def solve_zeta_hat(config: Configuration, K: np.ndarray | None = None,
                   space: DeformationSpace | None = None) -> LinearSolution:
    """Coefficient of the flat correction exp(-l_min / eps^2)."""
    space = space or deformation_space(config)
    _require_rigid(space)
    if K is None:
        from .vertical import K_values
        zd = solve_zeta_dot(config, space).vector
        K = K_values(config, config.xi + zd)
    rhs = zeta_hat_rhs(config, K)
    return _finish(space, _solve_in_complement(space, rhs), rhs, config.graph.n_edges)


# ---------------------------------------------------------------------------
# continuation of the analytic system
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ContinuationResult:
    eps: float
    chi: DeformationVector  # full deformed point chi0 + eps^2 xi + zeta
    zeta: DeformationVector  # component in D^perp
    residual: float
    iterations: int

    def half_edge_angles(self, graph: GeometricGraph) -> np.ndarray:
        """theta~ on every half-edge (closed: arg of x~, rays: the ray angle)."""
        u = u_of_chi(graph, self.chi)
        return np.angle(u)


def continuation_solve(config: Configuration, eps: float,
                       xi_fn: Callable[[float], DeformationVector] | None = None,
                       tol: float = NEWTON_TOL, max_iter: int = 60,
                       space: DeformationSpace | None = None) -> ContinuationResult:
    """Solve P(zeta) = -eps^2 P(mu^a), F(chi0 + eps^2 xi(eps) + zeta) = 0 with zeta in D^perp.

    Newton's method in coordinates of D^perp, started from the first-order
    guess eps^2 * zeta_dot, with step halving on residual increase.
    """
    g = config.graph
    space = space or deformation_space(config)
    _require_rigid(space)
    center = DeformationVector.center(g)
    if eps == 0:
        zero = DeformationVector.zeros(g)
        return ContinuationResult(0.0, center, zero, 0.0, 0)

    xi = xi_fn(eps) if xi_fn is not None else config.xi
    e2 = eps * eps
    base = center + e2 * xi
    Q = space.complement  # rows
    C = curl_matrix(g)
    forced = _complex_rows(-e2 * (C @ config.mu_antisym))
    n_e = g.n_edges

    def G(y):
        zeta = DeformationVector.from_real(Q.T @ y, n_e)
        F = F_hor(g, base + zeta)
        P = C @ zeta.x
        return np.concatenate([_complex_rows(F), _complex_rows(P) - forced])

    def DG(y):
        zeta = DeformationVector.from_real(Q.T @ y, n_e)
        J = jacobian_matrix(g, base + zeta)
        return J @ Q.T

    zd = solve_zeta_dot(config, space).vector
    y = Q @ (e2 * zd.to_real())
    r = G(y)
    norm = np.linalg.norm(r)
    it = 0
    while norm >= tol:
        if it >= max_iter:
            raise NewtonDivergence(f"no convergence at eps={eps} after {max_iter} steps "
                                   f"(residual {norm:.3e})")
        step, *_ = np.linalg.lstsq(DG(y), -r, rcond=None)
        lam = 1.0
        # the full step, then up to 20 halvings
        for _ in range(21):
            try:
                trial = y + lam * step
                r_new = G(trial)
                n_new = np.linalg.norm(r_new)
            except ZeroLengthEdge:
                n_new = math.inf
            if n_new < norm or n_new < tol:
                break
            lam *= 0.5
        else:
            if norm < 1e3 * tol:
                # stagnating at round-off level
                break
            raise NewtonDivergence(f"step halving failed at eps={eps} (residual {norm:.3e})")
        y, r, norm = trial, r_new, n_new
        it += 1
    zeta = DeformationVector.from_real(Q.T @ y, n_e)
    return ContinuationResult(float(eps), base + zeta, zeta, float(norm), it)


# ---------------------------------------------------------------------------
# constructive rigidity certificate for simple graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RigidityCertificate:
    ok: bool
    rotation: float
    vertex_order: tuple[int, ...]
    vertex_pivots: tuple[tuple[int, int], ...]  # two left-pointing half-edges per vertex
    face_order: tuple[int, ...]
    face_pivots: tuple[tuple[int, int], ...]  # two closed edges per face
    force_block_dets: tuple[float, ...]
    period_method: str  # "block-triangular" or "dense"
    period_block_dets: tuple[float, ...]
    period_min_singular: float
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "rotation": self.rotation,
            "vertex_order": list(self.vertex_order),
            "vertex_pivots": [list(p) for p in self.vertex_pivots],
            "face_order": list(self.face_order),
            "face_pivots": [list(p) for p in self.face_pivots],
            "force_block_dets": list(self.force_block_dets),
            "period_method": self.period_method,
            "period_block_dets": list(self.period_block_dets),
            "period_min_singular": self.period_min_singular,
            "notes": list(self.notes),
        }


def check_certificate_preconditions(graph: GeometricGraph) -> list[str]:
    """Reasons the block-triangular certificate does not apply (empty if it does)."""
    problems = []
    if orientation(graph) is None:
        problems.append("graph is not orientable")
    if not is_balanced(graph):
        problems.append("graph is not balanced")
    if parallel_classes(graph).has_parallel_edges:
        problems.append("graph has parallel closed edges")
    for v, hs in enumerate(graph.vertices):
        thetas = sorted(graph.half_edge_theta[h] for h in hs)
        if any(abs(b - a) < ANGLE_TOL for a, b in zip(thetas, thetas[1:])):
            problems.append(f"vertex {v} has two half-edges with the same direction")
        cls = classify_vertex(graph, v)
        if cls != VertexClass.ORDINARY:
            problems.append(f"vertex {v} is {cls}")
    return problems


def _as2(z: complex) -> np.ndarray:
    return np.array([z.real, z.imag])


def _block_triangular(M: np.ndarray, size: int) -> bool:
    """True when all 2x2 blocks on one side of the block diagonal vanish."""
    def zero(i, j):
        return not np.any(np.abs(M[2 * i:2 * i + 2, 2 * j:2 * j + 2]) > 1e-14)
    lower = all(zero(i, j) for i in range(size) for j in range(i))
    upper = all(zero(j, i) for i in range(size) for j in range(i))
    return lower or upper


def certify_rigidity_simple(config, seed: int = 0, det_tol: float = 1e-10) -> RigidityCertificate:
    """Rigidity certificate by the block-triangular argument for simple graphs.

    After a generic rotation, vertices are ordered by real part.  Every
    vertex contributes the angle variables of two half-edges pointing left;
    the force derivative restricted to them is block triangular with 2x2
    diagonal blocks.  Every face contributes the length variables of two
    edges at its left-most vertex; the period derivative restricted to them
    is checked the same way (falling back to a dense test when faces share
    a left-most vertex and the block structure is lost).  Forces do not
    depend on lengths, so the combined square matrix is invertible exactly
    when both parts are.
    """
    g = _graph(config)
    problems = check_certificate_preconditions(g)
    if problems:
        raise PreconditionViolated("; ".join(problems))

    rng = np.random.default_rng(seed)
    for _ in range(8):
        alpha = float(rng.uniform(0.0, 2.0 * math.pi))
        rot = complex(math.cos(alpha), math.sin(alpha))
        u = g.half_edge_u * rot
        if np.all(np.abs(u.real) > 1e-12):
            break
    else:
        raise PreconditionViolated("no generic rotation found in 8 attempts")
    pos = g.positions * rot

    order = sorted(range(g.n_vertices), key=lambda v: (pos[v].real, pos[v].imag))
    rank_of = {v: i for i, v in enumerate(order)}

    # --- forces in angle variables -------------------------------------
    pivots = []
    for v in order:
        left = [h for h in g.vertices[v] if u[h].real < 0]
        if len(left) < 2:
            raise LeftEdgeLemmaFailure(f"vertex {v} has {len(left)} left-pointing half-edges")
        best = max(((a, b) for i, a in enumerate(left) for b in left[i + 1:]),
                   key=lambda p: abs((u[p[0]].conjugate() * u[p[1]]).imag))
        pivots.append(best)

    V = g.n_vertices
    DF = np.zeros((2 * V, 2 * V))
    for j, (a, b) in enumerate(pivots):
        for k, h in enumerate((a, b)):
            col = 2 * j + k
            e = g.edge_of[h]
            touched = [h] if e < 0 else [h, g.iota[h]]
            for t in touched:
                i = rank_of[int(g.vertex_of[t])]
                DF[2 * i:2 * i + 2, col] += _as2(1j * u[t])
    force_dets = tuple(float(np.linalg.det(DF[2 * i:2 * i + 2, 2 * i:2 * i + 2])) for i in range(V))
    notes = []
    triangular = _block_triangular(DF, V)
    if not triangular:
        notes.append("force matrix is not block triangular")
    force_ok = triangular and all(abs(d) > det_tol for d in force_dets)

    # --- periods in length variables -----------------------------------
    faces = list(g.face_cycles)
    leftmost = []
    for c in faces:
        starts = [rank_of[int(g.vertex_of[h])] for h in c]
        k = int(np.argmin(starts))
        leftmost.append((starts[k], k))
    face_order = sorted(range(len(faces)), key=lambda i: leftmost[i])
    used: set[int] = set()
    face_pivots = []
    for fi in face_order:
        c = faces[fi]
        n = len(c)
        k = leftmost[fi][1]
        # edges at the left-most vertex first, then outward along the cycle
        walk = [k, (k - 1) % n]
        for s in range(1, n):
            walk += [(k + s) % n, (k - 1 - s) % n]
        chosen: list[int] = []
        for idx in walk:
            e = int(g.edge_of[c[idx]])
            if e in used or e in chosen:
                continue
            if chosen:
                e0 = chosen[0]
                if abs((g.edge_u[e0].conjugate() * g.edge_u[e]).imag) < 1e-12:
                    continue
            chosen.append(e)
            if len(chosen) == 2:
                break
        if len(chosen) < 2:
            notes.append(f"face {fi}: could not select two free length variables")
            chosen += [chosen[0] if chosen else 0] * (2 - len(chosen))
        used.update(chosen)
        face_pivots.append(tuple(chosen))

    F = len(faces)
    DP = np.zeros((2 * F, 2 * F))
    for j, pair in enumerate(face_pivots):
        for k, e in enumerate(pair):
            col = 2 * j + k
            for i, fi in enumerate(face_order):
                total = 0j
                for h in faces[fi]:
                    if g.edge_of[h] == e:
                        total += u[h]
                DP[2 * i:2 * i + 2, col] += _as2(total)
    period_dets = tuple(float(np.linalg.det(DP[2 * i:2 * i + 2, 2 * i:2 * i + 2])) for i in range(F))
    if F == 0:
        method, smin, period_ok = "block-triangular", math.inf, True
    else:
        s = np.linalg.svd(DP, compute_uv=False)
        smin = float(s[-1])
        if _block_triangular(DP, F):
            method = "block-triangular"
            period_ok = all(abs(d) > det_tol for d in period_dets)
        else:
            method = "dense"
            period_ok = bool(s[-1] > det_tol * s[0])

    return RigidityCertificate(
        ok=bool(force_ok and period_ok),
        rotation=alpha,
        vertex_order=tuple(order),
        vertex_pivots=tuple((int(a), int(b)) for a, b in pivots),
        face_order=tuple(face_order),
        face_pivots=tuple(face_pivots),
        force_block_dets=force_dets,
        period_method=method,
        period_block_dets=period_dets,
        period_min_singular=smin,
        notes=notes,
    )
