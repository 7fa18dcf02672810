"""Vertical periods and forces, vertical rigidity, and balanced phases.

Phase functions are arrays over closed edges holding the phase on the
representative half-edge, normalised to (-pi, pi].  Coupling constants
``K`` are arrays over closed edges as well (``K_h = K_{-h}``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .discrete import MdivBasis, curl_matrix, mdiv_matrix, minimal_edges, select_mdiv_basis
from .errors import NotRigid
from .linalg import row_and_null_space
from .model import Configuration, DeformationVector, GeometricGraph, wrap_pi

RANK_TOL = 1e-10
BALANCE_TOL = 1e-9
NEWTON_TOL = 1e-12
MERGE_TOL = 1e-6
TRIVIAL_TOL = 1e-9
MAX_TRIVIAL_ENUM = 12  # enumerate all {0, pi} potentials up to 2**12 of them


def _graph(obj) -> GeometricGraph:
    return obj.graph if isinstance(obj, Configuration) else obj


# ---------------------------------------------------------------------------
# coupling constants
# ---------------------------------------------------------------------------

def K_values(config: Configuration, chi_dot: DeformationVector) -> np.ndarray:
    """K_h = Upsilon_h Upsilon_{-h} exp(-Re(xdot_h conj(u_h))) per closed edge."""
    g = config.graph
    partners = np.array([g.iota[h] for h in g.closed_edges], dtype=int)
    ups = config.upsilon[g.closed_edges] * config.upsilon[partners] if g.n_edges else np.zeros(0)
    # xdot_h conj(u_h) is the same on both halves, so the representative suffices
    stretch = np.real(chi_dot.x * np.conj(g.edge_u))
    return ups * np.exp(-stretch)


def K_on_half_edges(graph: GeometricGraph, K: np.ndarray) -> np.ndarray:
    out = np.full(graph.n_half_edges, np.nan)
    closed = graph.edge_of >= 0
    out[closed] = K[graph.edge_of[closed]]
    return out


@dataclass(frozen=True, eq=False)
class Coupling:
    K: np.ndarray
    chi_dot: DeformationVector
    used_zeta_dot: bool  # False when the graph is not rigid and zeta_dot was skipped


def default_coupling(config: Configuration) -> Coupling:
    """K at chi_dot = xi + zeta_dot, or at xi alone when the graph is not rigid."""
    from .horizontal import deformation_space, solve_zeta_dot

    space = deformation_space(config)
    if space.rigid:
        chi_dot = config.xi + solve_zeta_dot(config, space).vector
        return Coupling(K_values(config, chi_dot), chi_dot, True)
    return Coupling(K_values(config, config.xi), config.xi, False)


# ---------------------------------------------------------------------------
# periods and forces
# ---------------------------------------------------------------------------

def _basis(graph: GeometricGraph) -> MdivBasis:
    # without closed edges there are no vertical forces at all
    if graph.n_edges == 0:
        return MdivBasis((), 0, 0, deficient=False)
    return select_mdiv_basis(graph)


def P_ver(graph: GeometricGraph, phi) -> np.ndarray:
    """curl(phi) on every face cycle, reduced to (-pi, pi]."""
    return np.atleast_1d(wrap_pi(curl_matrix(graph) @ np.asarray(phi, dtype=float)))


def F_ver_all(graph: GeometricGraph, phi, K) -> np.ndarray:
    """mdiv(K sin phi) on every vertex cut."""
    if graph.n_edges == 0:
        return np.zeros(graph.n_vertices)
    M = mdiv_matrix(graph)
    return M @ (np.asarray(K) * np.sin(np.asarray(phi, dtype=float)))


def F_ver(obj, phi, K, basis: MdivBasis | None = None) -> np.ndarray:
    """mdiv(K sin phi) on the cut basis B_m^*."""
    g = _graph(obj)
    basis = basis or _basis(g)
    return F_ver_all(g, phi, K)[list(basis.vertices)]


def is_trivial(phi, tol: float = TRIVIAL_TOL) -> bool:
    """Every value is 0 or pi (mod 2 pi)."""
    phi = np.asarray(phi, dtype=float)
    return bool(np.all(np.abs(np.sin(phi)) < tol))


def phase_residual(graph: GeometricGraph, phi, K, basis: MdivBasis | None = None) -> float:
    r = np.concatenate([F_ver(graph, phi, K, basis), P_ver(graph, phi)])
    return float(np.max(np.abs(r), initial=0.0))


def is_balanced_phase(obj, phi=None, K=None, tol: float = BALANCE_TOL) -> bool:
    """Vertical forces vanish and the vertical periods close up."""
    g = _graph(obj)
    if phi is None:
        phi = obj.phase
    if K is None:
        K = default_coupling(obj).K if isinstance(obj, Configuration) else np.ones(g.n_edges)
    return phase_residual(g, phi, K) < tol


# ---------------------------------------------------------------------------
# rigidity
# ---------------------------------------------------------------------------

def vertical_jacobian(graph: GeometricGraph, phi, K, basis: MdivBasis | None = None) -> np.ndarray:
    """Derivative of (F_ver over B_m^*, P_ver) with respect to the edge phases."""
    basis = basis or _basis(graph)
    if graph.n_edges == 0:
        return np.zeros((graph.n_faces, 0))
    M = mdiv_matrix(graph)[list(basis.vertices)]
    phi = np.asarray(phi, dtype=float)
    top = M * (np.asarray(K) * np.cos(phi))[None, :]
    return np.vstack([top, curl_matrix(graph)])


@dataclass(frozen=True, eq=False)
class VerticalRigidity:
    matrix: np.ndarray
    rank: int
    kernel: np.ndarray  # rows: sliding modes
    is_rigid: bool
    basis: MdivBasis
    flags: list[str] = field(default_factory=list)

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def kernel_dim(self) -> int:
        return self.kernel.shape[0]


def vertical_rigidity(config: Configuration, phi=None, K=None) -> VerticalRigidity:
    """Rigid means the stacked Jacobian has full column rank |E| - |R|."""
    g = config.graph
    phi = config.phase if phi is None else np.asarray(phi, dtype=float)
    K = default_coupling(config).K if K is None else np.asarray(K)
    basis = _basis(g)
    J = vertical_jacobian(g, phi, K, basis)
    _, ker, r = row_and_null_space(J, RANK_TOL)
    flags = []
    if basis.deficient:
        flags.append(f"mdiv rank {basis.full_rank} < |V| = {g.n_vertices}")
    if r < g.n_vertices + g.n_faces - 1:
        flags.append(f"rank {r} < |V| + |F| - 1 = {g.n_vertices + g.n_faces - 1}")
    return VerticalRigidity(J, r, ker, r == g.n_edges, basis, flags)


# ---------------------------------------------------------------------------
# phase solving
# ---------------------------------------------------------------------------

def is_tree(graph: GeometricGraph) -> bool:
    """No cycle of length > 2: every face cycle is a digon between parallel edges."""
    return all(len(c) <= 2 for c in graph.face_cycles)


def potential_to_phase(graph: GeometricGraph, potential) -> np.ndarray:
    """phi_h = varphi_{v(-h)} - varphi_{v(h)} mod 2 pi, on representatives."""
    pot = np.asarray(potential, dtype=float)
    if graph.n_edges == 0:
        return np.zeros(0)
    return np.atleast_1d(wrap_pi(pot[graph.edge_head] - pot[graph.edge_tail]))


def trivial_phases(graph: GeometricGraph, limit: int = MAX_TRIVIAL_ENUM) -> tuple[list[np.ndarray], bool]:
    """All {0, pi}-valued phases that solve the vertical period problem.

    These are exactly the differences of {0, pi}-valued vertex potentials
    (the face cycles span the cycle space), with vertex 0 pinned to 0.
    Returns the list and whether it is complete (``False`` when more than
    ``2**limit`` candidates would be needed and only the zero phase and
    single-vertex flips are returned).
    """
    V = graph.n_vertices
    out: list[np.ndarray] = []
    if V - 1 <= limit:
        for bits in itertools.product((0.0, math.pi), repeat=V - 1):
            out.append(potential_to_phase(graph, (0.0,) + bits))
        complete = True
    else:
        out.append(np.zeros(graph.n_edges))
        for v in range(1, V):
            pot = np.zeros(V)
            pot[v] = math.pi
            out.append(potential_to_phase(graph, pot))
        complete = False
    return _merge(out), complete


def _phase_distance(a, b) -> float:
    return float(np.max(np.abs(wrap_pi(np.asarray(a) - np.asarray(b))), initial=0.0))


def _merge(phases) -> list[np.ndarray]:
    kept: list[np.ndarray] = []
    for p in phases:
        if all(_phase_distance(p, q) >= MERGE_TOL for q in kept):
            kept.append(p)
    return kept


def phase_seeds(graph: GeometricGraph, seed: int = 0, n_random: int = 16) -> list[np.ndarray]:
    """Newton starting points: +-pi/2 and +-2pi/3 on each face cycle, then random phases."""
    seeds = []
    for c in graph.face_cycles:
        for value in (math.pi / 2, -math.pi / 2, 2 * math.pi / 3, -2 * math.pi / 3):
            phi = np.zeros(graph.n_edges)
            for h in c:
                phi[graph.edge_of[h]] = graph.edge_sign[h] * value
            seeds.append(phi)
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        seeds.append(rng.uniform(-math.pi, math.pi, graph.n_edges))
    return seeds


def newton_phase(graph: GeometricGraph, K, phi0, basis: MdivBasis | None = None,
                 tol: float = NEWTON_TOL, max_iter: int = 50) -> tuple[np.ndarray, float, bool]:
    """Gauss-Newton on (F_ver, P_ver) = 0; returns (phi, residual, converged)."""
    basis = basis or _basis(graph)
    phi = np.asarray(phi0, dtype=float).copy()

    def G(p):
        return np.concatenate([F_ver(graph, p, K, basis), P_ver(graph, p)])

    r = G(phi)
    norm = np.linalg.norm(r)
    for _ in range(max_iter):
        if norm < tol:
            break
        J = vertical_jacobian(graph, phi, K, basis)
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        lam = 1.0
        for _ in range(21):
            trial = phi + lam * step
            r_new = G(trial)
            n_new = np.linalg.norm(r_new)
            if n_new < norm:
                break
            lam *= 0.5
        else:
            break
        phi, r, norm = trial, r_new, n_new
    phi = np.atleast_1d(wrap_pi(phi))
    return phi, float(norm), bool(norm < tol)


@dataclass(frozen=True, eq=False)
class PhaseSolution:
    phase: np.ndarray
    trivial: bool
    residual: float
    source: str  # "trivial" or "seed <i>"


def solve_phases(graph: GeometricGraph, K=None, seeds=None, seed: int = 0) -> list[PhaseSolution]:
    """Balanced phase functions: all trivial ones, plus nontrivial Newton roots.

    On trees only the trivial phases are returned.  Elsewhere Newton runs
    from every seed and distinct converged roots are appended in seed order.
    """
    K = np.ones(graph.n_edges) if K is None else np.asarray(K, dtype=float)
    if graph.n_edges == 0:
        return [PhaseSolution(np.zeros(0), True, 0.0, "trivial")]
    basis = select_mdiv_basis(graph)
    trivial, _ = trivial_phases(graph)
    out = [PhaseSolution(p, True, phase_residual(graph, p, K, basis), "trivial") for p in trivial]
    if is_tree(graph):
        return out
    seeds = phase_seeds(graph, seed) if seeds is None else seeds
    found = [s.phase for s in out]
    for i, s in enumerate(seeds):
        phi, res, ok = newton_phase(graph, K, s, basis)
        if not ok:
            continue
        if all(_phase_distance(phi, q) >= MERGE_TOL for q in found):
            found.append(phi)
            out.append(PhaseSolution(phi, is_trivial(phi), res, f"seed {i}"))
    return out


# ---------------------------------------------------------------------------
# gauge invariance
# ---------------------------------------------------------------------------

def gauge_transform(graph: GeometricGraph, chi_dot: DeformationVector, lam: complex) -> DeformationVector:
    """(xdot, thetadot) -> (xdot + lam x0, thetadot + arg lam)."""
    lam = complex(lam)
    shift = math.atan2(lam.imag, lam.real) if lam != 0 else 0.0
    return DeformationVector(chi_dot.x + lam * graph.x0, chi_dot.theta + shift)


def gauge_factors(graph: GeometricGraph, lam: complex) -> np.ndarray:
    """exp(-l_b Re lam) for every vertex cut (nan where the cut has no closed edge)."""
    m = minimal_edges(graph)
    return np.exp(-m.cut_length * complex(lam).real)


def require_rigid_phase(rig: VerticalRigidity) -> None:
    if not rig.is_rigid:
        raise NotRigid(f"vertical Jacobian rank {rig.rank} < {rig.n_cols}")
