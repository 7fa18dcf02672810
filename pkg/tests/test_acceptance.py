"""Acceptance criteria 1 to 10, one or more tests each.

Test names carry the criterion number; conftest.py prints one PASS/FAIL
line per criterion at the end of the run.
"""

import math
import time

import numpy as np
import pytest

from saddle_config import gallery
from saddle_config.discrete import minimal_edges
from saddle_config.embeddedness import (
    DEFAULT_PROBES,
    Outcome,
    Tier,
    classify,
    half_edge_angles,
    lemma_lines_residual,
)
from saddle_config.horizontal import (
    certify_rigidity_simple,
    check_certificate_preconditions,
    continuation_solve,
    deformation_space,
    is_rigid,
    jacobian_matrix,
    residual,
    rotation_vector,
    scaling_vector,
    solve_zeta_dot,
    solve_zeta_hat,
    zeta_hat_rhs,
)
from saddle_config.linalg import numerical_rank
from saddle_config.model import DeformationVector
from saddle_config.vertical import (
    F_ver,
    F_ver_all,
    K_values,
    P_ver,
    default_coupling,
    gauge_factors,
    gauge_transform,
    solve_phases,
    trivial_phases,
    vertical_rigidity,
)

PI = math.pi


def report(n, ok, detail):
    print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def ray_at(g, pos, theta):
    for k, r in enumerate(g.rays):
        if abs(g.positions[g.vertex_of[r]] - pos) < 1e-12 and \
                abs(np.angle(np.exp(1j * (g.ray_theta[k] - theta)))) < 1e-12:
            return k
    raise LookupError((pos, theta))


def random_mu(g, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    return scale * (rng.normal(size=g.n_half_edges) + 1j * rng.normal(size=g.n_half_edges))


# --- 1 ------------------------------------------------------------------------

def test_criterion_01_benzene_dimension():
    t0 = time.perf_counter()
    cfg = gallery.benzene()
    J = jacobian_matrix(cfg.graph)
    dim = J.shape[1] - numerical_rank(J, rtol=1e-9)
    space = deformation_space(cfg, rtol=1e-9)
    elapsed = time.perf_counter() - t0
    assert report(1, dim == space.dim == 11 and elapsed < 1,
                  f"benzene dim D = {dim}, {elapsed:.3f} s")
    assert dim == 11 and space.dim == 11 and not space.rigid
    assert elapsed < 1.0


# --- 2 ------------------------------------------------------------------------

def test_criterion_02_dimension_law():
    t0 = time.perf_counter()
    got = {}
    for cfg in (gallery.triangle(), gallery.square(), gallery.polygram(5), gallery.polygram(8)):
        space = deformation_space(cfg)
        got[cfg.name] = (cfg.graph.n_rays, space.dim)
    elapsed = time.perf_counter() - t0
    ok = all(dim == r - 2 for r, dim in got.values()) and elapsed < 5
    report(2, ok, f"(|R|, dim D) = {got}, {elapsed:.2f} s")
    assert got == {"triangle": (6, 4), "square": (8, 6), "polygram-5": (10, 8),
                   "polygram-8": (16, 14)}
    assert elapsed < 5.0


# --- 3 ------------------------------------------------------------------------

def test_criterion_03_certificate_agreement():
    issued = {}
    for cfg in (gallery.triangle(), gallery.square(), gallery.polygram(5), gallery.polygram(8)):
        issued[cfg.name] = certify_rigidity_simple(cfg).ok
    checked, mismatches = [], []
    for cfg in gallery.all_configs():
        if check_certificate_preconditions(cfg.graph):
            continue
        checked.append(cfg.name)
        if certify_rigidity_simple(cfg).ok != is_rigid(cfg):
            mismatches.append(cfg.name)
    ok = all(issued.values()) and not mismatches and len(checked) >= 4
    report(3, ok, f"issued {issued}; agreement on {checked}")
    assert all(issued.values())
    assert mismatches == []


# --- 4 ------------------------------------------------------------------------

def test_criterion_04_tree_phases():
    t1 = solve_phases(gallery.tree1().graph)
    t3 = solve_phases(gallery.tree3().graph)
    vals = sorted(abs(float(s.phase[0])) for s in t1)
    ok = vals == [0.0, PI] and all(s.trivial for s in t1 + t3) and len(t3) > 0
    report(4, ok, f"tree1 {vals}, tree3 {len(t3)} solutions all trivial")
    assert vals == [0.0, PI]
    for s in t1 + t3:
        assert s.trivial
        assert np.all(np.isin(np.round(np.abs(s.phase), 12), [0.0, round(PI, 12)]))


# --- 5 ------------------------------------------------------------------------

@pytest.mark.parametrize("phase,sign,outcome", [(0.0, 1, Outcome.EMBEDDED),
                                                (PI, -1, Outcome.NOT_EMBEDDED)],
                         ids=["in-phase", "opposite"])
def test_criterion_05_flat_order_bending(phase, sign, outcome):
    cfg = gallery.tree1(phase)
    g = cfg.graph
    assert np.all(cfg.upsilon == 1) and cfg.xi.norm() == 0
    K = default_coupling(cfg).K
    sol = solve_zeta_hat(cfg, K)
    oracle = np.linalg.pinv(jacobian_matrix(g)) @ zeta_hat_rhs(cfg, K)
    err = float(np.max(np.abs(sol.vector.to_real() - oracle)))
    th = sol.vector.theta
    # outward: the rays at x = 0 turn towards -x, those at x = 1 towards +x
    turns = [th[ray_at(g, 0, PI / 2)], -th[ray_at(g, 0, 3 * PI / 2)],
             -th[ray_at(g, 1, PI / 2)], th[ray_at(g, 1, 3 * PI / 2)]]
    v = classify(cfg)
    ok = err < 1e-9 and all(np.sign(t) == sign for t in turns) and \
        (v.outcome, v.tier) == (outcome, Tier.FLAT_ORDER)
    report(5, ok, f"phase {phase:.3f}: oracle err {err:.1e}, outward turns {np.round(turns, 12)}, "
                  f"{v.outcome}/{v.tier}")
    assert err < 1e-9
    assert all(np.sign(t) == sign for t in turns)
    assert (v.outcome, v.tier) == (outcome, Tier.FLAT_ORDER)


# --- 6 ------------------------------------------------------------------------

def test_criterion_06_tree2_inconclusive():
    cfg = gallery.tree2()
    assert np.all(cfg.phase == 0)
    v = classify(cfg)
    tied = [e for e in v.evidence if e.resolution == "tied"]
    outward = [e for e in v.evidence if e.resolution == "outward"]
    # recompute the middle differences straight from zeta_hat
    zh = solve_zeta_hat(cfg).vector.theta
    g = cfg.graph
    middle = []
    for e in tied:
        a, b = (int(g.ray_index[h]) for h in e.pair)
        middle.append(float(abs(zh[b] - zh[a])))
    ok = v.outcome == Outcome.INCONCLUSIVE and len(tied) == 2 and len(outward) == 4 and \
        max(middle) < 1e-10 and all(e.tier == Tier.FLAT_ORDER for e in v.evidence)
    report(6, ok, f"{v.outcome}; middle differences {middle}, {len(outward)} outward pairs")
    assert v.outcome == Outcome.INCONCLUSIVE
    assert len(tied) == 2 and max(middle) < 1e-10
    assert len(outward) == 4 and all(e.separation > 1e-10 for e in outward)


# --- 7 ------------------------------------------------------------------------

def test_criterion_07_gyroid_vertical_rigidity():
    g4 = vertical_rigidity(gallery.gyroid4())
    g3 = vertical_rigidity(gallery.gyroid3())
    ok = g4.kernel_dim >= 1 and g3.rank == g3.n_cols
    report(7, ok, f"gyroid4 kernel dim {g4.kernel_dim}; gyroid3 rank {g3.rank}/{g3.n_cols}")
    assert g4.kernel_dim >= 1 and not g4.is_rigid
    assert g3.rank == g3.n_cols and g3.is_rigid


# --- 8 ------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["tree1", "tree2", "polygram"])
def test_criterion_08_lines_stay_opposite(name):
    cfg = gallery.get(name)
    cfg = cfg.replace(mu=random_mu(cfg.graph, 11))
    worst = 0.0
    for eps in DEFAULT_PROBES:
        res = continuation_solve(cfg, eps)
        worst = max(worst, lemma_lines_residual(cfg.graph, half_edge_angles(cfg.graph, res.chi)))
    report(8, worst < 1e-9, f"{cfg.name}: max opposite-angle defect {worst:.1e}")
    assert worst < 1e-9


# --- 9 ------------------------------------------------------------------------

def test_criterion_09_euler_relation():
    bad = []
    for cfg in gallery.all_configs():
        g = cfg.graph
        if g.n_vertices - (g.n_edges + g.n_rays) + g.n_rays + g.n_faces != 1:
            bad.append(cfg.name)
    report(9, not bad, f"Euler relation, failures {bad}")
    assert bad == []


def test_criterion_09_trivial_vectors_in_D():
    worst = 0.0
    for cfg in gallery.all_configs():
        space = deformation_space(cfg)
        for vec in (scaling_vector(cfg.graph), rotation_vector(cfg.graph)):
            worst = max(worst, space.residual(vec))
    report(9, worst < 1e-9, f"scaling and rotation residual {worst:.1e}")
    assert worst < 1e-9


def _fd(fun, z0, h):
    cols = []
    for k in range(z0.size):
        dz = np.zeros_like(z0)
        dz[k] = h
        cols.append((fun(z0 + dz) - fun(z0 - dz)) / (2 * h))
    return np.column_stack(cols)


def test_criterion_09_jacobians_match_fd():
    worst = 0.0
    rng = np.random.default_rng(5)
    for cfg in gallery.all_configs():
        g = cfg.graph
        center = DeformationVector.center(g)
        # at the center and at a nearby point
        for z0 in (center.to_real(), center.to_real() + 0.01 * rng.normal(size=center.to_real().size)):
            J = jacobian_matrix(g, DeformationVector.from_real(z0, g.n_edges))
            fd = _fd(lambda z: residual(g, DeformationVector.from_real(z, g.n_edges)), z0, 1e-5)
            worst = max(worst, float(np.max(np.abs(J - fd), initial=0)))
        if g.n_edges:
            K = default_coupling(cfg).K
            rig = vertical_rigidity(cfg, cfg.phase, K)

            def G(p):
                return np.concatenate([F_ver(g, p, K, rig.basis), P_ver(g, p)])

            fd = _fd(G, cfg.phase.astype(float), 1e-6)
            worst = max(worst, float(np.max(np.abs(rig.matrix - fd), initial=0)))
    report(9, worst < 1e-6, f"Jacobian vs finite differences {worst:.1e}")
    assert worst < 1e-6


def test_criterion_09_gauge_law():
    rng = np.random.default_rng(2025)
    configs = [c for c in gallery.all_configs() if c.graph.n_edges]
    worst, cases = 0.0, 0
    while cases < 100:
        cfg = configs[cases % len(configs)]
        g = cfg.graph
        cfg = cfg.replace(upsilon=rng.uniform(0.3, 3, g.n_half_edges))
        chi = DeformationVector(rng.normal(size=g.n_edges) + 1j * rng.normal(size=g.n_edges),
                                rng.normal(size=g.n_rays))
        lam = complex(rng.normal(), rng.normal())
        phi = rng.uniform(-PI, PI, g.n_edges)
        before = F_ver_all(g, phi, K_values(cfg, chi))
        after = F_ver_all(g, phi, K_values(cfg, gauge_transform(g, chi, lam)))
        expect = np.exp(-minimal_edges(g).cut_length * lam.real)
        assert np.allclose(gauge_factors(g, lam), expect, rtol=1e-12)
        for b in range(g.n_vertices):
            if abs(before[b]) > 1e-8:
                worst = max(worst, abs(after[b] / before[b] / expect[b] - 1))
        cases += 1
    report(9, worst < 1e-10, f"gauge law on {cases} cases, worst relative error {worst:.1e}")
    assert worst < 1e-10


def test_criterion_09_trivial_phases_balanced():
    rng = np.random.default_rng(8)
    worst, n = 0.0, 0
    for cfg in gallery.all_configs():
        g = cfg.graph
        if not g.n_edges:
            continue
        for phi in trivial_phases(g)[0]:
            K = rng.uniform(0.1, 5, g.n_edges)
            worst = max(worst, float(np.max(np.abs(F_ver_all(g, phi, K)))))
            n += 1
    # sin(pi) evaluates to 1.2e-16, so the forces are round-off, not zero
    report(9, worst < 1e-14, f"{n} trivial phases, max force {worst:.1e}")
    assert worst < 1e-14


def test_criterion_09_full_suite_runtime(suite_start):
    elapsed = time.perf_counter() - suite_start
    report(9, elapsed < 30, f"suite runtime {elapsed:.1f} s")
    assert elapsed < 30.0


# --- 10 -----------------------------------------------------------------------

def test_criterion_10_continuation_order():
    cfg = gallery.triangle()
    cfg = cfg.replace(mu=random_mu(cfg.graph, 3))
    zd = solve_zeta_dot(cfg).vector
    vals = []
    for eps in (0.08, 0.04, 0.02):
        res = continuation_solve(cfg, eps)
        vals.append((res.zeta - eps**2 * zd).norm() / eps**4)
    ratios = [b / a for a, b in zip(vals, vals[1:])]
    ok = all(0.5 <= r <= 2 for r in ratios)
    report(10, ok, f"scaled remainders {np.round(vals, 6)}, ratios {np.round(ratios, 4)}")
    assert all(0.5 <= r <= 2 for r in ratios)
