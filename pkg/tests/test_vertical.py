import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saddle_config import gallery
from saddle_config.discrete import minimal_edges
from saddle_config.model import DeformationVector
from saddle_config.vertical import (
    F_ver,
    F_ver_all,
    K_values,
    P_ver,
    default_coupling,
    gauge_factors,
    gauge_transform,
    is_balanced_phase,
    is_trivial,
    newton_phase,
    potential_to_phase,
    solve_phases,
    trivial_phases,
    vertical_rigidity,
)

PI = math.pi
TWO_PI = 2 * PI


def circ_dist(a, b):
    return np.abs(np.angle(np.exp(1j * (np.asarray(a) - np.asarray(b)))))


def cycle_phase(g, values):
    """Phase with the given values on the half-edges of the first face cycle."""
    phi = np.zeros(g.n_edges)
    for h, val in zip(g.face_cycles[0], values):
        phi[g.edge_of[h]] = g.edge_sign[h] * val
    return phi


# --- K ------------------------------------------------------------------------

def test_K_examples():
    cfg = gallery.triangle()
    g = cfg.graph
    assert np.allclose(K_values(cfg, DeformationVector.zeros(g)), 1)
    ups = np.linspace(0.5, 2.0, g.n_half_edges)
    cfg = cfg.replace(upsilon=ups)
    stretch = DeformationVector(g.edge_u, np.zeros(g.n_rays))
    partners = [g.iota[h] for h in g.closed_edges]
    expect = ups[list(g.closed_edges)] * ups[partners] * math.exp(-1)
    assert np.allclose(K_values(cfg, stretch), expect)


def test_K_positive_and_symmetric():
    rng = np.random.default_rng(4)
    for cfg in gallery.all_configs():
        g = cfg.graph
        if not g.n_edges:
            continue
        cfg = cfg.replace(upsilon=rng.uniform(0.2, 3, g.n_half_edges))
        chi = DeformationVector(rng.normal(size=g.n_edges) + 1j * rng.normal(size=g.n_edges),
                                rng.normal(size=g.n_rays))
        K = K_values(cfg, chi)
        assert np.all(K > 0)
        # the same value seen from the other half-edge: conj(-u) times -x
        for e, h in enumerate(g.closed_edges):
            m = g.iota[h]
            back = cfg.upsilon[m] * cfg.upsilon[h] * math.exp(
                -(chi.on_half_edge(g, m) * np.conj(g.half_edge_u[m])).real)
            assert back == pytest.approx(K[e], rel=1e-12)


def test_K_scaling_under_gauge():
    cfg = gallery.square()
    g = cfg.graph
    chi = DeformationVector(0.1 * g.x0, np.zeros(g.n_rays))
    lam = 0.3 - 0.7j
    ratio = K_values(cfg, gauge_transform(g, chi, lam)) / K_values(cfg, chi)
    assert np.allclose(ratio, np.exp(-g.lengths * lam.real), rtol=1e-12)


# --- periods and forces -------------------------------------------------------

def test_P_ver_examples():
    g = gallery.triangle().graph
    assert P_ver(g, cycle_phase(g, [0, 0, 0]))[0] == 0
    assert abs(P_ver(g, cycle_phase(g, [2 * PI / 3] * 3))[0]) < 1e-12
    assert abs(P_ver(g, cycle_phase(g, [PI / 2] * 3))[0]) == pytest.approx(PI / 2)
    assert P_ver(g, cycle_phase(g, [PI / 2] * 3))[0] != 0


def test_trivial_phases_always_balanced():
    rng = np.random.default_rng(9)
    for cfg in gallery.all_configs():
        g = cfg.graph
        if not g.n_edges:
            continue
        phases, _ = trivial_phases(g)
        for phi in phases:
            # sin(pi) is 1.2e-16 in floating point, not 0
            assert np.max(np.abs(F_ver_all(g, phi, rng.uniform(0.1, 5, g.n_edges)))) < 1e-14
            assert is_trivial(phi)
            assert np.max(np.abs(P_ver(g, phi)), initial=0) < 1e-12


def test_gyroid3_balanced():
    cfg = gallery.gyroid3()
    K = default_coupling(cfg).K
    assert np.max(np.abs(F_ver(cfg, cfg.phase, K))) < 1e-12
    assert is_balanced_phase(cfg)
    assert not is_trivial(cfg.phase)


def test_tree1_quarter_phase_unbalanced():
    cfg = gallery.tree1(PI / 2)
    F = F_ver(cfg, cfg.phase, np.ones(1))
    assert abs(F[0]) == pytest.approx(1.0)
    assert not is_balanced_phase(cfg)


# --- rigidity -----------------------------------------------------------------

def test_gyroid4_not_vertically_rigid():
    rig = vertical_rigidity(gallery.gyroid4())
    assert is_balanced_phase(gallery.gyroid4())
    assert not rig.is_rigid and rig.kernel_dim >= 1
    # kernel vectors are sliding modes
    assert np.max(np.abs(rig.matrix @ rig.kernel.T)) < 1e-10


def test_gyroid3_vertically_rigid():
    rig = vertical_rigidity(gallery.gyroid3())
    assert rig.is_rigid and rig.rank == 3 == rig.n_cols


def test_tree1_vertically_rigid():
    rig = vertical_rigidity(gallery.tree1())
    assert rig.is_rigid and rig.matrix.shape == (1, 1)


def test_vertical_jacobian_fd():
    cfg = gallery.polygram(5)
    g = cfg.graph
    K = default_coupling(cfg).K
    phi = cfg.phase
    rig = vertical_rigidity(cfg, phi, K)
    basis = rig.basis

    def G(p):
        return np.concatenate([F_ver(g, p, K, basis), np.angle(np.exp(1j * (P_ver(g, p))))])

    h = 1e-6
    cols = []
    for k in range(g.n_edges):
        d = np.zeros(g.n_edges)
        d[k] = h
        cols.append((G(phi + d) - G(phi - d)) / (2 * h))
    assert np.max(np.abs(np.column_stack(cols) - rig.matrix)) < 1e-7


# --- phase solving ------------------------------------------------------------

def test_tree1_phases():
    sols = solve_phases(gallery.tree1().graph)
    vals = sorted(float(abs(s.phase[0])) for s in sols)
    assert vals == [0.0, PI]
    assert all(s.trivial for s in sols)


def test_tree3_phases_trivial_per_class():
    g = gallery.tree3().graph
    sols = solve_phases(g)
    assert {tuple(np.round(np.abs(s.phase), 12)) for s in sols} == {(0.0, 0.0), (round(PI, 12),) * 2}
    assert all(s.trivial for s in sols)


def test_equilateral_triangle_has_nontrivial_phases():
    g = gallery.triangle().graph
    sols = solve_phases(g)
    assert any(not s.trivial for s in sols)
    for s in sols:
        assert s.residual < 1e-9


def test_newton_from_quarter_seed_converges():
    g = gallery.triangle().graph
    phi, res, ok = newton_phase(g, np.ones(3), cycle_phase(g, [PI / 2] * 3))
    assert ok and res < 1e-10
    assert not is_trivial(phi)
    assert np.allclose(np.abs(np.sin(phi)), math.sin(2 * PI / 3))


def test_scalene_triangle_only_trivial():
    sols = solve_phases(gallery.triangle_scalene().graph)
    assert sols and all(s.trivial for s in sols)


def test_phases_deterministic():
    g = gallery.square().graph
    a = [s.phase for s in solve_phases(g, seed=1)]
    b = [s.phase for s in solve_phases(g, seed=1)]
    assert len(a) == len(b) and all(np.array_equal(x, y) for x, y in zip(a, b))


def test_potential_to_phase_examples():
    g = gallery.tree1().graph
    assert np.all(potential_to_phase(g, [0.7, 0.7]) == 0)
    assert abs(potential_to_phase(g, [0, PI])[0]) == pytest.approx(PI)
    g = gallery.triangle().graph
    phi = potential_to_phase(g, [0, 2 * PI / 3, 4 * PI / 3])
    assert np.max(np.abs(P_ver(g, phi))) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["triangle", "square", "polygram", "misc1", "benzene"]),
       st.integers(0, 2**32 - 1), st.floats(-10, 10))
def test_potential_phases_close_periods(name, seed, shift):
    g = gallery.get(name).graph
    pot = np.random.default_rng(seed).uniform(-PI, PI, g.n_vertices)
    phi = potential_to_phase(g, pot)
    assert np.max(np.abs(P_ver(g, phi)), initial=0) < 1e-9
    assert np.max(circ_dist(phi, potential_to_phase(g, pot + shift))) < 1e-9


# --- gauge law ----------------------------------------------------------------

def test_gauge_identity_and_rotation():
    cfg = gallery.triangle()
    g = cfg.graph
    chi = DeformationVector(0.2 * g.x0 * 1j, np.full(g.n_rays, 0.1))
    same = gauge_transform(g, chi, 0)
    assert np.array_equal(same.to_real(), chi.to_real())
    rot = gauge_transform(g, chi, 1j)
    assert np.allclose(rot.theta, chi.theta + PI / 2)
    assert np.allclose(K_values(cfg, rot), K_values(cfg, chi))


def test_gauge_law_randomized():
    rng = np.random.default_rng(2024)
    names = ["tree1", "tree2", "triangle", "triangle-scalene", "square", "misc1", "benzene",
             "polygram", "tree3"]
    cases = 0
    while cases < 100:
        cfg = gallery.get(names[cases % len(names)])
        g = cfg.graph
        cfg = cfg.replace(upsilon=rng.uniform(0.3, 3, g.n_half_edges))
        chi = DeformationVector(rng.normal(size=g.n_edges) + 1j * rng.normal(size=g.n_edges),
                                rng.normal(size=g.n_rays))
        lam = complex(rng.normal(), rng.normal())
        phi = rng.uniform(-PI, PI, g.n_edges)
        before = F_ver_all(g, phi, K_values(cfg, chi))
        after = F_ver_all(g, phi, K_values(cfg, gauge_transform(g, chi, lam)))
        m = minimal_edges(g)
        expect = np.exp(-m.cut_length * lam.real)
        assert np.allclose(gauge_factors(g, lam), expect, rtol=1e-12)
        for b in range(g.n_vertices):
            if abs(before[b]) > 1e-8:
                assert np.sign(after[b]) == np.sign(before[b])
                assert after[b] / before[b] == pytest.approx(expect[b], rel=1e-10)
        cases += 1
