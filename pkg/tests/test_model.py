import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saddle_config import gallery
from saddle_config.errors import (
    CoincidentVertices,
    EdgeInteriorOverlap,
    LoopEdge,
    NotInvolution,
    NotTransitive,
    PhaseNotAntisymmetric,
    SchemaViolation,
    UpsilonNotPositive,
)
from saddle_config.gallery import assemble
from saddle_config.model import (
    PseudoRotationSystem,
    VertexClass,
    build_graph,
    classify_vertex,
    config_from_dict,
    config_to_dict,
    dumps_config,
    load_config,
    orientation,
    parallel_classes,
    save_config,
)

PI = math.pi


def tree1_graph():
    return gallery.tree1().graph


def test_tree1_graph_shape():
    g = tree1_graph()
    assert (g.n_vertices, g.n_edges, g.n_rays, g.n_faces) == (2, 1, 6, 0)
    assert g.euler_characteristic() == 1
    assert [g.degree(v) for v in range(2)] == [4, 4]


def test_single_vertex_four_rays():
    g = assemble([0], [], [(0, 0), (0, PI / 2), (0, PI), (0, 3 * PI / 2)])
    # |E| counts rays as edges too
    assert g.n_vertices - (g.n_edges + g.n_rays) + g.n_rays + g.n_faces == 1
    assert g.n_faces == 0


def test_coincident_vertices_rejected():
    with pytest.raises(CoincidentVertices):
        assemble([0, 0], [(0, 1)], [(0, PI), (1, 0)])


def test_not_involution():
    with pytest.raises(NotInvolution):
        PseudoRotationSystem((1, 2, 0), (0, 1, 2))


def test_not_transitive():
    # two isolated rays
    with pytest.raises(NotTransitive):
        PseudoRotationSystem((0, 1), (0, 1))


def test_loop_edge():
    # both halves of one edge at the same vertex
    with pytest.raises(LoopEdge):
        prs = PseudoRotationSystem((1, 0), (1, 0))
        build_graph(prs, [0], {})


def test_crossing_rays_rejected():
    # rays from 0 and 1 meeting above the x-axis
    with pytest.raises(EdgeInteriorOverlap):
        assemble([0, 1], [(0, 1)], [(0, PI / 4), (0, PI), (1, 3 * PI / 4), (1, 0)])


def test_antisymmetric_storage():
    for cfg in gallery.all_configs():
        g = cfg.graph
        for h in g.closed_edges:
            m = g.iota[h]
            assert g.edge_sign[h] == -g.edge_sign[m]
            assert g.half_edge_u[h] == -g.half_edge_u[m]
            assert g.half_edge_length[h] == g.half_edge_length[m]


def test_orientation_examples():
    assert orientation(tree1_graph()) is not None
    assert orientation(gallery.triangle().graph) is not None
    three = assemble([0], [], [(0, 0), (0, 2 * PI / 3), (0, 4 * PI / 3)])
    assert orientation(three) is None


def test_orientation_is_consistent():
    g = gallery.square().graph
    s = orientation(g)
    for h in range(g.n_half_edges):
        assert s[g.sigma[h]] == -s[h]
        if g.iota[h] != h:
            assert s[g.iota[h]] == -s[h]


def two_vertex_graph(left, right):
    # left rays point into the half-plane Re < 0, right rays into Re > 1: no crossings
    rays = [(0, a) for a in left] + [(1, a) for a in right]
    return assemble([0, 1], [(0, 1)], rays)


angle_sets = st.lists(st.integers(1, 35), min_size=1, max_size=5, unique=True)


@settings(max_examples=60, deadline=None)
@given(angle_sets, angle_sets)
def test_orientation_iff_even_degree_on_two_vertex_trees(a, b):
    left = [PI / 2 + PI * k / 36 for k in a]
    right = [-PI / 2 + PI * k / 36 for k in b]
    g = two_vertex_graph(left, right)
    even = all(g.degree(v) % 2 == 0 for v in range(g.n_vertices))
    assert (orientation(g) is not None) == even
    assert g.euler_characteristic() == 1


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 71), min_size=1, max_size=9, unique=True))
def test_single_vertex_orientation_and_euler(ks):
    g = assemble([0], [], [(0, 2 * PI * k / 72) for k in ks])
    assert g.euler_characteristic() == 1
    if orientation(g) is not None:
        assert len(ks) % 2 == 0


def test_classify_vertex_examples():
    g = assemble([0], [], [(0, 0), (0, PI / 2), (0, PI), (0, 3 * PI / 2)])
    assert classify_vertex(g, 0) == VertexClass.ORDINARY
    # all four along one line: two parallel rays each way
    g = assemble([0], [], [(0, 0), (0, 0), (0, PI), (0, PI)])
    assert classify_vertex(g, 0) == VertexClass.DEGENERATE
    g = assemble([0], [], [(0, 0), (0, 0), (0, PI), (0, PI), (0, PI / 2), (0, 3 * PI / 2 + 0.3)])
    assert classify_vertex(g, 0) == VertexClass.SPECIAL


def test_parallel_classes_examples():
    pc = parallel_classes(tree1_graph())
    vertical = [grp for grp in pc.ray_groups if len(grp) == 2]
    assert len(vertical) == 2 and len(pc.ray_pairs) == 2
    assert parallel_classes(gallery.tree3().graph).has_parallel_edges
    assert not parallel_classes(gallery.triangle().graph).has_parallel_rays


def test_round_trip_gallery(tmp_path):
    for cfg in gallery.all_configs():
        p = tmp_path / f"{cfg.name}.json"
        save_config(cfg, p)
        back = load_config(p)
        assert dumps_config(back) == dumps_config(cfg)
        g, h = cfg.graph, back.graph
        assert np.array_equal(g.positions, h.positions)
        assert np.array_equal(g.ray_theta, h.ray_theta)
        assert np.array_equal(cfg.phase, back.phase)
        assert np.array_equal(cfg.mu, back.mu)
        assert np.array_equal(cfg.xi.to_real(), back.xi.to_real())


def test_load_tree1_phase_zero(tmp_path):
    p = tmp_path / "tree1.json"
    save_config(gallery.tree1(), p)
    assert np.all(load_config(p).phase == 0)


def test_negative_upsilon_rejected():
    doc = config_to_dict(gallery.tree1())
    doc["upsilon"]["0"] = -1.0
    with pytest.raises(UpsilonNotPositive):
        config_from_dict(doc)


def test_symmetric_phase_rejected():
    doc = config_to_dict(gallery.tree1())
    doc["phase"] = {"0": 0.3, "1": 0.3}
    with pytest.raises(PhaseNotAntisymmetric):
        config_from_dict(doc)


def test_antisymmetric_phase_on_both_halves_accepted():
    doc = config_to_dict(gallery.tree1())
    doc["phase"] = {"0": 0.3, "1": -0.3}
    assert config_from_dict(doc).phase_on(0) == pytest.approx(0.3)
    assert config_from_dict(doc).phase_on(1) == pytest.approx(-0.3)


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("sigma"),
    lambda d: d.update(iota=[0]),
    lambda d: d.update(half_edges="six"),
    lambda d: d.update(mu={"0": [1.0]}),
])
def test_schema_errors(mutate):
    doc = json.loads(dumps_config(gallery.tree1()))
    mutate(doc)
    with pytest.raises(SchemaViolation):
        config_from_dict(doc)


def test_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{nope")
    with pytest.raises(SchemaViolation):
        load_config(p)
