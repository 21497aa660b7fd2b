"""Edit operations, affected-region detection, restricted re-optimization,
and the undo journal."""

import numpy as np
import pytest

import corpus
from roofforge import dual_from_primal
from roofforge.editing import (EDIT_KINDS, PLANARITY_TARGET, AffectedRegion,
                               EditJournal, EditOp, apply_edit,
                               edit_and_reoptimize, reoptimize_region,
                               smallest_affected_region)
from roofforge.energy import roof_planarity
from roofforge.errors import (InvalidTarget, RegionIsAllRoofVertices,
                              WouldCreateDegenerateFace)
from roofforge.solver import SolveSpec


def canon_faces(graph):
    out = set()
    for f in graph.faces:
        i = f.index(min(f))
        out.add(tuple(f[i:] + f[:i]))
    return frozenset(out)


# -- EditOp serialization -----------------------------------------------------

def test_op_json_round_trip():
    op = EditOp(kind="move_vertex", vertex=5, delta=(0.1, 0.0, 0.0))
    assert EditOp.from_json(op.to_json()) == op
    op2 = EditOp(kind="force_adjacent", faces=(1, 4), pair=(7, 9))
    assert EditOp.from_json(op2.to_json()) == op2


def test_op_rejects_unknowns():
    with pytest.raises(InvalidTarget):
        EditOp(kind="rotate_face")
    with pytest.raises(InvalidTarget):
        EditOp.from_json({"kind": "move_vertex", "vertex": 5, "speed": 3})
    with pytest.raises(InvalidTarget):
        EditOp.from_json({"vertex": 5})
    with pytest.raises(InvalidTarget):
        EditOp(kind="move_vertex", vertex=5, delta=(float("nan"), 0.0, 0.0))


# -- coordinate ops -----------------------------------------------------------

def test_move_vertex_translates_only_target():
    fx = corpus.fixture("hip_rect")
    g, e = apply_edit(fx.graph, fx.emb3d(),
                      EditOp(kind="move_vertex", vertex=5, delta=(0.1, 0.2, 0.3)))
    assert g is fx.graph
    assert e[5] == (3.1, 1.2, 1.3)
    assert e.equals_bitwise(fx.emb3d(), ids=[1, 2, 3, 4, 6])


def test_move_edge_translates_both_endpoints():
    fx = corpus.fixture("hip_rect")
    g, e = apply_edit(fx.graph, fx.emb3d(),
                      EditOp(kind="move_edge", edge=(5, 6), delta=(0.0, 0.1, 0.0)))
    assert e[5] == (3.0, 1.1, 1.0) and e[6] == (1.0, 1.1, 1.0)


def test_move_unknown_targets_rejected():
    fx = corpus.fixture("hip_rect")
    with pytest.raises(InvalidTarget):
        apply_edit(fx.graph, fx.emb3d(), EditOp(kind="move_vertex", vertex=99))
    with pytest.raises(InvalidTarget):
        apply_edit(fx.graph, fx.emb3d(), EditOp(kind="move_edge", edge=(5, 99)))


# -- snap_edge ----------------------------------------------------------------

def test_snap_ridge_collapses_hip_to_pyramid():
    fx = corpus.fixture("hip_rect")
    g, e = apply_edit(fx.graph, fx.emb3d(), EditOp(kind="snap_edge", edge=(5, 6)))
    assert sorted(len(f) for f in g.faces) == [3, 3, 3, 3]
    assert g.roof_ids == (5,)
    assert e[5] == (2.0, 1.0, 1.0)  # midpoint of the old ridge
    assert e.equals_bitwise(fx.emb3d(), ids=[1, 2, 3, 4])


def test_snap_mixed_edge_keeps_outline_vertex():
    # Snapping (2, 5) would collapse triangle (2, 3, 5); the edit must refuse.
    fx = corpus.fixture("hip_rect")
    with pytest.raises(WouldCreateDegenerateFace):
        apply_edit(fx.graph, fx.emb3d(), EditOp(kind="snap_edge", edge=(2, 5)))


def test_snap_outline_edge_rejected():
    fx = corpus.fixture("hip_rect")
    with pytest.raises(InvalidTarget):
        apply_edit(fx.graph, fx.emb3d(), EditOp(kind="snap_edge", edge=(1, 2)))


def test_snap_renumbers_ids_densely():
    # u_shape has four roof vertices; snapping (9, 11) keeps ids dense.
    fx = corpus.fixture("u_shape")
    if ((9, 11) not in fx.graph.edge_faces()
            or len(fx.graph.faces_of_edge(9, 11)) != 2):
        pytest.skip("fixture lost the expected edge")
    g, e = apply_edit(fx.graph, fx.emb3d(), EditOp(kind="snap_edge", edge=(9, 11)))
    assert sorted(v.id for v in g.vertices) == list(range(1, g.n_vertices + 1))
    assert set(g.roof_ids) == {9, 10, 11}


# -- merge / split ------------------------------------------------------------

def test_merge_then_split_round_trips_hip():
    fx = corpus.fixture("hip_rect")
    g1, e1 = apply_edit(fx.graph, fx.emb3d(), EditOp(kind="merge_faces", faces=(0, 1)))
    assert sorted(len(f) for f in g1.faces) == [3, 4, 5]
    d1 = dual_from_primal(g1, e1.project_xy())
    assert d1.merge_map == {1: 0}
    assert len(d1.adjacency_pairs()) == 3
    g2, e2 = apply_edit(g1, e1, EditOp(kind="split_face", face=0, pair=(2, 5)))
    assert canon_faces(g2) == canon_faces(fx.graph)
    assert e2.equals_bitwise(fx.emb3d())


def test_merge_requires_exactly_one_shared_edge():
    fx = corpus.fixture("hip_rect")
    with pytest.raises(InvalidTarget):
        apply_edit(fx.graph, fx.emb3d(), EditOp(kind="merge_faces", faces=(0, 0)))
    # Faces 1 and 3 of the hip share no edge.
    with pytest.raises(InvalidTarget):
        apply_edit(fx.graph, fx.emb3d(), EditOp(kind="merge_faces", faces=(1, 3)))


def test_split_rejects_bad_pairs():
    fx = corpus.fixture("hip_rect")
    with pytest.raises(InvalidTarget):  # adjacent in the cycle
        apply_edit(fx.graph, fx.emb3d(), EditOp(kind="split_face", face=0, pair=(1, 2)))
    with pytest.raises(InvalidTarget):  # not in the face
        apply_edit(fx.graph, fx.emb3d(), EditOp(kind="split_face", face=1, pair=(1, 5)))
    with pytest.raises(InvalidTarget):  # one part would lose its outline edge
        apply_edit(fx.graph, fx.emb3d(), EditOp(kind="split_face", face=0, pair=(2, 6)))


# -- force_adjacent -----------------------------------------------------------

def test_force_adjacent_creates_dual_pair():
    fx = corpus.fixture("l_shape")
    g, e = apply_edit(fx.graph, fx.emb3d(),
                      EditOp(kind="force_adjacent", faces=(1, 4), pair=(7, 9)))
    assert len(g.faces_of_edge(7, 9)) == 2
    d = dual_from_primal(g, e.project_xy())
    assert (1, 4) in d.adjacency_pairs()


def test_force_adjacent_rejects_existing_edge():
    fx = corpus.fixture("l_shape")
    with pytest.raises(InvalidTarget):
        apply_edit(fx.graph, fx.emb3d(),
                   EditOp(kind="force_adjacent", faces=(0, 2), pair=(7, 8)))
    with pytest.raises(InvalidTarget):
        apply_edit(fx.graph, fx.emb3d(),
                   EditOp(kind="force_adjacent", faces=(0, 1), pair=(8, 7)))


# -- affected region ----------------------------------------------------------

def test_region_empty_when_slide_stays_valid():
    fx = corpus.fixture("hip_rect")
    moved = fx.emb2d.replaced({5: (2.6, 1.0)})
    r = smallest_affected_region(fx.graph, moved, 5)
    assert r.region == frozenset()
    assert r.seed == 5


def test_region_proper_subset_on_t_shape():
    fx = corpus.fixture("t_shape")
    moved = fx.emb2d.replaced({9: (2.5, 0.55)})
    r = smallest_affected_region(fx.graph, moved, 9)
    assert r.region == frozenset({10})


def test_region_outline_seed_rejected():
    fx = corpus.fixture("hip_rect")
    with pytest.raises(InvalidTarget):
        smallest_affected_region(fx.graph, fx.emb2d, 1)


def test_region_everything_raises():
    fx = corpus.fixture("hip_rect")
    moved = fx.emb2d.replaced({5: (3.0, 1.05)})
    with pytest.raises(RegionIsAllRoofVertices):
        smallest_affected_region(fx.graph, moved, 5)


# -- restricted re-optimization -----------------------------------------------

def test_reoptimize_empty_region_is_identity():
    fx = corpus.fixture("hip_rect")
    emb = fx.emb3d()
    res = reoptimize_region(fx.graph, emb, AffectedRegion(frozenset(), 5),
                            SolveSpec(mode="primal"))
    assert res.embedding.equals_bitwise(emb)
    assert res.converged and res.iterations == 0


def test_reoptimize_rejects_outline_in_region():
    fx = corpus.fixture("hip_rect")
    with pytest.raises(InvalidTarget):
        reoptimize_region(fx.graph, fx.emb3d(),
                          AffectedRegion(frozenset({2}), 5), SolveSpec())


def test_reoptimize_wants_3d():
    fx = corpus.fixture("hip_rect")
    with pytest.raises(ValueError):
        reoptimize_region(fx.graph, fx.emb2d,
                          AffectedRegion(frozenset({6}), 5), SolveSpec())


def test_region_reoptimize_restores_planarity_bit_identically_outside():
    fx = corpus.fixture("pentagon_ridge")
    before = fx.emb3d()
    op = EditOp(kind="move_vertex", vertex=6, delta=(0.0, 0.05, 0.0))
    g, res, region = edit_and_reoptimize(fx.graph, before, op, SolveSpec(mode="primal"))
    assert region == frozenset({7, 8})
    assert res.converged
    assert res.planarity < PLANARITY_TARGET
    moved = np.add(before[6], (0.0, 0.05, 0.0))
    assert res.embedding[6] == tuple(moved)
    assert res.embedding.equals_bitwise(before, ids=[1, 2, 3, 4, 5])
    assert not res.embedding.equals_bitwise(before, ids=[7])


def test_edit_pipeline_handles_topology_ops():
    fx = corpus.fixture("hip_rect")
    g, res, region = edit_and_reoptimize(fx.graph, fx.emb3d(),
                                         EditOp(kind="snap_edge", edge=(5, 6)),
                                         SolveSpec(mode="primal"))
    assert sorted(len(f) for f in g.faces) == [3, 3, 3, 3]
    assert res.planarity < PLANARITY_TARGET  # all-triangle roof is planar


# -- journal ------------------------------------------------------------------

def test_journal_undo_restores_bit_exact_snapshots():
    fx = corpus.fixture("hip_rect")
    journal = EditJournal()
    g0, e0 = fx.graph, fx.emb3d()
    g1, r1, _ = edit_and_reoptimize(g0, e0, EditOp(kind="move_vertex", vertex=5,
                                                   delta=(0.0, 0.1, 0.0)),
                                    SolveSpec(mode="primal"), journal)
    g2, r2, _ = edit_and_reoptimize(g1, r1.embedding,
                                    EditOp(kind="snap_edge", edge=(5, 6)),
                                    SolveSpec(mode="primal"), journal)
    assert len(journal) == 2
    gb, eb = journal.undo()
    assert gb == g1 and eb.equals_bitwise(r1.embedding)
    ga, ea = journal.undo()
    assert ga == g0 and ea.equals_bitwise(e0)
    with pytest.raises(InvalidTarget):
        journal.undo()


# -- invariants under random edit sequences ------------------------------------

def test_random_valid_edits_preserve_invariants():
    rng = np.random.default_rng(17)
    fx = corpus.fixture("plus_shape")
    g, e = fx.graph, fx.emb3d()
    applied = 0
    for _ in range(60):
        kind = EDIT_KINDS[rng.integers(0, len(EDIT_KINDS))]
        try:
            if kind == "move_vertex":
                vid = int(rng.choice(g.roof_ids))
                op = EditOp(kind=kind, vertex=vid,
                            delta=tuple(rng.normal(scale=0.02, size=3)))
            elif kind == "move_edge":
                edges = list(g.edge_faces())
                a, b = edges[rng.integers(0, len(edges))]
                op = EditOp(kind=kind, edge=(a, b),
                            delta=tuple(rng.normal(scale=0.02, size=3)))
            elif kind == "snap_edge":
                edges = [e_ for e_ in g.edge_faces() if not
                         (g.is_outline(e_[0]) and g.is_outline(e_[1]))]
                op = EditOp(kind=kind, edge=edges[rng.integers(0, len(edges))])
            elif kind == "merge_faces":
                nf = len(g.faces)
                op = EditOp(kind=kind, faces=(int(rng.integers(0, nf)),
                                              int(rng.integers(0, nf))))
            elif kind == "split_face":
                fi = int(rng.integers(0, len(g.faces)))
                cyc = g.faces[fi]
                p, q = rng.choice(cyc, size=2, replace=False)
                op = EditOp(kind=kind, face=fi, pair=(int(p), int(q)))
            else:
                nf = len(g.faces)
                fi, fj = int(rng.integers(0, nf)), int(rng.integers(0, nf))
                ci, cj = g.faces[fi], g.faces[fj]
                op = EditOp(kind=kind, faces=(fi, fj),
                            pair=(int(rng.choice(ci)), int(rng.choice(cj))))
            g, e = apply_edit(g, e, op)
            applied += 1
        except (InvalidTarget, WouldCreateDegenerateFace):
            continue
        # Rebuilding through the constructor re-checks every invariant.
        assert sorted(v.id for v in g.vertices) == list(range(1, g.n_vertices + 1))
        assert set(e.ids()) == {v.id for v in g.vertices}
        for face in g.faces:
            assert len(face) >= 3
    assert applied >= 10
