"""Acceptance gate: one test per shipped guarantee, in order.

Run `pytest -v tests/test_acceptance.py` for one pass/fail line per
guarantee, or add `-s` to see the per-fixture planarity/time table and
the side-by-side metric iteration counts.
"""

import itertools
import json
import math
import subprocess
import sys

import numpy as np

import corpus
from test_adjacency import L_SHAPE, OCTAGON, SQUARE, octagon_prob, prob_matrix, ring_pairs
from test_energy import random_face

from roofforge.adjacency import resolve_greedy, resolve_sampling
from roofforge.editing import EditOp, edit_and_reoptimize
from roofforge.energy import POINTWISE_KINDS, face_planarity, roof_planarity
from roofforge.fileio import RoofGraphDocument, save_dualgraph, save_roofgraph
from roofforge.graph import (
    DualGraph,
    Embedding,
    check_validity_2d,
    dual_from_primal,
    outline_embedding,
    primal_from_dual,
)
from roofforge.solver import (
    SolveSpec,
    default_fixed_vertex,
    lift_2d_to_3d,
    optimize_dual,
    optimize_variable_heights,
    spectral_embed_2d,
    vertex_adjacency,
)

PLANARITY_TARGET = 1e-9


def normalized_planarity(graph, emb, kind="smallest_eig"):
    """Planarity after rescaling so the outline bounding box diagonal is 1."""
    o = [emb[v] for v in graph.outline_ids]
    diag = math.hypot(max(p[0] for p in o) - min(p[0] for p in o),
                      max(p[1] for p in o) - min(p[1] for p in o))
    scaled = Embedding({v: tuple(c / diag for c in emb[v]) for v in emb.ids()})
    return roof_planarity(graph, scaled, kind=kind).value


def solve_all_duals():
    out = []
    for fx in corpus.all_fixtures():
        graph = primal_from_dual(fx.dual())
        res = optimize_dual(fx.dual(), SolveSpec(mode="dual"))
        out.append((fx, graph, res))
    return out


def test_01_dual_corpus_reaches_planarity_target():
    fixtures = corpus.all_fixtures()
    assert len(fixtures) >= 16
    print()
    for fx, graph, res in solve_all_duals():
        plan = normalized_planarity(graph, res.embedding)
        print(f"  {fx.name:17s} planarity={plan:.3e} "
              f"iters={res.iterations:3d} time={res.wall_time:.3f}s")
        assert res.converged, fx.name
        assert plan < PLANARITY_TARGET, fx.name
        assert res.wall_time < 5.0, fx.name


def test_02_all_four_metrics_reach_planar_on_ablation_fixture():
    fx = corpus.fixture("hex_hip")
    graph = primal_from_dual(fx.dual())
    print()
    for kind in POINTWISE_KINDS:
        res = optimize_dual(fx.dual(), SolveSpec(mode="dual", planarity_kind=kind))
        plan = normalized_planarity(graph, res.embedding, kind=kind)
        print(f"  {kind:13s} iterations={res.iterations:3d} "
              f"final={plan:.3e} time={res.wall_time:.3f}s")
        assert res.converged, kind
        bound = 1e-6 if kind == "diag" else 1e-9
        assert plan < bound, kind


def test_03_converged_solves_project_valid_and_lift_back_planar():
    for fx, graph, res in solve_all_duals():
        emb2d = res.embedding.project_xy()
        report = check_validity_2d(graph, emb2d, tol=1e-6)
        assert report.valid, (fx.name, report.max_residual)
        h = res.embedding[default_fixed_vertex(graph)][2]
        lifted = lift_2d_to_3d(graph, emb2d, h)
        assert roof_planarity(graph, lifted).value < 1e-10, fx.name


def test_04_analytic_gradient_matches_finite_differences():
    rng = np.random.default_rng(2024)
    step = 1e-6
    for _ in range(100):
        m = int(rng.integers(4, 10))
        pts = random_face(rng, m)
        grad = face_planarity(pts).gradient
        g = np.array([grad[i] for i in range(m)])
        fd = np.zeros_like(pts)
        for i in range(m):
            for c in range(3):
                up = pts.copy(); up[i, c] += step
                dn = pts.copy(); dn[i, c] -= step
                fd[i, c] = (face_planarity(up).value
                            - face_planarity(dn).value) / (2 * step)
        ga = g.ravel() / np.linalg.norm(g.ravel())
        fa = fd.ravel() / np.linalg.norm(fd.ravel())
        assert np.linalg.norm(ga - fa) < 1e-5


def test_05_dual_primal_round_trip_is_identity_on_adjacency():
    for fx in corpus.all_fixtures():
        d = fx.dual()
        d2 = dual_from_primal(primal_from_dual(d), outline_embedding(d))
        assert d2.adjacency_pairs() == d.adjacency_pairs(), fx.name
        assert d2.merge_map == d.merge_map, fx.name


def test_06_spectral_layout_is_harmonic_and_keeps_outline_simple():
    def segments_cross(a, b, c, d):
        def orient(p, q, r):
            return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        return (orient(a, b, c) * orient(a, b, d) < 0
                and orient(c, d, a) * orient(c, d, b) < 0)

    for fx in corpus.all_fixtures():
        graph = primal_from_dual(fx.dual())
        emb = spectral_embed_2d(graph, outline_embedding(fx.dual()))
        nbrs = vertex_adjacency(graph)
        for vid in graph.roof_ids:
            mean = [sum(emb[u][c] for u in nbrs[vid]) / len(nbrs[vid])
                    for c in range(2)]
            assert math.hypot(emb[vid][0] - mean[0],
                              emb[vid][1] - mean[1]) < 1e-10, fx.name
        ring = [emb[v] for v in graph.outline_ids]
        n = len(ring)
        for i in range(n):
            for j in range(i + 1, n):
                if j in (i, (i + 1) % n) or i == (j + 1) % n:
                    continue
                assert not segments_cross(ring[i], ring[(i + 1) % n],
                                          ring[j], ring[(j + 1) % n]), fx.name


def test_07_edit_region_detection_and_restricted_reoptimize():
    fx = corpus.fixture("pentagon_ridge")
    emb = fx.emb3d()
    op = EditOp(kind="move_vertex", vertex=6, delta=(0.0, 0.05, 0.0))
    graph2, res, region = edit_and_reoptimize(fx.graph, emb, op,
                                              SolveSpec(mode="primal"))
    assert region == {7, 8}
    assert res.converged
    assert normalized_planarity(graph2, res.embedding) < PLANARITY_TARGET
    moved = (emb[6][0], emb[6][1] + 0.05, emb[6][2])
    assert res.embedding[6] == moved
    for vid in (1, 2, 3, 4, 5):
        assert res.embedding[vid] == emb[vid], vid
    assert res.embedding[7] != emb[7]


def test_08_adjacency_resolution_end_to_end():
    # Crossing conflict: the higher-probability diagonal survives.
    cand = resolve_greedy(SQUARE, prob_matrix(4, {(0, 2): 0.8, (1, 3): 0.7}))
    assert set(cand.pairs()) == ring_pairs(4) | {(0, 2)}

    # Reflex outline: the exterior pair goes first, whatever its score.
    cand = resolve_greedy(L_SHAPE, prob_matrix(6, {(1, 4): 0.99}))
    assert set(cand.pairs()) == ring_pairs(6)
    assert cand.provenance[0] == ("exterior", (1, 4))

    # Two independent conflicts: sampling equals exhaustive enumeration.
    prob = octagon_prob()
    cands = resolve_sampling(OCTAGON, prob)
    assert len(cands) == 4
    expected = []
    for keep in itertools.product([(0, 2), (1, 3)], [(4, 6), (5, 7)]):
        pairs = sorted(ring_pairs(8) | set(keep))
        score = sum(math.log(prob[i][j]) for i, j in pairs)
        expected.append((pairs, score))
    expected.sort(key=lambda e: (-e[1], e[0]))
    for cand, (pairs, score) in zip(cands, expected):
        assert cand.pairs() == pairs
        assert abs(cand.score - score) <= 1e-12 * abs(score)
        graph = primal_from_dual(DualGraph(OCTAGON, cand.adjacency))
        assert len(graph.faces) == 8


def test_09_height_variance_term_tightens_groups():
    pav = corpus.pavilion()
    groups = {v.id: v.height_group for v in pav.graph.vertices
              if v.height_group is not None}

    def solve(eta):
        res = optimize_variable_heights(
            pav.graph, pav.user2d, groups,
            SolveSpec(mode="variable_height", lam=0.0, eta=eta))
        assert res.converged
        assert normalized_planarity(pav.graph, res.embedding) < PLANARITY_TARGET
        zs = [res.embedding[v][2] for v in pav.group]
        mean = sum(zs) / len(zs)
        return sum((z - mean) ** 2 for z in zs) / len(zs)

    assert solve(1.0) < solve(0.0)


def test_10_cli_runs_are_byte_identical(tmp_path):
    dual_path = tmp_path / "t.json"
    save_dualgraph(corpus.fixture("t_shape").dual(), dual_path)
    hip = corpus.fixture("hip_rect")
    graph_path = tmp_path / "hip.json"
    save_roofgraph(RoofGraphDocument(hip.graph, hip.emb3d()), graph_path)
    ops_path = tmp_path / "ops.json"
    ops_path.write_text(json.dumps(
        [{"kind": "move_vertex", "vertex": 5, "delta": [0.0, 0.05, 0.0]}]))
    prob_path = tmp_path / "prob.json"
    prob_path.write_text(
        '{"format": "roofdual/1", "outline": [[0,0],[4,0],[4,4],[0,4]],'
        ' "probabilities": [[0,1,0.95],[1,2,0.95],[2,3,0.95],[0,3,0.95],'
        '[0,2,0.8],[1,3,0.7]]}\n')

    commands = {
        "reconstruct": ["reconstruct", "--dual", str(dual_path),
                        "-o", "{out}/t.obj", "--out-graph", "{out}/t_solved.json"],
        "edit": ["edit", "--graph", str(graph_path), "--ops", str(ops_path),
                 "-o", "{out}/edited.json"],
        "resolve": ["resolve-adjacency", "--dual", str(prob_path),
                    "--strategy", "sampling", "-o", "{out}/cand"],
    }
    for name, argv in commands.items():
        snapshots = []
        for run in range(2):
            out_dir = tmp_path / f"{name}{run}"
            out_dir.mkdir()
            cmd = [sys.executable, "-m", "roofforge.cli"] + \
                [a.replace("{out}", str(out_dir)) for a in argv]
            proc = subprocess.run(cmd, capture_output=True, timeout=120)
            assert proc.returncode == 0, (name, proc.stderr)
            files = {p.name: p.read_bytes()
                     for p in sorted(out_dir.iterdir())}
            stdout = proc.stdout.replace(str(out_dir).encode(), b"OUT")
            snapshots.append((stdout, files))
        assert snapshots[0] == snapshots[1], name
