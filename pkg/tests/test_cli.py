"""Command-line interface: exit codes, output format, determinism."""

import contextlib
import io
import json
import math
import re
import subprocess
import sys

import pytest

import corpus
from roofforge.cli import main
from roofforge.fileio import (
    RoofGraphDocument,
    load_dualgraph,
    load_roofgraph,
    save_dualgraph,
    save_roofgraph,
)
from roofforge.graph import primal_from_dual

ERR_LINE = re.compile(r"^err (\S+) iterations (\d+)\n$")


def run_cli(*argv):
    """Invoke the CLI in-process, returning (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()


def write_hip_dual(tmp_path, name="hip_dual.json"):
    path = tmp_path / name
    save_dualgraph(corpus.fixture("hip_rect").dual(), path)
    return path


class TestReconstruct:
    def test_from_dual_writes_obj_and_graph(self, tmp_path):
        dual_path = write_hip_dual(tmp_path)
        obj_path = tmp_path / "hip.obj"
        graph_path = tmp_path / "hip_solved.json"
        code, out, err = run_cli("reconstruct", "--dual", dual_path,
                                 "-o", obj_path, "--out-graph", graph_path)
        assert code == 0 and err == ""
        m = ERR_LINE.match(out)
        assert m and float(m.group(1)) < 1e-9

        obj = obj_path.read_text()
        assert obj.startswith("# building export\n")
        assert "g roof" in obj and "g facade" in obj and "g base" in obj

        doc = load_roofgraph(graph_path)
        assert doc.embedding.dim == 3
        assert doc.graph == primal_from_dual(corpus.fixture("hip_rect").dual())

    def test_from_primal_exact_annotation(self, tmp_path):
        fx = corpus.fixture("hip_rect")
        gp = tmp_path / "hip.json"
        save_roofgraph(RoofGraphDocument(fx.graph, fx.emb2d), gp)
        code, out, _ = run_cli("reconstruct", "--primal", gp,
                               "-o", tmp_path / "hip.obj",
                               "--lambda", "0.2", "--metric", "det")
        assert code == 0
        assert out == "err 0 iterations 0\n"

    def test_height_groups_switch_to_variable_height_mode(self, tmp_path):
        pav = corpus.pavilion()
        gp = tmp_path / "pav.json"
        save_roofgraph(RoofGraphDocument(pav.graph, pav.user2d), gp)
        out_graph = tmp_path / "pav_solved.json"
        code, out, _ = run_cli("reconstruct", "--primal", gp,
                               "-o", tmp_path / "pav.obj",
                               "--lambda", "0", "--out-graph", out_graph)
        assert code == 0
        assert float(ERR_LINE.match(out).group(1)) < 1e-9
        emb = load_roofgraph(out_graph).embedding
        # Ungrouped corners are pinned to the ground exactly; the grouped
        # eaves and the apex float.
        assert all(emb[v][2] == 0.0 for v in (1, 3, 5))
        assert all(emb[v][2] != 0.0 for v in (2, 4, 6, 7))

    def test_planar_but_unconverged_run_exits_4(self, tmp_path):
        dual_path = save_dualgraph(corpus.fixture("t_shape").dual(),
                                   tmp_path / "t.json") or tmp_path / "t.json"
        obj_path = tmp_path / "t.obj"
        code, out, _ = run_cli("reconstruct", "--dual", dual_path,
                               "-o", obj_path, "--max-iters", "20")
        assert code == 4
        assert float(ERR_LINE.match(out).group(1)) < 1e-9
        assert obj_path.exists()

    def test_nonplanar_result_exits_1(self, tmp_path):
        dual_path = tmp_path / "t.json"
        save_dualgraph(corpus.fixture("t_shape").dual(), dual_path)
        code, out, err = run_cli("reconstruct", "--dual", dual_path,
                                 "-o", tmp_path / "t.obj", "--max-iters", "8")
        assert code == 1 and out == ""
        payload = json.loads(err)
        assert payload["error"] == "NonPlanarInput"

    def test_no_facades_flag(self, tmp_path):
        dual_path = write_hip_dual(tmp_path)
        obj_path = tmp_path / "bare.obj"
        code, _, _ = run_cli("reconstruct", "--dual", dual_path,
                             "-o", obj_path, "--no-facades")
        assert code == 0
        assert "g facade" not in obj_path.read_text()

    def test_repeat_runs_are_byte_identical(self, tmp_path):
        dual_path = write_hip_dual(tmp_path)
        outs, objs, graphs = [], [], []
        for i in range(2):
            obj_path = tmp_path / f"run{i}.obj"
            graph_path = tmp_path / f"run{i}.json"
            code, out, _ = run_cli("reconstruct", "--dual", dual_path,
                                   "-o", obj_path, "--out-graph", graph_path)
            assert code == 0
            outs.append(out)
            objs.append(obj_path.read_bytes())
            graphs.append(graph_path.read_bytes())
        assert outs[0] == outs[1]
        assert objs[0] == objs[1]
        assert graphs[0] == graphs[1]


class TestErrorsAndValidate:
    def test_missing_arguments_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            run_cli("reconstruct")
        assert exc.value.code == 2

    def test_unreadable_input_exits_1_with_json_stderr(self, tmp_path):
        bad = tmp_path / "garbage.json"
        bad.write_text("not json{")
        code, out, err = run_cli("reconstruct", "--dual", bad,
                                 "-o", tmp_path / "x.obj")
        assert code == 1 and out == ""
        payload = json.loads(err)
        assert payload["error"] == "ParseError"
        assert payload["line"] == 1 and payload["column"] == 1

    def test_validate_accepts_skeleton(self, tmp_path):
        fx = corpus.fixture("hip_rect")
        gp = tmp_path / "hip.json"
        save_roofgraph(RoofGraphDocument(fx.graph, fx.emb2d), gp)
        code, out, _ = run_cli("validate", "--graph", gp)
        assert code == 0
        report = json.loads(out)
        assert report["valid"] is True
        assert report["max_residual"] == 0

    def test_validate_flags_broken_embedding(self, tmp_path):
        fx = corpus.fixture("hip_rect")
        gp = tmp_path / "bad.json"
        save_roofgraph(
            RoofGraphDocument(fx.graph, fx.emb2d.replaced({5: (3.0, 1.4)})), gp)
        code, out, _ = run_cli("validate", "--graph", gp)
        assert code == 3
        report = json.loads(out)
        assert report["valid"] is False
        assert any(e["case"] == "violated" for e in report["edges"])


class TestResolveAdjacency:
    PROB_DOC = ('{"format": "roofdual/1", "outline": [[0,0],[4,0],[4,4],[0,4]],'
                ' "probabilities": [[0,1,0.95],[1,2,0.95],[2,3,0.95],[0,3,0.95],'
                '[0,2,0.8],[1,3,0.7]]}\n')

    def test_greedy_writes_single_candidate(self, tmp_path):
        src = tmp_path / "sq.json"
        src.write_text(self.PROB_DOC)
        prefix = tmp_path / "g"
        code, out, _ = run_cli("resolve-adjacency", "--dual", src, "-o", prefix)
        assert code == 0
        line = out.splitlines()[0]
        m = re.match(r"^candidate (\S+) score (\S+) pairs (\d+)$", line)
        assert m and m.group(1) == f"{prefix}-000.json"
        assert float(m.group(2)) == pytest.approx(4 * math.log(0.95) + math.log(0.8),
                                                  rel=1e-12)
        assert m.group(3) == "5"
        loaded = load_dualgraph(f"{prefix}-000.json")
        assert (0, 2) in loaded.adjacency_pairs()
        assert (1, 3) not in loaded.adjacency_pairs()

    def test_sampling_lists_candidates_by_score(self, tmp_path):
        src = tmp_path / "sq.json"
        src.write_text(self.PROB_DOC)
        prefix = tmp_path / "s"
        code, out, _ = run_cli("resolve-adjacency", "--dual", src,
                               "--strategy", "sampling", "-o", prefix)
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 2
        scores = [float(re.match(r"^candidate \S+ score (\S+) pairs \d+$", l)
                        .group(1)) for l in lines]
        assert scores[0] > scores[1]
        assert scores[1] == pytest.approx(4 * math.log(0.95) + math.log(0.7),
                                          rel=1e-12)
        # Greedy equals the best sampled candidate, file for file.
        gp = tmp_path / "g"
        run_cli("resolve-adjacency", "--dual", src, "-o", gp)
        assert (tmp_path / "g-000.json").read_bytes() == \
            (tmp_path / "s-000.json").read_bytes()

    def test_candidate_cap_reports_truncation(self, tmp_path):
        src = tmp_path / "sq.json"
        src.write_text(self.PROB_DOC)
        prefix = tmp_path / "c"
        code, out, _ = run_cli("resolve-adjacency", "--dual", src,
                               "--strategy", "sampling", "--max", "1",
                               "-o", prefix)
        assert code == 0
        lines = out.splitlines()
        assert lines[-1] == "truncated true"
        assert len(lines) == 2
        assert not (tmp_path / "c-001.json").exists()


class TestEdit:
    def write_inputs(self, tmp_path):
        fx = corpus.fixture("hip_rect")
        gp = tmp_path / "hip3d.json"
        save_roofgraph(RoofGraphDocument(fx.graph, fx.emb3d()), gp)
        ops = tmp_path / "ops.json"
        ops.write_text(json.dumps([
            {"kind": "move_vertex", "vertex": 5, "delta": [0.0, 0.05, 0.0]},
            {"kind": "snap_edge", "edge": [5, 6]},
        ]))
        return gp, ops

    def test_pipeline_reports_region_per_op(self, tmp_path):
        gp, ops = self.write_inputs(tmp_path)
        out_path = tmp_path / "edited.json"
        code, out, _ = run_cli("edit", "--graph", gp, "--ops", ops,
                               "-o", out_path)
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("op move_vertex region [6] err ")
        assert lines[1] == "op snap_edge region [] err 0"
        doc = load_roofgraph(out_path)
        # The snap collapsed the ridge into a single apex.
        assert len(doc.graph.vertices) == 5
        assert sorted(len(f) for f in doc.graph.faces) == [3, 3, 3, 3]

    def test_pipeline_is_deterministic(self, tmp_path):
        gp, ops = self.write_inputs(tmp_path)
        results = []
        for i in range(2):
            out_path = tmp_path / f"e{i}.json"
            code, out, _ = run_cli("edit", "--graph", gp, "--ops", ops,
                                   "-o", out_path)
            assert code == 0
            results.append((out, out_path.read_bytes()))
        assert results[0] == results[1]

    def test_unknown_op_kind_exits_1(self, tmp_path):
        gp, _ = self.write_inputs(tmp_path)
        ops = tmp_path / "bad_ops.json"
        ops.write_text('[{"kind": "teleport"}]')
        code, _, err = run_cli("edit", "--graph", gp, "--ops", ops,
                               "-o", tmp_path / "y.json")
        assert code == 1
        assert json.loads(err)["error"] == "InvalidTarget"


class TestSubprocess:
    def test_module_entrypoint_is_byte_deterministic(self, tmp_path):
        dual_path = write_hip_dual(tmp_path)
        runs = []
        for i in range(2):
            obj_path = tmp_path / f"sp{i}.obj"
            proc = subprocess.run(
                [sys.executable, "-m", "roofforge.cli", "reconstruct",
                 "--dual", str(dual_path), "-o", str(obj_path)],
                capture_output=True, timeout=60)
            assert proc.returncode == 0, proc.stderr
            runs.append((proc.stdout, obj_path.read_bytes()))
        assert runs[0] == runs[1]
        assert runs[0][0].startswith(b"err ")

    def test_help_lists_commands(self):
        proc = subprocess.run([sys.executable, "-m", "roofforge.cli", "--help"],
                              capture_output=True, timeout=60)
        assert proc.returncode == 0
        for cmd in (b"reconstruct", b"validate", b"resolve-adjacency",
                    b"edit", b"serve"):
            assert cmd in proc.stdout
