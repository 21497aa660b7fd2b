"""Command-line interface.

Exit codes: 0 success, 1 core error (JSON payload on stderr), 2 usage,
3 validation failed, 4 solve did not converge. Stdout is byte-deterministic
for identical inputs (no timestamps or wall times).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .adjacency import resolve_greedy, resolve_sampling
from .editing import EditJournal, EditOp, edit_and_reoptimize
from .energy import POINTWISE_KINDS
from .errors import RoofForgeError, SchemaError
from .fileio import (RoofGraphDocument, dumps_dualgraph, dumps_roofgraph,
                     export_building, load_dualgraph, load_roofgraph, _emit)
from .graph import DualGraph, check_validity_2d
from .solver import (SolveSpec, optimize_dual, optimize_primal,
                     optimize_variable_heights)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_INVALID = 3
EXIT_NOT_CONVERGED = 4


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="roofforge",
                                description="Planar roof reconstruction and editing")
    sub = p.add_subparsers(dest="command", required=True)

    def add_solver_flags(sp):
        sp.add_argument("--height", type=float, default=None,
                        help="target height h (default: sqrt(area)/2)")
        sp.add_argument("--lambda", dest="lam", type=float, default=0.1,
                        help="closeness weight to the annotated 2D positions")
        sp.add_argument("--gamma", type=float, default=0.05, help="aesthetic weight")
        sp.add_argument("--eta", type=float, default=1.0, help="height-variance weight")
        sp.add_argument("--metric", choices=POINTWISE_KINDS, default="smallest_eig")
        sp.add_argument("--max-iters", type=int, default=2000)

    sp = sub.add_parser("reconstruct", help="optimize a roof and export OBJ")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--primal", help="roofgraph/1 file with 2D annotations")
    src.add_argument("--dual", help="roofdual/1 file")
    add_solver_flags(sp)
    sp.add_argument("-o", "--output", required=True, help="output OBJ path")
    sp.add_argument("--out-graph", help="also write the solved roofgraph/1 JSON here")
    sp.add_argument("--no-facades", action="store_true")

    sp = sub.add_parser("validate", help="check 2D validity of an embedding")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--tol", type=float, default=1e-6)

    sp = sub.add_parser("resolve-adjacency", help="resolve adjacency ambiguities")
    sp.add_argument("--dual", required=True, help="roofdual/1 file (probability triples)")
    sp.add_argument("--strategy", choices=("greedy", "sampling"), default="greedy")
    sp.add_argument("--threshold", type=float, default=0.5)
    sp.add_argument("--max", type=int, default=64, help="max sampling candidates")
    sp.add_argument("-o", "--output", help="output path prefix (default: input stem)")

    sp = sub.add_parser("edit", help="apply edit ops with regional re-optimization")
    sp.add_argument("--graph", required=True, help="roofgraph/1 file (3D)")
    sp.add_argument("--ops", required=True, help="JSON array of edit operations")
    add_solver_flags(sp)
    sp.add_argument("-o", "--output", required=True, help="output roofgraph/1 path")

    sp = sub.add_parser("serve", help="run the local HTTP service")
    sp.add_argument("--port", type=int, default=8000)
    sp.add_argument("--host", default="127.0.0.1")
    return p


def _spec_from_args(args, mode: str) -> SolveSpec:
    return SolveSpec(mode=mode, h=args.height, lam=args.lam, gamma=args.gamma,
                     eta=args.eta, planarity_kind=args.metric,
                     max_iters=args.max_iters)


def _cmd_reconstruct(args) -> int:
    if args.dual:
        dual = load_dualgraph(args.dual)
        spec = _spec_from_args(args, "dual")
        res = optimize_dual(dual, spec)
        from .graph import primal_from_dual
        graph = primal_from_dual(dual)
    else:
        doc = load_roofgraph(args.primal)
        graph = doc.graph
        user2d = doc.embedding.project_xy()
        groups = {v.id: v.height_group for v in graph.vertices
                  if v.height_group is not None}
        if groups:
            spec = _spec_from_args(args, "variable_height")
            res = optimize_variable_heights(graph, user2d, groups, spec)
        else:
            spec = _spec_from_args(args, "primal")
            res = optimize_primal(graph, user2d, spec)
    _, obj_text = export_building(graph, res.embedding,
                                  include_facades=not args.no_facades)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(obj_text)
    if args.out_graph:
        with open(args.out_graph, "w", encoding="utf-8") as fh:
            fh.write(dumps_roofgraph(RoofGraphDocument(graph, res.embedding)))
    print(f"err {format(res.planarity, '.17g')} iterations {res.iterations}")
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def _cmd_validate(args) -> int:
    doc = load_roofgraph(args.graph)
    report = check_validity_2d(doc.graph, doc.embedding.project_xy(), tol=args.tol)
    print(_emit(report.to_json()))
    return EXIT_OK if report.valid else EXIT_INVALID


def _cmd_resolve(args) -> int:
    dual = load_dualgraph(args.dual)
    prob = dual.prob if dual.prob is not None else dual.adjacency.astype(float)
    prefix = args.output or os.path.splitext(args.dual)[0] + "-candidate"
    if args.strategy == "greedy":
        candidates = [resolve_greedy(dual.outline, prob, args.threshold)]
        truncated = False
    else:
        cs = resolve_sampling(dual.outline, prob, args.threshold, args.max)
        candidates, truncated = list(cs), cs.truncated
    for idx, cand in enumerate(candidates):
        out = DualGraph(outline=dual.outline, adjacency=cand.adjacency)
        path = f"{prefix}-{idx:03d}.json"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dumps_dualgraph(out))
        print(f"candidate {path} score {format(cand.score, '.17g')} "
              f"pairs {len(cand.pairs())}")
    if truncated:
        print("truncated true")
    return EXIT_OK


def _cmd_edit(args) -> int:
    doc = load_roofgraph(args.graph)
    graph, emb = doc.graph, doc.embedding
    if emb.dim == 2:
        emb = emb.lifted(0.0)
    with open(args.ops, "r", encoding="utf-8") as fh:
        try:
            ops_data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"ops file is not valid JSON: {exc}") from None
    if not isinstance(ops_data, list):
        raise SchemaError("ops file must be a JSON array of operations")
    spec = _spec_from_args(args, "primal")
    journal = EditJournal()
    result = None
    for entry in ops_data:
        op = EditOp.from_json(entry)
        graph, result, region = edit_and_reoptimize(graph, emb, op, spec, journal)
        emb = result.embedding
        print(f"op {op.kind} region {sorted(region)} "
              f"err {format(result.planarity, '.17g')}")
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(dumps_roofgraph(RoofGraphDocument(graph, emb)))
    if result is not None and not result.converged:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def main(argv=None) -> int:
    level = os.environ.get("ROOFFORGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"reconstruct": _cmd_reconstruct, "validate": _cmd_validate,
                "resolve-adjacency": _cmd_resolve, "edit": _cmd_edit,
                "serve": _cmd_serve}
    try:
        return handlers[args.command](args)
    except RoofForgeError as exc:
        payload = exc.payload() if hasattr(exc, "payload") else {
            "error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)},
                         sort_keys=True), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
