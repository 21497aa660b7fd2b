"""Local JSON-over-HTTP session service for the browser editor.

Sessions hold a graph + embedding + undo journal. Mutations on a session
are strictly serialized: a second in-flight mutation gets 409. Responses
are pure functions of (session state, request) — session ids come from a
counter, and no timestamps or random tokens appear in any payload.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse, PlainTextResponse

from .adjacency import resolve_greedy, resolve_sampling
from .editing import EditJournal, EditOp, edit_and_reoptimize
from .errors import InvalidTarget, NonPlanarInput, RoofForgeError
from .fileio import (ROOFDUAL_TAG, ROOFGRAPH_TAG, RoofGraphDocument,
                     export_building, loads_dualgraph, loads_roofgraph,
                     roofgraph_data)
from .graph import DualGraph, Embedding, RoofGraph, outline_embedding, primal_from_dual
from .solver import (SolveSpec, optimize_dual, optimize_primal,
                     optimize_variable_heights, spectral_embed_2d)

SOLVE_SPEC_FIELDS = {"mode", "h", "lam", "lambda", "gamma", "eta", "theta_deg",
                     "planarity_kind", "tol_grad", "tol_energy", "max_iters",
                     "fixed_vertex"}


@dataclass
class Session:
    id: str
    graph: RoofGraph | None = None
    embedding: Embedding | None = None
    dual: DualGraph | None = None
    journal: EditJournal = field(default_factory=EditJournal)
    dirty: bool = False
    lock: threading.Lock = field(default_factory=threading.Lock)


def _error(exc: Exception, status: int) -> JSONResponse:
    if isinstance(exc, RoofForgeError):
        payload = exc.payload()
    else:
        payload = {"error": type(exc).__name__, "message": str(exc)}
    return JSONResponse(status_code=status, content=payload)


def _embedding_data(emb: Embedding) -> dict:
    return {str(vid): [float(c) for c in emb[vid]] for vid in sorted(emb.coords)}


def _spec_from_body(body: dict, default_mode: str) -> SolveSpec:
    unknown = set(body) - SOLVE_SPEC_FIELDS
    if unknown:
        raise ValueError(f"unknown solve spec fields: {sorted(unknown)}")
    kw = dict(body)
    if "lambda" in kw:
        kw["lam"] = kw.pop("lambda")
    kw.setdefault("mode", default_mode)
    return SolveSpec(**kw)


def create_app() -> FastAPI:
    app = FastAPI(title="roofforge", docs_url=None, redoc_url=None)
    sessions: dict[str, Session] = {}
    counter = {"n": 0}
    registry_lock = threading.Lock()
    app.state.sessions = sessions

    def get_session(sid: str) -> Session | None:
        return sessions.get(sid)

    @app.post("/sessions")
    def create_session():
        with registry_lock:
            counter["n"] += 1
            sid = f"s{counter['n']}"
            sessions[sid] = Session(id=sid)
        return {"id": sid}

    def _mutate(sid: str, fn):
        """Run fn(session) under the session's mutation mutex."""
        sess = get_session(sid)
        if sess is None:
            return _error(InvalidTarget(f"unknown session {sid}"), 404)
        if not sess.lock.acquire(blocking=False):
            return _error(InvalidTarget("another mutation is in flight"), 409)
        try:
            return fn(sess)
        except RoofForgeError as exc:
            return _error(exc, 422)
        except (ValueError, TypeError) as exc:
            return _error(exc, 422)
        finally:
            sess.lock.release()

    @app.put("/sessions/{sid}/graph")
    def put_graph(sid: str, body: dict = Body(...), mode: str | None = None):
        def fn(sess: Session):
            import json as _json
            fmt = body.get("format")
            text = _json.dumps(body)
            if fmt == ROOFGRAPH_TAG:
                inferred = "primal"
                doc = loads_roofgraph(text)
                sess.graph, sess.embedding, sess.dual = doc.graph, doc.embedding, None
            elif fmt == ROOFDUAL_TAG:
                inferred = "dual"
                dual = loads_dualgraph(text)
                graph = primal_from_dual(dual)
                emb2d = spectral_embed_2d(graph, outline_embedding(dual))
                sess.graph, sess.embedding, sess.dual = graph, emb2d, dual
            else:
                raise InvalidTarget(f"unknown format tag {fmt!r}")
            if mode is not None and mode != inferred:
                raise InvalidTarget(
                    f"mode {mode!r} does not match the {fmt!r} body ({inferred})")
            sess.journal = EditJournal()
            sess.dirty = False
            return {"mode": inferred,
                    "graph": roofgraph_data(RoofGraphDocument(sess.graph, sess.embedding)),
                    "embedding": _embedding_data(sess.embedding)}
        return _mutate(sid, fn)

    @app.post("/sessions/{sid}/optimize")
    def optimize(sid: str, body: dict = Body(default={})):
        def fn(sess: Session):
            if sess.graph is None:
                raise InvalidTarget("no graph loaded; PUT a graph first")
            groups = {v.id: v.height_group for v in sess.graph.vertices
                      if v.height_group is not None}
            default_mode = ("dual" if sess.dual is not None
                            else "variable_height" if groups else "primal")
            spec = _spec_from_body(body or {}, default_mode)
            if spec.mode == "dual":
                if sess.dual is None:
                    raise InvalidTarget("session has no dual graph; use primal mode")
                res = optimize_dual(sess.dual, spec)
            else:
                user2d = sess.embedding.project_xy()
                if spec.mode == "variable_height":
                    res = optimize_variable_heights(sess.graph, user2d, groups, spec)
                else:
                    res = optimize_primal(sess.graph, user2d, spec)
            sess.embedding = res.embedding
            sess.dirty = False
            return {"converged": res.converged, "iterations": res.iterations,
                    "planarity": res.planarity, "wall_time": res.wall_time,
                    "energy_trace": [[k, ep, et] for (k, ep, et) in res.energy_trace],
                    "embedding": _embedding_data(res.embedding)}
        return _mutate(sid, fn)

    @app.post("/sessions/{sid}/edits")
    def apply_edits(sid: str, body: dict = Body(...)):
        def fn(sess: Session):
            if sess.graph is None:
                raise InvalidTarget("no graph loaded; PUT a graph first")
            op = EditOp.from_json(body)
            emb = sess.embedding
            if emb.dim == 2:
                emb = emb.lifted(0.0)
            graph, res, region = edit_and_reoptimize(
                sess.graph, emb, op, SolveSpec(mode="primal"), sess.journal)
            sess.graph, sess.embedding = graph, res.embedding
            sess.dirty = True
            return {"converged": res.converged, "planarity": res.planarity,
                    "region": sorted(region),
                    "graph": roofgraph_data(RoofGraphDocument(graph, res.embedding)),
                    "embedding": _embedding_data(res.embedding)}
        return _mutate(sid, fn)

    @app.post("/sessions/{sid}/undo")
    def undo(sid: str):
        def fn(sess: Session):
            graph, emb = sess.journal.undo()
            sess.graph, sess.embedding = graph, emb
            sess.dirty = len(sess.journal) > 0
            return {"graph": roofgraph_data(RoofGraphDocument(graph, emb)),
                    "embedding": _embedding_data(emb)}
        return _mutate(sid, fn)

    @app.get("/sessions/{sid}/mesh.obj")
    def mesh(sid: str):
        sess = get_session(sid)
        if sess is None:
            return _error(InvalidTarget(f"unknown session {sid}"), 404)
        try:
            if sess.graph is None or sess.embedding is None:
                raise InvalidTarget("no graph loaded")
            emb = sess.embedding
            if emb.dim != 3:
                raise NonPlanarInput("no 3D embedding yet; optimize first")
            _, obj_text = export_building(sess.graph, emb)
            return PlainTextResponse(obj_text)
        except RoofForgeError as exc:
            return _error(exc, 422)

    @app.post("/resolve-adjacency")
    def resolve(body: dict = Body(...)):
        try:
            known = {"dual", "strategy", "threshold", "max"}
            unknown = set(body) - known
            if unknown:
                raise InvalidTarget(f"unknown fields: {sorted(unknown)}")
            if "dual" not in body:
                raise InvalidTarget("missing 'dual' document")
            import json as _json
            dual = loads_dualgraph(_json.dumps(body["dual"]))
            prob = dual.prob if dual.prob is not None else dual.adjacency.astype(float)
            strategy = body.get("strategy", "greedy")
            threshold = float(body.get("threshold", 0.5))
            cap = int(body.get("max", 64))
            if strategy == "greedy":
                cands, truncated = [resolve_greedy(dual.outline, prob, threshold)], False
            elif strategy == "sampling":
                cs = resolve_sampling(dual.outline, prob, threshold, cap)
                cands, truncated = list(cs), cs.truncated
            else:
                raise InvalidTarget(f"unknown strategy {strategy!r}")
            return {"truncated": truncated,
                    "candidates": [{"pairs": [list(p) for p in c.pairs()],
                                    "score": c.score,
                                    "provenance": [list(map(_jsonable, rec)) for rec in c.provenance]}
                                   for c in cands]}
        except RoofForgeError as exc:
            return _error(exc, 422)
        except (ValueError, TypeError) as exc:
            return _error(exc, 422)

    return app


def _jsonable(x):
    if isinstance(x, tuple):
        return list(x)
    return x
