"""HTTP session API for the interactive analyst console.

Wraps the step-at-a-time session loop behind five JSON endpoints. Every
label writes an atomic snapshot, and unknown session ids fall back to the
snapshot directory, so a service restart loses nothing. Errors are bare
{code, message} objects.

Endpoints:
    POST /api/sessions
    GET  /api/sessions/{id}
    POST /api/sessions/{id}/label
    GET  /api/sessions/{id}/explain/{idx}
    GET  /api/datasets
"""

import logging
import threading
import uuid
from pathlib import Path

import numpy as np
from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import relevance
from .datasets import load_csv, make_benchmark, make_toy, parse_csv_text
from .explain import (describe_regions, fit_rule_tree, local_explain,
                      relevance_assignment)
from .grids import grid_payload
from .objective import LossConfig
from .session import start_session, step_session
from .snapshots import load_session, save_session

logger = logging.getLogger(__name__)

TOP_RANKED = 20


class ApiError(Exception):
    def __init__(self, status, code, message):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _bad_request(message):
    return ApiError(400, "invalid_request", message)


class SessionStore:
    """In-memory sessions backed by one snapshot file each."""

    def __init__(self, snapshot_dir):
        self.snapshot_dir = Path(snapshot_dir)
        self.snapshot_dir.mkdir(parents=True, exist_ok=True)
        self._sessions = {}
        self._locks = {}
        self._registry_lock = threading.Lock()

    def lock(self, session_id):
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def path(self, session_id):
        return self.snapshot_dir / (session_id + ".json")

    def add(self, session_id, state):
        self._sessions[session_id] = state
        save_session(state, self.path(session_id), session_id=session_id)

    def get(self, session_id):
        state = self._sessions.get(session_id)
        if state is None:
            path = self.path(session_id)
            if not path.exists():
                raise ApiError(404, "unknown_session",
                               "no session with id %r" % session_id)
            state = load_session(path)
            self._sessions[session_id] = state
        return state

    def persist(self, session_id):
        save_session(self._sessions[session_id], self.path(session_id),
                     session_id=session_id)


def _builtin_datasets():
    return {
        "toy": lambda: make_toy(seed=0),
        "abalone": lambda: make_benchmark("abalone"),
        "yeast": lambda: make_benchmark("yeast"),
    }


def _query_payload(state, index):
    P = relevance.forward(state.params, state.X[index])
    return {
        "index": int(index),
        "score": float((state.member_scores[index] * P).sum()),
        "features": {name: float(v) for name, v in
                     zip(state.dataset.feature_names, state.dataset.X[index])},
        "member_scores": state.member_scores[index].tolist(),
        "relevance": P.tolist(),
    }


def _top_ranked(state, k=TOP_RANKED):
    scores = state.scores()
    order = np.argsort(-scores, kind="stable")[:k]
    rows = []
    for rank, idx in enumerate(order, start=1):
        idx = int(idx)
        labeled = idx in state.labeled
        rows.append({
            "rank": rank,
            "index": idx,
            "score": float(scores[idx]),
            "labeled": labeled,
            "label": state.labeled._by_index[idx][0] if labeled else None,
        })
    return rows


def _trace_payload(state):
    return [{
        "iteration": r.iteration,
        "queried_index": r.queried_index,
        "label": r.label,
        "cumulative_anomalies": r.cumulative_anomalies,
        "loss": float(r.loss),
    } for r in state.trace]


def _state_payload(state, session_id):
    ds = state.dataset
    return {
        "session_id": session_id,
        "t": state.t,
        "budget": state.budget,
        "anomalies_found": state.anomalies_found,
        "done": state.done,
        "pending": (None if state.pending is None
                    else _query_payload(state, state.pending)),
        "loss_history": [float(r.loss) for r in state.trace],
        "trace": _trace_payload(state),
        "top": _top_ranked(state),
        "dataset": {
            "name": ds.name,
            "n": ds.n,
            "d": ds.d,
            "feature_names": list(ds.feature_names),
            "points": ds.X.tolist() if ds.d == 2 else None,
        },
        "grid": grid_payload(state),
    }


def _parse_label(value):
    if value in (1, -1):
        return int(value)
    if isinstance(value, str):
        key = value.strip().lower()
        if key == "anomaly":
            return 1
        if key == "nominal":
            return -1
    raise _bad_request("label must be 1, -1, 'anomaly', or 'nominal'")


def _resolve_config(raw):
    raw = dict(raw or {})
    known = {"n_members", "budget", "seed", "tau", "bias", "lambda",
             "standardize"}
    unknown = set(raw) - known
    if unknown:
        raise _bad_request("unknown config keys: %s" % ", ".join(sorted(unknown)))
    try:
        n_members = int(raw.get("n_members", 4))
        budget = int(raw.get("budget", 30))
        seed = int(raw.get("seed", 0))
        loss_cfg = LossConfig(
            lambda_prior=float(raw.get("lambda", 1.0)),
            tau=float(raw.get("tau", 0.03)),
            bias=float(raw.get("bias", 0.5)),
        )
    except (TypeError, ValueError) as exc:
        raise _bad_request(str(exc))
    if budget < 1:
        raise _bad_request("budget must be >= 1")
    if n_members < 1:
        raise _bad_request("n_members must be >= 1")
    return n_members, budget, seed, loss_cfg, bool(raw.get("standardize", True))


def create_app(snapshot_dir="snapshots", dataset_dir=None):
    app = FastAPI(title="glocal session service", docs_url=None, redoc_url=None)
    # the analyst UI may be served from a different origin
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    store = SessionStore(snapshot_dir)
    app.state.store = store
    dataset_dir = Path(dataset_dir) if dataset_dir else None

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message})

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"code": "invalid_request", "message": str(exc)})

    @app.exception_handler(StarletteHTTPException)
    async def http_error_handler(request: Request, exc: StarletteHTTPException):
        return JSONResponse(status_code=exc.status_code,
                            content={"code": "http_error", "message": str(exc.detail)})

    def _load_named_dataset(name):
        builtins = _builtin_datasets()
        if name in builtins:
            return builtins[name]()
        if dataset_dir is not None:
            path = dataset_dir / (name + ".csv")
            if path.exists():
                return load_csv(path, name=name)
        raise _bad_request("unknown dataset %r" % name)

    @app.post("/api/sessions")
    def create_session(payload: dict = Body(...)):
        spec = payload.get("dataset")
        if isinstance(spec, str):
            dataset = _load_named_dataset(spec)
        elif isinstance(spec, dict) and "csv" in spec:
            try:
                dataset = parse_csv_text(spec["csv"],
                                         name=spec.get("name", "upload"))
            except ValueError as exc:
                raise _bad_request("dataset parse failure: %s" % exc)
        else:
            raise _bad_request("dataset must be a name or {name, csv}")
        n_members, budget, seed, loss_cfg, std = _resolve_config(
            payload.get("config"))

        state = start_session(dataset, n_members=n_members, budget=budget,
                              seed=seed, loss_cfg=loss_cfg,
                              standardize_data=std)
        session_id = uuid.uuid4().hex[:12]
        with store.lock(session_id):
            state, query = step_session(state)
            store.add(session_id, state)
        return {
            "session_id": session_id,
            "t": state.t,
            "budget": state.budget,
            "anomalies_found": 0,
            "done": query is None,
            "query": None if query is None else _query_payload(state, query),
        }

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        with store.lock(session_id):
            state = store.get(session_id)
            return _state_payload(state, session_id)

    @app.post("/api/sessions/{session_id}/label")
    def submit_label(session_id: str, payload: dict = Body(...)):
        if "index" not in payload or "label" not in payload:
            raise _bad_request("body must carry index and label")
        try:
            index = int(payload["index"])
        except (TypeError, ValueError):
            raise _bad_request("index must be an integer")
        label = _parse_label(payload["label"])
        with store.lock(session_id):
            state = store.get(session_id)
            if state.pending is None:
                raise ApiError(409, "conflict",
                               "no pending query; session is %s"
                               % ("finished" if state.done else "idle"))
            if index != state.pending:
                raise ApiError(409, "conflict",
                               "pending query is %d, not %d"
                               % (state.pending, index))
            state, next_query = step_session(state, label)
            store.persist(session_id)
            out = {
                "t": state.t,
                "budget": state.budget,
                "anomalies_found": state.anomalies_found,
                "done": next_query is None,
                "loss": float(state.trace[-1].loss),
                "next_query": (None if next_query is None
                               else _query_payload(state, next_query)),
            }
            if next_query is None:
                out["trace"] = _trace_payload(state)
            return out

    @app.get("/api/sessions/{session_id}/explain/{index}")
    def explain_instance(session_id: str, index: int):
        with store.lock(session_id):
            state = store.get(session_id)
            if not 0 <= index < state.n:
                raise ApiError(404, "unknown_instance",
                               "index %d outside [0, %d)" % (index, state.n))
            return explanation_payload(state, index)

    @app.get("/api/datasets")
    def list_datasets():
        out = []
        for name, build in _builtin_datasets().items():
            ds = build()
            out.append({"id": name, "name": ds.name, "n": ds.n, "d": ds.d,
                        "anomalies": ds.n_anomalies})
        if dataset_dir is not None and dataset_dir.is_dir():
            for path in sorted(dataset_dir.glob("*.csv")):
                try:
                    ds = load_csv(path, name=path.stem)
                except ValueError:
                    continue
                out.append({"id": path.stem, "name": ds.name, "n": ds.n,
                            "d": ds.d, "anomalies": ds.n_anomalies})
        return {"datasets": out}

    return app


def explanation_payload(state, index, k=2):
    """Most-relevant member, its region rules, and the local surrogate for
    one instance. Deterministic per (session seed, index)."""
    ds = state.dataset
    surrogate = local_explain(
        state.ensemble, state.params, ds.X[index], ds.X, K=k,
        feature_names=ds.feature_names, stats=state.stats,
        seed=state.seed + index)
    assignment = relevance_assignment(state.params, state.X)
    tree = fit_rule_tree(ds.X, assignment.positives(surrogate.member))
    return {
        "index": int(index),
        "member": surrogate.member,
        "relevance": surrogate.relevance.tolist(),
        "member_scores": state.member_scores[index].tolist(),
        "score": float((state.member_scores[index]
                        * surrogate.relevance).sum()),
        "rules": describe_regions(tree, ds.feature_names),
        "terms": [[text, w] for text, w in surrogate.terms],
        "intercept": surrogate.intercept,
    }
