"""Versioned JSON snapshots of a session.

A snapshot captures everything that determines future behavior: dataset,
ensemble, network parameters, optimizer moments, feedback history, and the
exact generator state. Floats are stored via Python's repr round-trip, so
save -> load -> save is byte-stable and a resumed session continues
bit-for-bit where the original left off. Files are written atomically
(temp file + rename) so a crash never leaves a torn snapshot behind.
"""

import json
import os
import tempfile
import time
from dataclasses import asdict

import numpy as np

from . import relevance
from .datasets import Dataset, StandardizationStats
from .loda import Histogram, LodaEnsemble, Projection, member_score_matrix
from .objective import LabeledSet, LossConfig
from .session import SessionState, TraceRecord

FORMAT = "glocal-session/1"


class SnapshotError(ValueError):
    pass


def _params_payload(params):
    return {k: v.tolist() for k, v in params.arrays().items()}


def _params_from(payload):
    return relevance.NetParams(
        W1=np.array(payload["W1"], dtype=np.float64),
        b1=np.array(payload["b1"], dtype=np.float64),
        W2=np.array(payload["W2"], dtype=np.float64),
        b2=np.array(payload["b2"], dtype=np.float64),
    )


def _ensemble_payload(ensemble):
    return {
        "members": [
            {
                "beta": proj.beta.tolist(),
                "edges": hist.edges.tolist(),
                "densities": hist.densities.tolist(),
                "pseudo_density": hist.pseudo_density,
            }
            for proj, hist in ensemble.members
        ]
    }


def _ensemble_from(payload):
    members = []
    for m in payload["members"]:
        proj = Projection(beta=np.array(m["beta"], dtype=np.float64))
        hist = Histogram(
            edges=np.array(m["edges"], dtype=np.float64),
            densities=np.array(m["densities"], dtype=np.float64),
            pseudo_density=float(m["pseudo_density"]),
        )
        members.append((proj, hist))
    return LodaEnsemble(members=members)


def snapshot_payload(state, session_id=None, meta=None):
    """Serialize a SessionState to a JSON-compatible dict."""
    payload = {
        "format": FORMAT,
        "meta": dict(meta or {}),
        "dataset": {
            "name": state.dataset.name,
            "feature_names": list(state.dataset.feature_names),
            "X": state.dataset.X.tolist(),
            "y": state.dataset.y.tolist(),
        },
        "stats": None if state.stats is None else {
            "mean": state.stats.mean.tolist(),
            "std": state.stats.std.tolist(),
        },
        "config": {
            "seed": state.seed,
            "budget": state.budget,
            "n_members": len(state.ensemble.members),
            "loss": {
                "lambda_prior": state.loss_cfg.lambda_prior,
                "tau": state.loss_cfg.tau,
                "bias": state.loss_cfg.bias,
            },
            "train": asdict(state.train_cfg),
        },
        "ensemble": _ensemble_payload(state.ensemble),
        "params": _params_payload(state.params),
        "adam": {
            "t": state.opt_state.t,
            "m": {k: v.tolist() for k, v in state.opt_state.m.items()},
            "v": {k: v.tolist() for k, v in state.opt_state.v.items()},
        },
        "rng": state.rng.bit_generator.state,
        "labeled": [list(e) for e in state.labeled.entries],
        "trace": [asdict(r) for r in state.trace],
        "pending": state.pending,
        "t": state.t,
        "prime": None if state.prime_info is None else asdict(state.prime_info),
    }
    if session_id is not None:
        payload["meta"]["session_id"] = session_id
    return payload


def state_from_payload(payload):
    """Rebuild a SessionState. The member-score cache is recomputed; it is
    a pure function of the ensemble and data."""
    if payload.get("format") != FORMAT:
        raise SnapshotError("unsupported snapshot format: %r" % payload.get("format"))

    dsp = payload["dataset"]
    dataset = Dataset(
        name=dsp["name"],
        X=np.array(dsp["X"], dtype=np.float64),
        y=np.array(dsp["y"], dtype=np.int64),
        feature_names=list(dsp["feature_names"]),
    )
    stats = None
    if payload["stats"] is not None:
        stats = StandardizationStats(
            mean=np.array(payload["stats"]["mean"], dtype=np.float64),
            std=np.array(payload["stats"]["std"], dtype=np.float64),
        )
    X = stats.apply(dataset.X) if stats is not None else dataset.X

    cfg = payload["config"]
    loss_cfg = LossConfig(**cfg["loss"])
    train_cfg = relevance.TrainConfig(**cfg["train"])
    ensemble = _ensemble_from(payload["ensemble"])
    params = _params_from(payload["params"])

    opt_state = relevance.AdamState(params)
    opt_state.t = int(payload["adam"]["t"])
    opt_state.m = {k: np.array(v, dtype=np.float64) for k, v in payload["adam"]["m"].items()}
    opt_state.v = {k: np.array(v, dtype=np.float64) for k, v in payload["adam"]["v"].items()}

    rng = np.random.default_rng()
    rng.bit_generator.state = payload["rng"]

    state = SessionState(
        dataset=dataset,
        stats=stats,
        X=X,
        ensemble=ensemble,
        params=params,
        member_scores=member_score_matrix(ensemble, X),
        labeled=LabeledSet(tuple(e) for e in payload["labeled"]),
        budget=int(cfg["budget"]),
        loss_cfg=loss_cfg,
        train_cfg=train_cfg,
        opt_state=opt_state,
        rng=rng,
        seed=int(cfg["seed"]),
        t=int(payload["t"]),
        pending=payload["pending"],
        trace=[TraceRecord(**r) for r in payload["trace"]],
        prime_info=(None if payload["prime"] is None
                    else relevance.PrimeInfo(**payload["prime"])),
    )
    state.check_invariants()
    return state


def canonical_bytes(payload):
    """Deterministic byte form of a snapshot, timestamps excluded. Two
    sessions in identical logical state produce identical bytes."""
    body = {k: v for k, v in payload.items() if k != "meta"}
    return json.dumps(body, sort_keys=True, separators=(",", ":")).encode()


def save_session(state, path, session_id=None):
    payload = snapshot_payload(state, session_id=session_id,
                               meta={"saved_at": time.time()})
    write_snapshot(payload, path)
    return payload


def write_snapshot(payload, path):
    """Atomic write: temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_session(path):
    with open(path) as fh:
        payload = json.load(fh)
    return state_from_payload(payload)
