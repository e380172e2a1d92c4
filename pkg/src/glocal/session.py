"""Budgeted human-in-the-loop labeling sessions.

A session holds the ensemble, the relevance network, and the feedback
history. Each iteration scores the unlabeled instances, queries the
top-scoring one, accepts a label, and retrains for one pass. The loop is
exposed two ways: `run_session` drives an analyst callback to completion,
`step_session` advances one iteration at a time so a service can persist
state between labels.

Seed layout: `seed` builds the ensemble, `seed + 1` initializes the
network, `seed + 2` drives the per-session minibatch shuffling. A session
is fully determined by (dataset, seed, budget, configs).
"""

import abc
import csv
import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import relevance
from .datasets import Dataset, StandardizationStats, standardize
from .loda import LodaEnsemble, build_ensemble, member_score_matrix
from .objective import LabeledSet, LossConfig, combined_scores, update_model

logger = logging.getLogger(__name__)


class SessionExhausted(Exception):
    """Every instance is labeled; nothing left to query."""


class BudgetExhausted(Exception):
    """The label budget is spent; the session accepts no more feedback."""


class AnalystInterface(abc.ABC):
    """A label source: given an instance index, produce -1 or +1."""

    @abc.abstractmethod
    def label(self, index: int) -> int:
        raise NotImplementedError


class OracleAnalyst(AnalystInterface):
    """Answers with ground truth. Used for benchmarks and tests."""

    def __init__(self, dataset: Dataset):
        self._y = dataset.y

    def label(self, index: int) -> int:
        return int(self._y[index])


@dataclass
class TraceRecord:
    iteration: int
    queried_index: int
    label: int
    cumulative_anomalies: int
    loss: float


TRACE_FIELDS = ("iteration", "queried_index", "label", "cumulative_anomalies", "loss")


@dataclass
class SessionState:
    dataset: Dataset
    stats: Optional[StandardizationStats]
    X: np.ndarray
    ensemble: LodaEnsemble
    params: relevance.NetParams
    member_scores: np.ndarray
    labeled: LabeledSet
    budget: int
    loss_cfg: LossConfig
    train_cfg: relevance.TrainConfig
    opt_state: relevance.AdamState
    rng: np.random.Generator
    seed: int
    t: int = 0
    pending: Optional[int] = None
    trace: list = field(default_factory=list)
    prime_info: Optional[relevance.PrimeInfo] = None

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def anomalies_found(self):
        return self.labeled.n_anomalies

    @property
    def done(self):
        return self.pending is None and (
            self.t >= self.budget or len(self.labeled) >= self.n)

    def scores(self):
        """Current combined score of every instance."""
        P = relevance.forward(self.params, self.X)
        return combined_scores(self.member_scores, P)

    def relevances(self):
        return relevance.forward(self.params, self.X)

    def check_invariants(self):
        assert self.t <= self.budget
        assert len(self.trace) == self.t
        found = sum(1 for r in self.trace if r.label == 1)
        assert found == self.labeled.n_anomalies


def start_session(dataset, n_members=4, budget=30, seed=0,
                  loss_cfg=None, train_cfg=None, standardize_data=True):
    """Build the ensemble, prime the relevance network, return a fresh
    session ready for its first query."""
    if budget < 0:
        raise ValueError("budget must be >= 0")
    if n_members < 1:
        raise ValueError("need at least one ensemble member")
    loss_cfg = loss_cfg or LossConfig()
    train_cfg = replace(train_cfg or relevance.TrainConfig(), seed=seed)

    if standardize_data:
        ds_std, stats = standardize(dataset)
    else:
        ds_std, stats = dataset, None
    X = ds_std.X

    ensemble = build_ensemble(ds_std, n_members, seed)
    params = relevance.init_params(dataset.d, n_members, seed + 1)
    params, prime_info = relevance.prime(params, X, loss_cfg.bias, train_cfg)

    return SessionState(
        dataset=dataset,
        stats=stats,
        X=X,
        ensemble=ensemble,
        params=params,
        member_scores=member_score_matrix(ensemble, X),
        labeled=LabeledSet(),
        budget=budget,
        loss_cfg=loss_cfg,
        train_cfg=train_cfg,
        opt_state=relevance.AdamState(params),
        rng=np.random.default_rng(seed + 2),
        seed=seed,
        prime_info=prime_info,
    )


def select_query(scores, labeled_mask):
    """Index of the highest-scoring unlabeled instance; ties go to the
    lowest index."""
    scores = np.asarray(scores, dtype=np.float64)
    mask = np.asarray(labeled_mask, dtype=bool)
    if scores.shape != mask.shape:
        raise ValueError("scores and labeled_mask must have the same length")
    if mask.all():
        raise SessionExhausted("all instances are labeled")
    return int(np.argmax(np.where(mask, -np.inf, scores)))


def _propose(state):
    if state.t >= state.budget:
        return None
    try:
        q = select_query(state.scores(), state.labeled.mask(state.n))
    except SessionExhausted:
        return None
    state.pending = q
    return q


def step_session(state, label_for_pending=None):
    """Advance one iteration. Mutates and returns `state`.

    Without a label: proposes the next query (requires none pending).
    With a label: records it for the pending query, retrains for one
    pass, and proposes the following query. A `None` next-query index
    means the session is over (budget spent or data exhausted).
    """
    if label_for_pending is None:
        if state.pending is not None:
            raise ValueError("query %d is already pending; supply its label"
                             % state.pending)
        return state, _propose(state)

    if state.pending is None:
        if state.t >= state.budget:
            raise BudgetExhausted("budget of %d labels already spent" % state.budget)
        raise ValueError("no pending query; call step_session without a label first")
    y = int(label_for_pending)
    if y not in (-1, 1):
        raise ValueError("label must be -1 or +1")

    idx = state.pending
    state.pending = None
    iteration = state.t + 1
    state.labeled.add(idx, y, iteration)
    state.params, info = update_model(
        state.member_scores, state.params, state.X, state.labeled,
        state.loss_cfg, state.train_cfg, state.opt_state, state.rng)
    state.t = iteration
    state.trace.append(TraceRecord(
        iteration=iteration,
        queried_index=idx,
        label=y,
        cumulative_anomalies=state.labeled.n_anomalies,
        loss=info.loss_after,
    ))
    return state, _propose(state)


def run_session(state, analyst):
    """Drive the session to budget or data exhaustion with `analyst`
    answering every query."""
    if state.pending is not None:
        q = state.pending
    else:
        state, q = step_session(state)
    while q is not None:
        state, q = step_session(state, analyst.label(q))
    return state


def write_trace(trace, path):
    """Trace rows as CSV: iteration, queried_index, label,
    cumulative_anomalies, loss."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_FIELDS)
        for r in trace:
            w.writerow([r.iteration, r.queried_index, r.label,
                        r.cumulative_anomalies, repr(float(r.loss))])
