"""Comparison methods for the discovery-curve benchmark.

Three query strategies ride the same ensemble: the unweighted baseline
(static mean-score ranking, no learning), a global-weight learner that
adjusts one weight per member from feedback, and uniform random queries
as a sanity floor. All obey the no-re-query rule and emit the same trace
rows as the full session loop.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .loda import member_score_matrix
from .objective import LossConfig, compute_tau_anchor
from .session import SessionExhausted, TraceRecord, select_query

logger = logging.getLogger(__name__)


@dataclass
class GlobalWeights:
    """One weight per ensemble member, uniform 1/sqrt(M) at init."""

    w: np.ndarray

    @classmethod
    def uniform(cls, n_members):
        return cls(w=np.full(n_members, 1.0 / np.sqrt(n_members)))


def _loop(scores_fn, on_label, budget, analyst, n):
    trace = []
    labeled = np.zeros(n, dtype=bool)
    found = 0
    for it in range(1, budget + 1):
        try:
            idx = select_query(scores_fn(), labeled)
        except SessionExhausted:
            break
        y = int(analyst.label(idx))
        if y not in (-1, 1):
            raise ValueError("label must be -1 or +1")
        labeled[idx] = True
        if y == 1:
            found += 1
        loss = on_label(idx, y) if on_label is not None else 0.0
        trace.append(TraceRecord(it, idx, y, found, float(loss)))
    return trace


def run_unweighted_session(dataset, ensemble, budget, analyst, X=None):
    """Static ranking by mean member score; labels are collected but
    never change the ranking."""
    X = dataset.X if X is None else X
    S = member_score_matrix(ensemble, X)
    base = S.mean(axis=1)
    return _loop(lambda: base, None, budget, analyst, X.shape[0])


def run_loda_aad_session(dataset, ensemble, budget, analyst, X=None,
                         tau=0.03, step_size=0.01, reg_coeff=1.0, n_steps=50):
    """Global weight vector learned from feedback.

    Scores are w . s(x). After each label, gradient descent on the mean
    two-hinge loss over the feedback set plus reg_coeff * ||w - w_uniform||^2.
    The anchor rank and its score are frozen per update pass; the anchor
    instance is re-scored as w moves.
    """
    X = dataset.X if X is None else X
    S = member_score_matrix(ensemble, X)
    M = S.shape[1]
    weights = GlobalWeights.uniform(M)
    w_uniform = weights.w.copy()
    history = []

    def objective_and_grad(w, anchor):
        value = reg_coeff * float(((w - w_uniform) ** 2).sum())
        grad = 2.0 * reg_coeff * (w - w_uniform)
        c = 1.0 / len(history)
        anchor_now = float(w @ S[anchor.index])
        for idx, y in history:
            sc = float(w @ S[idx])
            h1 = y * (anchor.score - sc)
            h2 = y * (anchor_now - sc)
            if h1 > 0.0:
                value += c * h1
                grad += -y * c * S[idx]
            if h2 > 0.0:
                value += c * h2
                grad += y * c * (S[anchor.index] - S[idx])
        return value, grad

    def on_label(idx, y):
        history.append((idx, y))
        anchor = compute_tau_anchor(S @ weights.w, tau)
        value = 0.0
        for _ in range(n_steps):
            value, grad = objective_and_grad(weights.w, anchor)
            if not np.all(np.isfinite(grad)):
                logger.warning("non-finite gradient; freezing weights")
                break
            weights.w = weights.w - step_size * grad
        value, _ = objective_and_grad(weights.w, anchor)
        return value

    trace = _loop(lambda: S @ weights.w, on_label, budget, analyst, X.shape[0])
    return trace, weights


def run_random_session(dataset, budget, analyst, seed=0):
    """Uniform random queries; the floor any informed method must beat."""
    rng = np.random.default_rng(seed)
    n = dataset.n
    labeled = np.zeros(n, dtype=bool)
    trace = []
    found = 0
    for it in range(1, budget + 1):
        pool = np.flatnonzero(~labeled)
        if pool.size == 0:
            break
        idx = int(rng.choice(pool))
        y = int(analyst.label(idx))
        labeled[idx] = True
        if y == 1:
            found += 1
        trace.append(TraceRecord(it, idx, y, found, 0.0))
    return trace
