"""Combined scoring and the feedback training objective.

The combined score of an instance is sum_m s_m(x) * p_m(x): member scores
weighted by learned local relevance. Labeled feedback enters through a
two-part hinge loss against the score quantile anchor, mixed with the
constant-relevance prior; the parameter gradient is assembled by chain
rule through the relevance network's backward pass.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import relevance
from .loda import member_score_matrix

logger = logging.getLogger(__name__)


@dataclass
class LossConfig:
    lambda_prior: float = 1.0
    tau: float = 0.03
    bias: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.tau < 0.5:
            raise ValueError("tau must be in (0, 0.5)")
        if not 0.0 < self.bias < 1.0:
            raise ValueError("bias must be in (0, 1)")
        if self.lambda_prior < 0.0:
            raise ValueError("lambda_prior must be >= 0")


@dataclass
class TauAnchor:
    """Instance ranked at the tau quantile of the descending score order,
    with its score frozen at anchor time."""

    index: int
    score: float
    tau: float


class LabeledSet:
    """Analyst feedback history: (instance index, label, iteration)."""

    def __init__(self, entries=None):
        self.entries = []
        self._by_index = {}
        for e in entries or []:
            self.add(*e)

    def add(self, index, label, iteration):
        index = int(index)
        if label not in (-1, 1):
            raise ValueError("label must be -1 or +1")
        if index in self._by_index:
            raise ValueError("instance %d already labeled; labels are immutable" % index)
        self._by_index[index] = (int(label), int(iteration))
        self.entries.append((index, int(label), int(iteration)))

    def __len__(self):
        return len(self.entries)

    def __contains__(self, index):
        return int(index) in self._by_index

    @property
    def indices(self):
        return np.array([e[0] for e in self.entries], dtype=np.int64)

    @property
    def labels(self):
        return np.array([e[1] for e in self.entries], dtype=np.int64)

    @property
    def n_anomalies(self):
        return int(sum(1 for e in self.entries if e[1] == 1))

    def mask(self, n):
        out = np.zeros(n, dtype=bool)
        if self.entries:
            out[self.indices] = True
        return out


def combined_scores(S, P):
    """Row-wise sum of member scores weighted by relevance."""
    return (np.asarray(S) * np.asarray(P)).sum(axis=-1)


def glocal_score(ensemble, params, x):
    """Combined score for one instance."""
    s = member_score_matrix(ensemble, np.atleast_2d(x))[0]
    p = relevance.forward(params, np.asarray(x, dtype=np.float64))
    return float((s * p).sum())


def glocal_scores(ensemble, params, X):
    S = member_score_matrix(ensemble, X)
    P = relevance.forward(params, np.atleast_2d(X))
    return combined_scores(S, P)


def compute_tau_anchor(scores, tau):
    """Anchor = instance at 1-based rank ceil(tau * n) by descending score,
    ties going to the lower instance index."""
    scores = np.asarray(scores, dtype=np.float64)
    n = scores.shape[0]
    if n < 1:
        raise ValueError("need at least one score")
    rank = min(max(1, math.ceil(tau * n)), n)
    order = np.argsort(-scores, kind="stable")
    idx = int(order[rank - 1])
    return TauAnchor(index=idx, score=float(scores[idx]), tau=tau)


def hinge_loss(q, score, y):
    """max(0, y * (q - score)): anomalies pay for scoring below q,
    nominals for scoring above it."""
    if y not in (-1, 1):
        raise ValueError("label must be -1 or +1")
    return max(0.0, y * (q - score))


def aad_loss(anchor, rescored_anchor_score, x_score, y):
    """Two hinges: one against the frozen anchor score, one against the
    anchor instance re-scored under the current model."""
    return hinge_loss(anchor.score, x_score, y) + hinge_loss(rescored_anchor_score, x_score, y)


def loss_and_grad(S, params, X, labeled, anchor, cfg):
    """Full objective value and exact parameter gradient.

    value = mean over labeled pairs of the two-hinge loss
            + lambda * mean over all of X of the prior loss.
    With no labels the value reduces to the prior term alone. Hinge
    subgradient at the kink is 0. `S` is the (n, M) member score matrix
    for X; `anchor` must come from the frozen per-pass ranking.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n = X.shape[0]
    _, _, _, P = relevance._forward_cache(params, X)

    G = np.zeros_like(P)
    value = 0.0
    if cfg.lambda_prior > 0.0:
        b = cfg.bias
        per_instance = -(b * np.log(P) + (1.0 - b) * np.log(1.0 - P)).sum(axis=1)
        value += cfg.lambda_prior * float(per_instance.mean())
        G += cfg.lambda_prior * relevance.prior_output_grad(P, b) / n

    if len(labeled) > 0:
        scores = combined_scores(S, P)
        anchor_now = float(scores[anchor.index])
        c = 1.0 / len(labeled)
        aad_total = 0.0
        for idx, y, _ in labeled.entries:
            sc = float(scores[idx])
            h1 = y * (anchor.score - sc)
            h2 = y * (anchor_now - sc)
            if h1 > 0.0:
                aad_total += h1
                G[idx] += -y * c * S[idx]
            if h2 > 0.0:
                aad_total += h2
                G[idx] += -y * c * S[idx]
                G[anchor.index] += y * c * S[anchor.index]
        value += aad_total * c

    grads = relevance.backward(params, X, G)
    return value, grads


@dataclass
class UpdateInfo:
    anchor: TauAnchor
    loss_before: float
    loss_after: float
    aborted: bool = False


def _epoch_plan(n, labeled, cfg, rng):
    """Pair shuffled batches over all n instances with chunks of the
    upsampled labeled stream; the labeled set is replicated
    cfg.upsample_factor times per epoch."""
    order = rng.permutation(n)
    batches = [order[s:s + cfg.batch_size] for s in range(0, n, cfg.batch_size)]
    if len(labeled) > 0:
        stream = np.repeat(np.arange(len(labeled)), cfg.upsample_factor)
        stream = stream[rng.permutation(stream.size)]
        chunks = np.array_split(stream, len(batches))
    else:
        chunks = [np.empty(0, dtype=np.int64) for _ in batches]
    return list(zip(batches, chunks))


def update_model(S, params, X, labeled, loss_cfg, train_cfg, opt_state, rng):
    """One retraining pass: a single epoch of minibatch Adam updates.

    The tau anchor is computed from the incoming parameters and frozen for
    the whole pass (the anchor instance is re-scored per batch, the anchor
    score is not). Each batch minimizes an unbiased estimate of the full
    objective: mean hinge loss over its labeled chunk plus lambda times the
    mean prior loss over its slice of X. A non-finite batch loss aborts the
    pass and returns the incoming parameters.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n = X.shape[0]
    incoming = params

    scores_in = combined_scores(S, relevance.forward(params, X))
    anchor = compute_tau_anchor(scores_in, loss_cfg.tau)
    loss_before, _ = loss_and_grad(S, params, X, labeled, anchor, loss_cfg)

    lab_idx = labeled.indices if len(labeled) > 0 else np.empty(0, dtype=np.int64)
    lab_y = labeled.labels if len(labeled) > 0 else np.empty(0, dtype=np.int64)

    for batch, chunk in _epoch_plan(n, labeled, train_cfg, rng):
        # rows touched this step: the prior slice, the labeled chunk, the anchor
        chunk_rows = lab_idx[chunk]
        rows = np.unique(np.concatenate([batch, chunk_rows, [anchor.index]]))
        pos = {int(r): i for i, r in enumerate(rows)}
        _, _, _, P = relevance._forward_cache(params, X[rows])

        G = np.zeros_like(P)
        batch_loss = 0.0
        if loss_cfg.lambda_prior > 0.0:
            b = loss_cfg.bias
            bsel = np.array([pos[int(r)] for r in batch])
            Pb = P[bsel]
            per_instance = -(b * np.log(Pb) + (1.0 - b) * np.log(1.0 - Pb)).sum(axis=1)
            batch_loss += loss_cfg.lambda_prior * float(per_instance.mean())
            np.add.at(G, bsel,
                      loss_cfg.lambda_prior * relevance.prior_output_grad(Pb, b) / batch.size)

        if chunk.size > 0:
            a_pos = pos[anchor.index]
            anchor_now = float((S[anchor.index] * P[a_pos]).sum())
            c = 1.0 / chunk.size
            aad_total = 0.0
            for k in chunk:
                idx = int(lab_idx[k])
                y = int(lab_y[k])
                r = pos[idx]
                sc = float((S[idx] * P[r]).sum())
                h1 = y * (anchor.score - sc)
                h2 = y * (anchor_now - sc)
                if h1 > 0.0:
                    aad_total += h1
                    G[r] += -y * c * S[idx]
                if h2 > 0.0:
                    aad_total += h2
                    G[r] += -y * c * S[idx]
                    G[a_pos] += y * c * S[anchor.index]
            batch_loss += aad_total * c

        if not math.isfinite(batch_loss):
            logger.warning("non-finite loss in retraining pass; keeping previous parameters")
            final, _ = loss_and_grad(S, incoming, X, labeled, anchor, loss_cfg)
            return incoming, UpdateInfo(anchor, loss_before, final, aborted=True)

        grads = relevance.backward(params, X[rows], G)
        params = relevance.train_step(params, grads, train_cfg, opt_state)

    loss_after, _ = loss_and_grad(S, params, X, labeled, anchor, loss_cfg)
    return params, UpdateInfo(anchor, loss_before, loss_after)
