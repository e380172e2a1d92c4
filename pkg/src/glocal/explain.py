"""Why did this instance score high, and where does each detector matter?

Two complementary views. Region rules: assign every instance to its
most-relevant ensemble member, then fit a small decision tree per member
whose positive leaves describe, as feature intervals, the part of the
space that member owns. Local surrogate: around one instance, perturb,
re-score with the most-relevant member, and fit a weighted linear model
on interval-membership indicators; the heaviest terms are the
explanation.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import relevance
from .loda import member_score

logger = logging.getLogger(__name__)

DEFAULT_MAX_DEPTH = 4
DEFAULT_MIN_LEAF = 5


class ExplainError(RuntimeError):
    pass


@dataclass
class RelevanceAssignment:
    member: np.ndarray     # (n,) argmax member per instance
    relevance: np.ndarray  # (n, M)

    def positives(self, m):
        return self.member == m


def relevance_assignment(params, X):
    """Most-relevant member for every instance; argmax ties go to the
    lowest member index."""
    P = relevance.forward(params, np.atleast_2d(X))
    return RelevanceAssignment(member=np.argmax(P, axis=1), relevance=P)


@dataclass
class TreeNode:
    n: int
    positive: bool
    purity: float
    feature: int = -1
    threshold: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self):
        return self.left is None


@dataclass
class RuleTree:
    root: TreeNode
    max_depth: int
    n_features: int

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.empty(X.shape[0], dtype=bool)
        for i, x in enumerate(X):
            node = self.root
            while not node.is_leaf:
                node = node.left if x[node.feature] <= node.threshold else node.right
            out[i] = node.positive
        return out

    def accuracy(self, X, positive_mask):
        return float((self.predict(X) == np.asarray(positive_mask, bool)).mean())


def _gini(n_pos, n):
    if n == 0:
        return 0.0
    p = n_pos / n
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _best_split(X, y, min_leaf):
    """Exhaustive scan over (feature, midpoint) pairs for the lowest
    size-weighted child Gini. Returns (feature, threshold, score) or None."""
    n = X.shape[0]
    total_pos = int(y.sum())
    best = None
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        pos_prefix = np.cumsum(y[order])
        # split after position i: left = first i+1 sorted points
        for i in range(n - 1):
            if xs[i] == xs[i + 1]:
                continue
            n_left = i + 1
            n_right = n - n_left
            if n_left < min_leaf or n_right < min_leaf:
                continue
            pos_left = int(pos_prefix[i])
            score = (n_left * _gini(pos_left, n_left)
                     + n_right * _gini(total_pos - pos_left, n_right)) / n
            if best is None or score < best[2] - 1e-12:
                best = (j, (xs[i] + xs[i + 1]) / 2.0, score)
    return best


def _grow(X, y, depth, max_depth, min_leaf):
    n = X.shape[0]
    n_pos = int(y.sum())
    node = TreeNode(n=n, positive=n_pos * 2 >= n and n_pos > 0,
                    purity=max(n_pos, n - n_pos) / n if n else 1.0)
    if depth >= max_depth or n_pos == 0 or n_pos == n or n < 2 * min_leaf:
        return node
    split = _best_split(X, y, min_leaf)
    if split is None or split[2] >= _gini(n_pos, n) - 1e-12:
        return node
    j, thr, _ = split
    mask = X[:, j] <= thr
    node.feature = j
    node.threshold = thr
    node.left = _grow(X[mask], y[mask], depth + 1, max_depth, min_leaf)
    node.right = _grow(X[~mask], y[~mask], depth + 1, max_depth, min_leaf)
    return node


def fit_rule_tree(X, positive_mask, max_depth=DEFAULT_MAX_DEPTH,
                  min_leaf=DEFAULT_MIN_LEAF):
    """Greedy binary tree separating positives from the rest; Gini
    impurity, midpoint thresholds. Degenerate inputs (no positives, all
    positives) yield a single leaf."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(positive_mask, dtype=bool).astype(np.int64)
    if X.shape[0] != y.shape[0]:
        raise ValueError("X and positive_mask length mismatch")
    root = _grow(X, y, 0, max_depth, min_leaf)
    return RuleTree(root=root, max_depth=max_depth, n_features=X.shape[1])


def _interval_text(name, lo, hi):
    if lo is None and hi is None:
        return None
    if lo is None:
        return "%s <= %.2f" % (name, hi)
    if hi is None:
        return "%s > %.2f" % (name, lo)
    return "%.2f < %s <= %.2f" % (lo, name, hi)


def describe_regions(tree, feature_names=None):
    """One conjunctive interval rule per positive leaf. Repeated splits on
    a feature collapse to a single interval. An unconstrained positive
    leaf renders as 'all instances'."""
    names = feature_names or ["f%d" % j for j in range(tree.n_features)]
    rules = []

    def walk(node, bounds):
        if node.is_leaf:
            if node.positive:
                parts = []
                for j in sorted(bounds):
                    text = _interval_text(names[j], *bounds[j])
                    if text:
                        parts.append(text)
                rules.append(" and ".join(parts) if parts else "all instances")
            return
        lo, hi = bounds.get(node.feature, (None, None))
        left = dict(bounds)
        left[node.feature] = (lo, node.threshold if hi is None else min(hi, node.threshold))
        walk(node.left, left)
        right = dict(bounds)
        right[node.feature] = (node.threshold if lo is None else max(lo, node.threshold), hi)
        walk(node.right, right)

    walk(tree.root, {})
    return rules


@dataclass
class SurrogateExplanation:
    member: int
    terms: list            # [(interval text, weight)], |weight| descending
    intercept: float
    relevance: np.ndarray = field(default=None, repr=False)

    def as_dict(self):
        return {
            "member": self.member,
            "terms": [[t, w] for t, w in self.terms],
            "intercept": self.intercept,
            "relevance": None if self.relevance is None else self.relevance.tolist(),
        }


def quartile_edges(X_ref):
    """(d, 3) per-feature quartile boundaries for interval binarization."""
    return np.percentile(np.atleast_2d(X_ref), [25, 50, 75], axis=0).T


def _bin_of(values, edges):
    return np.searchsorted(edges, values, side="left")


def _bin_text(name, k, edges):
    if k == 0:
        return "%s <= %.2f" % (name, edges[0])
    if k == len(edges):
        return "%s > %.2f" % (name, edges[-1])
    return "%.2f < %s <= %.2f" % (edges[k - 1], name, edges[k])


def surrogate_terms(score_fn, x, X_ref, n_samples=1000, kernel_width=None,
                    K=2, seed=0, feature_names=None):
    """Weighted linear fit to score_fn around x.

    Perturbations are Gaussian with per-feature sigma = std over X_ref;
    proximity weights use a Gaussian kernel on sigma-normalized distance.
    Each linear feature is the indicator 'x' falls in the same quartile
    bin of feature j as x', so every weight reads as the contribution of
    one feature interval. If the perturbed scores are flat, sigma is
    widened once before giving up.
    """
    x = np.asarray(x, dtype=np.float64)
    X_ref = np.atleast_2d(np.asarray(X_ref, dtype=np.float64))
    d = x.shape[0]
    if n_samples < 100:
        raise ValueError("n_samples must be >= 100")
    if kernel_width is None:
        kernel_width = 0.75 * np.sqrt(d)
    names = feature_names or ["f%d" % j for j in range(d)]

    sigma = X_ref.std(axis=0)
    sigma[sigma == 0.0] = 1.0
    edges = quartile_edges(X_ref)
    x_bins = np.array([_bin_of(x[j], edges[j]) for j in range(d)])

    rng = np.random.default_rng(seed)
    for attempt in range(2):
        noise = rng.standard_normal((n_samples, d)) * sigma
        Xp = x + noise
        targets = np.asarray(score_fn(Xp), dtype=np.float64)
        if targets.std() > 1e-12:
            break
        sigma = sigma * 10.0
        logger.warning("flat scores around instance; widening sigma (attempt %d)", attempt + 1)
    else:
        raise ExplainError("perturbation scores are constant; nothing to explain")

    Z = np.empty((n_samples, d))
    for j in range(d):
        Z[:, j] = (_bin_of(Xp[:, j], edges[j]) == x_bins[j]).astype(np.float64)

    dist2 = ((noise / sigma) ** 2).sum(axis=1)
    k_w = np.sqrt(np.exp(-dist2 / kernel_width ** 2))
    A = np.hstack([Z, np.ones((n_samples, 1))])
    beta, *_ = np.linalg.lstsq(A * k_w[:, None], targets * k_w, rcond=None)

    order = np.argsort(-np.abs(beta[:d]), kind="stable")[:max(0, K)]
    terms = [(_bin_text(names[j], int(x_bins[j]), edges[j]), float(beta[j]))
             for j in order]
    return terms, float(beta[d])


def local_explain(ensemble, params, x, X_ref, n_samples=1000,
                  kernel_width=None, K=2, seed=0, feature_names=None,
                  stats=None):
    """Explain one instance with its most-relevant member.

    `x` and `X_ref` are in presentation coordinates. When `stats` is given
    the member scores are computed on the standardized image, so the
    explanation intervals stay in the units the analyst sees.
    """
    x = np.asarray(x, dtype=np.float64)
    to_scoring = stats.apply if stats is not None else (lambda v: v)
    p = relevance.forward(params, np.asarray(to_scoring(x), dtype=np.float64))
    member = int(np.argmax(p))

    def score_fn(Xp):
        return member_score(ensemble, member, to_scoring(Xp))

    terms, intercept = surrogate_terms(
        score_fn, x, X_ref, n_samples=n_samples, kernel_width=kernel_width,
        K=K, seed=seed, feature_names=feature_names)
    return SurrogateExplanation(member=member, terms=terms,
                                intercept=intercept, relevance=p)
