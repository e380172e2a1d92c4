"""Dense score/relevance evaluation over a 2-D grid.

Feeds the contour views: the service's heatmap payload, the toy-demo CSV
dumps, and the localization checks in the test suite. Grids are laid out
in the dataset's original coordinates; scoring happens on the session's
standardized image when stats are present.
"""

import csv

import numpy as np

from . import relevance
from .loda import member_score_matrix
from .objective import combined_scores

DEFAULT_RESOLUTION = 50


def grid_axes(X, resolution=DEFAULT_RESOLUTION, margin=0.05):
    """Evenly spaced axes spanning each of the two features, padded by
    `margin` times the value range."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != 2:
        raise ValueError("grids are defined for 2-D data only")
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    pad = (hi - lo) * margin
    xs = np.linspace(lo[0] - pad[0], hi[0] + pad[0], resolution)
    ys = np.linspace(lo[1] - pad[1], hi[1] + pad[1], resolution)
    return xs, ys


def evaluate_grid(ensemble, params, xs, ys, stats=None):
    """Combined score and per-member relevance at every grid node.

    Returns (score, P) with score shaped (len(ys), len(xs)) and P shaped
    (M, len(ys), len(xs)); row i follows ys[i], column j follows xs[j].
    """
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    if stats is not None:
        pts = stats.apply(pts)
    S = member_score_matrix(ensemble, pts)
    P = relevance.forward(params, pts)
    score = combined_scores(S, P).reshape(len(ys), len(xs))
    rel = np.moveaxis(P.reshape(len(ys), len(xs), -1), 2, 0)
    return score, rel


def relevance_spread(rel):
    """Max minus min relevance over the grid, per member."""
    flat = rel.reshape(rel.shape[0], -1)
    return flat.max(axis=1) - flat.min(axis=1)


def grid_payload(state, resolution=DEFAULT_RESOLUTION, margin=0.05):
    """JSON-ready grid dict for a session, or None for d != 2 data."""
    if state.dataset.d != 2:
        return None
    xs, ys = grid_axes(state.dataset.X, resolution, margin)
    score, rel = evaluate_grid(state.ensemble, state.params, xs, ys,
                               stats=state.stats)
    return {
        "resolution": resolution,
        "xs": xs.tolist(),
        "ys": ys.tolist(),
        "score": score.tolist(),
        "relevance": [r.tolist() for r in rel],
    }


def write_grid_csv(path, xs, ys, score, rel):
    """Row-major dump: x, y, score, relevance_0..relevance_{M-1}."""
    M = rel.shape[0]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "score"] + ["relevance_%d" % m for m in range(M)])
        for i, yv in enumerate(ys):
            for j, xv in enumerate(xs):
                w.writerow([repr(float(xv)), repr(float(yv)),
                            repr(float(score[i, j]))]
                           + [repr(float(rel[m, i, j])) for m in range(M)])
