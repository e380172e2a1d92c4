"""LODA: an ensemble of one-dimensional histogram density estimators over
sparse random projections.

Each member m projects an instance onto the real line (beta_m . x) and
scores it with the negative log of the histogram density there. The
ensemble's unweighted score is the mean over members.
"""

import math
from dataclasses import dataclass

import numpy as np

MAX_MEMBERS = 1000


@dataclass
class Projection:
    """Sparse random projection vector with ceil(sqrt(d)) non-zeros."""

    beta: np.ndarray

    @property
    def d(self):
        return self.beta.shape[0]

    @property
    def n_nonzero(self):
        return int(np.count_nonzero(self.beta))


@dataclass
class Histogram:
    """Equal-width smoothed histogram density.

    `pseudo_density` is the Laplace floor assigned to out-of-range queries;
    every in-range bin density is at least that floor, so the negative log
    score is finite everywhere.
    """

    edges: np.ndarray
    densities: np.ndarray
    pseudo_density: float

    @property
    def n_bins(self):
        return self.densities.shape[0]

    def density_at(self, values):
        """Density lookup; scalar in, scalar out, array in, array out."""
        values = np.asarray(values, dtype=np.float64)
        scalar = values.ndim == 0
        v = np.atleast_1d(values)
        idx = np.clip(np.searchsorted(self.edges, v, side="right") - 1, 0, self.n_bins - 1)
        out = np.where(
            (v >= self.edges[0]) & (v <= self.edges[-1]),
            self.densities[idx],
            self.pseudo_density,
        )
        return float(out[0]) if scalar else out


@dataclass
class LodaEnsemble:
    members: list  # [(Projection, Histogram), ...]

    @property
    def n_members(self):
        return len(self.members)

    @property
    def d(self):
        return self.members[0][0].d


def rice_bins(n):
    """Rice-rule bin count, clamped to [10, 200]."""
    return int(min(200, max(10, math.ceil(2.0 * n ** (1.0 / 3.0)))))


def fit_histogram(values, n_bins, smoothing=1.0):
    """Fit an equal-width histogram with Laplace smoothing.

    Bin probability is (count + smoothing) / (n + n_bins * smoothing), so
    the densities integrate to exactly 1 over [min, max]. All identical
    values collapse to a single unit-width bin centered on the value.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValueError("cannot fit a histogram to no values")
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    if smoothing <= 0:
        raise ValueError("smoothing must be > 0")
    n = values.size
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        # degenerate: one bin of width 1 centered on the value
        edges = np.array([lo - 0.5, lo + 0.5])
        counts = np.array([n], dtype=np.float64)
        n_bins = 1
    else:
        edges = np.linspace(lo, hi, n_bins + 1)
        counts, _ = np.histogram(values, bins=edges)
        counts = counts.astype(np.float64)
    widths = np.diff(edges)
    total = n + n_bins * smoothing
    densities = (counts + smoothing) / (total * widths)
    # floor from the widest bin: float widths differ in the last ulp, and
    # the floor must sit at or below every smoothed bin density
    pseudo = float(smoothing / (total * widths.max()))
    return Histogram(edges=edges, densities=densities, pseudo_density=pseudo)


def build_ensemble(ds, n_members, seed, smoothing=1.0):
    """Build an ensemble of `n_members` projection+histogram detectors.

    Each projection has k = ceil(sqrt(d)) non-zero N(0,1) entries at
    uniformly chosen coordinates; each histogram is fit to the projected
    training data with Rice-rule bins. Deterministic per seed.
    """
    if n_members < 1:
        raise ValueError("need at least one member")
    if n_members > MAX_MEMBERS:
        raise ValueError("n_members=%d exceeds the cap of %d" % (n_members, MAX_MEMBERS))
    rng = np.random.default_rng(seed)
    d = ds.d
    k = int(math.ceil(math.sqrt(d)))
    n_bins = rice_bins(ds.n)
    members = []
    for _ in range(n_members):
        beta = np.zeros(d)
        coords = rng.choice(d, size=k, replace=False)
        beta[coords] = rng.standard_normal(k)
        proj = Projection(beta=beta)
        hist = fit_histogram(ds.X @ beta, n_bins, smoothing=smoothing)
        members.append((proj, hist))
    return LodaEnsemble(members=members)


def project(projection, x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != projection.d:
        raise ValueError("dimension mismatch: projection d=%d, x has %d"
                         % (projection.d, x.shape[-1]))
    return x @ projection.beta


def member_score(ensemble, m, x):
    """s_m(x) = -log(density at beta_m . x); finite for any real input."""
    proj, hist = ensemble.members[m]
    return -np.log(hist.density_at(project(proj, x)))


def member_score_matrix(ensemble, X):
    """(n, M) matrix of member scores for every instance."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    S = np.empty((X.shape[0], ensemble.n_members))
    for m, (proj, hist) in enumerate(ensemble.members):
        S[:, m] = -np.log(hist.density_at(X @ proj.beta))
    return S


def baseline_score(ensemble, x):
    """Unweighted LODA score: mean member score."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return float(np.mean([member_score(ensemble, m, x) for m in range(ensemble.n_members)]))
    return member_score_matrix(ensemble, x).mean(axis=1)


def baseline_scores(ensemble, X):
    return member_score_matrix(ensemble, X).mean(axis=1)
