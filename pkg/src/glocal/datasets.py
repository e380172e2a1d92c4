"""Dataset loading, standardization, and synthetic data generation.

Datasets carry a hidden ground-truth label vector (+1 anomaly, -1 nominal)
that only oracles and evaluation code may read; the learner itself never
touches it.
"""

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

ANOMALY = 1
NOMINAL = -1

DEFAULT_LABEL_MAP = {"anomaly": ANOMALY, "nominal": NOMINAL, "1": ANOMALY, "0": NOMINAL}

# Toy generator geometry: two unit-covariance Gaussian clusters with
# anomalies rejected inside 3 sigma of either mean.
TOY_MEANS = ((2.0, 2.0), (7.0, 7.0))
TOY_BOX = (-1.0, 10.0)
TOY_MIN_SEPARATION = 3.0


@dataclass
class Dataset:
    """Feature matrix plus hidden ground-truth labels.

    Attributes:
        name: identifier used in registries and output files
        X: (n, d) float matrix, finite entries only
        y: length-n labels in {-1, +1}
        feature_names: length-d column names
    """

    name: str
    X: np.ndarray
    y: np.ndarray
    feature_names: list

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.y = np.ascontiguousarray(self.y, dtype=np.int64)
        if self.X.ndim != 2:
            raise ValueError("X must be a 2-D matrix")
        n, d = self.X.shape
        if n < 2:
            raise ValueError("dataset needs at least 2 instances, got %d" % n)
        if d < 1:
            raise ValueError("dataset needs at least 1 feature")
        if self.y.shape != (n,):
            raise ValueError("y length %d does not match n=%d" % (self.y.shape[0], n))
        if not np.all(np.isin(self.y, (ANOMALY, NOMINAL))):
            raise ValueError("labels must all be in {-1, +1}")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("X contains NaN or infinite entries")
        if self.feature_names is None:
            self.feature_names = ["x%d" % j for j in range(d)]
        self.feature_names = [str(c) for c in self.feature_names]
        if len(self.feature_names) != d:
            raise ValueError("feature_names length does not match d")
        if self.positive_fraction > 0.25:
            warnings.warn(
                "dataset %r has a large anomaly fraction (%.3f); "
                "scores and quantile anchors assume anomalies are rare"
                % (self.name, self.positive_fraction)
            )
        # Shared read-only across concurrent runs; freeze the buffers.
        self.X.flags.writeable = False
        self.y.flags.writeable = False

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    @property
    def n_anomalies(self):
        return int(np.sum(self.y == ANOMALY))

    @property
    def positive_fraction(self):
        return float(np.mean(self.y == ANOMALY))

    def summary(self):
        return "%s: n=%d d=%d anomalies=%d (%.1f%%)" % (
            self.name, self.n, self.d, self.n_anomalies, 100.0 * self.positive_fraction,
        )


@dataclass
class StandardizationStats:
    """Per-column mean/std; zero-variance columns get std 1 so they pass
    through centered instead of being dropped."""

    mean: np.ndarray
    std: np.ndarray

    def apply(self, X):
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.std

    def invert(self, X):
        return np.asarray(X, dtype=np.float64) * self.std + self.mean


def standardize(ds):
    """Center and scale every feature column; returns (dataset, stats).

    Output columns have sample mean 0 and, where the input had positive
    variance, sample std 1. Labels are untouched.
    """
    mean = ds.X.mean(axis=0)
    std = ds.X.std(axis=0)
    std = np.where(std > 0.0, std, 1.0)
    stats = StandardizationStats(mean=mean, std=std)
    out = Dataset(ds.name, stats.apply(ds.X), ds.y.copy(), list(ds.feature_names))
    return out, stats


def _parse_rows(rows, label_column, label_map, source):
    header = next(rows, None)
    if header is None:
        raise ValueError("%s: empty file" % source)
    header = [h.strip() for h in header]
    if label_column not in header:
        raise ValueError(
            "%s: label column %r not found in header %r" % (source, label_column, header)
        )
    label_idx = header.index(label_column)
    feature_names = [h for i, h in enumerate(header) if i != label_idx]

    X_rows, y_rows = [], []
    for lineno, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError("%s line %d: expected %d columns, got %d"
                             % (source, lineno, len(header), len(row)))
        label_raw = row[label_idx].strip()
        key = label_raw.lower()
        if key not in label_map:
            raise ValueError("%s line %d: unknown label value %r" % (source, lineno, label_raw))
        y_rows.append(label_map[key])
        feats = []
        for i, cell in enumerate(row):
            if i == label_idx:
                continue
            cell = cell.strip()
            if cell == "":
                raise ValueError("%s line %d: missing value in column %r"
                                 % (source, lineno, header[i]))
            try:
                feats.append(float(cell))
            except ValueError:
                raise ValueError("%s line %d: non-numeric feature cell %r in column %r"
                                 % (source, lineno, cell, header[i])) from None
        X_rows.append(feats)

    if not X_rows:
        raise ValueError("%s: no data rows" % source)
    return np.array(X_rows, dtype=np.float64), np.array(y_rows, dtype=np.int64), feature_names


def load_csv(path, label_column="label", label_map=None, name=None):
    """Load a headered CSV into a Dataset.

    The label column maps through `label_map` (default: anomaly/nominal and
    1/0, case-insensitive) and is excluded from X. Non-numeric or missing
    feature cells are rejected, not imputed.
    """
    label_map = dict(DEFAULT_LABEL_MAP) if label_map is None else {
        str(k).lower(): v for k, v in label_map.items()
    }
    path = str(path)
    with open(path, newline="") as f:
        X, y, feature_names = _parse_rows(csv.reader(f), label_column, label_map, path)
    if name is None:
        base = path.rsplit("/", 1)[-1]
        name = base[:-4] if base.endswith(".csv") else base
    return Dataset(name, X, y, feature_names)


def parse_csv_text(text, label_column="label", label_map=None, name="upload"):
    """load_csv for in-memory CSV content (service uploads)."""
    label_map = dict(DEFAULT_LABEL_MAP) if label_map is None else {
        str(k).lower(): v for k, v in label_map.items()
    }
    lines = text.splitlines()
    X, y, feature_names = _parse_rows(csv.reader(lines), label_column, label_map, name)
    return Dataset(name, X, y, feature_names)


def save_csv(ds, path, label_column="label"):
    """Write a Dataset back out in the same schema load_csv accepts."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(list(ds.feature_names) + [label_column])
        for i in range(ds.n):
            label = "anomaly" if ds.y[i] == ANOMALY else "nominal"
            w.writerow([repr(float(v)) for v in ds.X[i]] + [label])


def make_toy(seed, n_nominal=500, n_anomaly=15, name="toy"):
    """2-D toy dataset: two dense Gaussian clusters plus peripheral outliers.

    Nominals come from unit-covariance components at (2,2) and (7,7);
    anomalies are drawn uniformly over the bounding box and rejected until
    they sit at least 3 component std-devs from both means. Fully
    deterministic per seed.
    """
    if n_anomaly < 1:
        raise ValueError("need at least one anomaly")
    if n_nominal < 10:
        raise ValueError("need at least 10 nominals")
    rng = np.random.default_rng(seed)
    means = np.array(TOY_MEANS)

    comp = rng.integers(0, 2, size=n_nominal)
    nominals = means[comp] + rng.standard_normal((n_nominal, 2))

    lo, hi = TOY_BOX
    anomalies = np.empty((0, 2))
    while anomalies.shape[0] < n_anomaly:
        cand = rng.uniform(lo, hi, size=(max(4 * n_anomaly, 32), 2))
        dist = np.linalg.norm(cand[:, None, :] - means[None, :, :], axis=2)
        keep = np.all(dist >= TOY_MIN_SEPARATION, axis=1)
        anomalies = np.vstack([anomalies, cand[keep]])
    anomalies = anomalies[:n_anomaly]

    X = np.vstack([nominals, anomalies])
    y = np.concatenate([np.full(n_nominal, NOMINAL), np.full(n_anomaly, ANOMALY)])
    return Dataset(name, X, y, ["x", "y"])


# Synthetic stand-ins for the usual small benchmark tables. Shapes and
# anomaly counts match the conventional versions exactly; the content is
# generated (nominal cluster mixture + a blend of global outliers and
# two-dimensional subspace anomalies) because the originals cannot be
# fetched in an offline build.
_BENCHMARKS = {
    "abalone": dict(n=1920, d=9, n_anomaly=29, seed=90210, clusters=3),
    "yeast": dict(n=1191, d=8, n_anomaly=55, seed=41177, clusters=3),
}


def benchmark_names():
    return sorted(_BENCHMARKS)


def make_benchmark(name):
    """Deterministic synthetic benchmark dataset with the standard shape
    for `name` (see `benchmark_names`)."""
    if name not in _BENCHMARKS:
        raise ValueError("unknown benchmark %r; available: %s" % (name, benchmark_names()))
    spec = _BENCHMARKS[name]
    n, d, n_anom = spec["n"], spec["d"], spec["n_anomaly"]
    k = spec["clusters"]
    rng = np.random.default_rng(spec["seed"])

    centers = rng.uniform(-5.0, 5.0, size=(k, d))
    scales = rng.uniform(0.6, 1.6, size=(k, d))
    weights = np.array([0.5, 0.3, 0.2])[:k]
    weights = weights / weights.sum()

    n_nom = n - n_anom
    counts = np.floor(weights * n_nom).astype(int)
    counts[0] += n_nom - counts.sum()

    nominal_parts = []
    for c in range(k):
        pts = centers[c] + rng.standard_normal((counts[c], d)) * scales[c]
        nominal_parts.append(pts)
    nominals = np.vstack(nominal_parts)

    n_global = n_anom // 2
    anomalies = np.empty((n_anom, d))
    for i in range(n_anom):
        c = rng.integers(0, k)
        if i < n_global:
            # far outlier in a random direction
            u = rng.standard_normal(d)
            u /= np.linalg.norm(u)
            r = rng.uniform(5.0, 8.0)
            anomalies[i] = centers[c] + u * r * scales[c]
        else:
            # looks nominal except in two offset dimensions
            base = centers[c] + rng.standard_normal(d) * scales[c]
            dims = rng.choice(d, size=2, replace=False)
            signs = rng.choice((-1.0, 1.0), size=2)
            base[dims] += signs * rng.uniform(4.0, 6.0, size=2) * scales[c][dims]
            anomalies[i] = base
    X = np.vstack([nominals, anomalies])
    y = np.concatenate([np.full(n_nom, NOMINAL), np.full(n_anom, ANOMALY)])
    perm = rng.permutation(n)
    return Dataset(name, X[perm], y[perm], ["f%d" % j for j in range(d)])
