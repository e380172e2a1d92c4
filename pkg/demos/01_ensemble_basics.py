"""Projection-histogram ensembles on the 2-D toy data.

Walks through the unsupervised layer on its own: build the toy dataset,
fit a small ensemble, and look at how member scores and their mean rank
the known anomalies before any feedback enters the picture.
"""

import numpy as np

from glocal import (baseline_scores, build_ensemble, make_toy,
                    member_score_matrix, standardize)

dataset = make_toy(seed=0)
print("toy dataset: %d instances, %d features, %d anomalies"
      % (dataset.n, dataset.d, dataset.n_anomalies))

ds, stats = standardize(dataset)
ensemble = build_ensemble(ds, n_members=4, seed=0)

for m, (proj, hist) in enumerate(ensemble.members):
    nonzero = np.flatnonzero(proj.beta)
    print("member %d: projection onto features %s, %d histogram bins"
          % (m, nonzero.tolist(), hist.n_bins))

S = member_score_matrix(ensemble, ds.X)
print("\nmember score matrix shape:", S.shape)

# anomalies should already stand out in the raw mean score
base = baseline_scores(ensemble, ds.X)
is_anomaly = dataset.y == 1
print("mean score over nominals:  %.3f" % base[~is_anomaly].mean())
print("mean score over anomalies: %.3f" % base[is_anomaly].mean())

top15 = np.argsort(-base, kind="stable")[:15]
hits = int(is_anomaly[top15].sum())
print("\ntop 15 by mean score contain %d/%d true anomalies"
      % (hits, dataset.n_anomalies))
print("top 5 instances (index, score, truth):")
for idx in top15[:5]:
    truth = "anomaly" if is_anomaly[idx] else "nominal"
    print("  %4d  %.3f  %s" % (idx, base[idx], truth))
