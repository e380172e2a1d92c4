"""A full human-in-the-loop session with a simulated analyst.

The session queries the top-scoring unlabeled instance, the oracle answers
with ground truth, and the relevance network retrains after every label.
Compare the discovery trail against the static ranking to see the payoff.
"""

import numpy as np

from glocal import (OracleAnalyst, baseline_scores, make_toy, run_session,
                    start_session)

dataset = make_toy(seed=0)
state = start_session(dataset, n_members=4, budget=30, seed=0)
print("starting session: budget %d, %d ensemble members" % (state.budget, 4))
print("priming converged in %d epochs (max |p - b| = %.4f)"
      % (state.prime_info.epochs, state.prime_info.max_deviation))

state = run_session(state, OracleAnalyst(dataset))

print("\niteration  queried  label    found  loss")
for r in state.trace:
    mark = "anomaly" if r.label == 1 else "nominal"
    print("   %3d      %4d   %-8s  %2d   %.4f"
          % (r.iteration, r.queried_index, mark, r.cumulative_anomalies, r.loss))

print("\nfound %d/%d anomalies in %d queries"
      % (state.anomalies_found, dataset.n_anomalies, state.t))

# how many would the static mean-score ranking have found in 30 queries?
base = baseline_scores(state.ensemble, state.X)
static_top = np.argsort(-base, kind="stable")[:30]
static_hits = int((dataset.y[static_top] == 1).sum())
print("static ranking over the same budget: %d anomalies" % static_hits)

# feedback reshapes where each member counts
P = state.relevances()
print("\nper-member relevance spread over the data (max - min):")
for m in range(P.shape[1]):
    print("  member %d: %.3f" % (m, P[:, m].max() - P[:, m].min()))
