"""Reading back what the session learned.

After feedback, every instance has a most-relevant ensemble member. Small
decision trees turn that assignment into interval rules per member, and a
local surrogate explains a single instance's score in feature terms.
"""

import numpy as np

from glocal import (OracleAnalyst, describe_regions, fit_rule_tree,
                    local_explain, make_toy, relevance_assignment,
                    run_session, start_session)

dataset = make_toy(seed=0)
state = run_session(start_session(dataset, n_members=4, budget=30, seed=0),
                    OracleAnalyst(dataset))
print("session done: %d/%d anomalies found"
      % (state.anomalies_found, dataset.n_anomalies))

assignment = relevance_assignment(state.params, state.X)
members, counts = np.unique(assignment.member, return_counts=True)
print("\nmost-relevant member distribution:")
for m, c in zip(members, counts):
    print("  member %d owns %d instances" % (m, c))

print("\nregion rules (in the analyst's coordinates):")
for m in members:
    positive = assignment.positives(m)
    tree = fit_rule_tree(dataset.X, positive)
    rules = describe_regions(tree, dataset.feature_names)
    acc = tree.accuracy(dataset.X, positive)
    print("  member %d (tree accuracy %.2f):" % (m, acc))
    for rule in rules or ["(no positive region)"]:
        print("    %s" % rule)

# single-instance view for the highest-scoring point
idx = int(np.argmax(state.scores()))
x = dataset.X[idx]
explanation = local_explain(state.ensemble, state.params, x, dataset.X,
                            stats=state.stats, seed=state.seed + idx,
                            feature_names=dataset.feature_names)
print("\ninstance %d at (%.2f, %.2f):" % (idx, x[0], x[1]))
print("  member %d is most relevant, p = %s"
      % (explanation.member, np.round(explanation.relevance, 3)))
print("  surrogate terms (interval, weight):")
for text, weight in explanation.terms:
    print("    %-22s %+.3f" % (text, weight))
