"""Glocalized anomaly detection: global detector ensembles with learned
local relevance, trained from analyst feedback one label at a time.

The pieces compose bottom-up: `datasets` loads and generates data, `loda`
builds the projection-histogram ensemble, `relevance` is the per-member
gating network, `objective` combines them into the trainable score,
`session` runs the budgeted query loop, and `explain`/`grids` turn a
trained session into something a human can read.
"""

from .datasets import (ANOMALY, NOMINAL, Dataset, load_csv, make_benchmark,
                       make_toy, save_csv, standardize)
from .loda import (LodaEnsemble, baseline_score, baseline_scores,
                   build_ensemble, member_score, member_score_matrix)
from .relevance import (AdamState, NetParams, PrimeInfo, TrainConfig, forward,
                        hidden_width, init_params, prime, prior_loss)
from .objective import (LabeledSet, LossConfig, TauAnchor, aad_loss,
                        combined_scores, compute_tau_anchor, glocal_score,
                        glocal_scores, hinge_loss, loss_and_grad,
                        update_model)
from .session import (AnalystInterface, BudgetExhausted, OracleAnalyst,
                      SessionExhausted, SessionState, run_session,
                      select_query, start_session, step_session, write_trace)
from .baselines import (GlobalWeights, run_loda_aad_session,
                        run_random_session, run_unweighted_session)
from .explain import (RuleTree, SurrogateExplanation, describe_regions,
                      fit_rule_tree, local_explain, relevance_assignment,
                      surrogate_terms)
from .snapshots import (canonical_bytes, load_session, save_session,
                        snapshot_payload, state_from_payload)
from .bench import BenchConfig, run_bench

__version__ = "0.1.0"

__all__ = [
    "ANOMALY", "NOMINAL", "Dataset", "load_csv", "make_benchmark", "make_toy",
    "save_csv", "standardize",
    "LodaEnsemble", "baseline_score", "baseline_scores", "build_ensemble",
    "member_score", "member_score_matrix",
    "AdamState", "NetParams", "PrimeInfo", "TrainConfig", "forward",
    "hidden_width", "init_params", "prime", "prior_loss",
    "LabeledSet", "LossConfig", "TauAnchor", "aad_loss", "combined_scores",
    "compute_tau_anchor", "glocal_score", "glocal_scores", "loss_and_grad",
    "hinge_loss", "update_model",
    "AnalystInterface", "BudgetExhausted", "OracleAnalyst", "SessionExhausted",
    "SessionState", "run_session", "select_query", "start_session",
    "step_session", "write_trace",
    "GlobalWeights", "run_loda_aad_session", "run_random_session",
    "run_unweighted_session",
    "RuleTree", "SurrogateExplanation", "describe_regions", "fit_rule_tree",
    "local_explain", "relevance_assignment", "surrogate_terms",
    "canonical_bytes", "load_session", "save_session", "snapshot_payload",
    "state_from_payload",
    "BenchConfig", "run_bench",
    "__version__",
]
