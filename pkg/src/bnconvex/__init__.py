"""Convex training, closed forms, and GD-bias probes for BN-ReLU networks."""

__version__ = "0.1.0"

from .arrangements import (Arrangement, ArrangementSet, arrangement_bound,
                           enumerate_arrangements, sample_arrangements,
                           tight_arrangement_bound)
from .closed_forms import (ClosedFormResult, closed_form_deep_last_two,
                           closed_form_postbn, closed_form_scalar,
                           closed_form_vector_onehot, dual_optimal_scalar,
                           onehot_objective_value)
from .convex import (ConvexProgram, ConvexSolution, DualCertificate,
                     SolverConfig, build_cnn_program, build_fc_program,
                     build_postbn_program, convex_objective, dual_certificate,
                     feasibility_scaled, recover_network, residual_dual_vector,
                     solve_penalty, vector_dual_constraint_estimate)
from .linalg import (CompactSvd, WhitenedBasis, center, compact_svd,
                     pseudo_inverse, whitened_basis)
from .networks import (BnLayerParams, BnNetwork, DeepBnNetwork, Gradients,
                       TrainConfig, TrainLog, balanced_etas, bn_apply,
                       bn_apply_cnn, deep_forward_activations, forward,
                       gradients, init_network, load_network, make_rng,
                       network_from_dict, network_to_dict, objective,
                       predict_with_stats, rescale_units, save_network,
                       scaled_objective, train_gd)
from .probes import (DirectionSimilarityReport, ProbeReport, TruncationSpec,
                     direction_trend, gradient_identity_probe,
                     singular_direction_similarity, truncate_data,
                     write_similarity_csv)

__all__ = [name for name in dir() if not name.startswith("_")]
