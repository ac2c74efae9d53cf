"""boxprop: test-time label propagation for object-detection boxes.

High-confidence detections seed per-class confirmed pools; the remaining
boxes are relabeled over multiple rounds of exact minimum-cost one-to-one
matching on feature distances, first under per-class distance caps and then
unconditionally, until every box carries a label.
"""

from ._lsap import BACKEND as ASSIGNMENT_BACKEND
from ._lsap import available_backends
from .assignment import CostMatrix, MatchFlow, build_cost_matrix, solve_matching
from .calibration import (
    CalibratorModel,
    DegenerateDataError,
    fit_beta,
    fit_histogram_binning,
    fit_platt,
    threshold_filter,
)
from .clustering import ClusteringResult, kmeans_fit, select_representatives
from .evaluation import (
    f_score,
    iou,
    match_to_ground_truth,
    precision_recall_f,
    stage_error_rates,
)
from .io import (
    load_detections,
    load_features,
    load_ground_truth,
    read_audit,
    read_results,
    write_audit,
    write_detections,
    write_features_binary,
    write_features_text,
    write_ground_truth,
    write_results,
)
from .model import (
    REJECT_CLASS,
    BoundingBox,
    ClassConstraints,
    ConfigError,
    DataError,
    DetectionRecord,
    FeatureStore,
    FormatError,
    GroundTruthBox,
    LabeledPool,
    NotEnoughSeedsError,
    Provenance,
    RunConfig,
    ValidationError,
    ValidationReport,
    validate_detection_set,
)
from .propagation import (
    AuditEntry,
    PropagationAudit,
    RoundLog,
    propagate_round,
    run_propagation,
)
from .seeding import compute_distance_cap, distance_caps_for, select_high_confidence
from .synthetic import (
    SyntheticInstance,
    generate_cluster_instance,
    line_means,
    nearest_seed_oracle,
)

__version__ = "0.1.0"
