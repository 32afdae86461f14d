"""Granulometry: measure how fine- or coarse-grained a labeled dataset is.

The toolkit scores a labeled dataset under a chosen distance function
(higher = coarser, lower = finer), checks candidate scores against the
properties such a score must satisfy, and extracts maximally fine
("bitter") and coarse ("sweet") class subsets.
"""

from .dataset import (
    ClassIndex,
    DistanceConfig,
    DistanceMatrix,
    GranulometryError,
    LabeledDataset,
    MeasureError,
    ValidationError,
    restrict_to_classes,
)
from .distance import (
    MedoidDistances,
    medoid_indices,
    medoid_indices_from_features,
    pairwise_distances,
)
from .measures import (
    CORE_MEASURE_IDS,
    MEASURE_IDS,
    MEASURES,
    MeasureResult,
    baker_hubert_gamma,
    c_index,
    fisher_ratio,
    fisher_ratio_from_features,
    measure_dataset,
    medoid_ranking_from_medoid_distances,
    medoid_ranking_index,
    medoid_ranking_index_from_features,
    medoid_silhouette_ratio,
    medoid_silhouette_ratio_from_features,
    rank_lists,
    ranking_index,
    resolve_measure,
    silhouette_ratio,
)
from .axioms import (
    AxiomReport,
    TransformSpec,
    check_axioms,
    granularity_consistent_transform,
    isomorphic_transform,
    scale_transform,
)
from .taster import (
    ClassPairTable,
    TasterExtractor,
    TasterSelection,
    extract_bitter,
    extract_random,
    extract_sweet,
    pairwise_class_granularity,
    run_taster,
    subset_granularity,
)
from .synth import (
    GaussianPairConfig,
    HierarchicalDataset,
    HierarchyConfig,
    RelabelReport,
    SweepReport,
    bundled_corpus,
    gaussian_blobs,
    gaussian_pair,
    generate_hierarchy,
    planted_taster_dataset,
    relabel_monotonicity,
    separation_sweep,
)
from .io import load_dataset, load_distances

__version__ = "0.1.0"

__all__ = [
    "ClassIndex",
    "DistanceConfig",
    "DistanceMatrix",
    "GranulometryError",
    "LabeledDataset",
    "MeasureError",
    "ValidationError",
    "restrict_to_classes",
    "MedoidDistances",
    "medoid_indices",
    "medoid_indices_from_features",
    "pairwise_distances",
    "CORE_MEASURE_IDS",
    "MEASURE_IDS",
    "MEASURES",
    "MeasureResult",
    "baker_hubert_gamma",
    "c_index",
    "fisher_ratio",
    "fisher_ratio_from_features",
    "measure_dataset",
    "medoid_ranking_from_medoid_distances",
    "medoid_ranking_index",
    "medoid_ranking_index_from_features",
    "medoid_silhouette_ratio",
    "medoid_silhouette_ratio_from_features",
    "rank_lists",
    "ranking_index",
    "resolve_measure",
    "silhouette_ratio",
    "AxiomReport",
    "TransformSpec",
    "check_axioms",
    "granularity_consistent_transform",
    "isomorphic_transform",
    "scale_transform",
    "ClassPairTable",
    "TasterExtractor",
    "TasterSelection",
    "extract_bitter",
    "extract_random",
    "extract_sweet",
    "pairwise_class_granularity",
    "run_taster",
    "subset_granularity",
    "GaussianPairConfig",
    "HierarchicalDataset",
    "HierarchyConfig",
    "RelabelReport",
    "SweepReport",
    "bundled_corpus",
    "gaussian_blobs",
    "gaussian_pair",
    "generate_hierarchy",
    "planted_taster_dataset",
    "relabel_monotonicity",
    "separation_sweep",
    "load_dataset",
    "load_distances",
    "__version__",
]
