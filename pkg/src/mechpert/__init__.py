"""Few-shot prediction of gene-perturbation expression responses.

The pipeline: multiple agent chains propose semantic neighbors and directed
regulators for a query gene; consensus aggregation turns the chains into a
weighted training-gene neighborhood; the prediction is the weighted average
of those genes' observed effect profiles. Geometry-augmented variants expand
the neighborhood over the interactome (personalized PageRank) and re-weight
it in hyperbolic space. A separate track selects anchor perturbation sets
under a budget and scores them with a fixed heat-kernel interpolator.
"""

from .chains import HypothesisChain, RegulatorHypothesis, run_chains
from .consensus import ConsensusResult, aggregate_binary, aggregate_confidence, select_top_k
from .data import (
    PerturbationDataset,
    TrainTestSplit,
    load_dataset,
    load_embeddings,
    load_ppi,
    subsample_training,
    write_dataset,
)
from .design import (
    AnchorSet,
    evaluate_anchor_set,
    map_targets,
    select_consensus,
    select_degree,
    select_llm_iterative,
    select_random,
)
from .errors import MechPertError
from .graph import (
    DiffusionScores,
    HeatKernelWeights,
    PpiGraph,
    degree_centrality,
    heat_kernel_interpolate,
    heat_kernel_weights,
    laplacian,
    personalized_pagerank,
    top_reachable,
    transition_matrix,
)
from .hyperbolic import (
    einstein_midpoint,
    gaussian_density_weight,
    percentile_bandwidth,
    poincare_distance,
)
from .metrics import c20, mean_sem, pearson
from .predict import (
    StrategySettings,
    WeightedNeighborhood,
    build_mechpert_neighborhood,
    build_semantic_neighborhood,
    predict,
    predict_for_target,
    predict_harmonizer,
    predict_spectral,
    predict_three_plus_two,
)
from .providers import (
    CacheReplayProvider,
    CachingProvider,
    HttpProvider,
    Provider,
    ProviderRequest,
)
from .benchmark import BenchmarkReport, ablation_run, report_markdown, scaling_benchmark
from .rng import Xoshiro256StarStar, derive_seed

__version__ = "0.1.0"

__all__ = [
    "AnchorSet",
    "BenchmarkReport",
    "CacheReplayProvider",
    "CachingProvider",
    "ConsensusResult",
    "DiffusionScores",
    "HeatKernelWeights",
    "HttpProvider",
    "HypothesisChain",
    "MechPertError",
    "PerturbationDataset",
    "PpiGraph",
    "Provider",
    "ProviderRequest",
    "RegulatorHypothesis",
    "StrategySettings",
    "TrainTestSplit",
    "WeightedNeighborhood",
    "Xoshiro256StarStar",
    "ablation_run",
    "aggregate_binary",
    "aggregate_confidence",
    "build_mechpert_neighborhood",
    "build_semantic_neighborhood",
    "c20",
    "degree_centrality",
    "derive_seed",
    "einstein_midpoint",
    "evaluate_anchor_set",
    "gaussian_density_weight",
    "heat_kernel_interpolate",
    "heat_kernel_weights",
    "laplacian",
    "load_dataset",
    "load_embeddings",
    "load_ppi",
    "map_targets",
    "mean_sem",
    "pearson",
    "percentile_bandwidth",
    "personalized_pagerank",
    "poincare_distance",
    "predict",
    "predict_for_target",
    "predict_harmonizer",
    "predict_spectral",
    "predict_three_plus_two",
    "report_markdown",
    "run_chains",
    "scaling_benchmark",
    "select_consensus",
    "select_degree",
    "select_llm_iterative",
    "select_random",
    "select_top_k",
    "subsample_training",
    "top_reachable",
    "transition_matrix",
    "write_dataset",
]
