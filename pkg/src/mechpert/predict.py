"""Prediction strategies for unseen perturbations.

Every strategy reduces to the same aggregation: a weighted average of
observed training profiles, y_hat = sum(w_j * y_j) / sum(w_j). The strategies
differ only in how the weighted neighborhood is built:

* semantic -- chain 0's functional-similarity retrieval, unit weights;
* binary / confidence -- multi-chain consensus over causal hypotheses, with
  semantic genes added at unit weight (additive on overlap);
* three_plus_two -- 3 expert seeds completed by the 2 nearest training genes
  to their Euclidean-embedding centroid, simple average of the 5;
* harmonizer -- personalized-PageRank expansion of the seeds, re-weighted by
  hyperbolic Gaussian density around the seeds' Einstein midpoint;
* spectral -- the harmonizer geometry gated multiplicatively by the PageRank
  mass (pct tightened from the 20th to the 15th percentile).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .consensus import MODE_BINARY, MODE_CONFIDENCE, aggregate_binary, aggregate_confidence
from .chains import HypothesisChain
from .data import PerturbationDataset
from .errors import (
    EmptyNeighborhood,
    InsufficientEmbeddedCandidates,
    MissingProfile,
    NoValidNeighbors,
    SeedCountNot3,
    ZeroTotalWeight,
)
from .graph import PpiGraph, personalized_pagerank, top_reachable
from .hyperbolic import (
    einstein_midpoint,
    gaussian_density_weight,
    percentile_bandwidth,
    poincare_distance,
)

logger = logging.getLogger(__name__)

STRATEGY_SEMANTIC = "semantic"
STRATEGY_BINARY = "binary"
STRATEGY_CONFIDENCE = "confidence"
STRATEGY_THREE_PLUS_TWO = "three_plus_two"
STRATEGY_HARMONIZER = "harmonizer"
STRATEGY_SPECTRAL = "spectral"
STRATEGIES = (
    STRATEGY_SEMANTIC,
    STRATEGY_BINARY,
    STRATEGY_CONFIDENCE,
    STRATEGY_THREE_PLUS_TWO,
    STRATEGY_HARMONIZER,
    STRATEGY_SPECTRAL,
)


@dataclass(frozen=True)
class WeightedNeighborhood:
    """Training genes with positive weights, ready for profile aggregation."""

    entries: dict[str, float]
    strategy: str


def predict(neighborhood: WeightedNeighborhood, dataset: PerturbationDataset) -> np.ndarray:
    """Convex combination of the neighborhood's training profiles."""
    if not neighborhood.entries:
        raise EmptyNeighborhood(f"empty {neighborhood.strategy} neighborhood")
    total = sum(neighborhood.entries.values())
    out = np.zeros(dataset.n_readouts)
    for gene in sorted(neighborhood.entries):
        if gene not in dataset.profiles:
            raise MissingProfile(gene)
        out += neighborhood.entries[gene] * dataset.profiles[gene]
    return out / total


def build_semantic_neighborhood(
    chains: list[HypothesisChain], train: frozenset[str]
) -> WeightedNeighborhood:
    """Unit weights on chain 0's semantic retrieval (single-retrieval baseline)."""
    if not chains:
        raise NoValidNeighbors("no chains supplied")
    members = [g for g in chains[0].semantic if g in train]
    if not members:
        raise NoValidNeighbors("semantic retrieval has no genes in the training set")
    return WeightedNeighborhood(
        entries={g: 1.0 for g in members}, strategy=STRATEGY_SEMANTIC
    )


def build_mechpert_neighborhood(
    chains: list[HypothesisChain],
    mode: str,
    train: frozenset[str],
    min_votes: int = 1,
) -> WeightedNeighborhood:
    """Causal consensus weights plus unit-weight semantic genes.

    A gene in both sets keeps weight 1 + consensus weight. ``min_votes``
    drops causal genes proposed by fewer chains (1 = keep single-chain
    proposals, the aggregation formulas verbatim).
    """
    if mode not in (MODE_BINARY, MODE_CONFIDENCE):
        raise ValueError(f"unknown consensus mode: {mode!r}")
    aggregate = aggregate_binary if mode == MODE_BINARY else aggregate_confidence
    causal = dict(aggregate(chains).weights)
    if min_votes > 1:
        votes = aggregate_binary(chains).weights
        causal = {g: w for g, w in causal.items() if votes.get(g, 0) >= min_votes}
    entries: dict[str, float] = {g: w for g, w in causal.items() if g in train}
    semantic_union: set[str] = set()
    for chain in chains:
        semantic_union.update(chain.semantic)
    for gene in semantic_union:
        if gene in train:
            entries[gene] = entries.get(gene, 0.0) + 1.0
    if not entries:
        raise NoValidNeighbors("no proposed gene has a training profile")
    return WeightedNeighborhood(entries=entries, strategy=mode)


def expert_seeds(chains: list[HypothesisChain], train: frozenset[str]) -> list[str]:
    """First three train-set members of chain 0's semantic retrieval."""
    if not chains:
        return []
    return [g for g in chains[0].semantic if g in train][:3]


def predict_three_plus_two(
    seeds: list[str],
    euclidean: dict[str, np.ndarray],
    train: frozenset[str],
    dataset: PerturbationDataset,
) -> np.ndarray:
    """Seed centroid in the Euclidean embedding; add the 2 nearest training genes.

    The prediction is the unweighted mean of the five profiles (3 seeds + 2
    geometric neighbors). Ties in the nearest-neighbor cut break by symbol.
    """
    if len(set(seeds)) != 3:
        raise SeedCountNot3(f"need exactly 3 distinct seeds, got {seeds}")
    for seed in seeds:
        if seed not in euclidean:
            raise InsufficientEmbeddedCandidates(f"seed {seed} has no embedding")
        if seed not in dataset.profiles:
            raise MissingProfile(seed)
    centroid = np.mean([euclidean[s] for s in seeds], axis=0)
    candidates = sorted(g for g in train if g in euclidean and g not in set(seeds))
    if len(candidates) < 2:
        raise InsufficientEmbeddedCandidates(
            f"need at least 2 embedded non-seed training genes, found {len(candidates)}"
        )
    by_distance = sorted(candidates, key=lambda g: (float(np.linalg.norm(euclidean[g] - centroid)), g))
    members = list(seeds) + by_distance[:2]
    neighborhood = WeightedNeighborhood(
        entries={g: 1.0 for g in members}, strategy=STRATEGY_THREE_PLUS_TWO
    )
    return predict(neighborhood, dataset)


def _geometric_candidates(
    seeds: list[str],
    graph: PpiGraph,
    poincare: dict[str, np.ndarray],
    train: frozenset[str],
    query: str | None,
    alpha: float,
    top_k: int,
) -> tuple[list[str], dict[str, float]]:
    """PageRank expansion of the seeds, filtered to embedded training genes."""
    scores = personalized_pagerank(graph, set(seeds), alpha=alpha)
    exclude = {query} if query else set()
    reachable = top_reachable(scores, k=top_k, exclude=exclude)
    pool = set(reachable) | set(seeds)
    candidates = sorted(g for g in pool if g in train and g != query)
    skipped = [g for g in candidates if g not in poincare]
    if skipped:
        logger.info("dropping %d candidates without hyperbolic coordinates", len(skipped))
    candidates = [g for g in candidates if g in poincare]
    return candidates, scores.scores


def predict_harmonizer(
    seeds: list[str],
    graph: PpiGraph,
    poincare: dict[str, np.ndarray],
    train: frozenset[str],
    dataset: PerturbationDataset,
    query: str | None = None,
    alpha: float = 0.85,
    top_k: int = 50,
    pct: float = 20.0,
) -> np.ndarray:
    """Diffusion-expanded neighborhood weighted by hyperbolic density.

    Candidates are the top reachable genes under personalized PageRank from
    the seeds; each is weighted by a Gaussian in its hyperbolic distance to
    the seeds' Einstein midpoint, with bandwidth at the given percentile of
    those distances.
    """
    candidates, _ = _geometric_candidates(seeds, graph, poincare, train, query, alpha, top_k)
    if not candidates:
        raise NoValidNeighbors("no reachable embedded training candidates")
    midpoint = einstein_midpoint([poincare[s] for s in seeds if s in poincare])
    distances = {g: poincare_distance(poincare[g], midpoint) for g in candidates}
    sigma = percentile_bandwidth(list(distances.values()), pct)
    entries = {g: gaussian_density_weight(distances[g], sigma) for g in candidates}
    neighborhood = WeightedNeighborhood(entries=entries, strategy=STRATEGY_HARMONIZER)
    return predict(neighborhood, dataset)


def predict_spectral(
    seeds: list[str],
    graph: PpiGraph,
    poincare: dict[str, np.ndarray],
    train: frozenset[str],
    dataset: PerturbationDataset,
    query: str | None = None,
    alpha: float = 0.85,
    top_k: int = 50,
    pct: float = 15.0,
) -> np.ndarray:
    """Harmonizer geometry gated elementwise by PageRank mass.

    w_final = pr_j * w_geo_j: a gene must be both reachable in the
    interactome and hierarchically close on the manifold to contribute.
    """
    candidates, pr = _geometric_candidates(seeds, graph, poincare, train, query, alpha, top_k)
    if not candidates:
        raise NoValidNeighbors("no reachable embedded training candidates")
    midpoint = einstein_midpoint([poincare[s] for s in seeds if s in poincare])
    distances = {g: poincare_distance(poincare[g], midpoint) for g in candidates}
    sigma = percentile_bandwidth(list(distances.values()), pct)
    entries = {
        g: pr.get(g, 0.0) * gaussian_density_weight(distances[g], sigma) for g in candidates
    }
    entries = {g: w for g, w in entries.items() if w > 0.0}
    if not entries:
        raise ZeroTotalWeight("all gated weights underflowed to zero")
    neighborhood = WeightedNeighborhood(entries=entries, strategy=STRATEGY_SPECTRAL)
    return predict(neighborhood, dataset)


@dataclass(frozen=True)
class StrategySettings:
    """Knobs shared by the strategy dispatcher and the benchmark drivers."""

    k_chains: int = 3
    temperature: float = 0.7
    alpha: float = 0.85
    beta: float = 1.0
    top_reachable: int = 50
    pct_harmonizer: float = 20.0
    pct_spectral: float = 15.0
    k_range: str = "5"
    min_votes: int = 1
    context: str = ""
    model_id: str = "default"


def predict_for_target(
    strategy: str,
    chains: list[HypothesisChain],
    target: str,
    train: frozenset[str],
    dataset: PerturbationDataset,
    settings: StrategySettings,
    graph: PpiGraph | None = None,
    euclidean: dict[str, np.ndarray] | None = None,
    poincare: dict[str, np.ndarray] | None = None,
) -> np.ndarray:
    """Dispatch one target prediction to the named strategy.

    The geometry-augmented strategies need 3 expert seeds; when fewer
    survive the train-set filter they fall back to the semantic baseline
    with a warning rather than failing the target.
    """
    if strategy == STRATEGY_SEMANTIC:
        return predict(build_semantic_neighborhood(chains, train), dataset)
    if strategy in (STRATEGY_BINARY, STRATEGY_CONFIDENCE):
        neighborhood = build_mechpert_neighborhood(chains, strategy, train, settings.min_votes)
        return predict(neighborhood, dataset)
    seeds = expert_seeds(chains, train)
    if len(seeds) < 3:
        logger.warning(
            "%s: only %d expert seeds for %s; falling back to semantic baseline",
            strategy,
            len(seeds),
            target,
        )
        return predict(build_semantic_neighborhood(chains, train), dataset)
    if strategy == STRATEGY_THREE_PLUS_TWO:
        if euclidean is None:
            raise ValueError("three_plus_two strategy needs Euclidean embeddings")
        try:
            return predict_three_plus_two(seeds, euclidean, train, dataset)
        except (InsufficientEmbeddedCandidates, MissingProfile) as exc:
            logger.warning("%s degraded to semantic for %s: %s", strategy, target, exc)
            return predict(build_semantic_neighborhood(chains, train), dataset)
    if strategy in (STRATEGY_HARMONIZER, STRATEGY_SPECTRAL):
        if graph is None or poincare is None:
            raise ValueError(f"{strategy} strategy needs a graph and Poincare embeddings")
        in_graph = [s for s in seeds if s in graph and s in poincare]
        if len(in_graph) < 3:
            logger.warning(
                "%s: seeds missing from graph/embeddings for %s; semantic fallback", strategy, target
            )
            return predict(build_semantic_neighborhood(chains, train), dataset)
        fn = predict_harmonizer if strategy == STRATEGY_HARMONIZER else predict_spectral
        pct = settings.pct_harmonizer if strategy == STRATEGY_HARMONIZER else settings.pct_spectral
        return fn(
            in_graph,
            graph,
            poincare,
            train,
            dataset,
            query=target,
            alpha=settings.alpha,
            top_k=settings.top_reachable,
            pct=pct,
        )
    raise ValueError(f"unknown strategy: {strategy!r}")
