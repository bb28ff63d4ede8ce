"""Anchor-set selection under a budget, and its surrogate evaluation.

Four selection strategies produce an anchor set of at most ``k`` genes:
uniform random, weighted-degree centrality, single-chain iterative LLM
selection, and multi-chain vote-counted consensus selection. The two
provider-backed strategies run the same iterative loop -- each round asks for
the next batch of master regulators, excluding everything already chosen --
and differ only in how many chains vote per round.

Evaluation deliberately does not reuse the hypothesis engine: anchors are
scored by how well a fixed heat-kernel interpolator over the interactome
predicts every other measured gene from them, so differences between
strategies reflect anchor placement alone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .chains import parse_gene_array_response
from .data import PerturbationDataset
from .errors import (
    AnchorMissingProfile,
    AnchorNotInGraph,
    BudgetExceedsPool,
    ConstantInput,
    ProviderTransportError,
    ProviderUnavailable,
    UnparseableResponse,
    ZeroKernelMass,
)
from .graph import PpiGraph, degree_centrality, heat_kernel_interpolate
from .metrics import MeanSem, c20, mean_sem
from .prompts import render_design_select_prompt, render_target_map_prompt
from .providers import Provider, ProviderRequest
from .rng import Xoshiro256StarStar, derive_seed

logger = logging.getLogger(__name__)

STRATEGY_RANDOM = "random"
STRATEGY_DEGREE = "degree"
STRATEGY_SEMANTIC_LLM = "semantic_llm"
STRATEGY_CONSENSUS = "consensus"
ANCHOR_STRATEGIES = (STRATEGY_RANDOM, STRATEGY_DEGREE, STRATEGY_SEMANTIC_LLM, STRATEGY_CONSENSUS)

POOL_SAMPLE_LIMIT = 400  # symbols sent per selection prompt


@dataclass(frozen=True)
class AnchorSet:
    anchors: tuple[str, ...]
    strategy: str
    rounds: tuple[dict, ...] = ()

    def __post_init__(self) -> None:
        if len(set(self.anchors)) != len(self.anchors):
            raise ValueError("anchor set contains duplicates")


@dataclass(frozen=True)
class TargetMapEntry:
    targets: tuple[str, ...]
    confidence: float
    logic: str
    evidence_note: str = ""


def select_random(pool: list[str], k: int, seed: int) -> AnchorSet:
    """Seeded uniform sample without replacement from the sorted pool."""
    if k > len(pool):
        raise BudgetExceedsPool(f"budget {k} exceeds pool of {len(pool)}")
    rng = Xoshiro256StarStar(derive_seed(seed, "anchors:random"))
    anchors = rng.sample(sorted(pool), k)
    return AnchorSet(anchors=tuple(anchors), strategy=STRATEGY_RANDOM)


def select_degree(graph: PpiGraph, pool: list[str], k: int) -> AnchorSet:
    """Top-k of weighted-degree centrality restricted to the pool.

    Pool genes absent from the graph rank last (degree zero), alphabetically.
    """
    pool_set = set(pool)
    ranked = [g for g in degree_centrality(graph) if g in pool_set]
    missing = sorted(g for g in pool_set if g not in graph)
    ordered = ranked + missing
    return AnchorSet(anchors=tuple(ordered[:k]), strategy=STRATEGY_DEGREE)


def _pool_sample(pool: list[str], selected: list[str], seed: int, round_index: int) -> list[str]:
    """Deterministic per-round sample of the unselected pool, capped for prompt size."""
    remaining = sorted(set(pool) - set(selected))
    if len(remaining) <= POOL_SAMPLE_LIMIT:
        return remaining
    rng = Xoshiro256StarStar(derive_seed(seed, f"design:pool-sample:{round_index}"))
    return sorted(rng.sample(remaining, POOL_SAMPLE_LIMIT))


def _pad_random(pool: list[str], selected: list[str], k: int, seed: int) -> list[str]:
    remaining = sorted(set(pool) - set(selected))
    needed = min(k - len(selected), len(remaining))
    rng = Xoshiro256StarStar(derive_seed(seed, "anchors:padding"))
    return rng.sample(remaining, needed)


def _iterative_select(
    provider: Provider,
    pool: list[str],
    k: int,
    batch: int,
    context: str,
    seed: int,
    k_chains: int,
    model_id: str,
    temperature: float,
    strategy: str,
) -> AnchorSet:
    """Shared selection loop; k_chains = 1 is the single-chain semantic arm.

    Rounds continue until the budget is filled or two consecutive rounds add
    nothing; the remainder is then padded with seeded random picks, flagged
    in the round provenance.
    """
    pool_set = set(pool)
    selected: list[str] = []
    rounds: list[dict] = []
    zero_streak = 0
    any_response = False
    round_index = 0
    while len(selected) < k and zero_streak < 2:
        sample = _pool_sample(pool, selected, seed, round_index)
        if not sample:
            break
        prompt = render_design_select_prompt(context, selected, sample, batch=batch)
        raw_responses: list[str] = []
        votes: dict[str, int] = {}
        first_order: list[str] = []
        for chain_index in range(k_chains):
            request = ProviderRequest(prompt, temperature, chain_index, model_id)
            try:
                raw = provider.complete(request)
            except ProviderTransportError as exc:
                logger.warning("selection round %d chain %d transport failure: %s", round_index, chain_index, exc)
                raw_responses.append("")
                continue
            any_response = True
            raw_responses.append(raw)
            try:
                proposals = parse_gene_array_response(raw, pool_set)
            except UnparseableResponse:
                logger.warning("selection round %d chain %d unparseable", round_index, chain_index)
                continue
            for gene in proposals:
                if gene in selected:
                    continue
                if gene not in votes:
                    first_order.append(gene)
                votes[gene] = votes.get(gene, 0) + 1
        if k_chains == 1:
            candidates = first_order  # preserve the provider's ranking
        else:
            candidates = sorted(votes, key=lambda g: (-votes[g], g))
        additions = candidates[: min(batch, k - len(selected))]
        selected.extend(additions)
        zero_streak = 0 if additions else zero_streak + 1
        rounds.append(
            {
                "round": round_index,
                "prompt": prompt,
                "raw_responses": raw_responses,
                "votes": {g: votes[g] for g in sorted(votes)},
                "selected": list(additions),
                "padded": False,
            }
        )
        round_index += 1
    if len(selected) < k:
        if not any_response:
            raise ProviderUnavailable("every selection request failed at the transport level")
        padding = _pad_random(pool, selected, k, seed)
        if padding:
            logger.warning("padding anchor set with %d random picks", len(padding))
            selected.extend(padding)
            rounds.append(
                {
                    "round": round_index,
                    "prompt": "",
                    "raw_responses": [],
                    "votes": {},
                    "selected": list(padding),
                    "padded": True,
                }
            )
    return AnchorSet(anchors=tuple(selected), strategy=strategy, rounds=tuple(rounds))


def select_llm_iterative(
    provider: Provider,
    pool: list[str],
    k: int,
    batch: int = 10,
    context: str = "",
    seed: int = 0,
    model_id: str = "default",
    temperature: float = 0.7,
) -> AnchorSet:
    """Single-chain iterative master-regulator selection."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return _iterative_select(
        provider, pool, k, batch, context, seed, 1, model_id, temperature, STRATEGY_SEMANTIC_LLM
    )


def select_consensus(
    provider: Provider,
    pool: list[str],
    k: int,
    batch: int = 10,
    context: str = "",
    seed: int = 0,
    k_chains: int = 3,
    model_id: str = "default",
    temperature: float = 0.7,
) -> AnchorSet:
    """Multi-chain selection: per round, candidates are vote-counted across
    independent chains and the top-batch by votes (ties alphabetical) is kept."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return _iterative_select(
        provider, pool, k, batch, context, seed, k_chains, model_id, temperature, STRATEGY_CONSENSUS
    )


def map_targets(
    provider: Provider,
    regulators: list[str],
    batch_size: int = 10,
    model_id: str = "default",
    temperature: float = 0.7,
) -> dict[str, TargetMapEntry]:
    """Map regulators to downstream targets in batched calls.

    The result is provenance for auditing anchor choices; the surrogate
    evaluator never reads it. Unparseable batches are skipped with a warning.
    """
    result: dict[str, TargetMapEntry] = {}
    for start in range(0, len(regulators), batch_size):
        batch = regulators[start : start + batch_size]
        prompt = render_target_map_prompt(batch)
        try:
            raw = provider.complete(ProviderRequest(prompt, temperature, 0, model_id))
            payload = _parse_target_map(raw)
        except (ProviderTransportError, UnparseableResponse) as exc:
            logger.warning("target-map batch %r skipped: %s", batch, exc)
            continue
        for gene in batch:
            if gene in payload:
                result[gene] = payload[gene]
    return result


def _parse_target_map(raw: str) -> dict[str, TargetMapEntry]:
    from .chains import extract_json_payload

    payload = extract_json_payload(raw)
    if not isinstance(payload, dict):
        raise UnparseableResponse(raw, "target map is not a JSON object")
    entries: dict[str, TargetMapEntry] = {}
    for gene, value in payload.items():
        if not isinstance(value, dict):
            continue
        targets = tuple(
            t.strip().upper() for t in value.get("targets", []) if isinstance(t, str)
        )
        conf = value.get("confidence", 0.4)
        if not isinstance(conf, (int, float)) or isinstance(conf, bool):
            conf = 0.4
        conf = min(max(float(conf), 0.0), 1.0)
        logic_raw = str(value.get("logic", ""))
        logic = "Repression" if "repress" in logic_raw.lower() else "Activation"
        entries[str(gene).strip().upper()] = TargetMapEntry(
            targets=targets,
            confidence=conf,
            logic=logic,
            evidence_note=str(value.get("evidence_note", "")),
        )
    return entries


@dataclass(frozen=True)
class AnchorEvaluation:
    """Surrogate scores: heat-kernel interpolation from the anchors to every
    other measured gene in the graph."""

    strategy: str
    anchors: tuple[str, ...]
    per_target: dict[str, float | None]  # None = skipped
    skip_reasons: dict[str, str]
    summary: MeanSem
    beta: float

    @property
    def n_scored(self) -> int:
        return sum(1 for v in self.per_target.values() if v is not None)

    @property
    def n_skipped(self) -> int:
        return sum(1 for v in self.per_target.values() if v is None)


def evaluate_anchor_set(
    anchors: AnchorSet,
    dataset: PerturbationDataset,
    graph: PpiGraph,
    beta: float = 1.0,
    metric_top_k: int = 20,
) -> AnchorEvaluation:
    """Score an anchor set with the fixed heat-kernel interpolator.

    Targets are every measured non-anchor gene present in the graph. Targets
    disconnected from all anchors at this beta (zero kernel mass) or with a
    constant truth subset are recorded as skipped, never zero-scored.
    """
    for a in anchors.anchors:
        if a not in dataset.profiles:
            raise AnchorMissingProfile(a)
        if a not in graph:
            raise AnchorNotInGraph(a)
    anchor_set = set(anchors.anchors)
    targets = sorted(g for g in dataset.profiles if g in graph and g not in anchor_set)
    per_target: dict[str, float | None] = {}
    skip_reasons: dict[str, str] = {}
    scores: list[float] = []
    for target in targets:
        try:
            predicted = heat_kernel_interpolate(anchor_set, target, graph, beta, dataset)
            score = c20(
                predicted, dataset.profiles[target], top_k=metric_top_k, labels=dataset.readout_genes
            )
        except ZeroKernelMass:
            per_target[target] = None
            skip_reasons[target] = "zero_kernel_mass"
            continue
        except ConstantInput:
            per_target[target] = None
            skip_reasons[target] = "constant_truth_subset"
            continue
        per_target[target] = score
        scores.append(score)
    summary = mean_sem(scores) if scores else MeanSem(mean=float("nan"), sem=0.0, singleton=True)
    if skip_reasons:
        logger.info("anchor evaluation skipped %d of %d targets", len(skip_reasons), len(targets))
    return AnchorEvaluation(
        strategy=anchors.strategy,
        anchors=anchors.anchors,
        per_target=per_target,
        skip_reasons=skip_reasons,
        summary=summary,
        beta=beta,
    )
