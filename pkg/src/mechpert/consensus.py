"""Consensus aggregation of hypothesis chains.

Each regulator's weight is the sum over chains of indicator-times-confidence;
binary mode fixes every confidence at 1, so weights become vote counts. Genes
never proposed are absent from the weight map, and so are genes whose total
confidence is zero (they could contribute nothing downstream).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .chains import HypothesisChain
from .errors import NoChains

MODE_BINARY = "binary"
MODE_CONFIDENCE = "confidence"


@dataclass(frozen=True)
class ConsensusResult:
    weights: dict[str, float]
    mode: str
    k_chains: int


def _aggregate(chains: list[HypothesisChain], binary: bool) -> dict[str, float]:
    contributions: dict[str, list[float]] = {}
    for chain in chains:
        for hypothesis in chain.causal:
            add = 1.0 if binary else hypothesis.confidence
            contributions.setdefault(hypothesis.gene, []).append(add)
    # fsum is correctly rounded, so weights are bit-identical under any
    # permutation of the chain list
    weights = {g: math.fsum(values) for g, values in sorted(contributions.items())}
    return {g: w for g, w in weights.items() if w > 0.0}


def aggregate_confidence(chains: list[HypothesisChain]) -> ConsensusResult:
    """w_r = sum over chains of 1[r proposed] * reported confidence."""
    if not chains:
        raise NoChains("consensus over zero chains")
    return ConsensusResult(
        weights=_aggregate(chains, binary=False),
        mode=MODE_CONFIDENCE,
        k_chains=len(chains),
    )


def aggregate_binary(chains: list[HypothesisChain]) -> ConsensusResult:
    """Vote counting: w_r = number of chains proposing r."""
    if not chains:
        raise NoChains("consensus over zero chains")
    return ConsensusResult(
        weights=_aggregate(chains, binary=True),
        mode=MODE_BINARY,
        k_chains=len(chains),
    )


def select_top_k(result: ConsensusResult, k: int) -> list[str]:
    """Top-k genes by weight, descending; ties by ascending symbol."""
    if k < 1:
        raise ValueError("k must be positive")
    ranked = sorted(result.weights, key=lambda g: (-result.weights[g], g))
    return ranked[:k]
