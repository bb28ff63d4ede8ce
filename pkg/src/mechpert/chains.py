"""Hypothesis chains: issue prompt pairs, parse structured responses.

A chain is one agent's pass over a query gene: a semantic retrieval call plus
a causal regulator call, both parsed from JSON. Parsing is defensive --
provider output is untrusted -- but the accepted envelope is narrow: a bare
JSON payload or the first fenced code block, nothing else.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field

from .errors import ProviderTransportError, ProviderUnavailable, UnparseableResponse
from .prompts import render_causal_prompt, render_semantic_prompt
from .providers import Provider, ProviderRequest

logger = logging.getLogger(__name__)

RELATION_TF = "TF"
RELATION_TARGET = "Target"
RELATION_PARTNER = "Partner"
RELATIONS = (RELATION_TF, RELATION_TARGET, RELATION_PARTNER)

_FENCE_RE = re.compile(r"```(?:json)?\s*\n?(.*?)```", re.DOTALL)


@dataclass(frozen=True)
class RegulatorHypothesis:
    """One proposed directed regulator with the agent's confidence in [0, 1]."""

    gene: str
    confidence: float
    relation: str = RELATION_PARTNER


@dataclass(frozen=True)
class HypothesisChain:
    """One agent chain: semantic gene list plus causal regulator hypotheses."""

    chain_index: int
    semantic: tuple[str, ...] = ()
    causal: tuple[RegulatorHypothesis, ...] = ()
    reasoning: str = ""
    raw_semantic: str = ""
    raw_causal: str = ""

    @property
    def causal_genes(self) -> tuple[str, ...]:
        return tuple(h.gene for h in self.causal)

    def is_empty(self) -> bool:
        return not self.semantic and not self.causal


def extract_json_payload(raw: str):
    """Parse a bare JSON value or the first fenced code block; else give up."""
    text = raw.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    match = _FENCE_RE.search(raw)
    if match:
        try:
            return json.loads(match.group(1).strip())
        except json.JSONDecodeError:
            pass
    raise UnparseableResponse(raw)


def _clean_symbols(items, pool: set[str]) -> list[str]:
    """Uppercase, pool-filter, and dedupe gene names, keeping first occurrence."""
    seen: list[str] = []
    for item in items:
        if not isinstance(item, str):
            logger.warning("dropping non-string gene entry: %r", item)
            continue
        symbol = item.strip().upper()
        if symbol not in pool:
            logger.warning("dropping out-of-pool gene: %s", symbol)
            continue
        if symbol not in seen:
            seen.append(symbol)
    return seen


def parse_semantic_response(raw: str, pool: set[str]) -> list[str]:
    """Extract the "kNN" gene array; out-of-pool genes and duplicates are dropped."""
    payload = extract_json_payload(raw)
    if not isinstance(payload, dict) or not isinstance(payload.get("kNN"), list):
        raise UnparseableResponse(raw, "no JSON object with a 'kNN' array")
    return _clean_symbols(payload["kNN"], pool)


def parse_causal_response(raw: str, pool: set[str]) -> list[RegulatorHypothesis]:
    """Extract "regulators" entries; confidence is clamp(value, 0, 100)/100.

    Unknown relation strings fall back to Partner with a warning; out-of-pool
    genes are dropped; duplicate genes keep the first occurrence.
    """
    payload = extract_json_payload(raw)
    if not isinstance(payload, dict) or not isinstance(payload.get("regulators"), list):
        raise UnparseableResponse(raw, "no JSON object with a 'regulators' array")
    hypotheses: list[RegulatorHypothesis] = []
    seen: set[str] = set()
    for entry in payload["regulators"]:
        if not isinstance(entry, dict) or not isinstance(entry.get("gene"), str):
            logger.warning("dropping malformed regulator entry: %r", entry)
            continue
        symbol = entry["gene"].strip().upper()
        if symbol not in pool:
            logger.warning("dropping out-of-pool regulator: %s", symbol)
            continue
        if symbol in seen:
            continue
        seen.add(symbol)
        raw_conf = entry.get("confidence", 50)
        if not isinstance(raw_conf, (int, float)) or isinstance(raw_conf, bool):
            logger.warning("regulator %s has non-numeric confidence %r; using 50", symbol, raw_conf)
            raw_conf = 50
        confidence = min(max(float(raw_conf), 0.0), 100.0) / 100.0
        relation = entry.get("type", RELATION_PARTNER)
        if relation not in RELATIONS:
            logger.warning("unknown relation %r for %s; mapped to Partner", relation, symbol)
            relation = RELATION_PARTNER
        hypotheses.append(RegulatorHypothesis(gene=symbol, confidence=confidence, relation=relation))
    return hypotheses


def parse_gene_array_response(raw: str, pool: set[str]) -> list[str]:
    """Extract a bare JSON array of gene symbols (anchor-selection rounds)."""
    payload = extract_json_payload(raw)
    if not isinstance(payload, list):
        raise UnparseableResponse(raw, "no JSON array of gene symbols")
    return _clean_symbols(payload, pool)


def _request_with_retry(provider: Provider, request: ProviderRequest, parse):
    """One request, retried once on unparseable output. Returns (value, raw, error)."""
    raw = provider.complete(request)
    try:
        return parse(raw), raw, None
    except UnparseableResponse as first:
        logger.warning("retrying chain %d after unparseable response", request.chain_index)
        raw = provider.complete(request)
        try:
            return parse(raw), raw, None
        except UnparseableResponse as exc:
            return None, raw, exc


def run_chains(
    provider: Provider,
    gene: str,
    pool: list[str],
    context: str,
    k_chains: int = 3,
    temperature: float = 0.7,
    model_id: str = "default",
    k_range: str = "5",
) -> list[HypothesisChain]:
    """Run k independent semantic+causal chains for one query gene.

    A chain whose responses stay unparseable after one retry is recorded as
    empty (it casts no votes); if every chain fails at the transport level the
    whole call raises ProviderUnavailable.
    """
    if k_chains < 1:
        raise ValueError("k_chains must be >= 1")
    pool_set = set(pool)
    semantic_prompt = render_semantic_prompt(gene, pool, context, k_range=k_range)
    causal_prompt = render_causal_prompt(gene, pool, context)
    chains: list[HypothesisChain] = []
    transport_failures = 0
    for chain_index in range(k_chains):
        try:
            semantic, raw_semantic, sem_err = _request_with_retry(
                provider,
                ProviderRequest(semantic_prompt, temperature, chain_index, model_id),
                lambda raw: parse_semantic_response(raw, pool_set),
            )
            causal, raw_causal, caus_err = _request_with_retry(
                provider,
                ProviderRequest(causal_prompt, temperature, chain_index, model_id),
                lambda raw: parse_causal_response(raw, pool_set),
            )
        except ProviderTransportError as exc:
            logger.warning("chain %d failed at transport level: %s", chain_index, exc)
            transport_failures += 1
            chains.append(HypothesisChain(chain_index=chain_index))
            continue
        if sem_err is not None:
            logger.warning("chain %d semantic response unparseable; chain degraded", chain_index)
            semantic = []
        if caus_err is not None:
            logger.warning("chain %d causal response unparseable; chain degraded", chain_index)
            causal = []
        reasoning = ""
        try:
            payload = extract_json_payload(raw_causal)
            if isinstance(payload, dict) and isinstance(payload.get("reasoning"), str):
                reasoning = payload["reasoning"]
        except UnparseableResponse:
            pass
        chains.append(
            HypothesisChain(
                chain_index=chain_index,
                semantic=tuple(semantic),
                causal=tuple(causal),
                reasoning=reasoning,
                raw_semantic=raw_semantic,
                raw_causal=raw_causal,
            )
        )
    if transport_failures == k_chains:
        raise ProviderUnavailable(f"all {k_chains} chains failed at the transport level")
    return chains
