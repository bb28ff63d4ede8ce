"""Prompt templates for hypothesis generation and anchor selection.

Two prediction prompts (functional-similarity retrieval and regulatory-
hierarchy mapping) and two design prompts (iterative master-regulator
selection and downstream-target mapping). Each render call returns a single
text combining the system and user parts; responses are expected as JSON per
the output-format block each template ends with.
"""

from __future__ import annotations

from .errors import EmptyPool

SEMANTIC_SYSTEM = (
    "You are a Lead Computational Biologist. Your task is to perform an analogous "
    "function mapping for gene perturbations. You must ground your similarity "
    "assessments in high-confidence mechanistic evidence, prioritizing genes that "
    "occupy identical transcriptomic manifolds or pathway positions. Respond "
    "strictly in valid JSON."
)

SEMANTIC_USER = """Instruction: Identify {k_range} functional neighbors for the target gene {gene}.

Available Candidates: {list_of_genes}

Chain-of-Thought Protocol:
1. Profile Analysis: Define the metabolic/signaling role of {gene} in the {context}.
2. Pathway Alignment: For each top-ranked candidate, identify the specific shared interaction (e.g., membership in the same protein complex or signaling cascade).
3. Adjudication: Rank neighbors based on the depth of the mechanistic link.

Output Format (JSON): {{"reasoning": {{...}}, "kNN": ["G1", "G2", ...]}}"""

CAUSAL_SYSTEM = (
    "You are a Molecular Systems Geneticist. Your objective is not general "
    "similarity, but the identification of the Mechanical Drivers of a gene's "
    "perturbation profile. Priority: Transcription Factors (TFs), downstream "
    "targets, or obligate complex partners."
)

CAUSAL_USER = """Task: Map the regulatory hierarchy of {gene} in {context}.

Candidate Pool: {list_of_genes}

Hierarchical Search Logic:
1. Upstream: Identify TFs from the pool that directly regulate {gene}.
2. Downstream: Identify primary targets of {gene} (if it is a TF/signaling node).
3. Complexation: Identify proteins that form stable, non-redundant complexes with the target.

Output Format (JSON):
{{
  "regulators": [
    {{"gene": "SYMB", "confidence": 0-100, "type": "TF/Target/Partner"}}
  ],
  "reasoning": "...",
  "mechanism": "Brief description of the circuit."
}}"""

DESIGN_SELECT = """Context: Active discovery of the {cell_line} regulatory network.
Objective: Select the next {batch} most informative "Master Regulators" to perturb.
Iterative Constraints:
1. Novelty: Prioritize genes not in the already perturbed set: {perturbed_list}.
2. Regulatory Reach: Select nodes predicted to have maximum transcriptomic impact (>50k targets).
3. Exclusivity: You MUST select ONLY from the available pool: {gene_list_sample}

Return strictly a valid JSON array of {batch} gene symbols: ["REG1", "REG2", ..., "REG{batch}"]"""

DESIGN_TARGET_MAP = """Map the primary downstream targets for the candidates: {batch_list}.
Requirement: For each regulator, provide a confidence interval grounded in literature (ChIP-seq, Perturb-seq, RNA-seq).
Confidence Calibration:
1.0 (Direct cell-type specific evidence); 0.7 (Lineage-wide evidence); 0.4 (Computational/Motif prediction only).
Output Format (JSON):
{{
  "REGULATOR_X": {{
    "targets": ["T1", "T2"],
    "confidence": 0.9,
    "logic": "Repression/Activation",
    "evidence_note": "A summary of the supporting literature."
  }}
}}"""


def _format_pool(pool: list[str]) -> str:
    return ", ".join(pool)


def render_semantic_prompt(gene: str, pool: list[str], context: str, k_range: str = "5") -> str:
    """Functional-similarity retrieval prompt for one query gene."""
    if not pool:
        raise EmptyPool("semantic prompt needs a non-empty candidate pool")
    user = SEMANTIC_USER.format(
        k_range=k_range, gene=gene, list_of_genes=_format_pool(pool), context=context
    )
    return SEMANTIC_SYSTEM + "\n\n" + user


def render_causal_prompt(gene: str, pool: list[str], context: str) -> str:
    """Directed-regulator mapping prompt for one query gene."""
    if not pool:
        raise EmptyPool("causal prompt needs a non-empty candidate pool")
    user = CAUSAL_USER.format(gene=gene, list_of_genes=_format_pool(pool), context=context)
    return CAUSAL_SYSTEM + "\n\n" + user


def render_design_select_prompt(
    cell_line: str, perturbed: list[str], pool_sample: list[str], batch: int = 10
) -> str:
    """One round of iterative anchor selection."""
    if not pool_sample:
        raise EmptyPool("design prompt needs a non-empty candidate pool")
    return DESIGN_SELECT.format(
        cell_line=cell_line,
        batch=batch,
        perturbed_list=_format_pool(perturbed) if perturbed else "(none yet)",
        gene_list_sample=_format_pool(pool_sample),
    )


def render_target_map_prompt(batch: list[str]) -> str:
    """Downstream-target mapping prompt for a batch of regulators."""
    if not batch:
        raise EmptyPool("target-map prompt needs a non-empty regulator batch")
    return DESIGN_TARGET_MAP.format(batch_list=_format_pool(batch))
