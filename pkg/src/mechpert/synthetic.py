"""Planted regulatory network: deterministic stand-in for a live provider.

The planted model fixes a ground-truth regulator set per gene and generates
expression-effect profiles where each gene's profile is (approximately) the
mean of its regulators' profiles. A provider built on the model answers the
package's own prompts with noisy but honest hypotheses: true regulators
appear with high probability and high confidence, plus a few uniformly drawn
distractors. Consensus across chains therefore filters distractors by
construction, which gives the test suite a system whose expected strategy
ordering is known in advance.

Everything here is driven by :class:`~mechpert.rng.Xoshiro256StarStar`
streams derived from a single seed, so models, chains, and fixture files are
bit-identical across runs.

Run ``python -m mechpert.synthetic OUTDIR --seed 7`` to export fixture files
(dataset, interactome, embeddings) that line up with
``SyntheticProvider(seed=7)``.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass

import numpy as np

from .chains import RELATION_PARTNER, RELATION_TF, HypothesisChain, RegulatorHypothesis
from .data import PerturbationDataset, write_dataset
from .graph import PpiGraph, laplacian
from .providers import Provider, ProviderRequest
from .rng import Xoshiro256StarStar, derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PlantedModel:
    """Ground-truth network plus the dataset generated from it."""

    seed: int
    genes: tuple[str, ...]
    regulators: dict[str, tuple[str, ...]]  # gene -> true upstream regulators
    dataset: PerturbationDataset

    def out_degree(self, gene: str) -> int:
        return sum(1 for regs in self.regulators.values() if gene in regs)


def make_planted_model(
    n_genes: int = 100,
    seed: int = 0,
    n_roots: int | None = None,
    noise: float = 0.25,
    cell_line: str = "SYNTH",
) -> PlantedModel:
    """Build a planted model: a layered network over genes G001..Gnnn.

    Root genes get independent Gaussian profiles; every other gene draws 1-3
    regulators from earlier genes and gets the mean of their profiles plus
    Gaussian noise. Perturbation effects of related genes are therefore
    correlated exactly through the planted edges.
    """
    if n_genes < 10:
        raise ValueError("planted model needs at least 10 genes")
    genes = tuple(f"G{i:03d}" for i in range(1, n_genes + 1))
    n_roots = n_roots if n_roots is not None else max(3, n_genes // 10)
    rng = Xoshiro256StarStar(derive_seed(seed, "planted:grn"))
    regulators: dict[str, tuple[str, ...]] = {}
    for i, gene in enumerate(genes):
        if i < n_roots:
            regulators[gene] = ()
            continue
        count = 1 + rng.randbelow(3)
        count = min(count, i)
        regulators[gene] = tuple(sorted(rng.sample(list(genes[:i]), count)))
    prof_rng = Xoshiro256StarStar(derive_seed(seed, "planted:profiles"))
    d = n_genes
    profiles: dict[str, np.ndarray] = {}
    for gene in genes:  # generation order == regulator dependency order
        regs = regulators[gene]
        if not regs:
            profiles[gene] = np.array([prof_rng.normal(0.0, 1.0) for _ in range(d)])
        else:
            base = np.mean([profiles[r] for r in regs], axis=0)
            profiles[gene] = base + noise * np.array(
                [prof_rng.normal(0.0, 1.0) for _ in range(d)]
            )
    dataset = PerturbationDataset(
        readout_genes=genes,
        profiles=profiles,
        cell_line=cell_line,
        source=f"planted(seed={seed}, n={n_genes})",
    )
    return PlantedModel(seed=seed, genes=genes, regulators=regulators, dataset=dataset)


def planted_graph(model: PlantedModel, extra_edges: int | None = None) -> PpiGraph:
    """Interactome aligned with the planted network.

    Regulator-target pairs get high-confidence edges; a ring over the sorted
    gene list guarantees connectivity and a few random extras add off-pathway
    clutter. All weights survive the default STRING-style 0.7 threshold.
    """
    edges: list[tuple[str, str, float]] = []
    for gene, regs in model.regulators.items():
        for reg in regs:
            edges.append((reg, gene, 0.9))
    genes = sorted(model.genes)
    for i, gene in enumerate(genes):
        edges.append((gene, genes[(i + 1) % len(genes)], 0.72))
    n_extra = extra_edges if extra_edges is not None else len(genes) // 2
    rng = Xoshiro256StarStar(derive_seed(model.seed, "planted:graph-extra"))
    added = 0
    while added < n_extra:
        a = genes[rng.randbelow(len(genes))]
        b = genes[rng.randbelow(len(genes))]
        if a == b:
            continue
        edges.append((a, b, 0.75))
        added += 1
    return PpiGraph.from_edges(edges)


def spectral_embedding(graph: PpiGraph, dim: int) -> dict[str, np.ndarray]:
    """Deterministic Laplacian-eigenvector coordinates (test fallback only).

    Columns are the eigenvectors of the normalized Laplacian after the
    trivial one, sign-fixed so the first significant component is positive,
    zero-padded when the graph has fewer than dim+1 nodes.
    """
    lap = laplacian(graph).toarray()
    _, vectors = np.linalg.eigh(lap)
    take = min(dim, graph.n_nodes - 1)
    coords = vectors[:, 1 : 1 + take].copy()
    for col in range(coords.shape[1]):
        column = coords[:, col]
        significant = np.nonzero(np.abs(column) > 1e-9)[0]
        if significant.size and column[significant[0]] < 0:
            coords[:, col] = -column
    if take < dim:
        coords = np.hstack([coords, np.zeros((graph.n_nodes, dim - take))])
    return {gene: coords[i].copy() for i, gene in enumerate(graph.nodes)}


def poincare_embedding(graph: PpiGraph, dim: int, max_norm: float = 0.85) -> dict[str, np.ndarray]:
    """Spectral coordinates squashed into the unit ball (test fallback only)."""
    raw = spectral_embedding(graph, dim)
    top = max(float(np.linalg.norm(v)) for v in raw.values())
    scale = max_norm / top if top > 0 else 1.0
    return {g: v * scale for g, v in raw.items()}


def semantic_retrieval(model: PlantedModel, gene: str, pool: list[str], k: int = 5) -> list[str]:
    """Top-k pool genes by profile correlation with the query's true profile."""
    if gene not in model.dataset.profiles:
        return []
    truth = model.dataset.profiles[gene]
    truth_centered = truth - truth.mean()
    truth_norm = float(np.linalg.norm(truth_centered))
    scored = []
    for candidate in sorted(set(pool)):
        if candidate == gene or candidate not in model.dataset.profiles:
            continue
        other = model.dataset.profiles[candidate]
        centered = other - other.mean()
        denom = truth_norm * float(np.linalg.norm(centered))
        corr = float(np.dot(truth_centered, centered) / denom) if denom > 0 else 0.0
        scored.append((candidate, corr))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return [g for g, _ in scored[:k]]


def synthetic_generate(
    model: PlantedModel,
    gene: str,
    pool: list[str],
    chain_seed: int,
    p_true: float = 0.8,
    distractor_mean: float = 2.0,
    chain_index: int = 0,
) -> HypothesisChain:
    """One noisy agent chain, fully determined by chain_seed.

    True in-pool regulators are proposed independently with probability
    p_true at confidence ~ clamp(N(0.8, 0.1), 0, 1); Poisson(distractor_mean)
    uniform distractors are added at confidence ~ clamp(N(0.4, 0.15), 0, 1).
    The semantic set is the top-5 pool genes by profile correlation.
    """
    rng = Xoshiro256StarStar(chain_seed)
    pool_set = set(pool)
    true_regs = sorted(r for r in model.regulators.get(gene, ()) if r in pool_set)
    causal: list[RegulatorHypothesis] = []
    for reg in true_regs:
        if rng.random() < p_true:
            conf = min(max(rng.normal(0.8, 0.1), 0.0), 1.0)
            causal.append(RegulatorHypothesis(gene=reg, confidence=conf, relation=RELATION_TF))
    non_regs = sorted(pool_set - set(true_regs) - {gene})
    n_distract = min(rng.poisson(distractor_mean), len(non_regs))
    for reg in rng.sample(non_regs, n_distract):
        conf = min(max(rng.normal(0.4, 0.15), 0.0), 1.0)
        causal.append(RegulatorHypothesis(gene=reg, confidence=conf, relation=RELATION_PARTNER))
    semantic = semantic_retrieval(model, gene, pool)
    return HypothesisChain(
        chain_index=chain_index,
        semantic=tuple(semantic),
        causal=tuple(causal),
        reasoning="planted-model synthesis",
    )


# ---------------------------------------------------------------------------
# provider
# ---------------------------------------------------------------------------

_SEMANTIC_RE = re.compile(r"functional neighbors for the target gene (\S+)\.")
_CAUSAL_RE = re.compile(r"Map the regulatory hierarchy of (\S+) in")
_POOL_RE = re.compile(r"^(?:Available Candidates|Candidate Pool): (.*)$", re.MULTILINE)
_DESIGN_BATCH_RE = re.compile(r"Select the next (\d+) most informative")
_DESIGN_POOL_RE = re.compile(r"available pool: (.*)$", re.MULTILINE)
_DESIGN_EXCLUDE_RE = re.compile(r"already perturbed set: (.*)\.$", re.MULTILINE)
_TARGET_MAP_RE = re.compile(r"Map the primary downstream targets for the candidates: (.*)\.")


def _split_gene_list(text: str) -> list[str]:
    return [tok.strip() for tok in text.split(",") if tok.strip() and not tok.startswith("(")]


class SyntheticProvider(Provider):
    """Answers the package's own prompts from the planted ground truth.

    Responses are valid JSON in the formats the parsers expect. A (gene,
    chain_index) pair always maps to the same chain, so both calls of a chain
    are mutually consistent and reruns are bit-identical.
    """

    def __init__(
        self,
        model: PlantedModel,
        seed: int | None = None,
        p_true: float = 0.8,
        distractor_mean: float = 2.0,
    ) -> None:
        self.model = model
        self.seed = model.seed if seed is None else seed
        self.p_true = p_true
        self.distractor_mean = distractor_mean

    def _chain_for(self, gene: str, pool: list[str], chain_index: int) -> HypothesisChain:
        chain_seed = derive_seed(self.seed, f"chain:{gene}:{chain_index}")
        return synthetic_generate(
            self.model,
            gene,
            pool,
            chain_seed,
            p_true=self.p_true,
            distractor_mean=self.distractor_mean,
            chain_index=chain_index,
        )

    def complete(self, request: ProviderRequest) -> str:
        prompt = request.prompt
        semantic_match = _SEMANTIC_RE.search(prompt)
        if semantic_match:
            gene = semantic_match.group(1)
            pool = _split_gene_list(_POOL_RE.search(prompt).group(1))
            chain = self._chain_for(gene, pool, request.chain_index)
            return json.dumps(
                {"reasoning": {"summary": "profile-correlation neighbors"}, "kNN": list(chain.semantic)}
            )
        causal_match = _CAUSAL_RE.search(prompt)
        if causal_match:
            gene = causal_match.group(1)
            pool = _split_gene_list(_POOL_RE.search(prompt).group(1))
            chain = self._chain_for(gene, pool, request.chain_index)
            regulators = [
                {"gene": h.gene, "confidence": h.confidence * 100.0, "type": h.relation}
                for h in chain.causal
            ]
            return json.dumps(
                {
                    "regulators": regulators,
                    "reasoning": chain.reasoning,
                    "mechanism": "planted upstream regulators drive the profile.",
                }
            )
        design_match = _DESIGN_BATCH_RE.search(prompt)
        if design_match:
            batch = int(design_match.group(1))
            pool = _split_gene_list(_DESIGN_POOL_RE.search(prompt).group(1))
            exclude_match = _DESIGN_EXCLUDE_RE.search(prompt)
            exclude = set(_split_gene_list(exclude_match.group(1))) if exclude_match else set()
            eligible = [g for g in pool if g not in exclude]
            eligible.sort(key=lambda g: (-self.model.out_degree(g), g))
            return json.dumps(eligible[:batch])
        target_match = _TARGET_MAP_RE.search(prompt)
        if target_match:
            batch = _split_gene_list(target_match.group(1))
            payload = {}
            for gene in batch:
                children = sorted(
                    child for child, regs in self.model.regulators.items() if gene in regs
                )
                degree = len(children)
                confidence = 1.0 if degree >= 5 else 0.7 if degree >= 2 else 0.4
                logic = "Repression" if sum(ord(c) for c in gene) % 2 else "Activation"
                payload[gene] = {
                    "targets": children,
                    "confidence": confidence,
                    "logic": logic,
                    "evidence_note": f"planted network lists {degree} downstream targets.",
                }
            return json.dumps(payload)
        raise ValueError(f"synthetic provider cannot interpret prompt: {prompt[:80]!r}")


# ---------------------------------------------------------------------------
# fixture export
# ---------------------------------------------------------------------------


def write_embeddings(embeddings: dict[str, np.ndarray], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for gene in sorted(embeddings):
            coords = "\t".join("%.17g" % v for v in embeddings[gene])
            handle.write(f"{gene}\t{coords}\n")


def write_ppi(graph: PpiGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        matrix = graph.weights.tocoo()
        rows = sorted(
            (graph.nodes[i], graph.nodes[j], int(round(w * 1000)))
            for i, j, w in zip(matrix.row, matrix.col, matrix.data)
            if i < j
        )
        for a, b, score in rows:
            handle.write(f"{a}\t{b}\t{score}\n")


def write_fixture_files(
    outdir: str,
    seed: int = 0,
    n_genes: int = 100,
    euclidean_dim: int = 50,
    poincare_dim: int = 100,
) -> dict[str, str]:
    """Export dataset/interactome/embedding files matching SyntheticProvider(seed)."""
    import os

    os.makedirs(outdir, exist_ok=True)
    model = make_planted_model(n_genes=n_genes, seed=seed)
    graph = planted_graph(model)
    paths = {
        "dataset": os.path.join(outdir, "dataset.tsv"),
        "ppi": os.path.join(outdir, "ppi.tsv"),
        "euclidean": os.path.join(outdir, "euclidean.tsv"),
        "poincare": os.path.join(outdir, "poincare.tsv"),
    }
    write_dataset(model.dataset, paths["dataset"])
    write_ppi(graph, paths["ppi"])
    write_embeddings(spectral_embedding(graph, euclidean_dim), paths["euclidean"])
    write_embeddings(poincare_embedding(graph, poincare_dim), paths["poincare"])
    return paths


def main(argv: list[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(description="Export planted-model fixture files.")
    parser.add_argument("outdir")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--genes", type=int, default=100)
    args = parser.parse_args(argv)
    paths = write_fixture_files(args.outdir, seed=args.seed, n_genes=args.genes)
    for name, path in sorted(paths.items()):
        print(f"{name}\t{path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
