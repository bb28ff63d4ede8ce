"""Benchmark drivers: the scaling protocol and the consensus ablation.

A run is a grid over (training size, seed, strategy). Each (size, seed) pair
fixes one train/test split and a deterministic sample of test targets; every
strategy then predicts the same targets from the same hypothesis chains, so
strategy columns are directly comparable. Reports serialize to canonical JSON
(sorted keys, no timestamps) and to a markdown table with one row per
training size, per-strategy "mean +/- SEM" columns, and a relative-improvement
column comparing the last strategy listed against the first.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .chains import run_chains
from .data import PerturbationDataset, subsample_training
from .errors import (
    ConfigError,
    ConstantInput,
    EmptyNeighborhood,
    InsufficientEmbeddedCandidates,
    MissingProfile,
    NoChains,
    NoValidNeighbors,
    SeedCountNot3,
    ZeroKernelMass,
    ZeroTotalWeight,
)
from .graph import PpiGraph
from .metrics import c20, mean_sem
from .predict import STRATEGIES, StrategySettings, predict_for_target
from .providers import Provider
from .rng import Xoshiro256StarStar, derive_seed

logger = logging.getLogger(__name__)

_PER_TARGET_ERRORS = (
    ConstantInput,
    EmptyNeighborhood,
    InsufficientEmbeddedCandidates,
    MissingProfile,
    NoChains,
    NoValidNeighbors,
    SeedCountNot3,
    ZeroKernelMass,
    ZeroTotalWeight,
)

STRATEGY_LABELS = {
    "semantic": "LangPert (Sem)",
    "binary": "Binary Consensus",
    "confidence": "MechPert (Conf)",
    "three_plus_two": "3+2 Strategy",
    "harmonizer": "Harmonizer",
    "spectral": "Spectral",
}

ABLATION_VARIANTS = [
    ("semantic", "LangPert (Baseline)", "None (Single Retrieval)"),
    ("binary", "Binary Consensus", "Unweighted Voting (w=1)"),
    ("confidence", "MechPert (Full)", "Confidence Weighted (w=c)"),
]


@dataclass(frozen=True)
class BenchmarkCell:
    strategy: str
    n: int
    seed: int
    mean: float | None
    sem: float | None
    n_scored: int
    n_skipped: int
    per_target: dict[str, float | None]


@dataclass(frozen=True)
class BenchmarkReport:
    config: dict
    cells: tuple[BenchmarkCell, ...]
    pooled: dict[str, dict[str, dict]]  # str(n) -> strategy -> {mean, sem, n_scored}
    relative_improvement: dict[str, dict[str, float | None]]
    strategies: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "cells": [
                {
                    "strategy": cell.strategy,
                    "n": cell.n,
                    "seed": cell.seed,
                    "mean": cell.mean,
                    "sem": cell.sem,
                    "n_scored": cell.n_scored,
                    "n_skipped": cell.n_skipped,
                    "per_target": cell.per_target,
                }
                for cell in self.cells
            ],
            "pooled": self.pooled,
            "relative_improvement": self.relative_improvement,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def sample_targets(test: frozenset[str], n: int, seed: int, max_targets: int) -> list[str]:
    """Deterministic target sample (label ``targets:{n}``), returned sorted."""
    ordered = sorted(test)
    if max_targets >= len(ordered):
        return ordered
    rng = Xoshiro256StarStar(derive_seed(seed, f"targets:{n}"))
    return sorted(rng.sample(ordered, max_targets))


def _evaluate_split(
    dataset: PerturbationDataset,
    strategies: list[str],
    n: int,
    seed: int,
    provider: Provider,
    settings: StrategySettings,
    graph: PpiGraph | None,
    euclidean: dict[str, np.ndarray] | None,
    poincare: dict[str, np.ndarray] | None,
    max_targets: int,
) -> list[BenchmarkCell]:
    split = subsample_training(dataset, n, seed)
    targets = sample_targets(split.test, n, seed, max_targets)
    pool = sorted(split.train)
    per_strategy: dict[str, dict[str, float | None]] = {s: {} for s in strategies}
    for target in targets:
        chains = run_chains(
            provider,
            target,
            pool,
            settings.context,
            k_chains=settings.k_chains,
            temperature=settings.temperature,
            model_id=settings.model_id,
            k_range=settings.k_range,
        )
        truth = dataset.profiles[target]
        for strategy in strategies:
            try:
                predicted = predict_for_target(
                    strategy, chains, target, split.train, dataset, settings,
                    graph=graph, euclidean=euclidean, poincare=poincare,
                )
                score = c20(predicted, truth, labels=dataset.readout_genes)
            except _PER_TARGET_ERRORS as exc:
                logger.info("%s skipped target %s: %s", strategy, target, exc)
                per_strategy[strategy][target] = None
                continue
            per_strategy[strategy][target] = score
    cells = []
    for strategy in strategies:
        per_target = per_strategy[strategy]
        scores = [v for v in per_target.values() if v is not None]
        if scores:
            summary = mean_sem(scores)
            mean_value: float | None = summary.mean
            sem_value: float | None = summary.sem
        else:
            mean_value = None
            sem_value = None
        cells.append(
            BenchmarkCell(
                strategy=strategy,
                n=n,
                seed=seed,
                mean=mean_value,
                sem=sem_value,
                n_scored=len(scores),
                n_skipped=len(per_target) - len(scores),
                per_target=per_target,
            )
        )
    return cells


def scaling_benchmark(
    dataset: PerturbationDataset,
    strategies: list[str],
    sizes: list[int],
    seeds: list[int],
    provider: Provider,
    settings: StrategySettings,
    graph: PpiGraph | None = None,
    euclidean: dict[str, np.ndarray] | None = None,
    poincare: dict[str, np.ndarray] | None = None,
    max_targets: int = 100,
    config_snapshot: dict | None = None,
) -> BenchmarkReport:
    """Run the full (size, seed, strategy) grid and assemble the report.

    Relative improvement compares each strategy against the first one listed,
    on per-target scores pooled across seeds: rel = (m - m0) / |m0|.
    """
    for strategy in strategies:
        if strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy: {strategy!r}")
    if not strategies:
        raise ConfigError("no strategies requested")
    if max(sizes) >= len(dataset.perturbations):
        raise ConfigError(
            f"largest size {max(sizes)} must be below the perturbation count {len(dataset.perturbations)}"
        )
    cells: list[BenchmarkCell] = []
    for n in sizes:
        for seed in seeds:
            cells.extend(
                _evaluate_split(
                    dataset, strategies, n, seed, provider, settings,
                    graph, euclidean, poincare, max_targets,
                )
            )
    pooled: dict[str, dict[str, dict]] = {}
    for n in sizes:
        pooled[str(n)] = {}
        for strategy in strategies:
            scores: list[float] = []
            for cell in cells:
                if cell.n == n and cell.strategy == strategy:
                    scores.extend(v for v in cell.per_target.values() if v is not None)
            if scores:
                summary = mean_sem(scores)
                pooled[str(n)][strategy] = {
                    "mean": summary.mean,
                    "sem": summary.sem,
                    "n_scored": len(scores),
                }
            else:
                pooled[str(n)][strategy] = {"mean": None, "sem": None, "n_scored": 0}
    baseline = strategies[0]
    relative: dict[str, dict[str, float | None]] = {}
    for n in sizes:
        relative[str(n)] = {}
        base_mean = pooled[str(n)][baseline]["mean"]
        for strategy in strategies[1:]:
            mean_value = pooled[str(n)][strategy]["mean"]
            if base_mean is None or mean_value is None or base_mean == 0:
                relative[str(n)][strategy] = None
            else:
                relative[str(n)][strategy] = (mean_value - base_mean) / abs(base_mean)
    return BenchmarkReport(
        config=config_snapshot or {},
        cells=tuple(cells),
        pooled=pooled,
        relative_improvement=relative,
        strategies=tuple(strategies),
    )


def report_markdown(report: BenchmarkReport) -> str:
    """Markdown table: per-N rows, per-strategy mean +/- SEM columns, and the
    relative improvement of the last strategy over the first."""
    strategies = list(report.strategies)
    header = ["Training Size (N)"] + [STRATEGY_LABELS.get(s, s) for s in strategies]
    if len(strategies) > 1:
        header.append("Rel. Improv.")
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for n_key in sorted(report.pooled, key=int):
        row = [f"N={n_key}"]
        means = {s: report.pooled[n_key][s]["mean"] for s in strategies}
        valid = [m for m in means.values() if m is not None]
        best = max(valid) if valid else None
        for strategy in strategies:
            mean_value = means[strategy]
            sem_value = report.pooled[n_key][strategy]["sem"]
            if mean_value is None:
                row.append("n/a")
                continue
            text = f"{mean_value:.3f} ± {sem_value:.3f}"
            row.append(f"**{text}**" if mean_value == best else text)
        if len(strategies) > 1:
            rel = report.relative_improvement[n_key].get(strategies[-1])
            row.append(f"{rel:+.1%}" if rel is not None else "n/a")
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def ablation_run(
    dataset: PerturbationDataset,
    provider: Provider,
    n: int = 50,
    seed: int = 0,
    settings: StrategySettings = StrategySettings(),
    max_targets: int = 100,
    config_snapshot: dict | None = None,
) -> BenchmarkReport:
    """Three-row consensus ablation at one training size.

    Rows: single retrieval (the semantic strategy reads only chain 0, so it
    is exactly the K=1 path), unweighted voting, confidence weighting.
    """
    return scaling_benchmark(
        dataset,
        [variant[0] for variant in ABLATION_VARIANTS],
        sizes=[n],
        seeds=[seed],
        provider=provider,
        settings=settings,
        max_targets=max_targets,
        config_snapshot=config_snapshot,
    )


def ablation_markdown(report: BenchmarkReport) -> str:
    """Markdown table for the ablation: variant, aggregation logic, mean, % gain."""
    n_key = sorted(report.pooled, key=int)[0]
    lines = [
        "| Model Variant | Aggregation Logic | Mean C20 | % Gain |",
        "|---|---|---|---|",
    ]
    base = report.pooled[n_key][ABLATION_VARIANTS[0][0]]["mean"]
    for strategy, variant, logic in ABLATION_VARIANTS:
        mean_value = report.pooled[n_key][strategy]["mean"]
        if mean_value is None:
            lines.append(f"| {variant} | {logic} | n/a | n/a |")
            continue
        if strategy == ABLATION_VARIANTS[0][0] or base is None or base == 0:
            gain = "--"
        else:
            gain = f"{(mean_value - base) / abs(base):+.1%}"
        lines.append(f"| {variant} | {logic} | {mean_value:.3f} | {gain} |")
    return "\n".join(lines) + "\n"
