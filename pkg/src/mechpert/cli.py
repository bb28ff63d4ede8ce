"""Command-line entry point.

Subcommands: ``predict``, ``benchmark``, ``anchors select|evaluate``,
``ablate``. Every RunConfig field can come from a JSON config file
(``--config``) or be overridden by the same-named flag. Each command writes a
``config_snapshot.json`` next to its outputs; re-running from the snapshot
with the cache or synthetic provider reproduces every output byte-for-byte.

Exit codes: 0 success, 2 configuration error, 3 total prediction failure,
4 provider transport failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile

from . import benchmark as bench
from . import design
from .chains import HypothesisChain, run_chains
from .config import RunConfig, build_provider, load_config, model_id
from .consensus import aggregate_binary, aggregate_confidence
from .data import load_dataset, load_embeddings, load_ppi
from .errors import ConfigError, MechPertError, ProviderUnavailable
from .metrics import c20
from .predict import (
    STRATEGIES,
    STRATEGY_HARMONIZER,
    STRATEGY_SPECTRAL,
    STRATEGY_THREE_PLUS_TWO,
    StrategySettings,
    predict_for_target,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_PREDICTIONS = 3
EXIT_PROVIDER = 4


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _settings(config: RunConfig) -> StrategySettings:
    return StrategySettings(
        k_chains=config.k_chains,
        temperature=config.temperature,
        alpha=config.alpha,
        beta=config.beta,
        top_reachable=config.top_reachable,
        pct_harmonizer=config.pct_harmonizer,
        pct_spectral=config.pct_spectral,
        k_range=config.k_range,
        min_votes=config.min_votes,
        context=config.cell_line,
        model_id=model_id(config),
    )


def _load_resources(config: RunConfig, strategies: list[str]):
    """Load the dataset plus whatever the requested strategies need."""
    if not config.dataset_path:
        raise ConfigError("dataset_path is required")
    dataset = load_dataset(config.dataset_path, cell_line=config.cell_line)
    graph = None
    euclidean = None
    poincare = None
    needs_graph = any(s in (STRATEGY_HARMONIZER, STRATEGY_SPECTRAL) for s in strategies)
    if needs_graph or config.ppi_path:
        if not config.ppi_path:
            raise ConfigError("harmonizer/spectral strategies need ppi_path")
        graph = load_ppi(config.ppi_path, config.min_score)
    if STRATEGY_THREE_PLUS_TWO in strategies:
        if not config.euclidean_path:
            raise ConfigError("three_plus_two strategy needs euclidean_path")
    if config.euclidean_path:
        euclidean = load_embeddings(config.euclidean_path, "euclidean", _embedding_dim(config.euclidean_path))
    if needs_graph:
        if not config.poincare_path:
            raise ConfigError("harmonizer/spectral strategies need poincare_path")
    if config.poincare_path:
        poincare = load_embeddings(config.poincare_path, "poincare", _embedding_dim(config.poincare_path))
    return dataset, graph, euclidean, poincare


def _embedding_dim(path: str) -> int:
    with open(path, encoding="utf-8") as handle:
        first = handle.readline().rstrip("\n")
    return max(len(first.split("\t")) - 1, 1)


def _chain_dict(chain: HypothesisChain) -> dict:
    return {
        "chain_index": chain.chain_index,
        "semantic": list(chain.semantic),
        "causal": [
            {"gene": h.gene, "confidence": h.confidence, "relation": h.relation}
            for h in chain.causal
        ],
        "reasoning": chain.reasoning,
        "raw_semantic": chain.raw_semantic,
        "raw_causal": chain.raw_causal,
    }


def _snapshot(config: RunConfig, outdir: str) -> None:
    _write_atomic(os.path.join(outdir, "config_snapshot.json"), config.to_json())


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_predict(config: RunConfig, args: argparse.Namespace) -> int:
    targets = [t.strip().upper() for t in args.targets.split(",") if t.strip()]
    if not targets:
        raise ConfigError("predict needs at least one target gene (--targets)")
    dataset, graph, euclidean, poincare = _load_resources(config, [config.strategy])
    train = frozenset(dataset.perturbations)
    usable = []
    for target in targets:
        if target in train:
            logger.warning("target %s is already a training perturbation; excluded", target)
            continue
        usable.append(target)
    settings = _settings(config)
    pool = sorted(train)
    provider = build_provider(config)
    rows: list[tuple[str, list[float]]] = []
    provenance: dict[str, dict] = {}
    failures: dict[str, str] = {}
    for target in usable:
        try:
            chains = run_chains(
                provider, target, pool, settings.context,
                k_chains=settings.k_chains, temperature=settings.temperature,
                model_id=settings.model_id, k_range=settings.k_range,
            )
            profile = predict_for_target(
                config.strategy, chains, target, train, dataset, settings,
                graph=graph, euclidean=euclidean, poincare=poincare,
            )
        except ProviderUnavailable:
            raise
        except MechPertError as exc:
            logger.error("prediction failed for %s: %s", target, exc)
            failures[target] = str(exc)
            continue
        rows.append((target, [float(v) for v in profile]))
        provenance[target] = {
            "strategy": config.strategy,
            "chains": [_chain_dict(c) for c in chains],
            "consensus_binary": aggregate_binary(chains).weights,
            "consensus_confidence": aggregate_confidence(chains).weights,
        }
    outdir = config.output_dir
    os.makedirs(outdir, exist_ok=True)
    lines = ["target\t" + "\t".join(dataset.readout_genes)]
    for target, values in rows:
        lines.append(target + "\t" + "\t".join("%.17g" % v for v in values))
    _write_atomic(os.path.join(outdir, "predictions.tsv"), "\n".join(lines) + "\n")
    _write_atomic(
        os.path.join(outdir, "provenance.json"),
        _dump_json({"predictions": provenance, "failures": failures, "excluded": sorted(set(targets) - set(usable))}),
    )
    _snapshot(config, outdir)
    if not rows:
        return EXIT_NO_PREDICTIONS
    return EXIT_OK


def cmd_benchmark(config: RunConfig, args: argparse.Namespace) -> int:
    dataset, graph, euclidean, poincare = _load_resources(config, config.strategies)
    provider = build_provider(config)
    report = bench.scaling_benchmark(
        dataset,
        config.strategies,
        sizes=config.sizes,
        seeds=config.seeds,
        provider=provider,
        settings=_settings(config),
        graph=graph,
        euclidean=euclidean,
        poincare=poincare,
        max_targets=config.max_targets,
        config_snapshot=config.to_dict(),
    )
    outdir = config.output_dir
    _write_atomic(os.path.join(outdir, "report.json"), report.to_json())
    _write_atomic(os.path.join(outdir, "report.md"), bench.report_markdown(report))
    _snapshot(config, outdir)
    return EXIT_OK


def _anchor_pool(config: RunConfig):
    dataset, graph, _, _ = _load_resources(config, [])
    if graph is None:
        raise ConfigError("anchors commands need ppi_path")
    pool = sorted(g for g in dataset.profiles if g in graph)
    if not pool:
        raise ConfigError("no measured genes present in the graph")
    return dataset, graph, pool


def _select_anchors(config: RunConfig, strategy: str, dataset, graph, pool) -> design.AnchorSet:
    seed = config.seeds[0]
    if strategy == design.STRATEGY_RANDOM:
        return design.select_random(pool, config.budget, seed)
    if strategy == design.STRATEGY_DEGREE:
        return design.select_degree(graph, pool, config.budget)
    provider = build_provider(config)
    if strategy == design.STRATEGY_SEMANTIC_LLM:
        return design.select_llm_iterative(
            provider, pool, config.budget, batch=config.batch, context=config.cell_line,
            seed=seed, model_id=model_id(config), temperature=config.temperature,
        )
    if strategy == design.STRATEGY_CONSENSUS:
        return design.select_consensus(
            provider, pool, config.budget, batch=config.batch, context=config.cell_line,
            seed=seed, k_chains=config.k_chains, model_id=model_id(config),
            temperature=config.temperature,
        )
    raise ConfigError(f"unknown anchor strategy: {strategy!r}")


def _anchor_set_dict(anchors: design.AnchorSet) -> dict:
    return {
        "strategy": anchors.strategy,
        "anchors": list(anchors.anchors),
        "rounds": list(anchors.rounds),
    }


def cmd_anchors(config: RunConfig, args: argparse.Namespace) -> int:
    dataset, graph, pool = _anchor_pool(config)
    outdir = config.output_dir
    if args.anchors_cmd == "select":
        anchors = _select_anchors(config, args.anchor_strategy, dataset, graph, pool)
        _write_atomic(
            os.path.join(outdir, f"anchors_{anchors.strategy}.json"),
            _dump_json(_anchor_set_dict(anchors)),
        )
        _snapshot(config, outdir)
        return EXIT_OK
    # evaluate
    if args.anchors_file:
        with open(args.anchors_file, encoding="utf-8") as handle:
            payload = json.load(handle)
        anchors = design.AnchorSet(
            anchors=tuple(payload["anchors"]),
            strategy=payload.get("strategy", "file"),
        )
    else:
        anchors = _select_anchors(config, args.anchor_strategy, dataset, graph, pool)
    evaluation = design.evaluate_anchor_set(anchors, dataset, graph, beta=config.beta)
    result = {
        "strategy": evaluation.strategy,
        "anchors": list(evaluation.anchors),
        "beta": evaluation.beta,
        "mean": None if evaluation.n_scored == 0 else evaluation.summary.mean,
        "sem": None if evaluation.n_scored == 0 else evaluation.summary.sem,
        "n_scored": evaluation.n_scored,
        "n_skipped": evaluation.n_skipped,
        "per_target": evaluation.per_target,
        "skip_reasons": evaluation.skip_reasons,
    }
    _write_atomic(
        os.path.join(outdir, f"anchor_eval_{evaluation.strategy}.json"), _dump_json(result)
    )
    _snapshot(config, outdir)
    return EXIT_OK


def cmd_ablate(config: RunConfig, args: argparse.Namespace) -> int:
    dataset, _, _, _ = _load_resources(config, ["semantic", "binary", "confidence"])
    provider = build_provider(config)
    report = bench.ablation_run(
        dataset,
        provider,
        n=config.sizes[0],
        seed=config.seeds[0],
        settings=_settings(config),
        max_targets=config.max_targets,
        config_snapshot=config.to_dict(),
    )
    outdir = config.output_dir
    _write_atomic(os.path.join(outdir, "ablation.json"), report.to_json())
    _write_atomic(os.path.join(outdir, "ablation.md"), bench.ablation_markdown(report))
    _snapshot(config, outdir)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _comma_ints(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _comma_strs(text: str) -> list[str]:
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="JSON run-config file")
    parser.add_argument("--dataset-path")
    parser.add_argument("--ppi-path")
    parser.add_argument("--min-score", type=int)
    parser.add_argument("--euclidean-path")
    parser.add_argument("--poincare-path")
    parser.add_argument("--strategy", choices=STRATEGIES)
    parser.add_argument("--strategies", type=_comma_strs, metavar="S1,S2,...")
    parser.add_argument("--cell-line")
    parser.add_argument("--k-chains", type=int)
    parser.add_argument("--temperature", type=float)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--top-reachable", type=int)
    parser.add_argument("--pct-harmonizer", type=float)
    parser.add_argument("--pct-spectral", type=float)
    parser.add_argument("--k-range")
    parser.add_argument("--sizes", type=_comma_ints, metavar="N1,N2,...")
    parser.add_argument("--seeds", type=_comma_ints, metavar="S1,S2,...")
    parser.add_argument("--budget", type=int)
    parser.add_argument("--batch", type=int)
    parser.add_argument("--min-votes", type=int)
    parser.add_argument("--max-targets", type=int)
    parser.add_argument("--output-dir")
    parser.add_argument("--provider", choices=("http", "cache", "synthetic"))
    parser.add_argument("--synthetic-seed", type=int)
    parser.add_argument("--n-genes", type=int)
    parser.add_argument("--cache-dir")
    parser.add_argument("--model")
    parser.add_argument("--http-url")
    parser.add_argument("--token-env")
    parser.add_argument("-v", "--verbose", action="store_true")


_CONFIG_FLAGS = (
    "dataset_path", "ppi_path", "min_score", "euclidean_path", "poincare_path",
    "strategy", "strategies", "cell_line", "k_chains", "temperature", "alpha",
    "beta", "top_reachable", "pct_harmonizer", "pct_spectral", "k_range",
    "sizes", "seeds", "budget", "batch", "min_votes", "max_targets", "output_dir",
)

_PROVIDER_FLAGS = {
    "provider": "type",
    "synthetic_seed": "synthetic_seed",
    "n_genes": "n_genes",
    "cache_dir": "cache_dir",
    "model": "model",
    "http_url": "url",
    "token_env": "token_env",
}


def _overrides_from(args: argparse.Namespace) -> dict:
    overrides: dict = {}
    for name in _CONFIG_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    provider_overrides = {}
    for flag, key in _PROVIDER_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            provider_overrides[key] = value
    if provider_overrides:
        overrides["provider"] = provider_overrides
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mechpert",
        description="Few-shot perturbation-response prediction and anchor design.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_predict = sub.add_parser("predict", help="predict expression profiles for unseen targets")
    p_predict.add_argument("--targets", required=True, help="comma-separated target genes")
    _add_common_flags(p_predict)
    p_predict.set_defaults(func=cmd_predict)

    p_bench = sub.add_parser("benchmark", help="run the scaling benchmark grid")
    _add_common_flags(p_bench)
    p_bench.set_defaults(func=cmd_benchmark)

    p_anchors = sub.add_parser("anchors", help="select or evaluate anchor perturbation sets")
    anchors_sub = p_anchors.add_subparsers(dest="anchors_cmd", required=True)
    for name in ("select", "evaluate"):
        p_sub = anchors_sub.add_parser(name)
        p_sub.add_argument(
            "--anchor-strategy",
            choices=design.ANCHOR_STRATEGIES,
            default=design.STRATEGY_CONSENSUS,
        )
        if name == "evaluate":
            p_sub.add_argument("--anchors-file", default=None, help="anchor set JSON from a previous select")
        _add_common_flags(p_sub)
        p_sub.set_defaults(func=cmd_anchors)

    p_ablate = sub.add_parser("ablate", help="consensus-component ablation at one training size")
    _add_common_flags(p_ablate)
    p_ablate.set_defaults(func=cmd_ablate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_config(args.config, _overrides_from(args))
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(config, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ProviderUnavailable as exc:
        print(f"provider unavailable: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except MechPertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
