"""Dataset, interactome, and embedding ingestion.

File formats are plain TSV (UTF-8, tab separator, ``\\n`` line endings,
``.`` decimal point):

* perturbation dataset -- header ``perturbation<TAB>gene_1...gene_d``, one row
  per perturbed gene with d mean expression-effect values (log-fold-change
  units, stored as provided);
* interactome edge list -- ``gene_a<TAB>gene_b<TAB>combined_score`` with
  integer scores in [0, 1000];
* embeddings -- ``gene<TAB>v1<TAB>...<TAB>v_dim``.

Loaders validate eagerly and raise typed errors carrying line numbers; the
returned values are treated as immutable.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicatePerturbation,
    InvalidGeneSymbol,
    MalformedRow,
    MissingFile,
    NonFiniteValue,
    NTooLarge,
    PoincareNormViolation,
    ScoreOutOfRange,
)
from .graph import PpiGraph
from .rng import Xoshiro256StarStar, derive_seed

logger = logging.getLogger(__name__)

DEFAULT_MIN_SCORE = 700  # STRING high-confidence convention


def parse_gene_symbol(token: str) -> str:
    """Normalize a gene symbol: strip, uppercase, reject empties and whitespace."""
    symbol = token.strip().upper()
    if not symbol:
        raise InvalidGeneSymbol("empty gene symbol")
    if any(c.isspace() for c in symbol):
        raise InvalidGeneSymbol(f"gene symbol contains whitespace: {token!r}")
    return symbol


@dataclass(frozen=True)
class PerturbationDataset:
    """Gene universe plus per-perturbation mean expression-effect vectors.

    ``readout_genes`` fixes the coordinate order of every profile; profiles
    are dense float vectors of that length.
    """

    readout_genes: tuple[str, ...]
    profiles: dict[str, np.ndarray]
    cell_line: str = ""
    source: str = ""

    def __post_init__(self) -> None:
        d = len(self.readout_genes)
        if d < 1:
            raise ValueError("dataset universe must contain at least one readout gene")
        if not self.profiles:
            raise ValueError("dataset must contain at least one perturbation profile")
        for gene, profile in self.profiles.items():
            if profile.shape != (d,):
                raise ValueError(f"profile for {gene} has length {profile.shape}, expected {d}")
            if not np.all(np.isfinite(profile)):
                raise ValueError(f"profile for {gene} contains non-finite values")

    @property
    def n_readouts(self) -> int:
        return len(self.readout_genes)

    @property
    def perturbations(self) -> tuple[str, ...]:
        return tuple(sorted(self.profiles))


@dataclass(frozen=True)
class TrainTestSplit:
    train: frozenset[str]
    test: frozenset[str]
    seed: int

    def __post_init__(self) -> None:
        if self.train & self.test:
            raise ValueError("train and test sets overlap")


def load_dataset(path: str, cell_line: str = "") -> PerturbationDataset:
    """Load a perturbation dataset from a TSV matrix file."""
    if not os.path.isfile(path):
        raise MissingFile(path)
    with open(path, encoding="utf-8", newline="") as handle:
        header = handle.readline().rstrip("\n")
        cells = header.split("\t")
        if len(cells) < 2 or cells[0] != "perturbation":
            raise MalformedRow(1, "header must start with 'perturbation' followed by readout genes")
        readout = tuple(parse_gene_symbol(c) for c in cells[1:])
        d = len(readout)
        profiles: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(handle, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split("\t")
            if len(cells) != d + 1:
                raise MalformedRow(lineno, f"expected {d + 1} columns, found {len(cells)}")
            symbol = parse_gene_symbol(cells[0])
            if symbol in profiles:
                raise DuplicatePerturbation(symbol)
            values = np.empty(d)
            for col, token in enumerate(cells[1:], start=2):
                try:
                    value = float(token)
                except ValueError as exc:
                    raise MalformedRow(lineno, f"column {col}: not a number: {token!r}") from exc
                if not math.isfinite(value):
                    raise NonFiniteValue(lineno, col, token)
                values[col - 2] = value
            profiles[symbol] = values
    return PerturbationDataset(readout_genes=readout, profiles=profiles, cell_line=cell_line, source=path)


def write_dataset(dataset: PerturbationDataset, path: str) -> None:
    """Serialize a dataset back to TSV at 17 significant digits (round-trip exact)."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("perturbation\t" + "\t".join(dataset.readout_genes) + "\n")
        for gene in sorted(dataset.profiles):
            values = "\t".join("%.17g" % v for v in dataset.profiles[gene])
            handle.write(f"{gene}\t{values}\n")


def load_ppi(path: str, min_score: int = DEFAULT_MIN_SCORE) -> PpiGraph:
    """Load a STRING-style edge list into an undirected weighted graph.

    Edges below ``min_score`` are dropped, weights are score/1000, self-loops
    are removed, and duplicate edges keep the maximum score.
    """
    if not (0 <= min_score <= 1000):
        raise ValueError(f"min_score must be in [0, 1000]: {min_score}")
    if not os.path.isfile(path):
        raise MissingFile(path)
    edges: list[tuple[str, str, float]] = []
    with open(path, encoding="utf-8", newline="") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split("\t")
            if len(cells) != 3:
                raise MalformedRow(lineno, f"expected 3 columns, found {len(cells)}")
            a = parse_gene_symbol(cells[0])
            b = parse_gene_symbol(cells[1])
            try:
                score = int(cells[2])
            except ValueError as exc:
                raise MalformedRow(lineno, f"score is not an integer: {cells[2]!r}") from exc
            if not (0 <= score <= 1000):
                raise ScoreOutOfRange(lineno, score)
            if a == b:
                logger.debug("dropping self-loop %s at line %d", a, lineno)
                continue
            if score < min_score:
                continue
            edges.append((a, b, score / 1000.0))
    return PpiGraph.from_edges(edges)


def load_embeddings(path: str, geometry: str, dim: int) -> dict[str, np.ndarray]:
    """Load gene embeddings; Poincare vectors must lie strictly inside the unit ball."""
    if geometry not in ("euclidean", "poincare"):
        raise ValueError(f"unknown geometry: {geometry!r}")
    if dim < 1:
        raise ValueError("dim must be positive")
    if not os.path.isfile(path):
        raise MissingFile(path)
    embeddings: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8", newline="") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split("\t")
            if len(cells) != dim + 1:
                raise DimensionMismatch(
                    f"line {lineno}: expected {dim} coordinates, found {len(cells) - 1}"
                )
            gene = parse_gene_symbol(cells[0])
            try:
                vector = np.array([float(tok) for tok in cells[1:]])
            except ValueError as exc:
                raise MalformedRow(lineno, str(exc)) from exc
            if not np.all(np.isfinite(vector)):
                raise NonFiniteValue(lineno, 0, "embedding coordinates")
            if geometry == "poincare":
                norm = float(np.linalg.norm(vector))
                if norm >= 1.0:
                    raise PoincareNormViolation(gene, norm)
            embeddings[gene] = vector
    return embeddings


def subsample_training(dataset: PerturbationDataset, n: int, seed: int) -> TrainTestSplit:
    """Seeded uniform subsample of n perturbations; the remainder is the test set.

    Sampling draws from the sorted perturbation list through a derived
    xoshiro stream (label ``subsample:{n}``), so splits are bit-identical
    across runs and platforms.
    """
    pool = list(dataset.perturbations)
    if n <= 0:
        raise ValueError("n must be positive")
    if n >= len(pool):
        raise NTooLarge(f"requested {n} training perturbations from {len(pool)} (test set would be empty)")
    rng = Xoshiro256StarStar(derive_seed(seed, f"subsample:{n}"))
    train = frozenset(rng.sample(pool, n))
    test = frozenset(pool) - train
    return TrainTestSplit(train=train, test=test, seed=seed)
