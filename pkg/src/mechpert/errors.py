"""Exception hierarchy.

Every error raised by this package derives from :class:`MechPertError` so
callers can catch a single base type. Subclasses carry the identifying
payload of the failure (line numbers, gene symbols, residuals) as attributes.
"""

from __future__ import annotations


class MechPertError(Exception):
    """Base class for all mechpert errors."""


# ---------------------------------------------------------------------------
# data ingestion
# ---------------------------------------------------------------------------


class MissingFile(MechPertError):
    pass


class MalformedRow(MechPertError):
    def __init__(self, line: int, message: str = "") -> None:
        self.line = line
        super().__init__(f"malformed row at line {line}" + (f": {message}" if message else ""))


class NonFiniteValue(MechPertError):
    def __init__(self, line: int, col: int, token: str = "") -> None:
        self.line = line
        self.col = col
        super().__init__(f"non-finite value at line {line}, column {col}: {token!r}")


class DuplicatePerturbation(MechPertError):
    def __init__(self, symbol: str) -> None:
        self.symbol = symbol
        super().__init__(f"duplicate perturbation row: {symbol}")


class ScoreOutOfRange(MechPertError):
    def __init__(self, line: int, score: object) -> None:
        self.line = line
        self.score = score
        super().__init__(f"interaction score out of [0, 1000] at line {line}: {score!r}")


class DimensionMismatch(MechPertError):
    pass


class PoincareNormViolation(MechPertError):
    def __init__(self, gene: str, norm: float) -> None:
        self.gene = gene
        self.norm = norm
        super().__init__(f"embedding for {gene} lies outside the unit ball (norm {norm:.6g})")


class NTooLarge(MechPertError):
    pass


class InvalidGeneSymbol(MechPertError):
    pass


# ---------------------------------------------------------------------------
# graph algorithms
# ---------------------------------------------------------------------------


class EmptyGraph(MechPertError):
    pass


class SeedNotInGraph(MechPertError):
    def __init__(self, symbol: str) -> None:
        self.symbol = symbol
        super().__init__(f"seed gene not in graph: {symbol}")


class NodeNotInGraph(MechPertError):
    def __init__(self, symbol: str) -> None:
        self.symbol = symbol
        super().__init__(f"gene not in graph: {symbol}")


class NoConvergence(MechPertError):
    def __init__(self, iterations: int, residual: float) -> None:
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"no convergence after {iterations} iterations (residual {residual:.3e})")


class ZeroKernelMass(MechPertError):
    def __init__(self, target: str) -> None:
        self.target = target
        super().__init__(f"zero heat-kernel mass for target {target}: disconnected from all anchors")


# ---------------------------------------------------------------------------
# hyperbolic geometry
# ---------------------------------------------------------------------------


class OutsideBall(MechPertError):
    pass


class EmptyInput(MechPertError):
    pass


# ---------------------------------------------------------------------------
# hypothesis generation / providers
# ---------------------------------------------------------------------------


class EmptyPool(MechPertError):
    pass


class UnparseableResponse(MechPertError):
    def __init__(self, raw: str, reason: str = "") -> None:
        self.raw = raw
        preview = raw[:120].replace("\n", " ")
        super().__init__(f"unparseable provider response ({reason or 'no valid JSON payload'}): {preview!r}")


class ProviderTransportError(MechPertError):
    """A single request failed at the transport level (network, cache miss)."""


class ProviderUnavailable(MechPertError):
    """All chains failed at the transport level."""


class CacheCorrupt(MechPertError):
    def __init__(self, path: str) -> None:
        self.path = path
        super().__init__(f"corrupt cache entry: {path}")


# ---------------------------------------------------------------------------
# consensus / prediction
# ---------------------------------------------------------------------------


class NoChains(MechPertError):
    pass


class EmptyNeighborhood(MechPertError):
    pass


class MissingProfile(MechPertError):
    def __init__(self, gene: str) -> None:
        self.gene = gene
        super().__init__(f"no training profile for gene: {gene}")


class NoValidNeighbors(MechPertError):
    pass


class SeedCountNot3(MechPertError):
    pass


class InsufficientEmbeddedCandidates(MechPertError):
    pass


class ZeroTotalWeight(MechPertError):
    pass


# ---------------------------------------------------------------------------
# active design
# ---------------------------------------------------------------------------


class BudgetExceedsPool(MechPertError):
    pass


class AnchorMissingProfile(MechPertError):
    def __init__(self, gene: str) -> None:
        self.gene = gene
        super().__init__(f"anchor has no measured profile: {gene}")


class AnchorNotInGraph(MechPertError):
    def __init__(self, gene: str) -> None:
        self.gene = gene
        super().__init__(f"anchor not in interaction graph: {gene}")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


class ConstantInput(MechPertError):
    pass


class LengthMismatch(MechPertError):
    pass


class EmptyScores(MechPertError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


class ConfigError(MechPertError):
    pass
