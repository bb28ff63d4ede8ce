"""Poincare-ball geometry (curvature -1).

Distances use the arcosh form of the Poincare metric, evaluated through
``log1p`` for stability near coincident points. Midpoints are Lorentz-weighted
means computed in the Klein model, the accepted definition of the Einstein
midpoint; it reduces to the Euclidean mean near the origin.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .errors import EmptyInput, OutsideBall

logger = logging.getLogger(__name__)

_BALL_EDGE = 1.0 - 1e-12
_REPROJECT_NORM = 1.0 - 1e-9
_ZERO_BANDWIDTH_FLOOR = 1e-6


def _check_in_ball(point: np.ndarray) -> np.ndarray:
    point = np.asarray(point, dtype=float)
    if np.linalg.norm(point) >= 1.0:
        raise OutsideBall(f"point has norm {np.linalg.norm(point):.6g} >= 1")
    return point


def project_to_ball(point: np.ndarray) -> np.ndarray:
    """Radially rescale points that drifted onto the boundary back inside."""
    point = np.asarray(point, dtype=float)
    norm = float(np.linalg.norm(point))
    if norm >= _BALL_EDGE:
        return point * (_REPROJECT_NORM / norm)
    return point


def poincare_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Geodesic distance arcosh(1 + 2|u-v|^2 / ((1-|u|^2)(1-|v|^2)))."""
    u = _check_in_ball(u)
    v = _check_in_ball(v)
    diff_sq = float(np.sum((u - v) ** 2))
    denom = (1.0 - float(np.sum(u * u))) * (1.0 - float(np.sum(v * v)))
    t = 2.0 * diff_sq / denom
    # arcosh(1 + t) = log1p(t + sqrt(t * (t + 2))), stable for small t
    return math.log1p(t + math.sqrt(t * (t + 2.0)))


def einstein_midpoint(points: list[np.ndarray]) -> np.ndarray:
    """Lorentz-weighted mean of Poincare points, via the Klein model.

    Each point p maps to Klein coordinates k = 2p/(1+|p|^2); the midpoint is
    sum(gamma_i * k_i) / sum(gamma_i) with gamma = 1/sqrt(1-|k|^2), mapped
    back by m / (1 + sqrt(1-|m|^2)).
    """
    if not points:
        raise EmptyInput("einstein midpoint of zero points")
    klein = []
    gammas = []
    for p in points:
        p = _check_in_ball(p)
        k = 2.0 * p / (1.0 + float(np.sum(p * p)))
        k_sq = float(np.sum(k * k))
        # |k| < 1 whenever |p| < 1; clamp guards float drift at the edge
        k_sq = min(k_sq, 1.0 - 1e-15)
        klein.append(k)
        gammas.append(1.0 / math.sqrt(1.0 - k_sq))
    klein_mid = sum(g * k for g, k in zip(gammas, klein)) / sum(gammas)
    m_sq = min(float(np.sum(klein_mid * klein_mid)), 1.0 - 1e-15)
    back = klein_mid / (1.0 + math.sqrt(1.0 - m_sq))
    return project_to_ball(back)


def percentile_bandwidth(distances: list[float], pct: float) -> float:
    """Nearest-rank percentile of a distance pool, floored away from zero.

    sigma = sorted(distances)[ceil(pct/100 * n) - 1]; a zero result falls back
    to the smallest positive distance, or 1e-6 when every distance is zero.
    """
    if not distances:
        raise EmptyInput("percentile of an empty distance pool")
    if not (0.0 < pct < 100.0):
        raise ValueError(f"pct must be in (0, 100): {pct}")
    ordered = sorted(distances)
    rank = math.ceil(pct / 100.0 * len(ordered))
    sigma = ordered[max(rank, 1) - 1]
    if sigma > 0.0:
        return sigma
    positive = [d for d in ordered if d > 0.0]
    if positive:
        logger.warning("percentile bandwidth hit zero; substituting smallest positive distance")
        return positive[0]
    logger.warning("all distances zero; bandwidth floored at %g", _ZERO_BANDWIDTH_FLOOR)
    return _ZERO_BANDWIDTH_FLOOR


def gaussian_density_weight(d: float, sigma: float) -> float:
    """exp(-d^2 / (2 sigma^2)); 1 at d = 0, decaying monotonically."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive: {sigma}")
    return math.exp(-(d * d) / (2.0 * sigma * sigma))
