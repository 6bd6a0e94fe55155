"""Planar geometry: positions, the gateway triangle, and point sampling.

All coordinates live in a local flat 2-D frame measured in meters. There is
deliberately no geodetic machinery here: deployments of a few kilometers are
well served by a tangent-plane approximation, and every downstream formula
(hyperbola intersection, circumcenter placement) is planar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Twice-signed-area floor below which three gateways are treated as collinear.
# Far below any meaningful deployment, far above double-precision noise at
# kilometer scale.
COLLINEAR_AREA2_M2 = 1e-6


class CollinearGatewaysError(ValueError):
    """The three gateways (nearly) lie on one line; no usable triangle."""


def _require_finite(name, *values):
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class Position:
    """A 2-D point in meters."""

    x: float
    y: float

    def __post_init__(self):
        _require_finite("coordinate", self.x, self.y)


@dataclass(frozen=True)
class GatewayTriple:
    """The three gateway positions, required to be non-collinear."""

    g1: Position
    g2: Position
    g3: Position

    def __post_init__(self):
        area2 = _twice_signed_area(self.g1, self.g2, self.g3)
        if abs(area2) <= COLLINEAR_AREA2_M2:
            raise CollinearGatewaysError(
                f"gateways are collinear (twice signed area {area2:.3e} m^2)"
            )

    def as_array(self) -> np.ndarray:
        """Gateway coordinates as a (3, 2) float array."""
        return np.array(
            [[self.g1.x, self.g1.y], [self.g2.x, self.g2.y], [self.g3.x, self.g3.y]],
            dtype=float,
        )


@dataclass(frozen=True)
class SyncNodeConfig:
    """The stationary synchronization transmitter.

    Attributes
    ----------
    pos : Position
        Nominal (assumed) position of the sync node.
    pos_error : tuple of float
        True-minus-assumed position offset (dx0, dy0) in meters.
    period_s : float
        Interval between synchronization transmissions, seconds.
    """

    pos: Position
    pos_error: tuple[float, float] = (0.0, 0.0)
    period_s: float = 1.0

    def __post_init__(self):
        _require_finite("position error", *self.pos_error)
        if not (self.period_s > 0):
            raise ValueError(f"sync period must be positive, got {self.period_s!r}")


def _twice_signed_area(p: Position, q: Position, r: Position) -> float:
    return (q.x - p.x) * (r.y - p.y) - (r.x - p.x) * (q.y - p.y)


def distance(p: Position, q: Position) -> float:
    """Euclidean distance between two positions, meters."""
    return math.hypot(p.x - q.x, p.y - q.y)


def canonical_triangle(circumdiameter: float) -> GatewayTriple:
    """Equilateral gateway triangle inscribed in a circle of the given diameter.

    The circumcenter sits at the origin and the first vertex points down the
    negative y-axis; the other two follow counterclockwise.

    Parameters
    ----------
    circumdiameter : float
        Diameter of the circumscribed circle, meters. Must be positive.
    """
    if not (circumdiameter > 0):
        raise ValueError(f"circumdiameter must be positive, got {circumdiameter!r}")
    r = circumdiameter / 2.0
    h = r * math.sqrt(3.0) / 2.0
    return GatewayTriple(
        Position(0.0, -r),
        Position(h, r / 2.0),
        Position(-h, r / 2.0),
    )


def circumcenter(triple: GatewayTriple) -> Position:
    """Center of the circle through the three gateways.

    This is the unique point equidistant from all three — the natural spot
    for a sync transmitter whose signal should arrive everywhere at once
    under line-of-sight.
    """
    g1, g2, g3 = triple.g1, triple.g2, triple.g3
    d = 2.0 * _twice_signed_area(g1, g2, g3)
    if abs(d) <= 2.0 * COLLINEAR_AREA2_M2:
        raise CollinearGatewaysError("circumcenter of collinear points is at infinity")
    s1 = g1.x * g1.x + g1.y * g1.y
    s2 = g2.x * g2.x + g2.y * g2.y
    s3 = g3.x * g3.x + g3.y * g3.y
    ux = (s1 * (g2.y - g3.y) + s2 * (g3.y - g1.y) + s3 * (g1.y - g2.y)) / d
    uy = (s1 * (g3.x - g2.x) + s2 * (g1.x - g3.x) + s3 * (g2.x - g1.x)) / d
    return Position(ux, uy)


def barycentric(triple: GatewayTriple, p: Position) -> tuple[float, float, float]:
    """Barycentric coordinates of ``p`` with respect to the gateway triangle."""
    area2 = _twice_signed_area(triple.g1, triple.g2, triple.g3)
    w1 = _twice_signed_area(p, triple.g2, triple.g3) / area2
    w2 = _twice_signed_area(triple.g1, p, triple.g3) / area2
    w3 = 1.0 - w1 - w2
    return (w1, w2, w3)


def contains(triple: GatewayTriple, p: Position, *, strict: bool = False) -> bool:
    """Whether ``p`` lies inside the gateway triangle.

    With ``strict=True`` points on the boundary do not count.
    """
    w1, w2, w3 = barycentric(triple, p)
    if strict:
        return w1 > 0.0 and w2 > 0.0 and w3 > 0.0
    return w1 >= 0.0 and w2 >= 0.0 and w3 >= 0.0


def sample_in_triangle(triple: GatewayTriple, rng: np.random.Generator) -> Position:
    """Draw one point uniformly from the interior of the gateway triangle."""
    pt = sample_points_in_triangle(triple, 1, rng)
    return Position(float(pt[0, 0]), float(pt[0, 1]))


def sample_points_in_triangle(
    triple: GatewayTriple, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw ``n`` points uniformly from the triangle interior, shape (n, 2).

    Uses the standard barycentric fold: draw (u, v) on the unit square and
    reflect the upper triangle back, giving exact uniformity in area with no
    rejection loop. Draws landing exactly on the boundary (a measure-zero
    event in double precision) are redrawn so every output is strictly
    interior.
    """
    if n < 0:
        raise ValueError(f"sample count must be non-negative, got {n!r}")
    u = rng.random(n)
    v = rng.random(n)
    fold = u + v > 1.0
    u[fold] = 1.0 - u[fold]
    v[fold] = 1.0 - v[fold]
    # Strict interiority: u, v and 1-u-v must all be positive.
    bad = (u <= 0.0) | (v <= 0.0) | (u + v >= 1.0)
    while np.any(bad):
        k = int(bad.sum())
        uu = rng.random(k)
        vv = rng.random(k)
        fold = uu + vv > 1.0
        uu[fold] = 1.0 - uu[fold]
        vv[fold] = 1.0 - vv[fold]
        u[bad] = uu
        v[bad] = vv
        bad = (u <= 0.0) | (v <= 0.0) | (u + v >= 1.0)
    g = triple.as_array()
    return g[0] + u[:, None] * (g[1] - g[0]) + v[:, None] * (g[2] - g[0])
