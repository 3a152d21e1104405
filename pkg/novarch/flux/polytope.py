"""
Polytope - Relative lattices, flux polytopes, star shapes and the cone C(P).

A relative class alpha in Z^m pairs with a flux point v in Q^k through

    l_v(alpha) = w0 . alpha + v . (boundary alpha)

and C(P) is the set of classes with l_v(alpha) >= 0 on all of P. Since
l_v is affine in v it is enough to test the vertices.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor
from typing import List, Sequence, Tuple

from novarch.config import to_fraction
from novarch.flux.lp import in_convex_hull
from novarch.utils.logger import get_logger

logger = get_logger(__name__)

Point = Tuple[Fraction, ...]


def as_point(values: Sequence) -> Point:
    return tuple(to_fraction(v) for v in values)


def dot(a: Sequence, b: Sequence) -> Fraction:
    return sum((Fraction(x) * Fraction(y) for x, y in zip(a, b)), Fraction(0))


@dataclass(frozen=True)
class RelLattice:
    """Z^m with a rational period functional w0 and an integer boundary Z^m -> Z^k."""
    m: int
    w0: Tuple[Fraction, ...]
    boundary: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "w0", as_point(self.w0))
        rows = tuple(tuple(int(x) for x in row) for row in self.boundary)
        object.__setattr__(self, "boundary", rows)
        if len(self.w0) != self.m:
            raise ValueError(f"w0 has {len(self.w0)} entries, expected {self.m}")
        if any(len(row) != self.m for row in rows):
            raise ValueError("every boundary row needs m entries")

    @property
    def k(self) -> int:
        return len(self.boundary)

    def boundary_of(self, alpha: Sequence[int]) -> Tuple[int, ...]:
        return tuple(sum(r * a for r, a in zip(row, alpha)) for row in self.boundary)

    def period(self, alpha: Sequence) -> Fraction:
        return dot(self.w0, alpha)

    def pairing(self, v: Sequence, alpha: Sequence) -> Fraction:
        """l_v(alpha)."""
        return self.period(alpha) + dot(v, self.boundary_of(alpha))

    def gradient(self, alpha: Sequence[int]) -> Point:
        """Coefficients of v in l_v(alpha)."""
        return tuple(Fraction(x) for x in self.boundary_of(alpha))

    def scaled(self, t) -> "RelLattice":
        t = to_fraction(t)
        return RelLattice(self.m, tuple(w * t for w in self.w0), self.boundary)


@dataclass(frozen=True)
class FluxPolytope:
    """Convex hull of finitely many rational points; the vertex list is made irredundant."""
    vertices: Tuple[Point, ...]
    contains_origin: bool = field(default=False, compare=False)

    def __post_init__(self):
        points = []
        for v in self.vertices:
            p = as_point(v)
            if p not in points:
                points.append(p)
        if not points:
            raise ValueError("a flux polytope needs at least one point")
        dims = {len(p) for p in points}
        if len(dims) != 1:
            raise ValueError("all vertices must have the same dimension")
        kept = [p for n, p in enumerate(points) if not in_convex_hull(points[:n] + points[n + 1:], p)]
        if len(kept) < len(points):
            logger.debug("flux polytope: dropped %d redundant points", len(points) - len(kept))
        object.__setattr__(self, "vertices", tuple(kept))
        origin = tuple(Fraction(0) for _ in range(dims.pop()))
        object.__setattr__(self, "contains_origin", self.contains(origin))

    @property
    def dimension(self) -> int:
        return len(self.vertices[0])

    def contains(self, point: Sequence) -> bool:
        p = as_point(point)
        if p in self.vertices:
            return True
        return in_convex_hull(list(self.vertices), p)

    @classmethod
    def interval(cls, low, high) -> "FluxPolytope":
        return cls(((to_fraction(low),), (to_fraction(high),)))


@dataclass(frozen=True)
class StarShape:
    """
    Finite presentation of a star-shaped set: points, rays from the origin,
    and full lines (both directions of a rational line).
    """
    points: Tuple[Point, ...] = ()
    rays: Tuple[Point, ...] = ()
    full_lines: Tuple[Point, ...] = ()

    def __post_init__(self):
        for name in ("points", "rays", "full_lines"):
            object.__setattr__(self, name, tuple(as_point(v) for v in getattr(self, name)))

    @classmethod
    def from_polytope(cls, polytope: FluxPolytope) -> "StarShape":
        return cls(points=polytope.vertices)

    def without_line(self, index: int) -> "StarShape":
        lines = list(self.full_lines)
        del lines[index]
        return StarShape(self.points, self.rays, tuple(lines))


def cone_membership(alpha: Sequence[int], P: FluxPolytope, L: RelLattice) -> bool:
    """alpha lies in C(P): l_v(alpha) >= 0 at every vertex of P."""
    return all(L.pairing(v, alpha) >= 0 for v in P.vertices)


def failing_vertex(alpha: Sequence[int], P: FluxPolytope, L: RelLattice):
    for v in P.vertices:
        if L.pairing(v, alpha) < 0:
            return v
    return None


def grid_points(P: FluxPolytope, resolution: int = 16) -> List[Point]:
    """Rational points of P on the 1/resolution grid inside its bounding box."""
    lows = [min(v[i] for v in P.vertices) for i in range(P.dimension)]
    highs = [max(v[i] for v in P.vertices) for i in range(P.dimension)]
    axes = []
    for lo, hi in zip(lows, highs):
        start = ceil(lo * resolution)
        stop = floor(hi * resolution)
        axes.append([Fraction(n, resolution) for n in range(start, stop + 1)])
    points: List[Point] = [()]
    for axis in axes:
        points = [p + (x,) for p in points for x in axis]
    return [p for p in points if P.contains(p)]
