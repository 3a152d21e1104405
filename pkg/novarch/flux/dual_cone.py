"""
Dual cone - Generators of {beta : w0.beta + v.(boundary beta) >= 0 for all v in the star}.

The star contributes one inequality per point, two per ray
(w0.beta >= 0 and rho.(boundary beta) >= 0) and an equality per full line.
The cone is computed by the double description method: start from the
whole space (a lineality basis), then intersect with one half-space at a
time, pivoting on the lineality when the constraint cuts it and combining
positive with negative rays otherwise. Redundant rays are pruned by an
exact LP after every step.
"""

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import List, Sequence, Tuple

from pydantic import BaseModel, Field

from novarch.errors import DimensionTooLarge
from novarch.flux.lp import in_cone
from novarch.flux.polytope import FluxPolytope, RelLattice, StarShape, dot
from novarch.utils.logger import get_logger

logger = get_logger(__name__)

MAX_DIMENSION = 8

Vec = Tuple[Fraction, ...]


def primitive(v: Sequence[Fraction]) -> Tuple[int, ...]:
    """Smallest integer vector on the ray through v."""
    den = reduce(lcm, (Fraction(x).denominator for x in v), 1)
    ints = [int(Fraction(x) * den) for x in v]
    g = reduce(gcd, (abs(x) for x in ints), 0)
    return tuple(x // g for x in ints) if g else tuple(ints)


def star_inequalities(L: RelLattice, star: StarShape) -> Tuple[List[Vec], List[Vec]]:
    """(inequality normals a with a.beta >= 0, equality normals) on Q^m."""
    m = L.m
    bt = [[Fraction(L.boundary[r][c]) for r in range(L.k)] for c in range(m)]

    def through_boundary(v: Sequence[Fraction]) -> Vec:
        # a_c = sum_r v_r boundary[r][c]
        return tuple(dot(v, bt[c]) for c in range(m))

    inequalities: List[Vec] = [tuple(L.w0)]
    equalities: List[Vec] = []
    for v in star.points:
        grad = through_boundary(v)
        inequalities.append(tuple(w + g for w, g in zip(L.w0, grad)))
    for rho in star.rays:
        inequalities.append(through_boundary(rho))
    for line in star.full_lines:
        equalities.append(through_boundary(line))
    return inequalities, equalities


def _combine(a: Vec, p: Vec, n: Vec) -> Vec:
    ap, an = dot(a, p), dot(a, n)
    return tuple(ap * y - an * x for x, y in zip(p, n))


def _prune(rays: List[Vec], lineality: List[Vec]) -> List[Vec]:
    """Drop duplicates and rays generated by the others (plus the lineality)."""
    seen = {}
    for r in rays:
        key = primitive(r)
        if any(key):
            seen.setdefault(key, tuple(Fraction(x) for x in key))
    unique = list(seen.values())
    lines = list(lineality) + [tuple(-x for x in l) for l in lineality]
    kept = []
    for n, r in enumerate(unique):
        others = kept + unique[n + 1:] + lines
        if not in_cone(others, r):
            kept.append(r)
    return kept


def cone_generators(m: int, inequalities: Sequence[Vec], equalities: Sequence[Vec] = ()) -> Tuple[List[Vec], List[Vec]]:
    """
    Double description of {x in Q^m : a.x >= 0, e.x = 0}.

    Returns:
        (extreme rays, lineality basis)
    """
    lineality: List[Vec] = [tuple(Fraction(int(i == j)) for j in range(m)) for i in range(m)]
    rays: List[Vec] = []
    constraints = [tuple(a) for a in inequalities]
    for e in equalities:
        constraints.append(tuple(e))
        constraints.append(tuple(-x for x in e))
    for a in constraints:
        index = next((n for n, l in enumerate(lineality) if dot(a, l) != 0), None)
        if index is not None:
            cut = lineality.pop(index)
            if dot(a, cut) < 0:
                cut = tuple(-x for x in cut)
            al = dot(a, cut)
            lineality = [tuple(x - dot(a, l) / al * y for x, y in zip(l, cut)) for l in lineality]
            rays = [tuple(x - dot(a, r) / al * y for x, y in zip(r, cut)) for r in rays]
            rays.append(cut)
            rays = _prune(rays, lineality)
            continue
        positive = [r for r in rays if dot(a, r) > 0]
        zero = [r for r in rays if dot(a, r) == 0]
        negative = [r for r in rays if dot(a, r) < 0]
        rays = positive + zero + [_combine(a, p, n) for p in positive for n in negative]
        rays = _prune(rays, lineality)
    return rays, lineality


class DualConeResult(BaseModel):
    generators: List[Tuple[int, ...]] = Field(description="Primitive generators (lines appear in both directions)")
    lineality: List[Tuple[int, ...]] = Field(default_factory=list)
    boundary_vanishes: bool = Field(description="Every generator has zero boundary")
    inequalities: List[Tuple[str, ...]] = Field(default_factory=list)


def dual_cone(L: RelLattice, star) -> DualConeResult:
    """
    The dual cone of a finitely presented star shape.

    Args:
        L: Relative lattice
        star: StarShape, FluxPolytope or list of points

    Raises:
        DimensionTooLarge: m exceeds 8
    """
    if L.m > MAX_DIMENSION:
        raise DimensionTooLarge(f"dual cone enumeration is limited to m <= {MAX_DIMENSION}", witness=L.m)
    if isinstance(star, FluxPolytope):
        star = StarShape.from_polytope(star)
    elif not isinstance(star, StarShape):
        star = StarShape(points=tuple(star))
    inequalities, equalities = star_inequalities(L, star)
    rays, lineality = cone_generators(L.m, inequalities, equalities)
    lines = [primitive(l) for l in lineality]
    generators = [primitive(r) for r in rays]
    for l in lines:
        generators.append(l)
        generators.append(tuple(-x for x in l))
    vanishes = all(not any(L.boundary_of(g)) for g in generators)
    logger.debug("dual cone: %d rays, %d lines", len(rays), len(lines))
    return DualConeResult(
        generators=generators,
        lineality=lines,
        boundary_vanishes=vanishes,
        inequalities=[tuple(str(x) for x in a) for a in inequalities],
    )


def satisfies(L: RelLattice, star: StarShape, beta: Sequence) -> bool:
    """beta meets every inequality and equality of the star."""
    inequalities, equalities = star_inequalities(L, star)
    return all(dot(a, beta) >= 0 for a in inequalities) and all(dot(e, beta) == 0 for e in equalities)
