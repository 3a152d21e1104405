"""
Rectify - Turning almost-commutative squares and almost-natural
transformations into strictly commuting ones.

For a square

    A0 --h0--> A1
    |f          |g
    B0 --h1--> B1

with |g h0 - h1 f| < |g h0| and h0 injective with spanning image, the
unique map agreeing with h1 f on the image of h0 is g~ = h1 f h0^-1.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from novarch.algebra.echelon import echelon
from novarch.algebra.matrix import NORM, NovMatrix
from novarch.algebra.novikov import INF, ONE
from novarch.config import get_settings, to_fraction
from novarch.errors import ImageNotSpanning, NoInitialObject, NotAlmostCommutative
from novarch.utils.logger import get_logger

logger = get_logger(__name__)


def is_isometry(m: NovMatrix, lattice: str = NORM) -> bool:
    """Normalized entries in the valuation ring and an injective residue matrix."""
    entries = m.normalized_entries(lattice)
    if any(x.val() < 0 for x in entries.values()):
        return False
    if not len(m.cols):
        return True
    residue = sympy.zeros(len(m.rows), len(m.cols))
    for (i, j), x in entries.items():
        c = x.constant_term()
        residue[i, j] = sympy.Rational(c.numerator, c.denominator)
    return residue.rank() == len(m.cols)


def invert_spanning(h: NovMatrix, order: Optional[Sequence[int]] = None, lattice: str = NORM) -> NovMatrix:
    """
    Inverse of an injective map whose image spans the target.

    Args:
        order: Order in which the columns enter the echelon

    Raises:
        ImageNotSpanning: h is not a bijection at finite rank
    """
    cols = list(range(len(h.cols))) if order is None else list(order)
    normalized = h.normalized_columns(lattice)
    ech = echelon([normalized[j] for j in cols], [{j: ONE} for j in cols])
    if ech.kernel or ech.rank < len(h.rows):
        missing = ech.complement(len(h.rows))
        witness = h.rows[missing[0]].name if missing else "kernel"
        raise ImageNotSpanning("structure map does not span its target", witness=witness)
    columns = [ech.lift({k: ONE}) for k in range(len(h.rows))]
    return NovMatrix.from_normalized_columns(h.cols, h.rows, columns, lattice)


@dataclass
class Rectification:
    map: NovMatrix
    checks: Dict[str, bool] = field(default_factory=dict)
    distance: object = INF

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def rectify_map(f: NovMatrix, g: NovMatrix, h0: NovMatrix, h1: NovMatrix,
                order: Optional[Sequence[int]] = None, precision=None, lattice: str = NORM) -> Rectification:
    """
    The unique g~ with g~ h0 = h1 f, close to g.

    Raises:
        NotAlmostCommutative: |g h0 - h1 f| >= |g h0|
        ImageNotSpanning: h0 is not injective with spanning image
    """
    E = to_fraction(precision) if precision is not None else get_settings().precision
    top = g @ h0
    defect = top - h1 @ f
    top_val = top.operator_val(lattice)
    defect_val = defect.operator_val(lattice)
    if not defect_val > top_val:
        raise NotAlmostCommutative(
            "square is not almost commutative",
            witness=f"val(g h0 - h1 f) = {defect_val}, val(g h0) = {top_val}",
        )
    inverse = invert_spanning(h0, order, lattice)
    g_tilde = h1 @ f @ inverse
    distance = (g_tilde - g).operator_val(lattice)
    checks = {
        "f_isometry": is_isometry(f, lattice),
        "g_isometry": is_isometry(g, lattice),
        "commutes": (g_tilde @ h0 - h1 @ f).is_zero_mod(E, lattice),
        "close": distance > g.operator_val(lattice),
    }
    logger.debug("rectify_map: defect %s, correction %s", defect_val, distance)
    return Rectification(map=g_tilde, checks=checks, distance=distance)


@dataclass
class Diagram:
    """
    Two diagrams over a finite poset and per-object maps between them.

    `source[(i, j)]` is h_ij: A_i -> A_j, `target[(i, j)]` is k_ij: B_i -> B_j
    for every arrow of the Hasse diagram; `maps[i]` is f_i: A_i -> B_i.
    """
    objects: List[str]
    source: Dict[Tuple[str, str], NovMatrix]
    target: Dict[Tuple[str, str], NovMatrix]
    maps: Dict[str, NovMatrix]

    def __post_init__(self):
        if set(self.source) != set(self.target):
            raise ValueError("source and target diagrams need the same arrows")
        for i, j in self.source:
            if i not in self.objects or j not in self.objects:
                raise ValueError(f"arrow {i} -> {j} uses an unknown object")
        missing = [o for o in self.objects if o not in self.maps]
        if missing:
            raise ValueError(f"no map given for {missing[0]}")

    def successors(self, i: str) -> List[str]:
        return [b for (a, b) in self.source if a == i]

    def reachable(self, i: str) -> set:
        seen, stack = {i}, [i]
        while stack:
            for b in self.successors(stack.pop()):
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        return seen

    def initial_object(self) -> str:
        everything = set(self.objects)
        for o in self.objects:
            if self.reachable(o) == everything:
                return o
        raise NoInitialObject("poset has no initial object", witness=",".join(self.objects))

    def paths(self, start: str, end: str) -> List[List[str]]:
        if start == end:
            return [[start]]
        out = []
        for b in self.successors(start):
            for rest in self.paths(b, end):
                out.append([start] + rest)
        return out

    def composite(self, path: Sequence[str], which: str = "source") -> NovMatrix:
        arrows = self.source if which == "source" else self.target
        m = None
        for a, b in zip(path, path[1:]):
            m = arrows[(a, b)] if m is None else arrows[(a, b)] @ m
        return m


@dataclass
class NaturalTransformation:
    initial: str
    maps: Dict[str, NovMatrix]
    routes: Dict[str, int] = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def rectify_natural_transformation(diagram: Diagram, precision=None, lattice: str = NORM) -> NaturalTransformation:
    """
    Rectify every f_j against the initial object: f~_0 = f_0 and
    f~_j = k_0j f_0 h_0j^-1 along each route 0 -> j.

    Raises:
        NoInitialObject: no object precedes all others
        NotAlmostCommutative: some arrow square fails the closeness bound
        ImageNotSpanning: some composite structure map does not span
    """
    E = to_fraction(precision) if precision is not None else get_settings().precision
    zero = diagram.initial_object()
    for (i, j), h in sorted(diagram.source.items()):
        top = diagram.maps[j] @ h
        defect = top - diagram.target[(i, j)] @ diagram.maps[i]
        if not defect.operator_val(lattice) > top.operator_val(lattice):
            raise NotAlmostCommutative("arrow square is not almost commutative", witness=f"{i} -> {j}")

    maps: Dict[str, NovMatrix] = {zero: diagram.maps[zero]}
    routes: Dict[str, int] = {zero: 1}
    checks: Dict[str, bool] = {}
    routes_agree = True
    for j in diagram.objects:
        if j == zero:
            continue
        candidates = []
        for path in diagram.paths(zero, j):
            r = rectify_map(
                diagram.maps[zero], diagram.maps[j],
                diagram.composite(path, "source"), diagram.composite(path, "target"),
                precision=E, lattice=lattice,
            )
            candidates.append(r)
        maps[j] = candidates[0].map
        routes[j] = len(candidates)
        checks[f"close:{j}"] = candidates[0].checks["close"]
        if any(not c.map.equals_mod(candidates[0].map, E, lattice) for c in candidates[1:]):
            routes_agree = False
            logger.warning("routes to %s give different rectifications", j)
    checks["routes_agree"] = routes_agree
    checks["squares_commute"] = all(
        (maps[j] @ h - diagram.target[(i, j)] @ maps[i]).is_zero_mod(E, lattice)
        for (i, j), h in diagram.source.items()
    )
    return NaturalTransformation(initial=zero, maps=maps, routes=routes, checks=checks)
