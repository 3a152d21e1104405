"""
Tau - The tau invariant over a flux polytope and its monotonicity.

Each relative class alpha gives the affine function v -> l_v(alpha); tau
over P is the minimum of these, hence concave. No classes means the
constant +inf.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from novarch.algebra.echelon import echelon
from novarch.algebra.matrix import NORM, NovMatrix
from novarch.algebra.novikov import INF, ONE
from novarch.errors import ClassOutsideCone, MapNotInjective
from novarch.flux.polytope import FluxPolytope, Point, RelLattice, as_point, cone_membership, dot, failing_vertex
from novarch.spectral.pages import SpectralSequenceState, tau_from_ss
from novarch.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class LinearPiece:
    constant: Fraction
    gradient: Point
    source: Tuple[int, ...] = ()

    def __call__(self, v: Sequence) -> Fraction:
        return self.constant + dot(self.gradient, v)


@dataclass(frozen=True)
class PLConcaveFunction:
    """min over pieces of (constant + gradient . v) on a polytope; +inf with no pieces."""
    pieces: Tuple[LinearPiece, ...]
    domain: FluxPolytope

    def __call__(self, v: Sequence):
        if not self.pieces:
            return INF
        point = as_point(v)
        return min(piece(point) for piece in self.pieces)

    def argmin(self, v: Sequence) -> Optional[int]:
        if not self.pieces:
            return None
        point = as_point(v)
        values = [piece(point) for piece in self.pieces]
        return values.index(min(values))

    def scaled(self, t) -> "PLConcaveFunction":
        t = Fraction(t)
        return PLConcaveFunction(
            tuple(LinearPiece(p.constant * t, tuple(g * t for g in p.gradient), p.source) for p in self.pieces),
            self.domain,
        )

    def to_dict(self) -> List[dict]:
        return [
            {"class": list(p.source), "constant": str(p.constant), "gradient": [str(g) for g in p.gradient]}
            for p in self.pieces
        ]


def tau_eval(classes: Sequence[Sequence[int]], P: FluxPolytope, L: RelLattice) -> PLConcaveFunction:
    """
    tau_P(v) = min over classes of l_v(alpha).

    Raises:
        ClassOutsideCone: some class fails l_v >= 0 at a vertex
    """
    pieces = []
    for alpha in classes:
        alpha = tuple(int(a) for a in alpha)
        if not cone_membership(alpha, P, L):
            raise ClassOutsideCone("class is not in the cone C(P)", witness=f"{alpha} at {failing_vertex(alpha, P, L)}")
        piece = LinearPiece(L.period(alpha), L.gradient(alpha), alpha)
        if all(piece.constant != q.constant or piece.gradient != q.gradient for q in pieces):
            pieces.append(piece)
    return PLConcaveFunction(tuple(pieces), P)


def random_point(P: FluxPolytope, rng: np.random.Generator, scale: int = 64) -> Point:
    """Exact convex combination of the vertices with random integer weights."""
    weights = [int(w) for w in rng.integers(0, scale + 1, size=len(P.vertices))]
    if sum(weights) == 0:
        weights[0] = 1
    total = sum(weights)
    return tuple(
        sum((Fraction(w, total) * v[i] for w, v in zip(weights, P.vertices)), Fraction(0))
        for i in range(P.dimension)
    )


class ConcavityCertificate(BaseModel):
    pairs_tested: int
    holds: bool = Field(description="tau((a+b)/2) >= (tau(a)+tau(b))/2 on every tested pair")
    strict_pairs: int = Field(description="Pairs where the inequality is strict (a kink lies between)")
    structural: bool = Field(default=True, description="tau is a minimum of affine functions")
    counterexample: Optional[List[List[str]]] = None


def concavity_certificate(f: PLConcaveFunction, rng: np.random.Generator, pairs: int = 1000) -> ConcavityCertificate:
    """Exact midpoint test on random pairs of points of the domain."""
    strict = 0
    if not f.pieces:
        return ConcavityCertificate(pairs_tested=0, holds=True, strict_pairs=0)
    for _ in range(pairs):
        a = random_point(f.domain, rng)
        b = random_point(f.domain, rng)
        mid = tuple((x + y) / 2 for x, y in zip(a, b))
        lhs, rhs = f(mid), (f(a) + f(b)) / 2
        if lhs < rhs:
            return ConcavityCertificate(
                pairs_tested=pairs, holds=False, strict_pairs=strict,
                counterexample=[[str(x) for x in a], [str(x) for x in b]],
            )
        if lhs > rhs:
            strict += 1
    return ConcavityCertificate(pairs_tested=pairs, holds=True, strict_pairs=strict)


class MonotonicityReport(BaseModel):
    tau_1: str
    tau_2: str
    holds: bool = Field(description="tau(K1) <= tau(K2)")


def _fmt(value) -> str:
    return "inf" if value == INF else str(value)


def check_monotonicity(state_1: SpectralSequenceState, state_2: SpectralSequenceState,
                       e1_map: NovMatrix, lattice: str = NORM) -> MonotonicityReport:
    """
    tau(K1) <= tau(K2) for an injective map on the first pages.

    Raises:
        MapNotInjective: e1_map has a kernel
    """
    columns = e1_map.normalized_columns(lattice)
    ech = echelon(columns, [{j: ONE} for j in range(len(columns))])
    if ech.kernel:
        support = "+".join(e1_map.cols[j].name for j in sorted(ech.kernel[0]))
        raise MapNotInjective("first-page map has a kernel", witness=support)
    tau_1, tau_2 = tau_from_ss(state_1), tau_from_ss(state_2)
    holds = tau_1 <= tau_2
    if not holds:
        logger.warning("monotonicity fails: %s > %s", tau_1, tau_2)
    return MonotonicityReport(tau_1=_fmt(tau_1), tau_2=_fmt(tau_2), holds=holds)
