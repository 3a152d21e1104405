"""
Echelon - Valuation-greedy reduction to orthogonal pivot form.

Vectors are given in unit-lattice coordinates (see matrix.vec_normalize).
Each step picks the entry of least valuation over all remaining vectors
(ties: lowest vector index, then lowest coordinate), scales it to 1 and
clears that coordinate everywhere else. The resulting vectors have a 1 at
their pivot, zeros at the other pivots and entries of valuation >= 0, so
|sum a_k w_k| = max |a_k| and the standard vectors off the pivots span an
exactly orthogonal complement.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from novarch.algebra.matrix import (
    NORM,
    NovMatrix,
    Vector,
    vec_add,
    vec_denormalize,
    vec_normalize,
    vec_scale,
    vec_sub,
    vec_val,
)
from novarch.algebra.novikov import INF, NovikovElement, ONE
from novarch.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class EchelonResult:
    """Pivot-form basis of a span, with optional tracked preimages."""
    basis: List[Vector] = field(default_factory=list)
    pivots: List[int] = field(default_factory=list)
    preimages: Optional[List[Vector]] = None
    kernel: List[Vector] = field(default_factory=list)

    @property
    def rank(self) -> int:
        return len(self.basis)

    def coefficients(self, v: Vector) -> List[NovikovElement]:
        """Coordinates of the span-component of v in the pivot basis."""
        return [v.get(p, NovikovElement.zero()) for p in self.pivots]

    def project(self, v: Vector) -> Vector:
        out: Vector = {}
        for w, p in zip(self.basis, self.pivots):
            c = v.get(p)
            if c is not None and not c.is_zero():
                out = vec_add(out, vec_scale(w, c))
        return out

    def reduce(self, v: Vector) -> Vector:
        """v minus its projection: zero at every pivot."""
        return vec_sub(v, self.project(v))

    def quotient_val(self, v: Vector):
        """Valuation of the class of v modulo the span (sup over representatives)."""
        return vec_val(self.reduce(v))

    def complement(self, dimension: int) -> List[int]:
        taken = set(self.pivots)
        return [q for q in range(dimension) if q not in taken]

    def lift(self, v: Vector) -> Vector:
        """Tracked preimage of the span-component of v."""
        if self.preimages is None:
            raise ValueError("echelon was run without tracking")
        out: Vector = {}
        for y, p in zip(self.preimages, self.pivots):
            c = v.get(p)
            if c is not None and not c.is_zero():
                out = vec_add(out, vec_scale(y, c))
        return out


def echelon(vectors: Sequence[Vector], tracked: Optional[Sequence[Vector]] = None) -> EchelonResult:
    """
    Reduce a list of vectors to orthogonal pivot form.

    Args:
        vectors: Unit-lattice vectors spanning the subspace
        tracked: Optional companion vectors receiving the same operations
            (e.g. preimages e_j of columns d(e_j))

    Returns:
        EchelonResult; with tracking, `preimages[k]` maps to `basis[k]` and
        `kernel` holds the tracked companions of vectors that reduced to zero
    """
    work = [dict(v) for v in vectors]
    pre = [dict(t) for t in tracked] if tracked is not None else None
    if pre is not None and len(pre) != len(work):
        raise ValueError("tracked vectors must match the input vectors")

    result = EchelonResult(preimages=[] if pre is not None else None)
    remaining = []
    for k, v in enumerate(work):
        if v:
            remaining.append(k)
        elif pre is not None:
            result.kernel.append(pre[k])
    chosen: List[int] = []

    while remaining:
        best: Optional[Tuple] = None
        for k in remaining:
            for p, x in work[k].items():
                key = (x.val(), k, p)
                if best is None or key < best:
                    best = key
        _, k, p = best
        inv = work[k][p].invert()
        work[k] = vec_scale(work[k], inv)
        work[k][p] = ONE
        if pre is not None:
            pre[k] = vec_scale(pre[k], inv)
        remaining.remove(k)
        for other in remaining + chosen:
            c = work[other].get(p)
            if c is None:
                continue
            work[other] = vec_sub(work[other], vec_scale(work[k], c))
            work[other].pop(p, None)
            if pre is not None:
                pre[other] = vec_sub(pre[other], vec_scale(pre[k], c))
        chosen.append(k)
        result.pivots.append(p)
        for other in list(remaining):
            if not work[other]:
                remaining.remove(other)
                if pre is not None:
                    result.kernel.append(pre[other])

    result.basis = [work[k] for k in chosen]
    if pre is not None:
        result.preimages = [pre[k] for k in chosen]
    logger.debug("echelon: rank %d, pivots %s", len(chosen), result.pivots)
    return result


def image_echelon(d: NovMatrix, lattice: str = NORM, columns: Optional[Sequence[int]] = None) -> EchelonResult:
    """
    Echelon of the image of d with tracked preimages, in unit coordinates.

    Preimages are unit-lattice vectors of the source; kernel vectors likewise.
    """
    cols = list(range(len(d.cols))) if columns is None else list(columns)
    normalized = d.normalized_columns(lattice)
    return echelon([normalized[j] for j in cols], [{j: ONE} for j in cols])


def rank(d: NovMatrix, lattice: str = NORM) -> int:
    return echelon(d.normalized_columns(lattice)).rank


def r_orthogonal_complement(subspace: NovMatrix, r: float = None, lattice: str = NORM) -> NovMatrix:
    """
    Complement of the column span of `subspace`, spanned by scaled standard vectors.

    The decomposition is exactly orthogonal at finite rank, so the
    r-inequality |v| > r * max(|pi_W v|, |pi_C v|) holds for every r < 1.

    Returns:
        NovMatrix whose columns are the complement basis vectors (raw coordinates)
    """
    if r is not None and not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    ech = echelon(subspace.normalized_columns(lattice))
    rows = subspace.rows
    free = ech.complement(len(rows))
    weights = rows.weights(lattice)
    columns = [vec_denormalize({q: ONE}, weights) for q in free]
    return NovMatrix.from_columns(rows, rows.sub(free), columns)


def orthogonal_split(subspace: NovMatrix, v: Vector, lattice: str = NORM) -> Tuple[Vector, Vector]:
    """(pi_W v, pi_C v) for a raw vector v, both in raw coordinates."""
    weights = subspace.rows.weights(lattice)
    ech = echelon(subspace.normalized_columns(lattice))
    nv = vec_normalize(v, weights)
    w_part = ech.project(nv)
    c_part = vec_sub(nv, w_part)
    return vec_denormalize(w_part, weights), vec_denormalize(c_part, weights)


def satisfies_r_inequality(subspace: NovMatrix, v: Vector, r: float, lattice: str = NORM) -> bool:
    """|v| > r * max(|pi_W v|, |pi_C v|) (vacuous for v = 0)."""
    weights = subspace.rows.weights(lattice)
    w_part, c_part = orthogonal_split(subspace, v, lattice)
    total = vec_val(v, weights)
    if total == INF:
        return True
    bound = min(vec_val(w_part, weights), vec_val(c_part, weights))
    norm_v = math.exp(-float(total))
    norm_parts = 0.0 if bound == INF else math.exp(-float(bound))
    return norm_v > r * norm_parts
