"""
Reduction - The associated graded complex gr_hbar and the outside quotient.

gr_hbar keeps the relative-normalized differential modulo T^hbar, which
for a Floer-type complex is exactly the rational matrix d0. Coefficients
are NovikovInterval elements of Lambda_[0, hbar).
"""

from dataclasses import dataclass, replace
from fractions import Fraction
from math import floor
from typing import Dict, Optional, Sequence, Tuple

import sympy

from novarch.algebra.matrix import NovMatrix, ValuedBasis
from novarch.algebra.novikov import NovikovElement, NovikovInterval
from novarch.complexes.floer import FloerTypeComplex
from novarch.errors import NotAcyclic, NotSubcomplex
from novarch.utils.logger import get_logger

logger = get_logger(__name__)


def _rational(x: Fraction) -> sympy.Rational:
    return sympy.Rational(x.numerator, x.denominator)


@dataclass(frozen=True)
class ReducedComplex:
    """Complex over Lambda_[0, hbar) with relative valuations in [0, hbar)."""
    basis: ValuedBasis
    entries: Dict[Tuple[int, int], NovikovInterval]
    hbar: Fraction

    @property
    def rank(self) -> int:
        return len(self.basis)

    def rational_entries(self) -> Dict[Tuple[int, int], Fraction]:
        """Constant terms of the entries (the d0 matrix)."""
        out = {}
        for key, x in self.entries.items():
            c = x.representative.constant_term()
            if c:
                out[key] = c
        return out

    def block(self, k: int) -> sympy.Matrix:
        """Rational block d0_k: degree k -> degree k+1."""
        src = self.basis.indices_in_degree(k)
        tgt = self.basis.indices_in_degree(k + 1)
        rpos = {r: a for a, r in enumerate(tgt)}
        cpos = {c: b for b, c in enumerate(src)}
        m = sympy.zeros(len(tgt), len(src))
        for (i, j), c in self.rational_entries().items():
            if i in rpos and j in cpos:
                m[rpos[i], cpos[j]] = _rational(c)
        return m

    def homology_ranks(self) -> Dict[int, int]:
        """dim over the ground field of H(gr) per degree."""
        ranks = {}
        for k in self.basis.degrees():
            ranks[k] = self.block(k).rank() if self.basis.indices_in_degree(k + 1) else 0
        out = {}
        for k in self.basis.degrees():
            before = self.basis.reduce_degree(k - 1)
            out[k] = len(self.basis.indices_in_degree(k)) - ranks[k] - ranks.get(before, 0)
        return out

    def restricted(self, indices: Sequence[int]) -> "ReducedComplex":
        pos = {g: a for a, g in enumerate(indices)}
        entries = {
            (pos[i], pos[j]): x for (i, j), x in self.entries.items() if i in pos and j in pos
        }
        return ReducedComplex(self.basis.sub(indices), entries, self.hbar)

    def as_complex(self) -> FloerTypeComplex:
        """The rational differential as an exact complex with unit weights."""
        basis = self.basis.with_generators(
            replace(g, valuation=Fraction(0), relative_valuation=Fraction(0)) for g in self.basis
        )
        d = NovMatrix(basis, basis, {k: NovikovElement.constant(c) for k, c in self.rational_entries().items()})
        return FloerTypeComplex.from_differential(basis, d, self.hbar)


def associated_graded(c: FloerTypeComplex) -> ReducedComplex:
    """
    gr_hbar of a Floer-type complex.

    Relative valuations are moved into [0, hbar) by whole multiples of hbar.
    Entries are the relative-normalized entries of c taken before that move
    and read mod T^hbar, so the T^hbar d1 part vanishes; the moved weights
    only place each generator in its graded slice.
    """
    hbar = c.hbar
    gens = []
    for g in c.basis:
        rho = g.relative_valuation
        shift = floor(rho / hbar) * hbar
        gens.append(replace(g, relative_valuation=rho - shift))
    basis = c.basis.with_generators(gens)
    entries = {}
    for key, x in c.relative_normalized().items():
        kept = x.truncated_below(hbar)
        if not kept.is_zero():
            entries[key] = NovikovInterval(Fraction(0), hbar, kept)
    return ReducedComplex(basis, entries, hbar)


def _homology_witness(sub: ReducedComplex) -> Optional[str]:
    """Name a cycle of the subcomplex that is not a boundary, or None."""
    for k in sub.basis.degrees():
        src = sub.basis.indices_in_degree(k)
        if not src:
            continue
        cycles = sub.block(k).nullspace() if sub.basis.indices_in_degree(k + 1) else [
            sympy.eye(len(src))[:, a] for a in range(len(src))
        ]
        before = sub.basis.indices_in_degree(k - 1)
        boundaries = sub.block(k - 1) if before else sympy.zeros(len(src), 0)
        base_rank = boundaries.rank() if boundaries.cols else 0
        for z in cycles:
            stacked = boundaries.row_join(z) if boundaries.cols else z
            if stacked.rank() > base_rank:
                support = [sub.basis[src[a]].name for a in range(len(src)) if z[a] != 0]
                return "+".join(support)
    return None


def quotient_outside(reduced: ReducedComplex, outside_flags: Optional[Sequence[bool]] = None) -> ReducedComplex:
    """
    Quotient by the span of the outside generators.

    Args:
        reduced: gr_hbar complex
        outside_flags: per-generator flags (defaults to the generators' own)

    Raises:
        NotSubcomplex: a flagged generator's differential leaves the flagged span
        NotAcyclic: the flagged subcomplex has homology
    """
    flags = list(outside_flags) if outside_flags is not None else [g.outside for g in reduced.basis]
    if len(flags) != reduced.rank:
        raise ValueError("one flag per generator is required")
    flagged = [i for i, f in enumerate(flags) if f]
    kept = [i for i, f in enumerate(flags) if not f]
    if not flagged:
        return reduced

    flagged_set = set(flagged)
    for (i, j), x in sorted(reduced.entries.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        if j in flagged_set and i not in flagged_set and not x.is_zero():
            raise NotSubcomplex(
                "outside generators do not span a subcomplex",
                witness=f"{reduced.basis[j].name} -> {reduced.basis[i].name}",
            )

    sub = reduced.restricted(flagged)
    witness = _homology_witness(sub)
    if witness is not None:
        raise NotAcyclic("outside subcomplex carries homology", witness=witness)

    quotient = reduced.restricted(kept)
    before, after = reduced.homology_ranks(), quotient.homology_ranks()
    trimmed_before = {k: v for k, v in before.items() if v}
    trimmed_after = {k: v for k, v in after.items() if v}
    if trimmed_before != trimmed_after:
        raise NotAcyclic("quotient changed the homology", witness=str(trimmed_after))
    logger.debug("quotient_outside: dropped %d generators", len(flagged))
    return quotient
