"""
Family - Complexes over the cone ring and their specializations.

A family complex has differential entries in R(P). Specializing at a
point v of P gives an ordinary Floer-type complex; the deformed
differential at v can be no smaller than tau_P(v), the minimum over the
nonzero classes that occur in the differential.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field

from novarch.algebra.matrix import RELATIVE, NovMatrix, ValuedBasis
from novarch.algebra.novikov import INF
from novarch.complexes.floer import FloerTypeComplex, min_positive_gap, validate_floer_type
from novarch.config import to_fraction
from novarch.flux.cone_ring import ConeRing, ConeRingElement, specialize
from novarch.flux.tau import PLConcaveFunction, tau_eval
from novarch.perturbation.perturb import hpt_pipeline
from novarch.utils.logger import get_logger
from novarch.utils.parallel import parallel_map

logger = get_logger(__name__)


@dataclass(frozen=True)
class FamilyComplex:
    """Valued basis with a differential whose entries live in the cone ring."""
    ring: ConeRing
    basis: ValuedBasis
    entries: Dict[Tuple[int, int], ConeRingElement]
    hbar: Optional[Fraction] = None

    def __post_init__(self):
        n = len(self.basis)
        for (i, j), x in self.entries.items():
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"entry ({i}, {j}) is outside the basis")
            if x.ring is not self.ring:
                raise ValueError("entries must belong to the family's cone ring")
        if self.hbar is not None:
            object.__setattr__(self, "hbar", to_fraction(self.hbar))

    def classes(self) -> List[Tuple[int, ...]]:
        """Nonzero classes occurring in the differential, in first-seen order."""
        seen: List[Tuple[int, ...]] = []
        for _, x in sorted(self.entries.items()):
            for u in x.classes():
                if any(u) and u not in seen:
                    seen.append(u)
        return seen

    def specialize_at(self, v: Sequence) -> FloerTypeComplex:
        d = NovMatrix(self.basis, self.basis, {key: specialize(x, v) for key, x in self.entries.items()})
        hbar = self.hbar
        if hbar is None:
            gap = min_positive_gap(FloerTypeComplex(basis=self.basis, differential=d))
            hbar = Fraction(1) if gap == INF else gap
        return FloerTypeComplex.from_differential(self.basis, d, hbar)

    def tau_function(self) -> PLConcaveFunction:
        return tau_eval(self.classes(), self.ring.polytope, self.ring.lattice)


class VertexTau(BaseModel):
    vertex: List[str]
    hbar: Fraction
    d_def_val: str = Field(description="val(d_def) at the vertex, 'inf' when it vanishes")
    tau_p: str = Field(description="tau_P at the vertex")
    holds: bool = Field(description="val(d_def) >= tau_P")
    valid: bool = Field(description="The specialization is a Floer-type complex")


class FamilyTauReport(BaseModel):
    vertices: List[VertexTau]
    pieces: List[dict] = Field(default_factory=list)

    @property
    def holds(self) -> bool:
        return all(v.holds and v.valid for v in self.vertices)


def _fmt(value) -> str:
    return "inf" if value == INF else str(value)


def family_tau(family: FamilyComplex, precision=None, threads: int = 1) -> FamilyTauReport:
    """Run the perturbation pipeline at every vertex of P and compare with tau_P."""
    tau_p = family.tau_function()

    def at_vertex(v) -> VertexTau:
        c = family.specialize_at(v)
        report = validate_floer_type(c, precision)
        if not report.valid:
            logger.warning("specialization at %s is not Floer-type: %s", v, report.first_violation.condition)
            return VertexTau(
                vertex=[str(x) for x in v], hbar=c.hbar, d_def_val="-", tau_p=_fmt(tau_p(v)),
                holds=False, valid=False,
            )
        result = hpt_pipeline(c, RELATIVE, precision=precision)
        value = result.tau
        bound = tau_p(v)
        return VertexTau(
            vertex=[str(x) for x in v], hbar=c.hbar, d_def_val=_fmt(value), tau_p=_fmt(bound),
            holds=value >= bound, valid=True,
        )

    rows = parallel_map(at_vertex, list(family.ring.polytope.vertices), threads)
    return FamilyTauReport(vertices=rows, pieces=tau_p.to_dict())
