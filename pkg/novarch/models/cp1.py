"""
CP1 - The truncated CP^1 model family.

Generators y^i = x^i (even, i = 0..N) and z^i = x^i dx (odd, i = 0..N-2)
with

    d z^i = T^r y^i + T^(1-r) y^(i+2)

in norm coordinates. Rescaling y^i by T^(-i r) and z^i by T^(-(i+1) r)
makes every relative valuation zero and the differential d z^i = y^i +
T y^(i+2). Odd generators stop at i = N - 2 so that d stays inside the
truncation; the cokernel of every truncation therefore has rank 2, and
whether the classes of 1 and x survive the limit is read off from the
stability of their quotient norms as N grows.

Cokernel classes that do not survive the limit are truncation-edge
classes. They are counted per degree and removed from page totals and
from the transferred homology when a truncation is read as the limit.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional

from pydantic import BaseModel, Field

from novarch.algebra.matrix import NORM, Generator, NovMatrix, ValuedBasis
from novarch.algebra.novikov import INF, ONE, T
from novarch.complexes.floer import FloerTypeComplex
from novarch.config import get_settings, to_fraction
from novarch.perturbation.perturb import PerturbedSDR
from novarch.perturbation.sdr import quotient_valuation
from novarch.spectral.pages import SpectralSequenceState
from novarch.utils.logger import get_logger

logger = get_logger(__name__)

MIN_TRUNCATION = 4


def cp1_hbar(r: Fraction) -> Fraction:
    """|1 - 2r|, the gap between the two norm exponents; 1 at r = 1/2."""
    gap = abs(1 - 2 * r)
    return gap if gap else Fraction(1)


@dataclass(frozen=True)
class CP1Model:
    r: Fraction
    N: int
    E: Fraction
    complex: FloerTypeComplex

    @property
    def hbar(self) -> Fraction:
        return self.complex.hbar

    def metadata(self) -> dict:
        return {"family": "cp1", "r": str(self.r), "N": self.N, "E": str(self.E)}


def cp1_model(r, N: int, E=None) -> CP1Model:
    """
    Build the truncated CP^1 complex.

    Args:
        r: Rational in (0, 1)
        N: Largest power of x, at least 4
        E: Precision recorded with the model (settings by default)
    """
    r = to_fraction(r)
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    if N < MIN_TRUNCATION:
        raise ValueError(f"truncation must be at least {MIN_TRUNCATION}")
    E = to_fraction(E) if E is not None else get_settings().precision
    gens: List[Generator] = [Generator(f"y{i}", 0, -i * r) for i in range(N + 1)]
    gens += [Generator(f"z{i}", 1, -(i + 1) * r) for i in range(N - 1)]
    basis = ValuedBasis(tuple(gens), grading_modulus=2)
    entries = {}
    for i in range(N - 1):
        col = N + 1 + i
        entries[(i, col)] = ONE
        entries[(i + 2, col)] = T(1)
    d = NovMatrix(basis, basis, entries)
    model = CP1Model(r=r, N=N, E=E, complex=FloerTypeComplex.from_differential(basis, d, cp1_hbar(r)))
    logger.debug("cp1 model r=%s N=%d hbar=%s", r, N, model.hbar)
    return model


def cp1_family(r, E=None) -> Callable[[int], FloerTypeComplex]:
    """N -> complex; member N embeds into member N + 2 by generator names."""
    return lambda n: cp1_model(r, n, E).complex


class CP1Homology(BaseModel):
    r: Fraction
    sizes: List[int]
    quotient_values: Dict[str, List[str]] = Field(description="Norm quotient valuation of each class, per size")
    stable: Dict[str, bool]
    rank: int = Field(description="Number of classes whose quotient norm is stable in N")


def cp1_homology_rank(r, N: int = 6, E=None) -> CP1Homology:
    """
    Homology rank of the limit, decided on the classes of 1 and x over the
    truncations N, N + 2 and N + 4.
    """
    r = to_fraction(r)
    sizes = [N, N + 2, N + 4]
    members = [cp1_model(r, n, E).complex for n in sizes]
    values: Dict[str, List] = {"y0": [], "y1": []}
    for member in members:
        for name in values:
            v = quotient_valuation(member, {member.basis.index(name): ONE}, NORM)
            values[name].append(v)
    stable = {name: len(set(vals)) == 1 and vals[0] != INF for name, vals in values.items()}
    return CP1Homology(
        r=r,
        sizes=sizes,
        quotient_values={k: ["inf" if v == INF else str(v) for v in vals] for k, vals in values.items()},
        stable=stable,
        rank=sum(stable.values()),
    )


class CP1Limit(BaseModel):
    """A truncation read as the limit: edge classes removed."""
    r: str
    N: int
    edge: Dict[int, int] = Field(description="Truncation-edge classes per degree")
    limit_rank: int
    page_totals: List[int] = Field(default_factory=list, description="Full copies per page without edge classes")
    transferred_rank: Optional[int] = Field(default=None, description="Rank of H(H, d_def) without edge classes")
    d_def_invertible: Optional[bool] = None


def cp1_edge_classes(model: CP1Model) -> Dict[int, int]:
    """Free classes of the truncation beyond those of the limit (1 and x are even)."""
    limit = cp1_homology_rank(model.r, model.N, model.E).rank
    edge = {k: v for k, v in model.complex.barcode(NORM, model.E).free.items() if v}
    edge[0] = edge.get(0, 0) - limit
    return {k: v for k, v in sorted(edge.items()) if v > 0}


def cp1_limit_view(model: CP1Model, state: Optional[SpectralSequenceState] = None,
                   transfer: Optional[PerturbedSDR] = None) -> CP1Limit:
    """
    Page totals and transferred homology of a truncation with its edge
    classes removed. Edge classes are free, so they sit on every page and
    in the kernel of d_def.
    """
    edge = cp1_edge_classes(model)
    count = sum(edge.values())
    view = CP1Limit(
        r=str(model.r), N=model.N, edge=edge,
        limit_rank=cp1_homology_rank(model.r, model.N, model.E).rank,
    )
    if state is not None:
        view.page_totals = [max(p.total_full() - count, 0) for p in state.pages]
    if transfer is not None:
        view.transferred_rank = max(transfer.barcodes["deformed"].total_free() - count, 0)
        view.d_def_invertible = view.transferred_rank == 0
    logger.debug("cp1 limit view r=%s N=%d edge=%s", model.r, model.N, edge)
    return view
