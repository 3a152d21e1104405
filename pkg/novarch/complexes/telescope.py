"""
Telescope - Finite rays of complexes and their telescope.

The telescope of C_1 -> C_2 -> ... -> C_n has generators s_i:a for every
stage generator a and q_i:a for every stage but the last, with

    delta(s_i a) = s_i (d a)
    delta(q_i a) = q_i (d a) + (-1)^deg(a) (kappa_i(a) - a)

q sits on the left and has degree -1 in cohomological grading, so q_i:a
lives in degree deg(a) - 1.
"""

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from pydantic import BaseModel, Field

from novarch.algebra.matrix import NORM, Generator, NovMatrix, ValuedBasis
from novarch.algebra.novikov import NovikovElement, ONE
from novarch.complexes.floer import FloerTypeComplex
from novarch.config import get_settings, to_fraction
from novarch.errors import NotChainMap
from novarch.utils.logger import get_logger

logger = get_logger(__name__)

STAGE_PREFIX = "s"
CONE_PREFIX = "q"


@dataclass(frozen=True)
class OneRay:
    """Stages C_1..C_n with continuation maps kappa_i: C_i -> C_(i+1)."""
    stages: Tuple[FloerTypeComplex, ...] = ()
    maps: Tuple[NovMatrix, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        object.__setattr__(self, "maps", tuple(self.maps))
        expected = max(len(self.stages) - 1, 0)
        if len(self.maps) != expected:
            raise ValueError(f"a ray with {len(self.stages)} stages needs {expected} maps, got {len(self.maps)}")
        for i, kappa in enumerate(self.maps):
            src, tgt = self.stages[i], self.stages[i + 1]
            if kappa.shape != (tgt.rank, src.rank):
                raise ValueError(f"map {i} has shape {kappa.shape}, expected {(tgt.rank, src.rank)}")

    def __len__(self) -> int:
        return len(self.stages)

    def truncated(self, n: int) -> "OneRay":
        """The first n stages."""
        n = max(0, min(n, len(self.stages)))
        return OneRay(self.stages[:n], self.maps[: max(n - 1, 0)])


def inclusion_map(source: FloerTypeComplex, target: FloerTypeComplex) -> NovMatrix:
    """Map sending each generator to the target generator of the same name."""
    entries = {}
    for j, gen in enumerate(source.basis):
        if gen.name not in target.basis:
            raise ValueError(f"generator {gen.name!r} has no counterpart in the target")
        entries[(target.basis.index(gen.name), j)] = ONE
    return NovMatrix(target.basis, source.basis, entries)


def check_chain_map(kappa: NovMatrix, source: FloerTypeComplex, target: FloerTypeComplex,
                    precision=None, label: str = "") -> None:
    """Raise NotChainMap unless d_target kappa = kappa d_source mod T^E."""
    E = to_fraction(precision) if precision is not None else get_settings().precision
    defect = target.differential @ kappa - kappa @ source.differential
    for (i, j), x in defect.normalized_entries(NORM).items():
        if x.val() < E:
            raise NotChainMap(
                f"map {label} does not commute with the differentials",
                witness=f"{source.basis[j].name} -> {target.basis[i].name}",
            )


@dataclass(frozen=True)
class TelescopeComplex:
    """The telescope complex with its stage bookkeeping."""
    complex: FloerTypeComplex
    stage_count: int
    stage_offsets: Tuple[int, ...] = field(default=())

    @property
    def basis(self) -> ValuedBasis:
        return self.complex.basis

    @property
    def differential(self) -> NovMatrix:
        return self.complex.differential


def _stage_name(prefix: str, i: int, name: str) -> str:
    return f"{prefix}{i}:{name}"


def build_telescope(ray: OneRay, precision=None) -> TelescopeComplex:
    """
    Telescope of a finite ray.

    An empty ray gives the empty complex; a single stage gives that stage
    with its generators renamed s0:a and no q copies.

    Raises:
        NotChainMap: some kappa_i fails d kappa = kappa d mod T^E
    """
    if not ray.stages:
        logger.warning("telescope of an empty ray is the empty complex")
        return TelescopeComplex(FloerTypeComplex.empty(), 0)
    for i, kappa in enumerate(ray.maps):
        check_chain_map(kappa, ray.stages[i], ray.stages[i + 1], precision, label=f"kappa_{i}")

    modulus = ray.stages[0].basis.grading_modulus
    if any(s.basis.grading_modulus != modulus for s in ray.stages):
        raise ValueError("all stages must share the grading modulus")
    hbar = min(s.hbar for s in ray.stages)

    generators: List[Generator] = []
    s_offsets: List[int] = []
    q_offsets: List[int] = []
    for i, stage in enumerate(ray.stages):
        s_offsets.append(len(generators))
        generators.extend(replace(g, name=_stage_name(STAGE_PREFIX, i, g.name)) for g in stage.basis)
        if i < len(ray.maps):
            q_offsets.append(len(generators))
            generators.extend(
                replace(g, name=_stage_name(CONE_PREFIX, i, g.name), degree=g.degree - 1) for g in stage.basis
            )
    basis = ValuedBasis(tuple(generators), modulus)

    entries: Dict[Tuple[int, int], NovikovElement] = {}

    def put(i: int, j: int, x: NovikovElement) -> None:
        entries[(i, j)] = entries[(i, j)] + x if (i, j) in entries else x

    for n, stage in enumerate(ray.stages):
        s0 = s_offsets[n]
        for (i, j), x in stage.differential.items():
            put(s0 + i, s0 + j, x)
        if n >= len(ray.maps):
            continue
        q0, s1 = q_offsets[n], s_offsets[n + 1]
        for (i, j), x in stage.differential.items():
            put(q0 + i, q0 + j, x)
        for j in range(stage.rank):
            sign = -1 if stage.basis.degree(j) % 2 else 1
            put(s0 + j, q0 + j, NovikovElement.constant(-sign))
        for (i, j), x in ray.maps[n].items():
            sign = -1 if stage.basis.degree(j) % 2 else 1
            put(s1 + i, q0 + j, x.scale(sign))

    d = NovMatrix(basis, basis, entries)
    logger.debug("telescope: %d stages, %d generators", len(ray.stages), len(basis))
    return TelescopeComplex(
        FloerTypeComplex.from_differential(basis, d, hbar), len(ray.stages), tuple(s_offsets)
    )


class StabilityReport(BaseModel):
    """Telescope homology on n-1 versus n stages."""
    stages: int = Field(description="Stages in the longer telescope")
    stable: bool = Field(description="Free ranks and distinct torsion exponents agree")
    free_before: Dict[int, int] = Field(default_factory=dict)
    free_after: Dict[int, int] = Field(default_factory=dict)
    torsion_before: Dict[int, List[Fraction]] = Field(default_factory=dict)
    torsion_after: Dict[int, List[Fraction]] = Field(default_factory=dict)


def telescope_stability(ray: OneRay, lattice: str = NORM, precision=None) -> StabilityReport:
    """Compare telescope homology with and without the last stage."""
    n = len(ray)
    after = build_telescope(ray, precision).complex.barcode(lattice, precision)
    if n <= 1:
        before = after
    else:
        before = build_telescope(ray.truncated(n - 1), precision).complex.barcode(lattice, precision)
    free_before = {k: v for k, v in before.free.items() if v}
    free_after = {k: v for k, v in after.free.items() if v}
    torsion_before = {k: v for k, v in before.distinct().items() if v}
    torsion_after = {k: v for k, v in after.distinct().items() if v}
    stable = free_before == free_after and torsion_before == torsion_after
    if not stable:
        logger.debug("telescope unstable at %d stages", n)
    return StabilityReport(
        stages=n,
        stable=stable,
        free_before=free_before,
        free_after=free_after,
        torsion_before=torsion_before,
        torsion_after=torsion_after,
    )


def telescope_sequence(stages: Sequence[FloerTypeComplex]) -> OneRay:
    """Ray of nested stages joined by name inclusions."""
    stages = tuple(stages)
    maps = tuple(inclusion_map(stages[i], stages[i + 1]) for i in range(len(stages) - 1))
    return OneRay(stages, maps)
