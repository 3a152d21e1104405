"""
Hausdorff - Truncation diagnostics for families of complexes.

A family is indexed by a truncation size N, and each member embeds into
the next by generator name. The homology classes of the first member are
followed through the family: a class survives when its quotient norm
(modulo boundaries, norm lattice) does not move as N grows; for a
surviving class the supremum of val_M over its representatives is its
quotient valuation in the relative lattice. When that supremum grows
monotonically past the threshold the induced filtration on homology is
not Hausdorff in the limit.
"""

from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

from pydantic import BaseModel, Field

from novarch.algebra.matrix import NORM, RELATIVE, Vector, vec_denormalize, vec_normalize
from novarch.algebra.novikov import INF
from novarch.complexes.floer import ValuedComplex
from novarch.config import get_settings, to_fraction
from novarch.perturbation.sdr import degree_splitting, homology_frame
from novarch.utils.logger import get_logger

logger = get_logger(__name__)


class Verdict(str, Enum):
    DIVERGES = "DIVERGES"
    BOUNDED = "BOUNDED"


class ClassTrack(BaseModel):
    """Quotient valuations of one class along the family."""
    name: str
    sizes: List[int]
    norm_values: List[str] = Field(description="Quotient valuation in the norm lattice, per size")
    relative_values: List[str] = Field(description="sup of val_M over representatives, per size")
    surviving: bool
    verdict: Verdict


class HausdorffDiagnostic(BaseModel):
    sizes: List[int]
    threshold: Fraction
    classes: List[ClassTrack] = Field(default_factory=list)
    verdict: Verdict

    @property
    def surviving(self) -> List[str]:
        return [t.name for t in self.classes if t.surviving]


def _fmt(value) -> str:
    return "inf" if value == INF else str(value)


def _embedded(raw: Dict[str, object], member: ValuedComplex, lattice: str) -> Optional[Vector]:
    basis = member.basis
    if any(name not in basis for name in raw):
        return None
    weights = basis.weights(lattice)
    return vec_normalize({basis.index(name): x for name, x in raw.items()}, weights)


def _quotient_val(member: ValuedComplex, raw: Dict[str, object], lattice: str):
    vec = _embedded(raw, member, lattice)
    if vec is None:
        return None
    if not vec:
        return INF
    frames = degree_splitting(member, lattice)
    k = member.basis.degree(next(iter(vec)))
    return frames[k].image.quotient_val(vec)


def track_classes(members: Sequence[ValuedComplex], sizes: Sequence[int]) -> List[Dict]:
    """
    Follow the norm-lattice homology frame of members[0] through the family.

    Returns:
        One dict per class: name, norm and relative quotient valuations per member
    """
    first = members[0]
    weights = first.basis.weights(NORM)
    tracks = []
    for name, vec in homology_frame(first, NORM):
        raw_idx = vec_denormalize(vec, weights)
        raw = {first.basis[i].name: x for i, x in raw_idx.items()}
        norm_vals, rel_vals = [], []
        for member in members:
            norm_vals.append(_quotient_val(member, raw, NORM))
            rel_vals.append(_quotient_val(member, raw, RELATIVE))
        tracks.append({"name": name, "norm": norm_vals, "relative": rel_vals})
    return tracks


def class_survives(norm_values: Sequence) -> bool:
    return all(v is not None for v in norm_values) and len(set(norm_values)) == 1 and norm_values[0] != INF


def detect_hausdorff_failure(family: Callable[[int], ValuedComplex], n_max: int, n_min: Optional[int] = None,
                             step: int = 1, threshold=None) -> HausdorffDiagnostic:
    """
    Follow homology classes through members family(n_min), ..., family(n_max).

    Args:
        family: size -> complex; member N embeds into member N + step by names
        n_max: Largest size
        n_min: Smallest size (default n_max - 2 * step)
        step: Size increment
        threshold: DIVERGES threshold on val_M (settings by default)
    """
    limit = to_fraction(threshold) if threshold is not None else get_settings().hausdorff_threshold
    start = n_min if n_min is not None else n_max - 2 * step
    sizes = list(range(start, n_max + 1, step))
    if len(sizes) < 2:
        raise ValueError("at least two sizes are needed")
    members = [family(n) for n in sizes]
    tracks = []
    overall = Verdict.BOUNDED
    for t in track_classes(members, sizes):
        surviving = class_survives(t["norm"])
        rel = t["relative"]
        verdict = Verdict.BOUNDED
        if surviving and all(v is not None and v != INF for v in rel):
            increasing = all(b > a for a, b in zip(rel, rel[1:]))
            if increasing and rel[-1] >= limit:
                verdict = Verdict.DIVERGES
                overall = Verdict.DIVERGES
        tracks.append(
            ClassTrack(
                name=t["name"],
                sizes=sizes,
                norm_values=[_fmt(v) if v is not None else "missing" for v in t["norm"]],
                relative_values=[_fmt(v) if v is not None else "missing" for v in rel],
                surviving=surviving,
                verdict=verdict,
            )
        )
    logger.debug("hausdorff: %d classes, verdict %s", len(tracks), overall.value)
    return HausdorffDiagnostic(sizes=sizes, threshold=limit, classes=tracks, verdict=overall)
