"""
Floer - Valued complexes and Floer-type complexes with split differential.

In the relative lattice (generators normalized by their relative
valuation) a Floer-type differential reads d = d0 + T^hbar d1, with d0 a
matrix of rationals and d1 of valuation >= 0. The split is read off the
normalized entries: the constant term goes to d0, the rest is shifted by
-hbar into d1.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from novarch.algebra.matrix import NORM, RELATIVE, NovMatrix, ValuedBasis
from novarch.algebra.novikov import INF, NovikovElement
from novarch.algebra.smith import TorsionBarcode, homology_barcode
from novarch.config import get_settings, to_fraction
from novarch.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class ValuedComplex:
    """A valued basis with a degree-raising differential (raw entries)."""
    basis: ValuedBasis
    differential: NovMatrix

    def __post_init__(self):
        if self.differential.shape != (len(self.basis), len(self.basis)):
            raise ValueError(
                f"differential shape {self.differential.shape} does not match {len(self.basis)} generators"
            )

    @property
    def rank(self) -> int:
        return len(self.basis)

    def barcode(self, lattice: str = NORM, precision=None, slack=None) -> TorsionBarcode:
        return homology_barcode(self.basis, self.differential, lattice, precision, slack)

    def normalized(self, lattice: str = NORM) -> Dict[Tuple[int, int], NovikovElement]:
        return self.differential.normalized_entries(lattice)


def split_differential(basis: ValuedBasis, d: NovMatrix, hbar: Fraction) -> Tuple[NovMatrix, NovMatrix]:
    """
    Split the relative-normalized entries of d into (d0, d1).

    Both returned matrices hold relative-normalized entries over `basis`:
    d0 keeps the exponent-0 coefficient, d1 = T^-hbar (rest).
    """
    d0_entries = {}
    d1_entries = {}
    for key, x in d.normalized_entries(RELATIVE).items():
        c = x.constant_term()
        if c:
            d0_entries[key] = NovikovElement.constant(c)
        rest = x - NovikovElement.constant(c) if c else x
        if not rest.is_zero():
            d1_entries[key] = rest.shift(-hbar)
    return NovMatrix(basis, basis, d0_entries), NovMatrix(basis, basis, d1_entries)


@dataclass(frozen=True)
class FloerTypeComplex(ValuedComplex):
    """
    Valued complex with an hbar split d = d0 + T^hbar d1.

    d0 and d1 are stored as relative-normalized matrices; `d0_raw()` and
    `perturbation_raw()` convert them back to raw entries.
    """
    hbar: Fraction = Fraction(1)
    d0: Optional[NovMatrix] = field(default=None, compare=False)
    d1: Optional[NovMatrix] = field(default=None, compare=False)

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "hbar", to_fraction(self.hbar))
        if self.d0 is None or self.d1 is None:
            d0, d1 = split_differential(self.basis, self.differential, self.hbar)
            object.__setattr__(self, "d0", d0)
            object.__setattr__(self, "d1", d1)

    @classmethod
    def from_differential(cls, basis: ValuedBasis, d: NovMatrix, hbar) -> "FloerTypeComplex":
        return cls(basis=basis, differential=d, hbar=to_fraction(hbar))

    @classmethod
    def empty(cls, hbar=1, grading_modulus: int = 0) -> "FloerTypeComplex":
        basis = ValuedBasis((), grading_modulus)
        return cls(basis=basis, differential=NovMatrix.zero(basis, basis), hbar=to_fraction(hbar))

    @property
    def outside_flags(self) -> List[bool]:
        return [g.outside for g in self.basis]

    def relative_normalized(self) -> Dict[Tuple[int, int], NovikovElement]:
        return self.differential.normalized_entries(RELATIVE)

    def norm_normalized(self) -> Dict[Tuple[int, int], NovikovElement]:
        return self.differential.normalized_entries(NORM)

    def d0_raw(self) -> NovMatrix:
        return NovMatrix.from_normalized(self.basis, self.basis, dict(self.d0.items()), RELATIVE)

    def perturbation_raw(self) -> NovMatrix:
        """The T^hbar d1 part of d, in raw coordinates."""
        return NovMatrix.from_normalized(self.basis, self.basis, dict(self.d1.shift(self.hbar).items()), RELATIVE)

    def unperturbed(self) -> ValuedComplex:
        return ValuedComplex(self.basis, self.d0_raw())

    def with_hbar(self, hbar) -> "FloerTypeComplex":
        return FloerTypeComplex.from_differential(self.basis, self.differential, hbar)

    def scaled(self, t) -> "FloerTypeComplex":
        """Scale every valuation, exponent and hbar by t > 0."""
        t = to_fraction(t)
        if t <= 0:
            raise ValueError("scaling factor must be positive")
        basis = self.basis.scaled(t)
        d = self.differential.map_entries(lambda x: x.scaled_exponents(t)).rebased(basis, basis)
        return FloerTypeComplex.from_differential(basis, d, self.hbar * t)

    def __repr__(self) -> str:
        return f"FloerTypeComplex(rank={self.rank}, hbar={self.hbar}, nnz={self.differential.nnz()})"


# -- validation --------------------------------------------------------------

VALIDATION_ORDER = ("hbar", "degree", "norm", "square_zero", "filtration", "split")


class Violation(BaseModel):
    condition: str = Field(description="Which invariant failed")
    witness: str = Field(description="Generator (or pair) exhibiting the failure")
    detail: str = Field(default="", description="Human readable explanation")


class ValidationReport(BaseModel):
    """Outcome of validate_floer_type; `first_violation` follows VALIDATION_ORDER."""
    valid: bool = Field(description="True when every invariant holds")
    hbar: Fraction = Field(description="Declared hbar")
    violations: List[Violation] = Field(default_factory=list)

    @property
    def first_violation(self) -> Optional[Violation]:
        return self.violations[0] if self.violations else None


def validate_floer_type(c: FloerTypeComplex, precision=None) -> ValidationReport:
    """
    Check every Floer-type invariant and collect the failures with witnesses.

    Conditions, in reporting order: hbar > 0; d raises degree by one;
    |d e| <= |e| on the basis; d^2 = 0 mod T^E; d preserves the relative
    filtration; the relative-normalized entries split as d0 + T^hbar d1.
    """
    E = to_fraction(precision) if precision is not None else get_settings().precision
    basis = c.basis
    found: Dict[str, Violation] = {}

    def flag(condition: str, witness: str, detail: str) -> None:
        found.setdefault(condition, Violation(condition=condition, witness=witness, detail=detail))

    if c.hbar <= 0:
        flag("hbar", "-", f"hbar = {c.hbar} is not positive")

    for (i, j), _ in sorted(c.differential.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        if basis.degree(i) != basis.reduce_degree(basis.degree(j) + 1):
            flag("degree", basis[j].name, f"d({basis[j].name}) has a {basis[i].name} term of the wrong degree")

    for (i, j), x in sorted(c.norm_normalized().items(), key=lambda kv: (kv[0][1], kv[0][0])):
        if x.val() < 0:
            flag("norm", basis[j].name, f"|d {basis[j].name}| > |{basis[j].name}| via {basis[i].name}")

    if "degree" not in found:
        square = c.differential @ c.differential
        for (i, j), x in sorted(square.normalized_entries(NORM).items(), key=lambda kv: (kv[0][1], kv[0][0])):
            if x.val() < E:
                flag("square_zero", basis[j].name, f"d^2({basis[j].name}) has a {basis[i].name} term")

    for (i, j), x in sorted(c.relative_normalized().items(), key=lambda kv: (kv[0][1], kv[0][0])):
        if x.val() < 0:
            flag("filtration", basis[j].name, f"d lowers val_M of {basis[j].name}")

    for (i, j), x in sorted(c.d1.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        if x.val() < 0:
            flag(
                "split",
                basis[j].name,
                f"entry {basis[j].name} -> {basis[i].name} has exponents in (0, hbar) or below 0",
            )

    violations = [found[name] for name in VALIDATION_ORDER if name in found]
    if violations:
        logger.debug("validate_floer_type: first violation %s at %s", violations[0].condition, violations[0].witness)
    return ValidationReport(valid=not violations, hbar=c.hbar, violations=violations)


def min_positive_gap(c: ValuedComplex) -> Fraction:
    """Least positive exponent among the relative-normalized entries (INF if none)."""
    best = INF
    for x in c.differential.normalized_entries(RELATIVE).values():
        for e, _ in x.terms:
            if 0 < e < best:
                best = e
    return best
