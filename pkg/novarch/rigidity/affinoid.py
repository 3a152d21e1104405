"""
Affinoid - Truncated monomial models of Tate, annulus and Laurent algebras.

A model has named variables ("slots") with valuations, and annulus pairs
(z1, z2) subject to z1 z2 = T^s. Monomials are reduced so that no pair has
both exponents positive; the monomial basis is orthogonal.

Elements are dicts {monomial: NovikovElement} living in the unit ball and
computed modulo T^E, which is an ideal there. Elements stay finite: every
operation is a finite polynomial computation. The truncation degree N only
bounds the monomials on which identities are checked.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import exp
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from novarch.algebra.novikov import INF, NovikovElement
from novarch.config import get_settings, to_fraction
from novarch.utils.logger import get_logger

logger = get_logger(__name__)

Monomial = Tuple[int, ...]
Element = Dict[Monomial, NovikovElement]

TATE = "tate"
ANNULUS = "annulus"
POLYANNULUS = "polyannulus"
LAURENT = "laurent"


@dataclass(frozen=True)
class AnnulusPair:
    first: int
    second: int
    exponent: Fraction


@dataclass(frozen=True)
class AffinoidModel:
    """
    Truncated monomial algebra.

    Attributes:
        names: Slot names
        valuations: Slot valuations (|x| = e^-val)
        pairs: Annulus relations z1 z2 = T^s
        degree: Degree N bounding the checked monomials
        precision: E
        kind: tate, annulus, polyannulus or laurent
    """
    names: Tuple[str, ...]
    valuations: Tuple[Fraction, ...]
    pairs: Tuple[AnnulusPair, ...] = ()
    degree: int = 4
    precision: Fraction = Fraction(10)
    kind: str = TATE

    def __post_init__(self):
        object.__setattr__(self, "valuations", tuple(to_fraction(v) for v in self.valuations))
        object.__setattr__(self, "precision", to_fraction(self.precision))
        if len(self.names) != len(self.valuations):
            raise ValueError("every slot needs a valuation")
        if any(v < 0 for v in self.valuations):
            raise ValueError("slot valuations must be >= 0 (unit ball models)")
        if self.degree < 0:
            raise ValueError("truncation degree must be >= 0")
        paired = set()
        for pair in self.pairs:
            if pair.exponent <= 0:
                raise ValueError("annulus relation exponents must be positive")
            for slot in (pair.first, pair.second):
                if slot in paired:
                    raise ValueError(f"slot {self.names[slot]} appears in two annulus pairs")
                paired.add(slot)

    # -- constructors -----------------------------------------------------

    @classmethod
    def tate(cls, n: int, degree: int = 4, precision=None) -> "AffinoidModel":
        E = get_settings().precision if precision is None else precision
        return cls(tuple(f"x{i + 1}" for i in range(n)), (Fraction(0),) * n, (), degree, E, TATE)

    @classmethod
    def polyannulus(cls, radii: Sequence[Tuple], degree: int = 4, precision=None) -> "AffinoidModel":
        """
        Product of annuli; factor j has generators z1_j, z2_j of norm 1 with
        z1_j z2_j = T^(r1 + r2).

        Args:
            radii: (r1, r2) per factor
        """
        E = get_settings().precision if precision is None else precision
        names: List[str] = []
        pairs: List[AnnulusPair] = []
        single = len(radii) == 1
        for j, (r1, r2) in enumerate(radii):
            suffix = "" if single else f"_{j + 1}"
            names += [f"z1{suffix}", f"z2{suffix}"]
            pairs.append(AnnulusPair(2 * j, 2 * j + 1, to_fraction(r1) + to_fraction(r2)))
        return cls(
            tuple(names), (Fraction(0),) * len(names), tuple(pairs), degree, E,
            ANNULUS if single else POLYANNULUS,
        )

    @classmethod
    def annulus(cls, r1, r2, degree: int = 4, precision=None) -> "AffinoidModel":
        return cls.polyannulus([(r1, r2)], degree, precision)

    @classmethod
    def laurent(cls, n: int, r, degree: int = 4, precision=None) -> "AffinoidModel":
        """
        Laurent domain {|x| <= 1, |f| >= e^-r} of the unit ball, f = 1 + x1.

        Slots are f, x2..xn and g = T^r / f, related by f g = T^r; the
        variable x1 is the element f - 1.
        """
        E = get_settings().precision if precision is None else precision
        names = ("f",) + tuple(f"x{i + 1}" for i in range(1, n)) + ("g",)
        pair = AnnulusPair(0, len(names) - 1, to_fraction(r))
        return cls(names, (Fraction(0),) * len(names), (pair,), degree, E, LAURENT)

    # -- monomials --------------------------------------------------------

    @property
    def rank(self) -> int:
        return len(self.names)

    def slot(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValueError(f"unknown variable {name!r}") from None

    def unit_monomial(self) -> Monomial:
        return (0,) * self.rank

    def slot_monomial(self, slot: int, power: int = 1) -> Monomial:
        return tuple(power if i == slot else 0 for i in range(self.rank))

    def monomial_val(self, m: Monomial) -> Fraction:
        return sum((a * v for a, v in zip(m, self.valuations)), Fraction(0))

    def reduce(self, m: Sequence[int]) -> Tuple[Monomial, Fraction]:
        """Cancel annulus pairs: returns (reduced monomial, exponent of T gained)."""
        m = list(m)
        gained = Fraction(0)
        for pair in self.pairs:
            k = min(m[pair.first], m[pair.second])
            if k:
                m[pair.first] -= k
                m[pair.second] -= k
                gained += pair.exponent * k
        return tuple(m), gained

    def basis(self, degree: Optional[int] = None) -> List[Monomial]:
        """Reduced monomials of degree <= degree and valuation < E, by degree."""
        top = self.degree if degree is None else degree
        out = []
        for m in product(range(top + 1), repeat=self.rank):
            if sum(m) > top:
                continue
            if any(m[p.first] and m[p.second] for p in self.pairs):
                continue
            if self.monomial_val(m) >= self.precision:
                continue
            out.append(m)
        out.sort(key=lambda m: (sum(m), tuple(-a for a in m)))
        return out

    def format_monomial(self, m: Monomial) -> str:
        parts = [name if a == 1 else f"{name}^{a}" for name, a in zip(self.names, m) if a]
        return "*".join(parts) or "1"

    def parse_monomial(self, text: str) -> Monomial:
        m = [0] * self.rank
        text = text.strip()
        if text in ("", "1"):
            return tuple(m)
        for factor in text.split("*"):
            name, _, power = factor.strip().partition("^")
            m[self.slot(name.strip())] += int(power) if power else 1
        reduced, gained = self.reduce(m)
        if gained:
            raise ValueError(f"monomial {text!r} is not reduced")
        return reduced

    # -- elements ---------------------------------------------------------

    def clean(self, x: Element) -> Element:
        """Drop the terms of valuation >= E."""
        out: Element = {}
        for m, c in x.items():
            cap = self.precision - self.monomial_val(m)
            terms = [(e, a) for e, a in c.terms if e < cap]
            if terms:
                out[m] = NovikovElement(terms)
        return out

    def element(self, terms: Dict) -> Element:
        """Build an element from {monomial or monomial text: coefficient}."""
        out: Element = {}
        for key, value in terms.items():
            m = self.parse_monomial(key) if isinstance(key, str) else tuple(key)
            reduced, gained = self.reduce(m)
            c = NovikovElement.coerce(value).shift(gained)
            out[reduced] = out[reduced] + c if reduced in out else c
        return self.clean(out)

    def one(self) -> Element:
        return {self.unit_monomial(): NovikovElement.one()}

    def variable(self, name: str) -> Element:
        if self.kind == LAURENT and name == "x1":
            return self.sub(self.monomial(self.slot_monomial(0)), self.one())
        return self.monomial(self.slot_monomial(self.slot(name)))

    def monomial(self, m: Monomial) -> Element:
        return {tuple(m): NovikovElement.one()}

    def add(self, a: Element, b: Element) -> Element:
        out = dict(a)
        for m, c in b.items():
            s = out[m] + c if m in out else c
            if s.is_zero():
                out.pop(m, None)
            else:
                out[m] = s
        return out

    def sub(self, a: Element, b: Element) -> Element:
        return self.add(a, self.scale(b, -1))

    def scale(self, a: Element, c) -> Element:
        c = NovikovElement.coerce(c)
        products = {m: x * c for m, x in a.items()}
        return self.clean({m: x for m, x in products.items() if not x.is_zero()})

    def shift(self, a: Element, exponent) -> Element:
        return self.clean({m: x.shift(exponent) for m, x in a.items()})

    def mul(self, a: Element, b: Element) -> Element:
        """Reference product."""
        acc: Dict[Monomial, NovikovElement] = {}
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                m, gained = self.reduce(tuple(x + y for x, y in zip(m1, m2)))
                c = (c1 * c2).shift(gained)
                acc[m] = acc[m] + c if m in acc else c
        return self.clean({m: c for m, c in acc.items() if not c.is_zero()})

    def val(self, x: Element):
        """Valuation of the orthogonal expansion; +inf for zero."""
        best = INF
        for m, c in x.items():
            if not c.is_zero():
                best = min(best, c.val() + self.monomial_val(m))
        return best

    def is_zero_mod(self, x: Element) -> bool:
        return not self.clean(x)

    def format_element(self, x: Element) -> List[dict]:
        return [
            {"monomial": self.format_monomial(m), "coefficient": c.to_pairs()}
            for m, c in sorted(x.items(), key=lambda kv: (sum(kv[0]), kv[0]))
        ]


@dataclass(frozen=True)
class ProductPerturbation:
    """
    A perturbed product on an affinoid model, given by a bilinear table on
    basis pairs or by a twist a*b = a b w.

    `gap` is the closeness exponent: |a*b - ab| <= e^-gap |ab| on every basis
    pair, so the closeness constant is c = e^-gap.
    """
    model: AffinoidModel
    table: Dict[Tuple[Monomial, Monomial], Element] = field(default_factory=dict)
    twist: Optional[Element] = None
    gap: object = INF

    @classmethod
    def identity(cls, model: AffinoidModel) -> "ProductPerturbation":
        return cls(model=model)

    @classmethod
    def twisted(cls, model: AffinoidModel, w: Element) -> "ProductPerturbation":
        """a*b = a b w for w = 1 + (small); commutative and associative with unit w^-1."""
        w = model.clean(w)
        gap = model.val(model.sub(w, model.one()))
        if gap <= 0:
            logger.warning("twist has |w - 1| >= 1")
        return cls(model=model, twist=w, gap=gap)

    @classmethod
    def from_table(cls, model: AffinoidModel, table: Dict[Tuple[Monomial, Monomial], Element]) -> "ProductPerturbation":
        """Explicit products of basis pairs; pairs not listed multiply as in the reference product."""
        gap = INF
        clean_table = {}
        for (m1, m2), value in table.items():
            value = model.clean(value)
            clean_table[(tuple(m1), tuple(m2))] = value
            reference = model.mul(model.monomial(m1), model.monomial(m2))
            diff = model.sub(value, reference)
            if not diff:
                continue
            base = model.val(reference)
            if base == INF:
                gap = -INF
                continue
            gap = min(gap, model.val(diff) - base)
        return cls(model=model, table=clean_table, gap=gap)

    @property
    def closeness(self) -> float:
        """c = e^-gap."""
        if self.gap == INF:
            return 0.0
        if self.gap == -INF:
            return INF
        return exp(-float(self.gap))

    def star(self, a: Element, b: Element) -> Element:
        model = self.model
        if self.twist is not None:
            return model.mul(model.mul(a, b), self.twist)
        if not self.table:
            return model.mul(a, b)
        out: Element = {}
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                value = self.table.get((m1, m2))
                if value is None:
                    value = model.mul(model.monomial(m1), model.monomial(m2))
                out = model.add(out, model.scale(value, c1 * c2))
        return out

    def star_power(self, x: Element, k: int, unit: Element) -> Element:
        out = unit
        for _ in range(k):
            out = self.star(out, x)
        return out


def element_map(model: AffinoidModel, func: Callable[[Monomial], Element], x: Element) -> Element:
    """Linear extension of a map on monomials."""
    out: Element = {}
    for m, c in x.items():
        out = model.add(out, model.scale(func(m), c))
    return out


def iter_pairs(basis: Iterable[Monomial], degree: int) -> Iterable[Tuple[Monomial, Monomial]]:
    basis = list(basis)
    for a in basis:
        for b in basis:
            if sum(a) + sum(b) <= degree:
                yield a, b
