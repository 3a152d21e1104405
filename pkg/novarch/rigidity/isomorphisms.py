"""
Isomorphisms - Constructive rigidity for perturbed products on affinoid models.

Given a c-close product *, the map phi sends a reduced monomial to the
*-product of the images of its variables: x -> x, and the second
generator of an annulus pair (z1, z2) to the solution w of z1 * w = T^s e,
where e is the unit of *. Equations are solved by successive correction

    w <- w - T^-s z2 (z1 * w - T^s e)

whose defect shrinks by c e^s per step. Inverting z1 costs T^-s, so the
solve runs on a copy of the model carried to precision E + s and its result
is truncated back to T^E.
"""

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from novarch.algebra.novikov import INF
from novarch.config import get_settings
from novarch.errors import IterationStalled, NotClose
from novarch.rigidity.affinoid import (
    ANNULUS,
    LAURENT,
    POLYANNULUS,
    TATE,
    AffinoidModel,
    Element,
    Monomial,
    ProductPerturbation,
    element_map,
    iter_pairs,
)
from novarch.utils.logger import get_logger
from novarch.utils.parallel import parallel_map

logger = get_logger(__name__)


class SolveTrace(BaseModel):
    """Defect valuations of an iterative solve, one per step."""
    equation: str
    defects: List[str] = Field(default_factory=list)
    steps: int = 0
    contraction: str = Field(description="Predicted per-step valuation gain, gap - s")


@dataclass
class RigidityIsomorphism:
    """phi on the monomial basis up to the truncation degree, with its check ledger."""
    model: AffinoidModel
    perturbation: ProductPerturbation
    unit: Element
    images: Dict[int, Element]
    table: Dict[Monomial, Element]
    trusted_precision: Fraction
    traces: List[SolveTrace] = field(default_factory=list)
    checks: Dict[str, bool] = field(default_factory=dict)
    distance: object = INF

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def __call__(self, x: Element) -> Element:
        return element_map(self.model, self.image_of, x)

    def image_of(self, m: Monomial) -> Element:
        if m in self.table:
            return self.table[m]
        return _monomial_image(self.perturbation, self.images, self.unit, m)

    def to_dict(self) -> dict:
        model = self.model
        return {
            "kind": model.kind,
            "closeness_gap": str(self.perturbation.gap),
            "trusted_precision": str(self.trusted_precision),
            "unit": model.format_element(self.unit),
            "generators": {model.names[s]: model.format_element(x) for s, x in sorted(self.images.items())},
            "table": {model.format_monomial(m): model.format_element(x) for m, x in self.table.items()},
            "distance_from_identity": "inf" if self.distance == INF else str(self.distance),
            "solves": [t.model_dump() for t in self.traces],
            "checks": dict(self.checks),
        }


def _max_steps(gain, precision) -> int:
    cap = get_settings().max_series_terms
    if gain == INF:
        return 1
    return min(cap, math.ceil(Fraction(precision) / gain) + 2)


def star_unit(P: ProductPerturbation) -> Element:
    """The unit of *, by e <- e - (e * 1 - 1)."""
    model = P.model
    one = model.one()
    e = one
    if P.gap == INF:
        return e
    for _ in range(_max_steps(P.gap, model.precision)):
        defect = model.sub(P.star(e, one), one)
        if not defect:
            return e
        e = model.sub(e, defect)
    raise IterationStalled("unit iteration did not converge", witness=model.val(model.sub(P.star(e, one), one)))


def solve_relation(P: ProductPerturbation, f: Element, g: Element, s, unit: Element,
                   label: str = "") -> Tuple[Element, SolveTrace]:
    """
    Solve f * w = T^s e for w, starting from w = g with f g = T^s.

    Raises:
        IterationStalled: a step failed to gain valuation
    """
    model = P.model
    s = Fraction(s)
    target = model.shift(unit, s)
    gain = P.gap - s if P.gap != INF else INF
    trace = SolveTrace(equation=label or "f * w = T^s e", contraction="inf" if gain == INF else str(gain))
    # corrections are shifted by T^-s, so nothing below T^(E - s) can be resolved
    floor = model.precision - s
    w = g
    previous = None
    for step in range(_max_steps(gain, model.precision)):
        defect = model.sub(P.star(f, w), target)
        v = model.val(defect)
        trace.defects.append("inf" if v == INF else str(v))
        trace.steps = step
        if not defect or v >= floor:
            return w, trace
        if previous is not None and v <= previous:
            raise IterationStalled(f"defect stopped shrinking while solving {trace.equation}", witness=v)
        previous = v
        correction = model.shift(model.mul(g, defect), -s)
        w = model.sub(w, correction)
    raise IterationStalled(f"no convergence while solving {trace.equation}", witness=previous)


def _monomial_image(P: ProductPerturbation, images: Dict[int, Element], unit: Element, m: Monomial) -> Element:
    out = unit
    for slot, power in enumerate(m):
        for _ in range(power):
            out = P.star(out, images[slot])
    return out


def _build(A: AffinoidModel, P: ProductPerturbation, images: Dict[int, Element], unit: Element,
           traces: List[SolveTrace], loss: Fraction) -> RigidityIsomorphism:
    model = A
    trusted = model.precision - loss
    basis = model.basis()
    table: Dict[Monomial, Element] = {}
    for m in basis:
        table[m] = _monomial_image(P, images, unit, m)

    def small(x: Element) -> bool:
        return model.val(x) >= trusted

    isometry = all(model.val(table[m]) == model.monomial_val(m) for m in basis)
    homomorphism = True
    for a, b in iter_pairs(basis, model.degree):
        product_ab, gained = model.reduce(tuple(x + y for x, y in zip(a, b)))
        lhs = model.shift(table.get(product_ab) or _monomial_image(P, images, unit, product_ab), gained)
        rhs = P.star(table[a], table[b])
        if not small(model.sub(lhs, rhs)):
            homomorphism = False
            logger.debug("homomorphism fails on %s, %s", model.format_monomial(a), model.format_monomial(b))
            break
    distance = INF
    for m in basis:
        d = model.val(model.sub(table[m], model.monomial(m)))
        if d < trusted:
            distance = min(distance, d - model.monomial_val(m))
    unit_ok = all(small(model.sub(P.star(unit, model.monomial(m)), model.monomial(m))) for m in basis)
    # e^-gap is attained by *, so * is c-close for every c > e^-gap and
    # |phi - id| < c for all of them means |phi - id| <= e^-gap
    checks = {
        "unit": unit_ok,
        "isometry": isometry,
        "homomorphism": homomorphism,
        "near_identity": distance >= P.gap,
    }
    failed = [k for k, v in checks.items() if not v]
    if failed:
        logger.warning("rigidity checks failed: %s", ", ".join(failed))
    return RigidityIsomorphism(
        model=model, perturbation=P, unit=unit, images=images, table=table,
        trusted_precision=trusted, traces=traces, checks=checks, distance=distance,
    )


def _require_close(P: ProductPerturbation, threshold, what: str) -> None:
    # strict: c < e^-threshold
    if P.gap == INF:
        return
    if P.gap == -INF or P.gap <= threshold:
        raise NotClose(
            f"{what} needs closeness c < e^-{threshold}, got c = e^-{P.gap}",
            witness=P.gap,
        )


def _require_kind(A: AffinoidModel, kinds: Tuple[str, ...]) -> None:
    if A.kind not in kinds:
        raise ValueError(f"model kind {A.kind!r} is not one of {kinds}")


def rigidity_iso_tate(A: AffinoidModel, P: ProductPerturbation) -> RigidityIsomorphism:
    """
    Isomorphism x^I -> x^{*I} from the reference product to *.

    Raises:
        NotClose: c >= 1
    """
    _require_kind(A, (TATE,))
    _require_close(P, Fraction(0), "a Tate algebra")
    unit = star_unit(P)
    images = {slot: A.monomial(A.slot_monomial(slot)) for slot in range(A.rank)}
    return _build(A, P, images, unit, [], Fraction(0))


def lift_precision(P: ProductPerturbation, extra) -> ProductPerturbation:
    """The same product on a copy of the model carried to precision E + extra."""
    model = replace(P.model, precision=P.model.precision + Fraction(extra))
    return replace(P, model=model)


def _solve_pairs(P: ProductPerturbation, threads: Optional[int]):
    A = P.model
    unit = star_unit(P)

    def solve(pair):
        z1 = A.monomial(A.slot_monomial(pair.first))
        z2 = A.monomial(A.slot_monomial(pair.second))
        label = f"{A.names[pair.first]} * w = T^{pair.exponent} e"
        return pair.second, solve_relation(P, z1, z2, pair.exponent, unit, label)

    return parallel_map(solve, list(A.pairs), threads)


def _pair_iso(A: AffinoidModel, P: ProductPerturbation, threads: Optional[int]) -> RigidityIsomorphism:
    unit = star_unit(P)
    images = {slot: A.monomial(A.slot_monomial(slot)) for slot in range(A.rank)}
    traces = []
    lifted = lift_precision(P, max(p.exponent for p in A.pairs))
    for slot, (w, trace) in _solve_pairs(lifted, threads):
        images[slot] = A.clean(w)
        traces.append(trace)
    return _build(A, P, images, unit, traces, Fraction(0))


def rigidity_iso_annulus(A: AffinoidModel, P: ProductPerturbation) -> RigidityIsomorphism:
    """
    Isomorphism z1^i -> z1^{*i}, z2^j -> w^{*j} with z1 * w = T^(r1+r2) e.

    Raises:
        NotClose: c >= e^-(r1 + r2)
        IterationStalled: the correction stopped gaining valuation
    """
    _require_kind(A, (ANNULUS,))
    _require_close(P, A.pairs[0].exponent, "an annulus")
    return _pair_iso(A, P, 1)


def rigidity_iso_polyannulus(A: AffinoidModel, P: ProductPerturbation, threads: Optional[int] = None) -> RigidityIsomorphism:
    """Factor-wise annulus solves; needs c < e^-max_j (r1_j + r2_j)."""
    _require_kind(A, (ANNULUS, POLYANNULUS))
    _require_close(P, max(p.exponent for p in A.pairs), "a polyannulus")
    return _pair_iso(A, P, threads)


def rigidity_iso_laurent(A: AffinoidModel, P: ProductPerturbation) -> RigidityIsomorphism:
    """
    Laurent domain: solve u * f = T^r e and map x^I g^j -> x^{*I} * u^{*j}.

    Raises:
        NotClose: c >= e^-r
    """
    _require_kind(A, (LAURENT,))
    _require_close(P, A.pairs[0].exponent, "a Laurent domain")
    return _pair_iso(A, P, 1)


def twist_element(A: AffinoidModel, exponent, terms: Dict) -> Element:
    """w = 1 + T^exponent u for u given as {monomial: coefficient}."""
    u = A.element(terms)
    return A.add(A.one(), A.shift(u, exponent))


def perturbation_close_to(A: AffinoidModel, exponent, terms: Optional[Dict] = None) -> ProductPerturbation:
    """Twisted product a*b = ab(1 + T^exponent u), u = 1 when no terms are given."""
    u_terms = terms if terms else {A.unit_monomial(): 1}
    return ProductPerturbation.twisted(A, twist_element(A, exponent, u_terms))


def random_unit_terms(A: AffinoidModel, seed: Optional[int] = None, support: int = 1) -> Dict[Monomial, Fraction]:
    """
    A seeded u of norm 1: a nonzero constant plus `support` basis monomials
    of positive degree and norm 1, with small nonzero rational coefficients.
    """
    rng = np.random.default_rng(get_settings().seed if seed is None else seed)

    def coefficient() -> Fraction:
        return Fraction(int(rng.integers(1, 4)) * int(rng.choice([-1, 1])), int(rng.integers(1, 4)))

    terms = {A.unit_monomial(): coefficient()}
    candidates = [m for m in A.basis() if sum(m) and A.monomial_val(m) == 0]
    if candidates and support > 0:
        picks = rng.choice(len(candidates), size=min(support, len(candidates)), replace=False)
        for idx in sorted(int(i) for i in picks):
            terms[candidates[idx]] = coefficient()
    return terms
