"""
Cone ring - The group ring Lambda[C(P)] and its specialization maps.

An element is a finite sum of c_u e^[u] with u in C(P). Specialization at
a point v of P sends e^[u] to T^(l_v(u)); it is a ring map because l_v is
additive in u.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, Sequence, Tuple

from novarch.algebra.novikov import NovikovElement
from novarch.errors import ClassOutsideCone, PointOutsidePolytope
from novarch.flux.polytope import FluxPolytope, RelLattice, as_point, cone_membership, failing_vertex

ClassVector = Tuple[int, ...]


@dataclass(frozen=True)
class ConeRing:
    """R(P) for a polytope P in the flux space of a relative lattice L."""
    polytope: FluxPolytope
    lattice: RelLattice

    def element(self, terms: Dict[Sequence[int], object]) -> "ConeRingElement":
        return ConeRingElement(self, {tuple(int(a) for a in u): NovikovElement.coerce(c) for u, c in terms.items()})

    def basis_element(self, u: Sequence[int]) -> "ConeRingElement":
        return self.element({tuple(u): 1})

    def one(self) -> "ConeRingElement":
        return self.basis_element((0,) * self.lattice.m)

    def zero(self) -> "ConeRingElement":
        return ConeRingElement(self, {})

    def check_point(self, v: Sequence) -> Tuple:
        point = as_point(v)
        if len(point) != self.lattice.k:
            raise ValueError(f"point has dimension {len(point)}, expected {self.lattice.k}")
        if not self.polytope.contains(point):
            raise PointOutsidePolytope("specialization point is outside the polytope", witness=point)
        return point


class ConeRingElement:
    """Finite sum of coefficient * e^[class], every class in C(P)."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: ConeRing, terms: Dict[ClassVector, NovikovElement]):
        clean = {}
        for u, c in terms.items():
            if len(u) != ring.lattice.m:
                raise ValueError(f"class {u} does not have {ring.lattice.m} entries")
            if c.is_zero():
                continue
            if not cone_membership(u, ring.polytope, ring.lattice):
                raise ClassOutsideCone(
                    "class is not in the cone C(P)",
                    witness=f"{u} at vertex {failing_vertex(u, ring.polytope, ring.lattice)}",
                )
            clean[u] = c
        self.ring = ring
        self.terms = clean

    def classes(self) -> Iterable[ClassVector]:
        return self.terms.keys()

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "ConeRingElement") -> "ConeRingElement":
        out = dict(self.terms)
        for u, c in other.terms.items():
            out[u] = out[u] + c if u in out else c
        return ConeRingElement(self.ring, out)

    def __neg__(self) -> "ConeRingElement":
        return ConeRingElement(self.ring, {u: -c for u, c in self.terms.items()})

    def __sub__(self, other: "ConeRingElement") -> "ConeRingElement":
        return self + (-other)

    def __mul__(self, other: "ConeRingElement") -> "ConeRingElement":
        out: Dict[ClassVector, NovikovElement] = {}
        for u, a in self.terms.items():
            for w, b in other.terms.items():
                key = tuple(x + y for x, y in zip(u, w))
                out[key] = out[key] + a * b if key in out else a * b
        return ConeRingElement(self.ring, out)

    def __repr__(self) -> str:
        body = " + ".join(f"({c})e^{list(u)}" for u, c in sorted(self.terms.items())) or "0"
        return f"ConeRingElement({body})"


def specialize(x: ConeRingElement, v: Sequence) -> NovikovElement:
    """
    sp_v(sum c_u e^[u]) = sum c_u T^(l_v(u)).

    Raises:
        PointOutsidePolytope: v is not in P
    """
    point = x.ring.check_point(v)
    out = NovikovElement.zero()
    for u, c in x.terms.items():
        out = out + c.shift(x.ring.lattice.pairing(point, u))
    return out
