"""
SDR - Special deformation retraction of a valued complex onto its homology.

Per degree the space splits orthogonally as B + C + D: B the image frame
(echelon of the incoming differential, with tracked primitives), C the
kernel reduced modulo B, D the standard vectors off both pivot sets. Then

    i(h_l) = c_l,   p(v) = sum_l (v - pi_B v)[q_l] h_l,   h(w_j) = pi_D(y_j)

where q_l are the C pivots and y_j the primitive of the frame vector w_j.
All of this happens in unit-lattice coordinates, so the norms of i and p
are 1 and |h| = e^beta exactly.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

from pydantic import BaseModel, Field

from novarch.algebra.echelon import EchelonResult, echelon
from novarch.algebra.matrix import NORM, Generator, NovMatrix, ValuedBasis, Vector, vec_sub, vec_val
from novarch.algebra.novikov import INF, ONE
from novarch.algebra.smith import check_square_zero
from novarch.complexes.floer import ValuedComplex
from novarch.config import get_settings, to_fraction
from novarch.utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_EPSILON = Fraction(1, 100)

SDR_IDENTITIES = ("p_i", "h_h", "h_i", "p_h", "homotopy")


@dataclass
class DegreeFrame:
    """Orthogonal splitting of one degree."""
    image: EchelonResult          # B: frame of im d_(k-1), preimages in degree k-1
    classes: EchelonResult        # C: kernel of d_k reduced mod B
    free: List[int] = field(default_factory=list)   # D: remaining standard indices


def degree_splitting(c: ValuedComplex, lattice: str = NORM) -> Dict[int, DegreeFrame]:
    """B + C + D frames for every degree of c."""
    basis = c.basis
    normalized = c.differential.normalized_columns(lattice)
    images: Dict[int, EchelonResult] = {}
    kernels: Dict[int, List[Vector]] = {}
    for k in basis.degrees():
        cols = basis.indices_in_degree(k)
        ech = echelon([normalized[j] for j in cols], [{j: ONE} for j in cols])
        # the image of d_k lives in degree k+1
        images[basis.reduce_degree(k + 1)] = ech
        kernels[k] = ech.kernel
    frames = {}
    for k in basis.degrees():
        image = images.get(k, EchelonResult(preimages=[]))
        reduced = [image.reduce(z) for z in kernels[k]]
        classes = echelon([v for v in reduced if v])
        taken = set(image.pivots) | set(classes.pivots)
        frames[k] = DegreeFrame(
            image=image,
            classes=classes,
            free=[i for i in basis.indices_in_degree(k) if i not in taken],
        )
    return frames


def _project_free(frames: Dict[int, DegreeFrame], basis: ValuedBasis, v: Vector) -> Vector:
    """pi_D of a vector supported in one degree."""
    if not v:
        return {}
    k = basis.degree(next(iter(v)))
    frame = frames[k]
    rest = frame.image.reduce(v)
    return vec_sub(rest, frame.classes.project(rest))


class SDRBounds(BaseModel):
    beta: Fraction = Field(description="Boundary depth of the retracted complex")
    epsilon: Fraction = Field(description="Slack in the norm bounds")
    i_val: object = Field(description="val(i), at least -epsilon")
    p_val: object = Field(description="val(p), at least -epsilon")
    h_val: object = Field(description="val(h), at least -(beta + epsilon)")


@dataclass
class SDRData:
    """
    Special deformation retraction (i, p, h) of `base` onto `homology`.

    The homology generators are named after the C pivots and inherit their
    degrees and weights, so i and p are isometric in the chosen lattice.
    """
    base: ValuedComplex
    homology: ValuedBasis
    i: NovMatrix
    p: NovMatrix
    h: NovMatrix
    lattice: str
    beta: Fraction
    epsilon: Fraction
    frames: Dict[int, DegreeFrame] = field(default_factory=dict, repr=False)

    @property
    def target(self) -> ValuedComplex:
        return ValuedComplex(self.homology, NovMatrix.zero(self.homology, self.homology))

    def bounds(self) -> SDRBounds:
        return SDRBounds(
            beta=self.beta,
            epsilon=self.epsilon,
            i_val=self.i.operator_val(self.lattice),
            p_val=self.p.operator_val(self.lattice),
            h_val=self.h.operator_val(self.lattice),
        )

    def bounds_hold(self) -> bool:
        b = self.bounds()
        return b.i_val >= -self.epsilon and b.p_val >= -self.epsilon and b.h_val >= -(self.beta + self.epsilon)

    def check(self, precision=None) -> Dict[str, bool]:
        return check_sdr_identities(
            self.i, self.p, self.h, self.base.differential,
            NovMatrix.zero(self.homology, self.homology), self.lattice, precision,
        )


def check_sdr_identities(i: NovMatrix, p: NovMatrix, h: NovMatrix, d_v: NovMatrix, d_h: NovMatrix,
                         lattice: str = NORM, precision=None) -> Dict[str, bool]:
    """
    The five SDR identities plus the chain-map property of i and p, mod T^E.

    Returns:
        {"p_i", "h_h", "h_i", "p_h", "homotopy", "i_chain", "p_chain"} -> bool
    """
    E = to_fraction(precision) if precision is not None else get_settings().precision
    id_v = NovMatrix.identity(d_v.rows)
    id_h = NovMatrix.identity(d_h.rows)
    return {
        "p_i": (p @ i).equals_mod(id_h, E, lattice),
        "h_h": (h @ h).is_zero_mod(E, lattice),
        "h_i": (h @ i).is_zero_mod(E, lattice),
        "p_h": (p @ h).is_zero_mod(E, lattice),
        "homotopy": (id_v - i @ p).equals_mod(d_v @ h + h @ d_v, E, lattice),
        "i_chain": (d_v @ i).equals_mod(i @ d_h, E, lattice),
        "p_chain": (p @ d_v).equals_mod(d_h @ p, E, lattice),
    }


def special_dr(G: ValuedComplex, epsilon=None, lattice: str = NORM, precision=None) -> SDRData:
    """
    Special deformation retraction of G onto its homology.

    Args:
        G: Complex to retract (d^2 = 0)
        epsilon: Norm slack (default 1/100); the construction is exact so
            the bounds hold with room to spare
        lattice: Which generator weights define the norms

    Returns:
        SDRData with beta = max over frames of the valuation loss of h
    """
    check_square_zero(G.basis, G.differential, lattice, precision)
    eps = to_fraction(epsilon) if epsilon is not None else DEFAULT_EPSILON
    basis = G.basis
    frames = degree_splitting(G, lattice)

    h_gens: List[Generator] = []
    i_cols: List[Vector] = []
    for k in basis.degrees():
        frame = frames[k]
        for vec, q in zip(frame.classes.basis, frame.classes.pivots):
            h_gens.append(basis[q])
            i_cols.append(vec)
    homology = ValuedBasis(tuple(h_gens), basis.grading_modulus)
    position = {basis.index(g.name): a for a, g in enumerate(h_gens)}

    p_cols: List[Vector] = []
    h_cols: List[Vector] = [dict() for _ in range(len(basis))]
    beta = Fraction(0)
    for j in range(len(basis)):
        frame = frames[basis.degree(j)]
        rest = frame.image.reduce({j: ONE})
        p_cols.append({position[q]: rest[q] for q in frame.classes.pivots if q in rest})
    for k in basis.degrees():
        frame = frames[k]
        for w, y, pivot in zip(frame.image.basis, frame.image.preimages, frame.image.pivots):
            primitive = _project_free(frames, basis, y)
            h_cols[pivot] = primitive
            loss = vec_val(w) - vec_val(primitive)
            if loss > beta:
                beta = loss

    i = NovMatrix.from_normalized_columns(basis, homology, i_cols, lattice)
    p = NovMatrix.from_normalized_columns(homology, basis, p_cols, lattice)
    h = NovMatrix.from_normalized_columns(basis, basis, h_cols, lattice)
    logger.debug("special_dr: %d generators -> %d classes, beta %s", len(basis), len(homology), beta)
    return SDRData(
        base=G, homology=homology, i=i, p=p, h=h,
        lattice=lattice, beta=beta, epsilon=eps, frames=frames,
    )


def homology_frame(c: ValuedComplex, lattice: str = NORM) -> List[Tuple[str, Vector]]:
    """Representatives of a homology basis: (pivot name, unit-lattice vector)."""
    frames = degree_splitting(c, lattice)
    out = []
    for k in c.basis.degrees():
        frame = frames[k]
        for vec, q in zip(frame.classes.basis, frame.classes.pivots):
            out.append((c.basis[q].name, vec))
    return out


def quotient_valuation(c: ValuedComplex, v: Vector, lattice: str = NORM) -> object:
    """Valuation of the class of the unit-lattice vector v modulo im d."""
    if not v:
        return INF
    frames = degree_splitting(c, lattice)
    k = c.basis.degree(next(iter(v)))
    return frames[k].image.quotient_val(v)
