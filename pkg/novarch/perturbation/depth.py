"""
Depth - Boundary depth of a valued complex, computed three ways.

boundary_depth_def reads the definition off an orthogonal image frame:
after valuation-greedy echelon every boundary x = sum a_j w_j has
|x| = max |a_j|, and its best primitive is sum a_j (y_j mod ker d), so the
supremum is attained on the frame vectors themselves.
boundary_depth_torsion takes the largest Smith exponent instead, and
boundary_depth_bruteforce enumerates primitives on a monomial grid.
"""

import itertools
from fractions import Fraction
from functools import reduce
from math import ceil, lcm
from typing import Dict, List, Optional, Tuple

from novarch.algebra.echelon import echelon
from novarch.algebra.matrix import NORM, Vector, vec_val
from novarch.algebra.novikov import INF, NovikovElement, ONE
from novarch.algebra.smith import check_nonnegative, check_square_zero
from novarch.complexes.floer import ValuedComplex
from novarch.config import get_settings, to_fraction
from novarch.errors import PrecisionExhausted
from novarch.utils.logger import get_logger

logger = get_logger(__name__)

BRUTEFORCE_MAX_GENERATORS = 4
BRUTEFORCE_MAX_CANDIDATES = 250_000


def _horizon(precision=None, slack=None) -> Fraction:
    settings = get_settings()
    E = to_fraction(precision) if precision is not None else settings.precision
    s = to_fraction(slack) if slack is not None else settings.slack
    return E - s


def degree_frames(c: ValuedComplex, lattice: str = NORM):
    """
    Per source degree k: (image echelon of d_k with tracked preimages,
    kernel echelon of d_k), both in unit-lattice coordinates.
    """
    normalized = c.differential.normalized_columns(lattice)
    frames = {}
    for k in c.basis.degrees():
        cols = c.basis.indices_in_degree(k)
        image = echelon([normalized[j] for j in cols], [{j: ONE} for j in cols])
        kernel = echelon(image.kernel)
        frames[k] = (image, kernel)
    return frames


def boundary_depth_def(c: ValuedComplex, lattice: str = NORM, precision=None, slack=None) -> Fraction:
    """
    sup over boundaries x of inf over primitives y of val(x) - val(y).

    Raises:
        ValueError: a normalized entry of d has negative valuation
        NotAComplex: d^2 != 0 mod T^E
        PrecisionExhausted: the supremum is within the slack of E
    """
    check_nonnegative(c.differential, lattice)
    check_square_zero(c.basis, c.differential, lattice, precision)
    beta = Fraction(0)
    witness = None
    for k, (image, kernel) in degree_frames(c, lattice).items():
        for w, y, p in zip(image.basis, image.preimages, image.pivots):
            loss = vec_val(w) - kernel.quotient_val(y)
            if loss > beta:
                beta, witness = loss, c.basis[p].name
    if beta >= _horizon(precision, slack):
        raise PrecisionExhausted(f"boundary depth {beta} is within the slack of the working precision", witness)
    logger.debug("boundary_depth_def: %s (attained at %s)", beta, witness)
    return beta


def boundary_depth_torsion(c: ValuedComplex, lattice: str = NORM, precision=None, slack=None) -> Fraction:
    """Largest torsion exponent of homology over Lambda_{>=0} (0 if torsion-free)."""
    return c.barcode(lattice, precision, slack).max_exponent()


def _canonical(v: Vector) -> Tuple:
    return tuple(sorted((i, x.terms) for i, x in v.items()))


def boundary_depth_bruteforce(c: ValuedComplex, lattice: str = NORM, span: Optional[int] = None) -> Fraction:
    """
    Exhaustive oracle for at most four generators.

    Primitives range over vectors with coefficients in {0, +-T^(k/q)} for
    0 <= k/q <= span, q the common denominator of the normalized exponents.
    """
    n = c.rank
    if n > BRUTEFORCE_MAX_GENERATORS:
        raise ValueError(f"brute force is limited to {BRUTEFORCE_MAX_GENERATORS} generators")
    normalized = c.differential.normalized_entries(lattice)
    if not normalized:
        return Fraction(0)
    exponents = [e for x in normalized.values() for e, _ in x.terms]
    q = reduce(lcm, (Fraction(e).denominator for e in exponents), 1)
    top = span if span is not None else ceil(max(exponents)) + 1
    levels = [Fraction(k, q) for k in range(0, top * q + 1)]
    coefficients: List[Optional[NovikovElement]] = [None]
    for e in levels:
        coefficients.append(NovikovElement.monomial(1, e))
        coefficients.append(NovikovElement.monomial(-1, e))
    total = len(coefficients) ** n
    if total > BRUTEFORCE_MAX_CANDIDATES:
        raise ValueError(f"{total} candidates exceed the brute force limit")

    columns = c.differential.normalized_columns(lattice)
    best: Dict[Tuple, Tuple[object, object]] = {}
    for choice in itertools.product(coefficients, repeat=n):
        y = {j: a for j, a in enumerate(choice) if a is not None}
        if not y:
            continue
        x: Vector = {}
        for j, a in y.items():
            for i, entry in columns[j].items():
                term = a * entry
                x[i] = x[i] + term if i in x else term
        x = {i: v for i, v in x.items() if not v.is_zero()}
        if not x:
            continue
        key = _canonical(x)
        val_y = vec_val(y)
        if key not in best or val_y > best[key][1]:
            best[key] = (vec_val(x), val_y)
    beta = Fraction(0)
    for val_x, val_y in best.values():
        if val_x - val_y > beta:
            beta = val_x - val_y
    logger.debug("boundary_depth_bruteforce: %d boundaries, beta %s", len(best), beta)
    return beta if beta != INF else Fraction(0)
