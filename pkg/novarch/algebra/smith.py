"""
Smith - Smith normal form over the valuation ring and torsion barcodes.

Works on unit-lattice matrices (every entry of valuation >= 0). Each step
pivots on an entry of least valuation (ties: lowest row, then column),
scales its unit part away and clears its row and column, updating U and V
so that U @ M @ V = diag(T^l1, ..., T^lk, 0, ...).
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field

from novarch.algebra.matrix import NORM, NovMatrix, ValuedBasis
from novarch.algebra.novikov import NovikovElement, ONE, ZERO
from novarch.config import get_settings, to_fraction
from novarch.errors import NotAComplex, PrecisionExhausted
from novarch.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class SmithForm:
    """U @ M @ V = D with D diagonal; exponents are the diagonal valuations."""
    u: np.ndarray
    v: np.ndarray
    diagonal: np.ndarray
    exponents: List[Fraction]

    @property
    def rank(self) -> int:
        return len(self.exponents)

    @property
    def zero_block(self) -> int:
        """Columns with no pivot."""
        return self.diagonal.shape[1] - self.rank

    def torsion(self) -> List[Fraction]:
        return [e for e in self.exponents if e > 0]


def _object_identity(n: int) -> np.ndarray:
    out = np.full((n, n), ZERO, dtype=object)
    for i in range(n):
        out[i, i] = ONE
    return out


def _as_object_array(matrix) -> np.ndarray:
    if isinstance(matrix, np.ndarray):
        return matrix.copy()
    rows = [list(r) for r in matrix]
    m = len(rows)
    n = len(rows[0]) if rows else 0
    out = np.full((m, n), ZERO, dtype=object)
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            out[i, j] = NovikovElement.coerce(x)
    return out


def smith_normal_form(matrix: Union[NovMatrix, Sequence[Sequence[NovikovElement]], np.ndarray],
                      lattice: str = NORM,
                      precision: Optional[Fraction] = None,
                      slack: Optional[Fraction] = None) -> SmithForm:
    """
    Smith normal form over Lambda_{>=0}.

    Args:
        matrix: NovMatrix (normalized in `lattice`) or a dense unit-lattice matrix
        lattice: Which generator weights normalize a NovMatrix
        precision: Working precision E (settings by default)
        slack: Exponents >= E - slack are refused (settings by default)

    Returns:
        SmithForm with nondecreasing exponents

    Raises:
        ValueError: an entry has negative valuation
        PrecisionExhausted: a pivot sits within the slack of E
    """
    settings = get_settings()
    horizon = to_fraction(precision if precision is not None else settings.precision) - to_fraction(
        slack if slack is not None else settings.slack
    )
    dense = matrix.dense_normalized(lattice) if isinstance(matrix, NovMatrix) else matrix
    D = _as_object_array(dense)
    if D.ndim != 2:
        D = D.reshape((0, 0))
    m, n = D.shape
    for i in range(m):
        for j in range(n):
            if not D[i, j].is_zero() and D[i, j].val() < 0:
                raise ValueError(f"entry ({i}, {j}) has negative valuation {D[i, j].val()}")
    U = _object_identity(m)
    V = _object_identity(n)
    exponents: List[Fraction] = []

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                x = D[i, j]
                if not x.is_zero():
                    key = (x.val(), i, j)
                    if best is None or key < best:
                        best = key
        if best is None:
            break
        val, i, j = best
        if val >= horizon:
            raise PrecisionExhausted(
                f"pivot valuation {val} is within the slack of the working precision",
                witness=f"({i}, {j})",
            )
        if i != t:
            D[[t, i]] = D[[i, t]]
            U[[t, i]] = U[[i, t]]
        if j != t:
            D[:, [t, j]] = D[:, [j, t]]
            V[:, [t, j]] = V[:, [j, t]]

        unit_inverse = D[t, t].shift(-val).invert()
        D[t, :] = unit_inverse * D[t, :]
        U[t, :] = unit_inverse * U[t, :]
        D[t, t] = NovikovElement.monomial(1, val)

        for i in range(t + 1, m):
            c = D[i, t]
            if c.is_zero():
                continue
            factor = c.shift(-val)
            D[i, :] = D[i, :] - factor * D[t, :]
            U[i, :] = U[i, :] - factor * U[t, :]
            D[i, t] = ZERO
        for j in range(t + 1, n):
            c = D[t, j]
            if c.is_zero():
                continue
            factor = c.shift(-val)
            D[:, j] = D[:, j] - factor * D[:, t]
            V[:, j] = V[:, j] - factor * V[:, t]
            D[t, j] = ZERO
        exponents.append(val)
        t += 1

    logger.debug("smith: %dx%d, exponents %s", m, n, [str(e) for e in exponents])
    return SmithForm(u=U, v=V, diagonal=D, exponents=exponents)


class TorsionBarcode(BaseModel):
    """Torsion exponents and free ranks of homology over Lambda_{>=0}, per degree."""
    torsion: Dict[int, List[Fraction]] = Field(default_factory=dict, description="Sorted torsion exponents per degree")
    free: Dict[int, int] = Field(default_factory=dict, description="Free rank per degree")

    def max_exponent(self) -> Fraction:
        return max((e for bars in self.torsion.values() for e in bars), default=Fraction(0))

    def bars(self) -> List[Fraction]:
        return sorted(e for bars in self.torsion.values() for e in bars)

    def distinct(self) -> Dict[int, List[Fraction]]:
        return {k: sorted(set(v)) for k, v in self.torsion.items()}

    def total_free(self) -> int:
        return sum(self.free.values())

    def scaled(self, t: Fraction) -> "TorsionBarcode":
        return TorsionBarcode(
            torsion={k: [e * t for e in v] for k, v in self.torsion.items()},
            free=dict(self.free),
        )


def degree_blocks(basis: ValuedBasis, d: NovMatrix) -> Dict[int, NovMatrix]:
    """
    Split a degree-raising differential into blocks d_k: C^k -> C^(k+1).

    Raises:
        NotAComplex: an entry does not raise degree by one
    """
    for (i, j), _ in d.items():
        if basis.degree(i) != basis.reduce_degree(basis.degree(j) + 1):
            raise NotAComplex(
                "differential does not raise degree by one",
                witness=f"{basis[j].name} -> {basis[i].name}",
            )
    blocks = {}
    for k in basis.degrees():
        src = basis.indices_in_degree(k)
        tgt = basis.indices_in_degree(k + 1)
        blocks[k] = d.restrict(tgt, src)
    return blocks


def check_nonnegative(d: NovMatrix, lattice: str = NORM) -> None:
    """Raise ValueError unless every normalized entry lies in Lambda_{>=0}."""
    for (i, j), x in sorted(d.normalized_entries(lattice).items()):
        if not x.is_zero() and x.val() < 0:
            raise ValueError(f"entry ({i}, {j}) has negative valuation {x.val()}")


def check_square_zero(basis: ValuedBasis, d: NovMatrix, lattice: str = NORM, precision=None) -> None:
    """Raise NotAComplex unless d^2 = 0 mod T^E."""
    E = to_fraction(precision) if precision is not None else get_settings().precision
    square = d @ d
    for (i, j), x in square.normalized_entries(lattice).items():
        if x.val() < E:
            raise NotAComplex("d^2 is not zero", witness=f"d^2({basis[j].name}) has a {basis[i].name} term")


def homology_barcode(basis: ValuedBasis, d: NovMatrix, lattice: str = NORM,
                     precision=None, slack=None) -> TorsionBarcode:
    """
    Torsion barcode of (C, d) over Lambda_{>=0} in the chosen lattice.

    Torsion of H^(k+1) comes from the positive Smith exponents of d_k; the
    free rank of H^k is dim C^k - rank d_k - rank d_(k-1).
    """
    check_square_zero(basis, d, lattice, precision)
    blocks = degree_blocks(basis, d)
    ranks: Dict[int, int] = {}
    torsion: Dict[int, List[Fraction]] = {k: [] for k in basis.degrees()}
    for k, block in blocks.items():
        if block.shape[0] == 0 or block.shape[1] == 0:
            ranks[k] = 0
            continue
        form = smith_normal_form(block, lattice, precision, slack)
        ranks[k] = form.rank
        target = basis.reduce_degree(k + 1)
        torsion.setdefault(target, []).extend(form.torsion())
    free = {}
    for k in basis.degrees():
        before = basis.reduce_degree(k - 1)
        free[k] = len(basis.indices_in_degree(k)) - ranks.get(k, 0) - ranks.get(before, 0)
    return TorsionBarcode(
        torsion={k: sorted(v) for k, v in sorted(torsion.items()) if k in free},
        free=dict(sorted(free.items())),
    )
