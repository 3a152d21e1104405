"""
Matrix - Valued bases and sparse Novikov matrices.

A generator e carries two weights: its action valuation g (the norm is
|e| = e^-g) and its relative valuation rho (the val_M filtration). A
matrix entry M_ij seen in the g-lattice is T^(g_i - g_j) * M_ij; the map
is norm non-increasing exactly when all those entries have valuation >= 0.
"""

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from novarch.algebra.novikov import INF, NovikovElement, ZERO
from novarch.config import to_fraction

Vector = Dict[int, NovikovElement]

NORM = "norm"
RELATIVE = "relative"
LATTICES = (NORM, RELATIVE)


@dataclass(frozen=True)
class Generator:
    """Basis element of a valued complex."""
    name: str
    degree: int
    valuation: Fraction = Fraction(0)
    relative_valuation: Fraction = Fraction(0)
    outside: bool = False

    def __post_init__(self):
        object.__setattr__(self, "valuation", to_fraction(self.valuation))
        object.__setattr__(self, "relative_valuation", to_fraction(self.relative_valuation))

    def weight(self, lattice: str = NORM) -> Fraction:
        if lattice == NORM:
            return self.valuation
        if lattice == RELATIVE:
            return self.relative_valuation
        raise ValueError(f"unknown lattice {lattice!r}")


@dataclass(frozen=True)
class ValuedBasis:
    """
    Ordered list of generators with unique names.

    grading_modulus is 0 for Z-graded complexes and 2 for Z/2-graded ones.
    """
    generators: Tuple[Generator, ...] = ()
    grading_modulus: int = 0
    _index: Dict[str, int] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if self.grading_modulus not in (0, 2):
            raise ValueError("grading modulus must be 0 (Z) or 2 (Z/2)")
        index: Dict[str, int] = {}
        for i, gen in enumerate(gens):
            if gen.name in index:
                raise ValueError(f"duplicate generator name {gen.name!r}")
            index[gen.name] = i
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self) -> Iterator[Generator]:
        return iter(self.generators)

    def __getitem__(self, i: int) -> Generator:
        return self.generators[i]

    @property
    def names(self) -> List[str]:
        return [g.name for g in self.generators]

    def index(self, name: str) -> int:
        return self._index[name]

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def weights(self, lattice: str = NORM) -> List[Fraction]:
        return [g.weight(lattice) for g in self.generators]

    def reduce_degree(self, k: int) -> int:
        return k % self.grading_modulus if self.grading_modulus else k

    def degree(self, i: int) -> int:
        return self.reduce_degree(self.generators[i].degree)

    def degrees(self) -> List[int]:
        return sorted({self.degree(i) for i in range(len(self))})

    def indices_in_degree(self, k: int) -> List[int]:
        k = self.reduce_degree(k)
        return [i for i in range(len(self)) if self.degree(i) == k]

    def sub(self, indices: Sequence[int]) -> "ValuedBasis":
        return ValuedBasis(tuple(self.generators[i] for i in indices), self.grading_modulus)

    def scaled(self, t: Fraction) -> "ValuedBasis":
        t = to_fraction(t)
        return ValuedBasis(
            tuple(
                replace(g, valuation=g.valuation * t, relative_valuation=g.relative_valuation * t)
                for g in self.generators
            ),
            self.grading_modulus,
        )

    def with_generators(self, generators: Iterable[Generator]) -> "ValuedBasis":
        return ValuedBasis(tuple(generators), self.grading_modulus)


# -- vectors ---------------------------------------------------------------

def vec_add(a: Vector, b: Vector) -> Vector:
    out = dict(a)
    for i, x in b.items():
        y = out[i] + x if i in out else x
        if y.is_zero():
            out.pop(i, None)
        else:
            out[i] = y
    return out


def vec_scale(v: Vector, c: NovikovElement) -> Vector:
    out = {}
    for i, x in v.items():
        y = c * x
        if not y.is_zero():
            out[i] = y
    return out


def vec_sub(a: Vector, b: Vector) -> Vector:
    return vec_add(a, {i: -x for i, x in b.items()})


def vec_val(v: Vector, weights: Sequence[Fraction] = None):
    """Weighted valuation min_i (val(v_i) + w_i); +inf for the zero vector."""
    best = INF
    for i, x in v.items():
        if x.is_zero():
            continue
        value = x.val() + (weights[i] if weights is not None else 0)
        if value < best:
            best = value
    return best


def vec_normalize(v: Vector, weights: Sequence[Fraction]) -> Vector:
    """Raw coordinates -> unit-lattice coordinates (v_i * T^w_i)."""
    return {i: x.shift(weights[i]) for i, x in v.items()}


def vec_denormalize(v: Vector, weights: Sequence[Fraction]) -> Vector:
    return {i: x.shift(-weights[i]) for i, x in v.items()}


def vec_is_zero_mod(v: Vector, precision) -> bool:
    return all(x.val() >= precision for x in v.values())


# -- matrices --------------------------------------------------------------

class NovMatrix:
    """
    Sparse matrix between two valued bases.

    Entries are raw coefficients: column j is the image of rows-basis
    coordinates of cols[j]. Zero entries are never stored.
    """

    __slots__ = ("rows", "cols", "_entries")

    def __init__(self, rows: ValuedBasis, cols: ValuedBasis, entries: Optional[Dict[Tuple[int, int], NovikovElement]] = None):
        self.rows = rows
        self.cols = cols
        clean: Dict[Tuple[int, int], NovikovElement] = {}
        for (i, j), x in (entries or {}).items():
            if not (0 <= i < len(rows) and 0 <= j < len(cols)):
                raise IndexError(f"entry ({i}, {j}) outside a {len(rows)}x{len(cols)} matrix")
            x = NovikovElement.coerce(x)
            if not x.is_zero():
                clean[(i, j)] = x
        self._entries = clean

    # -- construction ------------------------------------------------------

    @classmethod
    def zero(cls, rows: ValuedBasis, cols: ValuedBasis) -> "NovMatrix":
        return cls(rows, cols, {})

    @classmethod
    def identity(cls, basis: ValuedBasis) -> "NovMatrix":
        return cls(basis, basis, {(i, i): NovikovElement.one() for i in range(len(basis))})

    @classmethod
    def from_columns(cls, rows: ValuedBasis, cols: ValuedBasis, columns: Sequence[Vector]) -> "NovMatrix":
        entries = {}
        for j, col in enumerate(columns):
            for i, x in col.items():
                entries[(i, j)] = x
        return cls(rows, cols, entries)

    @classmethod
    def from_normalized(cls, rows: ValuedBasis, cols: ValuedBasis,
                        entries: Dict[Tuple[int, int], NovikovElement], lattice: str = NORM) -> "NovMatrix":
        """Build from lattice-normalized entries T^(w_i - w_j) M_ij."""
        rw, cw = rows.weights(lattice), cols.weights(lattice)
        return cls(rows, cols, {(i, j): x.shift(cw[j] - rw[i]) for (i, j), x in entries.items()})

    @classmethod
    def from_normalized_columns(cls, rows: ValuedBasis, cols: ValuedBasis,
                                columns: Sequence[Vector], lattice: str = NORM) -> "NovMatrix":
        entries = {}
        for j, col in enumerate(columns):
            for i, x in col.items():
                entries[(i, j)] = x
        return cls.from_normalized(rows, cols, entries, lattice)

    # -- access ------------------------------------------------------------

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.rows), len(self.cols)

    def items(self):
        return self._entries.items()

    def nnz(self) -> int:
        return len(self._entries)

    def entry(self, i: int, j: int) -> NovikovElement:
        return self._entries.get((i, j), ZERO)

    def __getitem__(self, key: Tuple[int, int]) -> NovikovElement:
        return self.entry(*key)

    def is_zero(self) -> bool:
        return not self._entries

    def column(self, j: int) -> Vector:
        return {i: x for (i, jj), x in self._entries.items() if jj == j}

    def columns(self) -> List[Vector]:
        cols: List[Vector] = [dict() for _ in range(len(self.cols))]
        for (i, j), x in self._entries.items():
            cols[j][i] = x
        return cols

    def normalized_entries(self, lattice: str = NORM) -> Dict[Tuple[int, int], NovikovElement]:
        rw, cw = self.rows.weights(lattice), self.cols.weights(lattice)
        return {(i, j): x.shift(rw[i] - cw[j]) for (i, j), x in self._entries.items()}

    def normalized_columns(self, lattice: str = NORM) -> List[Vector]:
        cols: List[Vector] = [dict() for _ in range(len(self.cols))]
        for (i, j), x in self.normalized_entries(lattice).items():
            cols[j][i] = x
        return cols

    def dense_normalized(self, lattice: str = NORM) -> List[List[NovikovElement]]:
        m, n = self.shape
        out = [[ZERO] * n for _ in range(m)]
        for (i, j), x in self.normalized_entries(lattice).items():
            out[i][j] = x
        return out

    # -- algebra -----------------------------------------------------------

    def _same_shape(self, other: "NovMatrix") -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "NovMatrix") -> "NovMatrix":
        self._same_shape(other)
        entries = dict(self._entries)
        for key, x in other._entries.items():
            entries[key] = entries[key] + x if key in entries else x
        return NovMatrix(self.rows, self.cols, entries)

    def __neg__(self) -> "NovMatrix":
        return NovMatrix(self.rows, self.cols, {k: -x for k, x in self._entries.items()})

    def __sub__(self, other: "NovMatrix") -> "NovMatrix":
        return self + (-other)

    def scale(self, c) -> "NovMatrix":
        c = NovikovElement.coerce(c)
        return NovMatrix(self.rows, self.cols, {k: c * x for k, x in self._entries.items()})

    def shift(self, exponent) -> "NovMatrix":
        """Multiply every entry by T^exponent."""
        return NovMatrix(self.rows, self.cols, {k: x.shift(exponent) for k, x in self._entries.items()})

    def __matmul__(self, other: "NovMatrix") -> "NovMatrix":
        if len(self.cols) != len(other.rows):
            raise ValueError(f"cannot compose {self.shape} with {other.shape}")
        by_row: Dict[int, List[Tuple[int, NovikovElement]]] = {}
        for (k, j), y in other._entries.items():
            by_row.setdefault(k, []).append((j, y))
        acc: Dict[Tuple[int, int], NovikovElement] = {}
        for (i, k), x in self._entries.items():
            for j, y in by_row.get(k, ()):
                prod = x * y
                acc[(i, j)] = acc[(i, j)] + prod if (i, j) in acc else prod
        return NovMatrix(self.rows, other.cols, acc)

    def apply(self, v: Vector) -> Vector:
        out: Vector = {}
        for (i, j), x in self._entries.items():
            if j in v:
                prod = x * v[j]
                out[i] = out[i] + prod if i in out else prod
        return {i: x for i, x in out.items() if not x.is_zero()}

    def restrict(self, row_indices: Sequence[int], col_indices: Sequence[int]) -> "NovMatrix":
        rpos = {r: a for a, r in enumerate(row_indices)}
        cpos = {c: b for b, c in enumerate(col_indices)}
        entries = {
            (rpos[i], cpos[j]): x for (i, j), x in self._entries.items() if i in rpos and j in cpos
        }
        return NovMatrix(self.rows.sub(row_indices), self.cols.sub(col_indices), entries)

    def rebased(self, rows: ValuedBasis, cols: ValuedBasis) -> "NovMatrix":
        """Same raw entries over different (equal-length) bases."""
        if (len(rows), len(cols)) != self.shape:
            raise ValueError("rebasing must keep the shape")
        return NovMatrix(rows, cols, self._entries)

    def map_entries(self, func) -> "NovMatrix":
        return NovMatrix(self.rows, self.cols, {k: func(x) for k, x in self._entries.items()})

    # -- valuations --------------------------------------------------------

    def operator_val(self, lattice: str = NORM):
        """min over entries of val(M_ij) + w_i - w_j; +inf for the zero map."""
        best = INF
        for x in self.normalized_entries(lattice).values():
            if x.val() < best:
                best = x.val()
        return best

    def is_zero_mod(self, precision, lattice: str = NORM) -> bool:
        return self.operator_val(lattice) >= precision

    def equals_mod(self, other: "NovMatrix", precision, lattice: str = NORM) -> bool:
        return (self - other).is_zero_mod(precision, lattice)

    def precision(self):
        """Least precision among stored entries (+inf when all exact)."""
        return min((x.precision for x in self._entries.values()), default=INF)

    # -- serialization -----------------------------------------------------

    def to_triplets(self) -> List[dict]:
        return [
            {"from": self.cols[j].name, "to": self.rows[i].name, "terms": x.to_pairs()}
            for (i, j), x in sorted(self._entries.items(), key=lambda kv: (kv[0][1], kv[0][0]))
        ]

    def __repr__(self) -> str:
        return f"NovMatrix({self.shape[0]}x{self.shape[1]}, nnz={len(self._entries)})"


def operator_norm_val(f: NovMatrix, lattice: str = NORM) -> Tuple[float, object]:
    """
    Operator norm |f|_inf and valuation under the generator norms.

    Returns:
        (norm, val) with norm = e^-val; (0.0, inf) for the zero map
    """
    val = f.operator_val(lattice)
    if val == INF:
        return 0.0, INF
    return math.exp(-float(val)), val
