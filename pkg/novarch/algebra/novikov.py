"""
Novikov - Exact arithmetic in the Novikov field with rational exponents.

An element is a finite sum of terms c*T^e with exact rational exponents and
coefficients, together with a precision E: the element is only known modulo
T^E, and terms at or above E are never stored. Finite data (documents,
models) are exact, i.e. carry precision +inf.
"""

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from novarch.config import get_settings, to_fraction
from novarch.errors import ZeroInversion

INF = math.inf

Exponent = Fraction
Precision = Union[Fraction, float]  # a Fraction, or INF for exact elements
Scalar = Union[int, Fraction]

_TERM = re.compile(r"(?P<c>[+-]?\d+(?:/\d+)?)\s*\*\s*T\^\(\s*(?P<e>[+-]?\d+(?:/\d+)?)\s*\)")
_MOD = re.compile(r"\s+mod\s+T\^\(\s*(?P<p>[+-]?\d+(?:/\d+)?)\s*\)\s*$")


def _precision(value) -> Precision:
    if value is None or value == INF:
        return INF
    return to_fraction(value)


class NovikovElement:
    """
    Immutable truncated Novikov series.

    Terms are kept sorted by exponent with nonzero coefficients, and every
    stored exponent is below the precision.
    """

    __slots__ = ("_terms", "_precision")

    def __init__(self, terms: Iterable[Tuple[Scalar, Scalar]] = (), precision=INF):
        precision = _precision(precision)
        acc: Dict[Fraction, Fraction] = {}
        for exponent, coeff in terms:
            e = to_fraction(exponent)
            c = to_fraction(coeff)
            if c:
                acc[e] = acc.get(e, 0) + c
        self._terms = tuple(sorted((e, c) for e, c in acc.items() if c and e < precision))
        self._precision = precision

    @classmethod
    def _raw(cls, terms: Tuple[Tuple[Fraction, Fraction], ...], precision: Precision) -> "NovikovElement":
        # terms already sorted, merged and truncated
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._precision = precision
        return obj

    @classmethod
    def _from_dict(cls, acc: Dict[Fraction, Fraction], precision: Precision) -> "NovikovElement":
        return cls._raw(tuple(sorted((e, c) for e, c in acc.items() if c and e < precision)), precision)

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, precision=INF) -> "NovikovElement":
        return cls._raw((), _precision(precision))

    @classmethod
    def one(cls, precision=INF) -> "NovikovElement":
        return cls.monomial(1, 0, precision)

    @classmethod
    def monomial(cls, coeff: Scalar, exponent: Scalar, precision=INF) -> "NovikovElement":
        """c*T^e."""
        return cls([(exponent, coeff)], precision)

    @classmethod
    def constant(cls, coeff: Scalar) -> "NovikovElement":
        return cls.monomial(coeff, 0)

    @classmethod
    def coerce(cls, value) -> "NovikovElement":
        if isinstance(value, NovikovElement):
            return value
        return cls.constant(to_fraction(value))

    # -- accessors --------------------------------------------------------

    @property
    def terms(self) -> Tuple[Tuple[Fraction, Fraction], ...]:
        return self._terms

    @property
    def precision(self) -> Precision:
        return self._precision

    @property
    def is_exact(self) -> bool:
        return self._precision == INF

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def val(self):
        """Least exponent, +inf for zero."""
        return self._terms[0][0] if self._terms else INF

    def effective_val(self) -> Precision:
        """Valuation, where a zero element counts as its precision."""
        return self._terms[0][0] if self._terms else self._precision

    def norm(self) -> float:
        """|x| = e^(-val(x)), 0 for zero."""
        if not self._terms:
            return 0.0
        return math.exp(-float(self._terms[0][0]))

    @property
    def leading_coefficient(self) -> Fraction:
        return self._terms[0][1] if self._terms else Fraction(0)

    def coefficient(self, exponent: Scalar) -> Fraction:
        e = to_fraction(exponent)
        for exp_, coeff in self._terms:
            if exp_ == e:
                return coeff
        return Fraction(0)

    def constant_term(self) -> Fraction:
        return self.coefficient(0)

    # -- precision management ---------------------------------------------

    def with_precision(self, precision) -> "NovikovElement":
        """Lower the precision to min(current, precision), truncating terms."""
        p = _precision(precision)
        if p >= self._precision:
            return self
        return self._raw(tuple(t for t in self._terms if t[0] < p), p)

    def truncated_below(self, upper) -> "NovikovElement":
        """Drop the terms at or above upper without changing the precision claim."""
        u = to_fraction(upper)
        return self._raw(tuple(t for t in self._terms if t[0] < u), min(self._precision, u))

    # -- arithmetic -------------------------------------------------------

    def shift(self, exponent: Scalar) -> "NovikovElement":
        """Multiply by the exact monomial T^exponent."""
        lam = to_fraction(exponent)
        if not lam:
            return self
        precision = self._precision if self._precision == INF else self._precision + lam
        return self._raw(tuple((e + lam, c) for e, c in self._terms), precision)

    def scale(self, coeff: Scalar) -> "NovikovElement":
        """Multiply by an exact rational."""
        c = to_fraction(coeff)
        if not c:
            return self._raw((), INF)
        if c == 1:
            return self
        return self._raw(tuple((e, v * c) for e, v in self._terms), self._precision)

    def scaled_exponents(self, factor: Scalar) -> "NovikovElement":
        """Apply the ring map T^e -> T^(t*e) for t > 0."""
        t = to_fraction(factor)
        if t <= 0:
            raise ValueError("exponent scaling factor must be positive")
        precision = self._precision if self._precision == INF else self._precision * t
        return self._raw(tuple((e * t, c) for e, c in self._terms), precision)

    def __neg__(self) -> "NovikovElement":
        return self._raw(tuple((e, -c) for e, c in self._terms), self._precision)

    def __add__(self, other) -> "NovikovElement":
        if not isinstance(other, NovikovElement):
            if isinstance(other, (int, Fraction)):
                other = NovikovElement.constant(other)
            else:
                return NotImplemented
        if not other._terms and other._precision >= self._precision:
            return self
        if not self._terms and self._precision >= other._precision:
            return other
        precision = min(self._precision, other._precision)
        acc: Dict[Fraction, Fraction] = {}
        for e, c in self._terms:
            acc[e] = c
        for e, c in other._terms:
            acc[e] = acc.get(e, 0) + c
        return self._from_dict(acc, precision)

    __radd__ = __add__

    def __sub__(self, other) -> "NovikovElement":
        if not isinstance(other, NovikovElement):
            if isinstance(other, (int, Fraction)):
                other = NovikovElement.constant(other)
            else:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "NovikovElement":
        return (-self) + other

    def __mul__(self, other) -> "NovikovElement":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, NovikovElement):
            return NotImplemented
        pa, pb = self._precision, other._precision
        va, vb = self.effective_val(), other.effective_val()
        precision = min(pa + vb, pb + va)
        if precision != INF:
            precision = Fraction(precision)
        if not self._terms or not other._terms:
            return self._raw((), precision)
        acc: Dict[Fraction, Fraction] = {}
        for e1, c1 in self._terms:
            for e2, c2 in other._terms:
                e = e1 + e2
                if e < precision:
                    acc[e] = acc.get(e, 0) + c1 * c2
        return self._from_dict(acc, precision)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "NovikovElement":
        if n < 0:
            return self.invert() ** (-n)
        result = NovikovElement.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def invert(self, precision=None) -> "NovikovElement":
        """
        Multiplicative inverse.

        Write a = c*T^v*(1 + eps) with val(eps) > 0 and expand the geometric
        series. For a known mod T^E the result is known mod T^(E - 2v); exact
        non-monomials use the working precision (or the given one) as E.

        Raises:
            ZeroInversion: a is zero
        """
        if not self._terms:
            raise ZeroInversion("cannot invert zero", witness=str(self))
        v, c = self._terms[0]
        if self._precision != INF:
            base = self._precision
        elif len(self._terms) == 1:
            return self._raw(((-v, 1 / c),), INF)
        else:
            base = to_fraction(precision) if precision is not None else get_settings().precision
        target = base - v
        unit = self.shift(-v).scale(1 / c)
        eps = (unit - NovikovElement.one()).with_precision(target)
        result = NovikovElement.one(target)
        term = NovikovElement.one(target)
        while not eps.is_zero():
            term = (-(term * eps)).with_precision(target)
            if term.is_zero():
                break
            result = result + term
        return result.with_precision(target).shift(-v).scale(1 / c)

    def __truediv__(self, other) -> "NovikovElement":
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroInversion("division by the zero scalar")
            return self.scale(Fraction(1) / other)
        if not isinstance(other, NovikovElement):
            return NotImplemented
        return self * other.invert()

    # -- comparison -------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = NovikovElement.constant(other)
        if not isinstance(other, NovikovElement):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def is_zero_mod(self, precision) -> bool:
        """True when every stored term sits at or above the given exponent."""
        return self.val() >= precision

    # -- text and JSON ----------------------------------------------------

    def to_pairs(self) -> List[List[str]]:
        """JSON form: [[exponent, coefficient], ...] as fraction strings."""
        return [[str(e), str(c)] for e, c in self._terms]

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence], precision=INF) -> "NovikovElement":
        return cls(((to_fraction(e), to_fraction(c)) for e, c in pairs), precision)

    def __str__(self) -> str:
        body = " + ".join(f"{c}*T^({e})" for e, c in self._terms) or "0"
        if self._precision != INF:
            body += f" mod T^({self._precision})"
        return body

    def __repr__(self) -> str:
        return f"NovikovElement({self})"


def parse_novikov(text: str) -> NovikovElement:
    """Parse the textual form produced by str(): "1*T^(0) + -3*T^(5/2) mod T^(10)"."""
    body = text.strip()
    precision: Precision = INF
    mod = _MOD.search(body)
    if mod:
        precision = Fraction(mod.group("p"))
        body = body[: mod.start()]
    body = body.strip()
    if body == "0":
        return NovikovElement.zero(precision)
    terms = []
    position = 0
    for match in _TERM.finditer(body):
        gap = body[position: match.start()].strip()
        if gap not in ("", "+"):
            raise ValueError(f"unexpected text {gap!r} in Novikov element")
        terms.append((Fraction(match.group("e")), Fraction(match.group("c"))))
        position = match.end()
    if not terms or body[position:].strip():
        raise ValueError(f"cannot parse Novikov element {text!r}")
    return NovikovElement(terms, precision)


@dataclass(frozen=True, eq=False)
class NovikovInterval:
    """
    Element of Lambda_[lower, upper): val in [lower, upper), known mod T^upper.

    With lower = 0 this is the ring Lambda_[0, hbar) carried by the
    associated graded complex.
    """

    lower: Fraction
    upper: Fraction
    representative: NovikovElement

    def __post_init__(self):
        lower, upper = to_fraction(self.lower), to_fraction(self.upper)
        if upper <= lower:
            raise ValueError("empty valuation interval")
        rep = self.representative.truncated_below(upper)
        if not rep.is_zero() and rep.val() < lower:
            raise ValueError(f"{rep} has valuation below {lower}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "representative", rep)

    def _check(self, other: "NovikovInterval") -> None:
        if (self.lower, self.upper) != (other.lower, other.upper):
            raise ValueError("interval elements from different intervals")

    def __add__(self, other: "NovikovInterval") -> "NovikovInterval":
        self._check(other)
        return NovikovInterval(self.lower, self.upper, self.representative + other.representative)

    def __neg__(self) -> "NovikovInterval":
        return NovikovInterval(self.lower, self.upper, -self.representative)

    def __mul__(self, other: "NovikovInterval") -> "NovikovInterval":
        self._check(other)
        if self.lower < 0:
            raise ValueError("products need a nonnegative lower bound")
        return NovikovInterval(self.lower, self.upper, self.representative * other.representative)

    def is_zero(self) -> bool:
        return self.representative.is_zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, NovikovInterval):
            return NotImplemented
        return (self.lower, self.upper) == (other.lower, other.upper) and (
            self.representative - other.representative
        ).truncated_below(self.upper).is_zero()

    __hash__ = None


# Functional aliases for the module operations.

def nov_add(a: NovikovElement, b: NovikovElement) -> NovikovElement:
    return a + b


def nov_mul(a: NovikovElement, b: NovikovElement) -> NovikovElement:
    return a * b


def nov_val_norm(a: NovikovElement) -> Tuple[Union[Fraction, float], float]:
    """(val, e^-val); (inf, 0) for zero."""
    return a.val(), a.norm()


def nov_invert(a: NovikovElement, precision: Optional[Fraction] = None) -> NovikovElement:
    return a.invert(precision)


def T(exponent: Scalar = 1, coeff: Scalar = 1) -> NovikovElement:
    """Shorthand for the exact monomial coeff*T^exponent."""
    return NovikovElement.monomial(coeff, exponent)


ZERO = NovikovElement.zero()
ONE = NovikovElement.one()
