"""
Polyvector - Polyvector fields on a polyannulus with the BV operator div_{Omega0}.

Polyvectors are written in the log-derivation basis theta_i = z_i d/dz_i:
an element is a dict {(a, S): Fraction} for the monomial z^a theta_S, a in
Z^n and S a sorted tuple of indices. Since Omega0 = dz/z is torus
invariant,

    Delta(z^a theta_S) = sum_k (-1)^(k+1) a_{s_k} z^a theta_{S - s_k}

and Delta^2 = 0. The bracket measures the failure of Delta to be a
derivation:

    {x, y} = Delta(xy) - Delta(x) y - (-1)^|x| x Delta(y).

It restricts to the Lie bracket on vector fields and to X(f) on a vector
field and a function. The Gerstenhaber bracket (-1)^|x| {x, y} is the one
satisfying graded antisymmetry and the graded Jacobi identity.

Log-forms alpha = sum alpha_{a,i} z^a dlog z_i are dicts {(a, i): Fraction}.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from novarch.algebra.matrix import Generator, NovMatrix, ValuedBasis
from novarch.algebra.novikov import NovikovElement
from novarch.complexes.floer import FloerTypeComplex
from novarch.config import get_settings, to_fraction
from novarch.errors import NotClosed
from novarch.utils.logger import get_logger

logger = get_logger(__name__)

Exponent = Tuple[int, ...]
Key = Tuple[Exponent, Tuple[int, ...]]
Poly = Dict[Key, Fraction]
LogForm = Dict[Tuple[Exponent, int], Fraction]


def _clean(x: Dict) -> Dict:
    return {k: v for k, v in x.items() if v}


def poly_add(x: Poly, y: Poly, c=1) -> Poly:
    out = dict(x)
    for k, v in y.items():
        out[k] = out.get(k, Fraction(0)) + c * v
    return _clean(out)


def degree_of(x: Poly) -> int:
    """Polyvector degree of a homogeneous element (0 for zero)."""
    degrees = {len(S) for (_, S) in x}
    if len(degrees) > 1:
        raise ValueError("element is not homogeneous")
    return degrees.pop() if degrees else 0


def wedge_sign(S: Sequence[int], T: Sequence[int]) -> Tuple[int, Tuple[int, ...]]:
    """theta_S ^ theta_T = sign * theta_sorted; sign 0 on overlap."""
    if set(S) & set(T):
        return 0, ()
    merged = list(S) + list(T)
    inversions = sum(1 for i in range(len(merged)) for j in range(i + 1, len(merged)) if merged[i] > merged[j])
    return (-1) ** inversions, tuple(sorted(merged))


def poly_mul(x: Poly, y: Poly) -> Poly:
    out: Dict[Key, Fraction] = {}
    for (a, S), c in x.items():
        for (b, U), d in y.items():
            sign, V = wedge_sign(S, U)
            if not sign:
                continue
            key = (tuple(i + j for i, j in zip(a, b)), V)
            out[key] = out.get(key, Fraction(0)) + sign * c * d
    return _clean(out)


def div_omega0(x: Poly) -> Poly:
    out: Dict[Key, Fraction] = {}
    for (a, S), c in x.items():
        for k, s in enumerate(S):
            if a[s]:
                key = (a, S[:k] + S[k + 1:])
                out[key] = out.get(key, Fraction(0)) + (-1) ** k * a[s] * c
    return _clean(out)


def contract(x: Poly, alpha: LogForm) -> Poly:
    """iota_alpha on polyvectors: theta_{s_k} paired with alpha, sign (-1)^(k+1) from the front."""
    out: Dict[Key, Fraction] = {}
    for (a, S), c in x.items():
        for k, s in enumerate(S):
            rest = S[:k] + S[k + 1:]
            for (b, i), coeff in alpha.items():
                if i != s:
                    continue
                key = (tuple(p + q for p, q in zip(a, b)), rest)
                out[key] = out.get(key, Fraction(0)) + (-1) ** k * c * coeff
    return _clean(out)


@dataclass
class PolyvectorBV:
    """
    Truncated polyvector carrier on an n-fold polyannulus with a BV operator.

    Attributes:
        n: Dimension
        radii: (r1, r2) per factor; val(z_i) ranges over [-r2, r1]
        N: Bound on |a_i| for the enumerated monomials
        twist: Log-form alpha with Delta = div_{Omega0} + iota_alpha (empty for div_{Omega0})
    """
    n: int
    radii: Tuple[Tuple[Fraction, Fraction], ...]
    N: int
    twist: LogForm = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be at least 1")
        if len(self.radii) != self.n:
            raise ValueError("one (r1, r2) pair per factor is needed")
        self.radii = tuple((to_fraction(a), to_fraction(b)) for a, b in self.radii)

    def delta(self, x: Poly) -> Poly:
        out = div_omega0(x)
        if self.twist:
            out = poly_add(out, contract(x, self.twist))
        return out

    def bracket(self, x: Poly, y: Poly) -> Poly:
        sign = (-1) ** degree_of(x)
        out = poly_add(self.delta(poly_mul(x, y)), poly_mul(self.delta(x), y), -1)
        return poly_add(out, poly_mul(x, self.delta(y)), -sign)

    def gerstenhaber(self, x: Poly, y: Poly) -> Poly:
        sign = (-1) ** degree_of(x)
        return {k: sign * v for k, v in self.bracket(x, y).items()}

    def exponents(self) -> List[Exponent]:
        return [tuple(a) for a in product(range(-self.N, self.N + 1), repeat=self.n)]

    def monomials(self, degree: Optional[int] = None) -> List[Key]:
        subsets = [S for k in range(self.n + 1) for S in combinations(range(self.n), k)]
        if degree is not None:
            subsets = [S for S in subsets if len(S) == degree]
        return [(a, S) for a in self.exponents() for S in subsets]

    def monomial_val(self, a: Exponent) -> Fraction:
        """min over the moment box of <a, u>; |z^a| = e^-val."""
        total = Fraction(0)
        for ai, (r1, r2) in zip(a, self.radii):
            total += min(ai * r1, -ai * r2)
        return total

    @staticmethod
    def unit(key: Key) -> Poly:
        return {key: Fraction(1)}

    def format_key(self, key: Key) -> str:
        a, S = key
        theta = "t[" + ",".join(str(s + 1) for s in S) + "]" if S else ""
        return "z[" + ",".join(str(x) for x in a) + "]" + theta


def check_bv_identities(bv: PolyvectorBV, seed: Optional[int] = None, samples: int = 200,
                        triples: Optional[Iterable[Tuple[Key, Key, Key]]] = None) -> Dict[str, bool]:
    """
    Delta^2 = 0 and Delta = 0 on functions on every monomial; Leibniz and
    Jacobi for the Gerstenhaber bracket on sampled (or given) triples.
    """
    monomials = bv.monomials()
    unit = bv.unit
    checks = {
        "delta_squared": all(not bv.delta(bv.delta(unit(m))) for m in monomials),
        "functions": all(not bv.delta(unit(m)) for m in monomials if not m[1]),
        "lowers_degree": all(
            all(len(S) == len(m[1]) - 1 for (_, S) in bv.delta(unit(m))) for m in monomials
        ),
    }
    if triples is None:
        rng = np.random.default_rng(get_settings().seed if seed is None else seed)
        picks = rng.integers(0, len(monomials), size=(samples, 3))
        triples = [(monomials[i], monomials[j], monomials[k]) for i, j, k in picks]
    jacobi = leibniz = True
    G = bv.gerstenhaber
    for ka, kb, kc in triples:
        a, b, c = unit(ka), unit(kb), unit(kc)
        da, db = len(ka[1]), len(kb[1])
        s = (-1) ** ((da - 1) * (db - 1))
        lhs = G(a, G(b, c))
        rhs = poly_add(G(G(a, b), c), G(b, G(a, c)), s)
        if poly_add(lhs, rhs, -1):
            jacobi = False
            logger.debug("jacobi fails on %s %s %s", ka, kb, kc)
        lhs = G(a, poly_mul(b, c))
        rhs = poly_add(poly_mul(G(a, b), c), poly_mul(b, G(a, c)), (-1) ** ((da - 1) * db))
        if poly_add(lhs, rhs, -1):
            leibniz = False
    checks["jacobi"] = jacobi
    checks["leibniz"] = leibniz
    return checks


def polyannulus_bv(n: int, radii: Optional[Sequence[Tuple]] = None, N: int = 2, seed: Optional[int] = None) -> PolyvectorBV:
    """The BV algebra (polyvectors, div_{Omega0}) with its identities checked."""
    radii = radii if radii is not None else [(1, 1)] * n
    bv = PolyvectorBV(n=n, radii=tuple(radii), N=N)
    bv.checks = check_bv_identities(bv, seed)
    failed = [k for k, v in bv.checks.items() if not v]
    if failed:
        logger.warning("polyvector BV identities failed: %s", ", ".join(failed))
    return bv


# -- Upsilon -------------------------------------------------------------------

class UpsilonReport(BaseModel):
    samples: int
    derivation: bool = Field(description="Leibniz rule in the first slot")
    alternating: bool = Field(description="Swapping two slots changes the sign")
    product: bool = Field(description="Upsilon(v w) is the wedge of Upsilon(v) and Upsilon(w)")
    bracket: bool = Field(description="Upsilon({v, w}) is the commutator of the vector fields")

    @property
    def ok(self) -> bool:
        return self.derivation and self.alternating and self.product and self.bracket


@dataclass
class Upsilon:
    """Polyderivation attached to each polyvector by nested brackets."""
    bv: PolyvectorBV
    report: Optional[UpsilonReport] = None

    def evaluate(self, v: Poly, *xs: Poly) -> Poly:
        """<Upsilon(v), x1, ..., xk> = <Upsilon({v, x1}), x2, ..., xk>; degree-0 v is itself."""
        if not xs:
            return dict(v)
        return self.evaluate(self.bv.bracket(v, xs[0]), *xs[1:])


def _function(a: Exponent, c=1) -> Poly:
    return {(a, ()): Fraction(c)}


def upsilon(bv: PolyvectorBV, seed: Optional[int] = None, samples: int = 50) -> Upsilon:
    """Build Upsilon and test it on random monomial data."""
    rng = np.random.default_rng(get_settings().seed if seed is None else seed)
    up = Upsilon(bv)
    exps = bv.exponents()
    fields = bv.monomials(1)
    pairs = bv.monomials(2) if bv.n >= 2 else []

    def pick(pool):
        return pool[int(rng.integers(0, len(pool)))]

    derivation = alternating = product_ok = bracket_ok = True
    for _ in range(samples):
        X, Y = bv.unit(pick(fields)), bv.unit(pick(fields))
        f, g = _function(pick(exps)), _function(pick(exps))
        if up.evaluate(X, poly_mul(f, g)) != poly_add(poly_mul(f, up.evaluate(X, g)), poly_mul(g, up.evaluate(X, f))):
            derivation = False
        if pairs:
            V = bv.unit(pick(pairs))
            if poly_add(up.evaluate(V, f, g), up.evaluate(V, g, f)):
                alternating = False
        vw = poly_mul(X, Y)
        wedge = poly_add(
            poly_mul(up.evaluate(X, f), up.evaluate(Y, g)),
            poly_mul(up.evaluate(X, g), up.evaluate(Y, f)),
            -1,
        )
        if poly_add(up.evaluate(vw, f, g), wedge, -1):
            product_ok = False
        commutator = poly_add(up.evaluate(X, up.evaluate(Y, f)), up.evaluate(Y, up.evaluate(X, f)), -1)
        if poly_add(up.evaluate(bv.bracket(X, Y), f), commutator, -1):
            bracket_ok = False
    up.report = UpsilonReport(
        samples=samples, derivation=derivation, alternating=alternating, product=product_ok, bracket=bracket_ok,
    )
    return up


# -- log-forms -----------------------------------------------------------------

def d_function(h: Dict[Exponent, Fraction]) -> LogForm:
    """d(sum h_a z^a) = sum a_i h_a z^a dlog z_i."""
    out: LogForm = {}
    for a, c in h.items():
        for i, ai in enumerate(a):
            if ai:
                out[(a, i)] = out.get((a, i), Fraction(0)) + ai * c
    return _clean(out)


def closedness_defect(alpha: LogForm) -> Optional[Tuple[Exponent, int, int]]:
    """First (a, i, j) with a_i alpha_{a,j} != a_j alpha_{a,i}, or None when d alpha = 0."""
    exps = sorted({a for (a, _) in alpha})
    for a in exps:
        n = len(a)
        for i in range(n):
            for j in range(i + 1, n):
                if a[i] * alpha.get((a, j), 0) != a[j] * alpha.get((a, i), 0):
                    return a, i, j
    return None


class LogFormSolution(BaseModel):
    h: Dict[str, str] = Field(description="Coefficients of h by exponent")
    obstruction: Dict[str, str] = Field(default_factory=dict, description="a = 0 coefficients by index")
    exact: bool
    residual_ok: bool = Field(description="d h = alpha - obstruction")


@dataclass
class ExactSolve:
    h: Dict[Exponent, Fraction]
    obstruction: Dict[int, Fraction]
    residual_ok: bool

    @property
    def exact(self) -> bool:
        return not self.obstruction

    def summary(self) -> LogFormSolution:
        return LogFormSolution(
            h={str(list(a)): str(c) for a, c in sorted(self.h.items())},
            obstruction={str(i + 1): str(c) for i, c in sorted(self.obstruction.items())},
            exact=self.exact,
            residual_ok=self.residual_ok,
        )


def solve_exact_logform(alpha: LogForm) -> ExactSolve:
    """
    Solve d h = alpha on monomials; the a = 0 part is returned as the obstruction.

    Raises:
        NotClosed: d alpha != 0
    """
    alpha = _clean({(tuple(a), i): Fraction(c) for (a, i), c in alpha.items()})
    defect = closedness_defect(alpha)
    if defect is not None:
        a, i, j = defect
        raise NotClosed("log-form is not closed", witness=f"exponent {list(a)}, indices ({i + 1}, {j + 1})")
    h: Dict[Exponent, Fraction] = {}
    obstruction: Dict[int, Fraction] = {}
    for (a, i), c in sorted(alpha.items()):
        if not any(a):
            obstruction[i] = c
            continue
        if a[i] and a not in h:
            h[a] = c / a[i]
    residual = {(a, i): c for (a, i), c in alpha.items() if any(a)}
    residual_ok = d_function(h) == _clean(residual)
    if not residual_ok:
        logger.warning("log-form solve left a residual beyond the obstruction")
    return ExactSolve(h=h, obstruction=obstruction, residual_ok=residual_ok)


# -- volume-form rectification ---------------------------------------------------

@dataclass
class VolumeRectification:
    alpha: LogForm
    solve: ExactSolve
    checks: Dict[str, bool]

    def rescaled_volume(self) -> Dict[Exponent, Fraction]:
        """h in Omega = e^h Omega0 (exact part)."""
        return dict(self.solve.h)


def extract_log_form(delta: Callable[[Poly], Poly], n: int) -> LogForm:
    """alpha(theta_i) = (Delta - div_{Omega0})(theta_i)."""
    alpha: LogForm = {}
    zero = (0,) * n
    for i in range(n):
        diff = poly_add(delta({(zero, (i,)): Fraction(1)}), div_omega0({(zero, (i,)): Fraction(1)}), -1)
        for (a, S), c in diff.items():
            if S:
                raise ValueError("Delta(theta_i) must be a function")
            alpha[(a, i)] = c
    return alpha


def rectify_volume_form(bv: PolyvectorBV, delta: Optional[Callable[[Poly], Poly]] = None,
                        monomials: Optional[Sequence[Key]] = None) -> VolumeRectification:
    """
    Write a BV operator as div of a rescaled volume form.

    alpha = Delta - div_{Omega0} is read off on the theta_i and must be
    closed; Delta is then div_{e^h Omega0} plus contraction with the
    obstruction, which the check confirms on the tested monomials.

    Raises:
        NotClosed: alpha is not closed
    """
    delta = delta or bv.delta
    alpha = extract_log_form(delta, bv.n)
    solve = solve_exact_logform(alpha)
    rebuilt_form = d_function(solve.h)
    zero = (0,) * bv.n
    for i, c in solve.obstruction.items():
        rebuilt_form[(zero, i)] = c
    tested = monomials if monomials is not None else bv.monomials()
    matches = all(
        delta(bv.unit(m)) == poly_add(div_omega0(bv.unit(m)), contract(bv.unit(m), rebuilt_form))
        for m in tested
    )
    checks = {"first_order": matches, "exact": solve.exact, "residual": solve.residual_ok}
    return VolumeRectification(alpha=alpha, solve=solve, checks=checks)


# -- as a complex -------------------------------------------------------------------

def bv_as_complex(bv: PolyvectorBV) -> FloerTypeComplex:
    """Carrier monomials in degree -|S| with differential Delta."""
    keys = bv.monomials()
    index = {k: n for n, k in enumerate(keys)}
    gens = [Generator(bv.format_key(k), -len(k[1]), bv.monomial_val(k[0])) for k in keys]
    basis = ValuedBasis(tuple(gens))
    entries = {}
    for j, k in enumerate(keys):
        for key, c in bv.delta(bv.unit(k)).items():
            if key in index:
                entries[(index[key], j)] = NovikovElement.constant(c)
    d = NovMatrix(basis, basis, entries)
    return FloerTypeComplex.from_differential(basis, d, 1)
