"""
LP - Exact feasibility questions answered with sympy's rational simplex.
"""

from fractions import Fraction
from typing import List, Optional, Sequence

import sympy
from sympy.solvers.simplex import InfeasibleLPError, UnboundedLPError, linprog

from novarch.utils.logger import get_logger

logger = get_logger(__name__)


def _q(x) -> sympy.Rational:
    x = Fraction(x)
    return sympy.Rational(x.numerator, x.denominator)


def feasible(n_vars: int, a_eq: Sequence[Sequence] = (), b_eq: Sequence = (),
             a_ub: Sequence[Sequence] = (), b_ub: Sequence = ()) -> Optional[List[Fraction]]:
    """
    A point x >= 0 with a_eq x = b_eq and a_ub x <= b_ub, or None.
    """
    if n_vars == 0:
        ok = all(Fraction(b) == 0 for b in b_eq) and all(Fraction(b) >= 0 for b in b_ub)
        return [] if ok else None
    c = sympy.Matrix([[0] * n_vars])
    A = sympy.Matrix([[_q(v) for v in row] for row in a_ub]) if len(a_ub) else None
    b = sympy.Matrix([_q(v) for v in b_ub]) if len(b_ub) else None
    A_eq = sympy.Matrix([[_q(v) for v in row] for row in a_eq]) if len(a_eq) else None
    b_eq_m = sympy.Matrix([_q(v) for v in b_eq]) if len(b_eq) else None
    try:
        _, x = linprog(c, A, b, A_eq, b_eq_m)
    except InfeasibleLPError:
        return None
    except UnboundedLPError:  # cannot happen with a zero objective
        logger.warning("zero-objective LP reported unbounded")
        return None
    return [Fraction(int(sympy.Rational(v).p), int(sympy.Rational(v).q)) for v in x]


def in_convex_hull(points: Sequence[Sequence], target: Sequence) -> bool:
    """target = sum lambda_i p_i with lambda >= 0 and sum lambda = 1."""
    if not points:
        return False
    dim = len(target)
    a_eq = [[Fraction(p[r]) for p in points] for r in range(dim)]
    a_eq.append([Fraction(1)] * len(points))
    b_eq = [Fraction(t) for t in target] + [Fraction(1)]
    return feasible(len(points), a_eq, b_eq) is not None


def in_cone(generators: Sequence[Sequence], target: Sequence) -> bool:
    """target = sum lambda_i g_i with lambda >= 0."""
    if all(Fraction(t) == 0 for t in target):
        return True
    if not generators:
        return False
    dim = len(target)
    a_eq = [[Fraction(g[r]) for g in generators] for r in range(dim)]
    return feasible(len(generators), a_eq, [Fraction(t) for t in target]) is not None
