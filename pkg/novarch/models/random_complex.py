"""
Random complex - Reproducible pseudo-random Floer-type complexes for fuzzing.

A complex is assembled from acyclic pairs x -> y with coefficient T^lam
(lam = 0 for d0 pairs, lam >= hbar for deformation pairs) and free
generators, then disguised by changes of basis I + x E_ij whose multipliers
x mix a rational constant with T-power terms. They preserve degrees,
norms and the hbar split, and they couple the pairs into multi-term
entries. Every pair contributes a norm bar of length b <= beta_target;
one pair is placed exactly at beta_target when there is room, so the
boundary depth equals beta_target.
"""

from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from novarch.algebra.matrix import Generator, NovMatrix, ValuedBasis
from novarch.algebra.novikov import NovikovElement, T
from novarch.complexes.floer import FloerTypeComplex
from novarch.config import get_settings, to_fraction
from novarch.utils.logger import get_logger

logger = get_logger(__name__)

GRID = 4
MAX_DEGREE = 2


def _grid(rng: np.random.Generator, low: Fraction, high: Fraction) -> Fraction:
    """Uniform point of the 1/GRID grid in [low, high]."""
    lo = int(np.ceil(low * GRID))
    hi = int(np.floor(high * GRID))
    if hi < lo:
        return Fraction(lo, GRID)
    return Fraction(int(rng.integers(lo, hi + 1)), GRID)


def _multiplier(rng: np.random.Generator, floor: Fraction, hbar: Fraction) -> NovikovElement:
    """
    x in Lambda_{>=0} with val(x) >= floor and no exponent in (0, hbar):
    a rational constant (only when floor <= 0), a T-power term, or both.
    """
    x = NovikovElement.zero()
    if floor <= 0 and rng.integers(0, 3):
        x = x + NovikovElement.constant(Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4))))
    if x.is_zero() or rng.integers(0, 2):
        e = max(hbar, floor) + _grid(rng, Fraction(0), Fraction(1))
        x = x + T(e, Fraction(int(rng.integers(1, 4)) * int(rng.choice([-1, 1]))))
    return x


def _conjugate(basis: ValuedBasis, d: NovMatrix, rng: np.random.Generator, steps: int, hbar: Fraction) -> NovMatrix:
    """
    d <- P^-1 d P for P = I + x E_ij with deg i = deg j and val(x) >= g_j - g_i.

    P and P^-1 = I - x E_ij are unimodular over Lambda_{>=0} in both
    lattices, so norms, bars and the d0 + T^hbar d1 split survive.
    """
    n = len(basis)
    ident = NovMatrix.identity(basis)
    for _ in range(steps):
        i, j = (int(x) for x in rng.integers(0, n, size=2))
        if i == j or basis[i].degree != basis[j].degree:
            continue
        x = _multiplier(rng, basis[j].valuation - basis[i].valuation, hbar)
        if x.is_zero():
            continue
        P = ident + NovMatrix(basis, basis, {(i, j): x})
        P_inv = ident - NovMatrix(basis, basis, {(i, j): x})
        d = P_inv @ d @ P
    return d


def random_floer_complex(seed: Optional[int] = None, rank: int = 6, hbar=1, beta_target=1) -> FloerTypeComplex:
    """
    Build a valid Floer-type complex on `rank` generators.

    Args:
        seed: Seed for numpy's default_rng (settings seed by default)
        rank: Number of generators; 0 gives the empty complex
        hbar: The hbar of the split
        beta_target: Norm boundary depth aimed for (every bar is at most this)

    Returns:
        FloerTypeComplex, identical for identical arguments
    """
    hbar = to_fraction(hbar)
    beta_target = to_fraction(beta_target)
    if rank < 0:
        raise ValueError("rank must be non-negative")
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    if beta_target < 0:
        raise ValueError("beta_target must be non-negative")
    if rank == 0:
        return FloerTypeComplex.empty(hbar)
    rng = np.random.default_rng(get_settings().seed if seed is None else seed)

    pairs = int(rng.integers(0, rank // 2 + 1))
    if beta_target > 0 and rank >= 2:
        pairs = max(pairs, 1)
    specs: List[Tuple[int, Fraction, Fraction]] = []  # (degree of x, lam, bar)
    for p in range(pairs):
        deformed = bool(rng.integers(0, 2))
        lam = hbar + Fraction(int(rng.integers(0, GRID)), GRID) if deformed else Fraction(0)
        bar = beta_target if p == 0 else _grid(rng, Fraction(0), beta_target)
        specs.append((int(rng.integers(0, MAX_DEGREE)), lam, bar))

    gens: List[Generator] = []
    entries: Dict[Tuple[int, int], NovikovElement] = {}
    for p, (k, lam, bar) in enumerate(specs):
        gx = _grid(rng, Fraction(0), Fraction(2))
        # normalized entry T^(lam + g_y - g_x) has valuation exactly bar
        gy = bar + gx - lam
        coeff = Fraction(int(rng.integers(1, 4)) * int(rng.choice([-1, 1])))
        gens.append(Generator(f"x{p}", k, gx))
        gens.append(Generator(f"y{p}", k + 1, gy))
        entries[(2 * p + 1, 2 * p)] = T(lam, coeff)
    for f in range(rank - 2 * pairs):
        gens.append(Generator(f"f{f}", int(rng.integers(0, MAX_DEGREE + 1)), _grid(rng, Fraction(-1), Fraction(2))))

    basis = ValuedBasis(tuple(gens))
    d = NovMatrix(basis, basis, entries)
    d = _conjugate(basis, d, rng, 2 * rank, hbar)
    logger.debug("random complex seed=%s rank=%d pairs=%d", seed, rank, pairs)
    return FloerTypeComplex.from_differential(basis, d, hbar)
