"""
Unit tests for boundary depth
"""

import os
from fractions import Fraction

import pytest

from novarch.algebra.matrix import NORM, RELATIVE, Generator, NovMatrix, ValuedBasis
from novarch.algebra.novikov import T
from novarch.complexes.floer import FloerTypeComplex, ValuedComplex
from novarch.errors import NotAComplex, PrecisionExhausted
from novarch.models.random_complex import random_floer_complex
from novarch.perturbation.depth import (
    boundary_depth_bruteforce,
    boundary_depth_def,
    boundary_depth_torsion,
)

FUZZ_SCALE = int(os.getenv("NOVARCH_FUZZ_SCALE", "1"))
# NOVARCH_FUZZ_SCALE=10 runs 500 complexes
FUZZ_COMPLEXES = 50 * FUZZ_SCALE


@pytest.fixture
def pair():
    """d x = T^2 y, g_y = 1: one bar of length 3 in the norm lattice."""
    basis = ValuedBasis((Generator("x", 0, 0), Generator("y", 1, 1)))
    return FloerTypeComplex.from_differential(basis, NovMatrix(basis, basis, {(1, 0): T(2)}), 1)


@pytest.fixture
def two_bars():
    """d x0 = T y0 + T^2 y1, d x1 = T^(1/2) y1: bars 1/2 and 1."""
    basis = ValuedBasis((Generator("x0", 0), Generator("x1", 0), Generator("y0", 1), Generator("y1", 1)))
    d = NovMatrix(basis, basis, {(2, 0): T(1), (3, 0): T(2), (3, 1): T(Fraction(1, 2))})
    return FloerTypeComplex.from_differential(basis, d, 1)


class TestBoundaryDepth:

    def test_pair(self, pair):
        """Test every method finds the single bar."""
        assert boundary_depth_def(pair, NORM) == 3
        assert boundary_depth_torsion(pair, NORM) == 3
        assert boundary_depth_bruteforce(pair, NORM) == 3

    def test_lattice_choice(self, pair):
        """Test the relative lattice ignores g_y."""
        assert boundary_depth_def(pair, RELATIVE) == 2

    def test_two_bars_agree(self, two_bars):
        """Test definition, torsion and brute force agree on two coupled bars."""
        assert boundary_depth_def(two_bars) == 1
        assert boundary_depth_torsion(two_bars) == 1
        assert boundary_depth_bruteforce(two_bars) == 1
        assert two_bars.barcode().bars() == [Fraction(1, 2), Fraction(1)]

    def test_zero_differential(self):
        """Test a complex without differential has depth zero."""
        basis = ValuedBasis((Generator("a", 0), Generator("b", 1)))
        c = ValuedComplex(basis, NovMatrix.zero(basis, basis))
        assert boundary_depth_def(c) == 0
        assert boundary_depth_torsion(c) == 0
        assert boundary_depth_bruteforce(c) == 0

    def test_empty_complex(self):
        """Test the empty complex has depth zero."""
        c = FloerTypeComplex.empty()
        assert boundary_depth_def(c) == 0
        assert boundary_depth_torsion(c) == 0

    def test_random_complexes(self):
        """Test the definition and the torsion agree with the targeted depth on ranks 2 to 8."""
        for seed in range(FUZZ_COMPLEXES):
            target = Fraction(seed % 4 + 1, 2)
            c = random_floer_complex(seed=seed, rank=2 + seed % 7, beta_target=target)
            assert boundary_depth_def(c) == target
            assert boundary_depth_torsion(c) == target

    def test_precision_exhausted(self):
        """Test a depth at the horizon is refused."""
        basis = ValuedBasis((Generator("x", 0), Generator("y", 1)))
        c = ValuedComplex(basis, NovMatrix(basis, basis, {(1, 0): T(9)}))
        with pytest.raises(PrecisionExhausted):
            boundary_depth_def(c, precision=10, slack=1)

    def test_not_a_complex(self):
        """Test d^2 != 0 is refused."""
        basis = ValuedBasis((Generator("a", 0), Generator("b", 1), Generator("c", 2)))
        d = NovMatrix(basis, basis, {(1, 0): T(0), (2, 1): T(0)})
        with pytest.raises(NotAComplex):
            boundary_depth_def(ValuedComplex(basis, d))

    def test_bruteforce_size_limit(self):
        """Test brute force refuses more than four generators."""
        c = random_floer_complex(seed=1, rank=5)
        with pytest.raises(ValueError):
            boundary_depth_bruteforce(c)

    def test_scaling(self):
        """Test beta of the t-scaled complex is t beta."""
        for seed in range(4 * FUZZ_SCALE):
            c = random_floer_complex(seed=seed, rank=6, beta_target=Fraction(3, 2))
            beta = boundary_depth_def(c)
            for t in (Fraction(1, 3), Fraction(2), Fraction(7, 2)):
                assert boundary_depth_def(c.scaled(t), precision=20) == t * beta

    def test_negative_entry(self):
        """Test a differential leaving Lambda_{>=0} in the chosen lattice is refused."""
        basis = ValuedBasis((Generator("x", 0, 2), Generator("y", 1, 0)))
        c = ValuedComplex(basis, NovMatrix(basis, basis, {(1, 0): T(1)}))
        with pytest.raises(ValueError, match="negative valuation"):
            boundary_depth_def(c, NORM)
        assert boundary_depth_def(c, RELATIVE) == 1
