"""
Unit tests for Floer-type complexes, telescopes and the associated graded
"""

from fractions import Fraction

import pytest

from novarch.algebra.matrix import NORM, Generator, NovMatrix, ValuedBasis
from novarch.algebra.novikov import INF, ONE, T
from novarch.complexes.floer import FloerTypeComplex, min_positive_gap, validate_floer_type
from novarch.complexes.reduction import associated_graded, quotient_outside
from novarch.complexes.telescope import (
    OneRay,
    build_telescope,
    inclusion_map,
    telescope_sequence,
    telescope_stability,
)
from novarch.errors import NotAcyclic, NotChainMap, NotSubcomplex


def make_complex(generators, entries, hbar=1, modulus=0):
    basis = ValuedBasis(tuple(generators), modulus)
    names = basis.names
    d = NovMatrix(basis, basis, {(names.index(t), names.index(s)): x for (s, t), x in entries.items()})
    return FloerTypeComplex.from_differential(basis, d, hbar)


@pytest.fixture
def pair():
    """d x = T^2 y with g_x = 0, g_y = 1 and relative valuations 0."""
    return make_complex([Generator("x", 0, 0), Generator("y", 1, 1)], {("x", "y"): T(2)})


@pytest.fixture
def mixed():
    """d x = y + T z: a d0 part and a d1 part at hbar = 1."""
    return make_complex(
        [Generator("x", 0), Generator("y", 1), Generator("z", 1)],
        {("x", "y"): ONE, ("x", "z"): T(1)},
    )


class TestFloerTypeComplex:

    def test_pair_is_valid(self, pair):
        """Test the pair satisfies every Floer-type condition."""
        report = validate_floer_type(pair)
        assert report.valid
        assert report.first_violation is None

    def test_split(self, mixed):
        """Test d0 keeps the constant and d1 the T^hbar part shifted down."""
        assert dict(mixed.d0.items()) == {(1, 0): ONE}
        assert dict(mixed.d1.items()) == {(2, 0): ONE}

    def test_split_recombines(self, mixed):
        """Test d0 + T^hbar d1 gives back d."""
        assert (mixed.d0_raw() + mixed.perturbation_raw()).equals_mod(mixed.differential, 10)

    def test_unperturbed(self, mixed):
        """Test the unperturbed complex keeps only d0."""
        assert mixed.unperturbed().differential.nnz() == 1

    def test_scaled(self, pair):
        """Test scaling by t multiplies hbar and every bar by t."""
        scaled = pair.scaled(2)
        assert scaled.hbar == 2
        assert scaled.barcode(NORM).bars() == [Fraction(6)]
        with pytest.raises(ValueError):
            pair.scaled(0)

    def test_with_hbar(self, pair):
        """Test hbar may grow up to the least positive exponent."""
        assert validate_floer_type(pair.with_hbar(2)).valid
        report = validate_floer_type(pair.with_hbar(3))
        assert report.first_violation.condition == "split"

    def test_min_positive_gap(self, pair, mixed):
        """Test the gap is the least positive relative exponent."""
        assert min_positive_gap(pair) == 2
        assert min_positive_gap(mixed) == 1
        assert min_positive_gap(FloerTypeComplex.empty()) == INF

    def test_empty(self):
        """Test the empty complex is valid and has empty homology."""
        c = FloerTypeComplex.empty(hbar=1)
        assert c.rank == 0
        assert validate_floer_type(c).valid


class TestValidation:

    def test_nonpositive_hbar(self, pair):
        """Test hbar <= 0 is reported first."""
        report = validate_floer_type(pair.with_hbar(0))
        assert not report.valid
        assert report.first_violation.condition == "hbar"

    def test_degree(self):
        """Test an entry that keeps the degree is a degree violation."""
        c = make_complex([Generator("a", 0), Generator("b", 0)], {("a", "b"): ONE})
        violation = validate_floer_type(c).first_violation
        assert violation.condition == "degree"
        assert violation.witness == "a"

    def test_norm(self):
        """Test |d x| > |x| is a norm violation."""
        c = make_complex([Generator("x", 0, 1), Generator("y", 1, 0)], {("x", "y"): ONE})
        assert validate_floer_type(c).first_violation.condition == "norm"

    def test_square_zero(self):
        """Test d^2 != 0 is reported with the source generator."""
        c = make_complex(
            [Generator("a", 0), Generator("b", 1), Generator("c", 2)],
            {("a", "b"): ONE, ("b", "c"): ONE},
        )
        violation = validate_floer_type(c).first_violation
        assert violation.condition == "square_zero"
        assert violation.witness == "a"

    def test_filtration(self):
        """Test lowering the relative valuation is a filtration violation."""
        c = make_complex(
            [Generator("x", 0, 0, 1), Generator("y", 1, 0, 0)],
            {("x", "y"): ONE},
        )
        report = validate_floer_type(c)
        assert report.first_violation.condition == "filtration"

    def test_exponent_inside_gap(self):
        """Test an exponent strictly between 0 and hbar breaks the split."""
        c = make_complex([Generator("x", 0), Generator("y", 1)], {("x", "y"): T(Fraction(1, 2))})
        violation = validate_floer_type(c).first_violation
        assert violation.condition == "split"
        assert violation.witness == "x"


class TestTelescope:

    def test_two_stage_telescope_is_a_complex(self, pair):
        """Test the telescope differential squares to zero."""
        tel = build_telescope(telescope_sequence([pair, pair]))
        assert tel.stage_count == 2
        assert len(tel.basis) == 6
        assert validate_floer_type(tel.complex).valid

    def test_cone_generators_shift_degree(self, pair):
        """Test q0:a sits one degree below a."""
        tel = build_telescope(telescope_sequence([pair, pair]))
        basis = tel.basis
        assert basis.degree(basis.index("q0:x")) == -1
        assert basis.degree(basis.index("q0:y")) == 0

    def test_stability(self, pair):
        """Test a constant ray keeps the homology of one stage."""
        report = telescope_stability(telescope_sequence([pair, pair]))
        assert report.stable
        assert report.torsion_after == {1: [Fraction(3)]}
        assert report.free_after == {}

    def test_single_stage(self, pair):
        """Test one stage is renamed and gets no cone copies."""
        tel = build_telescope(telescope_sequence([pair]))
        assert tel.basis.names == ["s0:x", "s0:y"]

    def test_empty_ray(self):
        """Test the empty ray gives the empty complex."""
        tel = build_telescope(OneRay())
        assert tel.stage_count == 0
        assert tel.complex.rank == 0

    def test_map_count_checked(self, pair):
        """Test two stages need exactly one map."""
        with pytest.raises(ValueError):
            OneRay((pair, pair), ())

    def test_not_a_chain_map(self, pair):
        """Test a map that forgets y does not commute with d."""
        kappa = NovMatrix(pair.basis, pair.basis, {(0, 0): ONE})
        with pytest.raises(NotChainMap):
            build_telescope(OneRay((pair, pair), (kappa,)))

    def test_inclusion_needs_names(self, pair, mixed):
        """Test inclusion maps require every source name in the target."""
        with pytest.raises(ValueError):
            inclusion_map(mixed, pair)


class TestAssociatedGraded:

    def test_drops_deformation(self, mixed):
        """Test gr keeps only the rational d0 entries."""
        reduced = associated_graded(mixed)
        assert reduced.rational_entries() == {(1, 0): Fraction(1)}
        assert reduced.homology_ranks() == {0: 0, 1: 1}

    def test_relative_valuations_reduced(self):
        """Test relative valuations are moved into [0, hbar)."""
        c = make_complex([Generator("x", 0, 0, Fraction(5, 2))], {}, hbar=1)
        reduced = associated_graded(c)
        assert reduced.basis[0].relative_valuation == Fraction(1, 2)

    def test_entries_read_before_the_move(self):
        """Test a non-uniform move keeps the d0 entry of the original relative normalization."""
        c = make_complex(
            [Generator("x", 0, 0, Fraction(5, 2)), Generator("y", 1, 0, 0)],
            {("x", "y"): T(Fraction(5, 2))},
        )
        reduced = associated_graded(c)
        assert [g.relative_valuation for g in reduced.basis] == [Fraction(1, 2), Fraction(0)]
        assert reduced.rational_entries() == {(1, 0): Fraction(1)}
        assert reduced.homology_ranks() == {0: 0, 1: 0}

    def test_as_complex(self, mixed):
        """Test the rational part is itself a valid complex."""
        assert validate_floer_type(associated_graded(mixed).as_complex()).valid


class TestQuotientOutside:

    def test_acyclic_pair_removed(self):
        """Test an outside acyclic pair is divided out."""
        c = make_complex(
            [Generator("u", 0, outside=True), Generator("v", 1, outside=True), Generator("w", 0)],
            {("u", "v"): ONE},
        )
        quotient = quotient_outside(associated_graded(c))
        assert quotient.rank == 1
        assert quotient.basis.names == ["w"]

    def test_not_subcomplex(self):
        """Test an outside generator hitting an inside one is refused."""
        c = make_complex(
            [Generator("u", 0, outside=True), Generator("w", 1)],
            {("u", "w"): ONE},
        )
        with pytest.raises(NotSubcomplex):
            quotient_outside(associated_graded(c))

    def test_not_acyclic(self):
        """Test an outside cycle is refused with its name as witness."""
        c = make_complex([Generator("u", 0, outside=True), Generator("w", 0)], {})
        with pytest.raises(NotAcyclic) as info:
            quotient_outside(associated_graded(c))
        assert info.value.witness == "u"

    def test_no_flags_is_identity(self, mixed):
        """Test nothing flagged leaves the complex alone."""
        reduced = associated_graded(mixed)
        assert quotient_outside(reduced) is reduced
