"""
Unit tests for affinoid models, rigidity isomorphisms and rectification
"""

from fractions import Fraction

import pytest

from novarch.algebra.matrix import Generator, NovMatrix, ValuedBasis
from novarch.algebra.novikov import INF, ONE, T
from novarch.errors import (
    ImageNotSpanning,
    NoInitialObject,
    NotAlmostCommutative,
    NotClose,
)
from novarch.rigidity.affinoid import AffinoidModel, ProductPerturbation
from novarch.rigidity.isomorphisms import (
    perturbation_close_to,
    random_unit_terms,
    rigidity_iso_annulus,
    rigidity_iso_laurent,
    rigidity_iso_polyannulus,
    rigidity_iso_tate,
    solve_relation,
    star_unit,
)
from novarch.rigidity.rectify import Diagram, is_isometry, rectify_map, rectify_natural_transformation


def line(name):
    return ValuedBasis((Generator(name, 0),))


def scalar_map(source, target, x):
    return NovMatrix(target, source, {(0, 0): x})


@pytest.fixture
def tate():
    return AffinoidModel.tate(1, degree=3, precision=10)


@pytest.fixture
def annulus():
    """z1 z2 = T."""
    return AffinoidModel.annulus(Fraction(1, 2), Fraction(1, 2), degree=3, precision=10)


class TestAffinoidModel:

    def test_annulus_relation(self, annulus):
        """Test z1 z2 reduces to T."""
        z1, z2 = annulus.variable("z1"), annulus.variable("z2")
        product = annulus.mul(z1, z2)
        assert list(product) == [(0, 0)]
        assert product[(0, 0)] == T(1)

    def test_basis_is_reduced(self, annulus):
        """Test no basis monomial carries both z1 and z2."""
        basis = annulus.basis()
        assert (1, 1) not in basis
        assert basis[0] == (0, 0)
        assert len(basis) == 7

    def test_parse_rejects_unreduced(self, annulus):
        """Test z1*z2 is not a basis monomial."""
        with pytest.raises(ValueError):
            annulus.parse_monomial("z1*z2")
        assert annulus.format_monomial(annulus.parse_monomial("z1^2")) == "z1^2"

    def test_clean_drops_precision(self, tate):
        """Test terms of valuation >= E are dropped."""
        x = tate.element({"x1": T(10)})
        assert x == {}

    def test_laurent_variable(self):
        """Test x1 is f - 1 on a Laurent domain."""
        A = AffinoidModel.laurent(1, Fraction(1, 2))
        x1 = A.variable("x1")
        assert x1[(1, 0)] == ONE
        assert x1[(0, 0)] == -1

    def test_negative_valuation_rejected(self):
        """Test slot valuations below zero are refused."""
        with pytest.raises(ValueError):
            AffinoidModel(("x",), (-1,))

    def test_table_gap(self, tate):
        """Test the closeness exponent of an explicit product table."""
        P = ProductPerturbation.from_table(tate, {((1,), (1,)): tate.element({"x1^2": ONE + T(2)})})
        assert P.gap == 2
        assert P.star(tate.variable("x1"), tate.variable("x1"))[(2,)] == ONE + T(2)


class TestRigidityIsomorphisms:

    def test_tate(self, tate):
        """Test the Tate isomorphism for a twist of size e^-1."""
        P = perturbation_close_to(tate, 1)
        iso = rigidity_iso_tate(tate, P)
        assert iso.ok, iso.checks
        assert iso.distance == 1
        summary = iso.to_dict()
        assert summary["kind"] == "tate"
        assert set(summary["checks"]) == {"unit", "isometry", "homomorphism", "near_identity"}

    def test_star_unit(self, tate):
        """Test the unit of a(1 + T)b is (1 + T)^-1."""
        P = perturbation_close_to(tate, 1)
        e = star_unit(P)
        assert tate.mul(e, {(0,): ONE + T(1)}) == tate.one()

    def test_identity_product(self, tate):
        """Test the reference product gives the identity map."""
        iso = rigidity_iso_tate(tate, ProductPerturbation.identity(tate))
        assert iso.ok
        assert iso.distance == INF

    def test_tate_not_close(self, tate):
        """Test c >= 1 is refused."""
        with pytest.raises(NotClose):
            rigidity_iso_tate(tate, perturbation_close_to(tate, 0))

    def test_annulus(self, annulus):
        """Test the annulus isomorphism for c = e^-2 < e^-1."""
        iso = rigidity_iso_annulus(annulus, perturbation_close_to(annulus, 2))
        assert iso.ok, iso.checks
        assert iso.trusted_precision == 10
        assert len(iso.traces) == 1

    def test_annulus_not_close(self, annulus):
        """Test c = e^-(r1 + r2) is not close enough."""
        with pytest.raises(NotClose):
            rigidity_iso_annulus(annulus, perturbation_close_to(annulus, 1))

    def test_polyannulus(self):
        """Test two annulus factors solved independently."""
        A = AffinoidModel.polyannulus([(Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 4), Fraction(1, 4))], degree=2)
        iso = rigidity_iso_polyannulus(A, perturbation_close_to(A, 2))
        assert iso.ok, iso.checks
        assert len(iso.traces) == 2

    def test_laurent(self):
        """Test the Laurent domain isomorphism."""
        A = AffinoidModel.laurent(1, Fraction(1, 2), degree=3)
        iso = rigidity_iso_laurent(A, perturbation_close_to(A, 1))
        assert iso.ok, iso.checks

    def test_kind_checked(self, annulus):
        """Test the Tate construction refuses an annulus model."""
        with pytest.raises(ValueError):
            rigidity_iso_tate(annulus, perturbation_close_to(annulus, 2))


def relation_defect(A, P, iso, first, second):
    """z1 * phi(z2) - T^s e in the model, empty when the relation holds mod T^E."""
    pair = next(p for p in A.pairs if p.first == A.slot(first))
    lhs = P.star(A.variable(first), iso.images[A.slot(second)])
    return A.sub(lhs, A.shift(iso.unit, pair.exponent))


class TestRandomTwists:

    def test_random_terms_have_unit_norm(self):
        """Test the seeded u has a nonzero constant and norm 1."""
        A = AffinoidModel.tate(2, degree=6)
        terms = random_unit_terms(A, seed=4, support=2)
        assert terms == random_unit_terms(A, seed=4, support=2)
        assert terms[A.unit_monomial()] != 0
        assert len(terms) == 3
        assert A.val(A.element(terms)) == 0

    def test_tate(self):
        """Test T2 at N = 6 with x*y = xy(1 + T u) for several seeded u."""
        A = AffinoidModel.tate(2, degree=6, precision=10)
        for seed in range(3):
            P = perturbation_close_to(A, 1, random_unit_terms(A, seed))
            iso = rigidity_iso_tate(A, P)
            assert iso.ok, (seed, iso.checks)
            assert iso.distance == 1

    def test_solve_stops_at_resolvable_precision(self):
        """Test the correction returns once the defect reaches T^(E - s) instead of stalling."""
        A = AffinoidModel.annulus(1, 1, degree=4, precision=10)
        P = perturbation_close_to(A, Fraction(5, 2), {"1": 1, "z1": 1, "z1^2": 1, "z2^2": -1})
        z1, z2 = A.variable("z1"), A.variable("z2")
        _, trace = solve_relation(P, z1, z2, 2, star_unit(P))
        last = trace.defects[-1]
        assert last == "inf" or Fraction(last) >= 8

    def test_annulus(self):
        """Test r1 = r2 = 1 at c = e^-2.5 and N = 6 with non-constant u."""
        A = AffinoidModel.annulus(1, 1, degree=6, precision=10)
        twists = [{"1": 1, "z1": 1, "z1^2": 1, "z2^2": -1}] + [random_unit_terms(A, seed, 2) for seed in range(3)]
        for terms in twists:
            P = perturbation_close_to(A, Fraction(5, 2), terms)
            iso = rigidity_iso_annulus(A, P)
            assert iso.ok, (terms, iso.checks)
            assert iso.distance == Fraction(5, 2)
            assert iso.traces[0].steps <= 20
            assert relation_defect(A, P, iso, "z1", "z2") == {}

    def test_polyannulus_mixed_radii(self):
        """Test each factor's relation holds on its own."""
        A = AffinoidModel.polyannulus([(Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 4), Fraction(1, 4))], degree=2)
        P = perturbation_close_to(A, 2, random_unit_terms(A, seed=1, support=2))
        iso = rigidity_iso_polyannulus(A, P)
        assert iso.ok, iso.checks
        assert relation_defect(A, P, iso, "z1_1", "z2_1") == {}
        assert relation_defect(A, P, iso, "z1_2", "z2_2") == {}

    def test_single_factor_polyannulus(self):
        """Test one factor gives the annulus isomorphism."""
        A = AffinoidModel.annulus(Fraction(1, 2), Fraction(1, 2), degree=3)
        P = perturbation_close_to(A, 2, random_unit_terms(A, seed=2))
        assert rigidity_iso_polyannulus(A, P).to_dict() == rigidity_iso_annulus(A, P).to_dict()

    def test_laurent(self):
        """Test f = 1 + x1, r = 1 and c = e^-1.2 at N = 4."""
        A = AffinoidModel.laurent(1, 1, degree=4, precision=10)
        for seed in range(2):
            P = perturbation_close_to(A, Fraction(6, 5), random_unit_terms(A, seed))
            iso = rigidity_iso_laurent(A, P)
            assert iso.ok, (seed, iso.checks)
            assert relation_defect(A, P, iso, "f", "g") == {}


class TestRectification:

    @pytest.fixture
    def spaces(self):
        return line("a0"), line("a1"), line("b0"), line("b1")

    def test_rectify_square(self, spaces):
        """Test g = 1 + T is rectified to 1."""
        a0, a1, b0, b1 = spaces
        f, h0, h1 = scalar_map(a0, b0, ONE), scalar_map(a0, a1, ONE), scalar_map(b0, b1, ONE)
        g = scalar_map(a1, b1, ONE + T(1))
        result = rectify_map(f, g, h0, h1)
        assert result.ok
        assert result.map.entry(0, 0) == ONE
        assert result.distance == 1

    def test_not_almost_commutative(self, spaces):
        """Test |g h0 - h1 f| = |g h0| is refused."""
        a0, a1, b0, b1 = spaces
        f, h0, h1 = scalar_map(a0, b0, ONE), scalar_map(a0, a1, ONE), scalar_map(b0, b1, ONE)
        with pytest.raises(NotAlmostCommutative):
            rectify_map(f, scalar_map(a1, b1, T(0, 2)), h0, h1)

    def test_image_not_spanning(self):
        """Test a structure map into a bigger space is refused."""
        a0, b0, b1 = line("a0"), line("b0"), line("b1")
        a1 = ValuedBasis((Generator("p", 0), Generator("q", 0)))
        h0 = NovMatrix(a1, a0, {(0, 0): ONE})
        g = NovMatrix(b1, a1, {(0, 0): ONE})
        with pytest.raises(ImageNotSpanning):
            rectify_map(scalar_map(a0, b0, ONE), g, h0, scalar_map(b0, b1, ONE))

    def test_is_isometry(self):
        """Test T is not an isometry but 1 + T is."""
        a, b = line("a"), line("b")
        assert is_isometry(scalar_map(a, b, ONE + T(1)))
        assert not is_isometry(scalar_map(a, b, T(1)))

    def test_natural_transformation(self):
        """Test both routes to the last object agree."""
        spaces = {o: (line(f"a{o}"), line(f"b{o}")) for o in "012"}
        arrows = [("0", "1"), ("1", "2"), ("0", "2")]
        source = {(i, j): scalar_map(spaces[i][0], spaces[j][0], ONE) for i, j in arrows}
        target = {(i, j): scalar_map(spaces[i][1], spaces[j][1], ONE) for i, j in arrows}
        maps = {
            "0": scalar_map(*spaces["0"], ONE),
            "1": scalar_map(*spaces["1"], ONE + T(1)),
            "2": scalar_map(*spaces["2"], ONE + T(2)),
        }
        result = rectify_natural_transformation(Diagram(list("012"), source, target, maps))
        assert result.initial == "0"
        assert result.ok, result.checks
        assert result.routes["2"] == 2
        assert result.maps["2"].entry(0, 0) == ONE

    def test_no_initial_object(self):
        """Test a poset without a least element is refused."""
        maps = {o: scalar_map(line(f"a{o}"), line(f"b{o}"), ONE) for o in "ab"}
        with pytest.raises(NoInitialObject):
            rectify_natural_transformation(Diagram(["a", "b"], {}, {}, maps))
