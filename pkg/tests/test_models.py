"""
Unit tests for the model families
"""

from fractions import Fraction

import pytest

from novarch.complexes.floer import validate_floer_type
from novarch.errors import NotClosed
from novarch.models.cp1 import cp1_hbar, cp1_model
from novarch.models.polyvector import (
    PolyvectorBV,
    bv_as_complex,
    check_bv_identities,
    d_function,
    div_omega0,
    polyannulus_bv,
    rectify_volume_form,
    solve_exact_logform,
    upsilon,
    wedge_sign,
)
from novarch.models.random_complex import random_floer_complex
from novarch.perturbation.depth import boundary_depth_def


@pytest.fixture
def line_bv():
    """One factor, exponents -1..1."""
    return PolyvectorBV(n=1, radii=((1, 1),), N=1)


@pytest.fixture
def plane_bv():
    return polyannulus_bv(2, N=1, seed=0)


class TestCP1Model:

    def test_generators(self):
        """Test N + 1 even and N - 1 odd generators."""
        model = cp1_model(Fraction(3, 5), 6)
        assert model.complex.rank == 12
        assert model.complex.basis.names[:2] == ["y0", "y1"]
        assert model.hbar == Fraction(1, 5)

    def test_valid(self):
        """Test every truncation is a Floer-type complex."""
        for N in (4, 5, 8):
            assert validate_floer_type(cp1_model(Fraction(2, 5), N).complex).valid

    def test_hbar_at_half(self):
        """Test the gap falls back to 1 when the two exponents meet."""
        assert cp1_hbar(Fraction(1, 2)) == 1
        assert cp1_hbar(Fraction(1, 4)) == Fraction(1, 2)

    def test_metadata(self):
        """Test the recorded parameters."""
        meta = cp1_model(Fraction(1, 3), 4, E=12).metadata()
        assert meta == {"family": "cp1", "r": "1/3", "N": 4, "E": "12"}

    def test_parameters_checked(self):
        """Test r outside (0, 1) and short truncations are refused."""
        with pytest.raises(ValueError):
            cp1_model(1, 6)
        with pytest.raises(ValueError):
            cp1_model(0, 6)
        with pytest.raises(ValueError):
            cp1_model(Fraction(1, 3), 3)


class TestPolyvectors:

    def test_wedge_sign(self):
        """Test reordering and overlap of log-derivations."""
        assert wedge_sign((1,), (0,)) == (-1, (0, 1))
        assert wedge_sign((0,), (1,)) == (1, (0, 1))
        assert wedge_sign((0,), (0,))[0] == 0

    def test_delta_on_vector_field(self):
        """Test Delta(z^2 theta) = 2 z^2."""
        assert div_omega0({((2,), (0,)): Fraction(1)}) == {((2,), ()): Fraction(2)}

    def test_delta_on_bivector(self):
        """Test Delta(z1 z2 theta1 theta2) = z1 z2 (theta2 - theta1)."""
        out = div_omega0({((1, 1), (0, 1)): Fraction(1)})
        assert out == {((1, 1), (1,)): Fraction(1), ((1, 1), (0,)): Fraction(-1)}

    def test_delta_kills_functions(self, line_bv):
        """Test Delta vanishes on functions and on theta itself."""
        assert line_bv.delta({((1,), ()): Fraction(1)}) == {}
        assert line_bv.delta({((0,), (0,)): Fraction(1)}) == {}

    def test_bracket_with_function(self, line_bv):
        """Test {theta, z} = theta(z) = z."""
        theta = {((0,), (0,)): Fraction(1)}
        z = {((1,), ()): Fraction(1)}
        assert line_bv.bracket(theta, z) == {((1,), ()): Fraction(1)}

    def test_bracket_of_vector_fields(self, line_bv):
        """Test the bracket restricts to the Lie bracket [theta, z theta] = z theta."""
        theta = {((0,), (0,)): Fraction(1)}
        z_theta = {((1,), (0,)): Fraction(1)}
        assert line_bv.bracket(theta, z_theta) == z_theta
        assert line_bv.gerstenhaber(theta, z_theta) == {((1,), (0,)): Fraction(-1)}

    def test_bv_identities(self, plane_bv):
        """Test Delta^2 = 0 with Leibniz and Jacobi on sampled triples."""
        assert all(plane_bv.checks.values()), plane_bv.checks
        assert set(plane_bv.checks) == {"delta_squared", "functions", "lowers_degree", "jacobi", "leibniz"}

    def test_explicit_triples(self, plane_bv):
        """Test the identities on a given triple of mixed degrees."""
        triples = [(((1, 0), (0, 1)), ((0, 1), (0,)), ((1, -1), ()))]
        assert all(check_bv_identities(plane_bv, triples=triples).values())

    def test_monomial_val(self):
        """Test val(z^a) is the minimum over the moment box."""
        bv = PolyvectorBV(n=1, radii=((Fraction(1, 2), 2),), N=1)
        assert bv.monomial_val((1,)) == -2
        assert bv.monomial_val((-1,)) == Fraction(-1, 2)

    def test_dimension_checked(self):
        """Test one radius pair per factor is needed."""
        with pytest.raises(ValueError):
            PolyvectorBV(n=2, radii=((1, 1),), N=1)

    def test_upsilon(self, plane_bv):
        """Test Upsilon is a polyderivation compatible with product and bracket."""
        up = upsilon(plane_bv, seed=0, samples=20)
        assert up.report.ok, up.report
        f = {((2, 0), ()): Fraction(1)}
        assert up.evaluate({((0, 0), (0,)): Fraction(1)}, f) == {((2, 0), ()): Fraction(2)}


class TestLogForms:

    def test_exact_with_obstruction(self):
        """Test d(3 z1 z2^2) + 5 dlog z2 splits into h and the constant part."""
        alpha = d_function({(1, 2): Fraction(3)})
        alpha[((0, 0), 1)] = Fraction(5)
        solve = solve_exact_logform(alpha)
        assert solve.h == {(1, 2): Fraction(3)}
        assert solve.obstruction == {1: Fraction(5)}
        assert not solve.exact
        assert solve.residual_ok
        summary = solve.summary()
        assert summary.h == {"[1, 2]": "3"}
        assert summary.obstruction == {"2": "5"}

    def test_not_closed(self):
        """Test z1 z2 dlog z1 is refused with its exponent."""
        with pytest.raises(NotClosed) as err:
            solve_exact_logform({((1, 1), 0): 1})
        assert err.value.witness == "exponent [1, 1], indices (1, 2)"

    def test_rectify_twisted_delta(self):
        """Test div + iota_alpha with alpha = 2 dz is div of e^(2z) dz/z."""
        bv = PolyvectorBV(n=1, radii=((1, 1),), N=1, twist={((1,), 0): Fraction(2)})
        result = rectify_volume_form(bv)
        assert result.alpha == {((1,), 0): Fraction(2)}
        assert all(result.checks.values())
        assert result.rescaled_volume() == {(1,): Fraction(2)}

    def test_rectify_constant_twist(self):
        """Test a constant twist is reported as the obstruction."""
        bv = PolyvectorBV(n=1, radii=((1, 1),), N=1, twist={((0,), 0): Fraction(1)})
        result = rectify_volume_form(bv)
        assert result.checks["first_order"]
        assert not result.checks["exact"]
        assert result.solve.obstruction == {0: Fraction(1)}

    def test_bv_as_complex(self, line_bv):
        """Test the carrier as a complex: Delta pairs z^a theta with z^a for a != 0."""
        c = bv_as_complex(line_bv)
        assert c.rank == 6
        assert "z[1]t[1]" in c.basis.names
        assert c.barcode().total_free() == 2


class TestRandomComplex:

    def test_deterministic(self):
        """Test equal seeds give equal complexes."""
        a = random_floer_complex(seed=3, rank=6)
        b = random_floer_complex(seed=3, rank=6)
        assert a.basis.names == b.basis.names
        assert a.differential.to_triplets() == b.differential.to_triplets()

    def test_valid(self):
        """Test generated complexes pass validation."""
        for seed in range(8):
            c = random_floer_complex(seed=seed, rank=7, hbar=Fraction(1, 2))
            assert validate_floer_type(c).valid
            assert c.rank == 7

    def test_coupled_entries(self):
        """Test the basis changes leave multi-term entries and columns hitting several generators."""
        multi_term = coupled = False
        for seed in range(10):
            c = random_floer_complex(seed=seed, rank=8, beta_target=Fraction(3, 2))
            multi_term = multi_term or any(len(x.terms) > 1 for _, x in c.differential.items())
            coupled = coupled or any(len(col) > 1 for col in c.differential.columns())
            assert boundary_depth_def(c) == Fraction(3, 2)
            assert validate_floer_type(c).valid
        assert multi_term and coupled

    def test_rank_zero(self):
        """Test rank 0 gives the empty complex."""
        assert random_floer_complex(seed=0, rank=0).rank == 0

    def test_zero_depth(self):
        """Test beta_target 0 gives depth 0."""
        assert boundary_depth_def(random_floer_complex(seed=2, rank=6, beta_target=0)) == 0

    def test_arguments_checked(self):
        """Test negative rank, non-positive hbar and negative depth are refused."""
        with pytest.raises(ValueError):
            random_floer_complex(rank=-1)
        with pytest.raises(ValueError):
            random_floer_complex(hbar=0)
        with pytest.raises(ValueError):
            random_floer_complex(beta_target=-1)
