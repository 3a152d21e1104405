"""
Unit tests for the special deformation retraction and homological perturbation
"""

import os
from fractions import Fraction

import pytest

from novarch.algebra.matrix import NORM, RELATIVE, Generator, NovMatrix, ValuedBasis
from novarch.algebra.novikov import INF, ONE, T
from novarch.algebra.smith import TorsionBarcode
from novarch.complexes.floer import FloerTypeComplex, ValuedComplex
from novarch.errors import PerturbationTooLarge
from novarch.models.cp1 import cp1_limit_view, cp1_model
from novarch.models.random_complex import random_floer_complex
from novarch.perturbation.perturb import barcodes_agree, hpt_pipeline, perturb
from novarch.perturbation.sdr import homology_frame, quotient_valuation, special_dr

FUZZ_SCALE = int(os.getenv("NOVARCH_FUZZ_SCALE", "1"))


def make_complex(generators, entries, hbar=1):
    basis = ValuedBasis(tuple(generators))
    names = basis.names
    d = NovMatrix(basis, basis, {(names.index(t), names.index(s)): x for (s, t), x in entries.items()})
    return FloerTypeComplex.from_differential(basis, d, hbar)


@pytest.fixture
def pair_with_class():
    """d x = T^2 y with g_y = 1, plus a free class z."""
    basis = ValuedBasis((Generator("x", 0, 0), Generator("y", 1, 1), Generator("z", 1, 0)))
    return ValuedComplex(basis, NovMatrix(basis, basis, {(1, 0): T(2)}))


@pytest.fixture
def deformed():
    """d a = b (d0) and d u = T v + T b (deformation at hbar = 1)."""
    return make_complex(
        [Generator("u", 0), Generator("a", 0), Generator("v", 1), Generator("b", 1)],
        {("a", "b"): ONE, ("u", "v"): T(1), ("u", "b"): T(1)},
    )


class TestSpecialDR:

    def test_identities(self, pair_with_class):
        """Test the SDR identities and chain-map properties hold exactly."""
        sdr = special_dr(pair_with_class, lattice=NORM)
        assert all(sdr.check().values())
        assert sdr.homology.names == ["z"]

    def test_beta_and_bounds(self, pair_with_class):
        """Test beta is the bar length and |h| = e^beta."""
        sdr = special_dr(pair_with_class, lattice=NORM)
        assert sdr.beta == 3
        bounds = sdr.bounds()
        assert bounds.h_val == -3
        assert bounds.i_val == 0
        assert sdr.bounds_hold()

    def test_homotopy_on_boundary(self, pair_with_class):
        """Test h sends y to its primitive T^-2 x."""
        sdr = special_dr(pair_with_class, lattice=NORM)
        assert sdr.h.column(1) == {0: T(-2)}

    def test_random_complexes(self):
        """Test the identities on random complexes in both lattices."""
        for seed in range(6 * FUZZ_SCALE):
            c = random_floer_complex(seed=seed, rank=6)
            for lattice in (NORM, RELATIVE):
                sdr = special_dr(c, lattice=lattice)
                assert all(sdr.check().values())

    def test_homology_frame(self, pair_with_class):
        """Test the frame names the surviving class."""
        frame = homology_frame(pair_with_class)
        assert [name for name, _ in frame] == ["z"]
        assert quotient_valuation(pair_with_class, {2: ONE}) == 0
        assert quotient_valuation(pair_with_class, {1: ONE}) == INF


class TestPerturbation:

    def test_transferred_differential(self, deformed):
        """Test d_def(u) = T v and tau = hbar."""
        result = hpt_pipeline(deformed, RELATIVE)
        assert result.ok
        assert result.sdr.homology.names == ["u", "v"]
        assert result.tau == 1
        assert result.checks["d_def_below_hbar"]
        assert result.checks["barcodes_coincide"]

    def test_zero_transfer(self):
        """Test a deformation that lands in the image transfers to zero."""
        c = make_complex(
            [Generator("x", 0), Generator("y", 1), Generator("z", 1)],
            {("x", "y"): ONE, ("x", "z"): T(1)},
        )
        result = hpt_pipeline(c)
        assert result.ok
        assert result.tau == INF
        assert result.bounds.hbar == 1

    def test_perturbation_too_large(self):
        """Test val(delta) <= beta is refused in the norm lattice."""
        c = make_complex(
            [Generator("a", 0, 0), Generator("b", 1, 1), Generator("u", 0), Generator("v", 1)],
            {("a", "b"): ONE, ("u", "v"): T(1)},
        )
        with pytest.raises(PerturbationTooLarge):
            hpt_pipeline(c, NORM)
        assert hpt_pipeline(c, RELATIVE).ok

    def test_norm_is_default(self):
        """Test the cp1 model above r = 1/2 is refused without naming a lattice."""
        c = cp1_model(Fraction(3, 5), 8).complex
        with pytest.raises(PerturbationTooLarge):
            hpt_pipeline(c)
        assert hpt_pipeline(c, RELATIVE).ok

    def test_cp1_below_half(self):
        """Test r = 2/5: once the truncation-edge classes are removed, d_def is invertible and homology is 0."""
        model = cp1_model(Fraction(2, 5), 8)
        result = hpt_pipeline(model.complex)
        assert result.ok, result.checks
        assert len(result.sdr.homology) == 2
        view = cp1_limit_view(model, transfer=result)
        assert view.edge == {0: 2}
        assert view.transferred_rank == 0
        assert view.d_def_invertible

    def test_norm_barcodes(self):
        """Test a d0 bar of length beta = 1 is the only source bar missing after transfer."""
        c = make_complex(
            [Generator("a", 0, 0), Generator("b", 1, 1), Generator("u", 0), Generator("v", 1)],
            {("a", "b"): ONE, ("u", "v"): T(3)},
        )
        result = hpt_pipeline(c, NORM)
        assert result.sdr.beta == 1
        assert result.barcodes["source"].torsion[1] == [1, 3]
        assert result.barcodes["deformed"].torsion[1] == [3]
        assert result.checks["barcodes_coincide"]

    def test_barcodes_agree(self):
        """Test leftover source bars must fit under beta and deformed bars must appear in the source."""
        source = TorsionBarcode(torsion={1: [Fraction(1), Fraction(3)]}, free={0: 1})
        assert barcodes_agree(source, TorsionBarcode(torsion={1: [Fraction(3)]}, free={0: 1}), 1)
        assert not barcodes_agree(source, TorsionBarcode(torsion={1: [Fraction(3)]}, free={0: 1}), 0)
        assert not barcodes_agree(source, TorsionBarcode(torsion={1: [Fraction(2)]}, free={0: 1}), 3)
        assert not barcodes_agree(source, TorsionBarcode(torsion={1: [Fraction(1), Fraction(3)]}, free={}), 1)

    def test_cp1_at_half(self):
        """Test the cp1 model at r = 1/2 sits exactly at the threshold in the norm lattice."""
        with pytest.raises(PerturbationTooLarge):
            hpt_pipeline(cp1_model(Fraction(1, 2), 8).complex, NORM)

    def test_zero_delta(self, pair_with_class):
        """Test a zero perturbation leaves the SDR as it was."""
        sdr = special_dr(pair_with_class, lattice=NORM)
        delta = NovMatrix.zero(pair_with_class.basis, pair_with_class.basis)
        result = perturb(sdr, delta)
        assert result.series_terms == 0
        assert result.bounds.margin == INF
        assert result.ok

    def test_random_pipeline(self):
        """Test the pipeline ledger on random complexes."""
        for seed in range(20 * FUZZ_SCALE):
            c = random_floer_complex(seed=seed, rank=2 + seed % 7, hbar=Fraction(1, 2))
            result = hpt_pipeline(c, RELATIVE)
            assert result.ok, result.checks
            assert result.tau >= c.hbar
