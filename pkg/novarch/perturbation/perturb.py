"""
Perturb - Homological perturbation of a special deformation retraction.

With S = sum_n (-1)^n (delta h)^n delta the transferred data are

    d_def = p S i,  i1 = i - h S i,  p1 = p - p S h,  h1 = h - h S h

which form an SDR of (V, d + delta) onto (H, d_def) when |delta| < e^-beta.
Terms of S are dropped once their normalized valuation reaches E + 2 beta,
since h costs at most beta on each side and everything is compared mod T^E.
"""

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional

from pydantic import BaseModel, Field

from novarch.algebra.matrix import NORM, RELATIVE, NovMatrix, vec_normalize
from novarch.algebra.novikov import INF
from novarch.algebra.smith import TorsionBarcode, homology_barcode
from novarch.complexes.floer import FloerTypeComplex, ValuedComplex
from novarch.config import get_settings, to_fraction
from novarch.errors import PerturbationTooLarge, SeriesDiverged
from novarch.perturbation.sdr import (
    SDRData,
    check_sdr_identities,
    degree_splitting,
    homology_frame,
    special_dr,
)
from novarch.utils.logger import get_logger

logger = get_logger(__name__)

EPSILON_CAP = Fraction(1, 100)


class PerturbationBounds(BaseModel):
    """Smallness data of a perturbation, all as valuations."""
    beta: Fraction = Field(description="Boundary depth of the unperturbed complex")
    delta_val: object = Field(description="val(delta) in the chosen lattice; inf for delta = 0")
    epsilon: Fraction = Field(description="Norm slack used for the SDR bounds")
    margin: object = Field(description="val(delta) - beta - 6 epsilon, positive when the bound holds")
    d_def_val: object = Field(default=INF, description="val(d_def)")
    hbar: Optional[Fraction] = Field(default=None, description="Declared hbar, when given")


@dataclass
class PerturbedSDR:
    """Transferred differential and SDR of a perturbed complex, with a check ledger."""
    sdr: SDRData
    delta: NovMatrix
    d_def: NovMatrix
    i1: NovMatrix
    p1: NovMatrix
    h1: NovMatrix
    S: NovMatrix
    series_terms: int
    bounds: PerturbationBounds
    checks: Dict[str, bool] = field(default_factory=dict)
    barcodes: Dict[str, TorsionBarcode] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    @property
    def tau(self):
        """val(d_def); +inf when the deformed differential vanishes."""
        return self.d_def.operator_val(self.sdr.lattice)

    @property
    def deformed_complex(self) -> ValuedComplex:
        return ValuedComplex(self.sdr.homology, self.d_def)


def truncate_normalized(m: NovMatrix, cutoff, lattice: str) -> NovMatrix:
    """Drop the terms whose normalized exponent reaches cutoff."""
    rw, cw = m.rows.weights(lattice), m.cols.weights(lattice)
    entries = {}
    for (i, j), x in m.items():
        entries[(i, j)] = x.truncated_below(cutoff - rw[i] + cw[j])
    return NovMatrix(m.rows, m.cols, entries)


def resolvent(delta: NovMatrix, h: NovMatrix, cutoff, lattice: str, max_terms: int):
    """S = sum_n (-1)^n (delta h)^n delta, cut at the normalized valuation `cutoff`."""
    S = NovMatrix.zero(delta.rows, delta.cols)
    term = truncate_normalized(delta, cutoff, lattice)
    step = delta @ h
    n = 0
    while not term.is_zero():
        if n >= max_terms:
            raise SeriesDiverged(f"perturbation series did not settle after {max_terms} terms")
        S = S + term
        term = truncate_normalized(-(step @ term), cutoff, lattice)
        n += 1
    return S, n


def barcodes_agree(source: TorsionBarcode, deformed: TorsionBarcode, beta) -> bool:
    """
    Barcode of (V, d + delta) against that of (H, d_def).

    V splits orthogonally into i1(H) and an acyclic part contracted by h1,
    whose bars are at most beta. So the free ranks agree, every deformed bar
    is a source bar in the same degree, and the source bars left over are
    at most beta (none when beta = 0).
    """
    if {k: v for k, v in source.free.items() if v} != {k: v for k, v in deformed.free.items() if v}:
        return False
    for k in set(source.torsion) | set(deformed.torsion):
        left = Counter(source.torsion.get(k, []))
        left.subtract(deformed.torsion.get(k, []))
        if any(n < 0 for n in left.values()):
            return False
        if any(e > beta for e, n in left.items() if n):
            return False
    return True


def _isometry_holds(sdr: SDRData, i1: NovMatrix, d_new: NovMatrix, d_def: NovMatrix) -> bool:
    """Quotient valuations of homology classes agree under i1."""
    lattice = sdr.lattice
    target = ValuedComplex(sdr.homology, d_def)
    source = ValuedComplex(sdr.base.basis, d_new)
    source_frames = degree_splitting(source, lattice)
    target_frames = degree_splitting(target, lattice)
    h_weights = sdr.homology.weights(lattice)
    v_weights = sdr.base.basis.weights(lattice)
    for name, vec in homology_frame(target, lattice):
        k = sdr.homology.degree(sdr.homology.index(name))
        val_h = target_frames[k].image.quotient_val(vec)
        raw = {i: x.shift(-h_weights[i]) for i, x in vec.items()}
        image = vec_normalize(i1.apply(raw), v_weights)
        if not image:
            return False
        k_v = sdr.base.basis.degree(next(iter(image)))
        val_v = source_frames[k_v].image.quotient_val(image)
        if val_h != val_v:
            logger.debug("isometry fails on %s: %s vs %s", name, val_h, val_v)
            return False
    return True


def perturb(sdr: SDRData, delta: NovMatrix, hbar=None, epsilon=None, precision=None) -> PerturbedSDR:
    """
    Transfer the perturbed differential d + delta to the homology of (V, d).

    Args:
        sdr: SDR of the unperturbed complex
        delta: Perturbation on V (raw entries)
        hbar: Declared hbar; when given, val(d_def) >= hbar is recorded in the ledger
        epsilon: Norm slack; default min(1/100, (val(delta) - beta) / 7)

    Raises:
        PerturbationTooLarge: val(delta) <= beta
        SeriesDiverged: the series did not settle within max_series_terms
    """
    settings = get_settings()
    E = to_fraction(precision) if precision is not None else settings.precision
    lattice = sdr.lattice
    beta = sdr.beta
    delta_val = delta.operator_val(lattice)
    if delta_val != INF and delta_val <= beta:
        raise PerturbationTooLarge(
            f"val(delta) = {delta_val} does not exceed the boundary depth {beta}",
            witness=f"|delta| = e^-{delta_val}, e^-beta = e^-{beta}",
        )
    if epsilon is not None:
        eps = to_fraction(epsilon)
    elif delta_val == INF:
        eps = EPSILON_CAP
    else:
        eps = min(EPSILON_CAP, (delta_val - beta) / 7)
    margin = INF if delta_val == INF else delta_val - beta - 6 * eps

    i, p, h = sdr.i, sdr.p, sdr.h
    cutoff = E + 2 * beta
    S, terms = resolvent(delta, h, cutoff, lattice, settings.max_series_terms)
    logger.debug("perturb: %d series terms, cutoff %s", terms, cutoff)

    d_def = truncate_normalized(p @ S @ i, E, lattice)
    i1 = i - truncate_normalized(h @ S @ i, E + beta, lattice)
    p1 = p - truncate_normalized(p @ S @ h, E + beta, lattice)
    h1 = h - truncate_normalized(h @ S @ h, E + 2 * beta, lattice)

    d_new = sdr.base.differential + delta
    checks = check_sdr_identities(i1, p1, h1, d_new, d_def, lattice, E)
    checks["d_def_square_zero"] = (d_def @ d_def).is_zero_mod(E, lattice)
    d_def_val = d_def.operator_val(lattice)
    checks["d_def_nonnegative"] = d_def_val >= 0
    checks["margin"] = margin > 0
    if hbar is not None and lattice == RELATIVE:
        checks["d_def_below_hbar"] = d_def_val >= to_fraction(hbar)
    checks["isometry"] = _isometry_holds(sdr, i1, d_new, d_def)

    barcodes = {
        "source": homology_barcode(sdr.base.basis, d_new, lattice, E),
        "deformed": homology_barcode(sdr.homology, d_def, lattice, E),
    }
    checks["barcodes_coincide"] = barcodes_agree(barcodes["source"], barcodes["deformed"], beta)

    bounds = PerturbationBounds(
        beta=beta,
        delta_val=delta_val,
        epsilon=eps,
        margin=margin,
        d_def_val=d_def_val,
        hbar=None if hbar is None else to_fraction(hbar),
    )
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        logger.warning("perturbation checks failed: %s", ", ".join(failed))
    return PerturbedSDR(
        sdr=sdr, delta=delta, d_def=d_def, i1=i1, p1=p1, h1=h1, S=S,
        series_terms=terms, bounds=bounds, checks=checks, barcodes=barcodes,
    )


def hpt_pipeline(c: FloerTypeComplex, lattice: str = NORM, epsilon=None, precision=None) -> PerturbedSDR:
    """
    Retract (V, d0) and transfer the T^hbar d1 part of a Floer-type complex.

    The norm lattice is the default: there beta is the boundary depth of
    (V, d0) and the smallness bound can fail. In the relative lattice beta
    is 0 and only val(delta) >= hbar > 0 is needed.

    Raises:
        PerturbationTooLarge: val(delta) <= beta in the chosen lattice
    """
    G = c.unperturbed()
    sdr = special_dr(G, epsilon, lattice, precision)
    return perturb(sdr, c.perturbation_raw(), c.hbar, epsilon, precision)
