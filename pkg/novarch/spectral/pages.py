"""
Pages - Locality spectral sequence of the filtration F^p = T^(p hbar) F^(val_M >= 0).

The spectral sequence of a finite filtered complex is read off the Smith
form of its relative-normalized differential: every Smith pair with
exponent lambda = m hbar + rho (0 <= rho < hbar) is a bar that

  - contributes a full copy of the graded ring to both of its degrees on
    pages 1 .. m+1,
  - is hit by the page-(m+2) differential when rho > 0, leaving the
    partial pieces [hbar - rho, hbar) at the source and [0, rho) at the
    target on that page,
  - is gone from page m+2 on (rho = 0) or m+3 on (rho > 0).

Free Smith directions survive to every page. Page 1 is the gr chain page
with the gr differential, so the first nonzero differential of positive
valuation sits on page m+1 of the least positive bar, and its valuation
is tau.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field

from novarch.algebra.matrix import RELATIVE
from novarch.algebra.novikov import INF
from novarch.algebra.smith import degree_blocks, smith_normal_form, check_square_zero
from novarch.complexes.floer import FloerTypeComplex
from novarch.complexes.reduction import associated_graded
from novarch.config import get_settings, to_fraction
from novarch.errors import Inconclusive, PrecisionExhausted
from novarch.utils.logger import get_logger
from novarch.utils.parallel import parallel_map

logger = get_logger(__name__)


class Bar(BaseModel):
    """A Smith pair between degree `source` and degree `target` = source + 1."""
    source: int
    target: int
    exponent: Fraction
    multiple: int = Field(description="m in exponent = m hbar + rho")
    remainder: Fraction = Field(description="rho in [0, hbar)")


class PageEntry(BaseModel):
    degree: int
    full: int = Field(description="Copies of the graded ring gr Lambda")
    partial: List[Tuple[Fraction, Fraction]] = Field(
        default_factory=list, description="Truncated pieces [a, b) of one graded slice"
    )


class Page(BaseModel):
    index: int
    entries: List[PageEntry] = Field(default_factory=list)
    differential_valuation: Optional[Fraction] = Field(
        default=None, description="Least valuation among the bars killed by d_r (None if d_r = 0)"
    )
    killed: int = Field(default=0, description="Bars removed by d_r")

    def total_full(self) -> int:
        return sum(e.full for e in self.entries)


@dataclass
class SpectralSequenceState:
    source: FloerTypeComplex
    pages: List[Page]
    bars: List[Bar]
    free: Dict[int, int]
    r_max: int
    first_nonzero_page: Optional[int]
    tau: object
    e2_matches_gr: Optional[bool] = None
    checks: Dict[str, bool] = field(default_factory=dict)

    @property
    def collapse(self) -> bool:
        """No differential of positive valuation at all."""
        return not any(b.exponent > 0 for b in self.bars)

    def page(self, r: int) -> Page:
        return self.pages[r - 1]

    def summary(self) -> dict:
        return {
            "pages": [p.model_dump(mode="json") for p in self.pages],
            "first_nonzero_page": self.first_nonzero_page,
            "tau": "inf" if self.tau == INF else str(self.tau),
            "collapse": self.collapse,
        }


def _bars(c: FloerTypeComplex, precision, slack) -> Tuple[List[Bar], Dict[int, int]]:
    blocks = degree_blocks(c.basis, c.differential)
    degrees = list(blocks)

    def snf(k):
        block = blocks[k]
        if block.shape[0] == 0 or block.shape[1] == 0:
            return k, []
        return k, smith_normal_form(block, RELATIVE, precision, slack).exponents

    bars: List[Bar] = []
    ranks: Dict[int, int] = {}
    for k, exponents in parallel_map(snf, degrees):
        ranks[k] = len(exponents)
        for lam in exponents:
            m = floor(lam / c.hbar)
            bars.append(
                Bar(
                    source=k,
                    target=c.basis.reduce_degree(k + 1),
                    exponent=lam,
                    multiple=m,
                    remainder=lam - m * c.hbar,
                )
            )
    free = {
        k: len(c.basis.indices_in_degree(k)) - ranks.get(k, 0) - ranks.get(c.basis.reduce_degree(k - 1), 0)
        for k in c.basis.degrees()
    }
    return bars, free


def _page(r: int, bars: Sequence[Bar], free: Dict[int, int], hbar: Fraction) -> Page:
    full = dict(free)
    partial: Dict[int, List[Tuple[Fraction, Fraction]]] = {k: [] for k in free}
    killed = [b for b in bars if (b.multiple + 1 == r) or (b.remainder > 0 and b.multiple + 2 == r)]
    for b in bars:
        if r <= b.multiple + 1:
            full[b.source] = full.get(b.source, 0) + 1
            full[b.target] = full.get(b.target, 0) + 1
        elif b.remainder > 0 and r == b.multiple + 2:
            partial.setdefault(b.source, []).append((hbar - b.remainder, hbar))
            partial.setdefault(b.target, []).append((Fraction(0), b.remainder))
    entries = [
        PageEntry(degree=k, full=full.get(k, 0), partial=sorted(partial.get(k, [])))
        for k in sorted(set(full) | set(partial))
    ]
    valuation = min((b.exponent for b in killed), default=None)
    return Page(index=r, entries=entries, differential_valuation=valuation, killed=len(killed))


def default_r_max(hbar: Fraction, precision=None) -> int:
    """Largest r with r * hbar < E."""
    E = to_fraction(precision) if precision is not None else get_settings().precision
    r = int(E / hbar)
    if r * hbar >= E:
        r -= 1
    return max(r, 1)


def compute_pages(c: FloerTypeComplex, r_max: Optional[int] = None, precision=None, slack=None) -> SpectralSequenceState:
    """
    Pages 1..r_max of the locality spectral sequence.

    Raises:
        PrecisionExhausted: r_max * hbar >= E, or a bar sits within the slack of E
        NotAComplex: d^2 != 0 mod T^E
    """
    E = to_fraction(precision) if precision is not None else get_settings().precision
    r_max = default_r_max(c.hbar, E) if r_max is None else r_max
    if r_max < 1:
        raise ValueError("r_max must be at least 1")
    if r_max * c.hbar >= E:
        raise PrecisionExhausted(f"{r_max} pages of width {c.hbar} reach the working precision {E}")
    check_square_zero(c.basis, c.differential, RELATIVE, E)
    bars, free = _bars(c, E, slack)
    pages = [_page(r, bars, free, c.hbar) for r in range(1, r_max + 1)]

    positive = [b for b in bars if b.exponent > 0]
    tau = min((b.exponent for b in positive), default=INF)
    first = None
    if positive:
        page_index = min(b.multiple + 1 for b in positive if b.exponent == tau)
        first = page_index if page_index <= r_max else None

    state = SpectralSequenceState(
        source=c, pages=pages, bars=bars, free=free, r_max=r_max, first_nonzero_page=first, tau=tau,
    )
    if r_max >= 2:
        gr_ranks = associated_graded(c).homology_ranks()
        e2 = {e.degree: e.full for e in pages[1].entries}
        state.e2_matches_gr = all(e2.get(k, 0) == v for k, v in gr_ranks.items())
        state.checks["e2_is_gr_homology"] = state.e2_matches_gr
    state.checks["ranks_nonincreasing"] = all(
        pages[r].total_full() <= pages[r - 1].total_full() for r in range(1, len(pages))
    )
    if first is not None:
        state.checks["tau_in_page_window"] = (first - 1) * c.hbar <= tau < first * c.hbar
    logger.debug("compute_pages: %d bars, tau %s, first page %s", len(bars), tau, first)
    return state


def tau_from_ss(state: SpectralSequenceState):
    """
    Valuation of the first nonzero differential of positive valuation.

    +inf is returned only with the collapse certificate: every bar was
    resolved below the trusted horizon and none has positive valuation.

    Raises:
        Inconclusive: a positive bar exists beyond page r_max
    """
    if state.first_nonzero_page is not None:
        return state.tau
    if state.collapse:
        return INF
    raise Inconclusive(
        f"first nonzero differential lies beyond page {state.r_max}",
        witness=str(state.tau),
    )


class HbarConsistency(BaseModel):
    values: Dict[str, str] = Field(default_factory=dict, description="hbar -> tau")
    consistent: bool


def tau_hbar_consistency(c: FloerTypeComplex, hbars: Sequence, precision=None) -> HbarConsistency:
    """Recompute tau for several admissible hbar and compare."""
    values = {}
    for h in hbars:
        h = to_fraction(h)
        state = compute_pages(c.with_hbar(h), precision=precision)
        tau = tau_from_ss(state)
        values[str(h)] = "inf" if tau == INF else str(tau)
    return HbarConsistency(values=values, consistent=len(set(values.values())) <= 1)
