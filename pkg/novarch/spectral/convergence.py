"""
Convergence - Combinatorial check of the convergence hypotheses on orbit tables.

Two criteria are supported:
  - kappa != 0: every Conley-Zehnder index lies in a bounded window;
  - kappa == 0: every action is bounded by a + b * |index|.
The tables are user supplied; nothing here computes indices or actions.
"""

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field

from novarch.config import to_fraction
from novarch.utils.logger import get_logger

logger = get_logger(__name__)


class Orbit(BaseModel):
    name: str = ""
    index: int
    action: Fraction


class ConvergenceReport(BaseModel):
    criterion: str = Field(description="bounded_indices or action_bounded")
    holds: bool
    window: Optional[Tuple[int, int]] = None
    envelope: Optional[Tuple[Fraction, Fraction]] = Field(default=None, description="(a, b) of the action bound")
    derived: bool = Field(default=False, description="The bound was fitted to the data rather than supplied")
    offenders: List[str] = Field(default_factory=list)


def _orbits(orbits: Sequence) -> List[Orbit]:
    out = []
    for k, o in enumerate(orbits):
        if isinstance(o, Orbit):
            out.append(o)
        elif isinstance(o, dict):
            out.append(Orbit(name=str(o.get("name", k)), index=int(o["index"]), action=to_fraction(o["action"])))
        else:
            index, action = o
            out.append(Orbit(name=str(k), index=int(index), action=to_fraction(action)))
    return out


def check_convergence_hypotheses(orbits: Sequence, kappa, index_window: Optional[Tuple[int, int]] = None,
                                 action_bound: Optional[Tuple] = None) -> ConvergenceReport:
    """
    Args:
        orbits: Orbit models, dicts {name, index, action} or (index, action) pairs
        kappa: Proportionality constant between first Chern class and [omega, theta]
        index_window: Claimed (low, high) bound on indices, used when kappa != 0
        action_bound: Claimed (a, b) with action <= a + b |index|, used when kappa == 0
    """
    table = _orbits(orbits)
    kappa = to_fraction(kappa)
    if kappa != 0:
        derived = index_window is None
        if derived:
            indices = [o.index for o in table] or [0]
            index_window = (min(indices), max(indices))
        low, high = index_window
        offenders = [o.name for o in table if not low <= o.index <= high]
        return ConvergenceReport(
            criterion="bounded_indices", holds=not offenders, window=(low, high),
            derived=derived, offenders=offenders,
        )

    derived = action_bound is None
    if derived:
        slope = Fraction(0)
        intercept = max((o.action for o in table), default=Fraction(0))
        action_bound = (intercept, slope)
    a, b = (to_fraction(x) for x in action_bound)
    offenders = [o.name for o in table if o.action > a + b * abs(o.index)]
    if derived:
        logger.debug("convergence: fitted action bound %s", a)
    return ConvergenceReport(
        criterion="action_bounded", holds=not offenders, envelope=(a, b),
        derived=derived, offenders=offenders,
    )
