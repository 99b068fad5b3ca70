"""Sufficient conditions under which small steady waves cannot ride a
still shear flow.

The check compares the supremum of omega' over [0, 1] against the lowest
Dirichlet eigenvalue (pi / h)^2 of -d^2/dy^2 on (0, h). When the flow is
still and the eigenvalue wins with positive margin, every wave of small
enough amplitude and slope must be the flat shear state itself, so a
perturbation sweep is expected to fall back to flat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .stream import StreamSolution
from .vorticity import VorticityDistribution

__all__ = ["HypothesisReport", "check_hypotheses", "MARGIN_TOL"]

# margin below this counts as failing the spectral condition
MARGIN_TOL = 1e-12


@dataclass
class HypothesisReport:
    still_flow: bool
    depth: float
    sup_derivative: float
    dirichlet_bound: float
    margin: float
    slope_bound: float
    applicable: bool
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "still_flow": self.still_flow,
            "depth": self.depth,
            "sup_derivative": self.sup_derivative,
            "dirichlet_bound": self.dirichlet_bound,
            "margin": self.margin,
            "slope_bound": self.slope_bound,
            "applicable": self.applicable,
            "notes": list(self.notes),
        }


def check_hypotheses(dist: VorticityDistribution, sol: StreamSolution,
                     slope_bound: float) -> HypothesisReport:
    """Evaluate the nonexistence hypotheses for one still stream solution.

    slope_bound is the cap the caller intends to impose on surface slopes;
    it is recorded for the report and does not enter the spectral test.
    """
    if slope_bound <= 0:
        raise ValueError("slope_bound must be positive")
    h = sol.depth
    mu = float(dist.sup_derivative())
    bound = (math.pi / h) ** 2
    margin = bound - mu

    notes = []
    if not sol.still:
        notes.append("surface speed is nonzero; the flow is not still")
    if margin <= MARGIN_TOL:
        notes.append(
            f"sup of omega' ({mu:.6g}) is not below the Dirichlet bound "
            f"({bound:.6g}) with margin")
    applicable = sol.still and margin > MARGIN_TOL
    if applicable:
        notes.append("hypotheses hold: small-amplitude waves must be flat")

    return HypothesisReport(still_flow=sol.still, depth=h, sup_derivative=mu,
                            dirichlet_bound=bound, margin=margin,
                            slope_bound=float(slope_bound),
                            applicable=applicable, notes=notes)
