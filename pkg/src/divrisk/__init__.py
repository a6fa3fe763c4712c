"""Default probabilities, VaR and Expected Shortfall in a two-bank diversification model."""

from .analytics import (
    aggregate_default_prob,
    benefit_region,
    covariance_matrix,
    individual_default_prob,
    joint_default_prob,
)
from .distributions import TrapezoidDist, make_dist
from .model import ConfidenceLevel, Diversification, ModelParams, ShiftedPosition, ValidationError, validate
from .risk import (
    axiom_check,
    expected_shortfall,
    systemic_subadditivity_check,
    var_comparison,
    var_individual,
    var_systemic,
)

__version__ = "0.1.0"
