"""Joint default of two correlated firms: survival, contagion bonds and basket CDS.

Each firm's value follows a geometric Brownian motion and the firm
defaults when its value first reaches an exponentially growing barrier.
The library evaluates the joint survival probability semi-analytically,
prices firm one's zero-coupon bond when either default triggers it, and
prices first-, second-to-default and counterparty CDS. A Monte Carlo
oracle re-estimates each of these quantities.
"""

from .bond import (
    BondContract,
    WritedownConsistencyWarning,
    bond_price,
    bond_yield,
    discounted_default_payment,
    discounted_maturity_payment,
    single_firm_price,
    single_firm_yield,
)
from .cds import (
    FLAVORS,
    CdsContract,
    CdsLegs,
    cds_legs,
    cds_spread,
    counterparty_cds_spread_homogeneous,
    first_to_default_spread,
    second_to_default_spread,
    second_to_default_spread_contagion,
)
from .errors import (
    ConvergenceError,
    DegenerateInputError,
    DomainError,
    NonFiniteIntegrandError,
    PricingError,
)
from .model import FirmParams, NumericsConfig, PairModel, firm_from_quality
from .montecarlo import (
    McConfig,
    McEstimate,
    estimate_bond_price,
    estimate_cds_legs,
    estimate_joint_survival,
    estimate_restricted_moment,
    simulate,
)
from .special_functions import bessel_i_integral_form, bessel_i_scaled
from .survival import (
    PolarTransform,
    joint_survival,
    joint_survival_zero_drift,
    marginal_survival,
    polar_transform,
    restricted_exp_moment,
    scaled_distance_to_default,
)

__version__ = "0.1.0"
