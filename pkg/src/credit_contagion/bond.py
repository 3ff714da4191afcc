"""Zero-coupon bond of firm one under default contagion.

Firm one's bond defaults the first time either firm reaches its barrier.
On default the holder receives ``omega * K`` at maturity (so
``omega * K * exp(-rf T)`` today). If both firms survive to ``T`` the
holder receives ``min(omega * V1(T), K)``: full repayment unless the
firm value, after the write-down, falls short of the face value.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy.stats import norm

from .errors import DomainError, PricingError
from .model import FirmParams, NumericsConfig, PairModel, default_level
from .survival import DEFAULT_NUMERICS, joint_survival, marginal_survival, restricted_exp_moment

__all__ = [
    "BondContract",
    "WritedownConsistencyWarning",
    "discounted_maturity_payment",
    "discounted_default_payment",
    "bond_price",
    "bond_yield",
    "single_firm_price",
    "single_firm_yield",
]

_MATCH_TOL = 1e-12


class WritedownConsistencyWarning(UserWarning):
    """The write-down exceeds the bound that keeps the default payment below firm value."""


@dataclass(frozen=True)
class BondContract:
    """Zero-coupon bond of firm one.

    Parameters
    ----------
    face : par value, paid at maturity when no default occurs.
    maturity : time to maturity in years.
    writedown : fraction ``omega`` of value retained by bondholders, in (0, 1].
    """

    face: float = 100.0
    maturity: float = 5.0
    writedown: float = 0.7

    def __post_init__(self):
        if not (math.isfinite(self.face) and self.face > 0):
            raise DomainError(f"face must be positive, got {self.face}")
        if not (math.isfinite(self.maturity) and self.maturity > 0):
            raise DomainError(f"maturity must be positive, got {self.maturity}")
        if not 0.0 < self.writedown <= 1.0:
            raise DomainError(f"writedown must lie in (0, 1], got {self.writedown}")


def _check_consistency(firm: FirmParams, rf: float, bond: BondContract) -> None:
    if not math.isclose(firm.face, bond.face, rel_tol=_MATCH_TOL):
        raise DomainError(f"bond face {bond.face} differs from firm face {firm.face}")
    bound = min(1.0, math.exp((rf - firm.gamma) * bond.maturity))
    if bond.writedown > bound * (1.0 + _MATCH_TOL):
        warnings.warn(
            f"writedown {bond.writedown} exceeds min(1, exp((rf - gamma) T)) = {bound:.6g}; "
            "the default payment may exceed the firm value at default",
            WritedownConsistencyWarning,
            stacklevel=3,
        )


def _check_pair(model: PairModel, bond: BondContract) -> None:
    if model.rho < 0.0:
        raise DomainError(f"the contagion bond requires rho >= 0, got {model.rho}")
    if not math.isclose(model.horizon, bond.maturity, rel_tol=_MATCH_TOL):
        raise DomainError(f"model horizon {model.horizon} differs from bond maturity {bond.maturity}")
    _check_consistency(model.firm1, model.rf, bond)


def discounted_maturity_payment(
    model: PairModel, bond: BondContract, cfg: NumericsConfig = DEFAULT_NUMERICS
) -> float:
    """Present value of ``min(omega V1(T), K)`` paid on joint survival.

    Splits at ``d = B1 - ln(omega)``, the log value above which the
    written-down firm value covers the face value.
    """
    _check_pair(model, bond)
    T, K, omega = bond.maturity, bond.face, bond.writedown
    B1 = model.B1
    if B1 >= 0.0 or model.B2 >= 0.0:
        return 0.0
    d = B1 - math.log(omega)
    full = restricted_exp_moment(model, T, 0.0, d, math.inf, cfg)
    partial = 0.0
    if d > B1:
        scale = omega * model.firm1.v0 * math.exp(model.firm1.gamma * T)
        partial = scale * restricted_exp_moment(model, T, 1.0, B1, d, cfg)
    value = math.exp(-model.rf * T) * (K * full + partial)
    return min(max(value, 0.0), K * math.exp(-model.rf * T))


def discounted_default_payment(
    model: PairModel, bond: BondContract, cfg: NumericsConfig = DEFAULT_NUMERICS
) -> float:
    """``omega K exp(-rf T) (1 - P(T))``."""
    _check_pair(model, bond)
    T = bond.maturity
    p = joint_survival(model, T, cfg)
    return bond.writedown * bond.face * math.exp(-model.rf * T) * (1.0 - p)


def bond_price(model: PairModel, bond: BondContract, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    return discounted_maturity_payment(model, bond, cfg) + discounted_default_payment(model, bond, cfg)


def _yield(price: float, face: float, maturity: float) -> float:
    if not (math.isfinite(price) and price > 0):
        raise PricingError(f"bond price must be positive to define a yield, got {price}")
    return -math.log(price / face) / maturity


def bond_yield(model: PairModel, bond: BondContract, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """Continuously compounded yield ``-ln(C / K) / T`` of the contagion bond."""
    return _yield(bond_price(model, bond, cfg), bond.face, bond.maturity)


def _gauss_exp_mass(eps: float, m: float, s: float, a: float, b: float) -> float:
    """``int_a^b exp(eps x) N(x; m, s^2) dx``."""
    shift = m + eps * s * s
    hi = 1.0 if math.isinf(b) else norm.cdf((b - shift) / s)
    lo = norm.cdf((a - shift) / s)
    return math.exp(eps * m + 0.5 * (eps * s) ** 2) * (hi - lo)


def _single_moment(B: float, alpha: float, sigma: float, T: float, eps: float, a: float, b: float) -> float:
    # killed density: N(x; aT, s^2) - exp(2 alpha B / sigma^2) N(x; 2B + aT, s^2) on x > B
    s = sigma * math.sqrt(T)
    direct = _gauss_exp_mass(eps, alpha * T, s, a, b)
    image = _gauss_exp_mass(eps, 2.0 * B + alpha * T, s, a, b)
    return direct - math.exp(2.0 * alpha * B / sigma**2) * image


def single_firm_price(
    firm: FirmParams, rf: float, bond: BondContract, cfg: NumericsConfig = DEFAULT_NUMERICS
) -> float:
    """Price of the same bond when firm one operates in isolation (no contagion)."""
    _check_consistency(firm, rf, bond)
    T, K, omega = bond.maturity, bond.face, bond.writedown
    B = default_level(firm, T)
    disc = math.exp(-rf * T)
    if B >= 0.0:
        return omega * K * disc
    alpha, sigma = firm.drift(rf), firm.sigma
    d = B - math.log(omega)
    full = _single_moment(B, alpha, sigma, T, 0.0, d, math.inf)
    partial = 0.0
    if d > B:
        partial = omega * firm.v0 * math.exp(firm.gamma * T) * _single_moment(B, alpha, sigma, T, 1.0, B, d)
    survive = marginal_survival(firm, rf, T)
    return disc * (K * max(full, 0.0) + max(partial, 0.0)) + omega * K * disc * (1.0 - survive)


def single_firm_yield(
    firm: FirmParams, rf: float, bond: BondContract, cfg: NumericsConfig = DEFAULT_NUMERICS
) -> float:
    """Yield of the isolated-firm bond; the benchmark without a contagion partner."""
    return _yield(single_firm_price(firm, rf, bond, cfg), bond.face, bond.maturity)
