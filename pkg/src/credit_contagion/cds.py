"""Fair continuous-premium spreads of two-name credit default swaps.

Every spread is ``protection / premium`` where, for an event time
``tau`` with survival curve ``Q(s) = P(tau > s)``,

    premium    = int_0^T exp(-rf s) Q(s) ds
    protection = (1 - R) (1 - exp(-rf T) Q(T) - rf * premium)

The second line is ``(1 - R) E[exp(-rf tau); tau <= T]`` after an
integration by parts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import DomainError, PricingError
from .model import NumericsConfig, PairModel
from .quadrature import integrate_time_leg
from .survival import DEFAULT_NUMERICS, joint_survival, marginal_survival

__all__ = [
    "FLAVORS",
    "CdsContract",
    "CdsLegs",
    "cds_legs",
    "cds_spread",
    "first_to_default_spread",
    "second_to_default_spread",
    "second_to_default_spread_contagion",
    "counterparty_cds_spread_homogeneous",
]

FLAVORS = ("first", "second", "second_contagion", "counterparty_homogeneous")


@dataclass(frozen=True)
class CdsContract:
    """Basket or counterparty CDS on the pair.

    Parameters
    ----------
    notional : protected amount; spreads do not depend on it.
    maturity : years.
    recovery : recovery rate R in [0, 1].
    flavor : one of ``FLAVORS``.
    """

    notional: float = 100.0
    maturity: float = 5.0
    recovery: float = 0.5
    flavor: str = "first"

    def __post_init__(self):
        if not (math.isfinite(self.notional) and self.notional > 0):
            raise DomainError(f"notional must be positive, got {self.notional}")
        if not (math.isfinite(self.maturity) and self.maturity > 0):
            raise DomainError(f"maturity must be positive, got {self.maturity}")
        if not 0.0 <= self.recovery <= 1.0:
            raise DomainError(f"recovery must lie in [0, 1], got {self.recovery}")
        if self.flavor not in FLAVORS:
            raise DomainError(f"flavor must be one of {FLAVORS}, got {self.flavor!r}")


@dataclass(frozen=True)
class CdsLegs:
    """Premium annuity (per unit spread) and protection value, per unit notional."""

    premium: float
    protection: float

    @property
    def spread(self) -> float:
        if not self.premium > 0:
            raise PricingError(f"premium leg must be positive, got {self.premium}")
        return self.protection / self.premium


def _event_survival(model: PairModel, flavor: str, cfg: NumericsConfig) -> Callable[[float], float]:
    if flavor == "second":
        f1, f2, rf, T = model.firm1, model.firm2, model.rf, model.horizon

        def q(s: float) -> float:
            s1 = marginal_survival(f1, rf, s, horizon=T)
            s2 = marginal_survival(f2, rf, s, horizon=T)
            return min(1.0, max(0.0, s1 + s2 - joint_survival(model, s, cfg)))

        return q
    # the contagion second default coincides with the first
    return lambda s: joint_survival(model, s, cfg)


def _check(model: PairModel, cds: CdsContract) -> None:
    if not math.isclose(model.horizon, cds.maturity, rel_tol=1e-12):
        raise DomainError(f"model horizon {model.horizon} differs from CDS maturity {cds.maturity}")
    if cds.flavor in ("second_contagion", "counterparty_homogeneous") and model.rho < 0.0:
        raise DomainError(f"flavor {cds.flavor!r} requires rho >= 0, got {model.rho}")
    if cds.flavor == "counterparty_homogeneous" and model.firm1 != model.firm2:
        raise DomainError("the counterparty spread is only available for parameter-identical firms")


def cds_legs(model: PairModel, cds: CdsContract, cfg: NumericsConfig = DEFAULT_NUMERICS) -> CdsLegs:
    """Premium and protection legs of ``cds`` per unit notional."""
    _check(model, cds)
    flavor = "first" if cds.flavor == "second_contagion" else cds.flavor
    q = _event_survival(model, flavor, cfg)
    T, rf = cds.maturity, model.rf
    premium = integrate_time_leg(q, rf, T, cfg.time_nodes)
    if not premium > 0:
        raise PricingError(f"premium leg must be positive, got {premium}")
    loss = 1.0 - cds.recovery
    protection = loss * max(0.0, 1.0 - math.exp(-rf * T) * q(T) - rf * premium)
    if flavor == "counterparty_homogeneous":
        # reference-before-counterparty is half of the first-default event
        protection = 0.5 * protection
    return CdsLegs(premium, protection)


def cds_spread(model: PairModel, cds: CdsContract, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """Fair spread of ``cds`` as an annual rate."""
    return cds_legs(model, cds, cfg).spread


def _as(cds: CdsContract, flavor: str) -> CdsContract:
    if cds.flavor != flavor:
        raise DomainError(f"expected a contract of flavor {flavor!r}, got {cds.flavor!r}")
    return cds


def first_to_default_spread(model: PairModel, cds: CdsContract, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    return cds_spread(model, _as(cds, "first"), cfg)


def second_to_default_spread(model: PairModel, cds: CdsContract, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """Spread paying on the later of the two defaults, with no contagion."""
    return cds_spread(model, _as(cds, "second"), cfg)


def second_to_default_spread_contagion(
    model: PairModel, cds: CdsContract, cfg: NumericsConfig = DEFAULT_NUMERICS
) -> float:
    """Second-to-default spread when one default triggers the other.

    Both defaults then happen together, so this is the first-to-default
    spread computed through the same code path.
    """
    return cds_spread(model, _as(cds, "second_contagion"), cfg)


def counterparty_cds_spread_homogeneous(
    model: PairModel, cds: CdsContract, cfg: NumericsConfig = DEFAULT_NUMERICS
) -> float:
    """Single-name spread on firm one bought from firm two, for identical firms.

    Protection pays only if the reference defaults before the seller;
    by symmetry that is half the first-default protection, so the
    spread is half the first-to-default spread.
    """
    return cds_spread(model, _as(cds, "counterparty_homogeneous"), cfg)
