"""Model inputs: firm parameters, the correlated pair, numerical settings."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DomainError

__all__ = ["FirmParams", "PairModel", "NumericsConfig", "default_level", "firm_from_quality"]

MAX_ABS_RHO = 0.99
_ON_BARRIER = 1e-12


@dataclass(frozen=True)
class FirmParams:
    """Economic inputs of one firm.

    Parameters
    ----------
    v0 : initial firm value.
    sigma : firm-value volatility (per sqrt year).
    q : dividend yield.
    gamma : growth rate of the exponential default barrier.
    face : par value of the firm's zero-coupon bond.
    """

    v0: float
    sigma: float
    q: float = 0.0
    gamma: float = 0.03
    face: float = 100.0

    def __post_init__(self):
        for name in ("v0", "sigma", "q", "gamma", "face"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.v0 <= 0:
            raise DomainError(f"v0 must be positive, got {self.v0}")
        if self.sigma <= 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if self.face <= 0:
            raise DomainError(f"face must be positive, got {self.face}")

    def barrier0(self, horizon: float) -> float:
        """Initial barrier level ``face * exp(-gamma * horizon)``."""
        return self.face * math.exp(-self.gamma * horizon)

    def credit_quality(self, horizon: float) -> float:
        return self.v0 / self.barrier0(horizon)

    def log_barrier(self, horizon: float) -> float:
        """Barrier in log coordinates, ``ln(b(0) / V(0)) <= 0``."""
        return math.log(self.face / self.v0) - self.gamma * horizon

    def drift(self, rf: float) -> float:
        """Drift of ``ln(V(t) e^{-gamma t} / V(0))``."""
        return rf - self.q - self.gamma - 0.5 * self.sigma**2


def firm_from_quality(
    quality: float,
    sigma: float,
    horizon: float,
    q: float = 0.0,
    gamma: float = 0.03,
    face: float = 100.0,
) -> FirmParams:
    """Build a firm whose initial value is ``quality`` times its initial barrier."""
    if not quality >= 1.0:
        raise DomainError(f"initial credit quality must be >= 1, got {quality}")
    return FirmParams(quality * face * math.exp(-gamma * horizon), sigma, q, gamma, face)


def default_level(firm: FirmParams, horizon: float) -> float:
    """Log barrier ``B <= 0``; values within 1e-12 of 0 are snapped to 0.

    A firm built at credit quality 1 sits on its barrier up to round-off.
    """
    lb = firm.log_barrier(horizon)
    return 0.0 if lb > -_ON_BARRIER else lb


@dataclass(frozen=True)
class PairModel:
    """Two firms with correlated log values, a flat risk-free rate and a horizon."""

    firm1: FirmParams
    firm2: FirmParams
    rho: float
    rf: float = 0.05
    horizon: float = 5.0

    def __post_init__(self):
        if not math.isfinite(self.rho) or not -1.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie in (-1, 1), got {self.rho}")
        if abs(self.rho) > MAX_ABS_RHO:
            raise DomainError(f"|rho| > {MAX_ABS_RHO} is not supported, got {self.rho}")
        if not math.isfinite(self.rf):
            raise DomainError("rf must be finite")
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise DomainError(f"horizon must be positive, got {self.horizon}")
        for i, firm in enumerate((self.firm1, self.firm2), start=1):
            # tolerate round-off from quality-based construction
            if firm.log_barrier(self.horizon) > _ON_BARRIER:
                raise DomainError(
                    f"firm {i} starts below its barrier "
                    f"(credit quality {firm.credit_quality(self.horizon):.6g} < 1)"
                )

    @property
    def B1(self) -> float:
        return default_level(self.firm1, self.horizon)

    @property
    def B2(self) -> float:
        return default_level(self.firm2, self.horizon)

    @property
    def alpha1(self) -> float:
        return self.firm1.drift(self.rf)

    @property
    def alpha2(self) -> float:
        return self.firm2.drift(self.rf)

    def with_(self, **changes) -> "PairModel":
        return replace(self, **changes)

    def swapped(self) -> "PairModel":
        """The same pair with the roles of the two firms exchanged."""
        return replace(self, firm1=self.firm2, firm2=self.firm1)


@dataclass(frozen=True)
class NumericsConfig:
    """Series truncation and quadrature resolution.

    ``theta_nodes`` and ``r_nodes`` are minimum node counts of the
    angular and radial Gauss-Legendre rules; the angular rule grows with
    the largest series order in use. ``inner_nodes`` is reserved and
    currently unused. ``sparse_level`` and
    ``sparse_base`` configure the Smolyak grid when ``grid_kind`` is
    ``"sparse"``.
    """

    series_tol: float = 1e-10
    n_max: int = 200
    theta_nodes: int = 64
    r_nodes: int = 96
    inner_nodes: int = 64
    grid_kind: str = "tensor"
    time_nodes: int = 64
    sparse_level: int = 3
    sparse_base: int = 32

    def __post_init__(self):
        if not self.series_tol > 0:
            raise DomainError("series_tol must be positive")
        if self.n_max < 8:
            raise DomainError("n_max must be at least 8")
        for name in ("theta_nodes", "r_nodes", "inner_nodes", "time_nodes"):
            if getattr(self, name) < 4:
                raise DomainError(f"{name} must be at least 4")
        if self.grid_kind not in ("tensor", "sparse"):
            raise DomainError(f"grid_kind must be 'tensor' or 'sparse', got {self.grid_kind!r}")
        if self.sparse_level < 0 or self.sparse_base < 4:
            raise DomainError("sparse_level must be >= 0 and sparse_base >= 4")

    def refined(self) -> "NumericsConfig":
        """Every resolution doubled, including the series cap."""
        return replace(
            self,
            n_max=2 * self.n_max,
            theta_nodes=2 * self.theta_nodes,
            r_nodes=2 * self.r_nodes,
            inner_nodes=2 * self.inner_nodes,
            time_nodes=2 * self.time_nodes,
            sparse_level=self.sparse_level + 1,
        )
