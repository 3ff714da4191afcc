"""Monte Carlo oracle for every analytic quantity in the library.

Correlated log values are simulated on a uniform grid. Barrier crossing
inside a step is handled analytically: conditional on the step's
endpoints, firm ``i`` crosses with the Brownian-bridge probability

    p_i = exp(-2 (x_prev - B_i)(x_next - B_i) / (sigma_i^2 dt)),

and instead of sampling the crossing each path carries the conditional
probabilities of its four default states (both alive, only firm one
dead, only firm two dead, both dead). Default times fall at step
midpoints.

Random numbers come from Philox streams keyed by ``(seed, block)`` with
a fixed number of paths per block, so estimates are bit-identical for
any number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from .bond import BondContract
from .cds import CdsContract
from .errors import DomainError
from .model import PairModel

__all__ = [
    "McConfig",
    "McEstimate",
    "McCdsLegs",
    "PathSample",
    "simulate",
    "estimate_joint_survival",
    "estimate_bond_price",
    "estimate_cds_legs",
    "estimate_restricted_moment",
]

BLOCK_PATHS = 4096
# bridge crossing probabilities below exp(-50) are dropped
_EXP_CUTOFF = 50.0

# per-path output columns
_W_BOTH, _W_NOT_BOTH_DEAD, _W_ALIVE1, _W_ALIVE2, _X1 = 0, 1, 2, 3, 4
_PREM_FIRST, _PROT_FIRST, _PREM_SECOND, _PROT_SECOND, _CP12, _CP21 = 5, 6, 7, 8, 9, 10
_N_COLS = 11


@dataclass(frozen=True)
class McConfig:
    """Simulation settings.

    ``workers`` only changes wall time, never the result; ``None`` uses
    every available CPU.
    """

    paths: int = 1_000_000
    steps_per_year: int = 200
    seed: int = 20240229
    bridge: bool = True
    antithetic: bool = False
    workers: int | None = None

    def __post_init__(self):
        if self.paths < 10_000:
            raise DomainError(f"paths must be at least 10^4, got {self.paths}")
        if self.steps_per_year < 50:
            raise DomainError(f"steps_per_year must be at least 50, got {self.steps_per_year}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.antithetic and self.paths % 2:
            raise DomainError("antithetic sampling needs an even number of paths")
        if self.workers is not None and self.workers < 1:
            raise DomainError("workers must be positive")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    paths: int

    def z_score(self, target: float) -> float:
        """``(mean - target) / std_error``; 0 when both coincide exactly."""
        diff = self.mean - target
        if self.std_error == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.std_error


@dataclass(frozen=True)
class McCdsLegs:
    """Simulated legs per unit notional; ``spread`` uses first-order error propagation."""

    premium: McEstimate
    protection: McEstimate
    spread: McEstimate

    def __iter__(self):
        return iter((self.premium, self.protection))


@numba.njit(nogil=True, cache=True)
def _kernel(z, out, dt, alpha1, alpha2, s1, s2, rho, B1, B2, disc_a, disc_b, disc_mid, bridge):
    n_paths, n_steps = z.shape[0], z.shape[1]
    sq = math.sqrt(dt)
    rho_c = math.sqrt(1.0 - rho * rho)
    k1 = 2.0 / (s1 * s1 * dt)
    k2 = 2.0 / (s2 * s2 * dt)
    for i in range(n_paths):
        x1 = 0.0
        x2 = 0.0
        both, only1, only2, dead = 1.0, 0.0, 0.0, 0.0
        prem_f, prot_f, prem_s, prot_s, cp12, cp21 = 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
        for k in range(n_steps):
            y1 = x1 + alpha1 * dt + s1 * sq * z[i, k, 0]
            y2 = x2 + alpha2 * dt + s2 * sq * (rho * z[i, k, 0] + rho_c * z[i, k, 1])
            if y1 <= B1 or x1 <= B1:
                p1 = 1.0
            elif bridge:
                e = k1 * (x1 - B1) * (y1 - B1)
                p1 = math.exp(-e) if e < _EXP_CUTOFF else 0.0
            else:
                p1 = 0.0
            if y2 <= B2 or x2 <= B2:
                p2 = 1.0
            elif bridge:
                e = k2 * (x2 - B2) * (y2 - B2)
                p2 = math.exp(-e) if e < _EXP_CUTOFF else 0.0
            else:
                p2 = 0.0
            da = disc_a[k]
            db = disc_b[k]
            dm = disc_mid[k]
            n_both = both * (1.0 - p1) * (1.0 - p2)
            n_only1 = only1 * (1.0 - p2) + both * p1 * (1.0 - p2)
            n_only2 = only2 * (1.0 - p1) + both * (1.0 - p1) * p2
            n_dead = 1.0 - n_both - n_only1 - n_only2
            if n_dead < dead:
                n_dead = dead
            prem_f += both * da + n_both * db
            prot_f += (both - n_both) * dm
            prem_s += (1.0 - dead) * da + (1.0 - n_dead) * db
            prot_s += (n_dead - dead) * dm
            cp12 += both * (p1 * (1.0 - p2) + 0.5 * p1 * p2) * dm
            cp21 += both * (p2 * (1.0 - p1) + 0.5 * p1 * p2) * dm
            both, only1, only2, dead = n_both, n_only1, n_only2, n_dead
            x1 = y1
            x2 = y2
        out[i, 0] = both
        out[i, 1] = 1.0 - dead
        out[i, 2] = both + only2
        out[i, 3] = both + only1
        out[i, 4] = x1
        out[i, 5] = prem_f
        out[i, 6] = prot_f
        out[i, 7] = prem_s
        out[i, 8] = prot_s
        out[i, 9] = cp12
        out[i, 10] = cp21


def _normals(seed: int, block: int, n: int, n_steps: int, antithetic: bool) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    gen = np.random.Generator(np.random.Philox(ss))
    if not antithetic:
        return gen.standard_normal((n, n_steps, 2))
    half = gen.standard_normal((n // 2, n_steps, 2))
    z = np.empty((n, n_steps, 2))
    z[0::2] = half
    z[1::2] = -half
    return z


def _discount_tables(rf: float, dt: float, n_steps: int):
    """Discounted lengths of each step's two halves and the midpoint discount factor."""
    t0 = dt * np.arange(n_steps)
    mid = np.exp(-rf * (t0 + 0.5 * dt))
    if rf == 0.0:
        half = np.full(n_steps, 0.5 * dt)
        return half, half.copy(), mid
    return (np.exp(-rf * t0) - mid) / rf, (mid - np.exp(-rf * (t0 + dt))) / rf, mid


@dataclass(frozen=True)
class PathSample:
    """Per-path conditional survival weights, discounted legs and terminal ``X1``.

    With antithetic sampling rows come in consecutive pairs.
    """

    model: PairModel
    t: float
    mc: McConfig
    data: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.data[:, _COLUMNS[name]]

    def estimate(self, values: np.ndarray) -> McEstimate:
        """Mean and standard error of a per-path quantity."""
        values = np.asarray(values, dtype=float)
        if self.mc.antithetic:
            values = 0.5 * (values[0::2] + values[1::2])
        n = values.size
        mean = math.fsum(values) / n
        se = float(np.std(values, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
        return McEstimate(mean, se, self.mc.paths)

    def ratio(self, num: np.ndarray, den: np.ndarray) -> McEstimate:
        """Ratio of means with a delta-method standard error."""
        num = np.asarray(num, dtype=float)
        den = np.asarray(den, dtype=float)
        if self.mc.antithetic:
            num = 0.5 * (num[0::2] + num[1::2])
            den = 0.5 * (den[0::2] + den[1::2])
        n = num.size
        a = math.fsum(num) / n
        b = math.fsum(den) / n
        if not b > 0:
            raise DomainError("ratio estimate needs a positive denominator")
        r = a / b
        resid = (num - r * den) / b
        return McEstimate(r, float(np.std(resid, ddof=1)) / math.sqrt(n), self.mc.paths)

    def estimate_joint_survival(self) -> McEstimate:
        return self.estimate(self.column("both_alive"))

    def estimate_bond_price(self, bond: BondContract) -> McEstimate:
        return self.estimate(_bond_payoff(self, bond))

    def estimate_cds_legs(self, cds: CdsContract, reference: int = 1) -> McCdsLegs:
        return _cds_legs(self, cds, reference)

    def estimate_restricted_moment(self, epsilon: float, lower: float, upper: float = math.inf) -> McEstimate:
        return self.estimate(_restricted(self, epsilon, lower, upper))


_COLUMNS = {
    "both_alive": _W_BOTH,
    "not_both_dead": _W_NOT_BOTH_DEAD,
    "alive1": _W_ALIVE1,
    "alive2": _W_ALIVE2,
    "x1": _X1,
    "premium_first": _PREM_FIRST,
    "protection_first": _PROT_FIRST,
    "premium_second": _PREM_SECOND,
    "protection_second": _PROT_SECOND,
    "protection_1_before_2": _CP12,
    "protection_2_before_1": _CP21,
}


def simulate(model: PairModel, t: float, mc: McConfig) -> PathSample:
    """Simulate ``mc.paths`` paths of the pair on ``[0, t]``.

    Barriers are those of ``model`` (fixed by its horizon).
    """
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"t must be positive, got {t}")
    n_steps = max(1, math.ceil(round(mc.steps_per_year * t, 9)))
    dt = t / n_steps
    out = np.empty((mc.paths, _N_COLS))
    disc_a, disc_b, disc_mid = _discount_tables(model.rf, dt, n_steps)
    starts = list(range(0, mc.paths, BLOCK_PATHS))
    args = (
        dt,
        model.alpha1,
        model.alpha2,
        model.firm1.sigma,
        model.firm2.sigma,
        model.rho,
        model.B1,
        model.B2,
        disc_a,
        disc_b,
        disc_mid,
        mc.bridge,
    )

    def run_block(index: int) -> None:
        lo = starts[index]
        hi = min(lo + BLOCK_PATHS, mc.paths)
        z = _normals(mc.seed, index, hi - lo, n_steps, mc.antithetic)
        _kernel(z, out[lo:hi], *args)

    workers = mc.workers or os.cpu_count() or 1
    if workers == 1:
        for index in range(len(starts)):
            run_block(index)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_block, range(len(starts))))
    return PathSample(model, t, mc, out)


def estimate_joint_survival(model: PairModel, t: float, mc: McConfig) -> McEstimate:
    return simulate(model, t, mc).estimate_joint_survival()


def _bond_payoff(sample: PathSample, bond: BondContract) -> np.ndarray:
    m = sample.model
    T, K, omega = bond.maturity, bond.face, bond.writedown
    v1 = m.firm1.v0 * math.exp(m.firm1.gamma * T) * np.exp(sample.column("x1"))
    w = sample.column("both_alive")
    disc = math.exp(-m.rf * T)
    return disc * (np.minimum(omega * v1, K) * w + omega * K * (1.0 - w))


def _restricted(sample: PathSample, epsilon: float, lower: float, upper: float) -> np.ndarray:
    x1 = sample.column("x1")
    inside = (x1 >= lower) & (x1 <= upper)
    return np.where(inside, np.exp(epsilon * x1), 0.0) * sample.column("both_alive")


def _cds_legs(sample: PathSample, cds: CdsContract, reference: int = 1) -> McCdsLegs:
    if cds.flavor == "second":
        prem, prot = sample.column("premium_second"), sample.column("protection_second")
    elif cds.flavor == "counterparty_homogeneous":
        prem = sample.column("premium_first")
        prot = sample.column("protection_1_before_2" if reference == 1 else "protection_2_before_1")
    else:
        # mutual contagion: the second default coincides with the first
        prem, prot = sample.column("premium_first"), sample.column("protection_first")
    prot = (1.0 - cds.recovery) * prot
    return McCdsLegs(sample.estimate(prem), sample.estimate(prot), sample.ratio(prot, prem))


def _sample_for(model: PairModel, maturity: float, mc: McConfig) -> PathSample:
    if not math.isclose(model.horizon, maturity, rel_tol=1e-12):
        raise DomainError(f"model horizon {model.horizon} differs from contract maturity {maturity}")
    return simulate(model, maturity, mc)


def estimate_bond_price(model: PairModel, bond: BondContract, mc: McConfig) -> McEstimate:
    """Simulated price of firm one's bond under contagion."""
    sample = _sample_for(model, bond.maturity, mc)
    return sample.estimate(_bond_payoff(sample, bond))


def estimate_cds_legs(model: PairModel, cds: CdsContract, mc: McConfig, reference: int = 1) -> McCdsLegs:
    """Simulated premium and protection legs of ``cds``.

    For the counterparty flavor the protection pays when firm
    ``reference`` defaults strictly before the other firm; the pair need
    not be homogeneous here.
    """
    if reference not in (1, 2):
        raise DomainError("reference must be 1 or 2")
    return _cds_legs(_sample_for(model, cds.maturity, mc), cds, reference)


def estimate_restricted_moment(
    model: PairModel, t: float, epsilon: float, lower: float, upper: float, mc: McConfig
) -> McEstimate:
    """``E[exp(epsilon X1(t)); lower <= X1(t) <= upper, no default by t]`` by simulation."""
    sample = simulate(model, t, mc)
    return sample.estimate(_restricted(sample, epsilon, lower, upper))
