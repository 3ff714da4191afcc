import math
import warnings

import numpy as np
import pytest
from scipy import integrate
from scipy.stats import norm

from credit_contagion.bond import (
    BondContract,
    WritedownConsistencyWarning,
    bond_price,
    bond_yield,
    discounted_default_payment,
    discounted_maturity_payment,
    single_firm_price,
    single_firm_yield,
)
from credit_contagion.errors import DomainError, PricingError
from credit_contagion.model import FirmParams, PairModel, firm_from_quality
from credit_contagion.survival import joint_survival

RF, T, K = 0.05, 5.0, 100.0
RHOS = (0.0, 0.2, 0.4, 0.6, 0.8)


def pair(rho, quality=2.0, sigma=0.2, quality2=None, sigma2=None, gamma=0.03, maturity=T):
    f1 = firm_from_quality(quality, sigma, maturity, gamma=gamma)
    f2 = firm_from_quality(quality2 or quality, sigma2 or sigma, maturity, gamma=gamma)
    return PairModel(f1, f2, rho, RF, maturity)


def base_yield(rho, omega=0.7, **kw):
    maturity = kw.get("maturity", T)
    return bond_yield(pair(rho, **kw), BondContract(K, maturity, omega))


def test_full_recovery_is_risk_free():
    bond = BondContract(K, T, 1.0)
    for rho in RHOS:
        model = pair(rho)
        assert discounted_maturity_payment(model, bond) == pytest.approx(K * math.exp(-RF * T) * joint_survival(model, T), rel=1e-14)
        assert bond_yield(model, bond) == pytest.approx(RF, abs=1e-12)


def test_price_decomposition_and_bounds():
    model, bond = pair(0.4), BondContract(K, T, 0.7)
    dmp = discounted_maturity_payment(model, bond)
    ddp = discounted_default_payment(model, bond)
    assert bond_price(model, bond) == dmp + ddp
    assert 0.0 < dmp + ddp <= K * math.exp(-RF * T)
    assert 0.0 <= ddp <= 0.7 * K * math.exp(-RF * T)
    assert bond_yield(model, bond) >= RF


def test_default_payment_formula():
    model, bond = pair(0.4), BondContract(K, T, 0.7)
    expected = 0.7 * K * math.exp(-RF * T) * (1 - joint_survival(model, T))
    assert discounted_default_payment(model, bond) == pytest.approx(expected, rel=1e-15)


def test_immediate_default():
    model, bond = pair(0.4, quality=1.0, quality2=2.0), BondContract(K, T, 0.7)
    assert discounted_default_payment(model, bond) == pytest.approx(0.7 * K * math.exp(-RF * T), rel=1e-14)
    assert discounted_maturity_payment(model, bond) == 0.0


def test_safe_firms_limit():
    model, bond = pair(0.0, quality=1e4), BondContract(K, T, 0.7)
    assert discounted_maturity_payment(model, bond) == pytest.approx(K * math.exp(-RF * T), rel=1e-4)
    assert discounted_default_payment(model, bond) == pytest.approx(0.0, abs=1e-8)


def test_yield_decreases_with_correlation():
    for omega in (0.5, 0.7):
        ys = [base_yield(r, omega) for r in RHOS]
        assert all(a > b for a, b in zip(ys, ys[1:]))


def test_yield_decreases_with_writedown():
    ys = [base_yield(0.4, w) for w in (0.3, 0.5, 0.7, 0.9, 1.0)]
    assert all(a > b for a, b in zip(ys, ys[1:]))


def test_yield_increases_with_volatility():
    ys = [base_yield(0.4, sigma=s) for s in (0.15, 0.2, 0.25, 0.3)]
    assert all(a < b for a, b in zip(ys, ys[1:]))
    ys2 = [base_yield(0.4, sigma2=s) for s in (0.15, 0.2, 0.25, 0.3)]
    assert all(a < b for a, b in zip(ys2, ys2[1:]))


def test_weak_barrier_growth_sensitivity():
    # firm values held at the base case while the barrier slope changes
    v0 = firm_from_quality(2.0, 0.2, T).v0
    bond = BondContract(K, T, 0.7)
    ys = []
    for g in (0.01, 0.03, 0.05):
        f = FirmParams(v0, 0.2, gamma=g)
        ys.append(bond_yield(PairModel(f, f, 0.4, RF, T), bond))
    assert ys[0] > ys[1] > ys[2]
    assert ys[0] - ys[2] < base_yield(0.0) - base_yield(0.8)


def single_firm_price_by_quadrature(firm, bond):
    """Integrate the reflected density of X(T) against the payoff."""
    B, alpha, s = firm.log_barrier(bond.maturity), firm.drift(RF), firm.sigma
    sd = s * math.sqrt(bond.maturity)
    mu = alpha * bond.maturity
    dens = lambda x: norm.pdf(x, mu, sd) - math.exp(2 * alpha * B / s**2) * norm.pdf(x, 2 * B + mu, sd)
    v = lambda x: firm.v0 * math.exp(firm.gamma * bond.maturity + x)
    pay = lambda x: min(bond.writedown * v(x), bond.face) * dens(x)
    d = B - math.log(bond.writedown)
    a, _ = integrate.quad(pay, B, d, epsabs=1e-12)
    b, _ = integrate.quad(pay, d, mu + 12 * sd, epsabs=1e-12)
    surv, _ = integrate.quad(dens, B, mu + 12 * sd, epsabs=1e-14)
    disc = math.exp(-RF * bond.maturity)
    return disc * (a + b) + bond.writedown * bond.face * disc * (1 - surv)


@pytest.mark.parametrize("quality,sigma,omega", [(2.0, 0.2, 0.7), (1.3, 0.3, 0.5), (4.0, 0.15, 0.9)])
def test_single_firm_matches_quadrature(quality, sigma, omega):
    firm = firm_from_quality(quality, sigma, T)
    bond = BondContract(K, T, omega)
    assert single_firm_price(firm, RF, bond) == pytest.approx(single_firm_price_by_quadrature(firm, bond), rel=1e-9)


def test_single_firm_full_recovery():
    firm = firm_from_quality(2.0, 0.2, T)
    assert single_firm_yield(firm, RF, BondContract(K, T, 1.0)) == pytest.approx(RF, abs=1e-12)


def test_safe_partner_reduces_to_single_firm():
    model, bond = pair(0.0, quality2=1e4), BondContract(K, T, 0.7)
    diff = bond_yield(model, bond) - single_firm_yield(model.firm1, RF, bond)
    assert abs(diff) * 1e4 < 0.5


def test_single_firm_below_contagion():
    bond = BondContract(K, T, 0.7)
    none = single_firm_yield(firm_from_quality(2.0, 0.2, T), RF, bond)
    for rho in RHOS:
        assert none < bond_yield(pair(rho), bond)


def test_negative_correlation_rejected():
    with pytest.raises(DomainError, match="rho >= 0"):
        bond_yield(pair(-0.2), BondContract(K, T, 0.7))


def test_contract_validation():
    for kw in ({"writedown": 0.0}, {"writedown": 1.2}, {"maturity": 0.0}, {"face": -1.0}):
        with pytest.raises(DomainError):
            BondContract(**kw)
    with pytest.raises(DomainError, match="maturity"):
        bond_yield(pair(0.4), BondContract(K, 3.0, 0.7))
    with pytest.raises(DomainError, match="face"):
        bond_yield(pair(0.4), BondContract(50.0, T, 0.7))


def test_writedown_consistency_is_a_warning():
    model = PairModel(
        firm_from_quality(2.0, 0.2, T, gamma=0.08), firm_from_quality(2.0, 0.2, T, gamma=0.08), 0.4, RF, T
    )
    with pytest.warns(WritedownConsistencyWarning):
        y = bond_yield(model, BondContract(K, T, 0.95))
    assert y > RF
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        bond_yield(model, BondContract(K, T, 0.8))


def test_zero_price_rejected():
    from credit_contagion.bond import _yield

    with pytest.raises(PricingError):
        _yield(0.0, K, T)
