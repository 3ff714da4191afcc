"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line (printed in the terminal summary)
before asserting, so the report is complete even when a check fails.
"""

import itertools
import math
import time

from credit_contagion import (
    BondContract,
    CdsContract,
    McConfig,
    NumericsConfig,
    PairModel,
    bond_price,
    bond_yield,
    cds_legs,
    cds_spread,
    discounted_default_payment,
    discounted_maturity_payment,
    firm_from_quality,
    joint_survival,
    joint_survival_zero_drift,
    marginal_survival,
    restricted_exp_moment,
    scaled_distance_to_default,
    simulate,
)

RF, T, K = 0.05, 5.0, 100.0
BASE_RHOS = (0.0, 0.2, 0.4, 0.6, 0.8)
GRID = list(itertools.product((0.0, 0.3, 0.6), (1.0, 3.0, 5.0), (1.5, 2.0, 3.0), (0.15, 0.2, 0.3)))


def base_pair(rho, quality=2.0, sigma=0.2, sigma2=None, maturity=T):
    f1 = firm_from_quality(quality, sigma, maturity)
    f2 = firm_from_quality(quality, sigma2 or sigma, maturity)
    return PairModel(f1, f2, rho, RF, maturity)


def grid_pair(rho, t, quality, sigma, driftless=True):
    gamma = RF - 0.5 * sigma**2 if driftless else 0.03
    f = firm_from_quality(quality, sigma, t, gamma=gamma)
    return PairModel(f, f, rho, RF, t)


def spread(model, flavor, R=0.5, cfg=NumericsConfig()):
    return cds_spread(model, CdsContract(K, model.horizon, R, flavor), cfg)


def strictly(values, sign):
    return all(sign * (b - a) > 0 for a, b in zip(values, values[1:]))


def test_criterion_01_formula_equivalence(acceptance):
    start = time.perf_counter()
    worst = max(abs(joint_survival(m, m.horizon) - joint_survival_zero_drift(m, m.horizon))
                for m in (grid_pair(*g) for g in GRID))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed < 60.0
    acceptance(1, "general vs zero-drift survival", ok, f"max |diff| = {worst:.2e} over {len(GRID)} points in {elapsed:.1f} s")
    assert ok


def test_criterion_02_independence(acceptance):
    worst = 0.0
    for _, t, q, s in GRID:
        for driftless in (True, False):
            m = grid_pair(0.0, t, q, s, driftless)
            product = marginal_survival(m.firm1, RF, t) * marginal_survival(m.firm2, RF, t)
            worst = max(worst, abs(joint_survival(m, t) - product))
    ok = worst <= 1e-6
    acceptance(2, "factorization at rho = 0", ok, f"max |diff| = {worst:.2e}")
    assert ok


def test_criterion_03_restricted_moment_reduction(acceptance):
    worst_full = worst_split = 0.0
    for g in GRID:
        m = grid_pair(*g)
        t = m.horizon
        p = joint_survival(m, t)
        worst_full = max(worst_full, abs(restricted_exp_moment(m, t, 0.0, m.B1) - p))
        # the same mass through the band integrator
        mid = 0.5 * m.B1
        split = restricted_exp_moment(m, t, 0.0, m.B1, mid) + restricted_exp_moment(m, t, 0.0, mid)
        worst_split = max(worst_split, abs(split - p))
    ok = max(worst_full, worst_split) <= 1e-8
    acceptance(3, "restricted moment full mass = survival", ok,
               f"max |diff| = {worst_full:.2e} (direct), {worst_split:.2e} (two bands)")
    assert ok


def test_criterion_04_oracle_agreement(acceptance):
    mc = McConfig(paths=1_000_000, steps_per_year=200, seed=20240229)
    bond = BondContract(K, T, 0.7)
    z = {}
    start = time.perf_counter()
    for rho in (-0.4, 0.0, 0.4, 0.8):
        model = base_pair(rho)
        sample = simulate(model, T, mc)
        if rho >= 0:
            z[f"P rho={rho}"] = sample.estimate_joint_survival().z_score(joint_survival(model, T))
            z[f"bond rho={rho}"] = sample.estimate_bond_price(bond).z_score(bond_price(model, bond))
        flavors = ("first", "second") if rho < 0 else ("first", "second", "second_contagion", "counterparty_homogeneous")
        for flavor in flavors:
            cds = CdsContract(K, T, 0.5, flavor)
            z[f"{flavor} rho={rho}"] = sample.estimate_cds_legs(cds).spread.z_score(cds_legs(model, cds).spread)
    elapsed = time.perf_counter() - start
    worst_key = max(z, key=lambda k: abs(z[k]))
    ok = all(abs(v) <= 3.0 for v in z.values())
    detail = f"{len(z)} quantities, max |z| = {abs(z[worst_key]):.2f} ({worst_key}), {elapsed:.0f} s"
    failing = [f"{k}: z={v:.2f}" for k, v in z.items() if abs(v) > 3.0]
    acceptance(4, "analytic vs Monte Carlo within 3 SE", ok, detail + ("; " + ", ".join(failing) if failing else ""))
    assert ok, failing


def test_criterion_05_risk_free_anchor(acceptance):
    bond = BondContract(K, T, 1.0)
    worst = max(abs(bond_yield(base_pair(r), bond) - RF) * 1e4 for r in BASE_RHOS)
    ok = worst < 0.1
    acceptance(5, "omega = 1 yields rf", ok, f"max |y - 5%| = {worst:.2e} bp")
    assert ok


def test_criterion_06_distance_to_default(acceptance):
    dd = scaled_distance_to_default(firm_from_quality(2.0, 0.2, T), T)
    ok = abs(dd - math.log(2) / 0.2) < 1e-12 and round(dd, 1) == 3.5 and f"{dd:.4f}" == "3.4657"
    acceptance(6, "scaled distance to default", ok, f"{dd:.6f} (rounds to {dd:.1f})")
    assert ok


def test_criterion_07_shapes(acceptance):
    checks = {}
    for omega in (0.5, 0.7):
        ys = [bond_yield(base_pair(r), BondContract(K, T, omega)) for r in BASE_RHOS]
        checks[f"yield decreasing in rho (omega={omega})"] = strictly(ys, -1)
    ys = [bond_yield(base_pair(0.4), BondContract(K, T, w)) for w in (0.3, 0.5, 0.7, 0.9)]
    checks["yield decreasing in omega"] = strictly(ys, -1)
    ys = [bond_yield(base_pair(0.4, sigma=s), BondContract(K, T, 0.7)) for s in (0.15, 0.2, 0.25)]
    checks["yield increasing in sigma"] = strictly(ys, 1)
    ys = [bond_yield(base_pair(0.4, sigma2=s), BondContract(K, T, 0.7)) for s in (0.15, 0.2, 0.25)]
    checks["yield increasing in sigma2"] = strictly(ys, 1)
    rhos = (-0.5, 0.0, 0.5)
    first = [spread(base_pair(r), "first") for r in rhos]
    second = [spread(base_pair(r), "second") for r in rhos]
    checks["c_first decreasing in rho"] = strictly(first, -1)
    checks["c_second increasing in rho"] = strictly(second, 1)
    everywhere = all(
        spread(base_pair(r, maturity=m), "second") <= spread(base_pair(r, maturity=m), "first")
        for r in (-0.5, 0.0, 0.5) for m in (1.0, 3.0, 5.0)
    )
    checks["c_second <= c_first"] = everywhere
    for flavor in ("first", "second"):
        by_t = [spread(base_pair(0.4, maturity=m), flavor) for m in (1.0, 2.0, 3.0, 4.0, 5.0)]
        checks[f"{flavor} increasing in T"] = strictly(by_t, 1)
        by_s = [spread(base_pair(0.4, sigma=s), flavor) for s in (0.15, 0.2, 0.25)]
        checks[f"{flavor} increasing in sigma"] = strictly(by_s, 1)
        ratio = spread(base_pair(0.4), flavor, R=0.3) / spread(base_pair(0.4), flavor, R=0.7)
        checks[f"{flavor} R ratio 7/3"] = abs(ratio - 7 / 3) < 1e-12
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    acceptance(7, "shape properties", ok, f"{sum(checks.values())}/{len(checks)} hold" + (f"; failed: {failed}" if failed else ""))
    assert ok, failed


def test_criterion_08_contagion_identity(acceptance):
    same, exceeds = True, True
    for rho in (0.0, 0.4, 0.8):
        m = base_pair(rho)
        c1, cc, c2 = spread(m, "first"), spread(m, "second_contagion"), spread(m, "second")
        same &= c1 == cc
        exceeds &= cc > c2
    ok = same and exceeds
    acceptance(8, "contagion second = first", ok, f"bit-identical: {same}, exceeds plain second: {exceeds}")
    assert ok


def test_criterion_09_counterparty_symmetry(acceptance):
    m = base_pair(0.4)
    cp, first = spread(m, "counterparty_homogeneous"), spread(m, "first")
    rel = abs(cp - first / 2) / (first / 2)
    asym = base_pair(0.4, sigma2=0.3)
    sample = simulate(asym, T, McConfig(paths=1_000_000, steps_per_year=200, seed=99))
    split = sample.column("protection_1_before_2") + sample.column("protection_2_before_1")
    first_leg = sample.estimate(sample.column("protection_first"))
    gap = sample.estimate(split).mean - first_leg.mean
    z = gap / first_leg.std_error
    ok = rel <= 1e-10 and abs(z) <= 3.0
    acceptance(9, "counterparty symmetry", ok,
               f"|c_cp/(c_first/2) - 1| = {rel:.1e}; MC legs 1|2 + 2|1 - first = {gap:.1e} (z = {z:.2e})")
    assert ok


def test_criterion_10_numerical_robustness(acceptance):
    cfg, fine = NumericsConfig(), NumericsConfig().refined()
    dy = max(
        abs(bond_yield(base_pair(r), BondContract(K, T, w), cfg) - bond_yield(base_pair(r), BondContract(K, T, w), fine))
        for r in BASE_RHOS for w in (0.5, 0.7)
    ) * 1e4
    ds = 0.0
    for r in (-0.4, 0.0, 0.4, 0.8):
        flavors = ("first", "second") if r < 0 else ("first", "second", "second_contagion", "counterparty_homogeneous")
        for flavor in flavors:
            ds = max(ds, abs(spread(base_pair(r), flavor, cfg=cfg) - spread(base_pair(r), flavor, cfg=fine)) * 1e4)
    sparse = NumericsConfig(grid_kind="sparse")
    m, bond = base_pair(0.4), BondContract(K, T, 0.7)
    d = m.B1 - math.log(0.7)
    pairs = {
        "full-mass moment": (restricted_exp_moment(m, T, 0.0, d), restricted_exp_moment(m, T, 0.0, d, cfg=sparse)),
        "band moment": (restricted_exp_moment(m, T, 1.0, m.B1, d), restricted_exp_moment(m, T, 1.0, m.B1, d, cfg=sparse)),
        "DMP": (discounted_maturity_payment(m, bond), discounted_maturity_payment(m, bond, sparse)),
        "DDP": (discounted_default_payment(m, bond), discounted_default_payment(m, bond, sparse)),
    }
    rel = max(abs(a - b) / abs(a) for a, b in pairs.values())
    ok = dy < 0.1 and ds < 0.1 and rel <= 1e-7
    acceptance(10, "refinement and backend agreement", ok,
               f"max yield change {dy:.1e} bp, max spread change {ds:.1e} bp, tensor/sparse rel diff {rel:.1e}")
    assert ok
