"""Joint first-passage survival of two correlated drifted Brownian motions.

In log coordinates ``X_i(t) = alpha_i t + sigma_i W_i(t)`` each firm
defaults when ``X_i`` first reaches ``B_i <= 0``. After removing the
drift with an exponential change of measure and mapping the quadrant
``{x1 >= B1, x2 >= B2}`` onto a wedge of angle ``beta`` (``cos beta =
-rho``), the killed transition density is an eigenfunction series in
the angle with modified Bessel functions in the radius. Everything in
this module integrates that series over sub-regions of the wedge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ive
from scipy.stats import norm

from .errors import ConvergenceError, DegenerateInputError, DomainError
from .model import FirmParams, NumericsConfig, PairModel, default_level
from .quadrature import composite_gauss_legendre, gauss_legendre, smolyak_grid
from .special_functions import integral_form_tail

__all__ = [
    "PolarTransform",
    "polar_transform",
    "joint_survival",
    "joint_survival_zero_drift",
    "marginal_survival",
    "restricted_exp_moment",
    "scaled_distance_to_default",
]

DEFAULT_NUMERICS = NumericsConfig()

# Half-width, in units of sqrt(t), of the radial window kept around the
# Gaussian centre; exp(-L^2/2) ~ 2e-22.
_RADIAL_HALF_WIDTH = 10.0
_PANEL_WIDTH = 2.5  # radial panel width in units of sqrt(t)
_CHUNK = 16
_EDGE_SUBPANELS = 6
_RUN_BELOW_TOL = 4
# Below this Bonferroni gap the joint survival is returned from the marginals.
_SHORT_TIME_GAP = 1e-13


@dataclass(frozen=True)
class PolarTransform:
    """Drift-removal exponents and wedge coordinates of a :class:`PairModel`."""

    a1: float
    a2: float
    b: float
    beta: float
    r0: float
    theta0: float
    sigma1: float
    sigma2: float

    def amplitude(self, theta):
        """``A(theta) = a1 sigma1 sin(beta - theta) + a2 sigma2 sin(theta)``."""
        theta = np.asarray(theta, dtype=float)
        return self.a1 * self.sigma1 * np.sin(self.beta - theta) + self.a2 * self.sigma2 * np.sin(theta)


def polar_transform(model: PairModel) -> PolarTransform:
    """Derived wedge quantities of ``model``.

    Raises :class:`DegenerateInputError` when both firms start on their
    barriers, where the initial angle is undefined.
    """
    rho = model.rho
    s1, s2 = model.firm1.sigma, model.firm2.sigma
    al1, al2 = model.alpha1, model.alpha2
    B1, B2 = model.B1, model.B2
    one_m = 1.0 - rho * rho
    a1 = (al1 * s2 - rho * al2 * s1) / (one_m * s1 * s1 * s2)
    a2 = (al2 * s1 - rho * al1 * s2) / (one_m * s1 * s2 * s2)
    b = -al1 * a1 - al2 * a2 + 0.5 * s1**2 * a1**2 + rho * s1 * s2 * a1 * a2 + 0.5 * s2**2 * a2**2
    sin_beta = math.sqrt(one_m)
    beta = math.atan2(sin_beta, -rho)
    x0 = -B1 / s1
    y0 = -B2 / s2
    if x0 == 0.0 and y0 == 0.0:
        raise DegenerateInputError("both firms start on their default barriers")
    r0 = math.sqrt(max(0.0, x0 * x0 - 2.0 * rho * x0 * y0 + y0 * y0) / one_m)
    theta0 = math.atan2(sin_beta * y0, x0 - rho * y0)
    theta0 = min(max(theta0, 0.0), beta)
    return PolarTransform(a1, a2, b, beta, r0, theta0, s1, s2)


def scaled_distance_to_default(firm: FirmParams, horizon: float) -> float:
    """``ln(V(0) / b(0)) / sigma``."""
    return -firm.log_barrier(horizon) / firm.sigma


def marginal_survival(firm: FirmParams, rf: float, t: float, horizon: float | None = None) -> float:
    """Single-firm probability of not reaching the barrier by ``t``.

    ``horizon`` fixes the barrier ``face * exp(-gamma (horizon - t))``;
    it defaults to ``t``.
    """
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    B = default_level(firm, t if horizon is None else horizon)
    return _marginal(B, firm.drift(rf), firm.sigma, t)


def _marginal(B: float, alpha: float, sigma: float, t: float) -> float:
    if B >= 0.0:
        return 0.0
    sd = sigma * math.sqrt(t)
    upper = float(norm.cdf((-B + alpha * t) / sd))
    lower = float(norm.cdf((B + alpha * t) / sd))
    reflect = math.exp(2.0 * alpha * B / sigma**2) * lower if lower > 0 else 0.0
    return min(1.0, max(0.0, upper - reflect))


def _marginals(model: PairModel, t: float) -> tuple[float, float]:
    return (
        _marginal(model.B1, model.alpha1, model.firm1.sigma, t),
        _marginal(model.B2, model.alpha2, model.firm2.sigma, t),
    )


def _check_t(t: float) -> None:
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"t must be positive and finite, got {t}")


class _SeriesAccumulator:
    """Sums series terms until a run of consecutive terms falls below tolerance."""

    def __init__(self, tol: float, n_max: int, what: str):
        self.tol = tol
        self.n_max = n_max
        self.what = what
        self.total = 0.0
        self.run = 0
        self.n = 0
        self.done = False

    def feed(self, terms) -> bool:
        for term in terms:
            self.n += 1
            self.total += term
            self.run = self.run + 1 if abs(term) < self.tol else 0
            if self.run >= _RUN_BELOW_TOL:
                self.done = True
                return True
        return False

    def result(self) -> float:
        if not self.done:
            raise ConvergenceError(
                f"{self.what}: series not converged after {self.n_max} terms "
                f"(last {self.run} terms below {self.tol:g})"
            )
        return self.total


def _theta_rule(beta: float, n_hi: int, cfg: NumericsConfig):
    # >= 3 nodes per half-wave of sin(n pi theta / beta) at the highest order
    total = max(cfg.theta_nodes, 3 * n_hi)
    panels = max(1, math.ceil(total / 16))
    return composite_gauss_legendre(0.0, beta, panels, 16)


def _band_theta_rule(pt: PolarTransform, n_hi: int, cfg: NumericsConfig, edges, r_lo: float, r_hi: float):
    """Angular rule whose panels follow the band edges through the radial window.

    An edge ``x`` of the band is the curve ``r = x / sin(beta - theta)``.
    Where it sweeps through ``[r_lo, r_hi]`` the angular integrand changes
    quickly, so panel breaks are placed at the angles where the edge
    meets equally spaced radii of the window.
    """
    beta = pt.beta
    breaks = [0.0, beta]
    if beta > 0.5 * math.pi:
        breaks.append(beta - 0.5 * math.pi)
    for x in edges:
        if not (0.0 < x < math.inf):
            continue
        for R in np.linspace(r_lo, r_hi, _EDGE_SUBPANELS + 1):
            if R <= x:
                continue
            a = math.asin(x / R)
            for th in (beta - a, beta - math.pi + a):
                if 0.0 < th < beta:
                    breaks.append(th)
    breaks = np.unique(breaks)
    density = max(cfg.theta_nodes, 3 * n_hi) / beta
    pts, wts = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a <= 1e-15:
            continue
        x, w = composite_gauss_legendre(a, b, max(1, math.ceil(density * (b - a) / 16)), 16)
        pts.append(x)
        wts.append(w)
    return np.concatenate(pts), np.concatenate(wts)


def _radial_unit_rule(span: float, t: float, cfg: NumericsConfig):
    """Composite Gauss-Legendre rule on [0, 1] for a radial window of width ``span``.

    Near r = 0 the integrand behaves like r^(nu + 1) with fractional
    nu, so the first panel is graded geometrically towards 0.
    """
    panels = max(1, math.ceil(span / (_PANEL_WIDTH * math.sqrt(t))))
    per_panel = max(16, math.ceil(cfg.r_nodes / panels))
    h = 1.0 / panels
    edges = np.concatenate([[0.0], h * 4.0 ** -np.arange(4, 0, -1), np.linspace(h, 1.0, panels)])
    x, w = gauss_legendre(per_panel)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def _amplitude_range(pt: PolarTransform, eps: float) -> tuple[float, float]:
    th = np.linspace(0.0, pt.beta, 1025)
    amp = pt.amplitude(th) + eps * pt.sigma1 * np.sin(pt.beta - th)
    return float(amp.min()), float(amp.max())


def _moment_full_tensor(pt: PolarTransform, t: float, eps: float, log_pref: float, cfg: NumericsConfig) -> float:
    """Whole-wedge moment: one radial grid shared by every angle."""
    sq = math.sqrt(t)
    amp_lo, amp_hi = _amplitude_range(pt, eps)
    lo = max(0.0, pt.r0 + amp_lo * t - _RADIAL_HALF_WIDTH * sq)
    hi = pt.r0 + amp_hi * t + _RADIAL_HALF_WIDTH * sq
    u, wu = _radial_unit_rule(hi - lo, t, cfg)
    r, wr = lo + (hi - lo) * u, (hi - lo) * wu
    radial_w = wr * r
    x = r * pt.r0 / t
    acc = _SeriesAccumulator(cfg.series_tol, cfg.n_max, "joint survival")
    scale = 2.0 / (pt.beta * t)
    for start in range(1, cfg.n_max + 1, _CHUNK):
        n = np.arange(start, min(start + _CHUNK, cfg.n_max + 1))
        th, wth = _theta_rule(pt.beta, int(n[-1]), cfg)
        amp = pt.amplitude(th) + eps * pt.sigma1 * np.sin(pt.beta - th)
        expo = amp[:, None] * r[None, :] - (r[None, :] - pt.r0) ** 2 / (2.0 * t) + log_pref
        E = wth[:, None] * np.exp(expo)
        S = np.sin(np.outer(n, th) * (math.pi / pt.beta))
        ang = S @ E
        nu = n * math.pi / pt.beta
        bess = ive(nu[:, None], x[None, :])
        terms = scale * np.sin(n * math.pi * pt.theta0 / pt.beta) * np.sum(ang * bess * radial_w, axis=1)
        if acc.feed(terms.tolist()):
            break
    return acc.result()


def _radial_limits(pt: PolarTransform, theta, xa: float, xb: float):
    """Radii where ``(x1 - B1)/sigma1 = r sin(beta - theta)`` equals ``xa`` and ``xb``."""
    s = np.sin(pt.beta - theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        d_a = np.where(xa > 0.0, xa / s, 0.0)
        d_b = np.where(np.isinf(xb), np.inf, xb / s)
    d_a = np.where(s <= 0.0, np.where(xa > 0.0, np.inf, 0.0), d_a)
    d_b = np.where(s <= 0.0, np.inf, d_b)
    return d_a, d_b


def _theta_windows(pt: PolarTransform, t: float, eps: float, th, xa: float, xb: float):
    sq = math.sqrt(t)
    amp = pt.amplitude(th) + eps * pt.sigma1 * np.sin(pt.beta - th)
    centre = pt.r0 + amp * t
    d_a, d_b = _radial_limits(pt, th, xa, xb)
    lo = np.maximum.reduce([np.zeros_like(th), centre - _RADIAL_HALF_WIDTH * sq, d_a])
    hi = np.minimum(centre + _RADIAL_HALF_WIDTH * sq, d_b)
    empty = ~(hi > lo)
    return amp, np.where(empty, 0.0, lo), np.where(empty, 0.0, hi)


def _moment_band_tensor(
    pt: PolarTransform, t: float, eps: float, xa: float, xb: float, log_pref: float, cfg: NumericsConfig
) -> float:
    """Moment over a band ``xa <= (x1 - B1)/sigma1 <= xb``; angle outer, radius inner."""
    sq = math.sqrt(t)
    xg, wg = _radial_unit_rule(2.0 * _RADIAL_HALF_WIDTH * sq, t, cfg)
    amp_lo, amp_hi = _amplitude_range(pt, eps)
    r_lo = max(0.0, pt.r0 + amp_lo * t - _RADIAL_HALF_WIDTH * sq)
    r_hi = pt.r0 + amp_hi * t + _RADIAL_HALF_WIDTH * sq
    acc = _SeriesAccumulator(cfg.series_tol, cfg.n_max, "restricted moment")
    scale = 2.0 / (pt.beta * t)
    for start in range(1, cfg.n_max + 1, _CHUNK):
        n = np.arange(start, min(start + _CHUNK, cfg.n_max + 1))
        th, wth = _band_theta_rule(pt, int(n[-1]), cfg, (xa, xb), r_lo, r_hi)
        amp, lo, hi = _theta_windows(pt, t, eps, th, xa, xb)
        keep = hi > lo
        th, wth, amp, lo, hi = th[keep], wth[keep], amp[keep], lo[keep], hi[keep]
        if th.size == 0:
            acc.feed([0.0] * len(n))
            if acc.done:
                break
            continue
        r = lo[:, None] + (hi - lo)[:, None] * xg[None, :]
        wr = (hi - lo)[:, None] * wg[None, :]
        expo = amp[:, None] * r - (r - pt.r0) ** 2 / (2.0 * t) + log_pref
        base = wth[:, None] * wr * r * np.exp(expo)
        S = np.sin(np.outer(n, th) * (math.pi / pt.beta))
        nu = n * math.pi / pt.beta
        bess = ive(nu[:, None, None], (r * pt.r0 / t)[None, :, :])
        inner = np.einsum("nkj,kj->nk", bess, base)
        terms = scale * np.sin(n * math.pi * pt.theta0 / pt.beta) * np.sum(S * inner, axis=1)
        if acc.feed(terms.tolist()):
            break
    return acc.result()


def _moment_band_sparse(
    pt: PolarTransform, t: float, eps: float, xa: float, xb: float, log_pref: float, cfg: NumericsConfig
) -> float:
    """Same band moment as :func:`_moment_band_tensor`, as 3-D integrals on a Smolyak grid.

    Axes: angle, radius mapped onto the per-angle window, and the
    integration variable of the Bessel integral representation.
    """
    pts, wts = smolyak_grid(3, cfg.sparse_level, cfg.sparse_base)
    th = pt.beta * pts[:, 0]
    amp, lo, hi = _theta_windows(pt, t, eps, th, xa, xb)
    r = lo + (hi - lo) * pts[:, 1]
    x = r * pt.r0 / t
    # the cosine integrand exp(x (cos phi - 1)) is negligible beyond phi ~ 12/sqrt(x)
    with np.errstate(divide="ignore"):
        phi_max = np.where(x > 0, np.minimum(math.pi, 12.0 / np.sqrt(x)), math.pi)
    w3 = pts[:, 2]
    phi = phi_max * w3
    base = wts * pt.beta * (hi - lo) * r * np.exp(amp * r - (r - pt.r0) ** 2 / (2.0 * t) + log_pref)
    head_env = base * np.exp(x * (np.cos(phi) - 1.0)) * phi_max / math.pi
    acc = _SeriesAccumulator(cfg.series_tol, cfg.n_max, "restricted moment (sparse)")
    scale = 2.0 / (pt.beta * t)
    for n in range(1, cfg.n_max + 1):
        nu = n * math.pi / pt.beta
        ang = np.sin(n * math.pi * th / pt.beta)
        head = head_env * np.cos(nu * phi)
        sn = math.sin(nu * math.pi)
        if sn != 0.0:
            head = head - (sn / math.pi) * base * integral_form_tail(nu, x, w3)
        term = scale * math.sin(n * math.pi * pt.theta0 / pt.beta) * float(np.dot(ang, head))
        if acc.feed([term]):
            break
    return acc.result()


def _moment(model: PairModel, t: float, eps: float, xa: float, xb: float, cfg: NumericsConfig) -> float:
    pt = polar_transform(model)
    log_pref = (pt.a1 + eps) * model.B1 + pt.a2 * model.B2 + pt.b * t - 0.0
    # exp(-r0^2/2t) is folded into the Gaussian centred at r0; the Bessel
    # factor is carried in exp(-x)-scaled form
    if cfg.grid_kind == "sparse":
        return _moment_band_sparse(pt, t, eps, xa, xb, log_pref, cfg)
    if xa == 0.0 and math.isinf(xb):
        return _moment_full_tensor(pt, t, eps, log_pref, cfg)
    return _moment_band_tensor(pt, t, eps, xa, xb, log_pref, cfg)


def joint_survival(model: PairModel, t: float, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """Probability that neither firm has reached its barrier by ``t``.

    Evaluates the wedge eigenfunction series for general drifts. When the
    marginal default probabilities together are below 1e-13 the
    Bonferroni lower bound ``S1 + S2 - 1`` is returned instead; it is
    within that gap of the exact value.
    """
    _check_t(t)
    if model.B1 >= 0.0 or model.B2 >= 0.0:
        return 0.0
    s1, s2 = _marginals(model, t)
    if (1.0 - s1) + (1.0 - s2) < _SHORT_TIME_GAP:
        return max(0.0, s1 + s2 - 1.0)
    p = _moment(model, t, 0.0, 0.0, math.inf, cfg)
    return min(1.0, max(0.0, p))


def joint_survival_zero_drift(model: PairModel, t: float, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """Joint survival when both log values are driftless.

    Requires ``gamma_i = rf - q_i - sigma_i^2 / 2`` (to 1e-12). Uses the
    single odd-order series in Bessel functions of argument ``r0^2/4t``.
    """
    _check_t(t)
    if abs(model.alpha1) > 1e-12 or abs(model.alpha2) > 1e-12:
        raise DomainError(
            f"zero-drift formula needs alpha_1 = alpha_2 = 0, got {model.alpha1:.3g}, {model.alpha2:.3g}"
        )
    if model.B1 >= 0.0 or model.B2 >= 0.0:
        return 0.0
    s1, s2 = _marginals(model, t)
    if (1.0 - s1) + (1.0 - s2) < _SHORT_TIME_GAP:
        return max(0.0, s1 + s2 - 1.0)
    pt = polar_transform(model)
    z = pt.r0**2 / (4.0 * t)
    pref = 2.0 * pt.r0 / math.sqrt(2.0 * math.pi * t)
    acc = _SeriesAccumulator(cfg.series_tol, cfg.n_max, "zero-drift joint survival")
    for start in range(1, 2 * cfg.n_max, 2 * _CHUNK):
        n = np.arange(start, min(start + 2 * _CHUNK, 2 * cfg.n_max), 2)
        nu = n * math.pi / pt.beta
        terms = pref / n * np.sin(n * math.pi * pt.theta0 / pt.beta) * (
            ive(0.5 * (nu + 1.0), z) + ive(0.5 * (nu - 1.0), z)
        )
        if acc.feed(terms.tolist()):
            break
    return min(1.0, max(0.0, acc.result()))


def restricted_exp_moment(
    model: PairModel,
    t: float,
    epsilon: float,
    lower: float,
    upper: float = math.inf,
    cfg: NumericsConfig = DEFAULT_NUMERICS,
) -> float:
    """``E[exp(epsilon X1(t)); lower <= X1(t) <= upper, no default by t]``.

    Integrates the killed joint density of ``(X1(t), X2(t))`` over
    ``lower <= x1 <= upper`` and ``x2 >= B2`` with weight
    ``exp(epsilon * x1)``. ``lower`` must not lie below ``B1``.
    """
    _check_t(t)
    B1 = model.B1
    if not (math.isfinite(lower) and lower >= B1 - 1e-14):
        raise DomainError(f"lower limit {lower} must be finite and >= B1 = {B1}")
    if math.isnan(upper) or upper < lower:
        raise DomainError(f"interval [{lower}, {upper}] is malformed")
    if B1 >= 0.0 or model.B2 >= 0.0 or upper == lower:
        return 0.0
    s1 = model.firm1.sigma
    xa = max(0.0, (lower - B1) / s1)
    xb = math.inf if math.isinf(upper) else (upper - B1) / s1
    return max(0.0, _moment(model, t, float(epsilon), xa, xb, cfg))
