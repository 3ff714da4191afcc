"""Modified Bessel function of the first kind, fractional nonnegative order.

All public values are scaled by ``exp(-x)``: ``bessel_i_scaled(nu, x)``
returns ``exp(-x) * I_nu(x)``, which stays in (0, 1] for x > 0 and
never overflows.

Two independent routes are provided. :func:`bessel_i_scaled` wraps the
AMOS implementation shipped with SciPy. :func:`bessel_i_integral_form`
integrates the two-term integral representation

    I_nu(x) = 1/pi int_0^pi exp(x cos phi) cos(nu phi) dphi
              - sin(nu pi)/pi int_0^inf exp(-x cosh s - nu s) ds

and is used as a cross-check and, through :func:`integral_form_kernel`,
as the innermost axis of the sparse-grid backend.
"""

from __future__ import annotations

import math
import warnings

import mpmath
import numpy as np
from scipy import integrate
from scipy.special import gammaln, ive

from .errors import ConvergenceError, DomainError

__all__ = [
    "bessel_i_scaled",
    "bessel_i_integral_form",
    "integral_form_kernel",
    "integral_form_tail",
]


def _check_args(nu, x):
    nu_a = np.asarray(nu, dtype=float)
    x_a = np.asarray(x, dtype=float)
    if not (np.all(np.isfinite(nu_a)) and np.all(np.isfinite(x_a))):
        raise DomainError("Bessel order and argument must be finite")
    if np.any(nu_a < 0):
        raise DomainError("Bessel order must be nonnegative")
    if np.any(x_a < 0):
        raise DomainError("Bessel argument must be nonnegative")
    return nu_a, x_a


def bessel_i_scaled(nu, x):
    """Return ``exp(-x) * I_nu(x)`` for ``nu >= 0`` and ``x >= 0``.

    Broadcasts over array arguments; returns a float for scalar input.
    Values that the library routine flushes to zero although they are
    representable (large order, small argument) are recomputed from the
    power series in log space.
    """
    nu_a, x_a = _check_args(nu, x)
    out = np.asarray(ive(nu_a, x_a), dtype=float)
    lost = (out == 0.0) & (x_a > 0.0)
    if np.any(lost):
        nu_b, x_b = np.broadcast_arrays(nu_a, x_a)
        out = out.copy()
        out[lost] = _series_log_space(nu_b[lost], x_b[lost])
    return float(out) if out.ndim == 0 else out


def _series_log_space(nu: np.ndarray, x: np.ndarray) -> np.ndarray:
    # sum_k (x^2/4)^k Gamma(nu+1) / (k! Gamma(nu+k+1)), relative to the leading term
    q = 0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 2000):
        term = term * q / (k * (nu + k))
        total += term
        if np.all(term <= 1e-17 * total):
            break
    lead = nu * np.log(0.5 * x) - gammaln(nu + 1.0) - x
    with np.errstate(under="ignore"):
        return np.exp(lead + np.log(total))


def integral_form_tail(nu, x, w):
    """Scaled exponential-tail integrand, ``s = -log(1 - w) / nu``.

    ``int_0^1 integral_form_tail(nu, x, w) dw == exp(-x) int_0^inf exp(-x cosh s - nu s) ds``
    for ``nu > 0``.
    """
    nu = np.asarray(nu, dtype=float)
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        s = -np.log1p(-w) / nu
        out = np.exp(-x * (1.0 + np.cosh(s))) / nu
    return np.where(w >= 1.0, np.where(x == 0.0, 1.0 / nu, 0.0), out)


def integral_form_kernel(nu, x, w):
    """Integrand of the scaled two-term representation on ``w`` in [0, 1].

    ``int_0^1 integral_form_kernel(nu, x, w) dw == exp(-x) I_nu(x)``.

    The cosine integral is mapped by ``phi = pi w``; the exponential tail
    as in :func:`integral_form_tail`. Arguments broadcast.
    """
    nu = np.asarray(nu, dtype=float)
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    phi = np.pi * w
    head = np.exp(x * (np.cos(phi) - 1.0)) * np.cos(nu * phi)
    sin_term = np.sin(nu * np.pi)
    tail = np.where(sin_term == 0.0, 0.0, integral_form_tail(np.where(nu > 0, nu, 1.0), x, w))
    return head - sin_term / np.pi * tail


def _terms_double(nu: float, x: float) -> tuple[float, float]:
    # roundoff warnings are expected when the terms cancel; the caller escalates
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return _terms_double_raw(nu, x)


def _terms_double_raw(nu: float, x: float) -> tuple[float, float]:
    head, _ = integrate.quad(
        lambda p: math.exp(x * (math.cos(p) - 1.0)),
        0.0,
        math.pi,
        weight="cos",
        wvar=nu,
        epsabs=0.0,
        epsrel=1e-13,
        limit=400,
    )
    head /= math.pi
    sn = math.sin(nu * math.pi)
    if sn == 0.0 or nu == 0.0:
        return head, 0.0
    tail, _ = integrate.quad(
        lambda s: math.exp(-x * (1.0 + math.cosh(s)) - nu * s) if s < 700 else 0.0,
        0.0,
        math.inf,
        epsabs=0.0,
        epsrel=1e-13,
        limit=400,
    )
    return head, sn / math.pi * tail


def _terms_mp(nu: float, x: float, dps: int) -> mpmath.mpf:
    with mpmath.workdps(dps):
        nu_m = mpmath.mpf(nu)
        x_m = mpmath.mpf(x)
        head = mpmath.quad(
            lambda p: mpmath.exp(x_m * (mpmath.cos(p) - 1)) * mpmath.cos(nu_m * p),
            mpmath.linspace(0, mpmath.pi, 9),
        ) / mpmath.pi
        sn = mpmath.sin(nu_m * mpmath.pi)
        if nu_m == 0 or abs(sn) < mpmath.mpf(10) ** (-dps + 5):
            return +head
        # exp(-nu s) alone is below the working precision beyond s_max
        s_max = (dps + 10) * mpmath.log(10) / nu_m
        tail = mpmath.quad(
            lambda s: mpmath.exp(-x_m * (1 + mpmath.cosh(s)) - nu_m * s),
            mpmath.linspace(0, s_max, 9),
        )
        return head - sn / mpmath.pi * tail


def bessel_i_integral_form(nu: float, x: float) -> float:
    """Return ``exp(-x) * I_nu(x)`` by integrating the two-term representation.

    Both terms are integrated in double precision first. When they
    cancel to the point that fewer than ~10 significant digits survive
    (small ``x``, large ``nu``), the same integrals are re-evaluated in
    multiprecision with the working precision raised until two
    successive evaluations agree.
    """
    nu_a, x_a = _check_args(nu, x)
    nu, x = float(nu_a), float(x_a)
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    head, tail = _terms_double(nu, x)
    value = head - tail
    mass, _ = integrate.quad(lambda p: math.exp(x * (math.cos(p) - 1.0)), 0.0, math.pi)
    scale = max(mass / math.pi, abs(head), abs(tail))
    if value > 1e-6 * scale:
        return value
    # leading power-series term sets the working precision only
    log10_est = (nu * math.log(x / 2.0) - math.lgamma(nu + 1.0) - x) / math.log(10.0)
    dps = max(30, int(math.log10(scale) - log10_est) + 25)
    prev = None
    for _ in range(6):
        cur = _terms_mp(nu, x, dps)
        if prev is not None and cur > 0 and abs(cur - prev) <= 1e-12 * cur:
            return float(cur)
        prev = cur
        dps += 20
    raise ConvergenceError(f"integral form did not settle for nu={nu}, x={x}")
