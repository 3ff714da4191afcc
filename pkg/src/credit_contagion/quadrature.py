"""Deterministic quadrature rules.

Gauss-Legendre panels for one-dimensional integrals, tensor and
Smolyak sparse grids (nested Clenshaw-Curtis) for three-dimensional
integrals, and the discounted time integral used by CDS premium legs.

Node and weight tables are cached and returned read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, Sequence

import numpy as np
from scipy.special import comb

from .errors import DomainError, NonFiniteIntegrandError

__all__ = [
    "GridSpec",
    "gauss_legendre",
    "composite_gauss_legendre",
    "clenshaw_curtis",
    "smolyak_grid",
    "unit_cube_rule",
    "integrate_1d",
    "integrate_3d",
    "integrate_time_leg",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    if n < 1:
        raise DomainError(f"node count must be positive, got {n}")
    x, w = np.polynomial.legendre.leggauss(n)
    return _frozen(x), _frozen(w)


def composite_gauss_legendre(
    a: float, b: float, panels: int, nodes_per_panel: int
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite Gauss-Legendre rule on [a, b]."""
    x, w = gauss_legendre(nodes_per_panel)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


@lru_cache(maxsize=None)
def clenshaw_curtis(n_intervals: int) -> tuple[np.ndarray, np.ndarray]:
    """Clenshaw-Curtis rule with ``n_intervals + 1`` points on [-1, 1].

    Nodes are ``cos(j*pi/N)`` for ``j = 0..N``, so the rule for ``2N``
    contains the rule for ``N``.
    """
    N = int(n_intervals)
    if N == 0:
        return _frozen(np.array([0.0])), _frozen(np.array([2.0]))
    j = np.arange(N + 1)
    theta = j * np.pi / N
    x = np.cos(theta)
    w = np.empty(N + 1)
    for i in range(N + 1):
        s = 0.0
        for k in range(1, N // 2 + 1):
            bk = 1.0 if 2 * k == N else 2.0
            s += bk / (4 * k * k - 1) * math.cos(2 * k * theta[i])
        c = 1.0 if i in (0, N) else 2.0
        w[i] = c / N * (1.0 - s)
    return _frozen(x), _frozen(w)


def _cc_intervals(level: int, base: int) -> int:
    return base * 2**level


@lru_cache(maxsize=32)
def smolyak_grid(dim: int, level: int, base: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Smolyak sparse grid on the unit cube built from nested Clenshaw-Curtis rules.

    The one-dimensional rule at level ``l`` has ``base * 2**l + 1``
    points; the combination technique sums tensor rules with
    ``L - dim + 1 <= |l| <= L`` and merges coincident nodes exactly
    through their integer index on the finest level.

    Returns
    -------
    points : (m, dim) array in [0, 1]^dim
    weights : (m,) array summing to 1
    """
    if dim < 1 or level < 0 or base < 1:
        raise DomainError("invalid sparse grid parameters")
    finest = _cc_intervals(level, base)
    radix = finest + 1
    all_keys, all_w = [], []
    for ell in product(range(level + 1), repeat=dim):
        s = sum(ell)
        if s > level or s < level - dim + 1:
            continue
        coef = (-1) ** (level - s) * comb(dim - 1, level - s, exact=True)
        key = np.zeros(1, dtype=np.int64)
        w_grid = np.full(1, float(coef))
        for li in ell:
            n = _cc_intervals(li, base)
            _, w = clenshaw_curtis(n)
            idx = np.arange(n + 1, dtype=np.int64) * (finest // n)
            key = (key[:, None] * radix + idx[None, :]).ravel()
            w_grid = np.multiply.outer(w_grid, w).ravel()
        all_keys.append(key)
        all_w.append(w_grid)
    uniq, inverse = np.unique(np.concatenate(all_keys), return_inverse=True)
    wts = np.bincount(inverse, weights=np.concatenate(all_w))
    keep = wts != 0.0
    uniq, wts = uniq[keep], wts[keep]
    keys = np.empty((uniq.size, dim), dtype=np.int64)
    rem = uniq.copy()
    for axis in range(dim - 1, -1, -1):
        keys[:, axis] = rem % radix
        rem //= radix
    x_fine, _ = clenshaw_curtis(finest)
    pts = 0.5 * (1.0 - x_fine[keys])
    return _frozen(pts), _frozen(wts / 2.0**dim)


@dataclass(frozen=True)
class GridSpec:
    """Resolution of a three-dimensional quadrature.

    ``kind="tensor"`` uses Gauss-Legendre with ``nodes`` points per axis;
    ``kind="sparse"`` uses :func:`smolyak_grid` at ``level`` with
    ``base`` intervals in the coarsest one-dimensional rule.
    """

    kind: str = "tensor"
    nodes: tuple[int, int, int] = (32, 32, 32)
    level: int = 4
    base: int = 8

    def __post_init__(self):
        if self.kind not in ("tensor", "sparse"):
            raise DomainError(f"grid kind must be 'tensor' or 'sparse', got {self.kind!r}")
        if len(self.nodes) != 3 or min(self.nodes) < 4:
            raise DomainError("tensor grids need three axes with at least 4 nodes each")
        if self.level < 0 or self.base < 4:
            raise DomainError("sparse grids need level >= 0 and base >= 4")

    def refined(self) -> "GridSpec":
        return GridSpec(self.kind, tuple(2 * n for n in self.nodes), self.level + 1, self.base)


def unit_cube_rule(spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Points in [0, 1]^3 and weights for ``spec``."""
    if spec.kind == "sparse":
        return smolyak_grid(3, spec.level, spec.base)
    axes = []
    for n in spec.nodes:
        x, w = gauss_legendre(n)
        axes.append((0.5 * (x + 1.0), 0.5 * w))
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wts = np.multiply.outer(np.multiply.outer(axes[0][1], axes[1][1]), axes[2][1]).ravel()
    return pts, wts


def _check_finite(values: np.ndarray, where: str) -> None:
    if not np.all(np.isfinite(values)):
        bad = int(np.count_nonzero(~np.isfinite(values)))
        raise NonFiniteIntegrandError(f"{bad} non-finite integrand samples in {where}")


def integrate_1d(f: Callable, a: float, b: float, nodes: int = 32) -> float:
    """Gauss-Legendre approximation of the integral of ``f`` over [a, b].

    ``f`` is called once with the array of nodes. The rule is exact for
    polynomials of degree up to ``2 * nodes - 1``.
    """
    if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
        raise DomainError(f"need finite a < b, got [{a}, {b}]")
    x, w = gauss_legendre(nodes)
    half = 0.5 * (b - a)
    s = 0.5 * (a + b) + half * x
    vals = np.asarray(f(s), dtype=float)
    _check_finite(vals, "integrate_1d")
    return float(half * np.dot(w, vals))


def integrate_3d(
    f: Callable,
    box: Sequence[tuple[float, float]],
    spec: GridSpec = GridSpec(),
) -> float:
    """Integrate ``f(x, y, z)`` over a finite box with a tensor or sparse rule.

    ``f`` receives three equally shaped arrays of coordinates and must
    return an array of the same shape.
    """
    if len(box) != 3:
        raise DomainError("box must have three (low, high) pairs")
    lo = np.array([float(b[0]) for b in box])
    hi = np.array([float(b[1]) for b in box])
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))) or np.any(hi <= lo):
        raise DomainError(f"box must be finite with low < high, got {box}")
    pts, wts = unit_cube_rule(spec)
    xyz = lo + pts * (hi - lo)
    vals = np.asarray(f(xyz[:, 0], xyz[:, 1], xyz[:, 2]), dtype=float)
    _check_finite(vals, "integrate_3d")
    return float(np.prod(hi - lo) * np.dot(wts, vals))


def integrate_time_leg(P: Callable[[float], float], rf: float, T: float, nodes: int = 64) -> float:
    """Discounted time integral ``int_0^T exp(-rf*s) P(s) ds``.

    Gauss-Legendre nodes lie strictly inside (0, T), so ``P`` is never
    evaluated at ``s = 0``; its right limit there is taken to be 1.
    """
    if not (T > 0 and np.isfinite(T)):
        raise DomainError(f"maturity must be positive and finite, got {T}")
    x, w = gauss_legendre(nodes)
    s = 0.5 * T * (x + 1.0)
    vals = np.array([P(float(si)) for si in s], dtype=float)
    _check_finite(vals, "integrate_time_leg")
    return float(0.5 * T * np.dot(w, np.exp(-rf * s) * vals))
