"""Legendre polynomials, the boundary-adapted bases built from them, and
Gauss-Legendre quadrature on [-1, 1].

Three families are used by the discretizations:

* ``DIRICHLET_BOTH``: ``Lt_k(x) = c_k (1 - x^2) L_k'(x)``, ``c_k = sqrt(k + 1/2) / (k (k + 1))``,
  k >= 1. Vanishes at both endpoints and is orthonormal for the H^1_0 inner product.
* ``LEFT_DIRICHLET``: ``Lh_k(x) = L_k(x) - (-1)^k``, k >= 1. Vanishes at x = -1.
* ``PLAIN_LEGENDRE``: ``L_k``, k >= 0.
"""
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
import math

import numpy as np

from .errors import BasisIndexError, ConvergenceError, DomainError
from .kernels import get_tolerances, solve

_ENDPOINT_SLACK = 1e-12


class BasisKind(Enum):
    DIRICHLET_BOTH = "dirichlet-both"
    LEFT_DIRICHLET = "left-dirichlet"
    PLAIN_LEGENDRE = "legendre"

    @property
    def first_index(self):
        return 0 if self is BasisKind.PLAIN_LEGENDRE else 1


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule: ``sum(weights * f(nodes))`` approximates the integral of f over [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def integrate(self, values):
        """Integrate sampled values; extra trailing axes are integrated independently."""
        return np.tensordot(self.weights, np.asarray(values, dtype=float), axes=(0, 0))


def _check_domain(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + _ENDPOINT_SLACK):
        raise DomainError(f"Legendre polynomials are evaluated on [-1, 1], got max |x| = {np.max(np.abs(x))}")
    return x


def _legendre_upto(n, x):
    """Values and derivatives of L_0..L_n at x, stacked on a new leading axis."""
    x = np.asarray(x, dtype=float)
    vals = np.empty((n + 1,) + x.shape)
    ders = np.empty((n + 1,) + x.shape)
    vals[0] = 1.0
    ders[0] = 0.0
    if n >= 1:
        vals[1] = x
        ders[1] = 1.0
    for k in range(1, n):
        vals[k + 1] = ((2 * k + 1) * x * vals[k] - k * vals[k - 1]) / (k + 1)
        ders[k + 1] = ders[k - 1] + (2 * k + 1) * vals[k]
    return vals, ders


def legendre_eval(k, x):
    """Return ``(L_k(x), L_k'(x))`` from the upward three-term recurrence."""
    if k < 0:
        raise BasisIndexError(f"Legendre degree must be >= 0, got {k}")
    x = _check_domain(x)
    vals, ders = _legendre_upto(k, x)
    if vals.ndim == 1:
        return float(vals[k]), float(ders[k])
    return vals[k], ders[k]


def basis_matrix(kind, n_modes, x):
    """Values and derivatives of the first ``n_modes`` functions of ``kind`` at points x.

    Returns two arrays of shape ``x.shape + (n_modes,)``; column j holds the mode with
    index ``kind.first_index + j``.
    """
    x = _check_domain(x)
    if n_modes == 0:
        empty = np.zeros(x.shape + (0,))
        return empty, empty.copy()
    first = kind.first_index
    top = first + n_modes
    vals, ders = _legendre_upto(top, x)
    if kind is BasisKind.PLAIN_LEGENDRE:
        v, d = vals[:n_modes], ders[:n_modes]
    elif kind is BasisKind.LEFT_DIRICHLET:
        k = np.arange(1, top).reshape((-1,) + (1,) * x.ndim)
        v = vals[1:top] - (-1.0) ** k
        d = ders[1:top]
    else:
        # (L_{k-1} - L_{k+1}) / sqrt(4k + 2)
        k = np.arange(1, top).reshape((-1,) + (1,) * x.ndim)
        scale = 1.0 / np.sqrt(4.0 * k + 2.0)
        v = (vals[0:top - 1] - vals[2:top + 1]) * scale
        d = (ders[0:top - 1] - ders[2:top + 1]) * scale
    return np.moveaxis(v, 0, -1), np.moveaxis(d, 0, -1)


def basis_eval(kind, k, x):
    """Evaluate mode ``k`` of the family ``kind`` and its derivative at x."""
    kind = BasisKind(kind)
    if k < kind.first_index:
        raise BasisIndexError(f"{kind.value} basis starts at index {kind.first_index}, got {k}")
    if kind is BasisKind.PLAIN_LEGENDRE:
        return legendre_eval(k, x)
    x = _check_domain(x)
    scalar = x.ndim == 0
    xx = np.atleast_1d(x)
    if kind is BasisKind.LEFT_DIRICHLET:
        vals, ders = _legendre_upto(k, xx)
        v = vals[k] - (-1.0) ** k
        d = ders[k]
    else:
        vals, ders = _legendre_upto(k + 1, xx)
        scale = 1.0 / math.sqrt(4 * k + 2)
        v = (vals[k - 1] - vals[k + 1]) * scale
        d = (ders[k - 1] - ders[k + 1]) * scale
    if scalar:
        return float(v[0]), float(d[0])
    return v, d


def endpoint_slope(kind, n_modes, side=1):
    """Closed-form derivatives of the first ``n_modes`` functions at x = side (side = +-1)."""
    k = np.arange(kind.first_index, kind.first_index + n_modes, dtype=float)
    # L_k'(+-1) = (+-1)^(k+1) k (k+1) / 2
    legendre_slope = np.where(side > 0, 1.0, (-1.0) ** (k + 1)) * k * (k + 1) / 2.0
    if kind is BasisKind.DIRICHLET_BOTH:
        # d/dx [c_k (1 - x^2) L_k'] at x = +-1 is -2 x c_k L_k'(x)
        return -2.0 * side * np.sqrt(k + 0.5) / (k * (k + 1)) * legendre_slope
    return legendre_slope


def endpoint_value(kind, n_modes, side=1):
    k = np.arange(kind.first_index, kind.first_index + n_modes, dtype=float)
    legendre_value = np.ones_like(k) if side > 0 else (-1.0) ** k
    if kind is BasisKind.DIRICHLET_BOTH:
        return np.zeros_like(k)
    if kind is BasisKind.LEFT_DIRICHLET:
        return legendre_value - (-1.0) ** k
    return legendre_value


@lru_cache(maxsize=64)
def _gauss_legendre_cached(n):
    m = (n + 1) // 2
    i = np.arange(1, m + 1)
    # Chebyshev-angle initial guesses, largest root first
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(100):
        vals, ders = _legendre_upto(n, x)
        step = vals[n] / ders[n]
        x = x - step
        if np.max(np.abs(step)) <= get_tolerances().newton_step:
            break
    else:
        raise ConvergenceError(f"Newton iteration for the {n}-point Gauss rule did not converge")
    vals, ders = _legendre_upto(n, x)
    w = 2.0 / ((1.0 - x**2) * ders[n] ** 2)
    if n % 2:
        x[-1] = 0.0
        nodes = np.concatenate([-x, x[-2::-1]])
        weights = np.concatenate([w, w[-2::-1]])
    else:
        nodes = np.concatenate([-x, x[::-1]])
        weights = np.concatenate([w, w[::-1]])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights, order=n)


def gauss_legendre(n):
    """n-point Gauss-Legendre rule, exact for polynomials of degree 2n - 1."""
    n = int(n)
    if n < 1:
        raise ValueError(f"quadrature order must be >= 1, got {n}")
    return _gauss_legendre_cached(n)


def rule_for_degree(degree):
    """Smallest Gauss rule that integrates polynomials of the given degree exactly."""
    return gauss_legendre(max(1, math.ceil((degree + 2) / 2)))


def gram_matrix(kind, n_modes, rule=None):
    """L^2 Gram (mass) matrix of the first ``n_modes`` functions of ``kind``."""
    rule = rule or rule_for_degree(2 * (n_modes + 1))
    v, _ = basis_matrix(kind, n_modes, rule.nodes)
    return (v * rule.weights[:, None]).T @ v


def moments(f, kind, n_modes, rule):
    """Vector of integrals of ``f * phi_k`` over [-1, 1]."""
    v, _ = basis_matrix(kind, n_modes, rule.nodes)
    fx = np.broadcast_to(np.asarray(f(rule.nodes), dtype=float), rule.nodes.shape)
    return v.T @ (rule.weights * fx)


def project(f, kind, n_modes, rule=None):
    """Coefficients of the L^2 projection of f onto the first ``n_modes`` functions of ``kind``.

    Without an explicit rule, ``2 * n_modes + 2`` Gauss points are used: exact when f is a
    polynomial of degree at most ``2 * n_modes``, an approximation otherwise.
    """
    kind = BasisKind(kind)
    rule = rule or gauss_legendre(2 * n_modes + 2)
    gram = gram_matrix(kind, n_modes, rule_for_degree(2 * (n_modes + 1)))
    return solve(gram, moments(f, kind, n_modes, rule), spd_hint=True)


def evaluate_expansion(kind, coeffs, x):
    """Value and derivative of ``sum_k coeffs[k] phi_k`` at x."""
    v, d = basis_matrix(kind, len(coeffs), x)
    return v @ coeffs, d @ coeffs
