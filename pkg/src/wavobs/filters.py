"""Spectral filter functions on [0, 1] and the filtered boundary observation."""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np

from .assembly import FormulationKind
from .errors import DomainError, UnsupportedFormulationError

MACHINE_EPS = 2.0**-52
DEFAULT_ALPHA = -math.log(MACHINE_EPS)


class FilterKind(Enum):
    CESARO = "cesaro"
    LANCZOS = "lanczos"
    RAISED_COSINE = "raised-cosine"
    SHARPENED_RAISED_COSINE = "sharpened-raised-cosine"
    VANDEVEN = "vandeven"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class Filter:
    kind: FilterKind
    p: int = None
    alpha: float = None

    def __post_init__(self):
        kind = FilterKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind in (FilterKind.VANDEVEN, FilterKind.EXPONENTIAL):
            if self.p is None or int(self.p) != self.p or self.p < 1:
                raise ValueError(f"{kind.value} filter needs an integer order p >= 1, got {self.p}")
            object.__setattr__(self, "p", int(self.p))
        elif self.p is not None:
            raise ValueError(f"{kind.value} filter has no order parameter")
        if kind is FilterKind.EXPONENTIAL:
            alpha = DEFAULT_ALPHA if self.alpha is None else float(self.alpha)
            if not alpha > 0:
                raise ValueError(f"exponential filter needs alpha > 0, got {alpha}")
            object.__setattr__(self, "alpha", alpha)
        elif self.alpha is not None:
            raise ValueError(f"{kind.value} filter has no alpha parameter")

    @classmethod
    def parse(cls, text):
        """Parse ``name[:p[:alpha]]``, e.g. ``cesaro``, ``vandeven:4``, ``exponential:6:36``."""
        parts = text.strip().split(":")
        kind = FilterKind(parts[0])
        p = int(parts[1]) if len(parts) > 1 and parts[1] else None
        alpha = float(parts[2]) if len(parts) > 2 and parts[2] else None
        if len(parts) > 3:
            raise ValueError(f"cannot parse filter spec {text!r}")
        return cls(kind, p, alpha)

    def __str__(self):
        out = self.kind.value
        if self.p is not None:
            out += f":{self.p}"
        if self.kind is FilterKind.EXPONENTIAL and self.alpha != DEFAULT_ALPHA:
            out += f":{self.alpha:g}"
        return out


@lru_cache(maxsize=None)
def _vandeven_coefficients(p):
    """Coefficients a_j of ``sum_j a_j eta^(p+j)``, the normalized integral of (t(1-t))^(p-1)."""
    m = p - 1
    norm = Fraction(math.factorial(2 * p - 1), math.factorial(p - 1) ** 2)
    return tuple(float(norm * Fraction(math.comb(m, j) * (-1) ** j, p + j)) for j in range(m + 1))


def _vandeven_large(x, p):
    # binomial-tail form of the regularized incomplete beta I_x(p, p); every term is
    # positive, with log-gamma binomials
    n = 2 * p - 1
    out = np.zeros_like(x)
    with np.errstate(divide="ignore"):
        lx, l1x = np.log(x), np.log1p(-x)
    for j in range(p, n + 1):
        logc = math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1)
        out += np.exp(logc + j * lx + (n - j) * np.where(x < 1.0, l1x, 0.0 if n == j else -np.inf))
    return out


def _vandeven(eta, p):
    if p > 12:
        integral = lambda x: _vandeven_large(x, p)
    else:
        coeffs = _vandeven_coefficients(p)

        def integral(x):
            acc = np.zeros_like(x)
            for a in reversed(coeffs):
                acc = acc * x + a
            return acc * x**p

    # the integrand is symmetric about 1/2, so 1 - I(eta) = I(1 - eta); evaluating on
    # the short side limits cancellation in the alternating sum
    return np.where(eta <= 0.5, 1.0 - integral(eta), integral(1.0 - eta))


def sigma(filt, eta):
    """Filter value at eta in [0, 1] (scalar or array)."""
    scalar = np.ndim(eta) == 0
    eta = np.asarray(eta, dtype=float)
    if np.any((eta < 0.0) | (eta > 1.0)):
        raise DomainError("filter argument must lie in [0, 1]")
    kind = filt.kind
    if kind is FilterKind.CESARO:
        out = 1.0 - eta
    elif kind is FilterKind.LANCZOS:
        out = np.sinc(eta)
    elif kind is FilterKind.RAISED_COSINE:
        out = 0.5 * (1.0 + np.cos(np.pi * eta))
    elif kind is FilterKind.SHARPENED_RAISED_COSINE:
        # s^4 (35 - 84 s + 70 s^2 - 20 s^3) with s = cos^2(pi eta / 2), rewritten in
        # r = 1 - s so that nothing cancels near eta = 0
        s = np.cos(0.5 * np.pi * eta) ** 2
        r = np.sin(0.5 * np.pi * eta) ** 2
        out = s**4 * (1.0 + 4.0 * r + 10.0 * r**2 + 20.0 * r**3)
    elif kind is FilterKind.VANDEVEN:
        out = _vandeven(eta, filt.p)
    else:
        out = np.exp(-filt.alpha * eta**filt.p)
    return float(out) if scalar else out


def mode_weights(filt, N):
    """sigma((k - 1) / (N - 1)) for the modes k = 1..N-1."""
    k = np.arange(1, N)
    return sigma(filt, (k - 1) / (N - 1))


def filtered_observation_row(system, filt):
    """Boundary slope of the filtered expansion, as a row over the classical state."""
    if system.formulation.kind is not FormulationKind.CLASSICAL:
        raise UnsupportedFormulationError("spectral filtering applies to the classical scheme only")
    return system.position_row(mode_weights(filt, system.n_poly) * system.slope_row)
