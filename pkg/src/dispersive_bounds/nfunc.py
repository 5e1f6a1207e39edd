"""Orlicz N-functions used as sub-Gaussian generators.

Four families are supported:

* ``power_alpha``      phi(x) = |x|^a / a, 1 < a <= 2
* ``piecewise_power``  phi(x) = |x|^a / a for |x| >= 1 and x^2 / a below, a > 2
* ``exp_abs``          phi(x) = exp|x| - |x| - 1
* ``gaussian``         phi(x) = x^2 / 2

All of them satisfy ``liminf phi(x)/x^2 > 0`` at the origin by construction, so
no numeric check of that condition is attempted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.optimize import brentq

from ._numerics import golden_section_min

POWER_ALPHA = "power_alpha"
PIECEWISE_POWER = "piecewise_power"
EXP_ABS = "exp_abs"
GAUSSIAN = "gaussian"
FAMILIES = (POWER_ALPHA, PIECEWISE_POWER, EXP_ABS, GAUSSIAN)

# search grid for the numeric Legendre transform
_CONJ_GRID = np.logspace(-9.0, 9.0, 721)


@dataclass(frozen=True)
class NFunction:
    family: str
    alpha: float | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown N-function family {self.family!r}")
        if self.family == POWER_ALPHA:
            if self.alpha is None or not 1.0 < self.alpha <= 2.0:
                raise ValueError("power_alpha requires 1 < alpha <= 2")
        elif self.family == PIECEWISE_POWER:
            if self.alpha is None or not self.alpha > 2.0:
                raise ValueError("piecewise_power requires alpha > 2")
        elif self.alpha is not None:
            raise ValueError(f"{self.family} takes no parameters")

    @classmethod
    def power_alpha(cls, alpha: float) -> NFunction:
        return cls(POWER_ALPHA, float(alpha))

    @classmethod
    def piecewise_power(cls, alpha: float) -> NFunction:
        return cls(PIECEWISE_POWER, float(alpha))

    @classmethod
    def exp_abs(cls) -> NFunction:
        return cls(EXP_ABS)

    @classmethod
    def gaussian(cls) -> NFunction:
        return cls(GAUSSIAN)

    @property
    def conjugate_exponent(self) -> float | None:
        """gamma with 1/alpha + 1/gamma = 1 for the power family (2 for gaussian)."""
        if self.family == POWER_ALPHA:
            return self.alpha / (self.alpha - 1.0)
        if self.family == GAUSSIAN:
            return 2.0
        return None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"family": self.family}
        if self.alpha is not None:
            d["alpha"] = self.alpha
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> NFunction:
        extra = set(d) - {"family", "alpha"}
        if extra:
            raise ValueError(f"unexpected N-function keys: {sorted(extra)}")
        alpha = d.get("alpha")
        return cls(d["family"], None if alpha is None else float(alpha))


def _expm1_minus_x(x: float) -> float:
    # exp(x) - 1 - x without cancellation near 0
    if x < 0.1:
        term, total = x * x / 2.0, 0.0
        n = 2
        while term > 1e-18 * (total or 1.0):
            total += term
            n += 1
            term *= x / n
        return total
    if x > 709.0:
        return math.inf
    return math.expm1(x) - x


def eval_phi(f: NFunction, x: float) -> float:
    ax = abs(float(x))
    if f.family == GAUSSIAN:
        return ax * ax / 2.0
    if f.family == POWER_ALPHA:
        return ax ** f.alpha / f.alpha
    if f.family == PIECEWISE_POWER:
        return ax ** f.alpha / f.alpha if ax >= 1.0 else ax * ax / f.alpha
    return _expm1_minus_x(ax)


def eval_phi_prime(f: NFunction, x: float) -> float:
    """Right derivative of phi (phi is C^1 except the piecewise kink at |x| = 1)."""
    ax, sgn = abs(float(x)), math.copysign(1.0, x)
    if f.family == GAUSSIAN:
        d = ax
    elif f.family == POWER_ALPHA:
        d = ax ** (f.alpha - 1.0)
    elif f.family == PIECEWISE_POWER:
        d = ax ** (f.alpha - 1.0) if ax >= 1.0 else 2.0 * ax / f.alpha
    else:
        d = math.expm1(ax)
    return sgn * d


def numeric_conjugate(f: NFunction, x: float) -> float:
    """sup_y (x y - phi(y)) by a log-spaced scan plus golden-section refinement."""
    ax = abs(float(x))
    if ax == 0.0:
        return 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.array([ax * y - eval_phi(f, y) for y in _CONJ_GRID])
    vals[~np.isfinite(vals)] = -np.inf
    k = int(np.argmax(vals))
    lo = _CONJ_GRID[k - 1] if k > 0 else 0.0
    hi = _CONJ_GRID[min(k + 1, len(_CONJ_GRID) - 1)]
    y, neg = golden_section_min(lambda y: eval_phi(f, y) - ax * y, lo, hi, xtol=1e-15)
    return max(-neg, float(vals[k]), 0.0)


def eval_phi_star(f: NFunction, x: float) -> float:
    ax = abs(float(x))
    if f.family == GAUSSIAN:
        return ax * ax / 2.0
    if f.family == POWER_ALPHA:
        g = f.conjugate_exponent
        return ax ** g / g
    if f.family == EXP_ABS:
        return (ax + 1.0) * math.log1p(ax) - ax
    return numeric_conjugate(f, ax)


def eval_phi_inv(f: NFunction, y: float) -> float:
    """Nonnegative x with phi(x) = y."""
    y = float(y)
    if y < 0.0 or math.isnan(y):
        raise ValueError(f"phi inverse needs y >= 0, got {y}")
    if y == 0.0:
        return 0.0
    if f.family == GAUSSIAN:
        return math.sqrt(2.0 * y)
    if f.family == POWER_ALPHA:
        return (f.alpha * y) ** (1.0 / f.alpha)
    if f.family == PIECEWISE_POWER:
        if y <= 1.0 / f.alpha:
            return math.sqrt(f.alpha * y)
        return (f.alpha * y) ** (1.0 / f.alpha)
    if math.isinf(y):
        return math.inf
    # phi(x) >= x^2/2 and phi(ln(2y+2)) >= y bracket the root
    hi = min(math.sqrt(2.0 * y), math.log(2.0 * y + 2.0))
    return brentq(lambda x: _expm1_minus_x(x) - y, 0.0, hi, xtol=1e-300, rtol=1e-15,
                  maxiter=500)
