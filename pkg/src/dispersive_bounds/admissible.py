"""Admissible functions Z(u) controlling the sine-increment estimate.

``power``      Z(u) = u^rho, 0 < rho <= 1, threshold u0 = 0
``log_power``  Z(u) = ln^alpha(u + 1), alpha > 1, threshold u0 = e^alpha - 1
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

from ._numerics import dyadic_integral
from .nfunc import NFunction, eval_phi_inv

POWER = "power"
LOG_POWER = "log_power"


@dataclass(frozen=True)
class AdmissibleFn:
    family: str
    param: float

    def __post_init__(self) -> None:
        if self.family == POWER:
            if not 0.0 < self.param <= 1.0:
                raise ValueError("power Z requires 0 < rho <= 1")
        elif self.family == LOG_POWER:
            if not self.param > 1.0:
                raise ValueError("log_power Z requires alpha > 1")
        else:
            raise ValueError(f"unknown admissible family {self.family!r}")

    @classmethod
    def power(cls, rho: float) -> AdmissibleFn:
        return cls(POWER, float(rho))

    @classmethod
    def log_power(cls, alpha: float) -> AdmissibleFn:
        return cls(LOG_POWER, float(alpha))

    @property
    def u0(self) -> float:
        return 0.0 if self.family == POWER else math.expm1(self.param)

    def to_dict(self) -> dict[str, Any]:
        key = "rho" if self.family == POWER else "alpha"
        return {"family": self.family, key: self.param}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> AdmissibleFn:
        key = "rho" if d.get("family") == POWER else "alpha"
        extra = set(d) - {"family", key}
        if extra:
            raise ValueError(f"unexpected Z keys: {sorted(extra)}")
        return cls(d["family"], float(d[key]))


def eval_Z(z: AdmissibleFn, u: float) -> float:
    if u < 0.0:
        raise ValueError(f"Z is defined for u >= 0, got {u}")
    if z.family == POWER:
        return u ** z.param
    return math.log1p(u) ** z.param


def eval_Z_inv(z: AdmissibleFn, v: float) -> float:
    if v < 0.0:
        raise ValueError(f"Z inverse is defined for v >= 0, got {v}")
    if z.family == POWER:
        return v ** (1.0 / z.param)
    w = v ** (1.0 / z.param)
    return math.expm1(w) if w < 709.0 else math.inf


def log_Z_inv_minus_u0(z: AdmissibleFn, v: float) -> float:
    """ln(Z^{-1}(v) - u0), evaluated without overflowing Z^{-1}.

    Returns -inf when Z^{-1}(v) <= u0.
    """
    if v <= 0.0:
        return -math.inf
    if z.family == POWER:
        return math.log(v) / z.param
    w = v ** (1.0 / z.param)
    if w <= z.param:
        return -math.inf
    # exp(w) - e^alpha = exp(w) * (1 - exp(alpha - w))
    return w + math.log1p(-math.exp(z.param - w))


def _psi(f: NFunction, v: float) -> float:
    # Psi(v) = v / phi^{-1}(v); tends to 0 as v -> 0+ for every supported family
    if v <= 0.0:
        return 0.0
    return v / eval_phi_inv(f, v)


def admissibility_integral(z: AdmissibleFn, f: NFunction, eps: float):
    """Dyadic evaluation of int_0^eps Psi(ln(Z^{-1}(1/s) - u0)) ds."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    return dyadic_integral(lambda s: _psi(f, log_Z_inv_minus_u0(z, 1.0 / s)), eps)


def check_admissible(z: AdmissibleFn, f: NFunction, eps: float = 0.1) -> bool:
    return admissibility_integral(z, f, eps).converged


def sine_bound_holds(z: AdmissibleFn, u: float, v: float, slack: float = 1e-12) -> bool:
    """|sin(u/v)| <= Z(|u| + u0) / Z(|v| + u0)."""
    if u == 0.0 or v == 0.0:
        raise ValueError("sine bound needs u != 0 and v != 0")
    u0 = z.u0
    lhs = abs(math.sin(u / v))
    rhs = eval_Z(z, abs(u) + u0) / eval_Z(z, abs(v) + u0)
    return lhs <= rhs + slack
