"""Tail bounds for sup |U(t, x)| over a rectangle.

Generic pipeline::

    P{sup |U| > u} <= 2 exp(-phi*(u (1 - theta) / eps0)) * r^{-1}(I(min(theta eps0, gamma0)) / (theta eps0))

where I is the entropy integral of r applied to the covering-number bound
built from the Hoelder modulus sigma(h) = 2 C_y C_Z / Z(1/h + u0).  Closed
forms exist for the power/gaussian and exponential/log-power families.
"""
from __future__ import annotations

import functools
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from ._numerics import dyadic_integral, golden_section_min
from .admissible import LOG_POWER, POWER, AdmissibleFn, eval_Z, log_Z_inv_minus_u0
from .nfunc import EXP_ABS, GAUSSIAN, POWER_ALPHA, NFunction, eval_phi, eval_phi_star

Rect = tuple[float, float, float, float]

POWER_MINUS_ONE = "power_minus_one"
LOG = "log"

METHODS = ("generic", "closed_power", "closed_gauss", "closed_exp")


class EntropyDivergenceError(ArithmeticError):
    pass


class PreconditionError(ValueError):
    pass


class InfeasibleBoundError(ArithmeticError):
    pass


@dataclass(frozen=True)
class RFunction:
    """r(v) on v >= 1: ``power_minus_one`` v^beta - 1, or ``log`` ln v."""

    family: str
    beta: float | None = None

    def __post_init__(self) -> None:
        if self.family == POWER_MINUS_ONE:
            if self.beta is None or not self.beta > 0.0:
                raise ValueError("power_minus_one requires beta > 0")
        elif self.family == LOG:
            if self.beta is not None:
                raise ValueError("log r takes no parameters")
        else:
            raise ValueError(f"unknown r family {self.family!r}")

    @classmethod
    def power_minus_one(cls, beta: float) -> RFunction:
        return cls(POWER_MINUS_ONE, float(beta))

    @classmethod
    def log(cls) -> RFunction:
        return cls(LOG)

    def __call__(self, v: float) -> float:
        if self.family == LOG:
            return math.log(v)
        return v ** self.beta - 1.0

    def from_log(self, log_v: float) -> float:
        """r(exp(log_v)) without forming exp(log_v)."""
        if self.family == LOG:
            return log_v
        return math.expm1(self.beta * log_v)

    def log_inv(self, v: float) -> float:
        """ln r^{-1}(v) for v >= 0."""
        if self.family == LOG:
            return v
        return math.log1p(v) / self.beta

    def inv(self, v: float) -> float:
        lv = self.log_inv(v)
        return math.exp(lv) if lv < 709.0 else math.inf

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"family": self.family}
        if self.beta is not None:
            d["beta"] = self.beta
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RFunction:
        beta = d.get("beta")
        return cls(d["family"], None if beta is None else float(beta))


def _kappa_len(rect: Rect) -> float:
    a, b, c, d = rect
    return max(b - a, d - c)


# -- Hoelder modulus, covering numbers ---------------------------------------

def sigma(z: AdmissibleFn, C_y: float, C_Z: float, h: float) -> float:
    if not h > 0.0:
        raise ValueError(f"sigma(h) needs h > 0, got {h}")
    return 2.0 * C_y * C_Z / eval_Z(z, 1.0 / h + z.u0)


def gamma0(z: AdmissibleFn, C_y: float, C_Z: float, rect: Rect) -> float:
    return 2.0 * C_y * C_Z / eval_Z(z, 1.0 / _kappa_len(rect) + z.u0)


def sigma_inv(z: AdmissibleFn, C_y: float, C_Z: float, v: float,
              rect: Rect | None = None) -> float:
    if not v > 0.0:
        raise ValueError(f"sigma inverse needs v > 0, got {v}")
    if rect is not None and v >= gamma0(z, C_y, C_Z, rect):
        raise ValueError("sigma inverse needs v < gamma0")
    lg = log_Z_inv_minus_u0(z, 2.0 * C_y * C_Z / v)
    if lg == -math.inf:
        raise ValueError("v outside the range of sigma")
    return math.exp(-lg)


def covering_bound(rect: Rect, z: AdmissibleFn, C_y: float, C_Z: float, v: float) -> float:
    if not v > 0.0:
        raise ValueError("covering bound needs v > 0")
    if v > gamma0(z, C_y, C_Z, rect):
        return 1.0
    a, b, c, d = rect
    s = sigma_inv(z, C_y, C_Z, v)
    return ((b - a) / (2.0 * s) + 1.0) * ((d - c) / (2.0 * s) + 1.0)


# -- entropy integrals ---------------------------------------------------------

def _log_covering_product(rect: Rect, z: AdmissibleFn, C: float, s: float) -> float:
    # ln of prod_i (half_side_i * (Z^{-1}(C/s) - u0) + 1); the inner difference is
    # clamped at 0 where it would go negative (r lives on [1, inf))
    a, b, c, d = rect
    log_e = log_Z_inv_minus_u0(z, C / s)
    if log_e == -math.inf:
        return 0.0
    return float(np.logaddexp(math.log((b - a) / 2.0) + log_e, 0.0)
                 + np.logaddexp(math.log((d - c) / 2.0) + log_e, 0.0))


def entropy_integrand(rect: Rect, z: AdmissibleFn, C_y: float, C_Z: float,
                      r: RFunction, s: float) -> float:
    return r.from_log(_log_covering_product(rect, z, 2.0 * C_y * C_Z, s))


@functools.lru_cache(maxsize=4096)
def entropy_integral(rect: Rect, z: AdmissibleFn, C_y: float, C_Z: float,
                     r: RFunction, delta: float) -> float:
    """Adaptive dyadic quadrature of the covering-number entropy integral on (0, delta]."""
    if not delta > 0.0:
        raise ValueError("entropy integral needs delta > 0")
    res = dyadic_integral(lambda s: entropy_integrand(rect, z, C_y, C_Z, r, s), delta)
    if not res.converged:
        raise EntropyDivergenceError(
            "entropy integral diverges at 0: the covering-number integral must be finite")
    return res.value


def majorant_power(delta: float, C_y: float, C_Z: float, rho: float, beta: float,
                   kappa_len: float) -> float:
    """Closed-form upper bound for the entropy integral with Z = u^rho, r = v^beta - 1."""
    C = 2.0 * C_y * C_Z
    if not 0.0 < 2.0 * beta < rho:
        raise PreconditionError("power majorant needs 0 < beta < rho / 2")
    if delta > C * (kappa_len / 2.0) ** rho:
        raise PreconditionError("power majorant needs delta < 2 C_Z C_y (kappa/2)^rho")
    q = 2.0 * beta / rho
    return C ** q * kappa_len ** (2.0 * beta) / (1.0 - q) * delta ** (1.0 - q) - delta


def majorant_logpower(delta: float, C_y: float, C_Z: float, alpha: float, rect: Rect) -> float:
    """Closed-form upper bound for the entropy integral with Z = ln^alpha(u+1), r = ln."""
    check_alpha_window(alpha, rect)
    C = 2.0 * C_y * C_Z
    kl = _kappa_len(rect)
    return delta * math.log(kl * kl / 4.0) \
        + 2.0 * C ** (1.0 / alpha) * delta ** (1.0 - 1.0 / alpha) / (1.0 - 1.0 / alpha)


def check_alpha_window(alpha: float, rect: Rect) -> None:
    a, b, c, d = rect
    need = max(1.0, math.log(2.0 / (b - a)), math.log(2.0 / (d - c)))
    if not alpha > need:
        raise PreconditionError(
            f"log-power alpha={alpha} must exceed max{{1, ln(2/(b-a)), ln(2/(d-c))}} = {need:.6g}")


# -- assembled bounds ----------------------------------------------------------

@dataclass(frozen=True)
class BoundInputs:
    phi: NFunction
    z: AdmissibleFn
    r: RFunction
    C_y: float
    C_Z: float
    eps0: float
    rect: Rect
    entropy: str = "quadrature"   # or "majorant"

    def __post_init__(self) -> None:
        object.__setattr__(self, "rect", tuple(float(v) for v in self.rect))
        if self.entropy not in ("quadrature", "majorant"):
            raise ValueError("entropy must be 'quadrature' or 'majorant'")
        if self.eps0 < 0.0 or self.C_Z < 0.0:
            raise ValueError("eps0 and C_Z must be nonnegative")

    @property
    def kappa_len(self) -> float:
        return _kappa_len(self.rect)

    @property
    def gamma0(self) -> float:
        return gamma0(self.z, self.C_y, self.C_Z, self.rect)

    def entropy_value(self, delta: float) -> float:
        if self.entropy == "quadrature":
            return entropy_integral(self.rect, self.z, self.C_y, self.C_Z, self.r, delta)
        if self.z.family == POWER and self.r.family == POWER_MINUS_ONE:
            return majorant_power(delta, self.C_y, self.C_Z, self.z.param, self.r.beta,
                                  self.kappa_len)
        if self.z.family == LOG_POWER and self.r.family == LOG:
            return majorant_logpower(delta, self.C_y, self.C_Z, self.z.param, self.rect)
        raise PreconditionError(f"no analytic entropy majorant for Z={self.z.family}, r={self.r.family}")


def entropy_factor(r: RFunction, I_value: float, theta: float, eps0: float) -> float:
    """r^{-1}(I / (theta eps0)), the factor shared by the mgf and tail bounds."""
    return r.inv(I_value / (theta * eps0))


def mgf_bound(f: NFunction, r: RFunction, eps0: float, I_r_at_theta_eps0: float,
              lam: float, theta: float) -> float:
    """Upper bound for E exp(lam sup|U|)."""
    if not lam > 0.0 or not 0.0 < theta < 1.0:
        raise ValueError("mgf bound needs lam > 0 and 0 < theta < 1")
    return math.exp(eval_phi(f, lam * eps0 / (1.0 - theta))) \
        * entropy_factor(r, I_r_at_theta_eps0, theta, eps0)


def tail_bound(inp: BoundInputs, u: float, theta: float) -> float:
    """2 A(theta, u); raw value, possibly above 1."""
    if not u > 0.0 or not 0.0 < theta < 1.0:
        raise ValueError("tail bound needs u > 0 and 0 < theta < 1")
    if inp.eps0 == 0.0:
        return 0.0
    te = theta * inp.eps0
    delta = min(te, inp.gamma0)
    I_val = inp.entropy_value(delta) if delta > 0.0 else 0.0
    decay = eval_phi_star(inp.phi, u * (1.0 - theta) / inp.eps0)
    factor = entropy_factor(inp.r, I_val, theta, inp.eps0)
    if math.isinf(factor):
        log_b = math.log(2.0) - decay + inp.r.log_inv(I_val / te)
        return math.exp(log_b) if log_b < 709.0 else math.inf
    return 2.0 * math.exp(-decay) * factor


def _scan_then_golden(fun, lo: float, hi: float, n_scan: int = 64) -> tuple[float, float]:
    grid = np.linspace(lo, hi, n_scan)
    vals = np.array([fun(t) for t in grid])
    finite = np.isfinite(vals)
    if not finite.any():
        raise InfeasibleBoundError("bound pipeline infeasible: no theta gives a finite bound")
    k = int(np.nanargmin(np.where(finite, vals, np.inf)))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, n_scan - 1)]
    t, v = golden_section_min(fun, a, b, xtol=1e-9)
    if not (math.isfinite(v) and v <= vals[k]):
        t, v = float(grid[k]), float(vals[k])
    return float(t), float(v)


def optimize_theta(inp: BoundInputs, u: float, lo: float = 1e-4,
                   hi: float = 1.0 - 1e-4) -> tuple[float, float]:
    """Minimise 2 A(theta, u) over theta: 64-point scan, then golden section."""
    if not u > 0.0:
        raise ValueError("u must be positive")
    if inp.eps0 == 0.0:
        return 0.5, 0.0

    def fun(t: float) -> float:
        try:
            return tail_bound(inp, u, t)
        except (PreconditionError, EntropyDivergenceError, OverflowError):
            return math.inf

    return _scan_then_golden(fun, lo, hi)


# -- closed forms ----------------------------------------------------------------

def power_theta_window(eps0: float, C_y: float, C_Z: float, rho: float,
                       kappa_len: float) -> float:
    """Upper end of the admissible theta interval for the power closed form."""
    return min(1.0, 2.0 * C_Z * C_y / eps0 * (kappa_len / 2.0) ** rho)


def closed_form_power(u: float, theta: float, eps0: float, C_y: float, C_Z: float,
                      rho: float, gamma: float, kappa_len: float) -> float:
    hi = power_theta_window(eps0, C_y, C_Z, rho, kappa_len)
    if not (0.0 < theta < hi) or not u > 0.0:
        raise PreconditionError(
            f"power closed form needs 0 < theta < min(1, 2 C_Z C_y / eps0 (kappa/2)^rho) = {hi:.6g}")
    log_b = (math.log(2.0) - (u * (1.0 - theta) / eps0) ** gamma / gamma
             + (2.0 / rho) * math.log(2.0 * math.e * C_Z * C_y)
             + 2.0 * math.log(kappa_len) - (2.0 / rho) * math.log(theta * eps0))
    return math.exp(log_b) if log_b < 709.0 else math.inf


def closed_form_gauss(u: float, theta: float, eps0: float, C_Z: float, rho: float,
                      kappa_len: float) -> float:
    if not theta * eps0 < 2.0 * C_Z * (kappa_len / 2.0) ** rho:
        raise PreconditionError("gaussian closed form needs theta * Gamma < 2 C_Z (kappa/2)^rho")
    return closed_form_power(u, theta, eps0, 1.0, C_Z, rho, 2.0, kappa_len)


def closed_form_exp(u: float, theta: float, eps0: float, C_y: float, C_Z: float,
                    alpha: float, rect: Rect) -> float:
    check_alpha_window(alpha, rect)
    z = AdmissibleFn.log_power(alpha)
    if not (0.0 < theta < 1.0 and theta * eps0 < gamma0(z, C_y, C_Z, rect)) or not u > 0.0:
        raise PreconditionError("exponential closed form needs 0 < theta < 1 and theta eps0 < gamma0")
    kl = _kappa_len(rect)
    x = u * (1.0 - theta) / eps0
    log_b = (math.log(2.0) - (x + 1.0) * math.log1p(x) + x + math.log(kl * kl / 4.0)
             + (2.0 * alpha / (alpha - 1.0)) * (2.0 * C_Z * C_y / (theta * eps0)) ** (1.0 / alpha))
    return math.exp(log_b) if log_b < 709.0 else math.inf


def closed_method_for(inp: BoundInputs) -> str | None:
    """Closed form matching the (phi, Z, r) signature, if any."""
    if inp.z.family == POWER and inp.r.family == POWER_MINUS_ONE:
        if inp.phi.family == GAUSSIAN and inp.C_y == 1.0:
            return "closed_gauss"
        if inp.phi.family in (GAUSSIAN, POWER_ALPHA):
            return "closed_power"
    if inp.phi.family == EXP_ABS and inp.z.family == LOG_POWER and inp.r.family == LOG:
        return "closed_exp"
    return None


def closed_bound(inp: BoundInputs, method: str, u: float, theta: float) -> float:
    if method == "closed_gauss":
        return closed_form_gauss(u, theta, inp.eps0, inp.C_Z, inp.z.param, inp.kappa_len)
    if method == "closed_power":
        return closed_form_power(u, theta, inp.eps0, inp.C_y, inp.C_Z, inp.z.param,
                                 inp.phi.conjugate_exponent, inp.kappa_len)
    if method == "closed_exp":
        return closed_form_exp(u, theta, inp.eps0, inp.C_y, inp.C_Z, inp.z.param, inp.rect)
    raise ValueError(f"not a closed-form method: {method}")


def closed_theta_window(inp: BoundInputs, method: str) -> float:
    if method in ("closed_gauss", "closed_power"):
        return power_theta_window(inp.eps0, inp.C_y, inp.C_Z, inp.z.param, inp.kappa_len)
    return min(1.0, inp.gamma0 / inp.eps0)


def optimize_theta_closed(inp: BoundInputs, method: str, u: float) -> tuple[float, float]:
    if inp.eps0 == 0.0:
        return 0.5, 0.0
    hi = closed_theta_window(inp, method)
    if method == "closed_exp":
        check_alpha_window(inp.z.param, inp.rect)

    def fun(t: float) -> float:
        try:
            return closed_bound(inp, method, u, t)
        except PreconditionError:
            return math.inf

    return _scan_then_golden(fun, hi * 1e-4, hi * (1.0 - 1e-6))


# -- reports ---------------------------------------------------------------------

@dataclass(frozen=True)
class BoundRow:
    u: float
    theta_star: float
    bound: float

    @property
    def vacuous(self) -> bool:
        return self.bound >= 1.0


@dataclass
class BoundReport:
    eps0: float
    gamma_upper: float
    C_Z: float
    gamma0: float
    theta_star: float
    rows: list[BoundRow]
    method: str
    fingerprint: str = ""
    notes: list[str] = field(default_factory=list)
    generic_rows: list[BoundRow] | None = None

    @property
    def u_grid(self) -> list[tuple[float, float]]:
        return [(row.u, row.bound) for row in self.rows]

    def bound_at(self, u: float) -> float:
        for row in self.rows:
            if row.u == u:
                return row.bound
        raise KeyError(u)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        for row in d["rows"] + (d["generic_rows"] or []):
            row["vacuous"] = row["bound"] >= 1.0
        return d

    def csv_lines(self) -> list[str]:
        out = ["u,theta_star,bound,method"]
        out += [f"{row.u!r},{row.theta_star!r},{row.bound!r},{self.method}" for row in self.rows]
        return out


def build_report(inp: BoundInputs, u_grid: Sequence[float], method: str = "auto",
                 gamma_upper: float | None = None, fingerprint: str = "") -> BoundReport:
    """Bound table over ``u_grid``; ``method`` is auto, generic, closed, or a method name."""
    u_grid = [float(u) for u in u_grid]
    if any(b <= a for a, b in zip(u_grid, u_grid[1:])) or any(u <= 0.0 for u in u_grid):
        raise ValueError("u_grid must be positive and strictly increasing")
    closed = closed_method_for(inp)
    if method == "auto":
        chosen = closed or "generic"
    elif method == "closed":
        if closed is None:
            raise PreconditionError("no closed form matches this (phi, Z, r) combination")
        chosen = closed
    elif method in METHODS:
        chosen = method
    else:
        raise ValueError(f"unknown method {method!r}")

    def generic_rows() -> list[BoundRow]:
        return [BoundRow(u, *optimize_theta(inp, u)) for u in u_grid]

    notes: list[str] = []
    other = None
    if chosen == "generic":
        rows = generic_rows()
    else:
        rows = [BoundRow(u, *optimize_theta_closed(inp, chosen, u)) for u in u_grid]
        try:
            other = generic_rows()
        except (InfeasibleBoundError, EntropyDivergenceError) as exc:
            notes.append(f"generic pipeline unavailable: {exc}")
    # monotone envelope: the bound at u also bounds every larger u
    best, best_theta = math.inf, 0.5
    clean = []
    for row in rows:
        if row.bound <= best:
            best, best_theta = row.bound, row.theta_star
            clean.append(row)
        else:
            clean.append(BoundRow(row.u, best_theta, best))
    return BoundReport(
        eps0=inp.eps0,
        gamma_upper=inp.eps0 if gamma_upper is None else gamma_upper,
        C_Z=inp.C_Z,
        gamma0=inp.gamma0,
        theta_star=clean[-1].theta_star if clean else 0.5,
        rows=clean,
        method=chosen,
        fingerprint=fingerprint,
        notes=notes,
        generic_rows=other,
    )
