"""Discrete spectral bi-measure and the double integrals taken against it.

The covariance bi-measure of the initial-condition process is modelled as a
finite set of frequency atoms ``lambdas`` with a real symmetric PSD matrix
``cov``; ``cov[i, j]`` is the covariance of the amplitudes at atoms i and j.
Every integral against ``d|Gamma|`` is then a finite double sum over
``abs(cov)``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .admissible import AdmissibleFn, eval_Z

KAPPAS = ("cos", "sin")


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    lambdas: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        lam = np.array(self.lambdas, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        n = lam.size
        if n == 0:
            raise ValueError("spectral measure needs at least one atom")
        if cov.shape != (n, n):
            raise ValueError(f"cov must be {n}x{n}, got {cov.shape}")
        if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(cov))):
            raise ValueError("non-finite entries in spectral measure")
        scale = float(np.max(np.abs(cov))) if cov.size else 0.0
        if np.max(np.abs(cov - cov.T)) > 1e-12 * max(scale, 1e-300):
            raise ValueError("cov is not symmetric")
        cov = (cov + cov.T) / 2.0
        if scale > 0.0:
            emin = float(np.linalg.eigvalsh(cov)[0])
            if emin < -1e-10 * np.linalg.norm(cov, 2):
                raise ValueError(f"cov is not positive semi-definite (min eigenvalue {emin:.3e})")
        lam.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "cov", cov)

    @property
    def n_atoms(self) -> int:
        return self.lambdas.size

    @property
    def total_variation(self) -> float:
        return float(np.abs(self.cov).sum())

    def to_dict(self) -> dict[str, Any]:
        return {"lambdas": self.lambdas.tolist(), "cov": self.cov.tolist()}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> SpectralMeasure:
        return cls(np.asarray(d["lambdas"], dtype=float), np.asarray(d["cov"], dtype=float))

    @classmethod
    def load(cls, path: str | Path) -> SpectralMeasure:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def from_density(cls, density: Callable[[float], float], lo: float, hi: float,
                     n: int) -> SpectralMeasure:
        """Midpoint discretisation of a product-form density w(l) w(m) on [lo, hi]."""
        if n < 1 or not hi > lo:
            raise ValueError("need n >= 1 and hi > lo")
        h = (hi - lo) / n
        mids = lo + h * (np.arange(n) + 0.5)
        w = np.array([density(x) for x in mids], dtype=float) * h
        return cls(mids, np.outer(w, w))


@dataclass(frozen=True)
class ProblemSpec:
    coeffs: tuple[float, ...]
    rect: tuple[float, float, float, float]
    kappa: str = "cos"
    C_y: float = 1.0
    gaussian: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", tuple(float(a) for a in self.coeffs))
        object.__setattr__(self, "rect", tuple(float(v) for v in self.rect))
        if len(self.coeffs) < 1:
            raise ValueError("need at least one dispersion coefficient")
        if len(self.rect) != 4:
            raise ValueError("rect is (a, b, c, d)")
        a, b, c, d = self.rect
        if not (b > a and d > c):
            raise ValueError("rect needs b > a and d > c")
        if self.kappa not in KAPPAS:
            raise ValueError(f"kappa must be one of {KAPPAS}")
        if not self.C_y > 0.0:
            raise ValueError("C_y must be positive")
        if self.gaussian and self.C_y != 1.0:
            raise ValueError("Gaussian initial conditions have C_y = 1")

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def kappa_len(self) -> float:
        a, b, c, d = self.rect
        return max(b - a, d - c)

    def to_dict(self) -> dict[str, Any]:
        return {"coeffs": list(self.coeffs), "rect": list(self.rect), "kappa": self.kappa,
                "C_y": self.C_y, "gaussian": self.gaussian}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ProblemSpec:
        extra = set(d) - {"coeffs", "rect", "kappa", "C_y", "gaussian"}
        if extra:
            raise ValueError(f"unexpected problem keys: {sorted(extra)}")
        return cls(tuple(d["coeffs"]), tuple(d["rect"]), d.get("kappa", "cos"),
                   float(d.get("C_y", 1.0)), bool(d.get("gaussian", True)))


def fingerprint(m: SpectralMeasure, spec: ProblemSpec) -> str:
    payload = json.dumps({"measure": m.to_dict(), "problem": spec.to_dict()}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def dispersion_symbol(spec: ProblemSpec, lam):
    """P(lambda) = sum_k a_k lambda^(2k+1) (-1)^k; accepts scalars or arrays."""
    lam = np.asarray(lam, dtype=float)
    out = np.zeros_like(lam)
    for k, a in enumerate(spec.coeffs, start=1):
        out = out + a * (-1.0) ** k * lam ** (2 * k + 1)
    return float(out) if out.ndim == 0 else out


def kernel_I(spec: ProblemSpec, t, x, lam):
    arg = np.multiply.outer(np.asarray(x, float), np.asarray(lam, float)) \
        + np.multiply.outer(np.asarray(t, float), dispersion_symbol(spec, np.asarray(lam, float)))
    out = np.cos(arg) if spec.kappa == "cos" else np.sin(arg)
    return float(out) if out.ndim == 0 else out


def double_integral(m: SpectralMeasure, g: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> float:
    """sum_{i,j} g(l_i, l_j) |G_ij|; ``g`` is called once on broadcast atom grids."""
    li = m.lambdas[:, None]
    lj = m.lambdas[None, :]
    vals = np.broadcast_to(np.asarray(g(li, lj), dtype=float), m.cov.shape)
    return float(np.sum(vals * np.abs(m.cov)))


def _z_vec(z: AdmissibleFn, u: np.ndarray) -> np.ndarray:
    return np.array([eval_Z(z, float(v)) for v in np.ravel(u)]).reshape(np.shape(u))


def compute_CZ(m: SpectralMeasure, spec: ProblemSpec, z: AdmissibleFn) -> float:
    u0 = z.u0
    lam = m.lambdas
    w = _z_vec(z, np.abs(lam) / 2.0 + u0) + _z_vec(z, np.abs(dispersion_symbol(spec, lam)) / 2.0 + u0)
    return math.sqrt(float(w @ np.abs(m.cov) @ w))


def check_existence(m: SpectralMeasure, spec: ProblemSpec, z: AdmissibleFn) -> float:
    p = 2 * spec.order + 1
    a = np.abs(m.lambdas) ** p
    w = a * _z_vec(z, z.u0 + a)
    return float(w @ np.abs(m.cov) @ w)


def check_existence_logpower(m: SpectralMeasure, spec: ProblemSpec, alpha: float) -> float:
    """Log-power existence integral over the nonnegative atoms only."""
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    p = 2 * spec.order + 1
    keep = m.lambdas >= 0.0
    lam = np.where(keep, m.lambdas, 0.0)
    w = np.where(keep, lam ** p * np.log1p(lam) ** alpha, 0.0)
    return float(w @ np.abs(m.cov) @ w)


def has_negative_atoms(m: SpectralMeasure) -> bool:
    return bool(np.any(m.lambdas < 0.0))


def gamma_upper(m: SpectralMeasure, C_y: float) -> float:
    if not C_y > 0.0:
        raise ValueError("C_y must be positive")
    return C_y * math.sqrt(m.total_variation)


def std_at(m: SpectralMeasure, spec: ProblemSpec, t, x):
    """sqrt(E U(t,x)^2) for scalar or array (t, x)."""
    K = kernel_I(spec, t, x, m.lambdas)
    var = np.einsum("...i,ij,...j->...", K, m.cov, K)
    return np.sqrt(np.maximum(var, 0.0))


def increment_std(m: SpectralMeasure, spec: ProblemSpec, t: float, x: float,
                  t1: float, x1: float) -> float:
    d = kernel_I(spec, t, x, m.lambdas) - kernel_I(spec, t1, x1, m.lambdas)
    var = float(d @ m.cov @ d)
    if var < -1e-12:
        raise ArithmeticError(f"negative increment variance {var:.3e}; cov not PSD")
    return math.sqrt(max(var, 0.0))


def eps0_grid(m: SpectralMeasure, spec: ProblemSpec, n_t: int = 64, n_x: int = 64) -> float:
    """C_y * max std(U) over a uniform grid and its one-step dyadic refinement."""
    a, b, c, d = spec.rect
    best = 0.0
    for nt, nx in ((n_t, n_x), (2 * n_t - 1, 2 * n_x - 1)):
        tt, xx = np.meshgrid(np.linspace(a, b, nt), np.linspace(c, d, nx), indexing="ij")
        best = max(best, float(np.max(std_at(m, spec, tt.ravel(), xx.ravel()))))
    return spec.C_y * best
