"""Monte Carlo checks for the Gaussian case.

The solution field on the discrete spectral model is
``U(t, x) = sum_i I(t, x, l_i) xi_i`` with ``xi ~ N(0, cov)``.  Each path gets
its own PCG64 stream keyed by ``(seed, path index)``, so results do not depend
on chunking or worker count.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from scipy.stats import beta as beta_dist

from .admissible import POWER, AdmissibleFn
from .bounds import BoundReport
from .spectral import ProblemSpec, SpectralMeasure, fingerprint, kernel_I

RNG_NAME = "numpy.PCG64/SeedSequence(seed, spawn_key=(path,))"
CI_LEVEL = 0.99


@dataclass(frozen=True)
class SimulationConfig:
    grid_t: int = 64
    grid_x: int = 64
    n_paths: int = 10_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.grid_t < 2 or self.grid_x < 2:
            raise ValueError("grid sizes must be at least 2")
        if self.n_paths < 1:
            raise ValueError("n_paths must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def to_dict(self) -> dict[str, Any]:
        return {"grid_t": self.grid_t, "grid_x": self.grid_x, "n_paths": self.n_paths,
                "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> SimulationConfig:
        extra = set(d) - {"grid_t", "grid_x", "n_paths", "seed"}
        if extra:
            raise ValueError(f"unexpected sim keys: {sorted(extra)}")
        return cls(int(d.get("grid_t", 64)), int(d.get("grid_x", 64)),
                   int(d.get("n_paths", 10_000)), int(d.get("seed", 0)))


@dataclass(frozen=True)
class SupEnsemble:
    sups: np.ndarray
    config: SimulationConfig
    fingerprint: str
    rng: str = RNG_NAME

    def to_dict(self) -> dict[str, Any]:
        return {"fingerprint": self.fingerprint, "seed": self.config.seed, "rng": self.rng,
                "config": self.config.to_dict(), "sups": [float(v) for v in self.sups]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> SupEnsemble:
        cfg = SimulationConfig.from_dict(d["config"]) if "config" in d \
            else SimulationConfig(n_paths=len(d["sups"]), seed=int(d["seed"]))
        return cls(np.asarray(d["sups"], dtype=float), cfg, d["fingerprint"], d.get("rng", RNG_NAME))

    @classmethod
    def load(cls, path: str | Path) -> SupEnsemble:
        return cls.from_dict(json.loads(Path(path).read_text()))


def covariance_sqrt(cov: np.ndarray) -> np.ndarray:
    """Symmetric square root via eigendecomposition; tolerates singular cov."""
    w, v = np.linalg.eigh(cov)
    scale = max(float(np.max(np.abs(w))), 1e-300)
    if w[0] < -1e-10 * scale:
        raise ValueError(f"covariance is not PSD (eigenvalue {w[0]:.3e})")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.T


def grid_nodes(spec: ProblemSpec, grid_t: int, grid_x: int) -> tuple[np.ndarray, np.ndarray]:
    """Flattened (t, x) coordinates of the uniform grid, t-major."""
    a, b, c, d = spec.rect
    tt, xx = np.meshgrid(np.linspace(a, b, grid_t), np.linspace(c, d, grid_x), indexing="ij")
    return tt.ravel(), xx.ravel()


def draw_amplitudes(m: SpectralMeasure, seed: int, n_paths: int) -> np.ndarray:
    """(n_paths, n_atoms) Gaussian amplitudes, one independent stream per path."""
    root = covariance_sqrt(m.cov)
    z = np.empty((n_paths, m.n_atoms))
    for p in range(n_paths):
        ss = np.random.SeedSequence(seed, spawn_key=(p,))
        z[p] = np.random.Generator(np.random.PCG64(ss)).standard_normal(m.n_atoms)
    return z @ root


def sample_paths(m: SpectralMeasure, spec: ProblemSpec, cfg: SimulationConfig,
                 chunk: int = 2048) -> SupEnsemble:
    if not spec.gaussian:
        raise ValueError("simulation requires Gaussian y")
    xi = draw_amplitudes(m, cfg.seed, cfg.n_paths)
    t, x = grid_nodes(spec, cfg.grid_t, cfg.grid_x)
    K = kernel_I(spec, t, x, m.lambdas)            # (nodes, atoms)
    sups = np.empty(cfg.n_paths)
    for lo in range(0, cfg.n_paths, chunk):
        U = K @ xi[lo:lo + chunk].T                   # (nodes, paths)
        sups[lo:lo + chunk] = np.max(np.abs(U), axis=0)
    return SupEnsemble(sups, cfg, fingerprint(m, spec))


def empirical_exceedance(e: SupEnsemble, u: float, level: float = CI_LEVEL) -> tuple[float, float]:
    """Fraction of sups above ``u`` and its one-sided Clopper-Pearson upper limit."""
    n = len(e.sups)
    if n == 0:
        raise ValueError("empty ensemble")
    if u < 0.0:
        raise ValueError("u must be nonnegative")
    k = int(np.count_nonzero(e.sups > u))
    upper = 1.0 if k == n else float(beta_dist.ppf(level, k + 1, n - k))
    return k / n, upper


def _z_array(z: AdmissibleFn, u: np.ndarray) -> np.ndarray:
    if z.family == POWER:
        return u ** z.param
    return np.log1p(u) ** z.param


def verify_sigma_oracle(m: SpectralMeasure, spec: ProblemSpec, z: AdmissibleFn, C_Z: float,
                        grid_t: int, grid_x: int) -> float:
    """Largest C_y * std(U(p) - U(q)) / sigma(d_inf(p, q)) over all grid pairs."""
    if not np.any(m.cov) or C_Z == 0.0:
        return 0.0
    t, x = grid_nodes(spec, grid_t, grid_x)
    K = kernel_I(spec, t, x, m.lambdas)
    const = 2.0 * spec.C_y * C_Z
    u0 = z.u0
    worst = 0.0
    for p in range(len(t) - 1):
        D = K[p] - K[p + 1:]
        var = np.einsum("ij,jk,ik->i", D, m.cov, D)
        h = np.maximum(np.abs(t[p] - t[p + 1:]), np.abs(x[p] - x[p + 1:]))
        keep = h > 0.0
        if not keep.any():
            continue
        sig = const / _z_array(z, 1.0 / h[keep] + u0)
        ratio = spec.C_y * np.sqrt(np.maximum(var[keep], 0.0)) / sig
        worst = max(worst, float(ratio.max()))
    return worst


@dataclass(frozen=True)
class DominanceRow:
    u: float
    p_hat: float
    ci_upper: float
    bound: float
    ok: bool


def verify_bound_dominance(e: SupEnsemble, report: BoundReport) -> tuple[list[DominanceRow], bool]:
    if report.fingerprint and e.fingerprint != report.fingerprint:
        raise ValueError("ensemble and report were built for different measure/problem inputs")
    rows = []
    for u, bound in report.u_grid:
        p_hat, upper = empirical_exceedance(e, u)
        ok = bound >= 1.0 or upper <= min(bound, 1.0)
        rows.append(DominanceRow(u, p_hat, upper, bound, ok))
    return rows, all(r.ok for r in rows)


def dominance_csv(rows: list[DominanceRow]) -> list[str]:
    out = ["u,p_hat,ci_upper,bound,ok"]
    out += [f"{r.u!r},{r.p_hat!r},{r.ci_upper!r},{r.bound!r},{str(r.ok).lower()}" for r in rows]
    return out


def sup_quantiles(e: SupEnsemble, qs=(0.5, 0.9, 0.99)) -> dict[float, float]:
    return {q: float(np.quantile(e.sups, q)) for q in qs}


def node_variance(m: SpectralMeasure, spec: ProblemSpec, t: np.ndarray, x: np.ndarray) -> np.ndarray:
    K = kernel_I(spec, t, x, m.lambdas)
    return np.einsum("ij,jk,ik->i", K, m.cov, K)

