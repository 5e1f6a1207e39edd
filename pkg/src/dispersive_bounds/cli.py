"""Command-line front end: ``dispersive-bounds {bound,simulate,verify,all}``.

Exit codes: 0 success, 1 verification failure, 2 config or precondition error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .admissible import AdmissibleFn, admissibility_integral
from .bounds import (BoundInputs, BoundReport, EntropyDivergenceError, InfeasibleBoundError,
                     PreconditionError, RFunction, build_report, check_alpha_window)
from .nfunc import NFunction
from .simulate import (SimulationConfig, SupEnsemble, dominance_csv, sample_paths, sup_quantiles,
                       verify_bound_dominance, verify_sigma_oracle)
from .spectral import (ProblemSpec, SpectralMeasure, check_existence, compute_CZ, eps0_grid,
                       fingerprint, gamma_upper, has_negative_atoms)

log = logging.getLogger("dispersive_bounds")

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG = 0, 1, 2
SIGMA_TOL = 1e-10


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    phi: NFunction
    Z: AdmissibleFn
    r: RFunction
    measure: SpectralMeasure
    problem: ProblemSpec
    u_grid: list[float]
    sim: SimulationConfig | None = None
    output_dir: str = "out"
    measure_source: Any = None
    eps0_mode: str = "gamma"
    C_Z_scale: float = 1.0

    @classmethod
    def from_dict(cls, d: dict[str, Any], base_dir: Path | None = None) -> RunConfig:
        known = {"phi", "Z", "r", "measure", "problem", "u_grid", "sim", "output_dir",
                 "eps0_mode", "C_Z_scale"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            src = d["measure"]
            measure = _load_measure(src, base_dir)
            u_grid = [float(u) for u in d["u_grid"]]
            if any(u <= 0.0 for u in u_grid) or any(b <= a for a, b in zip(u_grid, u_grid[1:])):
                raise ConfigError("u_grid must be positive and strictly increasing")
            eps0_mode = d.get("eps0_mode", "gamma")
            if eps0_mode not in ("gamma", "grid"):
                raise ConfigError("eps0_mode must be 'gamma' or 'grid'")
            return cls(
                phi=NFunction.from_dict(d["phi"]),
                Z=AdmissibleFn.from_dict(d["Z"]),
                r=RFunction.from_dict(d.get("r", {"family": "power_minus_one", "beta": 0.05})),
                measure=measure,
                problem=ProblemSpec.from_dict(d["problem"]),
                u_grid=u_grid,
                sim=SimulationConfig.from_dict(d["sim"]) if d.get("sim") is not None else None,
                output_dir=str(d.get("output_dir", "out")),
                measure_source=src,
                eps0_mode=eps0_mode,
                C_Z_scale=float(d.get("C_Z_scale", 1.0)),
            )
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "phi": self.phi.to_dict(),
            "Z": self.Z.to_dict(),
            "r": self.r.to_dict(),
            "measure": self.measure_source if self.measure_source is not None
            else self.measure.to_dict(),
            "problem": self.problem.to_dict(),
            "u_grid": list(self.u_grid),
            "output_dir": self.output_dir,
            "eps0_mode": self.eps0_mode,
            "C_Z_scale": self.C_Z_scale,
        }
        if self.sim is not None:
            d["sim"] = self.sim.to_dict()
        return d


def _load_measure(src: Any, base_dir: Path | None) -> SpectralMeasure:
    if isinstance(src, str):
        path = Path(src)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        return SpectralMeasure.load(path)
    if isinstance(src, dict) and "density" in src:
        import sympy

        lam = sympy.Symbol("lam")
        expr = sympy.sympify(src["density"], locals={"lam": lam})
        if expr.free_symbols - {lam}:
            raise ConfigError("density may only depend on 'lam'")
        fn = sympy.lambdify(lam, expr, "math")
        return SpectralMeasure.from_density(fn, float(src["lo"]), float(src["hi"]), int(src["n"]))
    if isinstance(src, dict):
        return SpectralMeasure.from_dict(src)
    raise ConfigError("measure must be a path, an inline {lambdas, cov} object, or a density spec")


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return RunConfig.from_dict(raw, base_dir=path.parent)


# -- orchestration ---------------------------------------------------------------

def bound_inputs(cfg: RunConfig) -> tuple[BoundInputs, float]:
    """Assemble pipeline inputs; returns them with the Gamma upper bound for eps0."""
    spec = cfg.problem
    c_z = compute_CZ(cfg.measure, spec, cfg.Z)
    gam = gamma_upper(cfg.measure, spec.C_y)
    eps0 = gam if cfg.eps0_mode == "gamma" else eps0_grid(cfg.measure, spec)
    return BoundInputs(cfg.phi, cfg.Z, cfg.r, spec.C_y, c_z, eps0, spec.rect), gam


def run_bound(cfg: RunConfig, method: str = "auto") -> BoundReport:
    spec = cfg.problem
    adm = admissibility_integral(cfg.Z, cfg.phi, 0.1)
    if not adm.converged:
        raise PreconditionError("Z is not admissible for phi: the Psi-integral diverges numerically")
    if cfg.phi.family == "exp_abs" and cfg.Z.family == "log_power":
        check_alpha_window(cfg.Z.param, spec.rect)
    inp, gam = bound_inputs(cfg)
    report = build_report(inp, cfg.u_grid, method=method, gamma_upper=gam,
                          fingerprint=fingerprint(cfg.measure, spec))
    report.notes.append(f"existence integral = {check_existence(cfg.measure, spec, cfg.Z)!r}")
    if has_negative_atoms(cfg.measure):
        report.notes.append("measure has negative atoms; the log-power existence check skips them")
    grid_eps = eps0_grid(cfg.measure, spec)
    if grid_eps > 0.0 and abs(gam - grid_eps) > 0.1 * grid_eps:
        report.notes.append(f"grid eps0 {grid_eps:.6g} differs from Gamma {gam:.6g} by more than 10%")
    if report.generic_rows is not None:
        for row, gen in zip(report.rows, report.generic_rows):
            log.info("u=%g %s=%.6g generic=%.6g", row.u, report.method, row.bound, gen.bound)
    return report


def write_report(report: BoundReport, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    (out / "report.csv").write_text("\n".join(report.csv_lines()) + "\n")


def run_simulate(cfg: RunConfig) -> SupEnsemble:
    if cfg.sim is None:
        raise ConfigError("config has no 'sim' section")
    if not cfg.problem.gaussian:
        raise ConfigError("simulation requires Gaussian y")
    return sample_paths(cfg.measure, cfg.problem, cfg.sim)


@dataclass
class Verification:
    sigma_ratio: float
    dominance: list
    all_ok: bool

    @property
    def passed(self) -> bool:
        return self.sigma_ratio <= 1.0 + SIGMA_TOL and self.all_ok


def run_verify(cfg: RunConfig, report: BoundReport, ensemble: SupEnsemble) -> Verification:
    c_z = compute_CZ(cfg.measure, cfg.problem, cfg.Z) * cfg.C_Z_scale
    sim = cfg.sim or SimulationConfig()
    ratio = verify_sigma_oracle(cfg.measure, cfg.problem, cfg.Z, c_z, sim.grid_t, sim.grid_x)
    rows, ok = verify_bound_dominance(ensemble, report)
    return Verification(ratio, rows, ok)


# -- argument handling -------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dispersive-bounds",
                                description="Supremum tail bounds for odd-order dispersive PDE solutions.")
    p.add_argument("command", choices=("bound", "simulate", "verify", "all"))
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--method", choices=("auto", "generic", "closed"), default="auto")
    p.add_argument("--seed", type=int, default=None, help="override sim.seed")
    p.add_argument("--out", default=None, help="output directory (overrides output_dir)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _bound_and_write(cfg: RunConfig, out: Path, method: str) -> BoundReport:
    report = run_bound(cfg, method)
    write_report(report, out)
    return report


def _cached_ensemble(cfg: RunConfig, out: Path) -> SupEnsemble:
    path = out / "ensemble.json"
    fp = fingerprint(cfg.measure, cfg.problem)
    if path.exists():
        ens = SupEnsemble.load(path)
        if ens.fingerprint == fp and cfg.sim is not None and ens.config == cfg.sim:
            return ens
    ens = run_simulate(cfg)
    out.mkdir(parents=True, exist_ok=True)
    ens.save(path)
    return ens


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if cfg.sim is None:
                raise ConfigError("--seed given but config has no 'sim' section")
            cfg.sim = SimulationConfig(cfg.sim.grid_t, cfg.sim.grid_x, cfg.sim.n_paths, args.seed)
        out = Path(args.out or cfg.output_dir)

        if args.command == "bound":
            report = _bound_and_write(cfg, out, args.method)
            print(f"method={report.method} eps0={report.eps0:.6g} C_Z={report.C_Z:.6g} "
                  f"gamma0={report.gamma0:.6g}")
            for row in report.rows:
                flag = " (vacuous)" if row.vacuous else ""
                print(f"u={row.u:g} theta*={row.theta_star:.4f} bound={row.bound:.6g}{flag}")
            return EXIT_OK

        if args.command == "simulate":
            ens = run_simulate(cfg)
            out.mkdir(parents=True, exist_ok=True)
            ens.save(out / "ensemble.json")
            qs = sup_quantiles(ens)
            print(" ".join(f"q{int(q * 100)}={v:.6g}" for q, v in qs.items()))
            return EXIT_OK

        report = _bound_and_write(cfg, out, args.method)
        ens = _cached_ensemble(cfg, out)
        if args.command == "all":
            qs = sup_quantiles(ens)
            print(" ".join(f"q{int(q * 100)}={v:.6g}" for q, v in qs.items()))
        result = run_verify(cfg, report, ens)
        (out / "verification.csv").write_text("\n".join(dominance_csv(result.dominance)) + "\n")
        print(f"sigma oracle worst ratio = {result.sigma_ratio:.12g}")
        for row in result.dominance:
            mark = "ok" if row.ok else "FAIL"
            vac = " (vacuous)" if row.bound >= 1.0 else ""
            print(f"u={row.u:g} p_hat={row.p_hat:.5g} ci_upper={row.ci_upper:.5g} "
                  f"bound={row.bound:.5g}{vac} {mark}")
        if not result.passed:
            if result.sigma_ratio > 1.0 + SIGMA_TOL:
                print(f"FAIL: sigma oracle ratio {result.sigma_ratio:.12g} > 1", file=sys.stderr)
            for row in result.dominance:
                if not row.ok:
                    print(f"FAIL: u={row.u:g} ci_upper={row.ci_upper:.6g} > bound={row.bound:.6g}",
                          file=sys.stderr)
            return EXIT_VERIFY
        return EXIT_OK
    except (ConfigError, PreconditionError, EntropyDivergenceError, InfeasibleBoundError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
