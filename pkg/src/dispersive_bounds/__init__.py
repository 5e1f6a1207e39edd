"""Supremum tail bounds for linear odd-order dispersive equations with
harmonizable phi-sub-Gaussian initial data, plus Monte Carlo verification."""
from .admissible import AdmissibleFn, check_admissible, eval_Z, eval_Z_inv, sine_bound_holds
from .bounds import (BoundInputs, BoundReport, RFunction, build_report, closed_form_exp,
                     closed_form_gauss, closed_form_power, covering_bound, entropy_integral,
                     gamma0, mgf_bound, optimize_theta, sigma, sigma_inv, tail_bound)
from .nfunc import NFunction, eval_phi, eval_phi_inv, eval_phi_star
from .simulate import (SimulationConfig, SupEnsemble, empirical_exceedance, sample_paths,
                       verify_bound_dominance, verify_sigma_oracle)
from .spectral import (ProblemSpec, SpectralMeasure, check_existence, check_existence_logpower,
                       compute_CZ, dispersion_symbol, double_integral, gamma_upper,
                       increment_std, kernel_I)

__version__ = "0.1.0"
