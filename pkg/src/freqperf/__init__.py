"""H2 performance analysis of secondary frequency controllers.

Assembles closed-loop state-space models of broadcast-averaging,
primal-dual, and distributed-averaging (DAPI) secondary frequency
controllers on a power network, computes their squared H2 disturbance
rejection norms numerically and in closed form, and validates both
against stochastic time-domain simulation.
"""

from .analytic import (DapiModalTerms, broadcast_h2, dapi_h2,
                       dapi_h2_highgain, dapi_h2_overdamped,
                       pd_h2_exact_alpha0, pd_h2_upper_bound)
from .errors import (AssemblyError, ConfigError, ConvergenceError,
                     FreqPerfError, GraphError, ParameterError,
                     SimulationError, StabilityError, VerificationError)
from .graph import (NetworkGraph, build_from_edges, build_path, incidence,
                    laplacian, spectrum)
from .h2 import (H2Result, closed_form_broadcast_gramian, gramian_residual,
                 h2_norm, solve_lyapunov, verify_generalized_gramian)
from .models import (AssumptionReport, GridParameters, OperatingPoint,
                     StateSpaceModel, assemble_broadcast, assemble_dapi,
                     assemble_primal_dual, assemble_swing,
                     augment_frequency_penalty, check_assumptions,
                     optimal_dispatch, perturbed_parameters)
from .sim import (SimulationTrace, VarianceEstimate, default_sim_settings,
                  estimate_steady_state_variance, simulate)

__version__ = "0.1.0"
