"""Stochastic time-domain validation of the closed-loop models.

White-noise-driven integration of xdot = A x + B eta with estimation of
the stationary output variance E[y.T y], which converges to the squared
H2 norm. Two integrators are available:

* "em": Euler-Maruyama, transparent but biased O(dt); a step-size
  guard keeps max|eig(A)| * dt < 0.1.
* "exact": exact Gaussian discretization (matrix exponential plus the
  Van Loan step-noise covariance); unbiased at any step size and the
  default for variance estimation.

Randomness uses numpy's PCG64 generator; replicate streams are spawned
from the master seed via SeedSequence, so results are reproducible
across platforms for a given (seed, dt, horizon).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.stats import t as student_t

from .errors import SimulationError
from .models import StateSpaceModel

EM_STABILITY_LIMIT = 0.1


@dataclass(frozen=True)
class SimulationTrace:
    """Time series of a single white-noise-driven trajectory."""

    times: np.ndarray
    outputs: np.ndarray          # (steps, n_outputs)
    seed: object
    dt: float
    controller_tag: str
    states: np.ndarray = None    # (steps, n_states) when recorded

    @property
    def output_sq(self) -> np.ndarray:
        """Instantaneous y.T y along the trajectory."""
        return np.einsum("ij,ij->i", self.outputs, self.outputs)


@dataclass(frozen=True)
class VarianceEstimate:
    """Replicate-averaged steady-state output variance with 95% CI."""

    mean_sq: float
    ci_low: float
    ci_high: float
    n_seeds: int
    burn_in: float
    per_seed: np.ndarray = field(default=None, repr=False)


def default_sim_settings(model: StateSpaceModel, method: str = "exact") -> dict:
    """Step size, horizon, and burn-in matched to the model's timescales.

    The horizon covers 500 correlation times of the slowest mode. For
    "em" the step resolves the fastest mode (1e-3 * min(1, 1/max|eig|));
    for "exact" a coarser step of one twentieth of the slowest timescale
    suffices since the discretization is unbiased.
    """
    eigs = np.linalg.eigvals(model.A)
    max_re = float(eigs.real.max())
    if max_re >= 0:
        raise SimulationError("model must be Hurwitz for simulation defaults")
    tau_c = 1.0 / abs(max_re)
    horizon = 500.0 * tau_c
    if method == "em":
        dt = 1e-3 * min(1.0, 1.0 / float(np.abs(eigs).max()))
    else:
        dt = tau_c / 20.0
    return {"dt": dt, "horizon": horizon, "burn_in": 0.2 * horizon}


def _exact_step_matrices(A, B, dt):
    """Discrete transition Ad and noise factor Ld (Van Loan)."""
    n = A.shape[0]
    H = np.zeros((2 * n, 2 * n))
    H[:n, :n] = -A
    H[:n, n:] = B @ B.T
    H[n:, n:] = A.T
    F = expm(H * dt)
    Ad = F[n:, n:].T
    Qd = Ad @ F[:n, n:]
    Qd = 0.5 * (Qd + Qd.T)
    w, V = np.linalg.eigh(Qd)
    Ld = V * np.sqrt(np.clip(w, 0.0, None))
    return Ad, Ld


def simulate(model: StateSpaceModel, seed, dt: float, horizon: float,
             method: str = "em", record_states: bool = False) -> SimulationTrace:
    """Integrate the model under unit-covariance white noise.

    Euler-Maruyama recursion x_{k+1} = x_k + dt A x_k + sqrt(dt) B w_k
    (or the exact Gaussian one-step map for method="exact"), starting
    from the origin. Reproducible for a given seed.
    """
    if dt <= 0 or horizon <= 0:
        raise SimulationError("dt and horizon must be positive")
    A, B, C = model.A, model.B, model.C
    n_steps = int(np.floor(horizon / dt))
    if n_steps < 2:
        raise SimulationError("horizon too short for the given dt")
    rng = np.random.default_rng(seed)

    if method == "em":
        fastest = float(np.abs(np.linalg.eigvals(A)).max())
        if fastest * dt >= EM_STABILITY_LIMIT:
            raise SimulationError(
                f"dt = {dt:.3e} too large: max|eig(A)| * dt = "
                f"{fastest * dt:.3f} >= {EM_STABILITY_LIMIT}"
            )
        Ad = np.eye(A.shape[0]) + dt * A
        Ld = np.sqrt(dt) * B
    elif method == "exact":
        Ad, Ld = _exact_step_matrices(A, B, dt)
    else:
        raise SimulationError(f"unknown integration method {method!r}")

    n_x = A.shape[0]
    noise = rng.standard_normal((n_steps, Ld.shape[1])) @ Ld.T
    xs = np.empty((n_steps + 1, n_x))
    xs[0] = 0.0
    x = xs[0]
    # divergence surfaces as non-finite output below, not as a warning
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_steps):
            x = Ad @ x + noise[k]
            xs[k + 1] = x
        outputs = xs @ C.T
    states = xs if record_states else None
    if not np.all(np.isfinite(outputs)):
        raise SimulationError("integration diverged (non-finite output)")
    times = dt * np.arange(n_steps + 1)
    return SimulationTrace(times=times, outputs=outputs, seed=seed, dt=dt,
                           controller_tag=model.controller_tag, states=states)


def estimate_steady_state_variance(model: StateSpaceModel, n_seeds: int = 20,
                                   dt: float = None, horizon: float = None,
                                   burn_in: float = None, master_seed: int = 0,
                                   method: str = "exact") -> VarianceEstimate:
    """Replicate-based estimate of the stationary E[y.T y].

    Each replicate owns an RNG stream spawned from the master seed; the
    per-seed time averages of y.T y after burn-in give the mean and a
    95% t-interval. Deterministic for a fixed (master_seed, n_seeds).
    """
    if n_seeds < 2:
        raise SimulationError("need at least 2 seeds for a confidence interval")
    defaults = default_sim_settings(model, method)
    dt = defaults["dt"] if dt is None else dt
    horizon = defaults["horizon"] if horizon is None else horizon
    burn_in = defaults["burn_in"] if burn_in is None else burn_in
    if burn_in >= horizon:
        raise SimulationError("burn_in must be smaller than horizon")
    streams = np.random.SeedSequence(master_seed).spawn(n_seeds)
    per_seed = np.empty(n_seeds)
    for i, stream in enumerate(streams):
        trace = simulate(model, stream, dt, horizon, method=method)
        keep = trace.times >= burn_in
        per_seed[i] = trace.output_sq[keep].mean()
    mean = float(per_seed.mean())
    sem = float(per_seed.std(ddof=1) / np.sqrt(n_seeds))
    half = float(student_t.ppf(0.975, n_seeds - 1)) * sem
    return VarianceEstimate(mean_sq=mean, ci_low=max(mean - half, 0.0),
                            ci_high=mean + half, n_seeds=n_seeds,
                            burn_in=burn_in, per_seed=per_seed)
