"""Numerical H2 machinery: Lyapunov solves, trace formula, Gramian checks.

The squared H2 norm of a stable model (A, B, C) is Tr(B.T @ X @ B) with
X the observability Gramian solving X A + A.T X + C.T C = 0. The solve
is a dense Schur-reduction direct method (scipy's Bartels-Stewart).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import matrix_balance, solve_continuous_lyapunov

from .errors import ConvergenceError, StabilityError, VerificationError
from .graph import NetworkGraph
from .models import GridParameters, StateSpaceModel, check_assumptions

RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True)
class H2Result:
    """Squared H2 norm with provenance and solve diagnostics."""

    value: float
    method: str              # lyapunov | analytic | monte_carlo | upper_bound
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("squared H2 norm cannot be negative")


def solve_lyapunov(A: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Solve X A + A.T X + Q = 0 for symmetric PSD X.

    Requires A Hurwitz and Q symmetric PSD. Raises StabilityError for
    unstable A and ConvergenceError if the residual tolerance fails.
    """
    A = np.asarray(A, dtype=float)
    Q = np.asarray(Q, dtype=float)
    max_re = float(np.linalg.eigvals(A).real.max())
    if max_re >= 0:
        raise StabilityError(f"A is not Hurwitz (max Re eig = {max_re:.3e})")
    X = solve_continuous_lyapunov(A.T, -Q)
    X = 0.5 * (X + X.T)
    res = float(np.abs(X @ A + A.T @ X + Q).max())
    tol = RESIDUAL_RTOL * max(1.0, np.abs(Q).max())
    if res > tol:
        raise ConvergenceError(
            f"Lyapunov residual {res:.3e} exceeds tolerance {tol:.3e}"
        )
    return X


def gramian_residual(X: np.ndarray, A: np.ndarray, C: np.ndarray) -> float:
    """Max-entry norm of X A + A.T X + C.T C."""
    X, A, C = (np.asarray(v, dtype=float) for v in (X, A, C))
    if X.shape[0] != X.shape[1] or X.shape[1] != A.shape[0] or C.shape[1] != A.shape[1]:
        raise ValueError("dimension mismatch between X, A, C")
    return float(np.abs(X @ A + A.T @ X + C.T @ C).max())


def h2_norm(model: StateSpaceModel) -> H2Result:
    """Squared H2 norm via the observability Gramian.

    The realization is diagonally balanced first (a similarity that
    leaves the norm unchanged); without it, stiff models such as the
    low-inertia limit lose several digits in the trace formula.
    """
    _, T = matrix_balance(model.A, permute=False)
    t = np.diag(T)
    A = model.A * (t[None, :] / t[:, None])
    B = model.B / t[:, None]
    C = model.C * t[None, :]
    Q = C.T @ C
    X = solve_lyapunov(A, Q)
    value = float(np.trace(B.T @ X @ B))
    eig_x = np.linalg.eigvalsh(X)
    diagnostics = {
        "residual": gramian_residual(X, A, C),
        "hurwitz_margin": float(-np.linalg.eigvals(A).real.max()),
        "gramian_min_eig": float(eig_x.min()),
        "observable": bool(eig_x.min() > 1e-10 * max(1.0, eig_x.max())),
    }
    return H2Result(value=value, method="lyapunov", diagnostics=diagnostics)


def closed_form_broadcast_gramian(g: NetworkGraph, params: GridParameters) -> np.ndarray:
    """Explicit observability Gramian of the broadcast closed loop.

    Valid under uniform parameters and identical costs. Block structure
    over states (phi, omega, mu): zero on angles, a rank-one frequency
    block z * 1 1.T, cross terms (m/2) * 1, and a scalar multiplier
    entry beta.
    """
    report = check_assumptions(params, g)
    if not (report.uniform and report.identical_costs):
        raise VerificationError(
            "closed-form broadcast Gramian requires uniform parameters "
            "and identical costs"
        )
    n = g.n
    m, d, _, k = (v[0] for v in params.vectors(n))
    tau_mu = params.tau_mu
    z = m**2 / (2 * n * d * tau_mu)
    # the + sign on the coupling term is what zeroes the (omega, mu)
    # residual block; verified against the dense Lyapunov solve
    beta = n * tau_mu * (d / 2 + z * (n / k) / m)
    na = n - 1
    N = na + n + 1
    X = np.zeros((N, N))
    s_w = slice(na, na + n)
    X[s_w, s_w] = z * np.ones((n, n))
    X[s_w, -1] = m / 2
    X[-1, s_w] = m / 2
    X[-1, -1] = beta
    return X


LMI_TOL = 1e-9


def verify_generalized_gramian(model: StateSpaceModel, params: GridParameters,
                               alpha: float):
    """Check the primal-dual generalized Gramian and its H2 upper bound.

    Builds X = (1/2) blkdiag(alpha I, alpha m I, tau_mu I, tau_nu I)
    over the (phi, omega, mu, nu) blocks and verifies the Lyapunov
    inequality X A + A.T X + C.T C <= 0. Returns (max eigenvalue of the
    left-hand side, Tr(B.T X B)); the trace is the H2 upper bound.
    """
    if alpha <= 0:
        raise VerificationError("generalized Gramian requires alpha > 0")
    if model.controller_tag != "primal_dual":
        raise VerificationError("generalized Gramian applies to primal-dual models")
    if model.deflation != "tree-coordinates":
        raise VerificationError(
            "generalized Gramian check requires tree angle coordinates "
            "(acyclic network)"
        )
    n = model.block_slice("frequency").stop - model.block_slice("frequency").start
    if not params.is_uniform(n):
        raise VerificationError("generalized Gramian requires uniform parameters")
    m = params.vectors(n)[0][0]
    scales = {
        "angle": alpha,
        "frequency": alpha * m,
        "multiplier": params.tau_mu,
        "edge-multiplier": params.tau_nu,
    }
    diag = np.concatenate(
        [np.full(size, 0.5 * scales[name]) for name, size in model.blocks]
    )
    X = np.diag(diag)
    lhs = X @ model.A + model.A.T @ X + model.C.T @ model.C
    max_eig = float(np.linalg.eigvalsh(0.5 * (lhs + lhs.T)).max())
    if max_eig > LMI_TOL:
        raise VerificationError(
            f"generalized Gramian inequality violated (max eig {max_eig:.3e})"
        )
    bound = float(np.trace(model.B.T @ X @ model.B))
    return max_eig, bound
