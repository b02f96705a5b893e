"""Closed-form squared H2 norms for the three controller families.

These formulas hold under uniform parameters and identical costs; they
serve both as fast evaluators and as ground truth for the numerical
Lyapunov path.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .models import GridParameters


@dataclass(frozen=True)
class DapiModalTerms:
    """Per-eigenvalue summands of the distributed-averaging norm."""

    z1: float
    z2: float
    terms: np.ndarray


def _uniform_scalars(params: GridParameters):
    """Extract scalar (m, d, b, k), rejecting per-bus vectors."""
    out = []
    for name in ("m", "d", "b", "k"):
        v = np.atleast_1d(np.asarray(getattr(params, name), dtype=float))
        if np.ptp(v) > 1e-12 * max(1.0, abs(v[0])):
            raise ParameterError(
                f"closed form requires uniform {name}, got non-constant vector"
            )
        if v[0] <= 0:
            raise ParameterError(f"{name} must be positive")
        out.append(float(v[0]))
    return tuple(out)


def broadcast_h2(params: GridParameters) -> float:
    """Squared H2 norm of the broadcast closed loop: b^2 / (2 tau_mu d).

    Independent of the network size and topology.
    """
    _, d, b, _ = _uniform_scalars(params)
    return b**2 / (2 * params.tau_mu * d)


def pd_h2_exact_alpha0(params: GridParameters, n: int) -> float:
    """Exact squared H2 norm of the primal-dual cascade (alpha = 0).

    Equals (b^2 / 2 tau) * n: linear in the network size.
    """
    _, _, b, _ = _uniform_scalars(params)
    if abs(params.tau_mu - params.tau_nu) > 1e-12:
        raise ParameterError("exact cascade value requires tau_mu == tau_nu")
    return b**2 / (2 * params.tau_mu) * n


def pd_h2_upper_bound(params: GridParameters, n: int, alpha: float) -> float:
    """Upper bound for the primal-dual loop with frequency feedback.

    (b^2 / 2 tau) n + b^2 alpha n / (2 m); tight at alpha = 0.
    """
    m, _, b, _ = _uniform_scalars(params)
    if alpha < 0:
        raise ParameterError("alpha must be nonnegative")
    return b**2 / (2 * params.tau_mu) * n + b**2 * alpha * n / (2 * m)


def dapi_h2(params: GridParameters, eigenvalues) -> tuple:
    """Exact squared H2 norm of the distributed-averaging closed loop.

    Sums (b^2 / 2 tau d) / (z2 lam^2 + z1 lam + 1) over the grid
    Laplacian eigenvalues; the lam = 0 term contributes exactly 1 to
    the sum. Returns (value, DapiModalTerms).
    """
    m, d, b, k = _uniform_scalars(params)
    tau, gamma = params.tau, params.gamma
    lam = np.asarray(eigenvalues, dtype=float)
    if np.any(lam < -1e-10):
        raise ParameterError("Laplacian eigenvalues must be nonnegative")
    lam = np.clip(lam, 0.0, None)
    z2 = m * k * gamma**2 / tau
    z1 = m * gamma / (d * tau) + k * d * gamma + k * tau
    terms = 1.0 / (z2 * lam**2 + z1 * lam + 1.0)
    value = b**2 / (2 * tau) / d * terms.sum()
    return float(value), DapiModalTerms(z1=float(z1), z2=float(z2), terms=terms)


def dapi_h2_overdamped(params: GridParameters, eigenvalues) -> float:
    """Zero-inertia limit of the distributed-averaging norm."""
    _, d, b, k = _uniform_scalars(params)
    tau, gamma = params.tau, params.gamma
    lam = np.asarray(eigenvalues, dtype=float)
    if np.any(lam < -1e-10):
        raise ParameterError("Laplacian eigenvalues must be nonnegative")
    lam = np.clip(lam, 0.0, None)
    terms = 1.0 / (1.0 + (k * tau + k * d * gamma) * lam)
    return float(b**2 / (2 * tau) / d * terms.sum())


def dapi_h2_highgain(params: GridParameters) -> float:
    """High averaging-gain limit: b^2 / (2 tau d), size-independent.

    Coincides with broadcast_h2 when tau equals tau_mu.
    """
    _, d, b, _ = _uniform_scalars(params)
    return b**2 / (2 * params.tau * d)
