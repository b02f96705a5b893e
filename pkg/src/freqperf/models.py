"""Closed-loop state-space assembly for the three secondary controllers.

All models are returned in standard form xdot = A x + B eta, y = C x,
with inertia and controller gain matrices folded into A and B. The
marginally stable uniform-rotation mode of the phase angles is removed
at assembly ("deflation"), so A is Hurwitz by construction and H2 norms
are finite.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import AssemblyError, GraphError, ParameterError
from .graph import NetworkGraph, incidence, laplacian

HURWITZ_TOL = -1e-9


def _as_vector(value, n: int, name: str) -> np.ndarray:
    v = np.atleast_1d(np.asarray(value, dtype=float))
    if v.size == 1:
        v = np.full(n, v[0])
    if v.size != n:
        raise ParameterError(f"{name} must be scalar or length {n}, got {v.size}")
    return v


@dataclass(frozen=True)
class GridParameters:
    """Physical and controller constants.

    m, d, b, k may be scalars or per-bus vectors; controller gains are
    scalars. r holds the convex averaging coefficients of the broadcast
    controller (defaults to uniform 1/n).
    """

    m: object = 1.0          # inertia [s^2]
    d: object = 1.0          # damping / droop
    b: object = 1.0          # disturbance input gain
    k: object = 1.0          # reserve cost coefficient
    tau_mu: float = 1.0      # broadcast / primal-dual mu gain
    tau_nu: float = 1.0      # primal-dual nu gain
    tau: float = 1.0         # distributed-averaging gain
    gamma: float = 1.0       # communication Laplacian scale
    alpha: float = 0.0       # primal-dual frequency feedback gain
    r: object = None         # convex averaging coefficients (length n)

    def __post_init__(self):
        for name in ("tau_mu", "tau_nu", "tau", "gamma"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive")
        if self.alpha < 0:
            raise ParameterError("alpha must be nonnegative")

    def vectors(self, n: int):
        """Per-bus (m, d, b, k) arrays, validated positive."""
        out = []
        for name in ("m", "d", "b", "k"):
            v = _as_vector(getattr(self, name), n, name)
            if np.any(v <= 0):
                raise ParameterError(f"{name} must be strictly positive")
            out.append(v)
        return tuple(out)

    def r_vector(self, n: int) -> np.ndarray:
        if self.r is None:
            return np.full(n, 1.0 / n)
        r = _as_vector(self.r, n, "r")
        if np.any(r < 0):
            raise ParameterError("r coefficients must be nonnegative")
        if abs(r.sum() - 1.0) > 1e-12:
            raise ParameterError("r coefficients must sum to 1")
        return r

    def is_uniform(self, n: int) -> bool:
        """True iff m, d, b, k are constant and r is uniform."""
        m, d, b, k = self.vectors(n)
        const = all(np.ptp(v) <= 1e-12 * max(1.0, abs(v[0])) for v in (m, d, b, k))
        r = self.r_vector(n)
        return const and bool(np.max(np.abs(r - 1.0 / n)) <= 1e-12)


@dataclass(frozen=True)
class OperatingPoint:
    """Optimal dispatch point for a constant injection profile."""

    p_star: np.ndarray
    p_opt: np.ndarray
    theta_opt: np.ndarray
    omega_ss: float


@dataclass(frozen=True)
class AssumptionReport:
    """Which simplifying assumptions hold, and which closed forms apply."""

    uniform: bool
    acyclic: bool
    identical_costs: bool
    valid_formulas: tuple


@dataclass(frozen=True)
class StateSpaceModel:
    """Normalized (A, B, C) triple with labelled state blocks."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    blocks: tuple            # ordered (name, size) pairs
    controller_tag: str
    deflation: str = ""

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    def block_slice(self, name: str) -> slice:
        start = 0
        for bname, size in self.blocks:
            if bname == name:
                return slice(start, start + size)
            start += size
        raise KeyError(f"model has no block named {name!r}")

    def has_block(self, name: str) -> bool:
        return any(bname == name for bname, _ in self.blocks)


def check_assumptions(params: GridParameters, g: NetworkGraph) -> AssumptionReport:
    """Report which analytic formulas are valid for this configuration."""
    n = g.n
    uniform = params.is_uniform(n)
    k = _as_vector(params.k, n, "k")
    identical = bool(np.ptp(k) <= 1e-12 * max(1.0, abs(k[0])))
    formulas = []
    if uniform and identical:
        formulas.append("broadcast_h2")
        formulas.append("dapi_h2")
        if abs(params.tau_mu - params.tau_nu) <= 1e-12:
            formulas.append("pd_h2_exact_alpha0")
            formulas.append("pd_h2_upper_bound")
    return AssumptionReport(uniform, g.acyclic, identical, tuple(formulas))


def optimal_dispatch(p_star, k, g: NetworkGraph, d=1.0) -> OperatingPoint:
    """Optimal reserve dispatch and angles for constant injections.

    p_opt equalizes marginal costs subject to network-wide balance;
    omega_ss is the pre-secondary steady-state frequency offset.
    """
    n = g.n
    p_star = _as_vector(p_star, n, "p_star")
    k = _as_vector(k, n, "k")
    d = _as_vector(d, n, "d")
    if np.any(k <= 0):
        raise ParameterError("cost coefficients must be positive")
    kinv = 1.0 / k
    p_opt = -(p_star.sum() / kinv.sum()) * kinv
    theta_opt = np.linalg.pinv(laplacian(g)) @ (p_star + p_opt)
    omega_ss = p_star.sum() / d.sum()
    return OperatingPoint(p_star, p_opt, theta_opt, float(omega_ss))


def _angle_coordinates(g: NetworkGraph):
    """Reduced angle coordinates removing the uniform-rotation mode.

    Returns (P, W, tag) with phi = P-compatible reduced angle state:
    phidot = P @ omega and the frequency row coupling -M^-1 @ W @ phi.
    Acyclic graphs use tree coordinates phi = E_w.T @ theta (so W = E_w);
    cyclic graphs use an orthonormal basis of the complement of span{1}
    (W = L @ S). Both leave the input-output map unchanged.
    """
    if g.acyclic:
        E = incidence(g)
        return E.T, E, "tree-coordinates"
    S = _complement_basis(g.n)
    return S.T, laplacian(g) @ S, "orthonormal-complement"


def _complement_basis(n: int) -> np.ndarray:
    """Orthonormal n x (n-1) basis of the complement of span{1}."""
    M = np.hstack([np.ones((n, 1)) / np.sqrt(n), np.eye(n)[:, : n - 1]])
    Q, _ = np.linalg.qr(M)
    return Q[:, 1:]


def _require_hurwitz(A: np.ndarray, tag: str) -> None:
    max_re = float(np.linalg.eigvals(A).real.max())
    if max_re >= HURWITZ_TOL:
        raise AssemblyError(
            f"{tag} state matrix is not Hurwitz (max Re eig = {max_re:.3e})"
        )


def assemble_swing(g: NetworkGraph, params: GridParameters) -> StateSpaceModel:
    """Open-loop swing dynamics with reserves off; output is frequency."""
    n = g.n
    m, d, b, _ = params.vectors(n)
    P, W, tag = _angle_coordinates(g)
    na = P.shape[0]
    N = na + n
    A = np.zeros((N, N))
    A[:na, na:] = P
    A[na:, :na] = -W / m[:, None]
    A[na:, na:] = -np.diag(d / m)
    B = np.zeros((N, n))
    B[na:, :] = np.diag(b / m)
    C = np.zeros((n, N))
    C[:, na:] = np.eye(n)
    _require_hurwitz(A, "swing")
    return StateSpaceModel(
        A, B, C,
        blocks=(("angle", na), ("frequency", n)),
        controller_tag="swing", deflation=tag,
    )


def assemble_broadcast(g: NetworkGraph, params: GridParameters) -> StateSpaceModel:
    """Closed loop under the central frequency-averaging controller.

    State (phi, omega, mu); the scalar integrator mu averages the bus
    frequencies with weights r and broadcasts p = -mu K^-1 1. Output is
    the square-root-cost-weighted reserve, y = -K^{-1/2} 1 mu.
    """
    n = g.n
    m, d, b, k = params.vectors(n)
    r = params.r_vector(n)
    P, W, tag = _angle_coordinates(g)
    na = P.shape[0]
    N = na + n + 1
    s_w = slice(na, na + n)
    A = np.zeros((N, N))
    A[:na, s_w] = P
    A[s_w, :na] = -W / m[:, None]
    A[s_w, s_w] = -np.diag(d / m)
    A[s_w, -1] = -1.0 / (m * k)
    A[-1, s_w] = r / params.tau_mu
    B = np.zeros((N, n))
    B[s_w, :] = np.diag(b / m)
    C = np.zeros((n, N))
    C[:, -1] = -1.0 / np.sqrt(k)
    _require_hurwitz(A, "broadcast")
    return StateSpaceModel(
        A, B, C,
        blocks=(("angle", na), ("frequency", n), ("multiplier", 1)),
        controller_tag="broadcast", deflation=tag,
    )


def assemble_primal_dual(g: NetworkGraph, params: GridParameters) -> StateSpaceModel:
    """Closed loop under the primal-dual controller with frequency feedback.

    State (phi, omega, mu, nu): per-bus multipliers mu and per-edge
    consensus multipliers nu, with the communication graph equal to the
    electrical graph. alpha = 0 gives the pure feed-forward cascade.
    Disturbances enter both the frequency and the multiplier equations.
    """
    n = g.n
    m, d, b, k = params.vectors(n)
    alpha, tmu, tnu = params.alpha, params.tau_mu, params.tau_nu
    P, W, tag = _angle_coordinates(g)
    na = P.shape[0]
    Ec = incidence(g)
    if g.acyclic:
        V = np.eye(Ec.shape[1])
    else:
        # restrict nu to the cut space; the cycle-space complement is
        # undriven and unobservable
        U_, s_, _ = np.linalg.svd(Ec.T, full_matrices=False)
        V = U_[:, s_ > 1e-10 * s_.max()]
    EcV = Ec @ V
    ne = V.shape[1]
    N = na + 2 * n + ne
    s_w = slice(na, na + n)
    s_mu = slice(na + n, na + 2 * n)
    s_nu = slice(na + 2 * n, N)
    A = np.zeros((N, N))
    A[:na, s_w] = P
    A[s_w, :na] = -W / m[:, None]
    A[s_w, s_w] = -np.diag(d / m)
    A[s_w, s_mu] = -np.diag(1.0 / (m * k))
    A[s_mu, s_w] = np.diag(alpha / (tmu * k))
    A[s_mu, s_mu] = -np.diag(1.0 / (tmu * k))
    A[s_mu, s_nu] = -EcV / tmu
    A[s_nu, s_mu] = EcV.T / tnu
    B = np.zeros((N, n))
    B[s_w, :] = np.diag(b / m)
    B[s_mu, :] = np.diag(b / tmu)
    C = np.zeros((n, N))
    C[:, s_mu] = -np.diag(1.0 / np.sqrt(k))
    _require_hurwitz(A, "primal-dual")
    return StateSpaceModel(
        A, B, C,
        blocks=(("angle", na), ("frequency", n), ("multiplier", n),
                ("edge-multiplier", ne)),
        controller_tag="primal_dual", deflation=tag,
    )


def assemble_dapi(g: NetworkGraph, params: GridParameters) -> StateSpaceModel:
    """Closed loop under the distributed-averaging (DAPI) controller.

    State (phi, omega, p): per-bus integral control on frequency plus
    inter-bus averaging of the marginal costs k_i p_i over the scaled
    communication Laplacian gamma * L. Output y = K^{1/2} p.
    """
    n = g.n
    m, d, b, k = params.vectors(n)
    tau, gamma = params.tau, params.gamma
    L = laplacian(g)
    P, W, tag = _angle_coordinates(g)
    na = P.shape[0]
    N = na + 2 * n
    s_w = slice(na, na + n)
    s_p = slice(na + n, N)
    A = np.zeros((N, N))
    A[:na, s_w] = P
    A[s_w, :na] = -W / m[:, None]
    A[s_w, s_w] = -np.diag(d / m)
    A[s_w, s_p] = np.diag(1.0 / m)
    A[s_p, s_w] = -np.diag(1.0 / (tau * k))
    A[s_p, s_p] = -(gamma / tau) * (L * k[None, :]) / k[:, None]
    B = np.zeros((N, n))
    B[s_w, :] = np.diag(b / m)
    C = np.zeros((n, N))
    C[:, s_p] = np.diag(np.sqrt(k))
    _require_hurwitz(A, "dapi")
    return StateSpaceModel(
        A, B, C,
        blocks=(("angle", na), ("frequency", n), ("reserve", n)),
        controller_tag="dapi", deflation=tag,
    )


def perturbed_parameters(params: GridParameters, n: int, seed,
                         spread: float = 0.5) -> GridParameters:
    """Non-uniform variant with m, d, k scaled by seeded uniform draws.

    Each per-bus value is the nominal one times a draw from
    [1 - spread, 1 + spread]. Used for heterogeneous-network experiments.
    """
    rng = np.random.default_rng(seed)
    m, d, _, k = params.vectors(n)
    scale = lambda v: v * rng.uniform(1.0 - spread, 1.0 + spread, size=n)
    return GridParameters(
        m=scale(m), d=scale(d), b=params.b, k=scale(k),
        tau_mu=params.tau_mu, tau_nu=params.tau_nu, tau=params.tau,
        gamma=params.gamma, alpha=params.alpha, r=params.r,
    )


def augment_frequency_penalty(model: StateSpaceModel, pi: float) -> StateSpaceModel:
    """Stack a frequency penalty sqrt(pi) * omega onto the cost output."""
    if pi < 0:
        raise ParameterError("frequency penalty must be nonnegative")
    if not model.has_block("frequency"):
        raise AssemblyError("model has no frequency block to penalize")
    if pi == 0:
        return model
    s_w = model.block_slice("frequency")
    n_w = s_w.stop - s_w.start
    C_w = np.zeros((n_w, model.n_states))
    C_w[:, s_w] = np.sqrt(pi) * np.eye(n_w)
    return StateSpaceModel(
        model.A, model.B, np.vstack([model.C, C_w]),
        blocks=model.blocks, controller_tag=model.controller_tag,
        deflation=model.deflation,
    )
