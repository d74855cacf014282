"""Implicit time steppers for the Pennes-Cattaneo system and its Fourier limit.

The semi-discrete system on the staggered grid reads

    m theta_t + div q + ell theta = f        (nodes)
    tau q_t + q + kappa_a grad theta = 0     (faces)

and both steppers are backward Euler.  Backward Euler is chosen over a
trapezoidal rule deliberately: the relaxation term tau q_t + q is stiff as
tau -> 0 and an L-stable one-step method keeps the update uniformly stable
for every tau in [0, tau_bar], which is what the relaxation-limit study
needs.  First-order accuracy in time is accepted and compensated by a small
dt at desk scale.

The Cattaneo update eliminates the new flux,

    q^{n+1} = w q^n - eta grad theta^{n+1},
    w = tau/(tau+dt),  eta = kappa_a * dt/(tau+dt),

which leaves a symmetric, strictly diagonally dominant tridiagonal system
for theta^{n+1}.  At tau = 0 the weights degenerate to w = 0, eta = kappa_a
exactly (IEEE: 0/(0+dt) = 0 and dt/(0+dt) = 1), so the update is bit for
bit the Fourier backward-Euler step followed by the Fourier law
q = -kappa_a grad theta.  The exactly-zero w term is skipped rather than
multiplied out so that signed zeros cannot leak into the tau = 0 path.

States carry a short history ring (up to three levels at uniform spacing)
from which time derivatives for the energy diagnostics are reconstructed by
backward differences.  Diagnostic derivatives deliberately come from stored
history, never from re-evaluating the right-hand side, so the energy
reports remain an independent cross-check on the steppers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import FaceField, Grid1D, NodeField, _thomas
from .model import PhysicalParams

__all__ = [
    "InsufficientHistory",
    "InvalidMode",
    "ThermalState",
    "cattaneo_step",
    "fourier_step",
    "fourier_thermal_step",
    "reconstruct_time_derivatives",
    "telegraph_mode_oracle",
]

_HISTORY_DEPTH = 3


class InsufficientHistory(RuntimeError):
    """A diagnostic needed more stored time levels than the state carries."""


class InvalidMode(ValueError):
    """The modal oracle was asked for a negative Laplacian eigenvalue."""


def _check_uniform_stamps(stamps: tuple[float, ...]) -> None:
    if len(stamps) < 2:
        return
    steps = [b - a for a, b in zip(stamps, stamps[1:])]
    dt = steps[-1]
    if dt <= 0.0:
        raise ValueError("history time stamps must be strictly increasing")
    for s in steps:
        if abs(s - dt) > 1e-9 * abs(dt):
            raise ValueError("history time stamps must have constant spacing")


@dataclass(frozen=True)
class ThermalState:
    """Temperature at nodes, heat flux at faces, plus a 3-level history ring."""

    theta: NodeField
    q: FaceField
    t: float
    history: tuple[tuple[float, NodeField, FaceField], ...]

    def __post_init__(self) -> None:
        _check_uniform_stamps(tuple(h[0] for h in self.history))

    @staticmethod
    def initial(theta: NodeField, q: FaceField, t: float = 0.0) -> "ThermalState":
        if theta.grid != q.grid:
            raise ValueError("theta and q must share the grid")
        return ThermalState(theta, q, t, ((t, theta, q),))

    @property
    def grid(self) -> Grid1D:
        return self.theta.grid

    @property
    def depth(self) -> int:
        return len(self.history)

    @property
    def dt(self) -> float:
        if self.depth < 2:
            raise InsufficientHistory("need at least 2 levels to define dt")
        return self.history[-1][0] - self.history[-2][0]

    def advanced(self, theta: NodeField, q: FaceField, t: float) -> "ThermalState":
        history = (self.history + ((t, theta, q),))[-_HISTORY_DEPTH:]
        return ThermalState(theta, q, t, history)


def _theta_solve(
    grid: Grid1D,
    params: PhysicalParams,
    dt: float,
    eta: float,
    rhs: np.ndarray,
) -> np.ndarray:
    """Solve (m/dt + ell - eta*Lap_h) theta = rhs.  Strictly diagonally dominant."""
    dx2 = grid.dx * grid.dx
    diag_val = params.m / dt + params.ell + 2.0 * eta / dx2
    off_val = -eta / dx2
    n = grid.N
    x = _thomas([diag_val] * n, [off_val] * (n - 1), [off_val] * (n - 1), rhs.tolist())
    return np.asarray(x)


def _dirichlet_gradient(values: np.ndarray, dx: float) -> np.ndarray:
    return np.diff(values, prepend=0.0, append=0.0) / dx


def fourier_step(
    theta: NodeField, f_next: NodeField, dt: float, params: PhysicalParams
) -> NodeField:
    """Backward Euler for the parabolic Pennes equation.

    m theta_t - kappa_a Lap theta + ell theta = f.  For a single discrete
    eigenmode with eigenvalue lambda_h and f = 0 the update is exactly
    theta^{n+1} = theta^n / (1 + dt (ell + kappa_a lambda_h)/m).
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    rhs = f_next.values + (params.m / dt) * theta.values
    new_vals = _theta_solve(theta.grid, params, dt, params.kappa_a, rhs)
    return NodeField(theta.grid, new_vals)


def fourier_thermal_step(
    state: ThermalState, f_next: NodeField, dt: float, params: PhysicalParams
) -> ThermalState:
    """Fourier-path state update: parabolic step plus q = -kappa_a grad theta."""
    theta_new = fourier_step(state.theta, f_next, dt, params)
    grad = _dirichlet_gradient(theta_new.values, state.grid.dx)
    q_new = FaceField(state.grid, -(params.kappa_a * grad))
    return state.advanced(theta_new, q_new, state.t + dt)


def cattaneo_step(
    state: ThermalState, f_next: NodeField, dt: float, params: PhysicalParams
) -> ThermalState:
    """Fully implicit step of the Cattaneo system via flux elimination.

    Solves
        m (theta' - theta)/dt + div q' + ell theta' = f,
        tau (q' - q)/dt + q' + kappa_a grad theta' = 0,
    by substituting q' = w q - eta grad theta' into the first equation.
    Plugging the returned pair back into both scheme equations leaves
    residuals at rounding level.  At tau = 0 the update is bit-identical
    to fourier_step followed by the Fourier flux law.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    tau = params.tau
    if tau < 0.0:
        raise ValueError("tau must be nonnegative")
    grid = state.grid
    w = tau / (tau + dt)
    eta = params.kappa_a * (dt / (tau + dt))

    rhs = f_next.values + (params.m / dt) * state.theta.values
    if w != 0.0:
        rhs = rhs - w * (np.diff(state.q.values) / grid.dx)
    theta_new = _theta_solve(grid, params, dt, eta, rhs)

    grad = _dirichlet_gradient(theta_new, grid.dx)
    if w != 0.0:
        q_new = w * state.q.values - eta * grad
    else:
        q_new = -(eta * grad)
    return state.advanced(
        NodeField(grid, theta_new), FaceField(grid, q_new), state.t + dt
    )


def reconstruct_time_derivatives(
    state: ThermalState, k: int
) -> tuple[NodeField, FaceField]:
    """Backward-difference time derivatives of (theta, q) of order k in {1, 2}.

    Matches the stepper's accuracy: first-order one-sided over 2 levels for
    k = 1, second difference over 3 levels for k = 2.  Exact for data that
    is linear (k=1) or quadratic (k=2) in time.
    """
    if k not in (1, 2):
        raise ValueError("derivative order k must be 1 or 2")
    if state.depth < k + 1:
        raise InsufficientHistory(
            f"time derivative of order {k} needs {k + 1} levels, have {state.depth}"
        )
    dt = state.dt
    if k == 1:
        (_, th0, q0), (_, th1, q1) = state.history[-2:]
        dtheta = (th1.values - th0.values) / dt
        dq = (q1.values - q0.values) / dt
    else:
        (_, th0, q0), (_, th1, q1), (_, th2, q2) = state.history[-3:]
        dtheta = (th2.values - 2.0 * th1.values + th0.values) / dt**2
        dq = (q2.values - 2.0 * q1.values + q0.values) / dt**2
    return NodeField(state.grid, dtheta), FaceField(state.grid, dq)


def telegraph_mode_oracle(
    params: PhysicalParams, lam: float, T0: float, T0dot: float, t: float
) -> float:
    """Closed-form modal amplitude of the homogeneous telegraph equation.

    Eliminating the flux from the Cattaneo system turns a single spatial
    mode with Laplacian eigenvalue lam into the constant-coefficient ODE

        tau m T'' + (m + tau ell) T' + (ell + kappa_a lam) T = 0,

    solved here from the characteristic roots (real-distinct, repeated and
    complex cases).  At tau = 0 the equation is first order and the oracle
    returns T0 * exp(-(ell + kappa_a lam) t / m); T0dot is then ignored.
    """
    if lam < 0.0:
        raise InvalidMode(f"Laplacian eigenvalue must be nonnegative, got {lam}")
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    m, ell, kappa, tau = params.m, params.ell, params.kappa_a, params.tau
    stiffness = ell + kappa * lam
    if tau == 0.0:
        return T0 * math.exp(-stiffness * t / m)

    a = tau * m
    bb = m + tau * ell
    disc = bb * bb - 4.0 * a * stiffness
    if disc > 0.0:
        root = math.sqrt(disc)
        r1 = (-bb - root) / (2.0 * a)
        r2 = (-bb + root) / (2.0 * a)
        c2 = (T0dot - r1 * T0) / (r2 - r1)
        c1 = T0 - c2
        return c1 * math.exp(r1 * t) + c2 * math.exp(r2 * t)
    if disc == 0.0:
        r = -bb / (2.0 * a)
        return (T0 + (T0dot - r * T0) * t) * math.exp(r * t)
    sigma = bb / (2.0 * a)
    omega = math.sqrt(-disc) / (2.0 * a)
    c2 = (T0dot + sigma * T0) / omega
    return math.exp(-sigma * t) * (T0 * math.cos(omega * t) + c2 * math.sin(omega * t))
