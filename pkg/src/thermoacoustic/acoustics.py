"""Implicit stepper for the linearized pressure equation with frozen coefficients.

Within each fixed-point iterate of the coupled solver the quasilinear
Westervelt equation is frozen into the linear strongly damped wave equation

    alpha(x) p_tt - r(x) Lap p - b Lap p_t = g(x),

with coefficients assembled from the previous iterate (* denotes iterate
fields):

    alpha = 1 - 2 k(theta*) p*,   r = h(theta*),   g = 2 k(theta*) (p_t*)^2.

alpha's positive lower bound is the quasilinear non-degeneracy condition;
it is guarded explicitly and its violation is a meaningful, located error,
not a numerical accident.

The step integrates the first-order system v = p_t with backward Euler:

    alpha (v' - v)/dt - r Lap p' - b Lap v' = g,     p' = p + dt v'.

Eliminating p' gives a single tridiagonal solve per step,

    [diag(alpha)/dt - (dt diag(r) + b I) Lap_h] v'
        = diag(alpha) v/dt + diag(r) Lap_h p + g,

with r frozen per node row.  The strong damping -b Lap p_t makes the
equation parabolic in character, which is exactly what the L-stable
one-step method exploits.  Strict diagonal dominance holds whenever
alpha > 0 and b > 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import (
    Grid1D,
    NodeField,
    _thomas,
    gradient_to_faces,
    interior_gradient,
    l2_inner,
    l2_norm,
    laplacian_dirichlet,
)
from .heat import InsufficientHistory, _check_uniform_stamps
from .model import PhysicalParams, SpeedOfSoundModel, h_eval

__all__ = [
    "Degenerate",
    "AcousticState",
    "FrozenCoefficients",
    "assemble_coefficients",
    "check_nondegeneracy",
    "westervelt_linear_step",
    "acoustic_identity_residual",
]

_HISTORY_DEPTH = 3


class Degenerate(ArithmeticError):
    """The leading coefficient 1 - 2 k(theta) p lost its positive margin.

    Carries the minimum of alpha and the offending node index; the coupled
    driver adds the failing step and time.  Signals that the smallness
    condition on the pressure data has been violated and the quasilinear
    equation is leaving its well-posed regime.
    """

    def __init__(self, alpha_min, node_index, threshold, step=None, time=None):
        self.alpha_min = alpha_min
        self.node_index = node_index
        self.threshold = threshold
        self.step = step
        self.time = time
        where = f" at step {step}, t={time:.6g}" if step is not None else ""
        super().__init__(
            f"non-degeneracy violated{where}: alpha_min={alpha_min:.6g} < "
            f"{threshold:.6g} at node index {node_index}"
        )

    def located(self, step: int, time: float) -> "Degenerate":
        return Degenerate(self.alpha_min, self.node_index, self.threshold, step, time)


@dataclass(frozen=True)
class AcousticState:
    """Pressure and its velocity v = p_t, with a 3-level history ring."""

    p: NodeField
    v: NodeField
    t: float
    history: tuple[tuple[float, NodeField, NodeField], ...]

    def __post_init__(self) -> None:
        _check_uniform_stamps(tuple(h[0] for h in self.history))

    @staticmethod
    def initial(p: NodeField, v: NodeField, t: float = 0.0) -> "AcousticState":
        if p.grid != v.grid:
            raise ValueError("p and v must share the grid")
        return AcousticState(p, v, t, ((t, p, v),))

    @property
    def grid(self) -> Grid1D:
        return self.p.grid

    @property
    def depth(self) -> int:
        return len(self.history)

    @property
    def dt(self) -> float:
        if self.depth < 2:
            raise InsufficientHistory("need at least 2 levels to define dt")
        return self.history[-1][0] - self.history[-2][0]

    def advanced(self, p: NodeField, v: NodeField, t: float) -> "AcousticState":
        history = (self.history + ((t, p, v),))[-_HISTORY_DEPTH:]
        return AcousticState(p, v, t, history)

    def second_derivative(self) -> NodeField:
        """p_tt by second differences over the stored levels."""
        if self.depth < 3:
            raise InsufficientHistory("p_tt needs 3 stored levels")
        (_, p0, _), (_, p1, _), (_, p2, _) = self.history[-3:]
        dt = self.dt
        return NodeField(self.grid, (p2.values - 2.0 * p1.values + p0.values) / dt**2)

    def third_derivative(self) -> NodeField:
        """p_ttt as the second difference of the stored velocities."""
        if self.depth < 3:
            raise InsufficientHistory("p_ttt needs 3 stored levels")
        (_, _, v0), (_, _, v1), (_, _, v2) = self.history[-3:]
        dt = self.dt
        return NodeField(self.grid, (v2.values - 2.0 * v1.values + v0.values) / dt**2)


@dataclass(frozen=True)
class FrozenCoefficients:
    """Per-iterate coefficient fields with cached extrema."""

    alpha: NodeField
    r: NodeField
    g: NodeField
    alpha_min: float
    alpha_max: float
    r_min: float


def assemble_coefficients(
    theta: NodeField,
    p: NodeField,
    p_t: NodeField,
    model: SpeedOfSoundModel,
    params: PhysicalParams,
) -> FrozenCoefficients:
    """Freeze alpha = 1 - 2k(theta)p, r = h(theta), g = 2k(theta)p_t^2.

    Propagates FloorViolated from the h evaluation.
    """
    grid = theta.grid
    h_vals = h_eval(model, theta.values)
    k_vals = params.beta_acous / (params.rho * h_vals)
    alpha = 1.0 - 2.0 * k_vals * p.values
    g = 2.0 * k_vals * p_t.values * p_t.values
    return FrozenCoefficients(
        alpha=NodeField(grid, alpha),
        r=NodeField(grid, h_vals),
        g=NodeField(grid, g),
        alpha_min=float(alpha.min()),
        alpha_max=float(alpha.max()),
        r_min=float(h_vals.min()),
    )


def check_nondegeneracy(coeffs: FrozenCoefficients, gamma_bar: float) -> None:
    """Require alpha >= 1 - gamma_bar everywhere; raise Degenerate otherwise.

    gamma_bar in (0, 1) is the admissible fraction of the leading
    coefficient that the pressure term may consume (the smallness margin
    gamma < 1/(2 k1) expressed through alpha).
    """
    if not 0.0 < gamma_bar < 1.0:
        raise ValueError(f"gamma_bar must lie in (0, 1), got {gamma_bar}")
    threshold = 1.0 - gamma_bar
    if coeffs.alpha_min < threshold:
        node = int(np.argmin(coeffs.alpha.values))
        raise Degenerate(coeffs.alpha_min, node, threshold)


def westervelt_linear_step(
    state: AcousticState,
    coeffs: FrozenCoefficients,
    dt: float,
    params: PhysicalParams,
) -> AcousticState:
    """One backward-Euler step of the frozen-coefficient pressure equation.

    Plugging the returned pair back into the scheme equations leaves a
    residual at the 1e-9 * field-scale level (rounding of the tridiagonal
    solve; there is no consistency defect in the plugged-back equations).
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    grid = state.grid
    dx2 = grid.dx * grid.dx
    alpha = coeffs.alpha.values
    r = coeffs.r.values

    stencil = (dt * r + params.b) / dx2  # per-row off-diagonal magnitude
    diag = alpha / dt + 2.0 * stencil
    lower = -stencil[1:]
    upper = -stencil[:-1]
    lap_p = laplacian_dirichlet(state.p).values
    rhs = alpha * state.v.values / dt + r * lap_p + coeffs.g.values

    v_new = np.asarray(
        _thomas(diag.tolist(), lower.tolist(), upper.tolist(), rhs.tolist())
    )
    p_new = state.p.values + dt * v_new
    return state.advanced(
        NodeField(grid, p_new), NodeField(grid, v_new), state.t + dt
    )


def _faces_average(values: np.ndarray) -> np.ndarray:
    """Average a node field onto the N-1 interior faces."""
    return 0.5 * (values[:-1] + values[1:])


def acoustic_identity_residual(
    state: AcousticState,
    coeffs_prev: FrozenCoefficients,
    coeffs_next: FrozenCoefficients,
    params: PhysicalParams,
) -> float:
    """Defect of the first-energy balance of the damped wave equation.

    The continuous identity obtained by testing with p_t,

        d/dt E1[p] + b ||grad p_t||^2
            = <g, p_t> + 1/2 <alpha_t, p_t^2> - <grad r . grad p, p_t>
              + 1/2 <r_t, |grad p|^2>,

    is evaluated with backward differences in time and face-midpoint values
    for the mixed-location product, using the last two stored levels.  The
    residual is the backward-Euler defect and vanishes at rate O(dt) on
    smooth runs; the spatial part cancels exactly by summation by parts.
    """
    if state.depth < 2:
        raise InsufficientHistory("identity residual needs 2 stored levels")
    dt = state.dt
    (_, p0, v0), (_, p1, v1) = state.history[-2:]
    grid = state.grid
    dx = grid.dx

    def e1(p, v, coeffs):
        a = l2_inner(v, NodeField(grid, coeffs.alpha.values * v.values))
        gp = gradient_to_faces(p).values
        r_faces = _face_extend(coeffs.r.values)
        return 0.5 * (a + dx * float(np.dot(r_faces * gp, gp)))

    lhs = (e1(p1, v1, coeffs_next) - e1(p0, v0, coeffs_prev)) / dt
    lhs += params.b * l2_norm(gradient_to_faces(v1)) ** 2

    alpha_t = (coeffs_next.alpha.values - coeffs_prev.alpha.values) / dt
    r_t = (coeffs_next.r.values - coeffs_prev.r.values) / dt
    grad_p1 = gradient_to_faces(p1).values
    rhs = l2_inner(coeffs_next.g, v1)
    rhs += 0.5 * dx * float(np.dot(alpha_t, v1.values * v1.values))
    # grad r lives only on interior faces (r does not vanish on the boundary);
    # v is interpolated to the same face midpoints.
    grad_r = interior_gradient(coeffs_next.r)
    rhs -= dx * float(np.dot(grad_r * grad_p1[1:-1], _faces_average(v1.values)))
    r_t_faces = _face_extend(r_t)
    rhs += 0.5 * dx * float(np.dot(r_t_faces, grad_p1 * grad_p1))
    return abs(lhs - rhs)


def _face_extend(node_values: np.ndarray) -> np.ndarray:
    """Interpolate node values to all N+1 faces, one-sided at the boundary."""
    inner = 0.5 * (node_values[:-1] + node_values[1:])
    return np.concatenate(([node_values[0]], inner, [node_values[-1]]))
