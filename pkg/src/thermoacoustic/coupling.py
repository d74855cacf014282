"""Fixed-point coupling of the pressure and bioheat solvers.

Each time step solves the nonlinear coupled system by Picard iteration on
the frozen-coefficient map: from the iterate (p*, v*, theta*) assemble
alpha = 1 - 2 k(theta*) p*, r = h(theta*), g = 2 k(theta*) (v*)^2, guard
non-degeneracy, take one implicit acoustic step from the time-n state, feed
the freshly updated v into the heat source Q(v) (Gauss-Seidel ordering,
which matches the information flow of the decoupled system and accelerates
contraction), take one implicit thermal step, and repeat until the L2
distance between successive iterates drops below tol * (1 + field scale).

The iteration is applied per time step: the window-global map used by the
existence theory is a compactness device, and per-step iteration is its
standard practical realization - it exercises the same frozen-coefficient
structure.  The accepted state satisfies the nonlinear discrete system with
coefficients evaluated at the accepted fields up to a small multiple of the
Picard tolerance.

The relaxation path is selected by tau: tau > 0 steps the Cattaneo system;
the tau = 0 reference uses the dedicated Fourier stepper (the Cattaneo
elimination degenerates to it bit for bit, which the test suite checks).
The relaxation-limit study runs the same configuration over a ladder of tau
values against the tau = 0 reference and reports max-in-time L2 deviations.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .acoustics import (
    AcousticState,
    Degenerate,
    FrozenCoefficients,
    acoustic_identity_residual,
    assemble_coefficients,
    check_nondegeneracy,
    westervelt_linear_step,
)
from .energy import (
    EnergyReport,
    XNormAccumulator,
    acoustic_dissipation,
    acoustic_e1,
    acoustic_energy,
    coefficient_diagnostics,
    heat_balance_residual,
    heat_dissipation,
    heat_energy,
    theta_higher_energy,
)
from .grid import FaceField, Grid1D, NodeField, gradient_to_faces, l2_norm, laplacian_dirichlet
from .heat import (
    InsufficientHistory,
    ThermalState,
    cattaneo_step,
    fourier_thermal_step,
)
from .model import (
    PhysicalParams,
    SpeedOfSoundModel,
    h_eval,
    q_source,
    validate_params,
)

__all__ = [
    "PicardDiverged",
    "TauZeroFluxDerivative",
    "CompatibilityData",
    "CoupledState",
    "SimulationResult",
    "SweepResult",
    "compatibility_data",
    "coupled_step",
    "simulate",
    "tau_sweep",
]


class PicardDiverged(RuntimeError):
    """The per-step fixed-point iteration exhausted max_iter.

    Non-decreasing successive differences signal leaving the contraction
    regime; a still-decreasing sequence simply needed more iterations.
    Either way the step is not accepted.
    """

    def __init__(self, step, time, iterations, distances):
        self.step = step
        self.time = time
        self.iterations = iterations
        self.distances = tuple(distances)
        trend = (
            "non-decreasing differences (left the contraction regime)"
            if len(self.distances) >= 2 and self.distances[-1] >= self.distances[-2]
            else "still decreasing but tolerance not reached"
        )
        super().__init__(
            f"Picard iteration at step {step} (t={time:.6g}) failed after "
            f"{iterations} iterations, last d={self.distances[-1]:.3e}: {trend}"
        )


class TauZeroFluxDerivative(ValueError):
    """The initial flux rate q1 = -(q0 + kappa_a grad theta0)/tau needs tau > 0."""


@dataclass(frozen=True)
class CompatibilityData:
    """Recursively defined initial time derivatives of the coupled system.

    p2 and theta1 come from solving the equations for the highest time
    derivative at t = 0; q1 exists only for tau > 0 and is None in the
    Fourier limit.  The second-order thermal data (theta2, q2) are needed
    by the well-posedness analysis but never by the scheme and are omitted.
    """

    p2: NodeField
    theta1: NodeField
    q1: FaceField | None


def compatibility_data(
    p0: NodeField,
    p1: NodeField,
    theta0: NodeField,
    q0: FaceField,
    params: PhysicalParams,
    model: SpeedOfSoundModel,
    include_q1: bool | None = None,
) -> CompatibilityData:
    """Initial p_tt, theta_t (and q_t for tau > 0) from the data.

        p2     = [h(theta0) Lap p0 + b Lap p1 + 2 k(theta0) p1^2]
                 / (1 - 2 k(theta0) p0)
        theta1 = (-div q0 - ell theta0 + Q(p1)) / m
        q1     = -(q0 + kappa_a grad theta0) / tau

    Raises Degenerate if the denominator of p2 is not positive everywhere,
    and TauZeroFluxDerivative if q1 is requested at tau = 0.
    """
    grid = p0.grid
    h0 = h_eval(model, theta0.values)
    k0 = params.beta_acous / (params.rho * h0)
    denom = 1.0 - 2.0 * k0 * p0.values
    if denom.min() <= 0.0:
        node = int(np.argmin(denom))
        raise Degenerate(float(denom.min()), node, 0.0)
    numer = (
        h0 * laplacian_dirichlet(p0).values
        + params.b * laplacian_dirichlet(p1).values
        + 2.0 * k0 * p1.values * p1.values
    )
    p2 = NodeField(grid, numer / denom)
    theta1 = NodeField(
        grid,
        (-np.diff(q0.values) / grid.dx - params.ell * theta0.values
         + q_source(params, p1).values) / params.m,
    )
    want_q1 = include_q1 if include_q1 is not None else params.tau > 0.0
    q1 = None
    if want_q1:
        if params.tau == 0.0:
            raise TauZeroFluxDerivative(
                "q1 is undefined at tau = 0 (the flux law is algebraic)"
            )
        grad0 = gradient_to_faces(theta0).values
        q1 = FaceField(grid, -(q0.values + params.kappa_a * grad0) / params.tau)
    return CompatibilityData(p2=p2, theta1=theta1, q1=q1)


@dataclass(frozen=True)
class CoupledState:
    """Accepted state of the coupled integration at one time level."""

    acoustic: AcousticState
    thermal: ThermalState
    t: float
    n: int
    picard_iterations_last: int = 0
    alpha_min_last: float = 1.0
    picard_distances_last: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.acoustic.grid != self.thermal.grid:
            raise ValueError("acoustic and thermal states must share the grid")

    @property
    def grid(self) -> Grid1D:
        return self.acoustic.grid

    @staticmethod
    def initial(
        p0: NodeField, p1: NodeField, theta0: NodeField, q0: FaceField
    ) -> "CoupledState":
        return CoupledState(
            acoustic=AcousticState.initial(p0, p1),
            thermal=ThermalState.initial(theta0, q0),
            t=0.0,
            n=0,
        )


def coupled_step(
    state: CoupledState,
    dt: float,
    picard_tol: float,
    max_iter: int,
    gamma_bar: float,
    params: PhysicalParams,
    model: SpeedOfSoundModel,
    use_fourier: bool = False,
) -> CoupledState:
    """Advance the coupled system one step by frozen-coefficient iteration."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if picard_tol <= 0.0:
        raise ValueError("picard_tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")

    step_index = state.n + 1
    step_time = state.t + dt
    p_star = state.acoustic.p
    v_star = state.acoustic.v
    theta_star = state.thermal.theta

    distances: list[float] = []
    acoustic_new = state.acoustic
    thermal_new = state.thermal
    converged = False
    for _ in range(max_iter):
        coeffs = assemble_coefficients(theta_star, p_star, v_star, model, params)
        try:
            check_nondegeneracy(coeffs, gamma_bar)
        except Degenerate as exc:
            raise exc.located(step_index, step_time) from None
        acoustic_new = westervelt_linear_step(state.acoustic, coeffs, dt, params)
        f_next = q_source(params, acoustic_new.v)
        if use_fourier:
            thermal_new = fourier_thermal_step(state.thermal, f_next, dt, params)
        else:
            thermal_new = cattaneo_step(state.thermal, f_next, dt, params)

        d = (
            l2_norm(acoustic_new.p - p_star)
            + l2_norm(acoustic_new.v - v_star)
            + l2_norm(thermal_new.theta - theta_star)
        )
        distances.append(d)
        p_star, v_star = acoustic_new.p, acoustic_new.v
        theta_star = thermal_new.theta
        scale = l2_norm(p_star) + l2_norm(v_star) + l2_norm(theta_star)
        if d <= picard_tol * (1.0 + scale):
            converged = True
            break
    if not converged:
        raise PicardDiverged(step_index, step_time, len(distances), distances)

    accepted = assemble_coefficients(theta_star, p_star, v_star, model, params)
    return CoupledState(
        acoustic=acoustic_new,
        thermal=thermal_new,
        t=step_time,
        n=step_index,
        picard_iterations_last=len(distances),
        alpha_min_last=accepted.alpha_min,
        picard_distances_last=tuple(distances),
    )


@dataclass(frozen=True)
class SimulationResult:
    """Artifacts of one coupled run.

    reports align with output_times; theta/p/v series hold raw field values
    at the output times for cross-run comparisons; snapshots are
    (time, x, p, p_t, theta, q_at_left_face) tuples at the configured
    snapshot times.  alpha_min_per_step covers the initial state plus every
    accepted step (length n_steps + 1); the Picard histories cover the
    accepted steps only.
    """

    grid: Grid1D
    dt: float
    output_times: tuple[float, ...]
    reports: tuple[EnergyReport, ...]
    theta_series: tuple[np.ndarray, ...]
    p_series: tuple[np.ndarray, ...]
    v_series: tuple[np.ndarray, ...]
    snapshots: tuple[tuple, ...]
    final_state: CoupledState
    alpha_min_per_step: tuple[float, ...]
    picard_iters_per_step: tuple[int, ...]
    picard_distances_per_step: tuple[tuple[float, ...], ...]
    x_norms: tuple[float, float, float]


def _make_report(
    state: CoupledState,
    coeffs: FrozenCoefficients,
    coeffs_prev: FrozenCoefficients | None,
    f_next: NodeField | None,
    params: PhysicalParams,
    xacc: XNormAccumulator,
) -> EnergyReport:
    th, ac = state.thermal, state.acoustic
    e0 = heat_energy(th, params, 0)
    d0 = heat_dissipation(th, params, 0)
    e1 = e2 = d1 = d2 = 0.0
    if th.depth >= 2:
        e1 = heat_energy(th, params, 1)
        d1 = heat_dissipation(th, params, 1)
    if th.depth >= 3:
        e2 = heat_energy(th, params, 2)
        d2 = heat_dissipation(th, params, 2)
    cal_e0 = cal_e1 = cal_d0 = cal_d1 = 0.0
    if th.depth >= 3:
        cal_e0, cal_e1, cal_d0, cal_d1 = theta_higher_energy(th, params)
    try:
        ac_e1, ac_e2, ac_e3, ac_total = acoustic_energy(ac, coeffs, params)
    except InsufficientHistory:
        ac_e1 = acoustic_e1(ac, coeffs)
        ac_e2 = ac_e3 = 0.0
        ac_total = ac_e1
    ac_d0 = 0.0
    if ac.depth >= 3:
        ac_d0 = acoustic_dissipation(ac, coeffs, params)
    lam = frak_f = 0.0
    heat_res = ac_res = 0.0
    if coeffs_prev is not None:
        lam, frak_f = coefficient_diagnostics(coeffs_prev, coeffs, th.dt)
        ac_res = acoustic_identity_residual(ac, coeffs_prev, coeffs, params)
    if f_next is not None and th.depth >= 2:
        heat_res = heat_balance_residual(th, f_next, params)
    return EnergyReport(
        t=state.t,
        E0=e0, E1=e1, E2=e2, E_tau=e0 + e1 + e2,
        D0=d0, D1=d1, D2=d2,
        cal_E0=cal_e0, cal_E1=cal_e1,
        acE1=ac_e1, acE2=ac_e2, acE3=ac_e3, acE_total=ac_total,
        lam=lam, frak_f=frak_f,
        alpha_min=coeffs.alpha_min,
        picard_iters=state.picard_iterations_last,
        heat_residual=heat_res,
        acoustic_residual=ac_res,
        cal_D0=cal_d0, cal_D1=cal_d1, ac_D0=ac_d0,
        x_norms=xacc.norms(),
    )


def simulate(config, thermal_path: str = "auto") -> SimulationResult:
    """Run the coupled integration described by a SimConfig.

    thermal_path selects the relaxation treatment: "auto" steps Cattaneo for
    tau > 0 and Fourier for tau = 0; "cattaneo" and "fourier" force the
    respective path (the forced Cattaneo path at tau = 0 must reproduce the
    Fourier path bit for bit).  Deterministic: identical configs produce
    identical outputs.
    """
    from .config import initial_fields, make_grid  # deferred: config imports us

    if thermal_path not in ("auto", "cattaneo", "fourier"):
        raise ValueError(f"unknown thermal path {thermal_path!r}")
    params, model = config.params, config.speed_model
    problems = validate_params(params, model)
    if problems:
        raise ValueError("invalid physical configuration: " + "; ".join(problems))
    use_fourier = (
        thermal_path == "fourier"
        or (thermal_path == "auto" and params.tau == 0.0)
    )
    if use_fourier and thermal_path == "fourier" and params.tau != 0.0:
        raise ValueError("the Fourier path is only meaningful at tau = 0")

    grid = make_grid(config)
    p0, p1, theta0, q0 = initial_fields(config, grid)
    state = CoupledState.initial(p0, p1, theta0, q0)
    dt = config.time.dt
    n_steps = int(round(config.time.T / dt))
    stride = config.time.output_stride
    snapshot_steps = {
        int(round(s / dt)): s for s in config.time.snapshot_times
    }

    xacc = XNormAccumulator(dt)
    xacc.sample_output(state.acoustic, state.thermal)

    coeffs = assemble_coefficients(theta0, p0, p1, model, params)
    try:
        check_nondegeneracy(coeffs, config.picard.gamma_bar)
    except Degenerate as exc:
        raise exc.located(0, 0.0) from None

    reports = [_make_report(state, coeffs, None, None, params, xacc)]
    output_times = [0.0]
    theta_series = [theta0.values.copy()]
    p_series = [p0.values.copy()]
    v_series = [p1.values.copy()]
    snapshots = []
    if 0 in snapshot_steps:
        snapshots.append(_snapshot(state, grid))
    alpha_mins: list[float] = [coeffs.alpha_min]
    iters: list[int] = []
    dists: list[tuple[float, ...]] = []

    coeffs_prev = coeffs
    for n in range(1, n_steps + 1):
        state = coupled_step(
            state, dt, config.picard.tol, config.picard.max_iter,
            config.picard.gamma_bar, params, model, use_fourier=use_fourier,
        )
        alpha_mins.append(state.alpha_min_last)
        iters.append(state.picard_iterations_last)
        dists.append(state.picard_distances_last)
        xacc.accumulate_step(state.acoustic, state.thermal)
        if n % stride == 0 or n == n_steps:
            xacc.sample_output(state.acoustic, state.thermal)
            coeffs_now = assemble_coefficients(
                state.thermal.theta, state.acoustic.p, state.acoustic.v,
                model, params,
            )
            f_next = q_source(params, state.acoustic.v)
            reports.append(
                _make_report(state, coeffs_now, coeffs_prev, f_next, params, xacc)
            )
            output_times.append(state.t)
            theta_series.append(state.thermal.theta.values.copy())
            p_series.append(state.acoustic.p.values.copy())
            v_series.append(state.acoustic.v.values.copy())
            coeffs_prev = coeffs_now
        if n in snapshot_steps:
            snapshots.append(_snapshot(state, grid))

    return SimulationResult(
        grid=grid,
        dt=dt,
        output_times=tuple(output_times),
        reports=tuple(reports),
        theta_series=tuple(theta_series),
        p_series=tuple(p_series),
        v_series=tuple(v_series),
        snapshots=tuple(snapshots),
        final_state=state,
        alpha_min_per_step=tuple(alpha_mins),
        picard_iters_per_step=tuple(iters),
        picard_distances_per_step=tuple(dists),
        x_norms=xacc.norms(),
    )


def _snapshot(state: CoupledState, grid: Grid1D) -> tuple:
    """(t, x, p, p_t, theta, q_at_left_face); the flux column is the face
    value at x - dx/2 of each node row."""
    return (
        state.t,
        grid.nodes(),
        state.acoustic.p.values.copy(),
        state.acoustic.v.values.copy(),
        state.thermal.theta.values.copy(),
        state.thermal.q.values[:-1].copy(),
    )


@dataclass(frozen=True)
class SweepResult:
    """Relaxation-limit deviations against the tau = 0 Fourier reference.

    Entries are ordered by tau descending; each error is the maximum over
    output times of the L2 distance to the reference run.
    """

    taus: tuple[float, ...]
    e_theta: tuple[float, ...]
    e_p: tuple[float, ...]
    e_pt: tuple[float, ...]
    reference: SimulationResult
    members: tuple[SimulationResult, ...] | None = None

    def __post_init__(self) -> None:
        if any(tau <= 0.0 for tau in self.taus):
            raise ValueError("sweep tau values must be positive")
        if any(b > a for a, b in zip(self.taus, self.taus[1:])):
            raise ValueError("sweep tau values must be non-increasing")
        if any(e < 0.0 for e in self.e_theta + self.e_p + self.e_pt):
            raise ValueError("sweep errors must be nonnegative")


def _series_distance(a: tuple[np.ndarray, ...], b: tuple[np.ndarray, ...], dx: float) -> float:
    return max(
        float(np.sqrt(dx * np.sum((x - y) ** 2))) for x, y in zip(a, b)
    )


def tau_sweep(base_config, tau_list=None, keep_members: bool = False) -> SweepResult:
    """Run the relaxation ladder against the tau = 0 reference.

    All member runs share the grid, step size and initial data; only tau
    changes.  Runs execute sequentially (determinism for free); results are
    sorted by tau descending regardless of the order given.  keep_members
    retains the per-tau run artifacts (for file emission).
    """
    taus = tuple(tau_list) if tau_list is not None else tuple(base_config.sweep_tau_list or ())
    if not taus:
        raise ValueError("tau_sweep needs a non-empty tau list")
    order = sorted(range(len(taus)), key=lambda i: -taus[i])
    taus_sorted = tuple(taus[i] for i in order)

    ref_config = replace(
        base_config, params=replace(base_config.params, tau=0.0)
    )
    reference = simulate(ref_config, thermal_path="fourier")
    dx = reference.grid.dx

    e_theta, e_p, e_pt = [], [], []
    members = []
    for tau in taus_sorted:
        cfg = replace(base_config, params=replace(base_config.params, tau=tau))
        result = simulate(cfg, thermal_path="cattaneo")
        e_theta.append(_series_distance(result.theta_series, reference.theta_series, dx))
        e_p.append(_series_distance(result.p_series, reference.p_series, dx))
        e_pt.append(_series_distance(result.v_series, reference.v_series, dx))
        if keep_members:
            members.append(result)
    return SweepResult(
        taus=taus_sorted,
        e_theta=tuple(e_theta),
        e_p=tuple(e_p),
        e_pt=tuple(e_pt),
        reference=reference,
        members=tuple(members) if keep_members else None,
    )
