"""Discrete steppers, ODE fields, trajectory drivers, and a Newton solver.

Methods, with timescale weights Lam_tau = diag{(1/tau) I_d1, I_d2}:

    gda_tt     z+ = z - eta Lam_tau F(z)
    eg_tt      z+ = z - eta Lam_tau F(z - eta Lam_tau F(z))
    ode_plain  dz/dt = -F(z)
    ode_eg     dz/dt = -(I + s DF(z))^{-1} F(z)
    ode_eg_tt  dz/dt = -(I + s Lam_tau DF(z))^{-1} Lam_tau F(z)

ode_eg is ode_eg_tt at tau = 1.  Integration is fixed-step classical RK4;
the fields are smooth and desk-scale, so reproducibility beats adaptivity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import MinimaxProblem, jacobian_F, saddle_gradient

METHODS = ("gda_tt", "eg_tt", "ode_plain", "ode_eg", "ode_eg_tt")
DISCRETE_METHODS = ("gda_tt", "eg_tt")

TOL_CONV_DEFAULT = 1e-10
DIVERGE_NORM_DEFAULT = 1e8
SOLVE_COND_LIMIT = 1e12


class SingularOperatorError(np.linalg.LinAlgError):
    """A linear solve hit a numerically singular operator.

    For the EG fields this signals s ||DF|| too close to 1.
    """


class NewtonError(RuntimeError):
    """Newton iteration failed to reach the requested residual."""


@dataclass(frozen=True)
class MethodParams:
    """Parameter bundle for one method run.

    eta: discrete step size; s: continuous step (s = eta/2 matches one EG
    step to first order); tau >= 1: timescale separation; dt: integrator
    step for the ODE methods.
    """

    method: str
    eta: float | None = None
    s: float | None = None
    tau: float = 1.0
    dt: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.tau < 1.0:
            raise ValueError("tau must be >= 1")

    def validate(self, problem: MinimaxProblem) -> None:
        """Check the step-size hypotheses against the problem's L."""
        L = problem.lipschitz_bound
        if self.method in DISCRETE_METHODS:
            if self.eta is None or not (0.0 < self.eta < 1.0 / L):
                raise ValueError(
                    f"{self.method} requires 0 < eta < 1/L = {1.0 / L:.6g}, got {self.eta}"
                )
        elif self.method in ("ode_eg", "ode_eg_tt"):
            if self.s is None or not (0.0 < self.s < 1.0 / L):
                raise ValueError(
                    f"{self.method} requires 0 < s < 1/L = {1.0 / L:.6g}, got {self.s}"
                )
        if self.method.startswith("ode") and self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")


@dataclass
class Termination:
    reason: str  # "converged" | "max_iters" | "diverged" | "t_end"
    point: np.ndarray | None = None
    residual: float | None = None
    threshold: float | None = None


@dataclass
class Trajectory:
    """Recorded iterate sequence; times are step indices or ODE times."""

    times: np.ndarray
    states: np.ndarray
    f_norms: np.ndarray
    termination: Termination
    params: MethodParams

    @property
    def points(self):
        return list(zip(self.times, self.states))

    def __len__(self) -> int:
        return len(self.times)


def timescale_weights(d1: int, d2: int, tau: float) -> np.ndarray:
    """Diagonal of Lam_tau as a vector."""
    w = np.ones(d1 + d2)
    w[:d1] = 1.0 / tau
    return w


def step_gda_tt(problem: MinimaxProblem, z, eta: float, tau: float = 1.0) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    lam = timescale_weights(problem.d1, problem.d2, tau)
    return z - eta * (lam * saddle_gradient(problem, z))


def step_eg_tt(problem: MinimaxProblem, z, eta: float, tau: float = 1.0) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    lam = timescale_weights(problem.d1, problem.d2, tau)
    mid = z - eta * (lam * saddle_gradient(problem, z))
    return z - eta * (lam * saddle_gradient(problem, mid))


def _solve_checked(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > SOLVE_COND_LIMIT:
        raise SingularOperatorError(
            f"linear operator numerically singular (cond ~ {cond:.3e})"
        )
    return np.linalg.solve(M, rhs)


def ode_field(problem: MinimaxProblem, kind: str, z, s: float | None = None,
              tau: float = 1.0) -> np.ndarray:
    """Vector field of the named continuous system at z."""
    z = np.asarray(z, dtype=float)
    F = saddle_gradient(problem, z)
    if kind == "plain":
        return -F
    if kind not in ("eg", "eg_tt"):
        raise ValueError(f"unknown field kind {kind!r}")
    if s is None or s <= 0:
        raise ValueError("eg fields require s > 0")
    if kind == "eg":
        tau = 1.0
    lam = timescale_weights(problem.d1, problem.d2, tau)
    H = jacobian_F(problem, z)
    M = np.eye(problem.dim) + s * (lam[:, None] * H)
    return -_solve_checked(M, lam * F)


def integrate(problem: MinimaxProblem, kind: str, z0, s: float | None = None,
              tau: float = 1.0, dt: float = 1e-2, t_end: float = 10.0,
              tol_conv: float = TOL_CONV_DEFAULT,
              diverge_norm: float = DIVERGE_NORM_DEFAULT) -> Trajectory:
    """Classical RK4 on the chosen field, sampled every step."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    z = np.asarray(z0, dtype=float).copy()
    method = {"plain": "ode_plain", "eg": "ode_eg", "eg_tt": "ode_eg_tt"}.get(kind)
    if method is None:
        raise ValueError(f"unknown field kind {kind!r}")
    params = MethodParams(method=method, s=s, tau=tau, dt=dt)
    params.validate(problem)

    times = [0.0]
    states = [z.copy()]
    fnorms = [float(np.linalg.norm(saddle_gradient(problem, z)))]
    term = None
    t = 0.0
    n_steps = int(round(t_end / dt))
    for _ in range(n_steps):
        if fnorms[-1] <= tol_conv:
            term = Termination("converged", point=z.copy(), residual=fnorms[-1])
            break
        if np.linalg.norm(z) >= diverge_norm:
            term = Termination("diverged", threshold=diverge_norm)
            break
        k1 = ode_field(problem, kind, z, s=s, tau=tau)
        k2 = ode_field(problem, kind, z + 0.5 * dt * k1, s=s, tau=tau)
        k3 = ode_field(problem, kind, z + 0.5 * dt * k2, s=s, tau=tau)
        k4 = ode_field(problem, kind, z + dt * k3, s=s, tau=tau)
        z = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += dt
        times.append(t)
        states.append(z.copy())
        fnorms.append(float(np.linalg.norm(saddle_gradient(problem, z))))
    if term is None:
        if fnorms[-1] <= tol_conv:
            term = Termination("converged", point=z.copy(), residual=fnorms[-1])
        else:
            term = Termination("t_end")
    return Trajectory(np.array(times), np.array(states), np.array(fnorms), term, params)


def run_discrete(problem: MinimaxProblem, z0, params: MethodParams,
                 tol_conv: float = TOL_CONV_DEFAULT, max_iters: int = 10000,
                 diverge_norm: float = DIVERGE_NORM_DEFAULT,
                 record: bool = True) -> Trajectory:
    """Iterate a discrete stepper until convergence, divergence, or max_iters.

    Converged means ||F(z_k)|| <= tol_conv; diverged means ||z_k|| >= diverge_norm.
    With record=False only the initial and final states are kept.
    """
    if params.method not in DISCRETE_METHODS:
        raise ValueError(f"run_discrete needs a discrete method, got {params.method!r}")
    params.validate(problem)
    eta, tau = float(params.eta), float(params.tau)
    lam = timescale_weights(problem.d1, problem.d2, tau)
    is_eg = params.method == "eg_tt"

    z = np.asarray(z0, dtype=float).copy()
    times, states, fnorms = [0], [z.copy()], []
    F = saddle_gradient(problem, z)
    fnorm = float(np.linalg.norm(F))
    fnorms.append(fnorm)
    term = None
    last_k = 0
    for k in range(1, max_iters + 1):
        if fnorm <= tol_conv:
            term = Termination("converged", point=z.copy(), residual=fnorm)
            break
        if np.linalg.norm(z) >= diverge_norm:
            term = Termination("diverged", threshold=diverge_norm)
            break
        if is_eg:
            mid = z - eta * (lam * F)
            z = z - eta * (lam * saddle_gradient(problem, mid))
        else:
            z = z - eta * (lam * F)
        F = saddle_gradient(problem, z)
        fnorm = float(np.linalg.norm(F))
        last_k = k
        if record:
            times.append(k)
            states.append(z.copy())
            fnorms.append(fnorm)
    if term is None:
        if fnorm <= tol_conv:
            term = Termination("converged", point=z.copy(), residual=fnorm)
        else:
            term = Termination("max_iters")
    if not record and last_k > 0:
        times.append(last_k)
        states.append(z.copy())
        fnorms.append(fnorm)
    return Trajectory(np.array(times), np.array(states), np.array(fnorms), term, params)


def find_stationary(problem: MinimaxProblem, z0, newton_tol: float = 1e-10,
                    newton_max: int = 50) -> np.ndarray:
    """Newton's method on F(z) = 0, for locating equilibria to classify."""
    z = np.asarray(z0, dtype=float).copy()
    for _ in range(newton_max):
        F = saddle_gradient(problem, z)
        if np.linalg.norm(F) <= newton_tol:
            return z
        H = jacobian_F(problem, z)
        z = z - _solve_checked(H, F)
    F = saddle_gradient(problem, z)
    if np.linalg.norm(F) <= newton_tol:
        return z
    raise NewtonError(
        f"no stationary point within {newton_max} iterations "
        f"(residual {np.linalg.norm(F):.3e})"
    )


def replay_deviation(problem: MinimaxProblem, traj: Trajectory) -> float:
    """Max deviation when re-applying the update rule to each recorded state.

    Zero for trajectories recorded every step, since the same float ops are
    replayed.
    """
    p = traj.params
    if p.method in DISCRETE_METHODS:
        step = step_gda_tt if p.method == "gda_tt" else step_eg_tt

        def advance(z):
            return step(problem, z, p.eta, p.tau)
    elif p.method.startswith("ode"):
        kind = {"ode_plain": "plain", "ode_eg": "eg", "ode_eg_tt": "eg_tt"}[p.method]
        dt = p.dt

        def advance(z):
            k1 = ode_field(problem, kind, z, s=p.s, tau=p.tau)
            k2 = ode_field(problem, kind, z + 0.5 * dt * k1, s=p.s, tau=p.tau)
            k3 = ode_field(problem, kind, z + 0.5 * dt * k2, s=p.s, tau=p.tau)
            k4 = ode_field(problem, kind, z + dt * k3, s=p.s, tau=p.tau)
            return z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    else:  # pragma: no cover
        raise ValueError(p.method)
    worst = 0.0
    for a, b in zip(traj.states[:-1], traj.states[1:]):
        worst = max(worst, float(np.max(np.abs(advance(a) - b))))
    return worst


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """CSV with header step,t,z_0,...,z_{d-1},F_norm; one row per sample."""
    d = traj.states.shape[1]
    cols = ",".join(f"z_{i}" for i in range(d))
    with open(path, "w") as fh:
        fh.write(f"step,t,{cols},F_norm\n")
        for i, (t, z, fn) in enumerate(zip(traj.times, traj.states, traj.f_norms)):
            zs = ",".join(repr(float(v)) for v in z)
            fh.write(f"{i},{float(t)!r},{zs},{float(fn)!r}\n")
