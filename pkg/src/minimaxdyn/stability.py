"""Stability regions, equilibrium Jacobians, and strict-linear-stability verdicts.

Continuous tau-EG is stable at an equilibrium iff spec(H_tau) avoids the
closed disk D_s of radius 1/(2s) centered at -1/(2s); discrete tau-EG is
stable iff spec(H_tau) lies inside the open peanut-shaped region P_eta;
two-timescale GDA is stable iff the spectral radius of I - eta H_tau is
below one.  Each region test has an equivalent inverse form

    disk     z in D_s        <=>  Re(1/z) <= -s            (z != 0)
    peanut   z in P_eta      <=>  Re(1/(z(1 - eta z))) > eta/2
    gda      |1 - eta z| > 1 <=>  Re(1/z) < eta/2

which stays well conditioned as the eigenvalues collapse toward the origin
with growing tau, so verdict margins are measured in inverse form.  Every
verdict also computes the Jacobian-side criterion directly and raises
CriterionMismatchError if the two sides disagree outside their marginal
bands; the criterion equivalences thus run as permanent self-tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .dynamics import SingularOperatorError
from .problems import MinimaxProblem, hessian_blocks_at, saddle_gradient
from .spectral import (
    CanonicalBlocks,
    EigenCurves,
    canonicalize,
    default_psd_tol,
    eigencurves,
    generalized_schur,
    hemicurvature,
    is_strict_non_minimax,
    restricted_schur,
    s_zero,
    second_order_necessary,
    timescaled_hessian,
)

MARGINAL_TOL = 1e-8
DEFAULT_TAU_GRID = np.geomspace(1.0, 1e8, 33)
DEFAULT_K_TAIL = 5
_CROSS_CHECK_GUARD = 1e-9

_mismatch_count = 0


class CriterionMismatchError(RuntimeError):
    """The two sides of an equivalence criterion disagreed with margin.

    Signals numerical breakdown rather than a wrong verdict; counted so
    that experiment drivers can assert the self-tests never tripped.
    """

    def __init__(self, message: str):
        global _mismatch_count
        _mismatch_count += 1
        super().__init__(message)


def mismatch_count() -> int:
    return _mismatch_count


def reset_mismatch_count() -> None:
    global _mismatch_count
    _mismatch_count = 0


# ---------------------------------------------------------------------------
# regions


def disk_gap(z, s: float):
    """Positive strictly inside the closed disk D_s, negative outside."""
    z = np.asarray(z, dtype=complex)
    half = 1.0 / (2.0 * s)
    return half - np.abs(z + half)


def peanut_gap(z, eta: float):
    """Positive inside the open peanut P_eta, negative outside."""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    return np.sqrt(1.0 + 3.0 * eta**2 * y**2) - ((eta * x - 0.5) ** 2 + eta**2 * y**2 + 0.75)


def _restore_shape(arr, scalar: bool):
    return bool(arr) if scalar else arr


def in_disk(z, s: float, cross_check: bool = True):
    """Membership in D_s = {z : |z + 1/(2s)| <= 1/(2s)}.

    Cross-checked against the inverse form Re(1/z) <= -s away from the
    boundary; scalars in, scalar bool out.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    gap = disk_gap(z, s)
    primary = gap >= 0.0
    if cross_check:
        inv = np.zeros_like(primary)
        nz = np.abs(z) > 1e-300
        inv[nz] = np.real(1.0 / z[nz]) <= -s
        inv[~nz] = True  # z = 0 sits on the boundary of the closed disk
        bad = (primary != inv) & (np.abs(gap) > _CROSS_CHECK_GUARD) & nz
        if np.any(bad):
            raise CriterionMismatchError(
                f"disk forms disagree at z={z[bad][0]} (gap {gap[bad][0]:.3e})"
            )
    return _restore_shape(primary[0] if scalar else primary, scalar)


def in_peanut(z, eta: float, cross_check: bool = True):
    """Membership in the open peanut-shaped region P_eta.

    Cross-checked against Re(1/(z(1 - eta z))) > eta/2 for z not in
    {0, 1/eta}.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    gap = peanut_gap(z, eta)
    primary = gap > 0.0
    if cross_check:
        u = z * (1.0 - eta * z)
        ok = np.abs(u) > 1e-300
        inv = np.zeros_like(primary)
        inv[ok] = np.real(1.0 / u[ok]) > eta / 2.0
        bad = (primary != inv) & (np.abs(gap) > _CROSS_CHECK_GUARD) & ok
        if np.any(bad):
            raise CriterionMismatchError(
                f"peanut forms disagree at z={z[bad][0]} (gap {gap[bad][0]:.3e})"
            )
    return _restore_shape(primary[0] if scalar else primary, scalar)


def mobius_map(lam, s: float):
    """mu = -lambda / (1 + s lambda), the spectral map from H_tau to the
    continuous EG Jacobian.  Involutive; maps the imaginary axis onto the
    boundary of D_s."""
    scalar = np.ndim(lam) == 0
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    den = 1.0 + s * lam
    if np.any(np.abs(den) < 1e-14 * np.maximum(1.0, np.abs(s * lam))):
        raise ValueError("mobius_map pole: lambda = -1/s")
    out = -lam / den
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Jacobians at equilibria


def eg_jacobian_continuous(H_tau, s: float) -> np.ndarray:
    """J = -(I + s H_tau)^{-1} H_tau, the ODE Jacobian at an equilibrium."""
    H_tau = np.asarray(H_tau, dtype=float)
    M = np.eye(H_tau.shape[0]) + s * H_tau
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularOperatorError(f"I + s H_tau numerically singular (cond ~ {cond:.3e})")
    return -np.linalg.solve(M, H_tau)


def eg_jacobian_discrete(H, eta: float, tau: float, d1: int) -> np.ndarray:
    """J = I - eta H_tau (I - eta H_tau), the discrete EG Jacobian."""
    H = np.asarray(H, dtype=float)
    Ht = timescaled_hessian(H, tau, d1)
    n = H.shape[0]
    return np.eye(n) - eta * Ht @ (np.eye(n) - eta * Ht)


def gda_jacobian(H, eta: float, tau: float, d1: int) -> np.ndarray:
    """J = I - eta H_tau, the two-timescale GDA Jacobian."""
    H = np.asarray(H, dtype=float)
    return np.eye(H.shape[0]) - eta * timescaled_hessian(H, tau, d1)


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class StabilityVerdict:
    """Per-(method, step size, tau) classification with its witnesses.

    margins holds the per-eigenvalue inverse-form criterion margin
    (positive = satisfies the stability criterion); jac_margin is the
    margin of the direct Jacobian criterion.
    """

    method: str
    stable: str  # "stable" | "unstable" | "marginal"
    params: dict
    h_eigs: np.ndarray
    margins: np.ndarray
    jac_eigs: np.ndarray
    jac_margin: float
    criterion: str

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "stable": self.stable,
            "params": self.params,
            "h_eigs": [[float(v.real), float(v.imag)] for v in self.h_eigs],
            "margins": [float(m) for m in self.margins],
            "jac_margin": float(self.jac_margin),
            "criterion": self.criterion,
        }


def _classify(margins, tol: float) -> str:
    m = float(np.min(margins))
    if m > tol:
        return "stable"
    if m < -tol:
        return "unstable"
    return "marginal"


def _check_agreement(region: str, jac: str, context: str) -> None:
    if "marginal" in (region, jac) or region == jac:
        return
    raise CriterionMismatchError(
        f"{context}: region criterion says {region}, Jacobian criterion says {jac}"
    )


def _inverse_margin_disk(lams, s: float) -> np.ndarray:
    """Re(1/lam) + s; positive iff lam is outside the closed disk."""
    out = np.zeros(len(lams))
    for i, lam in enumerate(lams):
        if abs(lam) < 1e-300:
            out[i] = 0.0
        else:
            out[i] = (1.0 / lam).real + s
    return out


def _inverse_margin_peanut(lams, eta: float) -> np.ndarray:
    """Re(1/(lam(1 - eta lam))) - eta/2; positive iff lam is inside P_eta."""
    out = np.zeros(len(lams))
    for i, lam in enumerate(lams):
        u = lam * (1.0 - eta * lam)
        if abs(u) < 1e-300:
            out[i] = 0.0
        else:
            out[i] = (1.0 / u).real - eta / 2.0
    return out


def _inverse_margin_gda(lams, eta: float) -> np.ndarray:
    """Re(1/lam) - eta/2; positive iff |1 - eta lam| < 1."""
    out = np.zeros(len(lams))
    for i, lam in enumerate(lams):
        if abs(lam) < 1e-300:
            out[i] = 0.0
        else:
            out[i] = (1.0 / lam).real - eta / 2.0
    return out


def stability_continuous(H, s: float, tau: float, d1: int,
                         marginal_tol: float = MARGINAL_TOL) -> StabilityVerdict:
    """Continuous tau-EG verdict: disk-disjointness vs max Re spec(J) < 0."""
    H = np.asarray(H, dtype=float)
    if not 0.0 < s:
        raise ValueError("s must be positive")
    if s * np.linalg.norm(H, 2) >= 1.0:
        raise ValueError("requires s < 1/L (s * ||H|| < 1)")
    Ht = timescaled_hessian(H, tau, d1)
    lams = np.linalg.eigvals(Ht)
    margins = _inverse_margin_disk(lams, s)
    region = _classify(margins, marginal_tol)

    J = eg_jacobian_continuous(Ht, s)
    jac_eigs = np.linalg.eigvals(J)
    jac_margin = float(-np.max(jac_eigs.real))
    jac = _classify([jac_margin], marginal_tol)
    _check_agreement(region, jac, f"stability_continuous(s={s}, tau={tau})")
    return StabilityVerdict(
        method="eg_tt_continuous",
        stable=region,
        params={"s": float(s), "tau": float(tau)},
        h_eigs=lams,
        margins=margins,
        jac_eigs=jac_eigs,
        jac_margin=jac_margin,
        criterion="spec(H_tau) outside disk <=> spec(J) in open left half-plane",
    )


def stability_discrete(H, eta: float, tau: float, d1: int,
                       marginal_tol: float = MARGINAL_TOL) -> StabilityVerdict:
    """Discrete tau-EG verdict: peanut membership vs rho(J) < 1."""
    H = np.asarray(H, dtype=float)
    if not 0.0 < eta:
        raise ValueError("eta must be positive")
    if eta * np.linalg.norm(H, 2) >= 1.0:
        raise ValueError("requires eta < 1/L (eta * ||H|| < 1)")
    Ht = timescaled_hessian(H, tau, d1)
    lams = np.linalg.eigvals(Ht)
    margins = _inverse_margin_peanut(lams, eta)
    region = _classify(margins, marginal_tol)

    J = eg_jacobian_discrete(H, eta, tau, d1)
    jac_eigs = np.linalg.eigvals(J)
    jac_margin = float(1.0 - np.max(np.abs(jac_eigs)))
    jac = _classify([jac_margin], marginal_tol)
    _check_agreement(region, jac, f"stability_discrete(eta={eta}, tau={tau})")
    return StabilityVerdict(
        method="eg_tt_discrete",
        stable=region,
        params={"eta": float(eta), "tau": float(tau)},
        h_eigs=lams,
        margins=margins,
        jac_eigs=jac_eigs,
        jac_margin=jac_margin,
        criterion="spec(H_tau) inside peanut <=> rho(J) < 1",
    )


def gda_stability(H, eta: float, tau: float, d1: int,
                  marginal_tol: float = MARGINAL_TOL) -> StabilityVerdict:
    """Two-timescale GDA verdict: rho(I - eta H_tau) vs 1, with the
    per-eigenvalue Re(1/lambda) vs eta/2 form reported alongside."""
    H = np.asarray(H, dtype=float)
    if not 0.0 < eta:
        raise ValueError("eta must be positive")
    Ht = timescaled_hessian(H, tau, d1)
    lams = np.linalg.eigvals(Ht)
    margins = _inverse_margin_gda(lams, eta)
    region = _classify(margins, marginal_tol)

    J = gda_jacobian(H, eta, tau, d1)
    jac_eigs = np.linalg.eigvals(J)
    jac_margin = float(1.0 - np.max(np.abs(jac_eigs)))
    jac = _classify([jac_margin], marginal_tol)
    _check_agreement(region, jac, f"gda_stability(eta={eta}, tau={tau})")
    return StabilityVerdict(
        method="gda_tt",
        stable=region,
        params={"eta": float(eta), "tau": float(tau)},
        h_eigs=lams,
        margins=margins,
        jac_eigs=jac_eigs,
        jac_margin=jac_margin,
        criterion="Re(1/lambda) > eta/2 for all lambda <=> rho(I - eta H_tau) < 1",
    )


_VERDICT_FUNCS = {
    "continuous": stability_continuous,
    "discrete": stability_discrete,
    "gda": gda_stability,
}


@dataclass
class InfinityVerdict:
    """Empirical infinity-EG verdict along a tau grid.

    stable/unstable comes from a terminal run of at least k_tail grid
    points with that verdict; tau_star is the smallest grid point opening
    the run.  The verdict is empirical: the underlying statements hold for
    all tau beyond an unquantified threshold.
    """

    mode: str
    param: float
    verdict: str  # "stable" | "unstable" | "inconclusive"
    tau_star: float | None
    tau_grid: np.ndarray
    labels: list[str]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "param": float(self.param),
            "verdict": self.verdict,
            "tau_star": None if self.tau_star is None else float(self.tau_star),
            "labels": list(self.labels),
        }


def infinity_eg_verdict(H, d1: int, s_or_eta: float, mode: str,
                        tau_grid=None, k_tail: int = DEFAULT_K_TAIL,
                        marginal_tol: float = MARGINAL_TOL) -> InfinityVerdict:
    """Sweep tau and report the terminal-run verdict.

    mode is "continuous" (disk criterion at step s), "discrete" (peanut
    criterion at step eta), or "gda".
    """
    if mode not in _VERDICT_FUNCS:
        raise ValueError(f"unknown mode {mode!r}")
    tau_grid = DEFAULT_TAU_GRID if tau_grid is None else np.asarray(tau_grid, dtype=float)
    if np.any(np.diff(tau_grid) <= 0) or tau_grid[0] < 1.0:
        raise ValueError("tau_grid must be increasing with tau >= 1")
    func = _VERDICT_FUNCS[mode]
    labels = [func(H, s_or_eta, tau, d1, marginal_tol=marginal_tol).stable
              for tau in tau_grid]
    tail_label = labels[-1]
    run = 0
    for lbl in reversed(labels):
        if lbl != tail_label:
            break
        run += 1
    if tail_label in ("stable", "unstable") and run >= k_tail:
        return InfinityVerdict(mode, s_or_eta, tail_label,
                               float(tau_grid[len(labels) - run]), tau_grid, labels)
    return InfinityVerdict(mode, s_or_eta, "inconclusive", None, tau_grid, labels)


# ---------------------------------------------------------------------------
# full equilibrium characterization


@dataclass
class ClassifyConfig:
    """Tolerances and sweep parameters for characterize_equilibrium."""

    stationarity_tol: float = 1e-8
    rank_tol: float | None = None
    psd_tol: float | None = None
    marginal_tol: float = MARGINAL_TOL
    eps_grid: np.ndarray | None = None
    tau_grid: np.ndarray | None = None
    k_tail: int = DEFAULT_K_TAIL
    s: float | None = None      # default 0.5/L
    eta: float | None = None    # default 0.5/L
    sigma_sep_tol: float = 1e-6


@dataclass
class EquilibriumReport:
    point: np.ndarray
    f_norm: float
    lipschitz: float
    r: int
    w: int
    spec_Sres: list
    spec_negB: list
    sigma: list
    iota: list           # one value per sigma, averaged over the +- pair
    s0: float
    second_order: spectral.SecondOrderVerdict
    strict_non_minimax: bool
    s_eval: float
    eta_eval: float
    distinct_sigma: bool
    u_S_u: list | None   # u_j' S u_j per sigma_j, when sigma are distinct
    # threshold predicates: stability of infinity-EG for large enough
    # step sizes (continuous: s0 < 1/L) and for the discrete regime
    # (s0 < 1/(2L)); and, under distinct sigma, for every admissible step
    thm_infty_continuous: bool
    thm_infty_discrete: bool
    stable_for_all_steps: bool | None
    predictions: dict    # method -> "stable" | "unstable" | "indeterminate"
    observed: dict       # method -> InfinityVerdict
    mismatches: list
    curves: EigenCurves

    def to_json_dict(self) -> dict:
        def num(x):
            x = float(x)
            return x if math.isfinite(x) else str(x)

        return {
            "point": [float(v) for v in self.point],
            "F_norm": num(self.f_norm),
            "L": num(self.lipschitz),
            "r": self.r,
            "w": self.w,
            "spec_Sres": [num(v) for v in self.spec_Sres],
            "spec_negB": [num(v) for v in self.spec_negB],
            "sigma": [num(v) for v in self.sigma],
            "iota": [num(v) for v in self.iota],
            "s0": num(self.s0),
            "second_order": {
                "B_nsd": self.second_order.B_nsd,
                "Sres_psd": self.second_order.Sres_psd,
            },
            "B_nsd": self.second_order.B_nsd,
            "Sres_psd": self.second_order.Sres_psd,
            "strict_non_minimax": self.strict_non_minimax,
            "s": num(self.s_eval),
            "eta": num(self.eta_eval),
            "distinct_sigma": self.distinct_sigma,
            "u_S_u": None if self.u_S_u is None else [num(v) for v in self.u_S_u],
            "thm_infty_continuous": self.thm_infty_continuous,
            "thm_infty_discrete": self.thm_infty_discrete,
            "stable_for_all_steps": self.stable_for_all_steps,
            "predictions": dict(self.predictions),
            "verdicts": [
                {
                    "method": mode,
                    "param": num(v.param),
                    "tau_star": None if v.tau_star is None else num(v.tau_star),
                    "stable": v.verdict,
                }
                for mode, v in self.observed.items()
            ],
            "mismatches": list(self.mismatches),
        }


def _predict(method: str, so: spectral.SecondOrderVerdict, s0: float,
             s_eval: float, eta_eval: float) -> str:
    """Large-tau stability prediction from the second-order data.

    The type-(ii)/(iii) eigenvalue families force instability whenever the
    necessary conditions fail; the sqrt-order family compares the step
    size against s0 (continuous), eta/2 (discrete), or the hemicurvatures
    against eta/2 (gda).
    """
    if not (so.B_nsd and so.Sres_psd):
        return "unstable"
    if method == "continuous":
        lhs, rhs = s_eval, s0
    elif method == "discrete":
        lhs, rhs = eta_eval / 2.0, s0
    elif method == "gda":
        # stable iff every hemicurvature exceeds eta/2, i.e. -s0 > eta/2
        lhs, rhs = -s0, eta_eval / 2.0
    else:  # pragma: no cover
        raise ValueError(method)
    guard = 1e-9 * max(1.0, abs(rhs) if math.isfinite(rhs) else 1.0)
    if lhs > rhs + guard:
        return "stable"
    if lhs < rhs - guard:
        return "unstable"
    return "indeterminate"


def characterize_equilibrium(problem: MinimaxProblem, z_star,
                             config: ClassifyConfig | None = None) -> EquilibriumReport:
    """Bundle the second-order verdicts, curve asymptotics, the stability
    predictions they imply for infinity-EG/GDA, and the empirically swept
    verdicts; flag any prediction/observation mismatch."""
    config = config or ClassifyConfig()
    z = np.asarray(z_star, dtype=float)
    F = saddle_gradient(problem, z)
    f_norm = float(np.linalg.norm(F))
    if f_norm > config.stationarity_tol:
        raise ValueError(
            f"z is not stationary: ||F(z)|| = {f_norm:.3e} > {config.stationarity_tol:.1e}"
        )
    A, B, C = hessian_blocks_at(problem, z)
    blocks = canonicalize(A, B, C, rank_tol=config.rank_tol)
    rsc = restricted_schur(blocks)
    so = second_order_necessary(blocks, psd_tol=config.psd_tol)
    snm = is_strict_non_minimax(blocks, tol=config.psd_tol)

    H = np.block([[A, C], [-C.T, -B]])
    curves = eigencurves(H, problem.d1, eps_grid=config.eps_grid,
                         rank_tol=config.rank_tol)
    sigma = curves.sigma
    iota_by_sigma = []
    for sg in sigma:
        vals = [hemicurvature(curves, j) for j in curves.sqrt_indices
                if np.isclose(curves.sigma_by_curve[j], sg)]
        iota_by_sigma.append(float(np.mean(vals)) if vals else float("nan"))
    s0 = s_zero(curves)

    L = problem.lipschitz_bound
    s_eval = 0.5 / L if config.s is None else float(config.s)
    eta_eval = 0.5 / L if config.eta is None else float(config.eta)
    if not 0.0 < s_eval < 1.0 / L:
        raise ValueError(f"s must lie in (0, 1/L) = (0, {1.0 / L:.6g})")
    if not 0.0 < eta_eval < 1.0 / L:
        raise ValueError(f"eta must lie in (0, 1/L) = (0, {1.0 / L:.6g})")

    S = generalized_schur(blocks)
    distinct = True
    if len(sigma) > 1:
        gaps = np.abs(np.subtract.outer(sigma, sigma))
        min_gap = float(np.min(gaps[~np.eye(len(sigma), dtype=bool)]))
        distinct = min_gap > config.sigma_sep_tol * max(1.0, float(sigma[0]))
    u_S_u = None
    if len(sigma) and distinct:
        U2, sv, _ = np.linalg.svd(blocks.C2, full_matrices=False)
        u_S_u = [float(U2[:, k] @ S @ U2[:, k]) for k in range(len(sv))]

    necessary = so.B_nsd and so.Sres_psd
    thm_infty_continuous = bool(necessary and s0 < 1.0 / L)
    thm_infty_discrete = bool(necessary and s0 < 1.0 / (2.0 * L))
    stable_for_all_steps = None
    if not len(sigma):
        stable_for_all_steps = necessary
    elif distinct:
        tol_u = default_psd_tol(S)
        stable_for_all_steps = bool(necessary and all(v >= -tol_u for v in u_S_u))

    predictions = {
        mode: _predict(mode, so, s0, s_eval, eta_eval)
        for mode in ("continuous", "discrete", "gda")
    }
    observed = {
        "continuous": infinity_eg_verdict(H, problem.d1, s_eval, "continuous",
                                          tau_grid=config.tau_grid,
                                          k_tail=config.k_tail,
                                          marginal_tol=config.marginal_tol),
        "discrete": infinity_eg_verdict(H, problem.d1, eta_eval, "discrete",
                                        tau_grid=config.tau_grid,
                                        k_tail=config.k_tail,
                                        marginal_tol=config.marginal_tol),
        "gda": infinity_eg_verdict(H, problem.d1, eta_eval, "gda",
                                   tau_grid=config.tau_grid,
                                   k_tail=config.k_tail,
                                   marginal_tol=config.marginal_tol),
    }
    mismatches = []
    for mode in predictions:
        pred, obs = predictions[mode], observed[mode].verdict
        if pred in ("stable", "unstable") and obs in ("stable", "unstable") and pred != obs:
            mismatches.append(
                f"{mode}: predicted {pred} but observed {obs} "
                f"(param {observed[mode].param:.6g})"
            )

    return EquilibriumReport(
        point=z,
        f_norm=f_norm,
        lipschitz=L,
        r=blocks.r,
        w=rsc.w,
        spec_Sres=[float(v) for v in rsc.eigenvalues()],
        spec_negB=[float(v) for v in -np.diag(blocks.B_diag)],
        sigma=[float(v) for v in sigma],
        iota=iota_by_sigma,
        s0=float(s0),
        second_order=so,
        strict_non_minimax=snm,
        s_eval=s_eval,
        eta_eval=eta_eval,
        distinct_sigma=bool(distinct),
        u_S_u=u_S_u,
        thm_infty_continuous=thm_infty_continuous,
        thm_infty_discrete=thm_infty_discrete,
        stable_for_all_steps=stable_for_all_steps,
        predictions=predictions,
        observed=observed,
        mismatches=mismatches,
        curves=curves,
    )
