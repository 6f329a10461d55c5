import numpy as np
import pytest
from conftest import (
    assemble_hessian,
    random_loose_blocks,
    random_margin_separated_instance,
)
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from minimaxdyn import stability
from minimaxdyn.dynamics import step_eg_tt
from minimaxdyn.problems import builtin_problem
from minimaxdyn.stability import (
    ClassifyConfig,
    CriterionMismatchError,
    characterize_equilibrium,
    disk_gap,
    eg_jacobian_continuous,
    eg_jacobian_discrete,
    gda_jacobian,
    gda_stability,
    in_disk,
    in_peanut,
    infinity_eg_verdict,
    mobius_map,
    peanut_gap,
    stability_continuous,
    stability_discrete,
)


def hessian_of(name, **params):
    return builtin_problem(name, **params).quadratic.hessian()


# --- regions -----------------------------------------------------------------


def test_in_disk_examples():
    s = 0.3
    assert in_disk(-1.0 / (2 * s), s) is True  # center
    for t in (0.5, -2.0):
        assert in_disk(1j * t, s) is False
    assert in_disk(0.0, s) is True  # boundary point of the closed disk
    # both forms at s = 0.5, z = -0.5: Re(1/z) = -2 <= -0.5
    assert in_disk(-0.5, 0.5) is True
    assert (1.0 / -0.5) <= -0.5


def test_in_peanut_examples():
    assert in_peanut(0.5, 1.0) is True           # (0)^2 + 3/4 < 1
    assert in_peanut(0.5j, 1.0) is True          # 1.25 < sqrt(1.75)
    assert in_peanut(1.0, 1.0) is False          # boundary excluded
    assert in_peanut(0.0, 1.0) is False
    assert in_peanut(-0.1, 1.0) is False         # negative real axis excluded


def test_region_predicates_vectorized():
    z = np.array([0.5 + 0.0j, 1.0 + 0.0j, 0.5j])
    out = in_peanut(z, 1.0)
    assert out.tolist() == [True, False, True]
    out = in_disk(np.array([0.0j, 1.0 + 0.0j, -1.0 + 0.0j]), 0.5)
    assert out.tolist() == [True, False, True]


@given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
       st.floats(0.05, 2.0))
@settings(max_examples=200, deadline=None)
def test_disk_forms_agree(z, s):
    # the cross-check inside in_disk raises on any disagreement with margin
    in_disk(z, s)


@given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
       st.floats(0.05, 2.0))
@settings(max_examples=200, deadline=None)
def test_peanut_forms_agree(z, eta):
    in_peanut(z, eta)


def test_gda_criterion_equivalence():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 500:
        lam = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        eta = rng.uniform(0.05, 1.0)
        if abs(lam) < 1e-3:
            continue
        direct = abs(1 - eta * lam) > 1.0
        inverse = (1.0 / lam).real < eta / 2.0
        if abs(abs(1 - eta * lam) - 1.0) < 1e-6:
            continue  # margin-excluded
        assert direct == inverse
        checked += 1


# --- mobius map ----------------------------------------------------------------


def test_mobius_known_values():
    s = 0.25
    assert mobius_map(1.0, s) == pytest.approx(-1.0 / (1.0 + s))
    assert mobius_map(0.0, s) == 0.0


def test_mobius_is_involution():
    lam = 2.0 + 3.0j
    assert mobius_map(mobius_map(lam, 0.1), 0.1) == pytest.approx(lam, abs=1e-12)


def test_mobius_pole():
    with pytest.raises(ValueError):
        mobius_map(-10.0, 0.1)


def test_mobius_maps_imaginary_axis_to_disk_boundary():
    s = 0.37
    t = np.concatenate([-np.geomspace(1e-3, 1e3, 50), np.geomspace(1e-3, 1e3, 50)])
    mu = mobius_map(1j * t, s)
    assert np.max(np.abs(np.abs(mu + 1.0 / (2 * s)) - 1.0 / (2 * s))) <= 1e-10


# --- Jacobians -------------------------------------------------------------------


def test_eg_jacobian_continuous_zero_and_scalar():
    assert_allclose(eg_jacobian_continuous(np.zeros((3, 3)), 0.2), np.zeros((3, 3)))
    lam = 0.7
    J = eg_jacobian_continuous(np.array([[lam]]), 0.2)
    assert J[0, 0] == pytest.approx(mobius_map(lam, 0.2).real)


def test_eg_jacobian_continuous_spectral_map():
    rng = np.random.default_rng(17)
    for _ in range(200):
        n = rng.integers(2, 9)
        H = rng.standard_normal((n, n))
        s = rng.uniform(0.02, 0.9) / max(1.0, np.linalg.norm(H, 2))
        J = eg_jacobian_continuous(H, s)
        expected = np.sort_complex(mobius_map(np.linalg.eigvals(H), s))
        got = np.sort_complex(np.linalg.eigvals(J))
        assert np.max(np.abs(got - expected)) <= 1e-8


def test_eg_jacobian_discrete_identities():
    assert_allclose(eg_jacobian_discrete(np.zeros((2, 2)), 0.5, 4.0, 1), np.eye(2))
    J = eg_jacobian_discrete(hessian_of("bilinear"), 0.5, 4.0, 1)
    assert np.max(np.abs(np.linalg.eigvals(J))) < 1.0


def test_eg_jacobian_discrete_matches_finite_difference():
    p = builtin_problem("strict_nonminimax_demo")
    H = p.quadratic.hessian()
    eta, tau = 0.2, 5.0
    J = eg_jacobian_discrete(H, eta, tau, p.d1)
    h = 1e-6
    J_fd = np.empty((4, 4))
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        J_fd[:, i] = (step_eg_tt(p, e, eta, tau) - step_eg_tt(p, -e, eta, tau)) / (2 * h)
    assert np.max(np.abs(J - J_fd)) <= 1e-5


# --- verdicts ---------------------------------------------------------------------


def test_stability_continuous_examples():
    v = stability_continuous(hessian_of("bilinear"), 0.4, 100.0, 1)
    assert v.stable == "stable"
    # B = +1 sends an order-one eigenvalue to -1, inside every disk with s < 1/L
    H = assemble_hessian([[2.0]], [[1.0]], [[1.0]])
    v = stability_continuous(H, 0.3, 1e6, 1)
    assert v.stable == "unstable"
    v = stability_continuous(np.array([[1.0]]), 0.5, 1.0, 1)
    assert v.stable == "stable"


def test_stability_continuous_rejects_large_s():
    with pytest.raises(ValueError):
        stability_continuous(hessian_of("bilinear"), 1.5, 1.0, 1)


def test_stability_discrete_examples():
    v = stability_discrete(hessian_of("bilinear"), 0.5, 4.0, 1)
    assert v.stable == "stable"
    H = hessian_of("scalar_degenerate", a=-2.0, c=1.0)
    v = stability_discrete(H, 0.3, 1e6, 1)
    assert v.stable == "unstable"
    # negative real eigenvalue is outside the peanut for any eta
    v = stability_discrete(np.array([[-0.1]]), 0.5, 1.0, 1)
    assert v.stable == "unstable"


def test_gda_stability_examples():
    for tau in (1.0, 10.0, 100.0):
        v = gda_stability(hessian_of("bilinear"), 0.5, tau, 1)
        assert v.stable == "unstable"
    assert gda_stability(np.array([[1.0]]), 0.5, 1.0, 1).stable == "stable"
    assert gda_stability(np.array([[-1.0]]), 0.5, 1.0, 1).stable == "unstable"


def test_verdict_margins_respect_invariant():
    v = stability_continuous(hessian_of("bilinear"), 0.4, 100.0, 1)
    assert np.min(v.margins) > stability.MARGINAL_TOL
    v = gda_stability(hessian_of("bilinear"), 0.5, 10.0, 1)
    assert np.min(v.margins) < -stability.MARGINAL_TOL


# --- equivalence propositions on random instances ----------------------------------


def test_disk_equivalence_100_random():
    from minimaxdyn.spectral import timescaled_hessian

    rng = np.random.default_rng(41)
    for _ in range(100):
        H, d1, tau, s = random_margin_separated_instance(rng, 1e-6, "disk")
        Ht = timescaled_hessian(H, tau, d1)
        lams = np.linalg.eigvals(Ht)
        region_stable = not np.any(in_disk(lams, s, cross_check=False))
        J = eg_jacobian_continuous(Ht, s)
        jac_stable = np.max(np.linalg.eigvals(J).real) < 0
        assert region_stable == jac_stable


def test_peanut_equivalence_100_random():
    from minimaxdyn.spectral import timescaled_hessian

    rng = np.random.default_rng(42)
    for _ in range(100):
        H, d1, tau, eta = random_margin_separated_instance(rng, 1e-6, "peanut")
        Ht = timescaled_hessian(H, tau, d1)
        lams = np.linalg.eigvals(Ht)
        region_stable = bool(np.all(in_peanut(lams, eta, cross_check=False)))
        J = eg_jacobian_discrete(H, eta, tau, d1)
        jac_stable = np.max(np.abs(np.linalg.eigvals(J))) < 1
        assert region_stable == jac_stable


def test_disk_and_peanut_never_intersect():
    # disk {|z + a| < a/2} stays outside the peanut, for all a, eta
    rng = np.random.default_rng(43)
    for a, eta in zip(np.geomspace(0.01, 100, 20), np.geomspace(0.02, 5, 20)):
        u = rng.uniform(0, 1, 10_000)
        theta = rng.uniform(0, 2 * np.pi, 10_000)
        z = -a + (a / 2) * np.sqrt(u) * np.exp(1j * theta)
        assert not np.any(in_peanut(z, eta, cross_check=False))


def test_peanut_contains_punctured_imaginary_segment():
    for eta in (0.3, 1.0, 2.5):
        t = np.linspace(1.0 / 101, 1.0 - 1.0 / 101, 100) / eta
        assert np.all(in_peanut(1j * t, eta))
        assert np.all(in_peanut(-1j * t, eta))


def test_nonsingularity_bounds():
    rng = np.random.default_rng(44)
    golden = (np.sqrt(5.0) - 1.0) / 2.0
    for _ in range(100):
        d1, d2 = rng.integers(1, 3), rng.integers(1, 3)
        A, B, C = random_loose_blocks(rng, d1, d2)
        H = assemble_hessian(A, B, C)
        L = np.linalg.norm(H, 2)
        if L < 1e-6:
            continue
        tau = float(np.exp(rng.uniform(0, np.log(100))))
        eta = rng.uniform(0.05, 0.99) / L
        assert abs(np.linalg.det(gda_jacobian(H, eta, tau, d1))) > 0
        # EG map Jacobian away from equilibria, via finite differences
        eta_eg = rng.uniform(0.05, 0.99) * golden / L
        spec_q = builtin_problem(
            "nondegenerate_quadratic", A=A, B=B, C=C)
        z = rng.standard_normal(d1 + d2)
        h = 1e-6
        J_fd = np.empty((d1 + d2, d1 + d2))
        for i in range(d1 + d2):
            e = np.zeros(d1 + d2)
            e[i] = h
            J_fd[:, i] = (step_eg_tt(spec_q, z + e, eta_eg, tau)
                          - step_eg_tt(spec_q, z - e, eta_eg, tau)) / (2 * h)
        assert np.min(np.abs(np.linalg.eigvals(J_fd))) > 1e-8


# --- infinity verdicts ----------------------------------------------------------


def test_infinity_verdict_bilinear():
    H = hessian_of("bilinear")
    v = infinity_eg_verdict(H, 1, 0.4, "continuous")
    assert v.verdict == "stable" and v.tau_star == 1.0
    v = infinity_eg_verdict(H, 1, 0.5, "discrete")
    assert v.verdict == "stable"
    v = infinity_eg_verdict(H, 1, 0.5, "gda")
    assert v.verdict == "unstable"


def test_infinity_verdict_negative_hemicurvature():
    # iota = -1 so s0 = 1 >= 1/L ~ 0.414: unstable for every s < 1/L
    p = builtin_problem("scalar_degenerate", a=-2.0, c=1.0)
    H = p.quadratic.hessian()
    for s in (0.1, 0.25, 0.4):
        assert infinity_eg_verdict(H, 1, s, "continuous").verdict == "unstable"


def test_infinity_verdict_nondegenerate_stable():
    H = hessian_of("nondegenerate_quadratic", A=[[2.0]], B=[[-1.0]], C=[[1.0]])
    L = np.linalg.norm(H, 2)
    for frac in (0.1, 0.5, 0.9):
        assert infinity_eg_verdict(H, 1, frac / L, "continuous").verdict == "stable"
        assert infinity_eg_verdict(H, 1, frac / L, "discrete").verdict == "stable"


def test_infinity_verdict_validates_grid():
    with pytest.raises(ValueError):
        infinity_eg_verdict(hessian_of("bilinear"), 1, 0.4, "continuous",
                            tau_grid=np.array([10.0, 1.0]))
    with pytest.raises(ValueError):
        infinity_eg_verdict(hessian_of("bilinear"), 1, 0.4, "nope")


# --- characterize_equilibrium -----------------------------------------------------


def test_characterize_bilinear():
    p = builtin_problem("bilinear")
    rep = characterize_equilibrium(p, np.zeros(2), ClassifyConfig(s=0.4, eta=0.5))
    assert rep.second_order.B_nsd and rep.second_order.Sres_psd
    assert rep.strict_non_minimax is False
    assert rep.s0 == pytest.approx(0.0, abs=1e-12)
    assert rep.predictions == {"continuous": "stable", "discrete": "stable",
                               "gda": "unstable"}
    assert rep.observed["continuous"].verdict == "stable"
    assert rep.observed["discrete"].verdict == "stable"
    assert rep.observed["gda"].verdict == "unstable"
    assert rep.mismatches == []
    assert rep.thm_infty_continuous and rep.thm_infty_discrete
    assert rep.stable_for_all_steps is True  # u' S u = 0 with vacuous S_res


def test_characterize_scalar_degenerate():
    p = builtin_problem("scalar_degenerate", a=2.0, c=1.0)
    rep = characterize_equilibrium(p, np.zeros(2))
    assert rep.s0 == pytest.approx(-1.0, abs=1e-3)
    assert rep.u_S_u == [pytest.approx(2.0)]
    for mode in ("continuous", "discrete", "gda"):
        assert rep.predictions[mode] == "stable"
        assert rep.observed[mode].verdict == "stable"
    assert rep.mismatches == []


def test_characterize_strict_nonminimax_demo():
    p = builtin_problem("strict_nonminimax_demo")
    rep = characterize_equilibrium(p, np.zeros(4))
    assert rep.strict_non_minimax is True
    assert rep.spec_Sres == [pytest.approx(-1.0)]
    for mode in ("continuous", "discrete", "gda"):
        assert rep.predictions[mode] == "unstable"
        assert rep.observed[mode].verdict == "unstable"
    assert rep.mismatches == []
    assert not rep.thm_infty_continuous and not rep.thm_infty_discrete
    assert rep.stable_for_all_steps is False


def test_characterize_rejects_nonstationary():
    p = builtin_problem("bilinear")
    with pytest.raises(ValueError, match="not stationary"):
        characterize_equilibrium(p, np.array([1.0, 1.0]))


def test_characterize_json_is_serializable():
    import json

    p = builtin_problem("nondegenerate_quadratic", A=[[2.0]], B=[[-1.0]], C=[[1.0]])
    rep = characterize_equilibrium(p, np.zeros(2))
    payload = json.dumps(rep.to_json_dict(), sort_keys=True)
    assert '"s0": "-inf"' in payload


def test_no_mismatch_errors_raised_so_far():
    assert stability.mismatch_count() == 0
