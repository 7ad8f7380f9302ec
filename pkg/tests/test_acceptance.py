"""Acceptance suite: one criterion name per headline claim, checked at full desk scale.

Each test carries ``@pytest.mark.criterion(name)``; the terminal summary prints one
PASS/FAIL line per criterion. Expensive runs are shared through module fixtures.
"""
import time

import numpy as np
import pytest

from laguerre_owwe.analytic1d import ExactSolverConfig, boundary_moments, exact_coefficients, exact_field
from laguerre_owwe.experiments import (
    ImpulseSetup2D,
    convergence_order,
    error_table,
    impulse_2d,
    relative_l2,
    relative_variation,
)
from laguerre_owwe.laguerre import LaguerreParams, LaguerreSeries, laguerre_functions
from laguerre_owwe.schemes1d import InstabilityError, energy_profile, solve_1d
from laguerre_owwe.solver2d import (
    DepthExtrapolator,
    DrpStencil,
    PadeCoefficients,
    RowOperators,
    assemble_reduced,
    constant_model,
    drp_apply,
    envelope_peak_depth,
    filter_phi_fields,
    flat_reflector_section,
    migrate,
    two_layer_model,
)
from laguerre_owwe.solver2d.extrapolate import N_START
from laguerre_owwe.stability import amplification_factor, classify, first_order_sign
from laguerre_owwe.wavelet import SourceWavelet

TABLE1_REFERENCE = {
    "AM5-I5": (1.72e-2, 5.6e-4),
    "AM6-I7": (4.6e-3, 7.52e-5),
    "AM5-D4": (6.5e-2, 4.2e-3),
    "Richardson": (3.5e-3, 2.14e-4),
}
TABLE1_ORDERS = {"AM5-I5": (5.0, 0.5), "AM6-I7": (6.0, 0.7), "AM5-D4": (4.0, 0.5), "Richardson": (4.0, 0.5)}


# -- 1D ------------------------------------------------------------------------------------
@pytest.fixture(scope="module")
def table1(setup1d, boundary1d):
    start = time.perf_counter()
    errors = error_table(setup1d, tuple(TABLE1_REFERENCE), (2000, 4000))
    return errors, time.perf_counter() - start


@pytest.mark.criterion("table1-reproduction")
@pytest.mark.parametrize("scheme", list(TABLE1_REFERENCE))
@pytest.mark.parametrize("column, n", [(0, 2000), (1, 4000)])
def test_table1_reproduction(table1, scheme, column, n):
    errors, _ = table1
    ref = TABLE1_REFERENCE[scheme][column]
    assert 0.5 * ref <= errors[scheme, n] <= 1.5 * ref


@pytest.mark.criterion("table1-reproduction")
def test_table1_runtime(table1):
    assert table1[1] < 30 * 60


@pytest.mark.criterion("convergence-orders")
@pytest.mark.parametrize("scheme", list(TABLE1_ORDERS))
def test_convergence_orders(table1, scheme):
    errors, _ = table1
    order, tol = TABLE1_ORDERS[scheme]
    assert convergence_order(errors[scheme, 2000], errors[scheme, 4000], 2000, 4000) == pytest.approx(order, abs=tol)


def test_high_order_scheme_beats_richardson_on_a_coarser_budget(setup1d):
    coarse = error_table(setup1d, ("Richardson",), (1500,))["Richardson", 1500]
    fine = error_table(setup1d, ("AM5-I5",), (4500,))["AM5-I5", 4500]
    assert fine < coarse


@pytest.mark.criterion("analytic-oracle")
def test_analytic_field_at_probe_points(setup1d, boundary1d):
    cfg = ExactSolverConfig(setup1d.eta, setup1d.c)
    x = np.linspace(300.0, 6000.0, 10)
    offsets = np.linspace(-0.02, 0.02, 10)  # sample across the pulse
    t = x / setup1d.c + setup1d.wavelet.t0 + offsets
    u = np.diag(exact_field(boundary1d, cfg, x, t))
    peak = np.max(np.abs(setup1d.wavelet(np.linspace(0.0, 0.4, 4001))))
    assert np.max(np.abs(u - setup1d.wavelet(t - x / setup1d.c))) < 1e-5 * peak


@pytest.mark.criterion("analytic-oracle")
def test_analytic_fft_equals_direct_sum():
    rng = np.random.default_rng(7)
    M, eta, c = 512, 600.0, 3000.0
    series = LaguerreSeries(LaguerreParams(eta, M), rng.standard_normal(M))
    cfg = ExactSolverConfig(eta, c)
    x = np.array([0.0, 100.0, 2500.0, 7500.0])
    V0 = boundary_moments(series, cfg)
    basis = laguerre_functions(cfg.kappa, x, M - 1)
    direct = np.array([V0[m::-1] @ basis[: m + 1] for m in range(M)])
    got = exact_coefficients(series, cfg, x)
    assert np.max(np.abs(got - direct)) < 1e-12 * np.max(np.abs(direct))


@pytest.mark.criterion("energy-conservation")
def test_energy_exact_is_constant(setup1d, boundary1d):
    cfg = ExactSolverConfig(setup1d.eta, setup1d.c)
    k = np.sum(exact_coefficients(boundary1d, cfg, np.linspace(0.0, setup1d.length, 61)) ** 2, axis=0)
    assert relative_variation(k) < 1e-10


@pytest.mark.criterion("energy-conservation")
def test_energy_crank_nicolson_is_conserved(setup1d, boundary1d):
    sol = solve_1d("CN", setup1d.mesh(1000), boundary1d, setup1d.c)
    assert relative_variation(energy_profile(sol)) < 1e-8


@pytest.mark.criterion("energy-conservation")
def test_energy_dissipation_ordering(setup1d, boundary1d):
    mesh = setup1d.mesh(1000)
    decay = {}
    for name in ("RK4", "AM5-I5"):
        k = energy_profile(solve_1d(name, mesh, boundary1d, setup1d.c))
        decay[name] = 1.0 - k[-1] / k[0]
    assert decay["RK4"] > decay["AM5-I5"] > 0


THETAS = 2 * np.pi * np.arange(256) / 256


@pytest.mark.criterion("von-neumann-suite")
@pytest.mark.parametrize("beta", [0.1, 1.0, 10.0])
def test_von_neumann_crank_nicolson(beta):
    g = np.array([abs(amplification_factor("CN", beta, th)) for th in THETAS])
    assert np.max(np.abs(g - 1.0)) < 1e-13


@pytest.mark.criterion("von-neumann-suite")
@pytest.mark.parametrize("beta", [0.1, 1.0, 10.0])
def test_von_neumann_first_order_schemes(beta):
    fwd = np.array([abs(amplification_factor("Forward1", beta, th)) for th in THETAS])
    bwd = np.array([abs(amplification_factor("Backward1", beta, th)) for th in THETAS])
    assert np.all(fwd >= 1.0 - 1e-14) and np.all(bwd <= 1.0 + 1e-14)
    inner = THETAS[1:]  # theta = 0 is neutral for both: A - B = 0 exactly
    for name, g in (("Forward1", fwd[1:]), ("Backward1", bwd[1:])):
        assert np.all(np.sign(g**2 - 1.0) == np.sign(first_order_sign(name, beta, inner)))


@pytest.mark.criterion("von-neumann-suite")
def test_von_neumann_am5_unstable():
    for beta in (0.1, 0.5, 1.0, 10.0):
        assert classify("AM5", beta).classification == "unstable"


@pytest.mark.criterion("stabilization-necessity")
def test_am5_without_filtration_alarms(setup1d, boundary1d):
    with pytest.raises(InstabilityError):
        solve_1d("AM5", setup1d.mesh(2000), boundary1d, setup1d.c)


@pytest.mark.criterion("stabilization-necessity")
def test_am5_with_filtration_completes_bounded(setup1d, boundary1d):
    sol = solve_1d("AM5-I5", setup1d.mesh(2000), boundary1d, setup1d.c)
    assert sol.coeffs.shape[0] == setup1d.n_terms == 2500
    assert np.max(np.abs(sol.coeffs)) <= 10 * np.max(np.abs(boundary1d.coeffs))


# -- 2D identities -----------------------------------------------------------------------------
@pytest.mark.criterion("2d-identities")
def test_reduced_operator_equals_dense_schur():
    nx, eta, h_z, a = 64, 60.0, 2.5, 251 / 720
    et = eta / 2
    c = np.full(nx, 250.0)
    pade = PadeCoefficients()
    ops = RowOperators(c, eta, pade, DrpStencil(), 10.0)
    L, eye, c2 = ops.L.to_dense(), np.eye(nx), np.diag(c**2)
    schur = np.diag(c / h_z) + a * et * eye + a * et * sum(
        b * c2 @ L @ np.linalg.inv(g * c2 @ L - et**2 * eye) for g, b in zip(pade.gamma, pade.beta)
    )
    M123 = np.linalg.multi_dot([g * c2 @ L / et**2 - eye for g in pade.gamma])
    got, _ = assemble_reduced(ops, h_z, a, np.zeros(nx), np.zeros((3, nx)))
    got = got.to_dense()
    assert np.max(np.abs(M123 @ schur - got)) < 1e-10 * np.max(np.abs(got))


@pytest.mark.criterion("2d-identities")
def test_drp_stencil_examples():
    h = 10.0
    x = h * np.arange(101)
    inner = slice(6, -6)
    c = 250.0
    assert np.max(np.abs(drp_apply(np.full(101, c), DrpStencil(), h)[inner])) < 1e-7 * c / h**2
    second = drp_apply(x**2, DrpStencil(), h)[inner]
    assert np.max(np.abs(second - 2.0)) < 0.003 * 2.0


@pytest.mark.criterion("2d-identities")
def test_depth_step_solve_residuals():
    rng = np.random.default_rng(3)
    nx = 512
    ops = RowOperators(250.0 + 100.0 * rng.random(nx), 60.0, PadeCoefficients(), DrpStencil(), 10.0)
    A = ops.reduced_matrix(2.5, 251 / 720)
    rhs = rng.standard_normal(nx)
    u = ops.reduced_lu(2.5, 251 / 720).solve(rhs)
    res = np.max(np.abs(A.matvec(u) - rhs))
    assert res <= 1e-10 * (A.norm_inf() * np.max(np.abs(u)) + np.max(np.abs(rhs)))
    for s, M in enumerate(ops.M):
        r = rng.standard_normal((3, nx))
        x = ops.solve_m(r)[s]
        res = np.max(np.abs(M.matvec(x) - r[s]))
        assert res <= 1e-10 * (M.norm_inf() * np.max(np.abs(x)) + np.max(np.abs(r[s])))


# -- 2D desk-scale impulse -----------------------------------------------------------------------
SPIKE = ImpulseSetup2D(width=1000.0, source_sigma=0.0)
DESK = ImpulseSetup2D()
DESK_TIMES = [3.0, 4.5, 6.0]


@pytest.fixture(scope="module")
def desk_runs():
    return {
        "pc": impulse_2d(DESK, "pc", DESK_TIMES),
        "am": impulse_2d(DESK, "am", DESK_TIMES),
        "pc-cn": impulse_2d(DESK, "pc", DESK_TIMES, starter="cn"),
    }


@pytest.mark.criterion("2d-stability-thresholds")
def test_pc_stable_at_quarter_ratio():
    res = impulse_2d(SPIKE, "pc")
    assert res.terms_done == SPIKE.n_terms
    assert np.all(np.isfinite(res.max_coeff))


@pytest.mark.criterion("2d-stability-thresholds")
def test_pc_alarm_at_half_ratio():
    setup = ImpulseSetup2D(width=1000.0, source_sigma=0.0, ratio=0.5)
    with pytest.raises(InstabilityError) as err:
        impulse_2d(setup, "pc", n_terms=50)
    assert err.value.m < 50


@pytest.mark.criterion("2d-stability-thresholds")
def test_am_stable_at_035_ratio():
    setup = ImpulseSetup2D(width=1000.0, source_sigma=0.0, ratio=0.35)
    res = impulse_2d(setup, "am")
    assert res.terms_done == setup.n_terms


@pytest.mark.criterion("2d-stability-thresholds")
def test_am_and_pc_fields_agree(desk_runs):
    for pc, am in zip(desk_runs["pc"].snapshots, desk_runs["am"].snapshots):
        assert relative_l2(pc, am) < 5e-3


def test_filtration_is_necessary_in_2d():
    with pytest.raises(InstabilityError):
        impulse_2d(SPIKE, "pc", filter_degree=None)


def test_starter_choice_barely_changes_the_desk_field(desk_runs):
    for euler, cn in zip(desk_runs["pc"].snapshots, desk_runs["pc-cn"].snapshots):
        assert np.max(np.abs(euler - cn)) < 0.01 * np.max(np.abs(cn))


# -- PC efficiency -------------------------------------------------------------------------------
def _warm_march(method, model, rows):
    ex = DepthExtrapolator(model, 60.0, method)
    state, strip = ex.new_state(), ex.new_strip_state()
    for g in rows[:2]:
        ex.advance_term(state, strip, g)
        state.end_term()
    filter_phi_fields(state, 5, True)
    step = ex.am_step if method == "am" else ex.pc_step

    def march():
        # starter rows are set up outside the timed region
        state.begin_term()
        ex.surface_row(state, rows[2])
        ex.startup_rows(state, strip)
        t = time.perf_counter()
        for k in range(N_START, model.nz - 1):
            step(state, k)
        return (time.perf_counter() - t) / (model.nz - 1 - N_START)

    march()  # factorizations are cached on first use
    return march


@pytest.mark.criterion("pc-efficiency")
def test_pc_step_is_cheaper_than_am():
    model = constant_model(512, 301, 10.0, 2.5, 250.0)
    rows = np.random.default_rng(1).standard_normal((3, 512))
    marches = {m: _warm_march(m, model, rows) for m in ("am", "pc")}
    best = {"am": np.inf, "pc": np.inf}
    for _ in range(15):  # interleaved, best of many, to suppress scheduler noise
        for m in ("am", "pc"):
            best[m] = min(best[m], marches[m]())
    saving = 1.0 - best["pc"] / best["am"]
    print(f"per-step time am {best['am'] * 1e6:.1f} us, pc {best['pc'] * 1e6:.1f} us, saving {saving:.1%}")
    assert saving >= 0.25


# -- migration ------------------------------------------------------------------------------------
MIG_WAVELET = SourceWavelet(t0=0.0, delta=4.0, f0=3.0)


@pytest.mark.criterion("migration")
@pytest.mark.parametrize("depth", [200.0, 375.0])
def test_flat_reflector_depth(depth):
    nx, nz, h_x, h_z, dt = 61, 201, 10.0, 2.5, 2e-3
    section = flat_reflector_section(nx, 1501, dt, depth, 500.0, MIG_WAVELET)
    res = migrate(section, dt, constant_model(nx, nz, h_x, h_z, 500.0), 60.0, 300)
    assert abs(envelope_peak_depth(res.image[nx // 2], h_z) - depth) <= 2 * h_z


@pytest.mark.criterion("migration")
@pytest.mark.parametrize("passes, completes", [(0, False), (1, True)])
def test_discontinuous_model_needs_smoothing(passes, completes):
    nx, nz, h_x, h_z, dt = 61, 201, 10.0, 2.5, 2e-3
    model = two_layer_model(nx, nz, h_x, h_z, 500.0, 4000.0, 250.0)
    section = flat_reflector_section(nx, 1501, dt, 250.0, 500.0, MIG_WAVELET)
    if completes:
        res = migrate(section, dt, model, 60.0, 300, smoothing_passes=passes)
        assert np.all(np.isfinite(res.image))
    else:
        with pytest.raises(InstabilityError):
            migrate(section, dt, model, 60.0, 300, smoothing_passes=passes)
