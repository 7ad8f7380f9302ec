from fractions import Fraction

import numpy as np
import pytest

from laguerre_owwe.experiments import Setup1D, error_table, relative_variation
from laguerre_owwe.laguerre import LaguerreParams, LaguerreSeries
from laguerre_owwe.schemes1d import (
    AB5_WEIGHTS,
    AM5_WEIGHTS,
    AM6_WEIGHTS,
    D4_STENCIL,
    PRESETS,
    TABLE1_SCHEMES,
    InstabilityError,
    Mesh1D,
    SchemeSpec,
    Solution1D,
    energy_profile,
    l2_error,
    solve_1d,
)
from laguerre_owwe.wavelet import SourceWavelet, wavelet_eval

SMALL = Setup1D(
    eta=200.0,
    n_terms=400,
    c=1000.0,
    length=600.0,
    record=1.0,
    dt=5e-4,
    t_eval=0.5,
    wavelet=SourceWavelet(t0=0.1, delta=4.0, f0=10.0),
)


@pytest.fixture(scope="module")
def small_boundary():
    return SMALL.boundary()


# -- wavelet -----------------------------------------------------------------------------
def test_wavelet_examples():
    w = SourceWavelet(t0=0.2, delta=4.0, f0=30.0)
    assert w(0.2) == 0.0
    assert wavelet_eval(w, 0.2 + 1 / 120) == pytest.approx(np.exp(-((np.pi / 2) ** 2) / 16), rel=1e-12)
    assert wavelet_eval(w, 0.2 + 1 / 120) == pytest.approx(0.857, abs=5e-4)
    assert abs(w(0.0)) < 1e-8 * np.max(np.abs(w(np.linspace(0, 0.4, 2001))))


def test_wavelet_validation():
    with pytest.raises(ValueError):
        SourceWavelet(f0=0.0)
    with pytest.raises(ValueError):
        SourceWavelet(delta=-1.0)


# -- coefficients ----------------------------------------------------------------------------
def test_adams_coefficients_are_exact():
    assert [w * 720 for w in AM5_WEIGHTS] == [-19, 106, -264, 646, 251]
    assert [w * 720 for w in AB5_WEIGHTS][::-1] == [1901, -2774, 2616, -1274, 251]
    assert sum(w * 720 for w in AM5_WEIGHTS) == 720
    assert sum(w * 720 for w in AB5_WEIGHTS) == 720
    assert sum(AM6_WEIGHTS) == 1


@pytest.mark.parametrize(
    "weights, last, order",
    [(AM5_WEIGHTS, 1, 5), (AM6_WEIGHTS, 1, 6), (AB5_WEIGHTS, 0, 5)],
)
def test_adams_order_conditions(weights, last, order):
    # integrating a polynomial over [0, 1] from values at offsets last-q+1 .. last
    offsets = range(last - len(weights) + 1, last + 1)
    for q in range(order):
        assert sum(w * Fraction(s) ** q for w, s in zip(weights, offsets)) == Fraction(1, q + 1)


def test_d4_stencil():
    assert [s * 12 for s in D4_STENCIL] == [1, -8, 0, 8, -1]


def test_scheme_spec_validation():
    with pytest.raises(ValueError):
        SchemeSpec("x", "leapfrog")
    with pytest.raises(ValueError):
        SchemeSpec("x", "adams_moulton", (Fraction(1, 2), Fraction(1, 3)))
    with pytest.raises(ValueError):
        SchemeSpec("x", "adams_moulton", AM5_WEIGHTS, filter_degree=5, phi_stencil=D4_STENCIL)
    assert PRESETS["AM5-I5"].stabilizer == "spline_filter(5)"
    assert PRESETS["AM5-D4"].stabilizer == "inconsistent_d4"
    assert PRESETS["CN"].stabilizer == "none"
    assert PRESETS["AM5"].steps_back == 4
    with pytest.raises(ValueError):
        SchemeSpec.preset("AM9")


def test_mesh():
    m = Mesh1D.uniform(7500.0, 2000)
    assert m.n_nodes == 2001 and m.h_x == 3.75
    assert m.x[-1] == pytest.approx(7500.0)
    with pytest.raises(ValueError):
        Mesh1D(0.0, 10)
    with pytest.raises(ValueError):
        Mesh1D(1.0, 1)


# -- solver ------------------------------------------------------------------------------
@pytest.mark.parametrize("name", TABLE1_SCHEMES + ("Forward1", "Backward1", "AM5"))
def test_zero_boundary_gives_zero_solution(name):
    zero = LaguerreSeries(LaguerreParams(100.0, 30), np.zeros(30))
    sol = solve_1d(name, Mesh1D.uniform(100.0, 40), zero, 500.0)
    assert np.all(sol.coeffs == 0)
    assert np.all(energy_profile(sol) == 0)


@pytest.mark.parametrize("name", ["AM5-I5", "AM6-I7", "AM5-D4", "Richardson", "RK4", "CN"])
def test_errors_shrink_under_refinement(name, small_boundary):
    errs = []
    for n in (60, 120, 240):
        mesh = SMALL.mesh(n)
        sol = solve_1d(name, mesh, small_boundary, SMALL.c)
        errs.append(l2_error(sol, SMALL.exact(mesh, small_boundary), SMALL.t_eval))
    assert errs[0] > errs[1] > errs[2]


def test_high_order_schemes_beat_crank_nicolson(small_boundary):
    table = error_table(SMALL, ("AM5-I5", "AM6-I7", "Richardson", "CN"), (240,))
    assert max(table["AM5-I5", 240], table["AM6-I7", 240], table["Richardson", 240]) < 0.02 * table["CN", 240]


@pytest.mark.parametrize("name", ["Forward1", "AM5"])
def test_unstable_schemes_trip_the_alarm(name, small_boundary):
    with pytest.raises(InstabilityError) as err:
        solve_1d(name, SMALL.mesh(120), small_boundary, SMALL.c)
    assert 0 < err.value.m < SMALL.n_terms
    assert err.value.amplitude > err.value.threshold


def test_backward_scheme_is_stable(small_boundary):
    sol = solve_1d("Backward1", SMALL.mesh(120), small_boundary, SMALL.c)
    assert np.max(np.abs(sol.coeffs)) <= 10 * np.max(np.abs(small_boundary.coeffs))
    k = energy_profile(sol)
    assert np.all(np.diff(k) <= 1e-12 * k[0])


def test_sixth_order_inconsistent_stencil_loses_stability(setup1d, boundary1d):
    with pytest.raises(InstabilityError):
        solve_1d("AM5-D6", setup1d.mesh(2000), boundary1d, setup1d.c)
    solve_1d("AM5-D4", setup1d.mesh(2000), boundary1d, setup1d.c)


def test_crank_nicolson_conserves_energy(setup1d, boundary1d):
    sol = solve_1d("CN", setup1d.mesh(1000), boundary1d, setup1d.c)
    assert relative_variation(energy_profile(sol)) < 1e-8


def test_dissipation_ordering(setup1d, boundary1d):
    mesh = setup1d.mesh(1000)
    decay = {}
    for name in ("RK4", "AM5-I5", "Richardson"):
        k = energy_profile(solve_1d(name, mesh, boundary1d, setup1d.c))
        decay[name] = 1.0 - k[-1] / k[0]
    assert decay["RK4"] > decay["AM5-I5"] > decay["Richardson"] > 0


def test_starters_agree(small_boundary):
    mesh = SMALL.mesh(240)
    exact = SMALL.exact(mesh, small_boundary)
    a = l2_error(solve_1d("AM5-I5", mesh, small_boundary, SMALL.c, starter="richardson"), exact, SMALL.t_eval)
    b = l2_error(solve_1d("AM5-I5", mesh, small_boundary, SMALL.c, starter="cn"), exact, SMALL.t_eval)
    assert b == pytest.approx(a, rel=0.5)


def test_store_false_keeps_energy_and_callbacks(small_boundary):
    mesh = SMALL.mesh(60)
    seen = []
    full = solve_1d("CN", mesh, small_boundary, SMALL.c, on_row=lambda m, row: seen.append(m))
    lean = solve_1d("CN", mesh, small_boundary, SMALL.c, store=False)
    assert seen == list(range(SMALL.n_terms))
    assert lean.coeffs.shape == (1, mesh.n_nodes)
    np.testing.assert_allclose(lean.coeffs[0], energy_profile(full), rtol=1e-12)


def test_solver_argument_errors(small_boundary):
    with pytest.raises(ValueError):
        solve_1d("CN", SMALL.mesh(60), small_boundary, -1.0)
    with pytest.raises(ValueError, match="analysis only"):
        solve_1d("AB5", SMALL.mesh(60), small_boundary, SMALL.c)


# -- error norm ------------------------------------------------------------------------------
def test_l2_error_cases(small_boundary):
    mesh = SMALL.mesh(60)
    exact = SMALL.exact(mesh, small_boundary)
    assert l2_error(exact, exact, 0.5) == 0.0
    assert l2_error(exact, exact.field(0.5), 0.5) == 0.0
    with pytest.raises(ValueError):
        l2_error(exact, np.zeros(5), 0.5)
    zero = Solution1D(mesh, exact.params, np.zeros_like(exact.coeffs))
    with pytest.raises(ZeroDivisionError):
        l2_error(exact, zero, 0.5)


def test_field_shape(small_boundary):
    sol = SMALL.exact(SMALL.mesh(60), small_boundary)
    assert sol.field(0.3).shape == (61,)
