import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magicqpt import criticality as cr
from magicqpt.errors import (
    EdgeExtremumError,
    InvalidArgumentError,
    NumericalError,
    SweepError,
    UnreliableFitError,
)


def _series(x, y, **kw):
    return cr.SweepResult("tannni", 8, "m2_tilde_two_site", "gamma/j1", x, y, **kw)


# -- grids and sweep results ------------------------------------------------

def test_grid_points_and_spacing():
    g = cr.Grid(-1, 1, 400)
    x = g.points()
    assert x.size == 401 and x[0] == -1 and x[-1] == 1 and x[200] == 0
    assert np.array_equal(x, -x[::-1])
    assert g.h == pytest.approx(0.005)
    assert cr.Grid.with_spacing(0.5, 1.5, 0.002).steps == 500


def test_grid_rejects_few_steps():
    with pytest.raises(InvalidArgumentError):
        cr.Grid(0, 1, 7)
    with pytest.raises(InvalidArgumentError):
        cr.Grid(1, 0, 10)


def test_sweep_result_invariants():
    with pytest.raises(InvalidArgumentError):
        _series([0, 1, 3], [0, 0, 0])
    with pytest.raises(InvalidArgumentError):
        _series([0, 2, 1], [0, 0, 0])
    with pytest.raises(NumericalError):
        _series([0, 1, 2], [0, np.nan, 0])


def test_observable_names():
    assert cr.Observable.parse("m2_tilde_one_site") == cr.Observable("m2_tilde", "one_site")
    assert cr.Observable("m2", "two_site").name == "m2_two_site"
    with pytest.raises(InvalidArgumentError):
        cr.Observable.parse("m3_two_site")


def test_model_spec_validation():
    with pytest.raises(InvalidArgumentError):
        cr.ModelSpec("tannni", 24)
    with pytest.raises(InvalidArgumentError):
        cr.ModelSpec("tfim", 8, j2=0.3)
    with pytest.raises(InvalidArgumentError):
        cr.ModelSpec("tannni", 8, j2=0.3, engine="freefermion")
    with pytest.raises(InvalidArgumentError):
        cr.ModelSpec("qcm", 10)
    assert cr.ModelSpec("tfim", 12).resolved_engine == "ed"
    assert cr.ModelSpec("tfim", 24).resolved_engine == "freefermion"
    assert cr.ModelSpec("qcm", 8).resolved_engine == "freefermion"
    assert cr.ModelSpec("qcm", 8).control == "jx/jz"


# -- derivative -------------------------------------------------------------

def test_derivative_quadratic():
    x = np.linspace(0, 1, 101)
    d = cr.central_derivative(_series(x, x**2))
    assert np.max(np.abs(d.y[1:-1] - 2 * x[1:-1])) <= 1e-3
    # the one-sided ends are also exact on a parabola
    assert d.y[0] == pytest.approx(0, abs=1e-10) and d.y[-1] == pytest.approx(2, abs=1e-10)
    assert d.derivative and d.x.size == x.size


def test_derivative_constant():
    d = cr.central_derivative(_series(np.linspace(0, 1, 11), np.full(11, 3.0)))
    assert np.allclose(d.y, 0)


def test_derivative_sine():
    x = np.arange(0, 3.0 + 1e-9, 0.01)
    d = cr.central_derivative(_series(x, np.sin(x)))
    assert np.max(np.abs(d.y[1:-1] - np.cos(x[1:-1]))) <= 2e-5


def test_derivative_needs_three_points():
    with pytest.raises(InvalidArgumentError):
        cr.central_derivative(_series([0, 1], [0, 1]))


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_derivative_exact_on_parabolas(a, b, c):
    x = np.linspace(-1, 2, 31)
    d = cr.central_derivative(_series(x, a * x**2 + b * x + c))
    assert np.allclose(d.y, 2 * a * x + b, atol=1e-9 * (1 + abs(a) + abs(b)))


# -- extremum ---------------------------------------------------------------

def test_extremum_parabola():
    x = np.arange(0, 1.0 + 1e-9, 0.01)
    d = _series(x, -(x - 0.3) ** 2)
    assert cr.locate_extremum(d, "maximum") == pytest.approx(0.3, abs=1e-6)
    d = _series(x, (x - 0.4037) ** 2)
    assert cr.locate_extremum(d, "minimum") == pytest.approx(0.4037, abs=1e-9)


def test_extremum_window_selects_second_peak():
    x = np.linspace(0, 2, 401)
    y = np.exp(-((x - 0.5) / 0.1) ** 2) + 0.6 * np.exp(-((x - 1.4) / 0.1) ** 2)
    d = _series(x, y)
    assert cr.locate_extremum(d, "maximum") == pytest.approx(0.5, abs=1e-3)
    assert cr.locate_extremum(d, "maximum", (1.0, 2.0)) == pytest.approx(1.4, abs=1e-3)


def test_extremum_errors():
    x = np.linspace(0, 1, 21)
    with pytest.raises(EdgeExtremumError):
        cr.locate_extremum(_series(x, x), "maximum")
    with pytest.raises(InvalidArgumentError):
        cr.locate_extremum(_series(x, x), "maximum", (0.5, 0.55))
    with pytest.raises(InvalidArgumentError):
        cr.locate_extremum(_series(x, x), "peak")


# -- finite-size scaling ----------------------------------------------------

SIZES = (8, 10, 12, 14, 16)


def _synthetic(c=0.3, a=1.7, b=1.2):
    return [(n, c + a * n**-b) for n in SIZES]


def test_known_c_fit():
    fit = cr.fss_fit(_synthetic(), c=0.3)
    assert fit.slope == pytest.approx(-1.2, abs=1e-6)
    assert fit.r_squared >= 1 - 1e-10
    assert fit.mode == "known_c" and fit.sizes == SIZES


def test_estimated_c_fit():
    fit = cr.fss_fit(_synthetic())
    assert fit.c_star == pytest.approx(0.3, abs=1e-3)
    assert fit.mode == "estimated_c"


@given(st.floats(0.05, 0.6), st.floats(0.3, 2.0), st.floats(0.5, 2.0), st.booleans())
def test_estimated_recovers_generator(c, a, b, from_below):
    pts = [(n, c + (-1 if from_below else 1) * a * n**-b) for n in SIZES]
    fit = cr.fss_fit(pts)
    spacing = 0.005
    assert abs(fit.c_star - c) <= spacing


def test_fit_errors():
    with pytest.raises(UnreliableFitError):
        cr.fss_fit([(8, 0.35), (10, 0.28), (12, 0.31)], c=0.3)
    with pytest.raises(InvalidArgumentError):
        cr.fss_fit([(8, 0.35), (10, 0.3), (12, 0.31)], c=0.3)
    with pytest.raises(InvalidArgumentError):
        cr.fss_fit([(8, 0.35), (10, 0.32)], c=0.3)
    with pytest.raises(InvalidArgumentError):
        cr.fss_fit([(8, 0.35), (10, 0.30), (12, 0.31)])
    with pytest.raises(InvalidArgumentError):
        cr.fss_fit(_synthetic(), bracket=(0.2, 0.2))


# -- sweeps -----------------------------------------------------------------

def test_sweep_is_deterministic_and_symmetric():
    spec = cr.ModelSpec("tannni", 8, j2=0.5)
    a = cr.sweep(spec, cr.Grid(-1, 1, 20), "m2_tilde_two_site", workers=1)
    b = cr.sweep(spec, cr.Grid(-1, 1, 20), "m2_tilde_two_site", workers=1)
    assert np.array_equal(a.y, b.y)
    assert np.max(np.abs(a.y - a.y[::-1])) <= 1e-8
    d = cr.central_derivative(a)
    assert np.max(np.abs(d.y + d.y[::-1])) <= 1e-8


def test_zero_field_guard():
    spec = cr.ModelSpec("tannni", 8, j2=0.8)
    with pytest.raises(InvalidArgumentError):
        cr.sweep(spec, cr.Grid(0, 1, 10), workers=1)
    s = cr.sweep(spec, cr.Grid(0, 1, 10), workers=1, allow_zero=True)
    assert np.all(np.isfinite(s.y))


def test_zero_field_is_continuous_at_multicritical_point():
    spec = cr.ModelSpec("tannni", 12, j2=0.5)
    obs = [cr.Observable()]
    at0 = cr.evaluate_point(spec, 0.0, obs)[0]
    near = cr.evaluate_point(spec, 1e-3, obs)[0]
    assert abs(at0 - near) < 2e-3


def test_workers_match_serial():
    spec = cr.ModelSpec("tannni", 8, j2=0.3)
    grid = cr.Grid(0.1, 1.0, 9)
    a = cr.sweep_many(spec, grid, ["m2_two_site", "m2_tilde_one_site"], workers=1)
    b = cr.sweep_many(spec, grid, ["m2_two_site", "m2_tilde_one_site"], workers=2)
    for k in a:
        assert np.array_equal(a[k].y, b[k].y)


def test_sweep_failure_reports_x():
    spec = cr.ModelSpec("tannni", 12, j2=0.5, tol=1e-14, max_iter=3)
    with pytest.raises(SweepError) as info:
        cr.sweep(spec, cr.Grid(0.2, 0.6, 8), workers=1)
    assert info.value.x == pytest.approx(0.2)


def test_ed_and_free_fermion_agree_for_tfim():
    obs = ["m2_tilde_two_site", "m2_tilde_one_site"]
    grid = cr.Grid(0.5, 2.0, 10)
    ed = cr.sweep_many(cr.ModelSpec("tfim", 10, engine="ed"), grid, obs, workers=1)
    fr = cr.sweep_many(cr.ModelSpec("tfim", 10, engine="freefermion"), grid, obs, workers=1)
    for k in obs:
        assert np.max(np.abs(ed[k].y - fr[k].y)) <= 1e-8


def test_tfim_large_vs_small_gapped():
    grid = cr.Grid(2.0, 2.08, 8)
    big = cr.sweep(cr.ModelSpec("tfim", 400), grid, workers=1)
    small = cr.sweep(cr.ModelSpec("tfim", 12, engine="ed"), grid, workers=1)
    assert np.max(np.abs(big.y - small.y)) <= 1e-3


def test_batch_sweeps():
    out = cr.batch_sweeps(cr.ModelSpec("tannni", 8), [0.2, 0.8], cr.Grid(0.1, 1, 9),
                          ["m2_two_site"], workers=1)
    assert set(out) == {0.2, 0.8}
    with pytest.raises(InvalidArgumentError):
        cr.batch_sweeps(cr.ModelSpec("qcm", 8), [0.2], cr.Grid(0.1, 1, 9), ["m2_two_site"])


def test_finite_size_points():
    pts = cr.finite_size_points(cr.ModelSpec("tannni", 8, j2=0.2), (8, 10), cr.Grid(0.3, 0.9, 60),
                                "m2_tilde_two_site", "maximum", workers=1)
    assert [n for n, _ in pts] == [8, 10]
    assert all(0.3 < c < 0.9 for _, c in pts)


def test_refinement_consistency():
    spec = cr.ModelSpec("tannni", 8, j2=0.2)
    # default ED spacing and its half
    coarse = cr.sweep(spec, cr.Grid.with_spacing(0.4, 0.7, cr.ED_GRID_STEP), workers=1)
    fine = cr.sweep(spec, cr.Grid.with_spacing(0.4, 0.7, cr.ED_GRID_STEP / 2), workers=1)
    a = cr.locate_extremum(cr.central_derivative(coarse), "maximum")
    b = cr.locate_extremum(cr.central_derivative(fine), "maximum")
    assert abs(a - b) < 1e-4


# -- CSV --------------------------------------------------------------------

def test_csv_round_trip(tmp_path):
    spec = cr.ModelSpec("tannni", 8, j2=0.4)
    s = cr.sweep(spec, cr.Grid(0.1, 1.0, 9), workers=1)
    path = tmp_path / "s.csv"
    cr.write_sweep_csv(s, path)
    text = path.read_text()
    assert text.splitlines()[0] == "# model,n_sites,observable,control"
    assert text.splitlines()[1] == "# tannni,8,m2_tilde_two_site,gamma/j1"
    assert "timestamp" not in text and "# j2=0.4" in text
    back = cr.read_sweep_csv(path)
    assert np.array_equal(back.x, s.x) and np.array_equal(back.y, s.y)
    assert back.metadata["n_sites"] == 8
    d = cr.central_derivative(s)
    dpath = cr.derivative_path(str(path))
    assert dpath.endswith("s.deriv.csv")
    cr.write_sweep_csv(d, dpath)
    assert cr.read_sweep_csv(dpath).derivative


def test_fss_csv(tmp_path):
    fit = cr.fss_fit(_synthetic(), c=0.3)
    path = tmp_path / "f.csv"
    path.write_text(cr.format_fss_csv(fit, {"j2": 0.8}))
    text = path.read_text()
    assert "N,C_N" in text and "c_star,slope,r2" in text
    back = cr.read_fss_csv(path)
    assert back["points"][0][0] == 8 and back["c_star"] == 0.3 and back["mode"] == "known_c"


def test_read_rejects_foreign(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(InvalidArgumentError):
        cr.read_sweep_csv(p)
    with pytest.raises(InvalidArgumentError):
        cr.read_fss_csv(p)
