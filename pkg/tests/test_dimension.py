"""Lyapunov exponents, pointwise-dimension slopes, and pressure roots."""

import math
import warnings

import numpy as np
import pytest

from thermoform.dimension import (
    ChainOrbit,
    beta_orbit,
    cell_weights,
    conditional_dimension_check,
    entropy_of_induced,
    fiber_cloud,
    gauss_acim_cloud,
    gauss_orbit,
    global_dimension_check,
    gls_return_observable,
    golden_lyapunov,
    hd_limit_set,
    induced_cell_chain,
    joint_cloud,
    local_dimension,
    lyapunov_birkhoff,
    lyapunov_gls_closed_form,
    temperature,
    temperature_sweep,
)
from thermoform.errors import ConfigError, ConvergenceError
from thermoform.gdms import affine_system, gauss_cf
from thermoform.rng import task_rng
from thermoform.shifts import Potential

PHI = (1 + math.sqrt(5)) / 2
W2 = 1 / (1 + PHI**2)
LOG2_OVER_LOG3 = 0.6309297535714574

# integral of -2 log x against the density 1/((1+x) ln 2), frozen from
# scipy.integrate.quad (abserr 8e-13); equals pi^2 / (6 ln 2)
GAUSS_CHI = 2.373138220831253

# root of the two-digit continued-fraction pressure at memory depth 8,
# frozen from the solver's own refinement ladder (the alternating sequence
# over depths 4..10 brackets it; Aitken extrapolation gives 0.53128051)
GAUSS_12_HD_MEM8 = 0.5312842851869067


# --- Lyapunov exponents


def test_beta_map_lyapunov_is_log_beta():
    est = lyapunov_birkhoff(beta_orbit(1.8), n_steps=2000, n_orbits=4, seed=1)
    assert est.value == pytest.approx(math.log(1.8), abs=1e-12)
    assert est.n_steps == 2000 and est.n_orbits == 4


def test_gauss_lyapunov_matches_quadrature():
    est = lyapunov_birkhoff(gauss_orbit(), n_steps=200_000, n_orbits=8, seed=0)
    assert est.value == pytest.approx(GAUSS_CHI, rel=0.01)
    assert est.stderr < 0.01


def test_gauss_lyapunov_deterministic_by_seed():
    a = lyapunov_birkhoff(gauss_orbit(), n_steps=5000, n_orbits=2, seed=4)
    b = lyapunov_birkhoff(gauss_orbit(), n_steps=5000, n_orbits=2, seed=4)
    c = lyapunov_birkhoff(gauss_orbit(), n_steps=5000, n_orbits=2, seed=5)
    assert a.value == b.value
    assert a.value != c.value


def test_golden_closed_form_routes_agree():
    mu, _ = induced_cell_chain(PHI, incidence="golden")
    w = cell_weights(mu)
    assert w[1] == pytest.approx(W2, abs=1e-12)
    general = lyapunov_gls_closed_form(w, PHI)
    special = golden_lyapunov(w[1])
    target = math.log(PHI) * (1 + W2)
    assert general.value == pytest.approx(target, abs=1e-12)
    assert special.value == pytest.approx(target, abs=1e-12)
    assert general.method != special.method


def test_closed_form_accepts_weight_dict():
    mu, _ = induced_cell_chain(PHI, incidence="golden")
    w = cell_weights(mu)
    as_dict = {n + 1: float(w[n]) for n in range(len(w))}
    est = lyapunov_gls_closed_form(as_dict, PHI)
    assert est.value == pytest.approx(math.log(PHI) * (1 + W2), abs=1e-12)


def test_closed_form_rejects_heavy_tail():
    # weights that keep a fifth of the mass past the truncation
    with pytest.raises(ConvergenceError):
        lyapunov_gls_closed_form([0.5, 0.3], 1.8, tail_tol=1e-6)


def test_chain_birkhoff_matches_closed_form():
    mu, part = induced_cell_chain(PHI, incidence="golden")
    closed = lyapunov_gls_closed_form(cell_weights(mu), PHI).value
    est = lyapunov_birkhoff(
        ChainOrbit(mu, gls_return_observable(mu, part)),
        n_steps=50_000, n_orbits=8, seed=2,
    )
    assert est.value == pytest.approx(closed, abs=4 * est.stderr + 1e-3)


def test_entropy_of_induced_golden():
    mu, _ = induced_cell_chain(PHI, incidence="golden")
    assert entropy_of_induced(mu) == pytest.approx(math.log(PHI), abs=1e-12)


def test_induced_chain_weights_sum_to_one():
    for beta, inc in [(PHI, "golden"), (math.pi, None), (1.8, None)]:
        mu, part = induced_cell_chain(beta, incidence=inc)
        w = cell_weights(mu)
        assert w.sum() == pytest.approx(1.0, abs=1e-9)
        assert (w > 0).all()


# --- pointwise dimension


def test_lebesgue_1d_slope():
    pts = task_rng(11).random(40_000)
    est = local_dimension(pts, seed=5)
    assert est.mean == pytest.approx(1.0, abs=0.05)
    assert est.method == "sorted-1d"


def test_lebesgue_2d_slope():
    pts = task_rng(12).random((40_000, 2))
    est = local_dimension(pts, seed=5)
    assert est.mean == pytest.approx(2.0, abs=0.1)
    assert est.method == "kdtree-2d"


def test_cantor_cloud_slope():
    rng = task_rng(13)
    digs = rng.integers(0, 2, size=(60_000, 40)) * 2
    pts = (digs * (3.0 ** -np.arange(1, 41))).sum(axis=1)
    est = local_dimension(pts, seed=6)
    assert est.mean == pytest.approx(LOG2_OVER_LOG3, abs=0.03)


def test_atomic_cloud_short_circuits():
    pts = np.full(500, 0.25)
    est = local_dimension(pts)
    assert est.mean == 0.0
    assert est.method == "degenerate"


def test_local_dimension_guards():
    with pytest.raises(ConfigError):
        local_dimension(task_rng(0).random(40))
    with pytest.raises(ConvergenceError):
        # radii so small that no ball reaches min_count
        local_dimension(task_rng(1).random(5000), j_range=(18, 20))


def test_mean_upper_tracks_mean_on_clean_scaling():
    pts = task_rng(14).random(60_000)
    est = local_dimension(pts, seed=7)
    assert est.mean_upper == pytest.approx(est.mean, abs=0.1)


# --- sampled clouds


def test_gauss_acim_cloud_law():
    pts = gauss_acim_cloud(100_000, seed=3)
    assert ((pts > 0) & (pts < 1)).all()
    # empirical CDF against log2(1+x) at a few anchors
    for x in (0.2, 0.5, 0.8):
        emp = float((pts <= x).mean())
        assert emp == pytest.approx(math.log2(1 + x), abs=0.01)


def test_fiber_cloud_shape_and_determinism():
    mu, part = induced_cell_chain(PHI, incidence="golden")
    a = fiber_cloud(mu, part, 3000, None, 9)
    b = fiber_cloud(mu, part, 3000, None, 9)
    assert a.shape == (3000,)
    assert ((a >= 0) & (a < 1)).all()
    assert (a == b).all()


def test_joint_cloud_shape():
    mu, part = induced_cell_chain(PHI, incidence="golden")
    c = joint_cloud(mu, part, 3000, None, 9)
    assert c.shape == (3000, 2)
    assert ((c >= 0) & (c < 1)).all()


def test_conditional_check_golden():
    rep = conditional_dimension_check(PHI, None, M=60_000, seed=0,
                                      incidence="golden")
    assert rep["target"] == pytest.approx(math.log(PHI) /
                                          (math.log(PHI) * (1 + W2)), abs=1e-12)
    assert rep["relative_error"] < 0.08


def test_global_check_golden():
    rep = global_dimension_check(PHI, None, M=60_000, seed=0, incidence="golden")
    tg = rep["target_global"]
    assert tg == pytest.approx(2 / (1 + W2), abs=1e-12)
    assert abs(rep["global"].mean - tg) / tg < 0.08
    assert abs(rep["additivity_gap"]) < 0.1


# --- pressure roots


@pytest.fixture(scope="module")
def moran():
    return affine_system([(1 / 3, 0.0), (1 / 3, 2 / 3)])


def test_moran_dimension_exact(moran):
    r = temperature(moran, q=0.0)
    assert r.t == pytest.approx(LOG2_OVER_LOG3, abs=1e-12)
    assert r.residual < 1e-12


def test_moran_temperature_family(moran):
    theta = Potential.memory1([math.log(0.5), math.log(0.5)])
    rows = temperature_sweep(moran, theta, [0.0, 0.5, 1.0, 2.0],
                             bracket=(-2.0, 2.0))
    for row in rows:
        expect = (1 - row.q) * LOG2_OVER_LOG3
        assert row.t == pytest.approx(expect, abs=1e-10)


def test_golden_two_branch_dimension_is_one():
    S = affine_system([(1 / PHI, 0.0), (1 / PHI**2, 1 / PHI)])
    assert hd_limit_set(S) == pytest.approx(1.0, abs=1e-12)


def test_temperature_requires_theta_with_q(moran):
    with pytest.raises(ConfigError):
        temperature(moran, q=0.5)


def test_temperature_needs_sign_change(moran):
    with pytest.raises(ConvergenceError):
        temperature(moran, bracket=(1.0, 2.0))


def test_gauss_two_digit_dimension_frozen():
    G = gauss_cf()
    with pytest.warns(UserWarning, match="truncation-dependent"):
        v = hd_limit_set(G, truncation=2, memory=8)
    assert v == pytest.approx(GAUSS_12_HD_MEM8, abs=1e-9)


def test_gauss_two_digit_refinement_alternates():
    G = gauss_cf()
    vals = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for mem in range(4, 9):
            vals.append(hd_limit_set(G, truncation=2, memory=mem))
    steps = np.diff(vals)
    assert all(a * b < 0 for a, b in zip(steps, steps[1:]))
    assert all(abs(b) < abs(a) for a, b in zip(steps, steps[1:]))


def test_countable_system_requires_truncation():
    with pytest.raises(ConfigError):
        hd_limit_set(gauss_cf())
