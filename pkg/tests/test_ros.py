import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from legitgxe import (DIATHESIS_STRESS, DIFFERENTIAL_SUSCEPTIBILITY, NO_EVIDENCE,
                      VANTAGE_SENSITIVITY, GxEDataset, RoSResult, classify_ros, default_alpha,
                      fit_legit, ols_fit, regions_of_significance, ros_bounds, simple_slope,
                      student_t_quantile)
from legitgxe.legit import LegitModel
from legitgxe.ros import ros_df
from legitgxe.simulation import Scenario, generate_dataset
from legitgxe.stats_core import OlsFit

from conftest import make_data


def synthetic_model(bg, beg, V, n=1000):
    """Standard-form model with chosen slope coefficients and their covariance."""
    cov = np.eye(4) * 1e-3
    cov[2:, 2:] = V
    fit = OlsFit(np.array([0.0, 0.0, bg, beg]), cov, 1.0, 0.5, -100.0, n, 4, float(n - 4))
    return LegitModel(0.0, 0.0, bg, beg, np.ones(1), np.ones(1), None, "none", False,
                      np.zeros(0), fit, 4, 1, True, (0.5,))


def grid_scan(model, alpha, lo, hi, step=1e-4):
    """Significant / not-significant transitions of the simple slope along a grid."""
    V = model.coefficient_covariance()
    t = student_t_quantile(1 - alpha / 2, ros_df(model))
    e = np.arange(lo, hi + step / 2, step)
    slope = model.beta_g + model.beta_eg * e
    var = V[0, 0] + e**2 * V[1, 1] + 2 * e * V[0, 1]
    sig = np.abs(slope / np.sqrt(var)) >= t
    flips = np.nonzero(sig[1:] != sig[:-1])[0]
    return e, sig, [0.5 * (e[i] + e[i + 1]) for i in flips]


# -- simple slopes ----------------------------------------------------------------

def test_simple_slope_at_zero_and_crossover():
    m = fit_legit(make_data(n=400, seed=1))
    s0 = simple_slope(m, 0.0)
    assert s0.slope == pytest.approx(m.beta_g)
    assert s0.variance == pytest.approx(m.coefficient_covariance()[0, 0])
    c = -m.beta_g / m.beta_eg
    assert simple_slope(m, c).slope == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("e0", [-0.5, 0.0, 0.3, 0.8, 2.0])
def test_simple_slope_recentering_oracle(e0):
    d = make_data(n=400, seed=2)
    m = fit_legit(d)
    g, e = d.genes[:, 0], d.environments[:, 0] - e0
    ref = ols_fit(np.column_stack([np.ones(d.n), e, g, e * g]), d.outcome)
    t_ref = ref.coefficients[2] / ref.standard_errors[2]
    assert simple_slope(m, e0).t_stat == pytest.approx(t_ref, abs=1e-8)


def test_simple_slope_rejects_crossover_form():
    d = make_data(n=200)
    with pytest.raises(ValueError):
        simple_slope(fit_legit(d, "free"), 0.5)


def test_non_positive_variance_names_covariance():
    m = synthetic_model(1.0, 1.0, np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ValueError, match="covariance"):
        simple_slope(m, -1.0)


# -- bounds against a grid scan -------------------------------------------------

@pytest.mark.parametrize("bg, beg, V", [
    (-1.0, 2.0, [[0.04, -0.01], [-0.01, 0.09]]),
    (0.3, -1.5, [[0.02, 0.0], [0.0, 0.05]]),
    (0.1, 0.8, [[0.01, -0.015], [-0.015, 0.04]]),
])
def test_bounds_match_grid_scan(bg, beg, V):
    m = synthetic_model(bg, beg, np.array(V))
    res = ros_bounds(m, 0.05)
    _, _, flips = grid_scan(m, 0.05, -2.0, 2.0)
    found = [b for b in (res.lower, res.upper) if b is not None and -2 <= b <= 2]
    assert len(found) == len(flips)
    for b, f in zip(sorted(found), flips):
        assert abs(b - f) <= 1e-4


def test_pure_noise_has_no_bounds():
    m = synthetic_model(0.01, -0.02, np.array([[1.0, 0.1], [0.1, 2.0]]))
    res = ros_bounds(m, 0.05)
    assert res.lower is None and res.upper is None
    assert res.region == "nowhere"


def test_linear_boundary_case():
    # beta_eg^2 == t^2 Var(beta_eg): the quadratic degenerates to a line
    t = student_t_quantile(0.975, 996)
    beg = 1.0
    m = synthetic_model(0.5, beg, np.array([[0.04, 0.0], [0.0, (beg / t) ** 2]]))
    res = ros_bounds(m, 0.05)
    bound = res.lower if res.lower is not None else res.upper
    _, _, flips = grid_scan(m, 0.05, -3.0, 3.0)
    assert len(flips) == 1
    assert abs(bound - flips[0]) <= 1e-4


def test_inside_region_has_no_bounds():
    # tiny interaction with huge variance: significant only near the peak
    m = synthetic_model(2.0, 0.1, np.array([[0.05, 0.0], [0.0, 10.0]]))
    res = ros_bounds(m, 0.05)
    assert res.region == "inside"
    assert res.lower is None and res.upper is None
    r1, r2 = res.roots
    t = res.t_crit
    assert abs(simple_slope(m, 0.5 * (r1 + r2)).t_stat) >= t
    assert abs(simple_slope(m, r2 + 1.0).t_stat) < t
    assert classify_ros(res, (r1 - 1, r2 + 1)) == NO_EVIDENCE


def test_no_interaction_to_probe():
    m = synthetic_model(1.0, 0.0, np.array([[0.1, 0.0], [0.0, 0.0]]))
    with pytest.raises(ValueError, match="no interaction"):
        ros_bounds(m, 0.05)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1])
def test_alpha_domain(alpha):
    with pytest.raises(ValueError):
        ros_bounds(synthetic_model(1, 1, np.eye(2) * 0.01), alpha)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), u=st.floats(0.0, 1.0))
def test_significance_partition(seed, u):
    m = fit_legit(make_data(n=300, seed=seed, beta=(3.0, 1.0, -1.0, 2.0)))
    res = ros_bounds(m, 0.05)
    if res.region != "outside" or res.lower is None or res.upper is None:
        return
    L, U, t = res.lower, res.upper, res.t_crit
    inside = L + u * (U - L)
    if L + 1e-9 < inside < U - 1e-9:
        assert abs(simple_slope(m, inside).t_stat) < t
    assert abs(simple_slope(m, L - 1e-3 - u).t_stat) >= t
    assert abs(simple_slope(m, U + 1e-3 + u).t_stat) >= t


def test_gene_recoding_invariance():
    d = make_data(n=500, seed=3, beta=(3.0, 1.0, -1.0, 2.0))
    flipped = GxEDataset(d.outcome, 1.0 - d.genes, d.environments)
    a = ros_bounds(fit_legit(d), 0.05)
    b = ros_bounds(fit_legit(flipped), 0.05)
    assert a.lower == pytest.approx(b.lower, abs=1e-8)
    assert a.upper == pytest.approx(b.upper, abs=1e-8)


def test_smaller_alpha_widens_gap():
    m = fit_legit(make_data(n=800, seed=4, beta=(3.0, 1.0, -1.0, 2.0)))
    prev = ros_bounds(m, 0.10)
    for alpha in (0.05, 0.01, 1e-3):
        cur = ros_bounds(m, alpha)
        if cur.lower is None or cur.upper is None:
            break
        assert cur.lower <= prev.lower and cur.upper >= prev.upper
        prev = cur


def test_df_conventions():
    m = fit_legit(make_data(n=100))
    assert ros_df(m) == 96
    assert ros_df(m, "reduced") == 95
    with pytest.raises(ValueError):
        ros_df(m, "other")
    a = regions_of_significance(m, np.ones((100, 1)) * 0.5, 0.05, "residual")
    b = regions_of_significance(m, np.ones((100, 1)) * 0.5, 0.05, "reduced")
    assert b.t_crit > a.t_crit


# -- labelling ----------------------------------------------------------------------

def _bounds(L, U):
    return RoSResult(L, U, 0.05, 100, 1.98, "outside")


@pytest.mark.parametrize("L, U, label", [
    (0.2, 0.8, DIFFERENTIAL_SUSCEPTIBILITY),
    (0.3, 1.7, DIATHESIS_STRESS),
    (-0.5, 0.6, VANTAGE_SENSITIVITY),
    (-0.5, 1.6, NO_EVIDENCE),
    (None, None, NO_EVIDENCE),
    (0.0, 1.0, DIFFERENTIAL_SUSCEPTIBILITY),  # closed range
])
def test_classify_ros_rules(L, U, label):
    assert classify_ros(_bounds(L, U), (0.0, 1.0)) == label


def test_default_alpha():
    assert default_alpha(1, 1) == 0.05
    assert default_alpha(4, 3) == 1e-4
    assert default_alpha(1, 3) == 1e-4
    with pytest.raises(ValueError):
        default_alpha(0, 1)


def test_multi_default_and_override():
    d = make_data(n=400, k=4, s=3, seed=5)
    m = fit_legit(d)
    assert regions_of_significance(m, d.environments).alpha == 1e-4
    assert regions_of_significance(m, d.environments, alpha=0.05).alpha == 0.05


def test_strong_ds_bounds_inside_unit_interval():
    sc = Scenario(1, 1, 2000, 2.0, 0.5, "large", "ds_strong")
    hits = 0
    for r in range(100):
        d, _ = generate_dataset(sc, np.random.SeedSequence([11, r]))
        res = regions_of_significance(fit_legit(d), d.environments)
        hits += res.lower is not None and res.upper is not None and 0 <= res.lower and res.upper <= 1
    assert hits >= 90
