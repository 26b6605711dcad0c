"""Doubling limits, defect series, and benchmark bounds for act models."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nearrep.core import (
    BoundViolated,
    CESUtility,
    HypothesisFailed,
    LinearPlusBounded,
    MaxminExpected,
    NotAdditive,
    SmoothAmbiguity,
    SubjectiveExpected,
)
from nearrep.uncertainty import (
    BoxSampler,
    ce_utility,
    dyadic_phi_series,
    extract_prior,
    homog_limit,
    hyers_ulam_limit,
    measure_eps_ua,
    measure_homog_deviation,
    measure_phi,
    quasiconcavify,
    smooth_ambiguity_bound,
    theta_estimate,
    verify_aa_bound,
    verify_homog_bound,
    verify_quasiconcave_bound,
)

SEU = SubjectiveExpected((0.3, 0.7))
MEU = MaxminExpected(((0.3, 0.7), (0.7, 0.3)))
SMOOTH_SQRT = SmoothAmbiguity("sqrt1pz2", ((0.3, 0.7), (0.8, 0.2)), (0.5, 0.5))
SMOOTH_EXP = SmoothAmbiguity("z_minus_exp", ((0.3, 0.7), (0.8, 0.2)), (0.5, 0.5))
ALL_MODELS = [SEU, MEU, SMOOTH_SQRT, SMOOTH_EXP,
              CESUtility((0.4, 0.6), 0.5),
              LinearPlusBounded((0.3, 0.7), 0.5)]


# --- certainty equivalents ---------------------------------------------------

def test_ce_constant_acts_exact():
    for model in ALL_MODELS:
        for c in (0.0, 1.0, 7.5, 1000.0):
            x = np.full(2, c)
            assert ce_utility(model, x) == c


def test_ce_seu_is_prior_dot():
    x = np.array([2.0, 5.0])
    assert ce_utility(SEU, x) == pytest.approx(0.3 * 2 + 0.7 * 5, abs=1e-12)


def test_ce_meu_takes_worst_prior():
    x = np.array([1.0, 0.0])
    assert ce_utility(MEU, x) == pytest.approx(0.3, abs=1e-12)


def test_ce_smooth_sqrt_frozen():
    # mean of sqrt(1 + (p_k . x)^2) mapped back through the transform
    got = ce_utility(SMOOTH_SQRT, np.array([10.0, 0.0]))
    assert got == pytest.approx(5.522458581463691, abs=1e-9)


def test_smooth_raw_closed_form_on_constants():
    # raw z_minus_exp functional at c * ones is c - e^{-c}
    for c in (0.5, 1.0, 3.0):
        raw = SMOOTH_EXP.raw_value(np.full(2, c))
        assert raw == pytest.approx(c - math.exp(-c), abs=1e-12)


# --- midpoint defect and dyadic series ---------------------------------------

def test_phi_seu_vanishes():
    x, y = np.array([1.0, 4.0]), np.array([3.0, 2.0])
    assert measure_phi(SEU, x, y) <= 1e-12


def test_phi_meu_unit_vectors():
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    # midpoint is the constant 0.5 but each arm is worth 0.3
    assert measure_phi(MEU, e1, e2) == pytest.approx(0.2, abs=1e-12)


def test_dyadic_series_meu_partial_sums_grow_linearly():
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    partials, converged = dyadic_phi_series(MEU, e1, e2, n_max=20)
    assert not converged
    for n, s in enumerate(partials):
        assert s == pytest.approx(0.2 * (n + 1), abs=1e-9)


def test_theta_estimate_seu_converges_to_zero():
    rep, converged = theta_estimate(SEU, BoxSampler(2, resolution=5, n_random_pairs=20))
    assert converged
    assert rep.value <= 1e-9


def test_theta_estimate_meu_divergent():
    rep, converged = theta_estimate(MEU, BoxSampler(2, resolution=5, n_random_pairs=20))
    assert not converged
    assert rep.value > 0.1


# --- doubling limits ----------------------------------------------------------

def test_hyers_seu_trivial():
    x = np.array([2.0, 5.0])
    res = hyers_ulam_limit(SEU, x)
    assert res.value == pytest.approx(ce_utility(SEU, x), abs=1e-12)


def test_hyers_meu_iterates_constant():
    # positively homogeneous value: every iterate equals the value itself
    x = np.array([2.0, 1.0])
    res = hyers_ulam_limit(MEU, x)
    assert res.value == ce_utility(MEU, x)
    assert all(it == res.value for it in res.iterates)


def test_hyers_smooth_sqrt_frozen_limit():
    res = hyers_ulam_limit(SMOOTH_SQRT, np.array([2.0, 1.0]))
    assert res.value == pytest.approx(1.55, abs=1e-6)
    assert res.tail_bound <= 1e-8


def test_hyers_induction_inequality():
    # |2^-n u(2^n x) - u(x)| <= sum_{i=1..n} 2^{-(i-1)} phi(2^i x, 0)
    model = SMOOTH_EXP
    x = np.array([1.5, 0.5])
    u = lambda z: ce_utility(model, z)
    base = u(x)
    bound = 0.0
    for n in range(1, 21):
        bound += 2.0 ** -(n - 1) * measure_phi(model, (2.0 ** n) * x, np.zeros(2))
        iterate = u((2.0 ** n) * x) / 2.0 ** n
        assert abs(iterate - base) <= bound + 1e-9


# --- prior extraction and the linear bound ------------------------------------

def test_extract_prior_seu_exact():
    bench = extract_prior(SEU)
    assert bench.prior == pytest.approx((0.3, 0.7), abs=1e-12)


@pytest.mark.parametrize("model", [SMOOTH_SQRT, SMOOTH_EXP])
def test_extract_prior_smooth_recovers_mean(model):
    bench = extract_prior(model)
    assert bench.prior == pytest.approx((0.55, 0.45), abs=1e-6)


def test_extract_prior_meu_not_additive():
    with pytest.raises(NotAdditive) as exc:
        extract_prior(MEU)
    witness = exc.value.witness
    assert witness["coordinate_sum"] == pytest.approx(0.6, abs=1e-9)
    assert witness["sure_value"] == pytest.approx(1.0, abs=1e-12)


def test_verify_aa_seu_zero_distance():
    sampler = BoxSampler(2, resolution=5, n_random_pairs=10)
    rep_theta, converged = theta_estimate(SEU, sampler)
    bench = extract_prior(SEU)
    near = verify_aa_bound(SEU, bench, rep_theta.value, sampler, converged=converged)
    assert near.achieved_distance <= 1e-9


def test_verify_aa_smooth_passes():
    sampler = BoxSampler(2, resolution=5, n_random_pairs=10)
    rep_theta, converged = theta_estimate(SMOOTH_SQRT, sampler)
    assert converged
    bench = extract_prior(SMOOTH_SQRT)
    near = verify_aa_bound(SMOOTH_SQRT, bench, rep_theta.value, sampler,
                           converged=converged)
    assert near.achieved_distance <= near.bound + 1e-6


def test_verify_aa_divergent_rejected():
    bench = extract_prior(SEU)
    with pytest.raises(HypothesisFailed):
        verify_aa_bound(SEU, bench, 1.0, BoxSampler(2, resolution=3),
                        converged=False)


# --- smooth ambiguity uniform cap ---------------------------------------------

@pytest.mark.parametrize("model", [SMOOTH_SQRT, SMOOTH_EXP])
def test_smooth_bound_sup_is_one_at_zero(model):
    sampler = BoxSampler(2, bound=10.0, resolution=21)
    rep, (header, rows) = smooth_ambiguity_bound(model, sampler)
    assert rep.achieved_distance == pytest.approx(1.0, abs=1e-9)
    assert rep.bound == 1.0
    assert rep.details["defect_at_zero"] == pytest.approx(1.0, abs=1e-9)
    assert rep.details["identity_gap"] <= 1e-12
    assert header[-1] == "closed_form_defect"
    assert len(rows) == len(sampler.points())


def test_smooth_defect_zme_frozen_point():
    # defect at x = (2, 1) is the mixed exponential 0.5 (e^{-1.3} + e^{-1.8})
    pt = np.array([2.0, 1.0])
    raw = SMOOTH_EXP.raw_value(pt)
    linear = 0.55 * 2.0 + 0.45 * 1.0
    assert linear - raw == pytest.approx(0.21891534062779955, abs=1e-12)


# --- homogeneity ---------------------------------------------------------------

def test_homog_deviation_meu_zero():
    assert measure_homog_deviation(MEU, np.array([2.0, 1.0]), 2.0) <= 1e-12


def test_homog_deviation_raw_zme_closed_form():
    # raw functional at ones: dev = |lam u(x) - u(lam x)| with u(c1) = c - e^-c
    lam, c = 2.0, 1.0
    u = lambda cc: cc - math.exp(-cc)
    expected = abs(lam * u(c) - u(lam * c))
    assert expected == pytest.approx(0.6004235991062719, abs=1e-12)
    raw_dev = abs(lam * SMOOTH_EXP.raw_value(np.ones(2))
                  - SMOOTH_EXP.raw_value(lam * np.ones(2)))
    assert raw_dev == pytest.approx(expected, abs=1e-12)


def test_homog_limit_meu_is_value():
    x = np.array([2.0, 1.0])
    res = homog_limit(MEU, x)
    assert res.value == ce_utility(MEU, x)
    assert res.theta <= 1e-12


def test_homog_limit_smooth_matches_doubling_limit():
    x = np.array([2.0, 1.0])
    res = homog_limit(SMOOTH_SQRT, x, eta=2.0)
    dbl = hyers_ulam_limit(SMOOTH_SQRT, x)
    assert res.value == pytest.approx(dbl.value, abs=1e-6)
    assert res.value == pytest.approx(0.55 * 2.0 + 0.45 * 1.0, abs=1e-6)


@pytest.mark.parametrize("model", [MEU, SMOOTH_SQRT, LinearPlusBounded((0.3, 0.7), 0.5)])
def test_verify_homog_bound(model):
    sampler = BoxSampler(2, resolution=5, n_random_pairs=0)
    near = verify_homog_bound(model, sampler)
    assert near.achieved_distance <= near.bound + 1e-6
    assert near.details["homogeneity_defect"] <= 1e-6


def test_homog_theta_respects_geometric_envelope():
    # single-step deviations cap the scaled series: theta <= sup dev / (eta - 1)
    model = LinearPlusBounded((0.3, 0.7), 0.5)
    x = np.array([1.0, 2.0])
    res = homog_limit(model, x, eta=2.0)
    worst = 0.0
    probe = x.copy()
    for _ in range(20):
        worst = max(worst, measure_homog_deviation(model, probe, 2.0))
        probe = probe * 2.0
    assert res.theta <= worst / (2.0 - 1.0) + 1e-9


def test_homogeneity_of_limit_irrational_scale():
    model = SMOOTH_SQRT
    x = np.array([2.0, 1.0])
    res = homog_limit(model, x)
    scaled = homog_limit(model, math.sqrt(2.0) * x)
    assert scaled.value == pytest.approx(math.sqrt(2.0) * res.value, abs=1e-6)


# --- quasi-concave envelope ------------------------------------------------------

def test_eps_ua_meu_zero():
    sampler = BoxSampler(2, resolution=5, n_random_pairs=30)
    rep = measure_eps_ua(MEU, sampler)
    assert rep.value <= 1e-9


def test_eps_ua_same_point_zero_defect():
    sampler = BoxSampler(2, resolution=3, n_random_pairs=0)
    x = np.array([2.0, 3.0])
    rep = measure_eps_ua(MEU, sampler, extra_probes=[(np.array([x, x]),
                                                      np.array([0.5, 0.5]))])
    assert rep.value <= 1e-9


def test_quasiconcavify_meu_envelope_equals_model():
    env = quasiconcavify(MEU, box_bound=10.0, resolution=11)
    assert np.max(np.abs(env.v_values - env.u_values)) == 0.0
    rep = verify_quasiconcave_bound(MEU, env, 1e-9)
    assert rep.achieved_distance == 0.0


def test_quasiconcavify_smooth_bound_holds():
    env = quasiconcavify(SMOOTH_SQRT, box_bound=10.0, resolution=11)
    assert np.all(env.v_values >= env.u_values)
    sampler = BoxSampler(2, bound=10.0, resolution=11, n_random_pairs=50)
    ua = measure_eps_ua(SMOOTH_SQRT, sampler, extra_probes=env.probes)
    rep = verify_quasiconcave_bound(SMOOTH_SQRT, env, ua.value)
    assert rep.achieved_distance <= rep.bound + rep.details["slack"]
    assert rep.details["qc_worst_shortfall"] <= 1e-9


def test_envelope_midpoint_never_below_level():
    # v is quasi-concave up to one level spacing by construction
    env = quasiconcavify(SMOOTH_SQRT, box_bound=10.0, resolution=9)
    pts = env.points
    rng = np.random.default_rng(3)
    for _ in range(25):
        i, j = rng.integers(0, len(pts), size=2)
        m = 0.5 * (pts[i] + pts[j])
        vm = env.evaluate(m)
        assert vm >= min(env.v_values[i], env.v_values[j]) - env.level_spacing - 1e-9


def test_ce_monotone_in_payoffs():
    for model in ALL_MODELS:
        lo = ce_utility(model, np.array([1.0, 2.0]))
        hi = ce_utility(model, np.array([1.5, 2.5]))
        assert hi >= lo - 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 8.0), st.floats(0.0, 8.0), st.floats(0.0, 8.0),
       st.floats(0.0, 8.0))
def test_meu_value_is_min_of_priors(a, b, c, d):
    x = np.array([a, b])
    y = np.array([c, d])
    for z in (x, y, 0.5 * (x + y)):
        direct = min(0.3 * z[0] + 0.7 * z[1], 0.7 * z[0] + 0.3 * z[1])
        assert MEU.value(z) == pytest.approx(direct, abs=1e-12)
