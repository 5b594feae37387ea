import math

import numpy as np
import pytest

from gcruin import convolutions as co
from gcruin import measures as me
from gcruin import risk as ri
from gcruin import williamson as wi


def max_model(claim=None, premium=None, u=0.5, lam=1.0):
    return ri.RiskModel(co.max_algebra(),
                        claim or me.uniform(0, 1),
                        premium or me.uniform(0, 2),
                        u=u, lam=lam)


def kendall_model(c=1.0, alpha=1.0, u=1.0, lam=1.0):
    return ri.RiskModel(co.kendall(alpha), me.lom_kendall(c, alpha),
                        me.lom_kendall(c, alpha), u=u, lam=lam)


# ---------------------------------------------------------------------------
# claim arrivals
# ---------------------------------------------------------------------------

def test_sample_claim_times_properties():
    times = ri.sample_claim_times(1.0, 10.0, seed=1)
    assert np.all(np.diff(times) > 0)
    assert times[-1] <= 10.0
    np.testing.assert_array_equal(times, ri.sample_claim_times(1.0, 10.0, seed=1))
    assert len(ri.sample_claim_times(1.0, 1e-9, seed=1)) == 0


def test_sample_claim_times_poisson_mean():
    counts = [len(ri.sample_claim_times(1.0, 10.0, seed=s)) for s in range(400)]
    mean = np.mean(counts)
    se = np.std(counts, ddof=1) / math.sqrt(len(counts))
    assert abs(mean - 10.0) <= 3.0 * se


# ---------------------------------------------------------------------------
# max algebra expectations
# ---------------------------------------------------------------------------

def test_expected_claim_side_max_against_quadrature_oracle():
    # uniform(0,1), lam t = 1: integral of x e^{-(1-x)} dx = e^{-1}
    val = ri.expected_claim_side_max(max_model(), 1.0)
    assert val == pytest.approx(math.exp(-1.0), abs=1e-10)
    assert ri.expected_claim_side_max(max_model(), 0.0) == 0.0
    # lam t large: the running maximum saturates at the support end
    assert ri.expected_claim_side_max(max_model(lam=500.0), 1.0) == pytest.approx(1.0, abs=0.01)


def test_expected_claim_side_max_vs_mc():
    val = ri.expected_claim_side_max(max_model(), 1.0)
    mc = ri.mc_poisson_terminal(co.max_algebra(), me.uniform(0, 1), 1.0, 1.0,
                                100_000, seed=4)
    se = mc.std(ddof=1) / math.sqrt(len(mc))
    assert abs(val - mc.mean()) <= 3.0 * se


def test_expected_claim_side_max_rejects_atoms():
    with pytest.raises(me.UnsupportedLawError):
        ri.expected_claim_side_max(max_model(claim=me.point_mass(1.0)), 1.0)


def test_expected_premium_side_max_point_mass_closed_form():
    # premium = delta_a, u < a: value = a(1 - e^{-lt}) + u e^{-lt}
    m = max_model(premium=me.lom_max(2.0), u=0.5, lam=1.0)
    vp = ri.expected_premium_side_max(m, 1.0)
    assert vp.value == pytest.approx(2.0 * (1 - math.exp(-1)) + 0.5 * math.exp(-1), abs=1e-12)
    # u above the premium support: the capital is never exceeded
    m = max_model(premium=me.uniform(0, 2), u=3.0)
    assert ri.expected_premium_side_max(m, 1.0).value == pytest.approx(3.0, abs=1e-10)
    # t -> 0 returns u
    assert ri.expected_premium_side_max(max_model(u=0.5), 0.0).value == pytest.approx(0.5)


def test_expected_premium_side_max_vs_mc():
    m = max_model(u=0.5)
    vp = ri.expected_premium_side_max(m, 1.0)
    mc = ri.mc_poisson_terminal(co.max_algebra(), me.uniform(0, 2), 1.0, 1.0,
                                100_000, seed=6, start=0.5)
    se = mc.std(ddof=1) / math.sqrt(len(mc))
    assert abs(vp.value - mc.mean()) <= 3.0 * se


def test_premium_side_paper_value_differs_by_lt_factor_on_atom():
    m = max_model(u=0.5, lam=2.0)
    vp = ri.expected_premium_side_max(m, 1.0)
    lt = 2.0
    atom = 0.5 * math.exp(-lt * (1.0 - float(me.uniform(0, 2).cdf(0.5))))
    assert vp.paper_value - vp.value == pytest.approx((lt - 1.0) * atom, abs=1e-12)


def test_safety_condition_max():
    # u above the claim support: premium side >= u > claim side
    rep = ri.safety_condition_max(max_model(u=3.0), 1.0)
    assert rep.condition_holds
    # no premium, nontrivial claims: the condition fails
    rep = ri.safety_condition_max(
        ri.RiskModel(co.max_algebra(), me.uniform(0, 1), me.uniform(0, 1e-9), u=0.0), 1.0)
    assert not rep.condition_holds
    # sign cross-check by MC of E R_t at u=0.5
    m = max_model(u=0.5)
    rep = ri.safety_condition_max(m, 1.0)
    claims = ri.mc_poisson_terminal(co.max_algebra(), me.uniform(0, 1), 1.0, 1.0,
                                    50_000, seed=7)
    premiums = ri.mc_poisson_terminal(co.max_algebra(), me.uniform(0, 2), 1.0, 1.0,
                                      50_000, seed=8, start=0.5)
    diff = premiums.mean() - claims.mean()
    se = math.sqrt(premiums.var(ddof=1) / len(premiums) + claims.var(ddof=1) / len(claims))
    assert abs(rep.margin - diff) <= 3.0 * se
    assert rep.condition_holds == (diff > 0)


def test_max_margin_nonincreasing_in_lambda_above_premium_support():
    # with u at/above the premium support the premium side is constant in
    # lambda while the claim side grows, so the margin is nonincreasing
    margins = [ri.safety_condition_max(max_model(u=2.0, lam=lam), 1.0).margin
               for lam in (0.25, 0.5, 1.0, 2.0, 4.0)]
    assert all(a >= b - 1e-12 for a, b in zip(margins, margins[1:]))


# ---------------------------------------------------------------------------
# kendall algebra alpha-moments
# ---------------------------------------------------------------------------

def test_kendall_claims_moment_closed_form():
    pair = wi.kendall_pair(me.lom_kendall(1.0, 1.0), 1.0)
    assert ri.expected_alpha_moment_kendall_claims(pair, 2.0, 3.0) == pytest.approx(3.0)
    assert ri.expected_alpha_moment_kendall_claims(pair, 1.0, 0.0) == 0.0
    c, a = 2.0, 1.5
    pair = wi.kendall_pair(me.lom_kendall(c, a), a)
    assert ri.expected_alpha_moment_kendall_claims(pair, 1.0, 1.0) == pytest.approx(
        0.5 * c**-a)


def test_kendall_claims_moment_numeric_limit_and_mc():
    # mu = delta_1, alpha = 1: the limit equals lam t
    pair = wi.kendall_pair(me.point_mass(1.0), 1.0)
    lt = 1.5
    val = ri.expected_alpha_moment_kendall_claims(pair, 1.0, lt)
    assert val == pytest.approx(lt, abs=1e-6)
    mc = ri.mc_poisson_terminal(co.kendall(1.0), me.point_mass(1.0), 1.0, lt,
                                200_000, seed=8)
    se = mc.std(ddof=1) / math.sqrt(len(mc))
    assert abs(val - mc.mean()) <= 3.0 * se


def test_kendall_claims_moment_divergence():
    # a claim law without a finite alpha-moment diverges
    pair = wi.kendall_pair(me.pareto_2alpha(0.5), 1.0)
    assert ri.expected_alpha_moment_kendall_claims(pair, 1.0, 1.0) == math.inf


def test_kendall_premiums_moment():
    pair = wi.kendall_pair(me.lom_kendall(1.0, 1.0), 1.0)
    vp = ri.expected_alpha_moment_kendall_premiums(2.0, pair, 1.0, 2.0)
    # Poisson-mixture definition: u^a + lam t c^-a / 2
    assert vp.value == pytest.approx(3.0)
    # published formula adds u^a e^{-lam t (1 - J(u))}
    assert vp.paper_value == pytest.approx(3.0 + 2.0 * math.exp(-0.5), abs=1e-12)
    # u = 0 reduces to the claim-side moment
    assert ri.expected_alpha_moment_kendall_premiums(0.0, pair, 1.0, 2.0).value == \
        pytest.approx(ri.expected_alpha_moment_kendall_claims(pair, 1.0, 2.0))
    # lam t -> 0: the definition value is u^a
    assert ri.expected_alpha_moment_kendall_premiums(2.0, pair, 1.0, 0.0).value == \
        pytest.approx(2.0)


def test_kendall_premiums_definition_matches_mc():
    pair = wi.kendall_pair(me.lom_kendall(1.0, 1.0), 1.0)
    u, lam, t = 2.0, 1.0, 2.0
    vp = ri.expected_alpha_moment_kendall_premiums(u, pair, lam, t)
    mc = ri.mc_poisson_terminal(co.kendall(1.0), me.lom_kendall(1.0, 1.0), lam, t,
                                400_000, seed=12, start=u)
    se = mc.std(ddof=1) / math.sqrt(len(mc))
    assert abs(vp.value - mc.mean()) <= 3.0 * se


def test_safety_condition_kendall_values():
    rep = ri.safety_condition_kendall(kendall_model(u=1.0, lam=2.0), 1.0)
    assert rep.margin == pytest.approx(math.exp(-1.0) + 1.0, abs=1e-12)
    assert rep.condition_holds
    rep0 = ri.safety_condition_kendall(kendall_model(u=0.0, lam=2.0), 1.0)
    assert rep0.margin == 0.0 and not rep0.condition_holds
    # the Poisson-mixture margin is u^alpha exactly (claim sides cancel)
    assert rep.extras["margin_definition"] == pytest.approx(1.0)


def test_safety_condition_kendall_rejects_mismatched_scales():
    model = ri.RiskModel(co.kendall(1.0), me.lom_kendall(1.0, 1.0),
                         me.lom_kendall(2.0, 1.0), u=1.0)
    with pytest.raises(me.UnsupportedLawError):
        ri.safety_condition_kendall(model, 1.0)
    model = ri.RiskModel(co.kendall(1.0), me.uniform(0, 1), me.lom_kendall(1.0, 1.0), u=1.0)
    with pytest.raises(me.UnsupportedLawError):
        ri.safety_condition_kendall(model, 1.0)


def test_kendall_margin_nonincreasing_in_lambda():
    margins = [ri.safety_condition_kendall(kendall_model(u=2.0, lam=lam), 1.0).margin
               for lam in (0.25, 0.5, 1.0, 2.0, 4.0)]
    assert all(a >= b - 1e-12 for a, b in zip(margins, margins[1:]))


def test_kendall_margin_dilation_identity():
    # margin(u, c) = c^-alpha margin(u c, 1) for every alpha
    for alpha in (1.0, 1.7):
        for c in (0.5, 2.0):
            for u in (0.7, 3.0):
                m1 = ri.safety_condition_kendall(
                    kendall_model(c=c, alpha=alpha, u=u, lam=1.3), 1.0).margin
                m2 = ri.safety_condition_kendall(
                    kendall_model(c=1.0, alpha=alpha, u=u * c, lam=1.3), 1.0).margin
                assert m1 == pytest.approx(m2 * c**-alpha, rel=1e-12)


# ---------------------------------------------------------------------------
# alpha model: net profit condition
# ---------------------------------------------------------------------------

def test_net_profit_alpha():
    # mu with mu_alpha = 1, gamma = 1, beta^alpha = 2 -> rho = 0.5
    model = ri.RiskModel(co.alpha_stable(1.0), me.lom_alpha(1.0, 1.0),
                         me.lom_alpha(1.0, 1.0), beta=2.0)
    assert ri.net_profit_alpha(model) == pytest.approx(0.5, abs=1e-9)
    heavy = ri.RiskModel(co.alpha_stable(1.0), me.pareto_2alpha(0.5),
                         me.lom_alpha(1.0, 1.0), beta=2.0)
    assert ri.net_profit_alpha(heavy) == math.inf
    bad = ri.RiskModel(co.alpha_stable(1.0), me.lom_alpha(1.0, 1.0), me.uniform(0, 1))
    with pytest.raises(me.UnsupportedLawError):
        ri.net_profit_alpha(bad)


def test_risk_model_validation():
    with pytest.raises(me.ParameterError):
        ri.RiskModel(co.max_algebra(), me.uniform(0, 1), me.uniform(0, 1), u=-1.0)
    with pytest.raises(me.ParameterError):
        ri.RiskModel(co.max_algebra(), me.uniform(0, 1), me.uniform(0, 1), lam=0.0)
