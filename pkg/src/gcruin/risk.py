"""Risk processes at claim instants and first safety conditions.

The surplus at time t compares the premium-side walk started at the initial
capital u against the claim-side walk started at 0, both driven by a common
Poisson(lambda) claim counter.  For the max algebra the natural scale is the
expectation itself; for the Kendall algebra it is the alpha-th moment.

Where a published closed form disagrees with the Poisson-mixture definition
(sum over n of the Poisson weight times the n-step expectation), the
definition value is normative and the formula value is reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .convolutions import ConvolutionAlgebra
from .measures import (
    Distribution,
    ParameterError,
    QUAD_TOL,
    UnsupportedLawError,
    moment_alpha,
)
from .walks import CHUNK, apply_step_batch
from .williamson import KendallLawPair, kendall_pair

__all__ = [
    "RiskModel",
    "SafetyReport",
    "ValuePair",
    "sample_claim_times",
    "mc_poisson_terminal",
    "expected_claim_side_max",
    "expected_premium_side_max",
    "safety_condition_max",
    "expected_alpha_moment_kendall_claims",
    "expected_alpha_moment_kendall_premiums",
    "safety_condition_kendall",
    "net_profit_alpha",
]


@dataclass(frozen=True)
class RiskModel:
    """Claim/premium laws with their algebra, initial capital and intensity."""

    algebra: ConvolutionAlgebra
    claim_law: Distribution
    premium_law: Distribution
    u: float = 0.0
    lam: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.u < 0:
            raise ParameterError("initial capital must be nonnegative")
        if self.lam <= 0:
            raise ParameterError("intensity must be positive")
        if self.beta <= 0:
            raise ParameterError("premium scale must be positive")


@dataclass(frozen=True)
class ValuePair:
    """A definition-level value with the published-formula value beside it."""

    value: float
    paper_value: float

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class SafetyReport:
    margin: float
    condition_holds: bool
    t: float
    extras: dict = field(default_factory=dict)


def sample_claim_times(lam: float, t_max: float, seed: int = 0) -> np.ndarray:
    """Arrival times of a Poisson(lam) process on (0, t_max]."""
    if lam <= 0 or t_max <= 0:
        raise ParameterError("lam and t_max must be positive")
    rng = np.random.default_rng([seed, 0])
    times = []
    t = 0.0
    while True:
        t += rng.exponential(1.0 / lam)
        if t > t_max:
            break
        times.append(t)
    return np.array(times)


def mc_poisson_terminal(alg: ConvolutionAlgebra, step_law: Distribution,
                        lam: float, t: float, paths: int, seed: int = 0,
                        start: float = 0.0) -> np.ndarray:
    """Terminal states X_{N(t)} with N(t) ~ Poisson(lam * t), chunk-seeded.

    Each step consumes full-width draws so a path's randomness never depends
    on the other paths' claim counts.
    """
    if paths < 1:
        raise ParameterError("paths must be >= 1")
    out = np.empty(paths)
    for ci, lo in enumerate(range(0, paths, CHUNK)):
        hi = min(lo + CHUNK, paths)
        width = hi - lo
        rng = np.random.default_rng([seed, ci])
        counts = rng.poisson(lam * t, width)
        x = np.full(width, float(start))
        for k in range(1, int(counts.max(initial=0)) + 1):
            u = step_law.sample(width, rng)
            moved = apply_step_batch(alg, x, u, rng)
            x = np.where(k <= counts, moved, x)
        out[lo:hi] = x
    return out


# ---------------------------------------------------------------------------
# max algebra: expectations of the running maximum at a Poisson time
# ---------------------------------------------------------------------------

def _max_compound_expectation(law: Distribution, lt: float, floor: float) -> float:
    """E max(floor, V_1, ..., V_N) with N ~ Poisson(lt), V_i ~ law.

    Uses the exact CDF K(x) = exp(-lt (1 - law.cdf(x))) of the running max:
    the expectation is floor*K(floor) plus the Stieltjes integral of x dK(x)
    over (floor, oo), handling atoms of the law through jumps of K.
    """
    def K(x: float) -> float:
        return math.exp(-lt * (1.0 - float(law.cdf(x))))

    total = floor * K(floor)
    for loc, _ in law.atoms:
        if loc > floor:
            left = float(law.cdf(loc)) - _atom_mass_at(law, loc)
            total += loc * (K(loc) - math.exp(-lt * (1.0 - left)))
    if law.density is not None:
        hi = law.support_upper if math.isfinite(law.support_upper) else math.inf
        lo = max(floor, law.support_lower)
        if hi > lo:
            val, _ = integrate.quad(
                lambda x: x * lt * float(law.density(np.array([x]))[0]) * K(x),
                lo, hi, epsabs=QUAD_TOL, limit=400,
            )
            total += val
    return total


def _atom_mass_at(law: Distribution, loc: float) -> float:
    return float(sum(m for pos, m in law.atoms if pos == loc))


def expected_claim_side_max(model: RiskModel, t: float) -> float:
    """E X_t for the max-algebra claim walk at a Poisson(lam * t) time."""
    if model.algebra.kind != "max":
        raise ParameterError("claim-side expectation requires the max algebra")
    if model.claim_law.atoms:
        raise UnsupportedLawError("max claim-side expectation requires an atomless claim law")
    if t < 0:
        raise ParameterError("t must be nonnegative")
    return _max_compound_expectation(model.claim_law, model.lam * t, 0.0)


def expected_premium_side_max(model: RiskModel, t: float) -> ValuePair:
    """E(u v Y_t) for the max-algebra premium walk started at capital u.

    `value` is the Poisson-mixture definition; `paper_value` carries an extra
    leading lam*t factor on the atom term u*exp(-lam t (1-G(u))).
    """
    if model.algebra.kind != "max":
        raise ParameterError("premium-side expectation requires the max algebra")
    if t < 0:
        raise ParameterError("t must be nonnegative")
    lt = model.lam * t
    u = model.u
    value = _max_compound_expectation(model.premium_law, lt, u)
    atom = u * math.exp(-lt * (1.0 - float(model.premium_law.cdf(u))))
    paper_value = value + (lt - 1.0) * atom
    return ValuePair(value, paper_value)


def safety_condition_max(model: RiskModel, t: float) -> SafetyReport:
    """First safety condition E R_t > 0 in the max algebra's natural scale."""
    claim = expected_claim_side_max(model, t)
    premium = expected_premium_side_max(model, t)
    margin = premium.value - claim
    return SafetyReport(
        margin=margin,
        condition_holds=margin > 0,
        t=t,
        extras={
            "claim_side": claim,
            "premium_side": premium.value,
            "premium_side_paper": premium.paper_value,
            "margin_paper": premium.paper_value - claim,
        },
    )


# ---------------------------------------------------------------------------
# Kendall algebra: alpha-th moments at a Poisson time
# ---------------------------------------------------------------------------

#: geometric-grid limits converge when 3 successive values agree to this
LIMIT_RTOL = 1e-8
#: past this abscissa a still-growing limit is declared divergent
LIMIT_TRUNCATION = 1e12


def _tail_limit(g, x0: float = 2.0) -> float:
    """lim_{x->oo} g(x) on a geometric grid, or inf when it keeps growing."""
    x = max(x0, 2.0)
    vals = []
    while x <= LIMIT_TRUNCATION:
        vals.append(g(x))
        if len(vals) >= 3:
            a, b, c = vals[-3:]
            scale = max(abs(c), 1e-30)
            if abs(c - b) < LIMIT_RTOL * scale and abs(b - a) < LIMIT_RTOL * scale:
                return c
        x *= 2.0
    return math.inf


def expected_alpha_moment_kendall_claims(pair: KendallLawPair, lam: float, t: float) -> float:
    """E X_t^alpha for the Kendall claim walk at a Poisson(lam * t) time.

    Equals lim x^alpha (1 - exp(-lam t (1 - H(x)))); for the lack-of-memory
    law min{(cx)^alpha, 1} this is (lam t / 2) c^(-alpha) exactly.
    """
    if lam < 0 or t < 0:
        raise ParameterError("lam and t must be nonnegative")
    lt = lam * t
    if lt == 0.0:
        return 0.0
    d = pair.dist
    if d is not None and d.family == "lom_kendall" and d.params["alpha"] == pair.alpha:
        return 0.5 * lt * d.params["c"] ** (-pair.alpha)

    a = pair.alpha

    def g(x: float) -> float:
        return x**a * (-math.expm1(-lt * (1.0 - float(pair.H(np.array([x]))[0]))))

    start = 2.0
    if d is not None and math.isfinite(d.support_upper):
        start = max(2.0, 2.0 * d.support_upper)
    return _tail_limit(g, start)


def expected_alpha_moment_kendall_premiums(u: float, pair: KendallLawPair,
                                           lam: float, t: float) -> ValuePair:
    """E(u (+) Y_t)^alpha for the Kendall premium walk started at capital u.

    `value` is the Poisson-mixture definition u^alpha + E Y_t^alpha;
    `paper_value` adds the published extra term u^alpha exp(-lam t (1-J(u))).
    """
    if u < 0:
        raise ParameterError("u must be nonnegative")
    claims = expected_alpha_moment_kendall_claims(pair, lam, t)
    ua = u ** pair.alpha
    value = ua + claims
    ju = float(pair.H(np.array([u]))[0]) if u > 0 else 0.0
    paper_value = ua * math.exp(-lam * t * (1.0 - ju)) + value
    return ValuePair(value, paper_value)


def safety_condition_kendall(model: RiskModel, t: float) -> SafetyReport:
    """Published Kendall margin u^a e^{-(lam t/2)(cu)^(-a)} + u^a.

    Requires both laws to be the same lack-of-memory family min{(cx)^a, 1};
    the cancellation of the claim side against the premium tail needs equal c.
    The extras carry the Poisson-mixture margin (which is u^alpha exactly).
    """
    if model.algebra.kind != "kendall":
        raise ParameterError("kendall safety condition requires the kendall algebra")
    a = model.algebra.alpha
    for law in (model.claim_law, model.premium_law):
        if law.family != "lom_kendall" or law.params["alpha"] != a:
            raise UnsupportedLawError(
                "kendall safety closed form requires lack-of-memory laws of order alpha")
    c_claim = model.claim_law.params["c"]
    c_prem = model.premium_law.params["c"]
    if abs(c_claim - c_prem) > 1e-12:
        raise UnsupportedLawError("claim and premium lack-of-memory scales must match")
    c, u = c_claim, model.u
    lt = model.lam * t
    ua = u**a
    margin = ua * math.exp(-0.5 * lt * (c * u) ** (-a)) + ua if u > 0 else 0.0
    pair_claim = kendall_pair(model.claim_law, a)
    pair_prem = kendall_pair(model.premium_law, a)
    claims = expected_alpha_moment_kendall_claims(pair_claim, model.lam, t)
    premiums = expected_alpha_moment_kendall_premiums(u, pair_prem, model.lam, t)
    return SafetyReport(
        margin=margin,
        condition_holds=margin > 0,
        t=t,
        extras={
            "margin_definition": premiums.value - claims,
            "claim_side_alpha_moment": claims,
            "premium_side_alpha_moment": premiums.value,
            "premium_side_alpha_moment_paper": premiums.paper_value,
        },
    )


# ---------------------------------------------------------------------------
# alpha-stable algebra: net profit condition
# ---------------------------------------------------------------------------

def net_profit_alpha(model: RiskModel) -> float:
    """rho = gamma mu_alpha / beta^alpha; ruin analytics need rho < 1."""
    if model.algebra.kind != "alpha_stable":
        raise ParameterError("net profit condition applies to the alpha-stable algebra")
    if model.premium_law.family != "lom_alpha":
        raise UnsupportedLawError(
            "alpha-model premiums must be the Weibull-type lack-of-memory law")
    a = model.algebra.alpha
    if model.premium_law.params["alpha"] != a:
        raise UnsupportedLawError("premium law order must match the algebra's alpha")
    gamma = model.premium_law.params["gamma"]
    mu_a = moment_alpha(model.claim_law, a)
    if not math.isfinite(mu_a):
        return math.inf
    return gamma * mu_a / model.beta**a
