"""Ruin and survival probabilities for the generalized risk models.

Analytic solvers: a Volterra product-integration scheme for the alpha-stable
model (survival in the z = u^alpha scale), an exact log-derivative quadrature
for the max model with absolutely continuous laws, and the 0/1 classification
for the max model under a point-mass premium.  Monte Carlo estimation of
Q_infinity(u) = P{claim walk ever reaches the premium walk} works for every
algebra; the Kendall recursion check validates the one-step self-consistency
of the survival functional by two independent estimators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from .measures import (
    Distribution,
    ParameterError,
    QUAD_TOL,
    UnsupportedLawError,
    moment_alpha,
    power_transform,
)
from .risk import RiskModel
from .walks import CHUNK, apply_step_batch

__all__ = [
    "CertainRuinError",
    "RuinEstimate",
    "SurvivalGrid",
    "RecursionCheck",
    "wilson_interval",
    "alpha_ruin_volterra",
    "volterra_residual",
    "alpha_ruin_laplace_check",
    "alpha_ruin",
    "max_ruin_ode",
    "max_ruin_integral_residual",
    "max_ruin_lom",
    "mc_ruin",
    "mc_ruin_finite_t",
    "kendall_lambda_recursion_check",
]


class CertainRuinError(ArithmeticError):
    """The net profit condition fails (rho >= 1): ruin is certain, delta <= 0."""


@dataclass(frozen=True)
class RuinEstimate:
    survival: float
    ruin: float
    method: str
    horizon: int | str = "infinite"
    ci_low: float | None = None
    ci_high: float | None = None
    paths: int | None = None
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SurvivalGrid:
    z_grid: np.ndarray
    delta_values: np.ndarray

    def __call__(self, z):
        return np.interp(z, self.z_grid, self.delta_values)


def wilson_interval(successes: int, n: int, confidence: float = 0.99) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n < 1 or not (0 < confidence < 1):
        raise ParameterError("need n >= 1 and confidence in (0, 1)")
    z = stats.norm.ppf(0.5 + confidence / 2.0)
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# ---------------------------------------------------------------------------
# alpha-stable model: Volterra solver in the z = u^alpha scale
# ---------------------------------------------------------------------------

def alpha_ruin_volterra(F_of_U_alpha: Distribution, gamma: float, beta_alpha: float,
                        z_max: float = 10.0, steps: int = 2000) -> SurvivalGrid:
    """Solve delta(z) = 1 - rho + q * int_0^z delta(z - x)(1 - F(x)) dx.

    Uniform grid, trapezoidal product integration; q = gamma / beta^alpha and
    rho = q * (mean of F).  Second-order accurate in the grid step.
    """
    if gamma <= 0 or beta_alpha <= 0 or z_max <= 0 or steps < 2:
        raise ParameterError("need positive gamma, beta_alpha, z_max and steps >= 2")
    mu = moment_alpha(F_of_U_alpha, 1.0)
    q = gamma / beta_alpha
    rho = q * mu
    if not math.isfinite(rho) or rho >= 1.0:
        raise CertainRuinError(f"net profit condition fails: rho = {rho}")
    z = np.linspace(0.0, z_max, steps + 1)
    h = z[1] - z[0]
    k = 1.0 - np.asarray(F_of_U_alpha.cdf(z), dtype=float)
    delta = np.empty(steps + 1)
    delta[0] = 1.0 - rho
    denom = 1.0 - 0.5 * q * h * k[0]
    for i in range(1, steps + 1):
        inner = float(np.dot(k[1:i], delta[i - 1:0:-1])) if i > 1 else 0.0
        delta[i] = (1.0 - rho + q * h * (inner + 0.5 * k[i] * delta[0])) / denom
    return SurvivalGrid(z, np.clip(delta, 0.0, 1.0))


def volterra_residual(grid: SurvivalGrid, F: Distribution, gamma: float,
                      beta_alpha: float) -> float:
    """Max abs residual of the renewal equation re-substituted on the grid.

    Uses the same trapezoidal rule as the solver, so it checks the linear
    system's self-consistency plus the clipping, not the discretization bias.
    """
    z = grid.z_grid
    h = z[1] - z[0]
    q = gamma / beta_alpha
    rho = q * moment_alpha(F, 1.0)
    k = 1.0 - np.asarray(F.cdf(z), dtype=float)
    d = grid.delta_values
    worst = abs(d[0] - (1.0 - rho))
    for i in range(1, len(z)):
        w = k[:i + 1][::-1].copy()
        w[0] *= 0.5
        w[-1] *= 0.5
        integral = h * float(np.dot(w, d[:i + 1]))
        worst = max(worst, abs(d[i] - (1.0 - rho + q * integral)))
    return worst


def alpha_ruin_laplace_check(grid: SurvivalGrid, F: Distribution, gamma: float,
                             beta_alpha: float, s_values) -> list[float]:
    """|Laplace(delta)(s) - (beta^a - gamma mu)/((beta^a - gamma Ghat(s)) s)|.

    Ghat is the Laplace transform of the tail 1 - F, computed by quadrature;
    the grid transform gets an analytic tail correction delta(z_max) e^{-s z}/s.
    """
    mu = moment_alpha(F, 1.0)
    z = grid.z_grid
    d = grid.delta_values
    out = []
    hi = F.support_upper if math.isfinite(F.support_upper) else math.inf
    for s in s_values:
        if s <= 0:
            raise ParameterError("Laplace abscissas must be positive")
        lhs = float(np.trapezoid(np.exp(-s * z) * d, z))
        lhs += d[-1] * math.exp(-s * z[-1]) / s
        ghat, _ = integrate.quad(lambda x: math.exp(-s * x) * (1.0 - float(F.cdf(x))),
                                 0.0, hi, epsabs=QUAD_TOL, limit=400)
        rhs = (beta_alpha - gamma * mu) / ((beta_alpha - gamma * ghat) * s)
        out.append(abs(lhs - rhs))
    return out


def alpha_ruin(u: float, model: RiskModel, z_max: float | None = None,
               steps: int = 2000) -> RuinEstimate:
    """Survival/ruin at capital u for the alpha-stable model: delta(u^alpha)."""
    if model.algebra.kind != "alpha_stable":
        raise ParameterError("alpha_ruin requires the alpha-stable algebra")
    if model.premium_law.family != "lom_alpha":
        raise UnsupportedLawError("alpha-model premiums must be the lack-of-memory law")
    if u < 0:
        raise ParameterError("u must be nonnegative")
    a = model.algebra.alpha
    gamma = model.premium_law.params["gamma"]
    beta_alpha = model.beta**a
    F = power_transform(model.claim_law, a)
    zu = u**a
    if z_max is None:
        z_max = max(10.0, 5.0 * zu)
    if zu > z_max:
        raise ParameterError(f"u^alpha = {zu} exceeds z_max = {z_max}")
    grid = alpha_ruin_volterra(F, gamma, beta_alpha, z_max, steps)
    surv = float(grid(zu))
    rho = gamma * moment_alpha(F, 1.0) / beta_alpha
    return RuinEstimate(surv, 1.0 - surv, method="volterra",
                        diagnostics={"rho": rho, "z": zu, "z_max": z_max, "steps": steps})


# ---------------------------------------------------------------------------
# max model: exact quadrature of the log-derivative ODE
# ---------------------------------------------------------------------------

def _density_or_raise(d: Distribution, name: str):
    if d.atoms or d.density is None:
        raise UnsupportedLawError(f"{name} must be absolutely continuous")
    return d.density


def max_ruin_ode(F: Distribution, G: Distribution, u_grid) -> SurvivalGrid:
    """Survival for the max model: delta' / delta = G f / (1 - F G) below the
    claim supremum a, delta = 1 at and above it.

    F is the claim law (bounded support required for a nonzero answer), G the
    premium law.  Unbounded claims give delta = 0 identically.
    """
    f = _density_or_raise(F, "claim law")
    _density_or_raise(G, "premium law")
    u_grid = np.asarray(u_grid, dtype=float)
    if np.any(np.diff(u_grid) <= 0) or u_grid[0] < 0:
        raise ParameterError("u_grid must be increasing and nonnegative")
    a = F.support_upper
    if not math.isfinite(a):
        return SurvivalGrid(u_grid, np.zeros_like(u_grid))

    def integrand(y: float) -> float:
        den = 1.0 - float(F.cdf(y)) * float(G.cdf(y))
        if den <= 0.0:
            return math.inf
        return float(G.cdf(y)) * float(f(np.array([y]))[0]) / den

    def delta_one(u: float) -> float:
        if u >= a:
            return 1.0
        pts = sorted({p for p in (G.support_lower, G.support_upper) if u < p < a})
        val, _ = integrate.quad(integrand, u, a, points=pts or None,
                                epsabs=1e-12, limit=400)
        if not math.isfinite(val):
            return 0.0
        return math.exp(-val)

    return SurvivalGrid(u_grid, np.array([delta_one(float(u)) for u in u_grid]))


def max_ruin_integral_residual(F: Distribution, G: Distribution, u: float) -> float:
    """Residual of delta(u) = delta(u) G(u) F(u) + int_u^oo delta(y) F(y) dG(y).

    Independent check of the ODE solution by direct quadrature against the
    premium law's density.
    """
    g = _density_or_raise(G, "premium law")
    a = F.support_upper
    b = G.support_upper if math.isfinite(G.support_upper) else math.inf

    def delta(y: float) -> float:
        return float(max_ruin_ode(F, G, np.array([0.0, max(y, 1e-12)])).delta_values[-1])

    lhs = delta(u)
    pts = sorted({p for p in (a, G.support_lower) if u < p < b and math.isfinite(p)})
    integral, _ = integrate.quad(
        lambda y: delta(y) * float(F.cdf(y)) * float(g(np.array([y]))[0]),
        u, b, points=pts or None, epsabs=1e-10, limit=400)
    rhs = lhs * float(G.cdf(u)) * float(F.cdf(u)) + integral
    return abs(lhs - rhs)


def max_ruin_lom(u: float, a: float, F: Distribution) -> RuinEstimate:
    """Max model with the point-mass premium delta_a: survival is 0 or 1.

    Survival is certain iff the largest possible claim is at most u v a.
    """
    if u < 0 or a <= 0:
        raise ParameterError("need u >= 0 and a > 0")
    level = max(u, a)
    surv = 1.0 if float(F.cdf(level)) >= 1.0 - 1e-15 else 0.0
    return RuinEstimate(surv, 1.0 - surv, method="closed_form",
                        diagnostics={"level": level, "F_at_level": float(F.cdf(level))})


# ---------------------------------------------------------------------------
# Monte Carlo estimation
# ---------------------------------------------------------------------------

def _alpha_mc_survival_chunk(model: RiskModel, width: int, horizon: int,
                             rng: np.random.Generator) -> np.ndarray:
    """Alpha-model fast path in the z-scale: survival <=> the random walk
    sum(U_j^alpha - beta^alpha E_j) never reaches u^alpha, E_j ~ Exp(gamma)."""
    a = model.algebra.alpha
    gamma = model.premium_law.params["gamma"]
    level = model.u**a
    scale = model.beta**a
    claim = model.claim_law
    # U^alpha for a lack-of-memory claim law of the same order is Exp(g)
    claim_exp_rate = (claim.params["gamma"]
                      if claim.family == "lom_alpha" and claim.params["alpha"] == a
                      else None)
    alive = np.ones(width, dtype=bool)
    base = np.zeros(width)
    block = 512
    for lo in range(0, horizon, block):
        n = min(block, horizon - lo)
        if claim_exp_rate is not None:
            claims = rng.exponential(1.0 / claim_exp_rate, (n, width))
        elif a == 1.0:
            claims = claim.sample(n * width, rng).reshape(n, width)
        else:
            claims = np.power(claim.sample(n * width, rng).reshape(n, width), a)
        premiums = scale * rng.exponential(1.0 / gamma, (n, width))
        s = base + np.cumsum(claims - premiums, axis=0)
        alive &= s.max(axis=0) < level
        base = s[-1]
        if not alive.any():
            break
    return alive


def _paired_walk_survival_chunk(model: RiskModel, width: int, horizon: int,
                                rng: np.random.Generator) -> np.ndarray:
    """Generic engine: claim walk from 0 vs premium walk from u, any algebra."""
    alg = model.algebra
    x = np.zeros(width)
    y = np.full(width, float(model.u))
    alive = np.ones(width, dtype=bool)
    a_sup = model.claim_law.support_upper
    saturating = alg.kind == "max" and not model.claim_law.atoms and math.isfinite(a_sup)
    certain = np.zeros(width, dtype=bool)
    for _ in range(horizon):
        cu = model.claim_law.sample(width, rng)
        x = apply_step_batch(alg, x, cu, rng)
        pu = model.beta * model.premium_law.sample(width, rng)
        y = apply_step_batch(alg, y, pu, rng)
        alive &= certain | (y > x)
        if saturating:
            certain |= alive & (y >= a_sup)
            if np.all(~alive | certain):
                break
        elif not alive.any():
            break
    return alive


def mc_ruin(model: RiskModel, horizon_claims: int = 10_000, paths: int = 100_000,
            seed: int = 0, confidence: float = 0.99) -> RuinEstimate:
    """Monte Carlo survival estimate over the first `horizon_claims` claims.

    Survival means the premium walk started at u strictly dominates the claim
    walk at every claim instant.  The finite horizon makes the estimate an
    upper bound on the infinite-horizon survival probability.
    """
    if horizon_claims < 1 or paths < 1:
        raise ParameterError("need horizon_claims >= 1 and paths >= 1")
    fast_alpha = (model.algebra.kind == "alpha_stable"
                  and model.premium_law.family == "lom_alpha"
                  and model.premium_law.params["alpha"] == model.algebra.alpha)
    survivors = 0
    for ci, lo in enumerate(range(0, paths, CHUNK)):
        width = min(lo + CHUNK, paths) - lo
        rng = np.random.default_rng([seed, ci])
        if fast_alpha:
            alive = _alpha_mc_survival_chunk(model, width, horizon_claims, rng)
        else:
            alive = _paired_walk_survival_chunk(model, width, horizon_claims, rng)
        survivors += int(alive.sum())
    surv = survivors / paths
    lo_ci, hi_ci = wilson_interval(survivors, paths, confidence)
    return RuinEstimate(surv, 1.0 - surv, method="monte_carlo",
                        horizon=horizon_claims, ci_low=lo_ci, ci_high=hi_ci,
                        paths=paths, diagnostics={"confidence": confidence,
                                                  "upper_bound_on_survival": True})


def mc_ruin_finite_t(model: RiskModel, t: float, paths: int = 100_000,
                     seed: int = 0, confidence: float = 0.99) -> RuinEstimate:
    """Ruin by time t: survive the first N claims with N ~ Poisson(lam * t)."""
    if t <= 0 or paths < 1:
        raise ParameterError("need t > 0 and paths >= 1")
    alg = model.algebra
    survivors = 0
    for ci, lo in enumerate(range(0, paths, CHUNK)):
        width = min(lo + CHUNK, paths) - lo
        rng = np.random.default_rng([seed, ci])
        counts = rng.poisson(model.lam * t, width)
        x = np.zeros(width)
        y = np.full(width, float(model.u))
        alive = np.ones(width, dtype=bool)
        for k in range(1, int(counts.max(initial=0)) + 1):
            cu = model.claim_law.sample(width, rng)
            x_new = apply_step_batch(alg, x, cu, rng)
            pu = model.beta * model.premium_law.sample(width, rng)
            y_new = apply_step_batch(alg, y, pu, rng)
            active = k <= counts
            x = np.where(active, x_new, x)
            y = np.where(active, y_new, y)
            alive &= ~active | (y > x)
        survivors += int(alive.sum())
    surv = survivors / paths
    lo_ci, hi_ci = wilson_interval(survivors, paths, confidence)
    return RuinEstimate(surv, 1.0 - surv, method="monte_carlo", horizon=f"t={t:g}",
                        ci_low=lo_ci, ci_high=hi_ci, paths=paths,
                        diagnostics={"confidence": confidence})


# ---------------------------------------------------------------------------
# Kendall recursion consistency
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RecursionCheck:
    lhs: float
    rhs: float
    residual: float
    ci_low: float
    ci_high: float


def _kendall_survival_from(v: np.ndarray, u: np.ndarray, model: RiskModel,
                           horizon: int, rng: np.random.Generator) -> np.ndarray:
    """Indicator of {premium walk from u dominates claim walk from v for
    horizon steps} per path, Kendall algebra."""
    alg = model.algebra
    x = np.array(v, dtype=float, copy=True)
    y = np.array(u, dtype=float, copy=True)
    alive = np.ones(x.shape[0], dtype=bool)
    for _ in range(horizon):
        cu = model.claim_law.sample(x.shape[0], rng)
        x = apply_step_batch(alg, x, cu, rng)
        pu = model.beta * model.premium_law.sample(x.shape[0], rng)
        y = apply_step_batch(alg, y, pu, rng)
        alive &= y > x
    return alive


def kendall_lambda_recursion_check(v: float, u: float, model: RiskModel,
                                   paths_outer: int = 10_000, paths_inner: int = 1_000,
                                   horizon: int = 16, seed: int = 0,
                                   confidence: float = 0.99) -> RecursionCheck:
    """Self-consistency of the survival functional L(v, u).

    Left side: direct estimate of L at horizon `horizon` + 1 from (v, u).
    Right side: one exact transition step (x1, y1) drawn from the point-mass
    convolutions delta_v <> mu and delta_u <> nu, then an inner estimate of
    L(x1, y1) at horizon `horizon` on the event {y1 > x1}.  Both estimate the
    same finite-horizon quantity, so the residual CI must contain 0.
    """
    if model.algebra.kind != "kendall":
        raise ParameterError("recursion check applies to the kendall algebra")
    if paths_outer < 2 or paths_inner < 1 or horizon < 1:
        raise ParameterError("need paths_outer >= 2, paths_inner >= 1, horizon >= 1")
    z = stats.norm.ppf(0.5 + confidence / 2.0)

    rng_l = np.random.default_rng([seed, 1])
    alive = _kendall_survival_from(np.full(paths_outer, float(v)),
                                   np.full(paths_outer, float(u)),
                                   model, horizon + 1, rng_l)
    lhs = float(alive.mean())
    se_l = math.sqrt(max(lhs * (1.0 - lhs), 1e-12) / paths_outer)

    rng_r = np.random.default_rng([seed, 2])
    cu = model.claim_law.sample(paths_outer, rng_r)
    x1 = apply_step_batch(model.algebra, np.full(paths_outer, float(v)), cu, rng_r)
    pu = model.beta * model.premium_law.sample(paths_outer, rng_r)
    y1 = apply_step_batch(model.algebra, np.full(paths_outer, float(u)), pu, rng_r)
    cluster = np.zeros(paths_outer)
    idx = np.nonzero(y1 > x1)[0]
    if idx.size:
        starts_x = np.repeat(x1[idx], paths_inner)
        starts_y = np.repeat(y1[idx], paths_inner)
        inner_alive = np.empty(starts_x.shape[0], dtype=bool)
        block = 1 << 20
        for ci, lo in enumerate(range(0, starts_x.shape[0], block)):
            hi = min(lo + block, starts_x.shape[0])
            rng_i = np.random.default_rng([seed, 3, ci])
            inner_alive[lo:hi] = _kendall_survival_from(
                starts_x[lo:hi], starts_y[lo:hi], model, horizon, rng_i)
        cluster[idx] = inner_alive.reshape(idx.size, paths_inner).mean(axis=1)
    rhs = float(cluster.mean())
    se_r = float(cluster.std(ddof=1)) / math.sqrt(paths_outer)

    residual = lhs - rhs
    half = z * math.sqrt(se_l**2 + se_r**2)
    return RecursionCheck(lhs, rhs, residual, residual - half, residual + half)
