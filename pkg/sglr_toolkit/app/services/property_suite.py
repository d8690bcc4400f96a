"""Seeded checks of the invariants the toolkit promises: conjugate identities of
the families, divergence identities, boundary solver contracts, Monte Carlo
validity of the tests and confidence sequences, the stopping-time ordering of the
stitched rules, multi-stream calibration and the high-probability stopping time
"""
import math
from typing import Callable, Dict, List, Tuple

import numpy as np

from sglr_toolkit.app.exceptions import PropertyCheckError, UnsupportedFamilyError
from sglr_toolkit.app.families import Bernoulli, Poisson, PsiFamily, Side, SubExponential, SubGaussian
from sglr_toolkit.app.schemas.boundary import ConstantBoundary
from sglr_toolkit.app.schemas.experiment import PropertyResult
from sglr_toolkit.app.schemas.multistream import LogInverse, MultiStreamCal
from sglr_toolkit.app.services.boundaries import (
    crossing_bound_constant, crossing_bound_general, loglog_stitched_sum, solve_g_alpha_constant,
    t_high, t_high_bound
)
from sglr_toolkit.app.services.confidence_sequences import (
    BaselineKind, baseline_cs_config, ci_lower, cs_rejects, glr_cs_config, mixture_cs_config
)
from sglr_toolkit.app.services.divergences import (
    bregman, divergence_difference_exact, dstar_point, inv_bregman, lr_like_forms
)
from sglr_toolkit.app.services.experiments import coverage_rate
from sglr_toolkit.app.services.multistream import (
    MultiStreamTest, calibrate_multistream, log_inverse_tail_bound, mc_tail, sample_h_sums
)
from sglr_toolkit.app.services.power_design import design_test_from_power, fixed_sample_size_gaussian
from sglr_toolkit.app.services.sequential_tests import (
    DiscreteMixtureRule, GlrCsRule, MaxLinesRule, MixtureCsRule, SequentialTest, SglrConstRule,
    SglrNoSepRule, SprtRule, StoppingRule, first_crossing
)
from sglr_toolkit.app.services.simulation import (
    replication_rng, sampler_for, simulate_block, stopping_times
)
from sglr_toolkit.app.utils import log


ALPHA = 0.05
BETA = 0.1

# keyed by sampler name: family, mu0, mu1, null means tried by the containment check
FAMILY_SETUPS: Dict[str, Tuple[PsiFamily, float, float, Tuple[float, ...]]] = {
    "gaussian": (SubGaussian(), 0.0, 0.5, (-0.3, -0.2, -0.1, -0.05)),
    "bernoulli": (Bernoulli(), 0.3, 0.5, (0.15, 0.2, 0.25, 0.28)),
    "poisson": (Poisson(), 1.0, 1.5, (0.7, 0.8, 0.9, 0.95)),
}


def mc_se(level: float, reps: int) -> float:
    """Standard error of a frequency with success probability level
    """

    return math.sqrt(level * (1 - level) / reps)


def _result(name: str, passed: bool, sample_size: int, tolerance: float, detail: str) -> PropertyResult:
    result = PropertyResult(name=name, passed=bool(passed), sample_size=sample_size,
        tolerance=tolerance, detail=detail)
    if not result.passed:
        log.warning(f"property {name} failed: {detail}")
    return result


def _design(family: PsiFamily, mu0: float, mu1: float) -> Tuple[int, int, int]:
    try:
        return design_test_from_power(family, ALPHA, BETA, mu0, mu1)
    except UnsupportedFamilyError:
        sigma = math.sqrt(float(family.variance_bound(mu0)))
        n_star = fixed_sample_size_gaussian(ALPHA, BETA, mu0, mu1, sigma)
        return n_star, math.ceil(n_star / 10), 2 * n_star


def _rule_times(rules: List[StoppingRule]) -> Callable[[np.ndarray], np.ndarray]:
    def rule_times(paths: np.ndarray) -> np.ndarray:
        return np.stack([first_crossing(rule, paths) for rule in rules])
    return rule_times


def check_families(seed: int) -> List[PropertyResult]:
    """psi_mu(0) = 0, psi_mu'(0) = mu, psi*_mu(mu) = 0, psi*_mu'(mu) = 0 and
    Fenchel-Young equality at lambda = psi*_mu'(z) for every built-in family
    """

    rng = replication_rng(seed, 1)
    sub_exp_mus = rng.uniform(-1, 1, 50)
    grids = {
        "gaussian": (SubGaussian(sigma=1.5), rng.uniform(-2, 2, 50), rng.uniform(-2, 2, 50)),
        "subexponential": (SubExponential(scale=0.5), sub_exp_mus, sub_exp_mus + rng.uniform(-0.4, 2, 50)),
        "bernoulli": (Bernoulli(), rng.uniform(0.05, 0.95, 50), rng.uniform(0.05, 0.95, 50)),
        "poisson": (Poisson(), rng.uniform(0.2, 5, 50), rng.uniform(0.2, 5, 50)),
    }
    results = []
    for name, (family, mus, zs) in grids.items():
        at_zero = np.maximum(np.abs(family.psi(0.0, mus)), np.abs(family.psi_grad(0.0, mus) - mus)
            / np.maximum(1.0, np.abs(mus)))
        at_mean = np.maximum(np.abs(family.psi_star(mus, mus)), np.abs(family.psi_star_grad(mus, mus)))
        lam = family.psi_star_grad(zs, mus)
        product = lam * zs
        young = (np.abs(family.psi(lam, mus) + family.psi_star(zs, mus) - product)
            / np.maximum(1.0, np.abs(product)))
        checks = (("psi_at_zero", at_zero), ("conjugate_at_mean", at_mean), ("fenchel_young", young))
        for check, errors in checks:
            error = float(np.max(errors))
            results.append(_result(f"{check}_{name}", error <= 1e-9, len(mus), 1e-9,
                f"max relative error {error:.3e}"))
    return results


def check_divergences(seed: int) -> List[PropertyResult]:
    """Round trip of inv_bregman, agreement of the LR-like forms, the
    sub-Gaussian balance point and the additive identity on random grids
    """

    rng = replication_rng(seed, 0)
    results = []
    # psi* of the sub-exponential family is finite only above mu0 - scale
    sub_exp_mu0s = rng.uniform(-1, 1, 50)
    grids = {
        "gaussian": (SubGaussian(sigma=1.5), rng.uniform(-2, 2, 50), rng.uniform(-2, 2, 50)),
        "subexponential": (SubExponential(scale=0.5), sub_exp_mu0s, sub_exp_mu0s + rng.uniform(-0.4, 2, 50)),
        "bernoulli": (Bernoulli(), rng.uniform(0.05, 0.95, 50), rng.uniform(0.05, 0.95, 50)),
        "poisson": (Poisson(), rng.uniform(0.2, 5, 50), rng.uniform(0.2, 5, 50)),
    }
    for name, (family, mu0s, zs) in grids.items():
        side = np.where(zs >= mu0s, 1, 0)
        ds = bregman(family, zs, mu0s)
        upper = np.asarray(inv_bregman(family, mu0s, np.where(side == 1, ds, 0.0), Side.UPPER))
        lower = np.asarray(inv_bregman(family, mu0s, np.where(side == 0, ds, 0.0), Side.LOWER))
        back = np.where(side == 1, upper, lower)
        error = float(np.max(np.abs(back - zs)))
        results.append(_result(f"inv_bregman_round_trip_{name}", error <= 1e-8, len(zs), 1e-8,
            f"max |z - inv(D(z))| = {error:.3e}"))

        xbars = zs
        forms = lr_like_forms(family, 20, xbars, (mu0s + zs) / 2 + 0.01, mu0s)
        scale = np.maximum(1.0, np.abs(forms.lambda_form))
        gaps = np.abs(forms.lambda_form - forms.tangent_form)
        if divergence_difference_exact(family):
            gaps = np.maximum(gaps, np.abs(forms.lambda_form - forms.divergence_form))
        spread = float(np.max(gaps / scale))
        results.append(_result(f"lr_like_forms_{name}", spread <= 1e-9, len(zs), 1e-9,
            f"max relative disagreement {spread:.3e}"))

    family = SubGaussian(sigma=0.7)
    points = [(dstar_point(family, mu, mu0), (mu + mu0) / 2)
        for mu, mu0 in zip(rng.uniform(0.1, 3, 20), rng.uniform(-3, 0, 20))]
    error = max(abs(found - midpoint) for found, midpoint in points)
    results.append(_result("dstar_midpoint_gaussian", error <= 1e-9, len(points), 1e-9,
        f"max |z* - (mu + mu0)/2| = {error:.3e}"))

    for name, family in (("gaussian", SubGaussian(sigma=2.0)), ("subexponential", SubExponential(scale=1.0))):
        mu0s = rng.uniform(-1, 1, 30)
        mu1s = mu0s + rng.uniform(-0.5, 2, 30)
        error = float(np.max(np.abs(family.divergence(mu1s, mu0s) - family.psi_star(mu1s, mu0s))))
        results.append(_result(f"additive_identity_{name}", error <= 1e-12, len(mu0s), 1e-12,
            f"max |D(mu1, mu0) - psi*(mu1 - mu0)| = {error:.3e}"))
    return results


def check_boundaries(seed: int) -> List[PropertyResult]:
    """Monotonicity of the constant crossing bound, solver round trips, the
    constant case of the general bound and the closed-form stitched series
    """

    rng = replication_rng(seed, 1)
    d1s = 10 ** rng.uniform(-8, -1, 20)
    gs = rng.uniform(3, 30, 20)

    decreasing_g = all(crossing_bound_constant(d1, g + 0.5) < crossing_bound_constant(d1, g)
        for d1, g in zip(d1s, gs) if crossing_bound_constant(d1, g) < 1)
    nonincreasing_d1 = all(crossing_bound_constant(d1 * 2, g) <= crossing_bound_constant(d1, g)
        for d1, g in zip(d1s, gs))
    general = max(abs(crossing_bound_general(ConstantBoundary(g=g), d1) - crossing_bound_constant(d1, g))
        for d1, g in zip(d1s[:5], gs[:5]))

    round_trips = []
    for d1 in d1s:
        for alpha in (0.01, 0.05, 0.1):
            round_trips.append(crossing_bound_constant(d1, solve_g_alpha_constant(d1, alpha)) - alpha)
    worst = min(round_trips)
    above = max(round_trips)

    stitched = loglog_stitched_sum(2.0, ALPHA, 2.0)
    expected = ALPHA * (math.pi ** 2 / 6 - 1)
    return [
        _result("crossing_bound_decreasing_in_g", decreasing_g, len(d1s), 0.0, "bound(d1, g + 0.5) < bound(d1, g)"),
        _result("crossing_bound_nonincreasing_in_d1", nonincreasing_d1, len(d1s), 0.0,
            "bound(2 d1, g) <= bound(d1, g)"),
        _result("general_bound_matches_constant", general == 0.0, 5, 0.0, f"max difference {general:.3e}"),
        _result("solve_g_alpha_round_trip", worst >= -1e-6 and above <= 0, len(round_trips), 1e-6,
            f"bound(solve(alpha)) - alpha in [{worst:.3e}, {above:.3e}]"),
        _result("loglog_stitched_sum", abs(stitched - expected) <= 1e-9 and stitched <= ALPHA, 1, 1e-9,
            f"sum {stitched:.10f}, alpha (pi^2/6 - 1) = {expected:.10f}"),
    ]


def check_type1(seed: int, reps: int) -> List[PropertyResult]:
    """Null rejection frequency at horizon 2 n* of every alpha-level rule, and
    of the stitched line rules against their own level sum_k h_k
    """

    results = []
    se = mc_se(ALPHA, reps)
    for name, (family, mu0, mu1, _) in FAMILY_SETUPS.items():
        _, n_min, n_max = _design(family, mu0, mu1)
        g = solve_g_alpha_constant(float(family.divergence(mu1, mu0)), ALPHA)
        rules = [
            SglrConstRule(family=family, mu0=mu0, mu1=mu1, g=g),
            SglrNoSepRule(family=family, mu0=mu0, c=2.0, alpha=ALPHA),
            SprtRule.from_alpha(family, mu0, mu1, ALPHA),
            GlrCsRule.from_alpha(family, mu0, ALPHA, n_min, n_max),
            MixtureCsRule.from_alpha(family, mu0, ALPHA, n_min, n_max),
        ]
        lines = [MaxLinesRule.build(family, mu0, mu1, g), DiscreteMixtureRule.build(family, mu0, mu1, g)]
        times = stopping_times(_rule_times(rules + lines), sampler_for(name, mu0),
            seed, reps, n_max)
        rates = np.mean(np.isfinite(times), axis=-1)
        for rule, rate in zip(rules, rates):
            results.append(_result(f"type1_{name}_{rule.name}", rate <= ALPHA + 3 * se, reps, 3 * se,
                f"null rejection rate {rate:.4f} at horizon {n_max}, alpha={ALPHA}"))
        for rule, rate in zip(lines, rates[len(rules):]):
            level = min(1.0, float(np.sum(np.exp(rule.log_h))))
            tolerance = 3 * mc_se(level, reps)
            results.append(_result(f"type1_{name}_{rule.name}", rate <= level + tolerance, reps, tolerance,
                f"null rejection rate {rate:.4f}, level sum h_k = {level:.4f}"))
    return results


def check_ordering(seed: int, reps: int) -> List[PropertyResult]:
    """N_DM <= N_ML <= N_GL on identical paths under the alternative, eta = 2
    """

    results = []
    for name, (family, mu0, mu1, _) in FAMILY_SETUPS.items():
        g = solve_g_alpha_constant(float(family.divergence(mu1, mu0)), ALPHA)
        rules = [
            DiscreteMixtureRule.build(family, mu0, mu1, g, eta=2.0),
            MaxLinesRule.build(family, mu0, mu1, g, eta=2.0),
            SglrConstRule(family=family, mu0=mu0, mu1=mu1, g=g),
        ]
        n_dm, n_ml, n_gl = stopping_times(_rule_times(rules), sampler_for(name, mu1), seed, reps, 400)
        violations = int(np.sum(n_dm > n_ml) + np.sum(n_ml > n_gl))
        results.append(_result(f"stopping_order_{name}", violations == 0, reps, 0.0,
            f"{violations} violations of N_DM <= N_ML <= N_GL"))
    return results


def check_power_and_updates(seed: int, reps: int) -> List[PropertyResult]:
    """Rejection frequency under mu1 grows with the horizon, and the engine
    evaluates the rule once per observation until it rejects
    """

    family, mu0, mu1, _ = FAMILY_SETUPS["gaussian"]
    rule = SglrConstRule.from_alpha(family, mu0, mu1, ALPHA)
    times = stopping_times(_rule_times([rule]), sampler_for("gaussian", mu1), seed, reps, 800)[0]
    rates = [float(np.mean(times <= horizon)) for horizon in (50, 100, 200, 400, 800)]
    trend = all(later >= earlier for earlier, later in zip(rates, rates[1:])) and rates[-1] >= 0.95

    state = SequentialTest(SglrNoSepRule(family=family, mu0=mu0, c=2.0, alpha=ALPHA))
    stream = sampler_for("gaussian", mu0)(replication_rng(seed, 2), 5000)
    state.run(stream, stop_on_reject=False)
    expected = state.rejected_at if state.rejected_at is not None else state.count
    return [
        _result("power_one_trend", trend, reps, 0.0, f"rejection rates {rates}"),
        _result("constant_work_per_step", state.evaluations == expected, state.count, 0.0,
            f"{state.evaluations} evaluations, expected {expected}"),
    ]


def check_confidence_sequences(seed: int, reps: int, horizon: int) -> List[PropertyResult]:
    """Uniform coverage of every mode, the Chernoff match on the window, the
    interval never passing the mean, the non-shrinking tail, coverage of the
    running average of drifting means and containment of the mixture sequence
    """

    results = []
    se = mc_se(ALPHA, reps)
    truths = {"gaussian": (SubGaussian(), 0.0), "bernoulli": (Bernoulli(), 0.3)}
    for name, (family, mu) in truths.items():
        configs = {
            "glr_like": glr_cs_config(family, ALPHA, 10, 1000),
            "discrete_mixture": mixture_cs_config(family, ALPHA, 10, 1000),
        }
        if name == "gaussian":
            configs["stitching"] = baseline_cs_config(BaselineKind.STITCHING, ALPHA)
            configs["normal_mixture"] = baseline_cs_config(BaselineKind.NORMAL_MIXTURE, ALPHA)
        for mode, config in configs.items():
            rate = coverage_rate(config, sampler_for(name, mu), mu, seed, reps, horizon, block_size=50)
            results.append(_result(f"coverage_{name}_{mode}", rate >= 1 - ALPHA - 3 * se, reps, 3 * se,
                f"uniform coverage {rate:.4f} over horizon {horizon}"))

    means = 0.5 * np.sin(2 * np.pi * np.arange(1, horizon + 1) / 100)
    running = np.cumsum(means) / np.arange(1, horizon + 1)
    rate = coverage_rate(glr_cs_config(SubGaussian(), ALPHA, 10, 1000), sampler_for("gaussian", means),
        running, seed, reps, horizon, block_size=50)
    results.append(_result("coverage_running_average", rate >= 1 - ALPHA - 3 * se, reps, 3 * se,
        f"coverage of the running mean {rate:.4f}"))

    gaussian = glr_cs_config(SubGaussian(), ALPHA, 10, 1000)
    g_alpha = gaussian.g_values[0]
    ns = np.unique(np.geomspace(10, 1000, 40).astype(int))
    chernoff = max(abs(ci_lower(gaussian, int(n), 0.3) - (0.3 - math.sqrt(2 * g_alpha / n))) for n in ns)
    results.append(_result("chernoff_match_gaussian", chernoff <= 1e-10, len(ns), 1e-10,
        f"max deviation from xbar - sqrt(2 g / n) = {chernoff:.3e}"))

    bernoulli = glr_cs_config(Bernoulli(), ALPHA, 10, 1000)
    residual = max(abs(n * float(Bernoulli().divergence(0.6, ci_lower(bernoulli, int(n), 0.6)))
        - bernoulli.g_values[0]) for n in ns[ns >= 50])
    results.append(_result("chernoff_match_bernoulli", residual <= 1e-6, int(np.sum(ns >= 50)), 1e-6,
        f"max |n D(xbar, lower) - g| = {residual:.3e}"))

    rng = replication_rng(seed, 3)
    pairs = list(zip(rng.integers(1, 5000, 30), rng.uniform(-1, 1, 30)))
    exceeded = [n for n, xbar in pairs if ci_lower(gaussian, int(n), float(xbar)) > xbar]
    results.append(_result("lower_bound_below_mean", not exceeded, len(pairs), 0.0,
        f"lower above xbar at n={exceeded}"))

    far = 0.3 - ci_lower(gaussian, 10 ** 12, 0.3)
    edge = 0.3 - ci_lower(gaussian, 1000, 0.3)
    results.append(_result("radius_bounded_away_from_zero", far >= 0.4 * edge, 1, 0.4,
        f"radius {far:.4e} at n=1e12, {edge:.4e} at n_max"))

    for name, (family, mu0, _, null_means) in FAMILY_SETUPS.items():
        glr = glr_cs_config(family, ALPHA, 10, 500)
        mixture = mixture_cs_config(family, ALPHA, 10, 500)
        ns = np.arange(1, 1001, dtype=float)
        violations = 0
        paths = simulate_block(sampler_for(name, mu0), seed, np.arange(reps), 1000)
        xbar = np.cumsum(paths, axis=-1) / ns
        for null_mean in null_means:
            glr_out = cs_rejects(glr, null_mean, ns, xbar)
            mixture_out = cs_rejects(mixture, null_mean, ns, xbar)
            violations += int(np.sum(glr_out & ~mixture_out))
        results.append(_result(f"mixture_contained_in_glr_{name}", violations == 0, reps, 0.0,
            f"{violations} (path, n, mu0) points rejected by GLR-like but kept by the mixture"))
    return results


def check_multistream(seed: int, reps: int) -> List[PropertyResult]:
    """Calibrated epsilon against the closed-form tail bound, and the null
    crossing frequency of the combined test
    """

    c = 2.0
    cal = MultiStreamCal(K=2, h_funcs=[LogInverse(c), LogInverse(c)], mc_reps=20000, seed=seed)
    epsilon = calibrate_multistream(cal, ALPHA)
    tail, tail_se = mc_tail(sample_h_sums(cal), epsilon)
    bound = float(log_inverse_tail_bound(2, epsilon / c))

    test = MultiStreamTest([SubGaussian(), SubGaussian()], [0.0, 0.0], c, epsilon)

    def sample(rng: np.random.Generator, length: int) -> np.ndarray:
        return rng.standard_normal((2, length))

    times = stopping_times(test.first_crossing, sample, seed, reps, 500)
    rate = float(np.mean(np.isfinite(times)))
    se = mc_se(ALPHA, reps)
    return [
        _result("multistream_calibration", float(tail) <= bound + 3 * float(tail_se), cal.mc_reps,
            3 * float(tail_se), f"epsilon {epsilon:.4f}: tail {float(tail):.4f}, bound {bound:.4f}"),
        _result("multistream_null_crossing", rate <= ALPHA + 3 * se, reps, 3 * se,
            f"null crossing rate {rate:.4f}"),
    ]


def check_high_probability_stop(seed: int, reps: int) -> List[PropertyResult]:
    """P(N <= t_high(delta)) >= 1 - delta for the log-log test, and the
    closed-form bound on t_high holding just as often
    """

    family = SubGaussian()
    rule = SglrNoSepRule(family=family, mu0=0.0, c=2.0, alpha=0.25)
    deltas = (0.05, 0.2)
    horizon = int(math.ceil(max(t_high_bound(family, 0.5, 0.0, 2.0, delta) for delta in deltas))) + 1
    times = stopping_times(_rule_times([rule]), sampler_for("gaussian", 0.5), seed, reps, horizon)[0]
    results = []
    for delta in deltas:
        se = mc_se(delta, reps)
        t_value = t_high(family, 0.5, 0.0, 2.0, delta)
        bound = t_high_bound(family, 0.5, 0.0, 2.0, delta)
        within = float(np.mean(times <= t_value))
        within_bound = float(np.mean(times <= bound))
        results.append(_result(f"t_high_delta_{delta}", within >= 1 - delta - 3 * se, reps, 3 * se,
            f"P(N <= {t_value}) = {within:.4f}"))
        results.append(_result(f"t_high_bound_delta_{delta}", within_bound >= 1 - delta - 3 * se, reps,
            3 * se, f"P(N <= {bound:.1f}) = {within_bound:.4f}"))
    return results


def check_determinism(seed: int) -> List[PropertyResult]:
    """Stopping times don't depend on the worker count or block size
    """

    family, mu0, mu1, _ = FAMILY_SETUPS["bernoulli"]
    rule_times = _rule_times([SglrConstRule.from_alpha(family, mu0, mu1, ALPHA)])
    sampler = sampler_for("bernoulli", mu1)
    serial = stopping_times(rule_times, sampler, seed, 60, 300, workers=1, block_size=60)
    parallel = stopping_times(rule_times, sampler, seed, 60, 300, workers=3, block_size=7)
    return [_result("worker_independent_results", np.array_equal(serial, parallel), 60, 0.0,
        "serial and parallel stopping times agree")]


def run_property_suite(seed: int, reps: int = 500, coverage_reps: int = 2000,
        coverage_horizon: int = 10000, raise_on_failure: bool = False) -> List[PropertyResult]:
    """Runs every property check with the given seed

    :param seed: base seed of all random draws
    :type seed: int
    :param reps: Monte Carlo paths per check
    :type reps: int
    :param coverage_reps: paths per coverage check
    :type coverage_reps: int
    :param coverage_horizon: horizon of the coverage checks
    :type coverage_horizon: int
    :param raise_on_failure: raise PropertyCheckError instead of returning failed results
    :type raise_on_failure: bool
    :return: list of PropertyResult in run order
    """

    results: List[PropertyResult] = []
    results += check_families(seed)
    results += check_divergences(seed)
    results += check_boundaries(seed)
    results += check_type1(seed, reps)
    results += check_ordering(seed, reps)
    results += check_power_and_updates(seed, reps)
    results += check_confidence_sequences(seed, coverage_reps, coverage_horizon)
    results += check_multistream(seed, reps)
    results += check_high_probability_stop(seed, reps)
    results += check_determinism(seed)
    failed = [result.name for result in results if not result.passed]
    log.info(f"property suite finished: {len(results) - len(failed)} of {len(results)} passed")
    if failed and raise_on_failure:
        raise PropertyCheckError(f"failed properties: {', '.join(failed)}")
    return results
