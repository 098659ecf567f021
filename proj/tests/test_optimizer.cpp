#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fisim/optimizer.hpp"

using namespace fisim;

namespace {

DecisionProblem make_problem(double alpha, double beta, double a,
                             double sigma_theta, double sigma_omega,
                             std::size_t draws = 1000, std::uint64_t seed = 42) {
    DecisionProblem p;
    p.production.inputs = {{"x", alpha, beta, 0.25}};
    p.shocks = {sigma_theta, sigma_omega};
    p.panel = sample_shocks(p.shocks, draws, seed);
    p.prefs.risk_aversion = a;
    return p;
}

} // namespace

TEST_CASE("closed-form optimum matches hand-derived values") {
    // x* = (alpha B / (2c))^(1/(2-alpha)), frozen from an independent
    // evaluation of that formula.
    const struct {
        double alpha, cost, expected;
    } cases[] = {
        {0.25, 0.10, 1.1359969105976926},
        {0.25, 0.25, 0.67295009631617808},
        {0.25, 0.50, 0.45286183213195336},
        {0.50, 0.10, 1.8420157493201932},
        {0.50, 0.25, 1.0},
        {0.50, 0.50, 0.6299605249474366},
        {0.75, 0.10, 2.8788896222803313},
        {0.75, 0.25, 1.3831618672225916},
        {0.75, 0.50, 0.79441788078660913},
    };
    for (const auto& c : cases) {
        ProductionSpec spec;
        spec.inputs = {{"x", c.alpha, 0.0, c.cost}};
        const std::vector<double> x = deterministic_optimum(spec);
        REQUIRE(x.size() == 1);
        CHECK(x[0] == doctest::Approx(c.expected).epsilon(1e-12));
    }
}

TEST_CASE("closed-form optimum handles several inputs") {
    ProductionSpec two;
    two.inputs = {{"a", 0.5, 0.0, 0.25}, {"b", 0.3, 0.0, 0.25}};
    std::vector<double> x = deterministic_optimum(two);
    CHECK(x[0] == doctest::Approx(0.93814270598528526).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(0.72668221532939425).epsilon(1e-12));

    ProductionSpec three;
    three.inputs = {{"capital", 0.294, 0.0, 0.25},
                    {"labor", 0.421, 0.0, 0.25},
                    {"fuel", 0.457, 0.0, 0.25}};
    x = deterministic_optimum(three);
    CHECK(x[0] == doctest::Approx(0.65159773548208011).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(0.77973485668990106).epsilon(1e-12));
    CHECK(x[2] == doctest::Approx(0.8123889380098277).epsilon(1e-12));
    // First-order conditions: 2 c x_i^2 = alpha_i f(x) at the optimum.
    const double f = three.mean_output(x);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(2.0 * 0.25 * x[i] * x[i] ==
              doctest::Approx(three.inputs[i].alpha * f).epsilon(1e-12));

    ProductionSpec saturated;
    saturated.inputs = {{"a", 1.0, 0.0, 0.25}, {"b", 1.0, 0.0, 0.25}};
    CHECK_THROWS_AS(deterministic_optimum(saturated), std::invalid_argument);
}

TEST_CASE("degenerate panel reproduces the deterministic solution") {
    // Zero sigmas make expected utility a monotone transform of profit, so
    // the numeric optimizer must land on the closed form.
    for (double alpha : {0.25, 0.5, 0.75}) {
        DecisionProblem p = make_problem(alpha, 0.3, 2.0, 0.0, 0.0, 64);
        const OptimalChoice c = optimize_inputs(p, 0.0, 0.0);
        const std::vector<double> exact = deterministic_optimum(p.production);
        CHECK(c.converged);
        CHECK(c.inputs[0] == doctest::Approx(exact[0]).epsilon(1e-4));
    }
    DecisionProblem canon = make_problem(0.5, 0.0, 2.0, 0.0, 0.0, 64);
    const OptimalChoice c = optimize_inputs(canon, 0.0, 0.0);
    CHECK(c.expected_profit == doctest::Approx(0.75).epsilon(1e-6));
    CHECK(c.expected_harvest == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("nelder-mead solves standalone benchmark problems") {
    // Concave paraboloid, interior maximum at (0.3, -0.2) within the box.
    const auto quad = [](std::span<const double> x) {
        const double dx = x[0] - 0.3, dy = x[1] + 0.2;
        return 5.0 - 2.0 * dx * dx - 3.0 * dy * dy + 0.5 * dx * dy;
    };
    const std::vector<double> start{1.0, 1.0};
    const std::vector<double> lo{-2.0, -2.0}, hi{2.0, 2.0};
    NelderMeadResult r = nelder_mead_maximize(quad, start, lo, hi, 1e-8, 1e-12, 10000);
    CHECK(r.x[0] == doctest::Approx(0.3).epsilon(1e-4));
    CHECK(r.x[1] == doctest::Approx(-0.2).epsilon(1e-4));
    CHECK(r.value == doctest::Approx(5.0).epsilon(1e-8));

    // Maximum outside the box: solution sticks to the boundary.
    const auto ramp = [](std::span<const double> x) { return x[0]; };
    r = nelder_mead_maximize(ramp, std::vector<double>{0.0},
                             std::vector<double>{-1.0}, std::vector<double>{1.0},
                             1e-8, 1e-12, 10000);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));

    // One-dimensional curved case.
    const auto hump = [](std::span<const double> x) {
        return -std::pow(x[0] - 0.7, 2.0) * (1.0 + 0.1 * std::sin(5.0 * x[0]));
    };
    r = nelder_mead_maximize(hump, std::vector<double>{0.1},
                             std::vector<double>{0.01}, std::vector<double>{3.0},
                             1e-8, 1e-14, 10000);
    CHECK(r.x[0] == doctest::Approx(0.7).epsilon(1e-4));

    // A tiny budget still returns the best point seen; the count may
    // overshoot by one iteration (at most 1 + dim evaluations).
    r = nelder_mead_maximize(quad, start, lo, hi, 1e-10, 1e-14, 8);
    CHECK(r.evaluations <= 8 + 3);
    CHECK(r.value >= quad(start) - 1e-12);

    CHECK_THROWS_AS(nelder_mead_maximize(ramp, std::vector<double>{},
                                         std::vector<double>{},
                                         std::vector<double>{}, 1e-6, 1e-9, 100),
                    std::invalid_argument);
    CHECK_THROWS_AS(nelder_mead_maximize(ramp, std::vector<double>{0.0},
                                         std::vector<double>{1.0},
                                         std::vector<double>{-1.0}, 1e-6, 1e-9, 100),
                    std::invalid_argument);
}

TEST_CASE("stochastic solve agrees with a brute-force grid") {
    DecisionProblem p = make_problem(0.5, 0.5, 2.0, 0.2, 0.3);
    const OptimalChoice c = optimize_inputs(p, 0.0, 0.0);
    REQUIRE(c.converged);

    double best_x = 0.0, best_eu = -1e300;
    for (int i = 50; i <= 1500; ++i) {
        const double x = 1e-3 * i;
        const double eu = expected_utility(p, std::vector<double>{x}, 0.0, 0.0);
        if (eu > best_eu) {
            best_eu = eu;
            best_x = x;
        }
    }
    CHECK(std::abs(c.inputs[0] - best_x) <= 2e-3);
    CHECK(c.expected_utility >= best_eu - 1e-9);
}

TEST_CASE("background risk depresses input use") {
    // Risk-increasing harvest uncertainty pushes the optimum below the
    // deterministic level; damping uncertainty pulls it above.
    DecisionProblem inc = make_problem(0.5, 0.5, 2.0, 0.2, 0.3);
    DecisionProblem dec = make_problem(0.5, -0.5, 2.0, 0.2, 0.3);
    const double inc_x = optimize_inputs(inc, 0.0, 0.0).inputs[0];
    const double dec_x = optimize_inputs(dec, 0.0, 0.0).inputs[0];
    CHECK(inc_x < 1.0);
    CHECK(inc_x < dec_x);
}

TEST_CASE("joint coverage solve dominates the baseline") {
    DecisionProblem p = make_problem(0.5, 0.5, 2.0, 0.2, 0.3);
    const OptimalChoice base = baseline(p);
    const OptimalChoice joint = optimize_inputs_and_coverage(p);
    CHECK(joint.expected_utility >= base.expected_utility);
    CHECK(joint.gamma >= 0.0);
    CHECK(joint.gamma <= p.config.gamma_max);
    // The extraction shock is insurable here, so some coverage is bought
    // and inputs respond upward relative to the uninsured optimum.
    CHECK(joint.gamma > 0.01);
    CHECK(joint.inputs[0] > base.inputs[0]);
}

TEST_CASE("solves are deterministic and kernel-insensitive") {
    DecisionProblem p = make_problem(0.5, 0.3, 2.0, 0.2, 0.3);
    const OptimalChoice a = optimize_inputs(p, 0.0, 0.0);
    const OptimalChoice b = optimize_inputs(p, 0.0, 0.0);
    CHECK(a.inputs == b.inputs);
    CHECK(a.expected_utility == b.expected_utility);
    CHECK(a.evaluations == b.evaluations);

    if (avx2_available()) {
        DecisionProblem ps = p;
        ps.config.kernel = KernelKind::scalar;
        DecisionProblem pv = p;
        pv.config.kernel = KernelKind::avx2;
        const OptimalChoice s = optimize_inputs(ps, 0.0, 0.0);
        const OptimalChoice v = optimize_inputs(pv, 0.0, 0.0);
        // Same optimum up to solver tolerance; trajectories may differ.
        CHECK(s.inputs[0] == doctest::Approx(v.inputs[0]).epsilon(1e-3));
        CHECK(s.expected_utility == doctest::Approx(v.expected_utility).epsilon(1e-8));
    }
}

TEST_CASE("problem validation catches inconsistent state") {
    DecisionProblem p = make_problem(0.5, 0.0, 2.0, 0.2, 0.3);
    CHECK_NOTHROW(p.validate());

    DecisionProblem stale = p;
    stale.shocks.sigma_omega = 0.4;  // panel no longer matches
    CHECK_THROWS_AS(optimize_inputs(stale, 0.0, 0.0), std::invalid_argument);

    DecisionProblem empty = p;
    empty.panel = ShockPanel{};
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);

    DecisionProblem bad_bounds = p;
    bad_bounds.config.input_min = 0.0;
    CHECK_THROWS_AS(bad_bounds.validate(), std::invalid_argument);

    // Coverage without a positive profit scale is rejected.
    CHECK_THROWS_AS(expected_utility(p, std::vector<double>{1.0}, 0.5, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(expected_utility(p, std::vector<double>{1.0}, -0.1, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(expected_utility(p, std::vector<double>{-1.0}, 0.0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(expected_utility(p, std::vector<double>{1.0, 1.0}, 0.0, 0.0),
                    std::invalid_argument);
}

TEST_CASE("fixed-coverage solve records contract effects") {
    DecisionProblem p = make_problem(0.5, 0.5, 2.0, 0.2, 0.3);
    const OptimalChoice base = baseline(p);
    REQUIRE(base.expected_profit > 0.0);
    const OptimalChoice insured = optimize_inputs(p, 1.0, base.expected_profit);
    CHECK(insured.gamma == 1.0);
    CHECK(insured.converged);
    // Fair insurance on the extraction shock raises EU for this technology.
    CHECK(insured.expected_utility > base.expected_utility);
    // Expected profit moves little: the transfer is mean-zero, only the
    // input response shifts it.
    CHECK(std::abs(insured.expected_profit - base.expected_profit) < 0.2);
}
