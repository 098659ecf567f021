#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fisim/economics.hpp"
#include "fisim/kernels.hpp"
#include "fisim/shocks.hpp"

// Derivative-free maximization of Monte Carlo expected utility over input
// levels, and optionally over insurance coverage jointly.
namespace fisim {

struct OptimizerConfig {
    double input_min = 1e-3;
    double input_max = 1e3;
    double gamma_max = 2.0;          // coverage bound, as a fraction of baseline profit
    double simplex_rel_tol = 1e-6;   // relative simplex diameter at convergence
    double eu_tol = 1e-9;            // objective spread / improvement tolerance
    std::size_t max_evaluations = 100000;
    double check_delta_rel = 1e-3;   // local-optimality probe size (relative)
    KernelKind kernel = KernelKind::automatic;
};

// A fisher's decision environment: technology, shock distribution, one
// sampled panel, preferences, and the contract shape (index + trigger).
// Coverage is expressed as gamma = payout / baseline expected profit and is
// resolved against the baseline profit passed to each evaluation.
struct DecisionProblem {
    ProductionSpec production;
    ShockSpec shocks;
    ShockPanel panel;
    Preferences prefs;
    ShockVar contract_index = ShockVar::omega;
    double contract_trigger = 0.0;
    OptimizerConfig config;

    // Throws std::invalid_argument if anything is inconsistent: invalid
    // production/preferences, an empty panel, or a panel whose recorded spec
    // hash does not match `shocks`.
    void validate() const;
};

struct OptimalChoice {
    std::vector<double> inputs;
    double gamma = 0.0;              // coverage fraction actually in force
    double expected_utility = 0.0;
    double expected_profit = 0.0;    // panel mean of profit + net transfer
    double expected_harvest = 0.0;   // biomass_mean * f(x), exact identity
    bool converged = false;
    std::size_t evaluations = 0;
};

// Closed-form optimum of the deterministic problem (no shocks, no contract):
// x_i = sqrt(alpha_i * B * f(x) / (2 c_i)) solved in closed form via logs.
// Requires sum(alpha) < 2, which also guarantees the stochastic objective is
// eventually decreasing. Used as the multi-start anchor and as a test oracle.
std::vector<double> deterministic_optimum(const ProductionSpec& spec);

// Expected utility of inputs x under coverage gamma (fraction of
// baseline_profit). gamma = 0 needs no baseline (pass anything);
// gamma > 0 requires baseline_profit > 0 (std::invalid_argument otherwise).
double expected_utility(const DecisionProblem& problem, std::span<const double> x,
                        double gamma, double baseline_profit);

// Maximizes expected utility over inputs at fixed coverage. Multi-start
// Nelder-Mead from {1, 0.5, 2} x deterministic_optimum, projected onto
// [input_min, input_max]; ties within eu_tol break toward the smallest
// ||x||_2. converged means no +/-check_delta_rel perturbation of any
// coordinate (staying inside the box) improves EU by more than eu_tol.
OptimalChoice optimize_inputs(const DecisionProblem& problem, double gamma,
                              double baseline_profit);

// optimize_inputs at gamma = 0. Throws std::runtime_error if the resulting
// expected profit is nonpositive: coverage is denominated in baseline profit,
// so a nonpositive baseline has no meaningful contract scale.
OptimalChoice baseline(const DecisionProblem& problem);

// Joint maximization over (inputs, gamma) with gamma in [0, gamma_max].
// Solves the baseline first to fix the payout scale; starts at the three
// input start points with staggered gamma values plus the baseline optimum,
// and never returns a point below the baseline (gamma = 0 is feasible).
OptimalChoice optimize_inputs_and_coverage(const DecisionProblem& problem);

// Generic bounded Nelder-Mead maximizer (projection onto the box), exposed
// for tests. Terminates on relative simplex size, objective spread, or the
// evaluation budget; the budget is checked at iteration entry, so the count
// can overshoot it by one iteration's evaluations (at most 1 + dim).
struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
};
NelderMeadResult nelder_mead_maximize(
    const std::function<double(std::span<const double>)>& objective,
    std::span<const double> start, std::span<const double> lower,
    std::span<const double> upper, double simplex_rel_tol, double value_tol,
    std::size_t max_evaluations);

} // namespace fisim
