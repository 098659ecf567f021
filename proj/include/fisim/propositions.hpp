#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fisim/optimizer.hpp"

// Sign predictions about how index insurance shifts marginal incentives and
// optimal behavior, and harnesses that test them on solved problems. Each
// check returns machine-readable reports rather than asserting, so the same
// code backs unit tests, the verification CLI, and the acceptance suite.
namespace fisim {

enum class Sign { positive, negative, zero, ambiguous };

const char* sign_name(Sign s);

// Percent-change magnitudes below this are classified Sign::zero: optimizer
// resolution noise, not evidence of direction.
inline constexpr double response_noise_floor_pct = 0.1;

struct SignReport {
    std::string claim;      // behavior-keyed id, e.g. "omega-riskdec-input-response"
    std::string context;    // cell parameters, human-readable
    Sign predicted = Sign::ambiguous;
    bool strict = false;    // strict: must clear the floor; weak: zero passes
    double observed = 0.0;  // gap estimate or percent change
    Sign observed_sign = Sign::zero;
    bool pass = true;
    std::string note;
};

// Classifies an observed value against a prediction. Ambiguous predictions
// always pass (recorded only). Strict claims fail on zero.
SignReport make_sign_report(std::string claim, std::string context, Sign predicted,
                            bool strict, double observed, double floor,
                            std::string note = {});

// --- marginal incentive gap -------------------------------------------------
//
// At the baseline optimum, estimates E[dprofit/dx_i | index < trigger]
// - E[dprofit/dx_i | index > trigger] by central finite differences of
// profit averaged over the panel split by contract state. The gap's sign
// says which state insurance transfers income away from: a negative gap
// (marginal profit higher in the good state) means payouts relax the bad
// state exactly where extra input pays least, so input use rises, and vice
// versa. Predictions: theta-indexed contracts are always negative; omega-
// indexed contracts take the sign opposite to beta; under perfect
// correlation, negative when beta > 0 and ambiguous when beta < 0.
// One report per input. Throws std::runtime_error if either state holds
// fewer than 50 draws.
std::vector<SignReport> check_marginal_profit_gap(const DecisionProblem& problem,
                                                  ShockVar index, double trigger,
                                                  double fd_delta_rel = 1e-4);

// --- input response to coverage ----------------------------------------------
//
// Single-input problems only. Solves x*(gamma) over the given coverage levels
// (common panel), reports the percent change from gamma = 0 to the highest
// level, and notes whether the path is monotone. Prediction table:
//   theta-indexed (standard or risky): positive, weak;
//   omega-indexed: sign(beta), strict;
//   perfectly correlated: positive and strict when beta > 0, ambiguous when
//   beta < 0 (offsetting incentives).
SignReport check_input_response(const DecisionProblem& problem,
                                std::span<const double> gamma_levels);

// --- multi-input direction ---------------------------------------------------
//
// Solves baseline and jointly-insured optima. For omega-indexed contracts,
// evaluates the pairwise alignment condition at the baseline optimum
// (sign of d2EU/dx_i dx_j must match sign(beta_i * beta_j) for every pair,
// by central finite differences); when it holds, each input is predicted to
// move in the direction of its own beta (strict), otherwise the per-input
// reports are recorded as ambiguous. Theta-indexed contracts predict every
// input weakly up. A final report checks that when all inputs move the same
// direction, expected harvest moves with them.
std::vector<SignReport> check_multi_input(const DecisionProblem& problem);

// --- suites -------------------------------------------------------------------
//
// Fixed reduced grids (48 cells each for the gap and response suites) used
// by `verify` and the acceptance tests. `draws` scales fidelity: 500 for the
// quick tier, 1e5 for gap acceptance, 1000 for response cells. jobs = 0
// means one worker per available core.
struct SuiteOptions {
    std::size_t draws = 1000;
    std::uint64_t base_seed = 42;
    unsigned jobs = 0;
    KernelKind kernel = KernelKind::automatic;
    bool reduced = false;  // quick tier: fewer cells and coverage levels
};

std::vector<SignReport> run_marginal_gap_suite(const SuiteOptions& options);
std::vector<SignReport> run_input_response_suite(const SuiteOptions& options);
std::vector<SignReport> run_multi_input_suite(const SuiteOptions& options);

} // namespace fisim
