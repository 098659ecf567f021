#pragma once

#include <span>
#include <string>
#include <vector>

#include "fisim/shocks.hpp"

// Production technology, profit, index-insurance contracts, and CARA utility.
// Output price is normalized to 1, so harvest and revenue coincide.
namespace fisim {

// One input: Cobb-Douglas mean-output elasticity alpha in (0, 1], a risk
// exponent beta (beta > 0 amplifies the extraction shock, beta < 0 damps it),
// and a quadratic cost coefficient.
struct InputSpec {
    std::string name = "x";
    double alpha = 0.5;
    double beta = 0.0;
    double cost_coeff = 0.25;
};

// standard: output = f(x) * (B + theta), the extraction shock is absent.
// risky:    output = f(x) * (B + theta) + omega * h(x).
// f(x) = prod x_i^alpha_i, h(x) = prod x_i^beta_i.
enum class ProductionMode { standard, risky };

struct ProductionSpec {
    ProductionMode mode = ProductionMode::risky;
    std::vector<InputSpec> inputs;
    double biomass_mean = 1.0;

    std::size_t input_count() const { return inputs.size(); }

    // Throws std::invalid_argument on empty inputs, alpha outside (0, 1],
    // nonpositive cost coefficients, or nonpositive biomass.
    void validate() const;

    // All three throw std::invalid_argument unless x is positive, finite,
    // and matches the input count.
    double mean_output(std::span<const double> x) const;  // f(x)
    double risk_output(std::span<const double> x) const;  // h(x); 0 in standard mode
    double cost(std::span<const double> x) const;         // sum c_i x_i^2
};

// Realized harvest and profit for one shock draw. Inputs must be positive
// and match the spec's input count (std::invalid_argument otherwise).
double harvest(const ProductionSpec& spec, std::span<const double> x,
               double theta, double omega);
double profit(const ProductionSpec& spec, std::span<const double> x,
              double theta, double omega);

// An index contract: pays `payout` when the indexed shock falls strictly
// below `trigger` (a draw equal to the trigger is the good state). The
// premium is charged in every state.
struct Contract {
    ShockVar index = ShockVar::omega;
    double trigger = 0.0;
    double payout = 0.0;   // absolute payout (same units as profit)
    double premium = 0.0;  // actuarially fair: P(index < trigger) * payout
};

// Prices a contract at the actuarially fair premium using the analytic CDF
// of the indexed variable (not an empirical frequency), so the expected net
// transfer is exactly premium-neutral. payout = 0 is allowed for any spec
// (premium 0); payout > 0 requires the indexed sigma to be positive, and
// payout must be nonnegative.
Contract price_contract(ShockVar index, double trigger, double payout,
                        const ShockSpec& shocks);

// payout - premium in the bad state (index_value < trigger), -premium otherwise.
double net_transfer(const Contract& contract, double index_value);

struct Preferences {
    double risk_aversion = 1.0;  // CARA coefficient a > 0

    void validate() const;  // throws std::invalid_argument unless a > 0
};

// u(w) = 1 - exp(-a w). The exponent is clamped to utility_exp_arg_max,
// which floors wealth at -utility_exp_arg_max / a instead of overflowing;
// the symmetric lower clamp is numerically inert (1 - exp(-50) == 1.0) and
// keeps vectorized exp implementations away from the subnormal range.
inline constexpr double utility_exp_arg_max = 700.0;
inline constexpr double utility_exp_arg_min = -50.0;

double cara_utility(const Preferences& prefs, double wealth);

// Certainty equivalent of an expected utility level: -ln(1 - eu) / a.
double certainty_equivalent(const Preferences& prefs, double expected_utility);

} // namespace fisim
