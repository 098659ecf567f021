#include "fisim/economics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fisim {
namespace {

void check_inputs(const ProductionSpec& spec, std::span<const double> x) {
    if (x.size() != spec.inputs.size())
        throw std::invalid_argument("input vector size does not match the production spec");
    for (double xi : x)
        if (!(xi > 0.0) || !std::isfinite(xi))
            throw std::invalid_argument("input levels must be positive and finite");
}

} // namespace

void ProductionSpec::validate() const {
    if (inputs.empty())
        throw std::invalid_argument("production needs at least one input");
    if (!(biomass_mean > 0.0) || !std::isfinite(biomass_mean))
        throw std::invalid_argument("biomass_mean must be positive");
    for (const InputSpec& in : inputs) {
        if (!(in.alpha > 0.0 && in.alpha <= 1.0))
            throw std::invalid_argument("input '" + in.name + "': alpha must lie in (0, 1]");
        if (!(in.cost_coeff > 0.0) || !std::isfinite(in.cost_coeff))
            throw std::invalid_argument("input '" + in.name + "': cost coefficient must be positive");
        if (!std::isfinite(in.beta))
            throw std::invalid_argument("input '" + in.name + "': beta must be finite");
    }
}

double ProductionSpec::mean_output(std::span<const double> x) const {
    check_inputs(*this, x);
    double f = 1.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) f *= std::pow(x[i], inputs[i].alpha);
    return f;
}

double ProductionSpec::risk_output(std::span<const double> x) const {
    check_inputs(*this, x);
    if (mode == ProductionMode::standard) return 0.0;
    double h = 1.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) h *= std::pow(x[i], inputs[i].beta);
    return h;
}

double ProductionSpec::cost(std::span<const double> x) const {
    check_inputs(*this, x);
    double c = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) c += inputs[i].cost_coeff * x[i] * x[i];
    return c;
}

double harvest(const ProductionSpec& spec, std::span<const double> x,
               double theta, double omega) {
    spec.validate();
    check_inputs(spec, x);
    return spec.mean_output(x) * (spec.biomass_mean + theta) + omega * spec.risk_output(x);
}

double profit(const ProductionSpec& spec, std::span<const double> x,
              double theta, double omega) {
    spec.validate();
    check_inputs(spec, x);
    return spec.mean_output(x) * (spec.biomass_mean + theta) +
           omega * spec.risk_output(x) - spec.cost(x);
}

Contract price_contract(ShockVar index, double trigger, double payout,
                        const ShockSpec& shocks) {
    if (!(payout >= 0.0) || !std::isfinite(payout))
        throw std::invalid_argument("contract payout must be nonnegative and finite");
    Contract c;
    c.index = index;
    c.trigger = trigger;
    c.payout = payout;
    // Zero payout prices to zero for any shock spec, including degenerate ones.
    c.premium = payout > 0.0 ? cdf_at(shocks, index, trigger) * payout : 0.0;
    return c;
}

double net_transfer(const Contract& contract, double index_value) {
    // Strictly below the trigger pays; landing exactly on it is the good state.
    return index_value < contract.trigger ? contract.payout - contract.premium
                                          : -contract.premium;
}

void Preferences::validate() const {
    if (!(risk_aversion > 0.0) || !std::isfinite(risk_aversion))
        throw std::invalid_argument("risk aversion must be positive");
}

double cara_utility(const Preferences& prefs, double wealth) {
    prefs.validate();
    const double arg = std::clamp(-prefs.risk_aversion * wealth,
                                  utility_exp_arg_min, utility_exp_arg_max);
    return 1.0 - std::exp(arg);
}

double certainty_equivalent(const Preferences& prefs, double expected_utility) {
    prefs.validate();
    if (!(expected_utility < 1.0))
        throw std::domain_error("expected utility must lie below 1 for a CARA agent");
    return -std::log1p(-expected_utility) / prefs.risk_aversion;
}

} // namespace fisim
