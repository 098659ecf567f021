#include "fisim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fisim {
namespace {

double l2_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

void project_into(std::vector<double>& x, std::span<const double> lower,
                  std::span<const double> upper) {
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::clamp(x[i], lower[i], upper[i]);
}

struct ContractTerms {
    double payout = 0.0;
    double premium = 0.0;
};

ContractTerms resolve_contract(const DecisionProblem& p, double gamma,
                               double baseline_profit) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("coverage gamma must be nonnegative and finite");
    if (gamma == 0.0) return {};
    if (!(baseline_profit > 0.0))
        throw std::invalid_argument(
            "positive coverage needs a positive baseline profit to set the payout scale");
    const Contract c = price_contract(p.contract_index, p.contract_trigger,
                                      gamma * baseline_profit, p.shocks);
    return {c.payout, c.premium};
}

// Evaluation context for one solve: panel pointers fixed, contract terms
// supplied per candidate (they depend on gamma in joint solves).
struct EvalContext {
    const DecisionProblem* problem = nullptr;
    const double* theta = nullptr;
    const double* omega = nullptr;
    const double* index = nullptr;
    std::size_t n = 0;
    KernelKind kernel = KernelKind::automatic;

    PanelWorkload workload(std::span<const double> x, const ContractTerms& terms) const {
        const ProductionSpec& prod = problem->production;
        PanelWorkload w;
        w.theta = theta;
        w.omega = omega;
        w.index = index;
        w.n = n;
        w.mean_output = prod.mean_output(x);
        w.risk_output = prod.risk_output(x);
        w.cost = prod.cost(x);
        w.biomass_mean = prod.biomass_mean;
        w.payout = terms.payout;
        w.premium = terms.premium;
        w.trigger = problem->contract_trigger;
        w.risk_aversion = problem->prefs.risk_aversion;
        return w;
    }

    double eu(std::span<const double> x, const ContractTerms& terms) const {
        return panel_expected_utility(workload(x, terms), kernel);
    }
};

EvalContext make_context(const DecisionProblem& p) {
    EvalContext ctx;
    ctx.problem = &p;
    ctx.theta = p.panel.theta.data();
    ctx.omega = p.panel.omega.data();
    ctx.index = p.panel.column(p.contract_index).data();
    ctx.n = p.panel.size();
    ctx.kernel = p.config.kernel;
    return ctx;
}

// True when no single-coordinate probe of size check_delta_rel (relative,
// staying inside the box) improves the objective by more than tol.
bool locally_optimal(const std::function<double(std::span<const double>)>& objective,
                     std::span<const double> x, double value,
                     std::span<const double> lower, std::span<const double> upper,
                     double delta_rel, double tol, std::size_t& evaluations) {
    std::vector<double> probe(x.begin(), x.end());
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double delta = delta_rel * std::max(std::abs(x[i]), delta_rel);
        for (double sign : {1.0, -1.0}) {
            const double candidate = x[i] + sign * delta;
            if (candidate < lower[i] || candidate > upper[i]) continue;
            probe[i] = candidate;
            ++evaluations;
            const double v = objective(probe);
            probe[i] = x[i];
            if (v > value + tol) return false;
        }
    }
    return true;
}

struct StartPoint {
    std::vector<double> x;
};

// Shared driver: multi-start Nelder-Mead plus the local-optimality check.
OptimalChoice maximize_multistart(
    const std::function<double(std::span<const double>)>& objective,
    const std::vector<StartPoint>& starts, std::span<const double> lower,
    std::span<const double> upper, const OptimizerConfig& cfg) {
    if (starts.empty()) throw std::invalid_argument("no start points");

    const std::size_t per_start =
        std::max<std::size_t>(cfg.max_evaluations / starts.size(), 16);

    std::size_t evaluations = 0;
    std::vector<double> best_x;
    double best_value = -std::numeric_limits<double>::infinity();
    for (const StartPoint& s : starts) {
        NelderMeadResult r = nelder_mead_maximize(objective, s.x, lower, upper,
                                                  cfg.simplex_rel_tol, cfg.eu_tol,
                                                  per_start);
        evaluations += r.evaluations;
        const bool better = r.value > best_value + cfg.eu_tol;
        const bool tied = std::abs(r.value - best_value) <= cfg.eu_tol &&
                          l2_norm(r.x) < l2_norm(best_x);
        if (best_x.empty() || better || tied) {
            best_value = r.value;
            best_x = std::move(r.x);
        }
    }

    OptimalChoice choice;
    choice.converged = locally_optimal(objective, best_x, best_value, lower, upper,
                                       cfg.check_delta_rel, cfg.eu_tol, evaluations);
    choice.inputs = std::move(best_x);
    choice.expected_utility = best_value;
    choice.evaluations = evaluations;
    return choice;
}

std::vector<StartPoint> input_starts(const DecisionProblem& p) {
    std::vector<double> anchor = deterministic_optimum(p.production);
    for (double& v : anchor) v = std::clamp(v, p.config.input_min, p.config.input_max);
    std::vector<StartPoint> starts;
    for (double scale : {1.0, 0.5, 2.0}) {
        StartPoint s;
        s.x = anchor;
        for (double& v : s.x) v = std::clamp(v * scale, p.config.input_min, p.config.input_max);
        starts.push_back(std::move(s));
    }
    return starts;
}

} // namespace

void DecisionProblem::validate() const {
    production.validate();
    shocks.validate();
    prefs.validate();
    if (panel.size() == 0) throw std::invalid_argument("decision problem has an empty panel");
    if (panel.theta.size() != panel.omega.size())
        throw std::invalid_argument("panel columns disagree in length");
    if (panel.spec_hash != shock_spec_hash(shocks))
        throw std::invalid_argument("panel was sampled from a different shock spec");
    if (!(config.input_min > 0.0 && config.input_min < config.input_max))
        throw std::invalid_argument("input bounds must satisfy 0 < min < max");
    if (!(config.gamma_max > 0.0))
        throw std::invalid_argument("gamma_max must be positive");
    if (!(config.simplex_rel_tol > 0.0 && config.eu_tol > 0.0 && config.check_delta_rel > 0.0))
        throw std::invalid_argument("optimizer tolerances must be positive");
    if (config.max_evaluations < 16)
        throw std::invalid_argument("evaluation budget is too small");
}

std::vector<double> deterministic_optimum(const ProductionSpec& spec) {
    spec.validate();
    double alpha_sum = 0.0;
    for (const InputSpec& in : spec.inputs) alpha_sum += in.alpha;
    if (alpha_sum >= 2.0)
        throw std::invalid_argument(
            "deterministic optimum needs sum(alpha) < 2 (decreasing returns against quadratic cost)");

    // From x_i = sqrt(alpha_i B f / (2 c_i)) and f = prod x_i^alpha_i:
    // ln f = [sum_i (alpha_i/2) ln(alpha_i B / (2 c_i))] / (1 - sum(alpha)/2).
    double acc = 0.0;
    for (const InputSpec& in : spec.inputs)
        acc += 0.5 * in.alpha * std::log(in.alpha * spec.biomass_mean / (2.0 * in.cost_coeff));
    const double log_f = acc / (1.0 - 0.5 * alpha_sum);

    std::vector<double> x(spec.inputs.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::sqrt(spec.inputs[i].alpha * spec.biomass_mean * std::exp(log_f) /
                         (2.0 * spec.inputs[i].cost_coeff));
    return x;
}

double expected_utility(const DecisionProblem& problem, std::span<const double> x,
                        double gamma, double baseline_profit) {
    problem.validate();
    if (x.size() != problem.production.input_count())
        throw std::invalid_argument("input vector size does not match the production spec");
    for (double xi : x)
        if (!(xi > 0.0) || !std::isfinite(xi))
            throw std::invalid_argument("input levels must be positive and finite");
    const ContractTerms terms = resolve_contract(problem, gamma, baseline_profit);
    return make_context(problem).eu(x, terms);
}

OptimalChoice optimize_inputs(const DecisionProblem& problem, double gamma,
                              double baseline_profit) {
    problem.validate();
    const EvalContext ctx = make_context(problem);
    const ContractTerms terms = resolve_contract(problem, gamma, baseline_profit);

    const std::size_t dim = problem.production.input_count();
    std::vector<double> lower(dim, problem.config.input_min);
    std::vector<double> upper(dim, problem.config.input_max);

    const auto objective = [&](std::span<const double> x) { return ctx.eu(x, terms); };
    OptimalChoice choice =
        maximize_multistart(objective, input_starts(problem), lower, upper, problem.config);

    choice.gamma = gamma;
    choice.expected_profit = panel_mean_profit(ctx.workload(choice.inputs, terms));
    choice.expected_harvest =
        problem.production.biomass_mean * problem.production.mean_output(choice.inputs);
    return choice;
}

OptimalChoice baseline(const DecisionProblem& problem) {
    OptimalChoice choice = optimize_inputs(problem, 0.0, 0.0);
    if (!(choice.expected_profit > 0.0))
        throw std::runtime_error(
            "baseline expected profit is nonpositive; coverage has no meaningful scale");
    return choice;
}

OptimalChoice optimize_inputs_and_coverage(const DecisionProblem& problem) {
    const OptimalChoice base = baseline(problem);
    const double scale = base.expected_profit;
    const EvalContext ctx = make_context(problem);

    const std::size_t dim = problem.production.input_count();
    std::vector<double> lower(dim + 1, problem.config.input_min);
    std::vector<double> upper(dim + 1, problem.config.input_max);
    lower[dim] = 0.0;
    upper[dim] = problem.config.gamma_max;

    const auto objective = [&](std::span<const double> y) {
        const std::span<const double> x = y.first(dim);
        return ctx.eu(x, resolve_contract(*ctx.problem, y[dim], scale));
    };

    // Input starts as in the fixed-gamma solve, staggered over coverage, plus
    // the baseline optimum at high coverage.
    std::vector<StartPoint> starts = input_starts(problem);
    const double gamma_cap = problem.config.gamma_max;
    starts[0].x.push_back(std::min(0.5, gamma_cap));
    starts[1].x.push_back(std::min(1.0, gamma_cap));
    starts[2].x.push_back(std::min(0.25, gamma_cap));
    StartPoint from_base;
    from_base.x = base.inputs;
    from_base.x.push_back(std::min(1.0, gamma_cap));
    starts.push_back(std::move(from_base));

    OptimalChoice joint =
        maximize_multistart(objective, starts, lower, upper, problem.config);
    joint.evaluations += base.evaluations;

    // gamma = 0 reproduces the baseline, so never return anything below it.
    if (joint.expected_utility < base.expected_utility) {
        OptimalChoice fallback = base;
        fallback.evaluations = joint.evaluations;
        return fallback;
    }

    OptimalChoice choice;
    choice.gamma = joint.inputs.back();
    choice.inputs.assign(joint.inputs.begin(), joint.inputs.end() - 1);
    choice.expected_utility = joint.expected_utility;
    choice.converged = joint.converged;
    choice.evaluations = joint.evaluations;
    choice.expected_profit = panel_mean_profit(
        ctx.workload(choice.inputs, resolve_contract(problem, choice.gamma, scale)));
    choice.expected_harvest =
        problem.production.biomass_mean * problem.production.mean_output(choice.inputs);
    return choice;
}

NelderMeadResult nelder_mead_maximize(
    const std::function<double(std::span<const double>)>& objective,
    std::span<const double> start, std::span<const double> lower,
    std::span<const double> upper, double simplex_rel_tol, double value_tol,
    std::size_t max_evaluations) {
    const std::size_t dim = start.size();
    if (dim == 0) throw std::invalid_argument("empty start point");
    if (lower.size() != dim || upper.size() != dim)
        throw std::invalid_argument("bound sizes do not match the start point");
    for (std::size_t i = 0; i < dim; ++i)
        if (!(lower[i] < upper[i]))
            throw std::invalid_argument("bounds must satisfy lower < upper");

    struct Vertex {
        std::vector<double> x;
        double value;
    };

    std::size_t evaluations = 0;
    const auto eval = [&](const std::vector<double>& x) {
        ++evaluations;
        return objective(x);
    };

    std::vector<Vertex> simplex;
    simplex.reserve(dim + 1);
    {
        std::vector<double> x0(start.begin(), start.end());
        project_into(x0, lower, upper);
        simplex.push_back({x0, eval(x0)});
        for (std::size_t j = 0; j < dim; ++j) {
            std::vector<double> xj = x0;
            const double step = 0.1 * std::max(std::abs(x0[j]), 1.0);
            xj[j] = std::min(x0[j] + step, upper[j]);
            if (xj[j] == x0[j]) xj[j] = std::max(x0[j] - step, lower[j]);
            simplex.push_back({xj, eval(xj)});
        }
    }

    const auto by_value_desc = [](const Vertex& a, const Vertex& b) {
        return a.value > b.value;
    };
    std::sort(simplex.begin(), simplex.end(), by_value_desc);

    std::vector<double> centroid(dim), candidate(dim);
    while (evaluations < max_evaluations) {
        // Convergence: simplex collapsed in x, or flat in value.
        double size = 0.0;
        const Vertex& best = simplex.front();
        double best_scale = 1.0;
        for (double v : best.x) best_scale = std::max(best_scale, std::abs(v));
        for (const Vertex& v : simplex)
            for (std::size_t j = 0; j < dim; ++j)
                size = std::max(size, std::abs(v.x[j] - best.x[j]));
        const double spread = best.value - simplex.back().value;
        if (size <= simplex_rel_tol * best_scale ||
            spread <= value_tol * std::max(1.0, std::abs(best.value)))
            break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i].x[j];
        for (double& c : centroid) c /= static_cast<double>(dim);
        const Vertex& worst = simplex.back();

        const auto blend = [&](double coeff) {
            for (std::size_t j = 0; j < dim; ++j)
                candidate[j] = centroid[j] + coeff * (centroid[j] - worst.x[j]);
            project_into(candidate, lower, upper);
        };

        blend(1.0);  // reflection
        const double reflected = eval(candidate);
        if (reflected > simplex.front().value) {
            std::vector<double> reflected_x = candidate;
            blend(2.0);  // expansion
            const double expanded = eval(candidate);
            if (expanded > reflected)
                simplex.back() = {candidate, expanded};
            else
                simplex.back() = {std::move(reflected_x), reflected};
        } else if (reflected > simplex[dim - 1].value) {
            simplex.back() = {candidate, reflected};
        } else if (reflected > worst.value) {
            std::vector<double> reflected_x = candidate;
            blend(0.5);  // outside contraction
            const double contracted = eval(candidate);
            if (contracted >= reflected)
                simplex.back() = {candidate, contracted};
            else
                simplex.back() = {std::move(reflected_x), reflected};
        } else {
            blend(-0.5);  // inside contraction
            const double contracted = eval(candidate);
            if (contracted > worst.value) {
                simplex.back() = {candidate, contracted};
            } else {
                // Shrink toward the best vertex.
                for (std::size_t i = 1; i <= dim; ++i) {
                    for (std::size_t j = 0; j < dim; ++j)
                        simplex[i].x[j] = best.x[j] + 0.5 * (simplex[i].x[j] - best.x[j]);
                    simplex[i].value = eval(simplex[i].x);
                    if (evaluations >= max_evaluations) break;
                }
            }
        }
        std::sort(simplex.begin(), simplex.end(), by_value_desc);
    }

    std::sort(simplex.begin(), simplex.end(), by_value_desc);
    return {simplex.front().x, simplex.front().value, evaluations};
}

} // namespace fisim
