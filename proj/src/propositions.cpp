#include "fisim/propositions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fisim/experiments.hpp"
#include "parallel.hpp"

namespace fisim {
namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

const char* var_name(ShockVar v) { return v == ShockVar::theta ? "theta" : "omega"; }

std::string problem_context(const DecisionProblem& p) {
    std::string s;
    s += "index=";
    s += var_name(p.contract_index);
    s += p.shocks.dependence == Dependence::perfectly_correlated ? " dep=correlated"
                                                                 : " dep=independent";
    s += p.production.mode == ProductionMode::standard ? " mode=standard" : " mode=risky";
    for (const InputSpec& in : p.production.inputs)
        s += " " + in.name + "(alpha=" + num(in.alpha) + ",beta=" + num(in.beta) + ")";
    s += " a=" + num(p.prefs.risk_aversion);
    s += " sigma_theta=" + num(p.shocks.sigma_theta);
    s += " sigma_omega=" + num(p.shocks.sigma_omega);
    s += " trigger=" + num(p.contract_trigger);
    return s;
}

struct Prediction {
    std::string claim;
    Sign sign = Sign::ambiguous;
    bool strict = false;
};

// The marginal-profit gap (bad state minus good state) determines how
// insurance shifts input incentives. Sign table, by contract index and the
// input's risk exponent.
Prediction gap_prediction(const DecisionProblem& p, ShockVar index, double beta) {
    if (p.shocks.dependence == Dependence::perfectly_correlated) {
        if (beta > 0.0) return {"correlated-riskinc-marginal-gap", Sign::negative, true};
        if (beta < 0.0) return {"correlated-riskdec-marginal-gap", Sign::ambiguous, false};
        return {"correlated-neutral-marginal-gap", Sign::negative, true};
    }
    if (index == ShockVar::theta)
        return {"theta-index-marginal-gap", Sign::negative, true};
    if (p.production.mode == ProductionMode::standard)
        return {"omega-index-no-risk-channel", Sign::ambiguous, false};
    if (beta > 0.0) return {"omega-index-riskinc-marginal-gap", Sign::negative, true};
    if (beta < 0.0) return {"omega-index-riskdec-marginal-gap", Sign::positive, true};
    return {"omega-index-neutral-marginal-gap", Sign::ambiguous, false};
}

Prediction response_prediction(const DecisionProblem& p, double beta) {
    if (p.shocks.dependence == Dependence::perfectly_correlated) {
        if (beta > 0.0) return {"correlated-riskinc-input-response", Sign::positive, true};
        if (beta < 0.0) return {"correlated-riskdec-input-response", Sign::ambiguous, false};
        return {"correlated-neutral-input-response", Sign::positive, false};
    }
    if (p.contract_index == ShockVar::theta) {
        const bool standard = p.production.mode == ProductionMode::standard;
        return {standard ? "standard-theta-input-response" : "risky-theta-input-response",
                Sign::positive, false};
    }
    if (p.production.mode == ProductionMode::standard)
        return {"standard-omega-no-risk-channel", Sign::ambiguous, false};
    if (beta >= 0.1) return {"omega-riskinc-input-response", Sign::positive, true};
    if (beta <= -0.1) return {"omega-riskdec-input-response", Sign::negative, true};
    // Inside the noise band the direction still follows beta, but only weakly.
    if (beta > 0.0) return {"omega-riskinc-input-response", Sign::positive, false};
    if (beta < 0.0) return {"omega-riskdec-input-response", Sign::negative, false};
    return {"omega-neutral-input-response", Sign::ambiguous, false};
}

DecisionProblem single_input_problem(ProductionMode mode, Dependence dep, ShockVar index,
                                     double alpha, double beta, double risk_aversion,
                                     double sigma_theta, double sigma_omega, double trigger,
                                     std::size_t draws, std::uint64_t seed,
                                     KernelKind kernel) {
    DecisionProblem p;
    p.production.mode = mode;
    p.production.inputs = {{"x", alpha, beta, 0.25}};
    p.shocks = {sigma_theta, sigma_omega, dep};
    p.panel = sample_shocks(p.shocks, draws, seed);
    p.prefs.risk_aversion = risk_aversion;
    p.contract_index = index;
    p.contract_trigger = trigger;
    p.config.kernel = kernel;
    return p;
}

} // namespace

const char* sign_name(Sign s) {
    switch (s) {
        case Sign::positive: return "positive";
        case Sign::negative: return "negative";
        case Sign::zero: return "zero";
        case Sign::ambiguous: return "ambiguous";
    }
    return "unknown";
}

SignReport make_sign_report(std::string claim, std::string context, Sign predicted,
                            bool strict, double observed, double floor,
                            std::string note) {
    SignReport r;
    r.claim = std::move(claim);
    r.context = std::move(context);
    r.predicted = predicted;
    r.strict = strict;
    r.observed = observed;
    r.observed_sign = std::abs(observed) <= floor
                          ? Sign::zero
                          : (observed > 0.0 ? Sign::positive : Sign::negative);
    if (predicted == Sign::ambiguous)
        r.pass = true;  // recorded, never failed
    else if (strict)
        r.pass = r.observed_sign == predicted;
    else
        r.pass = r.observed_sign == predicted || r.observed_sign == Sign::zero;
    r.note = std::move(note);
    return r;
}

std::vector<SignReport> check_marginal_profit_gap(const DecisionProblem& problem,
                                                  ShockVar index, double trigger,
                                                  double fd_delta_rel) {
    problem.validate();
    if (!(fd_delta_rel > 0.0))
        throw std::invalid_argument("fd_delta_rel must be positive");

    const OptimalChoice base = baseline(problem);
    const std::vector<double>& idx = problem.panel.column(index);

    // State-conditional shock means; the per-draw finite difference of profit
    // is linear in (theta, omega), so averaging the shocks first is exact.
    std::size_t n_bad = 0, n_good = 0;
    double theta_bad = 0.0, theta_good = 0.0, omega_bad = 0.0, omega_good = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < trigger) {
            ++n_bad;
            theta_bad += problem.panel.theta[i];
            omega_bad += problem.panel.omega[i];
        } else {
            ++n_good;
            theta_good += problem.panel.theta[i];
            omega_good += problem.panel.omega[i];
        }
    }
    if (n_bad < 50 || n_good < 50)
        throw std::runtime_error("state split too thin for conditional means: " +
                                 std::to_string(n_bad) + " payout draws / " +
                                 std::to_string(n_good) + " others");
    theta_bad /= static_cast<double>(n_bad);
    omega_bad /= static_cast<double>(n_bad);
    theta_good /= static_cast<double>(n_good);
    omega_good /= static_cast<double>(n_good);

    const ProductionSpec& prod = problem.production;
    std::vector<SignReport> reports;
    reports.reserve(prod.input_count());
    std::vector<double> xp(base.inputs), xm(base.inputs);
    for (std::size_t i = 0; i < prod.input_count(); ++i) {
        const double delta = fd_delta_rel * std::max(base.inputs[i], fd_delta_rel);
        xp[i] = base.inputs[i] + delta;
        xm[i] = base.inputs[i] - delta;
        const double df = prod.mean_output(xp) - prod.mean_output(xm);
        const double dh = prod.risk_output(xp) - prod.risk_output(xm);
        xp[i] = xm[i] = base.inputs[i];

        const double d_bad =
            (df * (prod.biomass_mean + theta_bad) + dh * omega_bad) / (2.0 * delta);
        const double d_good =
            (df * (prod.biomass_mean + theta_good) + dh * omega_good) / (2.0 * delta);
        const double gap = d_bad - d_good;

        const Prediction pred = gap_prediction(problem, index, prod.inputs[i].beta);
        std::string note = "input " + prod.inputs[i].name +
                           ": marginal profit, payout state minus good state, at the uninsured optimum";
        reports.push_back(make_sign_report(pred.claim, problem_context(problem), pred.sign,
                                           pred.strict, gap, 0.0, std::move(note)));
        if (!base.converged) {
            reports.back().pass = false;
            reports.back().note += "; baseline solve did not converge";
        }
    }
    return reports;
}

SignReport check_input_response(const DecisionProblem& problem,
                                std::span<const double> gamma_levels) {
    problem.validate();
    if (problem.production.input_count() != 1)
        throw std::invalid_argument("input-response check covers single-input problems only");
    if (gamma_levels.size() < 2 || gamma_levels.front() != 0.0)
        throw std::invalid_argument("gamma levels must start at 0 and contain at least two points");
    for (std::size_t i = 1; i < gamma_levels.size(); ++i)
        if (!(gamma_levels[i] > gamma_levels[i - 1]))
            throw std::invalid_argument("gamma levels must be strictly increasing");

    const OptimalChoice base = baseline(problem);
    std::vector<double> path{base.inputs[0]};
    bool all_converged = base.converged;
    for (std::size_t i = 1; i < gamma_levels.size(); ++i) {
        const OptimalChoice c =
            optimize_inputs(problem, gamma_levels[i], base.expected_profit);
        path.push_back(c.inputs[0]);
        all_converged = all_converged && c.converged;
    }

    const double pct = (path.back() - path.front()) / path.front() * 100.0;

    // Monotone up to optimizer resolution; counter-moves beyond it are noted.
    const double direction = pct >= 0.0 ? 1.0 : -1.0;
    double worst_counter = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const double step = direction * (path[i] - path[i - 1]);
        if (step < 0.0)
            worst_counter =
                std::max(worst_counter, -step / std::max(1.0, std::abs(path[i - 1])));
    }
    const bool monotone = worst_counter <= 1e-5;

    const Prediction pred = response_prediction(problem, problem.production.inputs[0].beta);
    std::string note = "x(0)=" + num(path.front()) + " x(" + num(gamma_levels.back()) +
                       ")=" + num(path.back());
    note += monotone ? ", monotone in coverage"
                     : ", non-monotone (max counter-move " + num(worst_counter) + " rel)";
    SignReport r = make_sign_report(pred.claim, problem_context(problem), pred.sign,
                                    pred.strict, pct, response_noise_floor_pct,
                                    std::move(note));
    if (!all_converged) {
        r.pass = false;
        r.note += "; a solve did not converge";
    }
    return r;
}

std::vector<SignReport> check_multi_input(const DecisionProblem& problem) {
    problem.validate();
    if (problem.production.input_count() < 2)
        throw std::invalid_argument("multi-input check needs at least two inputs");

    const OptimalChoice base = baseline(problem);
    const OptimalChoice joint = optimize_inputs_and_coverage(problem);
    const bool converged = base.converged && joint.converged;
    const std::string context = problem_context(problem);
    const ProductionSpec& prod = problem.production;

    std::vector<double> pct(prod.input_count());
    for (std::size_t i = 0; i < pct.size(); ++i)
        pct[i] = (joint.inputs[i] - base.inputs[i]) / base.inputs[i] * 100.0;

    std::vector<SignReport> reports;
    const bool theta_contract = problem.contract_index == ShockVar::theta &&
                                problem.shocks.dependence == Dependence::independent;

    bool condition_met = false;
    std::string condition_note;
    if (!theta_contract) {
        // Pairwise alignment condition: the cross-partial of expected utility
        // at the uninsured optimum must carry the sign of beta_i * beta_j.
        condition_met = true;
        for (std::size_t i = 0; i < prod.input_count() && condition_met; ++i) {
            for (std::size_t j = i + 1; j < prod.input_count() && condition_met; ++j) {
                const double di = 5e-3 * std::max(base.inputs[i], 1e-3);
                const double dj = 5e-3 * std::max(base.inputs[j], 1e-3);
                std::vector<double> x = base.inputs;
                const auto eu_at = [&](double si, double sj) {
                    x[i] = base.inputs[i] + si * di;
                    x[j] = base.inputs[j] + sj * dj;
                    const double v = expected_utility(problem, x, 0.0, 0.0);
                    x[i] = base.inputs[i];
                    x[j] = base.inputs[j];
                    return v;
                };
                const double cross = (eu_at(1, 1) - eu_at(1, -1) - eu_at(-1, 1) +
                                      eu_at(-1, -1)) /
                                     (4.0 * di * dj);
                const double want = prod.inputs[i].beta * prod.inputs[j].beta;
                const bool aligned = cross * want > 0.0 && std::abs(cross) > 1e-10;
                if (!aligned) {
                    condition_met = false;
                    condition_note = "alignment condition not met for (" +
                                     prod.inputs[i].name + "," + prod.inputs[j].name +
                                     "): cross-partial " + num(cross) + " vs beta product " +
                                     num(want);
                }
            }
        }
    }

    for (std::size_t i = 0; i < prod.input_count(); ++i) {
        const double beta = prod.inputs[i].beta;
        SignReport r;
        if (theta_contract) {
            r = make_sign_report("theta-multi-input-response", context, Sign::positive,
                                 false, pct[i], response_noise_floor_pct,
                                 "input " + prod.inputs[i].name);
        } else if (condition_met && beta != 0.0) {
            r = make_sign_report("own-risk-direction", context,
                                 beta > 0.0 ? Sign::positive : Sign::negative, true,
                                 pct[i], response_noise_floor_pct,
                                 "input " + prod.inputs[i].name +
                                     " (alignment condition holds)");
        } else {
            r = make_sign_report("own-risk-direction", context, Sign::ambiguous, false,
                                 pct[i], response_noise_floor_pct,
                                 "input " + prod.inputs[i].name + ": " +
                                     (condition_note.empty() ? "no own-risk prediction"
                                                             : condition_note));
        }
        if (!converged) {
            r.pass = false;
            r.note += "; a solve did not converge";
        }
        reports.push_back(std::move(r));
    }

    // When every input moves the same direction, mean harvest must follow.
    const double harvest_pct =
        (joint.expected_harvest - base.expected_harvest) / base.expected_harvest * 100.0;
    const bool all_up = std::all_of(pct.begin(), pct.end(), [](double v) {
        return v > response_noise_floor_pct;
    });
    const bool all_down = std::all_of(pct.begin(), pct.end(), [](double v) {
        return v < -response_noise_floor_pct;
    });
    SignReport h;
    if (all_up || all_down) {
        h = make_sign_report("aligned-harvest-direction", context,
                             all_up ? Sign::positive : Sign::negative, true, harvest_pct,
                             0.01, "all inputs moved the same direction");
    } else {
        h = make_sign_report("aligned-harvest-direction", context, Sign::ambiguous, false,
                             harvest_pct, 0.01, "inputs moved in mixed directions");
    }
    if (!converged) {
        h.pass = false;
        h.note += "; a solve did not converge";
    }
    reports.push_back(std::move(h));
    return reports;
}

std::vector<SignReport> run_marginal_gap_suite(const SuiteOptions& options) {
    struct Cell {
        Dependence dep;
        ShockVar index;
        double alpha, beta, sigma;
    };
    const std::vector<double> alphas{0.25, 0.75};
    const std::vector<double> betas = options.reduced
                                          ? std::vector<double>{-0.5, 0.5}
                                          : std::vector<double>{-0.5, -0.1, 0.1, 0.5};
    const std::vector<double> sigmas =
        options.reduced ? std::vector<double>{0.3} : std::vector<double>{0.2, 0.4};

    std::vector<Cell> cells;
    for (int family = 0; family < 3; ++family)
        for (double alpha : alphas)
            for (double beta : betas)
                for (double sigma : sigmas) {
                    const Dependence dep = family == 2 ? Dependence::perfectly_correlated
                                                       : Dependence::independent;
                    const ShockVar index =
                        family == 0 ? ShockVar::theta : ShockVar::omega;
                    cells.push_back({dep, index, alpha, beta, sigma});
                }

    std::vector<std::vector<SignReport>> out(cells.size());
    detail::parallel_for(cells.size(), options.jobs, [&](std::size_t i) {
        const Cell& c = cells[i];
        const std::uint64_t seed = cell_seed(
            options.base_seed, "gap-suite",
            std::vector<double>{c.alpha, c.beta, 2.0, c.sigma, c.sigma, 0.0}, c.index,
            c.dep);
        const DecisionProblem p = single_input_problem(
            ProductionMode::risky, c.dep, c.index, c.alpha, c.beta, 2.0, c.sigma, c.sigma,
            0.0, options.draws, seed, options.kernel);
        out[i] = check_marginal_profit_gap(p, c.index, 0.0);
    });

    std::vector<SignReport> flat;
    for (auto& v : out)
        for (auto& r : v) flat.push_back(std::move(r));
    return flat;
}

std::vector<SignReport> run_input_response_suite(const SuiteOptions& options) {
    struct Cell {
        ProductionMode mode;
        Dependence dep;
        ShockVar index;
        double alpha, beta, a, st, so;
    };
    std::vector<Cell> cells;
    const bool reduced = options.reduced;

    // Pure measurement-error world: insurance on theta, no extraction risk.
    for (double alpha : reduced ? std::vector<double>{0.25, 0.75}
                                : std::vector<double>{0.25, 0.5, 0.75})
        for (double a : {1.0, 3.0})
            for (double s : reduced ? std::vector<double>{0.3} : std::vector<double>{0.2, 0.4})
                cells.push_back({ProductionMode::standard, Dependence::independent,
                                 ShockVar::theta, alpha, 0.0, a, s, 0.0});

    // Both shocks active, contract still on theta.
    for (double alpha : {0.25, 0.75})
        for (double beta : {-0.5, 0.5})
            for (double a : reduced ? std::vector<double>{2.0} : std::vector<double>{1.0, 3.0})
                for (double s : reduced ? std::vector<double>{0.3}
                                        : std::vector<double>{0.2, 0.4})
                    cells.push_back({ProductionMode::risky, Dependence::independent,
                                     ShockVar::theta, alpha, beta, a, s, s});

    // Contract on the extraction shock; sign should follow beta.
    for (double alpha : {0.25, 0.75})
        for (double beta : reduced ? std::vector<double>{-0.5, 0.5}
                                   : std::vector<double>{-0.5, -0.1, 0.1, 0.5})
            for (double a : reduced ? std::vector<double>{2.0} : std::vector<double>{1.0, 3.0})
                cells.push_back({ProductionMode::risky, Dependence::independent,
                                 ShockVar::omega, alpha, beta, a, 0.3, 0.3});

    // Perfectly correlated shocks.
    for (double beta : reduced ? std::vector<double>{-0.5, 0.5}
                               : std::vector<double>{-0.5, -0.1, 0.1, 0.5})
        cells.push_back({ProductionMode::risky, Dependence::perfectly_correlated,
                         ShockVar::omega, 0.5, beta, 2.0, 0.3, 0.3});

    const std::vector<double> levels =
        reduced ? std::vector<double>{0.0, 0.5, 1.0}
                : std::vector<double>{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

    std::vector<SignReport> out(cells.size());
    detail::parallel_for(cells.size(), options.jobs, [&](std::size_t i) {
        const Cell& c = cells[i];
        const std::uint64_t seed = cell_seed(
            options.base_seed, "response-suite",
            std::vector<double>{c.alpha, c.beta, c.a, c.st, c.so,
                                c.mode == ProductionMode::standard ? 0.0 : 1.0},
            c.index, c.dep);
        const DecisionProblem p =
            single_input_problem(c.mode, c.dep, c.index, c.alpha, c.beta, c.a, c.st, c.so,
                                 0.0, options.draws, seed, options.kernel);
        out[i] = check_input_response(p, levels);
    });
    return out;
}

std::vector<SignReport> run_multi_input_suite(const SuiteOptions& options) {
    struct Cell {
        std::string label;
        ProductionSpec production;
        ShockVar index;
    };
    std::vector<Cell> cells;

    ProductionSpec aligned;
    aligned.inputs = {{"x1", 0.4, 0.4, 0.25}, {"x2", 0.3, 0.2, 0.25}};
    cells.push_back({"synthetic-aligned", aligned, ShockVar::omega});

    if (!options.reduced) {
        ProductionSpec opposed;
        opposed.inputs = {{"x1", 0.4, 0.4, 0.25}, {"x2", 0.3, -0.3, 0.25}};
        cells.push_back({"synthetic-opposed", opposed, ShockVar::omega});
    }

    for (const FleetCalibration& fleet : norwegian_fleets()) {
        if (options.reduced && fleet.fleet != "coastal_groundfish") continue;
        cells.push_back({fleet.fleet, fleet.to_production(), ShockVar::omega});
    }
    cells.push_back({"coastal_seiners-theta",
                     fleet_by_name("coastal_seiners").to_production(), ShockVar::theta});

    std::vector<std::vector<SignReport>> out(cells.size());
    detail::parallel_for(cells.size(), options.jobs, [&](std::size_t i) {
        const Cell& c = cells[i];
        const std::uint64_t seed =
            cell_seed(options.base_seed, "multi-suite:" + c.label,
                      std::vector<double>{2.0, 0.3, 0.3, 0.0}, c.index,
                      Dependence::independent);
        DecisionProblem p;
        p.production = c.production;
        p.shocks = {0.3, 0.3, Dependence::independent};
        p.panel = sample_shocks(p.shocks, options.draws, seed);
        p.prefs.risk_aversion = 2.0;
        p.contract_index = c.index;
        p.contract_trigger = 0.0;
        p.config.kernel = options.kernel;
        out[i] = check_multi_input(p);
        for (SignReport& r : out[i]) r.context = c.label + " " + r.context;
    });

    std::vector<SignReport> flat;
    for (auto& v : out)
        for (auto& r : v) flat.push_back(std::move(r));
    return flat;
}

} // namespace fisim
