#include "fisim/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "parallel.hpp"

namespace fisim {
namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

const char* var_name(ShockVar v) { return v == ShockVar::theta ? "theta" : "omega"; }

// Shared per-cell runner: solve uninsured and jointly insured optima and
// derive the comparison columns. Any exception marks the cell failed.
SweepRecord run_cell(std::string fleet_label, const ProductionSpec& production,
                     const ShockSpec& shocks, double risk_aversion, ShockVar index,
                     double trigger, std::size_t draws, std::uint64_t seed,
                     const OptimizerConfig& optimizer) {
    SweepRecord rec;
    rec.fleet = std::move(fleet_label);
    rec.index = index;
    rec.dependence = shocks.dependence;
    rec.trigger = trigger;
    rec.risk_aversion = risk_aversion;
    rec.sigma_theta = shocks.sigma_theta;
    rec.sigma_omega = shocks.sigma_omega;
    rec.inputs = production.inputs;
    rec.cell_seed = seed;

    try {
        DecisionProblem problem;
        problem.production = production;
        problem.shocks = shocks;
        problem.panel = sample_shocks(shocks, draws, seed);
        problem.prefs.risk_aversion = risk_aversion;
        problem.contract_index = index;
        problem.contract_trigger = trigger;
        problem.config = optimizer;

        const OptimalChoice base = baseline(problem);
        const OptimalChoice insured = optimize_inputs_and_coverage(problem);

        rec.baseline_inputs = base.inputs;
        rec.baseline_profit = base.expected_profit;
        rec.baseline_harvest = base.expected_harvest;
        rec.baseline_eu = base.expected_utility;

        rec.insured_inputs = insured.inputs;
        rec.gamma_star = insured.gamma;
        rec.insured_profit = insured.expected_profit;
        rec.insured_harvest = insured.expected_harvest;
        rec.insured_eu = insured.expected_utility;

        rec.pct_change_inputs.resize(base.inputs.size());
        for (std::size_t i = 0; i < base.inputs.size(); ++i)
            rec.pct_change_inputs[i] =
                (insured.inputs[i] - base.inputs[i]) / base.inputs[i] * 100.0;
        rec.pct_change_harvest =
            (insured.expected_harvest - base.expected_harvest) / base.expected_harvest *
            100.0;

        const Preferences prefs{risk_aversion};
        rec.utility_gain_pct = (certainty_equivalent(prefs, insured.expected_utility) -
                                certainty_equivalent(prefs, base.expected_utility)) /
                               base.expected_profit * 100.0;

        rec.evaluations = base.evaluations + insured.evaluations;
        rec.converged = base.converged && insured.converged;
    } catch (const std::exception&) {
        rec.converged = false;
    }
    return rec;
}

} // namespace

std::size_t SweepGrid::cell_count() const {
    return alphas.size() * betas.size() * risk_aversions.size() * sigma_thetas.size() *
           sigma_omegas.size() * triggers.size();
}

ProductionSpec FleetCalibration::to_production() const {
    ProductionSpec spec;
    spec.mode = ProductionMode::risky;
    spec.biomass_mean = biomass_mean;
    spec.inputs = {{"capital", alpha[0], beta[0], cost_coeff[0]},
                   {"labor", alpha[1], beta[1], cost_coeff[1]},
                   {"fuel", alpha[2], beta[2], cost_coeff[2]}};
    return spec;
}

std::span<const FleetCalibration> norwegian_fleets() {
    static const std::vector<FleetCalibration> fleets = {
        {"coastal_seiners", {0.294, 0.421, 0.457}, {0.184, -0.432, 0.119}},
        {"coastal_groundfish", {0.463, 0.421, 0.355}, {0.965, -0.080, 0.113}},
        {"groundfish_trawlers", {0.210, 0.106, 0.531}, {-2.788, -0.110, -0.024}},
    };
    return fleets;
}

const FleetCalibration& fleet_by_name(const std::string& name) {
    for (const FleetCalibration& f : norwegian_fleets())
        if (f.fleet == name) return f;
    throw std::invalid_argument("unknown fleet '" + name +
                                "' (expected coastal_seiners, coastal_groundfish, or "
                                "groundfish_trawlers)");
}

std::uint64_t cell_seed(std::uint64_t base_seed, const std::string& fleet,
                        std::span<const double> params, ShockVar index,
                        Dependence dependence) {
    std::uint64_t h = hash_mix(base_seed, 0x63656C6CULL);  // "cell"
    for (unsigned char ch : fleet) h = hash_mix(h, ch);
    for (double p : params) h = hash_mix(h, std::bit_cast<std::uint64_t>(p));
    h = hash_mix(h, static_cast<std::uint64_t>(index));
    h = hash_mix(h, static_cast<std::uint64_t>(dependence));
    return h;
}

std::vector<SweepRecord> run_single_input_sweep(const SweepGrid& grid,
                                                const SweepOptions& options) {
    if (grid.cell_count() == 0) throw std::invalid_argument("sweep grid has no cells");
    if (grid.draws == 0) throw std::invalid_argument("sweep needs at least one draw");

    struct Cell {
        double alpha, beta, a, st, so, trigger;
    };
    std::vector<Cell> cells;
    cells.reserve(grid.cell_count());
    for (double alpha : grid.alphas)
        for (double beta : grid.betas)
            for (double a : grid.risk_aversions)
                for (double st : grid.sigma_thetas)
                    for (double so : grid.sigma_omegas)
                        for (double trigger : grid.triggers)
                            cells.push_back({alpha, beta, a, st, so, trigger});

    std::vector<SweepRecord> records(cells.size());
    detail::parallel_for(cells.size(), options.jobs, [&](std::size_t i) {
        const Cell& c = cells[i];
        ProductionSpec production;
        production.mode = ProductionMode::risky;
        production.biomass_mean = grid.biomass_mean;
        production.inputs = {{"x", c.alpha, c.beta, grid.cost_coeff}};
        const ShockSpec shocks{c.st, c.so, grid.dependence};
        const double trigger =
            grid.triggers_sigma_units
                ? c.trigger * (grid.contract_index == ShockVar::theta ? c.st : c.so)
                : c.trigger;
        const std::uint64_t seed = cell_seed(
            grid.base_seed, "single",
            std::vector<double>{c.alpha, c.beta, grid.cost_coeff, c.a, c.st, c.so,
                                trigger},
            grid.contract_index, grid.dependence);
        records[i] = run_cell("single", production, shocks, c.a, grid.contract_index,
                              trigger, grid.draws, seed, options.optimizer);
    });
    return records;
}

std::vector<SweepRecord> run_norwegian(const FleetCalibration& fleet,
                                       const CalibrationGrid& grid,
                                       const SweepOptions& options) {
    if (grid.draws == 0) throw std::invalid_argument("sweep needs at least one draw");
    const ProductionSpec production = fleet.to_production();

    struct Cell {
        double a, st, so, trigger;
    };
    std::vector<Cell> cells;
    for (double a : grid.risk_aversions)
        for (double st : grid.sigma_thetas)
            for (double so : grid.sigma_omegas)
                for (double trigger : grid.triggers)
                    cells.push_back({a, st, so, trigger});
    if (cells.empty()) throw std::invalid_argument("calibration grid has no cells");

    std::vector<SweepRecord> records(cells.size());
    detail::parallel_for(cells.size(), options.jobs, [&](std::size_t i) {
        const Cell& c = cells[i];
        const ShockSpec shocks{c.st, c.so, grid.dependence};
        const double trigger =
            grid.triggers_sigma_units
                ? c.trigger * (grid.contract_index == ShockVar::theta ? c.st : c.so)
                : c.trigger;
        const std::uint64_t seed =
            cell_seed(grid.base_seed, fleet.fleet,
                      std::vector<double>{c.a, c.st, c.so, trigger},
                      grid.contract_index, grid.dependence);
        records[i] = run_cell(fleet.fleet, production, shocks, c.a, grid.contract_index,
                              trigger, grid.draws, seed, options.optimizer);
    });
    return records;
}

double failed_cell_fraction(std::span<const SweepRecord> records) {
    if (records.empty()) return 0.0;
    std::size_t failed = 0;
    for (const SweepRecord& r : records)
        if (!r.converged) ++failed;
    return static_cast<double>(failed) / static_cast<double>(records.size());
}

std::vector<SignReport> classify_sweep_responses(std::span<const SweepRecord> records) {
    std::vector<SignReport> reports;
    for (const SweepRecord& rec : records) {
        if (!rec.converged || rec.inputs.size() != 1) continue;
        const double beta = rec.inputs[0].beta;
        const double pct = rec.pct_change_inputs[0];

        std::string context = "fleet=" + rec.fleet + " index=" + var_name(rec.index) +
                              " alpha=" + num(rec.inputs[0].alpha) + " beta=" + num(beta) +
                              " a=" + num(rec.risk_aversion) +
                              " sigma_theta=" + num(rec.sigma_theta) +
                              " sigma_omega=" + num(rec.sigma_omega) +
                              " trigger=" + num(rec.trigger);

        if (rec.index == ShockVar::theta &&
            rec.dependence == Dependence::independent) {
            reports.push_back(make_sign_report("risky-theta-input-response",
                                               std::move(context), Sign::positive, false,
                                               pct, response_noise_floor_pct));
        } else if (rec.dependence == Dependence::perfectly_correlated) {
            if (beta > 0.0)
                reports.push_back(make_sign_report("correlated-riskinc-input-response",
                                                   std::move(context), Sign::positive,
                                                   true, pct, response_noise_floor_pct));
            else
                reports.push_back(make_sign_report("correlated-riskdec-input-response",
                                                   std::move(context), Sign::ambiguous,
                                                   false, pct, response_noise_floor_pct));
        } else if (beta >= 0.1) {
            reports.push_back(make_sign_report("omega-riskinc-input-response",
                                               std::move(context), Sign::positive, true,
                                               pct, response_noise_floor_pct));
        } else if (beta <= -0.1) {
            reports.push_back(make_sign_report("omega-riskdec-input-response",
                                               std::move(context), Sign::negative, true,
                                               pct, response_noise_floor_pct));
        } else {
            reports.push_back(make_sign_report("omega-neutral-input-response",
                                               std::move(context), Sign::ambiguous, false,
                                               pct, response_noise_floor_pct));
        }
    }
    return reports;
}

namespace {

const std::vector<std::string> field_names = {
    "pct_change_input_1",  "pct_change_input_2",  "pct_change_input_3",
    "abs_pct_change_input_1", "pct_change_harvest", "gamma_star",
    "utility_gain_pct",    "baseline_profit",     "insured_profit",
    "baseline_harvest",    "insured_harvest",
};

} // namespace

std::span<const std::string> summary_field_names() { return field_names; }

double summary_field(const SweepRecord& r, const std::string& field) {
    if (field == "pct_change_input_1" || field == "pct_change_input_2" ||
        field == "pct_change_input_3") {
        const std::size_t i = static_cast<std::size_t>(field.back() - '1');
        if (i >= r.pct_change_inputs.size())
            throw std::invalid_argument("record has no input slot for field '" + field + "'");
        return r.pct_change_inputs[i];
    }
    if (field == "abs_pct_change_input_1") {
        if (r.pct_change_inputs.empty())
            throw std::invalid_argument("record has no inputs");
        return std::abs(r.pct_change_inputs[0]);
    }
    if (field == "pct_change_harvest") return r.pct_change_harvest;
    if (field == "gamma_star") return r.gamma_star;
    if (field == "utility_gain_pct") return r.utility_gain_pct;
    if (field == "baseline_profit") return r.baseline_profit;
    if (field == "insured_profit") return r.insured_profit;
    if (field == "baseline_harvest") return r.baseline_harvest;
    if (field == "insured_harvest") return r.insured_harvest;
    throw std::invalid_argument("unknown summary field '" + field + "'");
}

namespace {

std::string group_key_part(const SweepRecord& r, const std::string& name) {
    if (name == "fleet") return "fleet=" + r.fleet;
    if (name == "index") return std::string("index=") + var_name(r.index);
    if (name == "trigger") return "trigger=" + num(r.trigger);
    if (name == "risk_aversion") return "risk_aversion=" + num(r.risk_aversion);
    if (name == "sigma_theta") return "sigma_theta=" + num(r.sigma_theta);
    if (name == "sigma_omega") return "sigma_omega=" + num(r.sigma_omega);
    if (name == "alpha") {
        if (r.inputs.size() != 1)
            throw std::invalid_argument("grouping by alpha needs single-input records");
        return "alpha=" + num(r.inputs[0].alpha);
    }
    if (name == "beta") {
        if (r.inputs.size() != 1)
            throw std::invalid_argument("grouping by beta needs single-input records");
        return "beta=" + num(r.inputs[0].beta);
    }
    if (name == "beta_sign") {
        if (r.inputs.size() != 1)
            throw std::invalid_argument("grouping by beta_sign needs single-input records");
        return std::string("beta_sign=") + (r.inputs[0].beta >= 0.0 ? "+" : "-");
    }
    throw std::invalid_argument("unknown grouping parameter '" + name + "'");
}

} // namespace

std::vector<GroupSummary> summarize(std::span<const SweepRecord> records,
                                    std::span<const std::string> group_by,
                                    const std::string& field, std::size_t histogram_bins) {
    if (histogram_bins == 0) throw std::invalid_argument("histogram needs at least one bin");

    std::map<std::string, std::vector<double>> groups;
    for (const SweepRecord& r : records) {
        if (!r.converged) continue;
        std::string key;
        for (const std::string& name : group_by) {
            if (!key.empty()) key += " ";
            key += group_key_part(r, name);
        }
        if (key.empty()) key = "all";
        groups[key].push_back(summary_field(r, field));
    }

    std::vector<GroupSummary> out;
    out.reserve(groups.size());
    for (auto& [key, values] : groups) {
        GroupSummary g;
        g.group = key;
        g.count = values.size();
        std::sort(values.begin(), values.end());
        g.min = values.front();
        g.max = values.back();
        double sum = 0.0;
        for (double v : values) sum += v;
        g.mean = sum / static_cast<double>(values.size());
        const std::size_t mid = values.size() / 2;
        g.median = values.size() % 2 == 1 ? values[mid]
                                          : 0.5 * (values[mid - 1] + values[mid]);

        g.histogram.assign(histogram_bins, 0);
        g.histogram_lo = g.min;
        const double span = g.max - g.min;
        g.histogram_width =
            span > 0.0 ? span / static_cast<double>(histogram_bins) : 1.0;
        for (double v : values) {
            std::size_t bin =
                span > 0.0 ? static_cast<std::size_t>((v - g.min) / g.histogram_width)
                           : 0;
            if (bin >= histogram_bins) bin = histogram_bins - 1;
            ++g.histogram[bin];
        }
        out.push_back(std::move(g));
    }
    return out;
}

} // namespace fisim
