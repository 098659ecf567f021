#include "fisim/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace fisim {
namespace {

constexpr std::size_t input_slots = 3;

const char* var_name(ShockVar v) { return v == ShockVar::theta ? "theta" : "omega"; }

const char* dependence_name(Dependence d) {
    return d == Dependence::perfectly_correlated ? "correlated" : "independent";
}

std::string slot_value(std::span<const double> values, std::size_t i) {
    return i < values.size() ? format_g6(values[i]) : std::string();
}

} // namespace

std::string format_g6(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return buf;
}

double round_g6(double value) { return std::stod(format_g6(value)); }

std::string records_to_csv(std::span<const SweepRecord> records) {
    std::string csv =
        "fleet,index,dependence,trigger,risk_aversion,sigma_theta,sigma_omega,"
        "alpha_1,beta_1,cost_1,alpha_2,beta_2,cost_2,alpha_3,beta_3,cost_3,"
        "baseline_input_1,baseline_input_2,baseline_input_3,"
        "baseline_profit,baseline_harvest,baseline_eu,"
        "insured_input_1,insured_input_2,insured_input_3,"
        "insured_profit,insured_harvest,insured_eu,"
        "pct_change_input_1,pct_change_input_2,pct_change_input_3,"
        "pct_change_harvest,gamma_star,utility_gain_pct,converged\n";

    for (const SweepRecord& r : records) {
        if (r.inputs.size() > input_slots)
            throw std::invalid_argument("records with more than three inputs are not exportable");
        csv += r.fleet;
        csv += ',';
        csv += var_name(r.index);
        csv += ',';
        csv += dependence_name(r.dependence);
        csv += ',';
        csv += format_g6(r.trigger) + ',' + format_g6(r.risk_aversion) + ',' +
               format_g6(r.sigma_theta) + ',' + format_g6(r.sigma_omega) + ',';
        for (std::size_t i = 0; i < input_slots; ++i) {
            if (i < r.inputs.size())
                csv += format_g6(r.inputs[i].alpha) + ',' + format_g6(r.inputs[i].beta) +
                       ',' + format_g6(r.inputs[i].cost_coeff) + ',';
            else
                csv += ",,,";
        }
        for (std::size_t i = 0; i < input_slots; ++i)
            csv += slot_value(r.baseline_inputs, i) + ',';
        csv += format_g6(r.baseline_profit) + ',' + format_g6(r.baseline_harvest) + ',' +
               format_g6(r.baseline_eu) + ',';
        for (std::size_t i = 0; i < input_slots; ++i)
            csv += slot_value(r.insured_inputs, i) + ',';
        csv += format_g6(r.insured_profit) + ',' + format_g6(r.insured_harvest) + ',' +
               format_g6(r.insured_eu) + ',';
        for (std::size_t i = 0; i < input_slots; ++i)
            csv += slot_value(r.pct_change_inputs, i) + ',';
        csv += format_g6(r.pct_change_harvest) + ',' + format_g6(r.gamma_star) + ',' +
               format_g6(r.utility_gain_pct) + ',';
        csv += r.converged ? "true" : "false";
        csv += '\n';
    }
    return csv;
}

nlohmann::json records_to_json(std::span<const SweepRecord> records) {
    nlohmann::json arr = nlohmann::json::array();
    for (const SweepRecord& r : records) {
        if (r.inputs.size() > input_slots)
            throw std::invalid_argument("records with more than three inputs are not exportable");
        nlohmann::json j;
        j["fleet"] = r.fleet;
        j["index"] = var_name(r.index);
        j["dependence"] = dependence_name(r.dependence);
        j["trigger"] = round_g6(r.trigger);
        j["risk_aversion"] = round_g6(r.risk_aversion);
        j["sigma_theta"] = round_g6(r.sigma_theta);
        j["sigma_omega"] = round_g6(r.sigma_omega);
        for (std::size_t i = 0; i < r.inputs.size(); ++i) {
            const std::string n = std::to_string(i + 1);
            j["alpha_" + n] = round_g6(r.inputs[i].alpha);
            j["beta_" + n] = round_g6(r.inputs[i].beta);
            j["cost_" + n] = round_g6(r.inputs[i].cost_coeff);
            j["baseline_input_" + n] = round_g6(r.baseline_inputs[i]);
            j["insured_input_" + n] = round_g6(r.insured_inputs[i]);
            j["pct_change_input_" + n] = round_g6(r.pct_change_inputs[i]);
        }
        j["baseline_profit"] = round_g6(r.baseline_profit);
        j["baseline_harvest"] = round_g6(r.baseline_harvest);
        j["baseline_eu"] = round_g6(r.baseline_eu);
        j["insured_profit"] = round_g6(r.insured_profit);
        j["insured_harvest"] = round_g6(r.insured_harvest);
        j["insured_eu"] = round_g6(r.insured_eu);
        j["pct_change_harvest"] = round_g6(r.pct_change_harvest);
        j["gamma_star"] = round_g6(r.gamma_star);
        j["utility_gain_pct"] = round_g6(r.utility_gain_pct);
        j["converged"] = r.converged;
        arr.push_back(std::move(j));
    }
    return arr;
}

nlohmann::json sign_reports_to_json(std::span<const SignReport> reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const SignReport& r : reports) {
        nlohmann::json j;
        j["claim"] = r.claim;
        j["context"] = r.context;
        j["predicted"] = sign_name(r.predicted);
        j["strict"] = r.strict;
        j["observed"] = round_g6(r.observed);
        j["observed_sign"] = sign_name(r.observed_sign);
        j["pass"] = r.pass;
        if (!r.note.empty()) j["note"] = r.note;
        arr.push_back(std::move(j));
    }
    return arr;
}

nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config,
                             std::size_t total_cells, std::size_t failed_cells) {
    nlohmann::json j;
    j["tool"] = tool_name;
    j["version"] = tool_version;
    j["command"] = command;
    j["config"] = config;
    j["total_cells"] = total_cells;
    j["failed_cells"] = failed_cells;
    return j;
}

std::string json_to_string(const nlohmann::json& j) {
    // nlohmann::json objects keep keys sorted already (std::map storage).
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << contents;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

} // namespace fisim
