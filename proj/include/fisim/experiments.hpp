#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fisim/optimizer.hpp"
#include "fisim/propositions.hpp"

// Parameter sweeps: the single-input grid, the calibrated Norwegian fleets,
// and summary statistics over the results.
namespace fisim {

// Cartesian grid for single-input experiments. Defaults reproduce the main
// simulation design: 1152 cells per contract index.
struct SweepGrid {
    std::vector<double> alphas{0.25, 0.5, 0.75};
    std::vector<double> betas{-0.7, -0.5, -0.3, -0.1, 0.1, 0.3, 0.5, 0.7};
    std::vector<double> risk_aversions{1.0, 2.0, 3.0};
    std::vector<double> sigma_thetas{0.1, 0.2, 0.3, 0.4};
    std::vector<double> sigma_omegas{0.1, 0.2, 0.3, 0.4};
    std::vector<double> triggers{0.0};
    // When set, `triggers` are multiples of the indexed shock's sigma and are
    // scaled per cell; otherwise they are absolute shock units. Sigma units
    // are the natural way to sweep trigger generosity across cells whose
    // sigmas differ.
    bool triggers_sigma_units = false;
    ShockVar contract_index = ShockVar::omega;
    Dependence dependence = Dependence::independent;
    double cost_coeff = 0.25;
    double biomass_mean = 1.0;
    std::size_t draws = 1000;
    std::uint64_t base_seed = 42;

    std::size_t cell_count() const;
};

// Calibrated three-input fleet: elasticities for capital, labor, and fuel.
struct FleetCalibration {
    std::string fleet;
    std::array<double, 3> alpha{};       // k, l, f
    std::array<double, 3> beta{};        // k, l, f
    std::array<double, 3> cost_coeff{0.25, 0.25, 0.25};
    double biomass_mean = 1.0;

    ProductionSpec to_production() const;
};

// The three calibrated fleets (biomass normalized to 1).
std::span<const FleetCalibration> norwegian_fleets();
const FleetCalibration& fleet_by_name(const std::string& name);

// Preference/shock grid crossed with a fleet calibration: 48 cells per
// fleet per contract index by default.
struct CalibrationGrid {
    std::vector<double> risk_aversions{1.0, 2.0, 3.0};
    std::vector<double> sigma_thetas{0.1, 0.2, 0.3, 0.4};
    std::vector<double> sigma_omegas{0.1, 0.2, 0.3, 0.4};
    std::vector<double> triggers{0.0};
    bool triggers_sigma_units = false;  // same semantics as SweepGrid
    ShockVar contract_index = ShockVar::omega;
    Dependence dependence = Dependence::independent;
    std::size_t draws = 1000;
    std::uint64_t base_seed = 42;
};

// One solved cell: baseline optimum, jointly-insured optimum, and derived
// comparisons. Percent changes use the baseline as denominator; the utility
// gain is the certainty-equivalent gain as a percent of baseline profit.
struct SweepRecord {
    std::string fleet;  // "single" for the one-input sweep
    ShockVar index = ShockVar::omega;
    Dependence dependence = Dependence::independent;
    double trigger = 0.0;
    double risk_aversion = 0.0;
    double sigma_theta = 0.0;
    double sigma_omega = 0.0;
    std::vector<InputSpec> inputs;

    std::vector<double> baseline_inputs;
    double baseline_profit = 0.0;
    double baseline_harvest = 0.0;
    double baseline_eu = 0.0;

    std::vector<double> insured_inputs;
    double gamma_star = 0.0;
    double insured_profit = 0.0;
    double insured_harvest = 0.0;
    double insured_eu = 0.0;

    std::vector<double> pct_change_inputs;
    double pct_change_harvest = 0.0;
    double utility_gain_pct = 0.0;

    bool converged = false;
    std::size_t evaluations = 0;
    std::uint64_t cell_seed = 0;
};

struct SweepOptions {
    unsigned jobs = 0;  // 0: one worker per available core
    OptimizerConfig optimizer{};
};

// Derives the per-cell panel seed by mixing the base seed with the exact
// bit patterns of the cell parameters (and the fleet name for calibrated
// runs), so extending any grid axis never reshuffles existing cells.
std::uint64_t cell_seed(std::uint64_t base_seed, const std::string& fleet,
                        std::span<const double> params, ShockVar index,
                        Dependence dependence);

// Runs every cell of the grid (optimizer failures are recorded on the
// record, not thrown). Results come back in canonical cell order:
// lexicographic in (alpha, beta, a, sigma_theta, sigma_omega, trigger)
// following the order the grid vectors list them in.
std::vector<SweepRecord> run_single_input_sweep(const SweepGrid& grid,
                                                const SweepOptions& options = {});

// Same over (a, sigma_theta, sigma_omega, trigger) for one fleet.
std::vector<SweepRecord> run_norwegian(const FleetCalibration& fleet,
                                       const CalibrationGrid& grid,
                                       const SweepOptions& options = {});

double failed_cell_fraction(std::span<const SweepRecord> records);

// Classifies each converged record's input responses against the sign
// predictions (theta-indexed: weakly up; omega-indexed: sign of beta,
// strict). Used for whole-sweep conformance accounting.
std::vector<SignReport> classify_sweep_responses(std::span<const SweepRecord> records);

// --- summaries ----------------------------------------------------------------

// Scalar fields extractable from a record for grouping and statistics.
// "pct_change_input_i" (i = 1..3), "abs_pct_change_input_1",
// "pct_change_harvest", "gamma_star", "utility_gain_pct", ...; see
// summary_field_names() for the full list.
std::span<const std::string> summary_field_names();
double summary_field(const SweepRecord& record, const std::string& field);

struct GroupSummary {
    std::string group;   // "a=1 sigma_omega=0.2" style key
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::vector<std::size_t> histogram;
    double histogram_lo = 0.0;
    double histogram_width = 0.0;  // per-bin width
};

// Groups converged records by the named cell parameters ("alpha", "beta",
// "risk_aversion", "sigma_theta", "sigma_omega", "trigger", "fleet",
// "index") and summarizes one field per group. Groups are emitted in
// canonical (sorted) key order.
std::vector<GroupSummary> summarize(std::span<const SweepRecord> records,
                                    std::span<const std::string> group_by,
                                    const std::string& field,
                                    std::size_t histogram_bins = 50);

} // namespace fisim
