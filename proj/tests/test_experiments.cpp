#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "fisim/experiments.hpp"

using namespace fisim;

namespace {

// Minimal synthetic record for the pure bookkeeping functions (classification
// and summaries), which never re-solve anything.
SweepRecord fake_record(double beta, double pct_input, ShockVar index = ShockVar::omega,
                        Dependence dep = Dependence::independent) {
    SweepRecord r;
    r.fleet = "single";
    r.index = index;
    r.dependence = dep;
    r.risk_aversion = 2.0;
    r.sigma_theta = 0.2;
    r.sigma_omega = 0.3;
    r.inputs = {{"x", 0.5, beta, 0.25}};
    r.pct_change_inputs = {pct_input};
    r.pct_change_harvest = pct_input * 0.5;
    r.gamma_star = 0.7;
    r.utility_gain_pct = 1.5;
    r.baseline_profit = 0.6;
    r.insured_profit = 0.59;
    r.baseline_harvest = 1.0;
    r.insured_harvest = 1.01;
    r.converged = true;
    return r;
}

SweepGrid one_cell_grid() {
    SweepGrid grid;
    grid.alphas = {0.5};
    grid.betas = {0.3};
    grid.risk_aversions = {2.0};
    grid.sigma_thetas = {0.2};
    grid.sigma_omegas = {0.3};
    grid.draws = 400;
    return grid;
}

} // namespace

TEST_CASE("cell seeds are deterministic and sensitive to every identifier") {
    const std::vector<double> params{0.5, 0.3, 0.25, 2.0, 0.2, 0.3, 0.0};
    const std::uint64_t base =
        cell_seed(42, "single", params, ShockVar::omega, Dependence::independent);
    CHECK(base == cell_seed(42, "single", params, ShockVar::omega, Dependence::independent));

    CHECK(base != cell_seed(43, "single", params, ShockVar::omega, Dependence::independent));
    CHECK(base != cell_seed(42, "coastal_seiners", params, ShockVar::omega,
                            Dependence::independent));
    CHECK(base != cell_seed(42, "single", params, ShockVar::theta, Dependence::independent));
    CHECK(base != cell_seed(42, "single", params, ShockVar::omega,
                            Dependence::perfectly_correlated));
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::vector<double> bumped = params;
        bumped[i] += 0.125;
        CHECK(base !=
              cell_seed(42, "single", bumped, ShockVar::omega, Dependence::independent));
    }
}

TEST_CASE("a one-cell sweep reproduces a direct solve of the same problem") {
    const SweepGrid grid = one_cell_grid();
    const auto records = run_single_input_sweep(grid);
    REQUIRE(records.size() == 1);
    const SweepRecord& rec = records[0];
    REQUIRE(rec.converged);

    DecisionProblem problem;
    problem.production.inputs = {{"x", 0.5, 0.3, 0.25}};
    problem.shocks = {0.2, 0.3};
    const std::uint64_t seed = cell_seed(
        grid.base_seed, "single", std::vector<double>{0.5, 0.3, 0.25, 2.0, 0.2, 0.3, 0.0},
        ShockVar::omega, Dependence::independent);
    problem.panel = sample_shocks(problem.shocks, grid.draws, seed);
    problem.prefs.risk_aversion = 2.0;
    problem.contract_index = ShockVar::omega;
    const OptimalChoice base = baseline(problem);
    const OptimalChoice joint = optimize_inputs_and_coverage(problem);

    CHECK(rec.cell_seed == seed);
    CHECK(rec.baseline_inputs[0] == base.inputs[0]);
    CHECK(rec.baseline_profit == base.expected_profit);
    CHECK(rec.baseline_eu == base.expected_utility);
    CHECK(rec.insured_inputs[0] == joint.inputs[0]);
    CHECK(rec.gamma_star == joint.gamma);
    CHECK(rec.insured_eu == joint.expected_utility);
    CHECK(rec.pct_change_inputs[0] ==
          (joint.inputs[0] - base.inputs[0]) / base.inputs[0] * 100.0);
    CHECK(rec.pct_change_harvest == (joint.expected_harvest - base.expected_harvest) /
                                        base.expected_harvest * 100.0);
}

TEST_CASE("sweep records come back in canonical order and survive axis extension") {
    SweepGrid small = one_cell_grid();
    small.alphas = {0.25};
    small.betas = {-0.3, 0.3};
    const auto two = run_single_input_sweep(small);
    REQUIRE(two.size() == 2);

    SweepGrid wider = small;
    wider.alphas = {0.25, 0.5};
    const auto four = run_single_input_sweep(wider);
    REQUIRE(four.size() == 4);

    CHECK(four[0].inputs[0].alpha == 0.25);
    CHECK(four[0].inputs[0].beta == -0.3);
    CHECK(four[1].inputs[0].alpha == 0.25);
    CHECK(four[1].inputs[0].beta == 0.3);
    CHECK(four[2].inputs[0].alpha == 0.5);
    CHECK(four[3].inputs[0].alpha == 0.5);
    CHECK(four[3].inputs[0].beta == 0.3);

    // Adding an alpha level must not touch the cells that were already there.
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(four[i].cell_seed == two[i].cell_seed);
        CHECK(four[i].baseline_inputs[0] == two[i].baseline_inputs[0]);
        CHECK(four[i].insured_inputs[0] == two[i].insured_inputs[0]);
        CHECK(four[i].gamma_star == two[i].gamma_star);
    }
}

TEST_CASE("sigma-unit triggers scale with the indexed shock per cell") {
    SweepGrid sigma_units = one_cell_grid();
    sigma_units.triggers = {-0.5};
    sigma_units.triggers_sigma_units = true;  // omega index, sigma_omega = 0.3

    SweepGrid absolute = one_cell_grid();
    absolute.triggers = {-0.5 * 0.3};

    const auto a = run_single_input_sweep(sigma_units);
    const auto b = run_single_input_sweep(absolute);
    REQUIRE(a.size() == 1);
    CHECK(a[0].trigger == -0.15);
    CHECK(a[0].cell_seed == b[0].cell_seed);
    CHECK(a[0].insured_inputs[0] == b[0].insured_inputs[0]);
    CHECK(a[0].gamma_star == b[0].gamma_star);

    // Same trigger list, different sigmas: the absolute trigger follows sigma.
    SweepGrid across = one_cell_grid();
    across.triggers = {-0.5};
    across.triggers_sigma_units = true;
    across.sigma_omegas = {0.2, 0.4};
    const auto two = run_single_input_sweep(across);
    REQUIRE(two.size() == 2);
    CHECK(two[0].trigger == -0.1);
    CHECK(two[1].trigger == -0.2);

    // The theta-indexed variant scales with sigma_theta instead.
    CalibrationGrid fleet_grid;
    fleet_grid.risk_aversions = {2.0};
    fleet_grid.sigma_thetas = {0.4};
    fleet_grid.sigma_omegas = {0.2};
    fleet_grid.triggers = {0.5};
    fleet_grid.triggers_sigma_units = true;
    fleet_grid.contract_index = ShockVar::theta;
    fleet_grid.draws = 300;
    const auto recs = run_norwegian(fleet_by_name("coastal_seiners"), fleet_grid);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].trigger == 0.2);
}

TEST_CASE("worker count does not change sweep results") {
    SweepGrid grid = one_cell_grid();
    grid.alphas = {0.25, 0.75};
    grid.betas = {-0.5, 0.5};

    SweepOptions sequential;
    sequential.jobs = 1;
    SweepOptions parallel;
    parallel.jobs = 3;
    const auto a = run_single_input_sweep(grid, sequential);
    const auto b = run_single_input_sweep(grid, parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].cell_seed == b[i].cell_seed);
        CHECK(a[i].baseline_inputs[0] == b[i].baseline_inputs[0]);
        CHECK(a[i].insured_inputs[0] == b[i].insured_inputs[0]);
        CHECK(a[i].gamma_star == b[i].gamma_star);
        CHECK(a[i].insured_eu == b[i].insured_eu);
        CHECK(a[i].converged == b[i].converged);
    }
}

TEST_CASE("calibrated runs solve three-input fleets and match a direct solve") {
    CalibrationGrid grid;
    grid.risk_aversions = {2.0};
    grid.sigma_thetas = {0.2};
    grid.sigma_omegas = {0.2};
    grid.draws = 400;

    const FleetCalibration& fleet = fleet_by_name("coastal_seiners");
    const auto records = run_norwegian(fleet, grid);
    REQUIRE(records.size() == 1);
    const SweepRecord& rec = records[0];
    REQUIRE(rec.converged);
    CHECK(rec.fleet == "coastal_seiners");
    REQUIRE(rec.inputs.size() == 3);
    REQUIRE(rec.baseline_inputs.size() == 3);
    REQUIRE(rec.pct_change_inputs.size() == 3);

    DecisionProblem problem;
    problem.production = fleet.to_production();
    problem.shocks = {0.2, 0.2};
    const std::uint64_t seed =
        cell_seed(grid.base_seed, "coastal_seiners",
                  std::vector<double>{2.0, 0.2, 0.2, 0.0}, ShockVar::omega,
                  Dependence::independent);
    problem.panel = sample_shocks(problem.shocks, grid.draws, seed);
    problem.prefs.risk_aversion = 2.0;
    problem.contract_index = ShockVar::omega;
    const OptimalChoice base = baseline(problem);
    const OptimalChoice joint = optimize_inputs_and_coverage(problem);

    CHECK(rec.cell_seed == seed);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(rec.baseline_inputs[i] == base.inputs[i]);
        CHECK(rec.insured_inputs[i] == joint.inputs[i]);
    }
    CHECK(rec.gamma_star == joint.gamma);
}

TEST_CASE("fleet calibrations carry the published elasticities") {
    REQUIRE(norwegian_fleets().size() == 3);

    const FleetCalibration& cs = fleet_by_name("coastal_seiners");
    CHECK(cs.alpha == std::array<double, 3>{0.294, 0.421, 0.457});
    CHECK(cs.beta == std::array<double, 3>{0.184, -0.432, 0.119});

    const FleetCalibration& cg = fleet_by_name("coastal_groundfish");
    CHECK(cg.alpha == std::array<double, 3>{0.463, 0.421, 0.355});
    CHECK(cg.beta == std::array<double, 3>{0.965, -0.080, 0.113});

    const FleetCalibration& gt = fleet_by_name("groundfish_trawlers");
    CHECK(gt.alpha == std::array<double, 3>{0.210, 0.106, 0.531});
    CHECK(gt.beta == std::array<double, 3>{-2.788, -0.110, -0.024});

    for (const FleetCalibration& f : norwegian_fleets()) {
        CHECK(f.cost_coeff == std::array<double, 3>{0.25, 0.25, 0.25});
        CHECK(f.biomass_mean == 1.0);
        const ProductionSpec spec = f.to_production();
        CHECK(spec.mode == ProductionMode::risky);
        REQUIRE(spec.inputs.size() == 3);
        CHECK(spec.inputs[0].name == "capital");
        CHECK(spec.inputs[1].name == "labor");
        CHECK(spec.inputs[2].name == "fuel");
    }

    CHECK_THROWS_WITH_AS(fleet_by_name("purse_seiners"),
                         doctest::Contains("unknown fleet"), std::invalid_argument);
}

TEST_CASE("failed cells are recorded on the record, not thrown") {
    SweepGrid grid = one_cell_grid();
    grid.alphas = {0.5, 1.5};  // second one is outside the admissible (0, 1] range
    const auto records = run_single_input_sweep(grid);
    REQUIRE(records.size() == 2);
    CHECK(records[0].converged);
    CHECK_FALSE(records[1].converged);
    CHECK(records[1].inputs[0].alpha == 1.5);
    CHECK(failed_cell_fraction(records) == 0.5);

    CHECK(failed_cell_fraction(std::vector<SweepRecord>{}) == 0.0);

    SweepGrid empty = one_cell_grid();
    empty.alphas = {};
    CHECK(empty.cell_count() == 0);
    CHECK_THROWS_AS(run_single_input_sweep(empty), std::invalid_argument);

    SweepGrid no_draws = one_cell_grid();
    no_draws.draws = 0;
    CHECK_THROWS_AS(run_single_input_sweep(no_draws), std::invalid_argument);
}

TEST_CASE("response classification keys off index, dependence, and risk loading") {
    std::vector<SweepRecord> records;
    records.push_back(fake_record(0.5, 2.0));                      // conforming increase
    records.push_back(fake_record(0.5, -2.0));                     // wrong sign
    records.push_back(fake_record(-0.5, -2.0));                    // conforming decrease
    records.push_back(fake_record(0.05, -5.0));                    // near-neutral loading
    records.push_back(fake_record(0.3, -0.05, ShockVar::theta));   // weak claim, in floor
    records.push_back(fake_record(0.3, -5.0, ShockVar::theta));    // weak claim, violated
    records.push_back(fake_record(0.3, 2.0, ShockVar::omega,
                                  Dependence::perfectly_correlated));
    records.push_back(fake_record(-0.3, 4.0, ShockVar::omega,
                                  Dependence::perfectly_correlated));
    records.push_back(fake_record(0.5, 2.0));
    records.back().converged = false;  // skipped entirely

    const auto reports = classify_sweep_responses(records);
    REQUIRE(reports.size() == 8);

    CHECK(reports[0].claim == "omega-riskinc-input-response");
    CHECK(reports[0].strict);
    CHECK(reports[0].pass);
    CHECK(reports[1].claim == "omega-riskinc-input-response");
    CHECK_FALSE(reports[1].pass);
    CHECK(reports[2].claim == "omega-riskdec-input-response");
    CHECK(reports[2].pass);
    CHECK(reports[3].claim == "omega-neutral-input-response");
    CHECK(reports[3].pass);  // ambiguous predictions never fail
    CHECK(reports[4].claim == "risky-theta-input-response");
    CHECK_FALSE(reports[4].strict);
    CHECK(reports[4].pass);  // -0.05% sits inside the weak-claim noise floor
    CHECK(reports[5].claim == "risky-theta-input-response");
    CHECK_FALSE(reports[5].pass);
    CHECK(reports[6].claim == "correlated-riskinc-input-response");
    CHECK(reports[6].pass);
    CHECK(reports[7].claim == "correlated-riskdec-input-response");
    CHECK(reports[7].predicted == Sign::ambiguous);
    CHECK(reports[7].pass);

    for (const SignReport& r : reports) {
        CHECK(r.context.find("alpha=0.5") != std::string::npos);
        CHECK(r.context.find("sigma_omega=0.3") != std::string::npos);
    }
}

TEST_CASE("summaries group records, sort keys, and skip failed cells") {
    std::vector<SweepRecord> records;
    for (double v : {-1.0, 0.0, 1.0}) records.push_back(fake_record(0.5, v));
    records.push_back(fake_record(0.5, 10.0));
    records.back().risk_aversion = 3.0;
    records.push_back(fake_record(0.5, 999.0));
    records.back().converged = false;  // must not contaminate any group

    const std::vector<std::string> by_a{"risk_aversion"};
    const auto groups = summarize(records, by_a, "pct_change_input_1", 4);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].group == "risk_aversion=2");
    CHECK(groups[0].count == 3);
    CHECK(groups[0].mean == 0.0);
    CHECK(groups[0].median == 0.0);
    CHECK(groups[0].min == -1.0);
    CHECK(groups[0].max == 1.0);
    CHECK(groups[1].group == "risk_aversion=3");
    CHECK(groups[1].count == 1);
    CHECK(groups[1].median == 10.0);

    // Single-value group: degenerate span, everything lands in the first bin.
    CHECK(groups[1].histogram_width == 1.0);
    CHECK(groups[1].histogram[0] == 1);

    const auto all = summarize(records, std::vector<std::string>{}, "gamma_star", 4);
    REQUIRE(all.size() == 1);
    CHECK(all[0].group == "all");
    CHECK(all[0].count == 4);

    const std::vector<std::string> by_two{"risk_aversion", "sigma_omega"};
    const auto composite = summarize(records, by_two, "pct_change_input_1", 4);
    CHECK(composite[0].group == "risk_aversion=2 sigma_omega=0.3");

    const std::vector<std::string> by_sign{"beta_sign"};
    std::vector<SweepRecord> signed_records{fake_record(0.3, 2.0), fake_record(-0.3, -2.0)};
    const auto sign_groups = summarize(signed_records, by_sign, "abs_pct_change_input_1", 2);
    REQUIRE(sign_groups.size() == 2);
    CHECK(sign_groups[0].group == "beta_sign=+");
    CHECK(sign_groups[1].group == "beta_sign=-");
    CHECK(sign_groups[0].mean == 2.0);
    CHECK(sign_groups[1].mean == 2.0);
}

TEST_CASE("histogram bins cover the group range with the top edge clamped") {
    std::vector<SweepRecord> records;
    for (double v : {0.0, 1.0, 2.0, 3.0}) records.push_back(fake_record(0.5, v));
    const auto groups = summarize(records, std::vector<std::string>{}, "pct_change_input_1", 2);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].histogram_lo == 0.0);
    CHECK(groups[0].histogram_width == 1.5);
    REQUIRE(groups[0].histogram.size() == 2);
    CHECK(groups[0].histogram[0] == 2);  // 0 and 1
    CHECK(groups[0].histogram[1] == 2);  // 2 and 3 (max clamps into the last bin)
}

TEST_CASE("summary fields expose every comparison column and reject bad names") {
    const SweepRecord r = fake_record(0.5, -3.0);
    CHECK(summary_field(r, "pct_change_input_1") == -3.0);
    CHECK(summary_field(r, "abs_pct_change_input_1") == 3.0);
    CHECK(summary_field(r, "pct_change_harvest") == -1.5);
    CHECK(summary_field(r, "gamma_star") == 0.7);
    CHECK(summary_field(r, "utility_gain_pct") == 1.5);
    CHECK(summary_field(r, "baseline_profit") == 0.6);
    CHECK(summary_field(r, "insured_profit") == 0.59);
    CHECK(summary_field(r, "baseline_harvest") == 1.0);
    CHECK(summary_field(r, "insured_harvest") == 1.01);

    CHECK(summary_field_names().size() == 11);

    CHECK_THROWS_AS(summary_field(r, "pct_change_input_2"), std::invalid_argument);
    CHECK_THROWS_AS(summary_field(r, "profit"), std::invalid_argument);
    CHECK_THROWS_AS(
        summarize(std::vector<SweepRecord>{r}, std::vector<std::string>{"vessel"},
                  "gamma_star", 4),
        std::invalid_argument);
    CHECK_THROWS_AS(summarize(std::vector<SweepRecord>{r}, std::vector<std::string>{},
                              "gamma_star", 0),
                    std::invalid_argument);

    SweepRecord multi = fake_record(0.5, 1.0);
    multi.inputs = {{"capital", 0.3, 0.1, 0.25},
                    {"labor", 0.3, -0.1, 0.25},
                    {"fuel", 0.2, 0.05, 0.25}};
    multi.pct_change_inputs = {1.0, -2.0, 0.5};
    CHECK(summary_field(multi, "pct_change_input_3") == 0.5);
    CHECK_THROWS_AS(summarize(std::vector<SweepRecord>{multi},
                              std::vector<std::string>{"alpha"}, "gamma_star", 4),
                    std::invalid_argument);
}
