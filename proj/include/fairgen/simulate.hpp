#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fairgen/backends.hpp"
#include "fairgen/report.hpp"
#include "fairgen/target.hpp"

namespace fairgen {

// Desk-scale experiment: a synthetic backend calibrated to a baseline skew,
// run once without intervention and once under a declared target, audited,
// and checked against the analytic mixture expectation.
struct ScenarioConfig {
    std::string name;
    std::string base_prompt;
    // 6-type conditional the backend draws from
    Distribution baseline = Distribution::uniform(AttributeScheme::fitzpatrick6());
    double fidelity = 0.9;
    TargetSetting target = TargetSetting::Uniform();
    std::int64_t images_per_condition = 600;
    std::uint64_t seed_root = 42;
    BackendParams params; // small frames by default; only colorimetry matters

    static ScenarioConfig preset(std::string_view name);
    static std::vector<std::string> preset_names();
    static ScenarioConfig from_json(const Json& j);
    Json to_json() const;
};

// Analytic expectation for the synthetic mixture: each subgroup prompt
// forces its type with probability f, otherwise the baseline draws; with
// quota allocation the aggregate is f*q + (1-f)*baseline.
Distribution expected_observed(const Distribution& baseline, const Distribution& q, double fidelity);

// 4-sigma multinomial tolerance for a proportion expected at e over n draws.
double multinomial_tolerance(double expected, std::int64_t n);

struct ScenarioOutcome {
    ScenarioConfig config;
    Distribution q;                  // resolved declared target (6-type)
    Distribution p_baseline;         // observed, 6-type
    Distribution p_treated;          // observed, 6-type
    Distribution expected_treated;   // analytic mixture
    std::vector<double> type_deltas; // |observed - expected| per type (treated)
    std::vector<double> type_tolerances;
    bool within_tolerance = false;
    double baseline_error3 = 0.0; // 3-bin alignment error vs declared target
    double treated_error3 = 0.0;
    double improvement = 0.0;
    bool treated_below_baseline = false;
    bool pass = false;
    std::filesystem::path baseline_dir;
    std::filesystem::path treated_dir;
};

ScenarioOutcome run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir);

Json to_json(const ScenarioOutcome& o);

} // namespace fairgen
