#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fairgen/simulate.hpp"

using namespace fairgen;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("fairgen_sim_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("expected_observed mixture") {
    const auto baseline =
        Distribution(AttributeScheme::fitzpatrick6(), {0.13, 0.69, 0.10, 0.06, 0.013, 0.007});
    const auto q = Distribution::uniform(AttributeScheme::fitzpatrick6());

    const auto perfect = expected_observed(baseline, q, 1.0);
    for (std::size_t i = 0; i < 6; ++i) CHECK(perfect[i] == doctest::Approx(q[i]));

    const auto ignored = expected_observed(baseline, q, 0.0);
    for (std::size_t i = 0; i < 6; ++i) CHECK(ignored[i] == doctest::Approx(baseline[i]));

    const auto mixed = expected_observed(baseline, q, 0.9);
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(mixed[i] == doctest::Approx(0.9 / 6.0 + 0.1 * baseline[i]).epsilon(1e-12));

    CHECK_THROWS_AS(expected_observed(baseline, Distribution::uniform(AttributeScheme::bins3()), 0.5), Error);
    CHECK_THROWS_AS(expected_observed(baseline, q, 1.5), Error);
}

TEST_CASE("presets are calibrated to the reported skews") {
    const auto high = ScenarioConfig::preset("high-status");
    CHECK(high.baseline[1] == doctest::Approx(0.69)); // Type II share
    CHECK(high.baseline[4] + high.baseline[5] < 0.02 + 1e-12);

    const auto low = ScenarioConfig::preset("low-status");
    CHECK(low.baseline[4] + low.baseline[5] >= 0.48 - 1e-12);
    CHECK(low.baseline[0] + low.baseline[1] == doctest::Approx(0.24));
    CHECK(low.baseline[5] == doctest::Approx(0.34)); // Type VI share

    const auto smiling = ScenarioConfig::preset("smiling");
    CHECK(smiling.baseline[0] + smiling.baseline[1] > 0.80);

    CHECK_THROWS_AS(ScenarioConfig::preset("nope"), Error);
}

TEST_CASE("run_scenario: uniform target at fidelity 1 is deterministic" * doctest::timeout(60)) {
    const auto dir = temp_dir("f1");
    ScenarioConfig cfg = ScenarioConfig::preset("high-status");
    cfg.fidelity = 1.0;
    cfg.images_per_condition = 120; // divisible by 6: quota is exact

    const auto outcome = run_scenario(cfg, dir);
    CHECK(outcome.within_tolerance);
    CHECK(outcome.pass);
    // Perfect fidelity forces every subgroup draw, so p == q exactly.
    for (std::size_t i = 0; i < 6; ++i) CHECK(outcome.p_treated[i] == doctest::Approx(1.0 / 6).epsilon(1e-12));
    CHECK(outcome.treated_error3 <= 0.005);
    CHECK(std::filesystem::exists(dir / "scenario_report.json"));
    CHECK(std::filesystem::exists(dir / "treated" / "audit.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_scenario: baseline error matches the configured skew analytically" * doctest::timeout(60)) {
    const auto dir = temp_dir("base");
    ScenarioConfig cfg = ScenarioConfig::preset("high-status");
    cfg.images_per_condition = 400;
    cfg.fidelity = 0.9;

    const auto outcome = run_scenario(cfg, dir);

    // Analytic 3-bin error of the configured baseline vs uniform.
    const auto b3 = aggregate_to_bins(cfg.baseline);
    double analytic = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double d = b3[i] - 1.0 / 3.0;
        analytic += d * d;
    }
    // Sampling tolerance: propagate a generous per-bin 4-sigma bound.
    CHECK(std::abs(outcome.baseline_error3 - analytic) < 0.08);
    CHECK(outcome.treated_below_baseline);
    std::filesystem::remove_all(dir);
}

TEST_CASE("graded control: alpha sweep is monotone" * doctest::timeout(120)) {
    // Intermediate targets with r = the baseline skew: error toward uniform
    // grows with alpha, empirically and with margin.
    const auto dir = temp_dir("sweep");
    const auto uniform6 = Distribution::uniform(AttributeScheme::fitzpatrick6());

    double prev_error = -1.0;
    for (const double alpha : {0.25, 0.5, 0.75}) {
        ScenarioConfig cfg = ScenarioConfig::preset("high-status");
        cfg.images_per_condition = 300;
        cfg.target = TargetSetting::Intermediate(alpha);
        const auto outcome = run_scenario(cfg, dir / ("a" + std::to_string(alpha)));

        const auto p3 = aggregate_to_bins(outcome.p_treated);
        const double err = alignment_error(p3, aggregate_to_bins(uniform6));
        CHECK(err >= prev_error);
        prev_error = err;
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("scenario config JSON round trip") {
    ScenarioConfig cfg = ScenarioConfig::preset("low-status");
    cfg.target = TargetSetting::Extreme("VI", 1.0);
    const auto round = ScenarioConfig::from_json(cfg.to_json());
    CHECK(round.name == cfg.name);
    CHECK(round.base_prompt == cfg.base_prompt);
    CHECK(round.baseline == cfg.baseline);
    CHECK(round.fidelity == cfg.fidelity);
    CHECK(round.target.variant == cfg.target.variant);
    CHECK(round.images_per_condition == cfg.images_per_condition);
}
