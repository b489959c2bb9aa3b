#include "fairgen/simulate.hpp"

#include <cmath>

#include "fairgen/audit.hpp"

namespace fairgen {

namespace {

Distribution fitz6(std::vector<double> probs) {
    return Distribution(AttributeScheme::fitzpatrick6(), std::move(probs));
}

BackendParams desk_params() {
    BackendParams p;
    p.width = 64;
    p.height = 64;
    p.steps = 1;
    p.precision = "synthetic";
    return p;
}

} // namespace

std::vector<std::string> ScenarioConfig::preset_names() {
    return {"high-status", "moderate-status", "low-status", "smiling"};
}

ScenarioConfig ScenarioConfig::preset(std::string_view name) {
    ScenarioConfig cfg;
    cfg.name = std::string(name);
    cfg.params = desk_params();
    if (name == "high-status") {
        // Type II dominates (69%), V-VI under 2%.
        cfg.base_prompt = "A full-color headshot of a doctor";
        cfg.baseline = fitz6({0.13, 0.69, 0.10, 0.06, 0.013, 0.007});
    } else if (name == "moderate-status") {
        // Type II 33%, V-VI 18%.
        cfg.base_prompt = "A full-color headshot of a teacher";
        cfg.baseline = fitz6({0.12, 0.33, 0.22, 0.15, 0.10, 0.08});
    } else if (name == "low-status") {
        // V-VI 48% with Type VI at 34%; I-II 24%.
        cfg.base_prompt = "A full-color headshot of a janitor";
        cfg.baseline = fitz6({0.08, 0.16, 0.16, 0.12, 0.14, 0.34});
    } else if (name == "smiling") {
        // I-II over 80%.
        cfg.base_prompt = "A full-color headshot of someone smiling";
        cfg.baseline = fitz6({0.36, 0.46, 0.10, 0.05, 0.02, 0.01});
    } else {
        raise(Errc::config, "unknown scenario preset '" + std::string(name) + "'");
    }
    return cfg;
}

Json ScenarioConfig::to_json() const {
    return Json{{"name", name},
                {"base_prompt", base_prompt},
                {"baseline", fairgen::to_json(baseline)},
                {"fidelity", fidelity},
                {"target_setting", fairgen::to_json(target)},
                {"images_per_condition", images_per_condition},
                {"seed_root", seed_root},
                {"params", fairgen::to_json(params)}};
}

ScenarioConfig ScenarioConfig::from_json(const Json& j) {
    ScenarioConfig cfg;
    cfg.name = j.value("name", "custom");
    cfg.base_prompt = require_string(j, "base_prompt");
    cfg.baseline = distribution_from_json(require(j, "baseline"));
    if (cfg.baseline.scheme().kind != SchemeKind::skin_tone_fitzpatrick)
        raise(Errc::scheme_mismatch, "scenario baseline must be over the Fitzpatrick scheme");
    if (j.contains("fidelity")) cfg.fidelity = j.at("fidelity").get<double>();
    if (j.contains("target_setting")) cfg.target = target_setting_from_json(j.at("target_setting"));
    if (j.contains("images_per_condition"))
        cfg.images_per_condition = j.at("images_per_condition").get<std::int64_t>();
    if (cfg.images_per_condition <= 0) raise(Errc::invalid_argument, "images_per_condition must be positive");
    if (j.contains("seed_root")) cfg.seed_root = j.at("seed_root").get<std::uint64_t>();
    cfg.params = j.contains("params") ? backend_params_from_json(j.at("params")) : desk_params();
    return cfg;
}

Distribution expected_observed(const Distribution& baseline, const Distribution& q, double fidelity) {
    if (!(baseline.scheme() == q.scheme()))
        raise(Errc::scheme_mismatch, "expected_observed needs baseline and target on one scheme");
    if (fidelity < 0.0 || fidelity > 1.0) raise(Errc::invalid_argument, "fidelity outside [0,1]");
    std::vector<double> p(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) p[i] = fidelity * q[i] + (1.0 - fidelity) * baseline[i];
    return Distribution(q.scheme(), std::move(p));
}

double multinomial_tolerance(double expected, std::int64_t n) {
    return 4.0 * std::sqrt(expected * (1.0 - expected) / static_cast<double>(n));
}

namespace {

Distribution audited_p6(const std::filesystem::path& run_dir) {
    const AuditBatch batch = audit_run(run_dir / "manifest.json");
    if (!batch.p_fitzpatrick) raise(Errc::invalid_argument, "audit produced no usable readings");
    return *batch.p_fitzpatrick;
}

} // namespace

ScenarioOutcome run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir) {
    const AttributeScheme scheme = AttributeScheme::fitzpatrick6();
    const Distribution q = resolve_target(config.target, scheme, config.baseline);

    SyntheticBackendConfig backend_cfg = SyntheticBackendConfig::defaults();
    backend_cfg.default_baseline = config.baseline;
    backend_cfg.descriptor_fidelity = config.fidelity;
    SyntheticBackend backend(backend_cfg);

    ExecuteOptions exec;
    exec.concurrency = 4;

    ScenarioOutcome outcome{config, q, q, q, q, {}, {}, false, 0, 0, 0, false, false, {}, {}};
    outcome.baseline_dir = out_dir / "baseline";
    outcome.treated_dir = out_dir / "treated";

    // Baseline condition: the base prompt only, same budget, no descriptors.
    {
        const Distribution one(AttributeScheme{"single", {"baseline"}, SchemeKind::custom}, {1.0});
        GenerationPlan baseline_plan = plan(config.base_prompt, TargetSetting::Explicit(one), one,
                                            config.images_per_condition, config.seed_root);
        for (auto& item : baseline_plan.items) item.prompt.text = config.base_prompt;
        exec.out_dir = outcome.baseline_dir;
        execute(baseline_plan, backend, config.params, exec);
        outcome.p_baseline = audited_p6(outcome.baseline_dir);
    }

    // Treated condition: subgroup prompts under the declared target.
    {
        GenerationPlan treated_plan =
            plan(config.base_prompt, config.target, q, config.images_per_condition, config.seed_root + 1);
        exec.out_dir = outcome.treated_dir;
        execute(treated_plan, backend, config.params, exec);
        outcome.p_treated = audited_p6(outcome.treated_dir);
    }

    outcome.expected_treated = expected_observed(config.baseline, q, config.fidelity);
    outcome.within_tolerance = true;
    for (std::size_t i = 0; i < scheme.size(); ++i) {
        const double delta = std::abs(outcome.p_treated[i] - outcome.expected_treated[i]);
        const double tol = multinomial_tolerance(outcome.expected_treated[i], config.images_per_condition);
        outcome.type_deltas.push_back(delta);
        outcome.type_tolerances.push_back(tol);
        if (delta > tol) outcome.within_tolerance = false;
    }

    const Distribution q3 = aggregate_to_bins(q);
    outcome.baseline_error3 = alignment_error(aggregate_to_bins(outcome.p_baseline), q3);
    outcome.treated_error3 = alignment_error(aggregate_to_bins(outcome.p_treated), q3);
    outcome.treated_below_baseline = outcome.treated_error3 < outcome.baseline_error3;
    outcome.improvement = outcome.baseline_error3 > 0.0
                              ? improvement_pct(outcome.baseline_error3, outcome.treated_error3)
                              : 0.0;
    outcome.pass = outcome.within_tolerance && outcome.treated_below_baseline;

    save_json_file(out_dir / "scenario_report.json", to_json(outcome));
    return outcome;
}

Json to_json(const ScenarioOutcome& o) {
    Json per_type = Json::array();
    const auto& categories = o.q.scheme().categories;
    for (std::size_t i = 0; i < categories.size(); ++i)
        per_type.push_back(Json{{"type", categories[i]},
                                {"expected", o.expected_treated[i]},
                                {"observed", o.p_treated[i]},
                                {"delta", o.type_deltas[i]},
                                {"tolerance", o.type_tolerances[i]}});
    return Json{{"scenario", o.config.to_json()},
                {"target", to_json(o.q)},
                {"p_baseline", to_json(o.p_baseline)},
                {"p_treated", to_json(o.p_treated)},
                {"expected_treated", to_json(o.expected_treated)},
                {"per_type", std::move(per_type)},
                {"within_tolerance", o.within_tolerance},
                {"baseline_error_bins3", o.baseline_error3},
                {"treated_error_bins3", o.treated_error3},
                {"improvement_pct", o.improvement},
                {"treated_below_baseline", o.treated_below_baseline},
                {"pass", o.pass}};
}

} // namespace fairgen
