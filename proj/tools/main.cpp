#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fairgen/audit.hpp"
#include "fairgen/backends.hpp"
#include "fairgen/demographics.hpp"
#include "fairgen/generate.hpp"
#include "fairgen/json_io.hpp"
#include "fairgen/prompt.hpp"
#include "fairgen/providers.hpp"
#include "fairgen/report.hpp"
#include "fairgen/simulate.hpp"
#include "fairgen/target.hpp"

namespace {

using namespace fairgen;

// Exit codes: 0 ok, 1 unexpected, 2 config/usage, 3 transport,
// 4 schema violation, 5 contract violation, 6 missing upstream artifact,
// 7 file I/O.
int exit_code_for(Errc c) {
    switch (c) {
    case Errc::invalid_argument:
    case Errc::scheme_mismatch:
    case Errc::degenerate_reference:
    case Errc::config: return 2;
    case Errc::transport: return 3;
    case Errc::schema_violation: return 4;
    case Errc::contract_violation: return 5;
    case Errc::missing_artifact: return 6;
    case Errc::io: return 7;
    }
    return 1;
}

AttributeScheme scheme_by_name(const std::string& name) {
    if (name == "bins3") return AttributeScheme::bins3();
    if (name == "fitzpatrick6") return AttributeScheme::fitzpatrick6();
    if (name == "monk10") return AttributeScheme::monk10();
    raise(Errc::config, "unknown scheme '" + name + "' (expected bins3|fitzpatrick6|monk10)");
}

struct TargetFlags {
    std::string target = "uniform";
    double alpha = 0.5;
    std::string focal;
    std::string dist_file; // explicit target / fallback override
};

void add_target_flags(CLI::App* cmd, TargetFlags& f) {
    cmd->add_option("--target", f.target, "Target variant: uniform|intermediate|extreme|explicit|fallback")
        ->default_val("uniform");
    cmd->add_option("--alpha", f.alpha, "Mixing weight (intermediate) or focal mass (extreme)");
    cmd->add_option("--focal", f.focal, "Focal category label (extreme)");
    cmd->add_option("--dist", f.dist_file, "Distribution JSON (explicit target or fallback override)");
}

TargetSetting setting_from_flags(const TargetFlags& f) {
    const auto variant = target_variant_from_name(f.target);
    using V = TargetSetting::Variant;
    switch (variant) {
    case V::uniform: return TargetSetting::Uniform();
    case V::intermediate: return TargetSetting::Intermediate(f.alpha);
    case V::extreme:
        if (f.focal.empty()) raise(Errc::config, "--target extreme needs --focal");
        return TargetSetting::Extreme(f.focal, f.alpha);
    case V::explicit_dist:
        if (f.dist_file.empty()) raise(Errc::config, "--target explicit needs --dist FILE");
        return TargetSetting::Explicit(distribution_from_json(load_json_file(f.dist_file)));
    case V::fallback:
        if (!f.dist_file.empty())
            return TargetSetting::Fallback(distribution_from_json(load_json_file(f.dist_file)));
        return TargetSetting::Fallback();
    }
    raise(Errc::config, "unreachable target variant");
}

std::unique_ptr<LlmProvider> make_provider(const std::string& kind, const std::string& provider_config,
                                           const std::string& stub_file,
                                           std::optional<double>* config_threshold = nullptr) {
    if (kind == "stub") {
        if (stub_file.empty()) raise(Errc::config, "--provider stub needs --stub-file FILE");
        return std::make_unique<StubLlmProvider>(StubLlmProvider::from_file(stub_file));
    }
    if (kind == "http") {
        if (provider_config.empty()) raise(Errc::config, "--provider http needs --provider-config FILE");
        auto cfg = HttpProviderConfig::from_json_file(provider_config);
        if (config_threshold) *config_threshold = cfg.threshold;
        return std::make_unique<HttpLlmProvider>(std::move(cfg));
    }
    raise(Errc::config, "unknown provider '" + kind + "' (expected stub|http)");
}

int cmd_retrieve(const std::string& prompt, const std::string& scope_str, const std::string& provider_kind,
                 const std::string& provider_config, const std::string& stub_file,
                 const std::string& cache_dir, bool no_cache, double threshold, bool threshold_given,
                 bool force_fallback, const std::string& out_file) {
    DemographicQuery query;
    query.base_prompt = prompt;
    query.concept_name = extract_concept(prompt);
    query.scope = DemographicQuery::scope_from_string(scope_str, &query.custom_scope);

    std::optional<double> config_threshold;
    auto provider = make_provider(provider_kind, provider_config, stub_file, &config_threshold);
    if (!threshold_given && config_threshold) threshold = *config_threshold;
    RetrievalOptions opts;
    opts.cache_dir = cache_dir;
    opts.use_cache = !no_cache && !cache_dir.empty();

    const DemographicResult result = retrieve_demographics(query, *provider, opts);
    const RoutingDecision decision = route(result, threshold, force_fallback);

    Json out{{"concept", query.concept_name},
             {"scope", query.scope_string()},
             {"result", to_json(result)},
             {"routing",
              Json{{"outcome", decision.outcome == RoutingDecision::Outcome::use_demographics
                                   ? "use_demographics"
                                   : "use_fallback"},
                   {"reason", fallback_reason_name(decision.reason)},
                   {"threshold", decision.threshold}}}};
    std::cout << out.dump(2) << "\n";
    if (!out_file.empty()) save_json_file(out_file, out);
    if (decision.outcome == RoutingDecision::Outcome::use_fallback)
        std::cerr << "note: routing suggests the fallback target (" << fallback_reason_name(decision.reason)
                  << "); plan with --target fallback\n";
    return 0;
}

int cmd_plan(const std::string& prompt, const TargetFlags& tf, const std::string& scheme_name,
             const std::string& demographics_file, const std::string& r_file, std::int64_t n,
             std::uint64_t seed, const std::string& out_file, bool rewrite,
             const std::string& provider_kind, const std::string& provider_config,
             const std::string& stub_file) {
    std::optional<Distribution> r;
    std::optional<AttributeScheme> scheme;

    if (!demographics_file.empty()) {
        const Json j = load_json_file(demographics_file);
        const DemographicResult result =
            demographic_result_from_json(j.contains("result") ? j.at("result") : j);
        if (!result.proportions)
            raise(Errc::contract_violation,
                  "retrieved result has no demographic data; plan with --target fallback instead");
        r = result.proportions;
        scheme = r->scheme();
    }
    if (!r_file.empty()) {
        r = distribution_from_json(load_json_file(r_file));
        scheme = r->scheme();
    }

    const TargetSetting setting = setting_from_flags(tf);
    if (setting.variant == TargetSetting::Variant::fallback) {
        scheme = setting.dist ? setting.dist->scheme() : AttributeScheme::fitzpatrick6();
    } else if (setting.variant == TargetSetting::Variant::explicit_dist) {
        scheme = setting.dist->scheme();
    }
    if (!scheme) scheme = scheme_by_name(scheme_name);

    const Distribution q = resolve_target(setting, *scheme, r);
    std::unique_ptr<LlmProvider> rewriter;
    PromptStyler styler;
    if (rewrite) {
        rewriter = make_provider(provider_kind, provider_config, stub_file);
        styler = llm_prompt_styler(*rewriter);
    }
    const GenerationPlan p = plan(prompt, setting, q, n, seed, ToneVocabulary::defaults(), styler);
    save_plan(out_file, p);

    std::cout << "plan: " << out_file << "\n";
    for (std::size_t i = 0; i < p.allocation.counts.size(); ++i)
        std::printf("  %-28s %6lld\n", q.scheme().categories[i].c_str(),
                    static_cast<long long>(p.allocation.counts[i]));
    std::printf("  %-28s %6lld\n", "total", static_cast<long long>(p.allocation.total));
    return 0;
}

int cmd_generate(const std::string& plan_file, const std::string& out_dir, const std::string& backend_kind,
                 const std::string& backend_config, BackendParams params, int concurrency) {
    const GenerationPlan p = load_plan(plan_file);

    std::unique_ptr<ImageBackend> backend;
    if (backend_kind == "synthetic") {
        auto cfg = backend_config.empty() ? SyntheticBackendConfig::defaults()
                                          : SyntheticBackendConfig::from_json(load_json_file(backend_config));
        backend = std::make_unique<SyntheticBackend>(std::move(cfg));
    } else if (backend_kind == "http") {
        if (backend_config.empty()) raise(Errc::config, "--backend http needs --backend-config FILE");
        backend = std::make_unique<HttpImageBackend>(HttpBackendConfig::from_json_file(backend_config));
    } else {
        raise(Errc::config, "unknown backend '" + backend_kind + "' (expected synthetic|http)");
    }

    ExecuteOptions opts;
    opts.out_dir = out_dir;
    opts.concurrency = concurrency;
    const auto records = execute(p, *backend, params, opts);

    std::int64_t failed = 0;
    for (const auto& r : records)
        if (r.status == GenerationRecord::Status::failed) ++failed;
    std::cout << "generated " << (records.size() - failed) << "/" << records.size() << " images into "
              << out_dir << " (" << failed << " failed)\n";
    if (!records.empty() && failed == static_cast<std::int64_t>(records.size())) {
        std::cerr << "error: every generation failed; see manifest.json records\n";
        return 3;
    }
    return 0;
}

int cmd_audit(const std::string& run_dir, const std::string& manifest_file) {
    const std::filesystem::path manifest = manifest_file.empty()
                                               ? std::filesystem::path(run_dir) / "manifest.json"
                                               : std::filesystem::path(manifest_file);
    const AuditBatch batch = audit_run(manifest);
    std::cout << "audited " << batch.entries.size() << " images: " << batch.n_ok << " ok, "
              << batch.discards.total() << " discarded\n";
    if (batch.p_bins3) {
        std::cout << "p (3-bin):";
        for (std::size_t i = 0; i < batch.p_bins3->size(); ++i)
            std::printf(" %s=%.3f", batch.p_bins3->scheme().categories[i].c_str(), (*batch.p_bins3)[i]);
        std::cout << "\n";
    }
    std::cout << "audit: " << (manifest.parent_path() / "audit.json").string() << "\n";
    return 0;
}

Distribution audit_p_for_scheme(const AuditBatch& batch, const AttributeScheme& scheme) {
    std::optional<Distribution> p;
    if (scheme.kind == SchemeKind::skin_tone_bins3) p = batch.p_bins3;
    else if (scheme.kind == SchemeKind::skin_tone_fitzpatrick) p = batch.p_fitzpatrick;
    else if (scheme.kind == SchemeKind::skin_tone_monk) p = batch.p_monk;
    if (!p) raise(Errc::missing_artifact, "audit has no observed distribution for scheme " + scheme.name);
    return *p;
}

Distribution target_for_scheme(const Distribution& declared, const AttributeScheme& scheme) {
    if (declared.scheme() == scheme) return declared;
    if (scheme.kind == SchemeKind::skin_tone_bins3 &&
        declared.scheme().kind == SchemeKind::skin_tone_fitzpatrick)
        return aggregate_to_bins(declared);
    raise(Errc::scheme_mismatch, "declared target over '" + declared.scheme().name +
                                     "' cannot be reported over '" + scheme.name + "'");
}

int cmd_report(const std::string& pairs_file, const std::string& baseline_audit,
               const std::string& treated_audit, const std::string& occupation,
               const std::string& occupations_csv, const std::string& scheme_name,
               const std::string& target_file, const std::string& out_file, const std::string& csv_file,
               const std::string& histogram_dir) {
    const AttributeScheme scheme = scheme_by_name(scheme_name);
    const OccupationTable table =
        occupations_csv.empty() ? OccupationTable::builtin() : OccupationTable::load_csv(occupations_csv);

    struct Pair {
        std::string occupation, baseline, treated;
    };
    std::vector<Pair> pairs;
    if (!pairs_file.empty()) {
        for (const auto& row : load_json_file(pairs_file))
            pairs.push_back({require_string(row, "occupation"), require_string(row, "baseline"),
                             require_string(row, "treated")});
    } else {
        if (baseline_audit.empty() || treated_audit.empty() || occupation.empty())
            raise(Errc::config, "report needs --pairs FILE, or --occupation with --baseline-audit and --treated-audit");
        pairs.push_back({occupation, baseline_audit, treated_audit});
    }

    std::optional<Distribution> q_override;
    if (!target_file.empty())
        q_override = target_for_scheme(distribution_from_json(load_json_file(target_file)), scheme);

    std::vector<NamedComparison> comparisons;
    for (const auto& pair : pairs) {
        if (!std::filesystem::exists(pair.baseline) || !std::filesystem::exists(pair.treated))
            raise(Errc::missing_artifact, "audit file missing for '" + pair.occupation + "'; run audit first");
        const AuditBatch baseline = audit_batch_from_json(load_json_file(pair.baseline));
        const AuditBatch treated = audit_batch_from_json(load_json_file(pair.treated));

        Distribution q = q_override ? *q_override : [&] {
            if (!treated.declared_target)
                raise(Errc::missing_artifact,
                      "treated audit carries no declared target; pass --target FILE");
            return target_for_scheme(*treated.declared_target, scheme);
        }();

        comparisons.push_back(NamedComparison{
            pair.occupation,
            AuditComparison::make(q, audit_p_for_scheme(baseline, scheme), baseline.n_ok,
                                  baseline.discards.total()),
            AuditComparison::make(q, audit_p_for_scheme(treated, scheme), treated.n_ok,
                                  treated.discards.total())});
    }

    const Report report = group_report(comparisons, table);
    save_json_file(out_file, to_json(report));
    if (!csv_file.empty()) write_report_csv(csv_file, report);
    if (!histogram_dir.empty()) {
        for (const auto& pair : pairs) {
            const AuditBatch treated = audit_batch_from_json(load_json_file(pair.treated));
            write_histogram_csv(std::filesystem::path(histogram_dir) /
                                    (pair.occupation + "_treated_hist.csv"),
                                audit_p_for_scheme(treated, scheme));
        }
    }
    std::cout << format_report_table(report);
    std::cout << "report: " << out_file << "\n";
    return 0;
}

int cmd_simulate(const std::string& preset, const std::string& config_file, std::int64_t n,
                 double fidelity, std::uint64_t seed, const TargetFlags& tf, bool target_given,
                 const std::string& out_dir) {
    ScenarioConfig cfg = config_file.empty() ? ScenarioConfig::preset(preset)
                                             : ScenarioConfig::from_json(load_json_file(config_file));
    if (n > 0) cfg.images_per_condition = n;
    if (fidelity >= 0.0) cfg.fidelity = fidelity;
    if (seed != 0) cfg.seed_root = seed;
    if (target_given) cfg.target = setting_from_flags(tf);

    const ScenarioOutcome outcome = run_scenario(cfg, out_dir);

    std::printf("scenario %-16s n=%lld fidelity=%.2f target=%s\n", cfg.name.c_str(),
                static_cast<long long>(cfg.images_per_condition), cfg.fidelity, cfg.target.variant_name());
    for (std::size_t i = 0; i < outcome.type_deltas.size(); ++i)
        std::printf("  type %-4s expected=%.4f observed=%.4f delta=%.4f tol=%.4f %s\n",
                    outcome.q.scheme().categories[i].c_str(), outcome.expected_treated[i],
                    outcome.p_treated[i], outcome.type_deltas[i], outcome.type_tolerances[i],
                    outcome.type_deltas[i] <= outcome.type_tolerances[i] ? "ok" : "VIOLATION");
    std::printf("  3-bin error: baseline=%.4f treated=%.4f improvement=%.1f%%\n", outcome.baseline_error3,
                outcome.treated_error3, outcome.improvement);
    std::printf("%s\n", outcome.pass ? "PASS" : "FAIL");
    return outcome.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Declared-target image generation and skin-tone audit pipeline"};
    app.require_subcommand(1);

    // retrieve
    std::string prompt, scope = "global", provider_kind = "http", provider_config, stub_file, cache_dir;
    bool no_cache = false, force_fallback = false;
    double threshold = kDefaultConfidenceThreshold;
    std::string retrieve_out;
    auto* retrieve = app.add_subcommand("retrieve", "Query demographic proportions for a prompt");
    retrieve->add_option("--prompt", prompt, "Base prompt")->required();
    retrieve->add_option("--scope", scope, "global|us|<custom text>");
    retrieve->add_option("--provider", provider_kind, "stub|http");
    retrieve->add_option("--provider-config", provider_config, "Provider config JSON");
    retrieve->add_option("--stub-file", stub_file, "Canned responses JSON for the stub provider");
    retrieve->add_option("--cache-dir", cache_dir, "Persistent retrieval cache directory");
    retrieve->add_flag("--no-cache", no_cache, "Bypass the cache");
    retrieve->add_option("--threshold", threshold, "Confidence threshold for routing");
    retrieve->add_flag("--fallback", force_fallback, "Force fallback routing regardless of confidence");
    retrieve->add_option("--out", retrieve_out, "Also write the result JSON here");

    // plan
    std::string plan_prompt, plan_scheme = "bins3", demographics_file, r_file, plan_out = "plan.json";
    std::int64_t plan_n = 0;
    std::uint64_t plan_seed = 42;
    bool plan_rewrite = false;
    TargetFlags plan_target;
    auto* plan_cmd = app.add_subcommand("plan", "Resolve a target and allocate the generation budget");
    plan_cmd->add_option("--prompt", plan_prompt, "Base prompt")->required();
    add_target_flags(plan_cmd, plan_target);
    plan_cmd->add_option("--scheme", plan_scheme, "bins3|fitzpatrick6|monk10 (when no demographics)");
    plan_cmd->add_option("--demographics", demographics_file, "retrieve output JSON (supplies groups and r)");
    plan_cmd->add_option("--r", r_file, "Reference distribution JSON (intermediate/extreme)");
    plan_cmd->add_option("--n", plan_n, "Total image budget")->required();
    plan_cmd->add_option("--seed", plan_seed, "Seed root");
    plan_cmd->add_option("--out", plan_out, "Plan file");
    plan_cmd->add_flag("--rewrite", plan_rewrite, "Rewrite subgroup prompts via the LLM provider");
    plan_cmd->add_option("--provider", provider_kind, "stub|http (with --rewrite)");
    plan_cmd->add_option("--provider-config", provider_config, "Provider config JSON (with --rewrite)");
    plan_cmd->add_option("--stub-file", stub_file, "Canned responses JSON (with --rewrite)");

    // generate
    std::string gen_plan = "plan.json", gen_out = "run", backend_kind = "synthetic", backend_config;
    BackendParams params;
    int concurrency = 4;
    auto* gen = app.add_subcommand("generate", "Execute a plan against a backend");
    gen->add_option("--plan", gen_plan, "Plan file");
    gen->add_option("--out", gen_out, "Run directory")->required();
    gen->add_option("--backend", backend_kind, "synthetic|http");
    gen->add_option("--backend-config", backend_config, "Backend config JSON");
    gen->add_option("--width", params.width, "Image width px");
    gen->add_option("--height", params.height, "Image height px");
    gen->add_option("--steps", params.steps, "Inference steps");
    gen->add_option("--guidance", params.guidance, "Guidance scale");
    gen->add_option("--precision", params.precision, "Precision tag");
    gen->add_option("--concurrency", concurrency, "In-flight request bound");

    // audit
    std::string audit_run_dir = "run", audit_manifest;
    auto* audit = app.add_subcommand("audit", "Classify skin tones for a run");
    audit->add_option("--run", audit_run_dir, "Run directory (expects manifest.json)");
    audit->add_option("--manifest", audit_manifest, "Explicit manifest path");

    // report
    std::string pairs_file, baseline_audit, treated_audit, occupation, occupations_csv;
    std::string report_scheme = "bins3", target_file, report_out = "report.json", csv_file, histogram_dir;
    auto* report = app.add_subcommand("report", "Alignment errors and status-group table");
    report->add_option("--pairs", pairs_file, "JSON array of {occupation, baseline, treated} audit paths");
    report->add_option("--baseline-audit", baseline_audit, "Baseline audit.json");
    report->add_option("--treated-audit", treated_audit, "Treated audit.json");
    report->add_option("--occupation", occupation, "Occupation label for the single-pair form");
    report->add_option("--occupations", occupations_csv, "Occupation table CSV (default: built-in)");
    report->add_option("--scheme", report_scheme, "Reporting scheme: bins3|fitzpatrick6|monk10");
    report->add_option("--target", target_file, "Declared target JSON (default: from the treated audit)");
    report->add_option("--out", report_out, "Report JSON path");
    report->add_option("--csv", csv_file, "Also write CSV here");
    report->add_option("--histograms", histogram_dir, "Write per-occupation frequency CSVs here");

    // simulate
    std::string preset = "high-status", sim_config, sim_out = "sim";
    std::int64_t sim_n = 0;
    double sim_fidelity = -1.0;
    std::uint64_t sim_seed = 0;
    TargetFlags sim_target;
    auto* simulate = app.add_subcommand("simulate", "Run a synthetic end-to-end scenario");
    simulate->add_option("--preset", preset, "high-status|moderate-status|low-status|smiling");
    simulate->add_option("--config", sim_config, "Scenario config JSON (overrides --preset)");
    simulate->add_option("--n", sim_n, "Images per condition");
    simulate->add_option("--fidelity", sim_fidelity, "Descriptor fidelity in [0,1]");
    simulate->add_option("--seed", sim_seed, "Seed root");
    add_target_flags(simulate, sim_target);
    simulate->add_option("--out", sim_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*retrieve)
            return cmd_retrieve(prompt, scope, provider_kind, provider_config, stub_file, cache_dir,
                                no_cache, threshold, retrieve->count("--threshold") > 0, force_fallback,
                                retrieve_out);
        if (*plan_cmd)
            return cmd_plan(plan_prompt, plan_target, plan_scheme, demographics_file, r_file, plan_n,
                            plan_seed, plan_out, plan_rewrite, provider_kind, provider_config, stub_file);
        if (*gen) return cmd_generate(gen_plan, gen_out, backend_kind, backend_config, params, concurrency);
        if (*audit) return cmd_audit(audit_run_dir, audit_manifest);
        if (*report)
            return cmd_report(pairs_file, baseline_audit, treated_audit, occupation, occupations_csv,
                              report_scheme, target_file, report_out, csv_file, histogram_dir);
        if (*simulate)
            return cmd_simulate(preset, sim_config, sim_n, sim_fidelity, sim_seed, sim_target,
                                simulate->count("--target") > 0, sim_out);
    } catch (const Error& e) {
        std::cerr << "error (" << errc_name(e.code()) << "): " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
