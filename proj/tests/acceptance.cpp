// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Runs entirely offline.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fairgen/allocate.hpp"
#include "fairgen/audit.hpp"
#include "fairgen/png_io.hpp"
#include "fairgen/backends.hpp"
#include "fairgen/demographics.hpp"
#include "fairgen/generate.hpp"
#include "fairgen/prompt.hpp"
#include "fairgen/providers.hpp"
#include "fairgen/report.hpp"
#include "fairgen/simulate.hpp"

using namespace fairgen;

namespace {

struct Criterion {
    int number;
    std::string name;
    double time_limit_seconds;
    std::function<void()> body;
};

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

std::filesystem::path work_dir() {
    auto dir = std::filesystem::temp_directory_path() / "fairgen_acceptance";
    std::filesystem::create_directories(dir);
    return dir;
}

Distribution random_simplex(std::mt19937_64& rng, std::size_t m, bool allow_zeros = false) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> v(m);
    double sum = 0.0;
    for (double& x : v) sum += (x = (allow_zeros && unit(rng) < 0.1 && m > 1) ? 0.0 : unit(rng) + 1e-9);
    if (sum == 0.0) {
        v[0] = 1.0;
        sum = 1.0;
    }
    for (double& x : v) x /= sum;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < m; ++i) labels.push_back("g" + std::to_string(i + 1));
    return Distribution(AttributeScheme{"rand", labels, SchemeKind::custom}, v);
}

// ---------------------------------------------------------------- criterion 1

void criterion_metric_fidelity() {
    std::mt19937_64 rng(10101);
    for (int pair = 0; pair < 20; ++pair) {
        const std::size_t m = 2 + rng() % 9;
        const auto p = random_simplex(rng, m);
        const auto q_src = random_simplex(rng, m);
        const auto q = Distribution(p.scheme(), std::vector<double>(q_src.probs().begin(), q_src.probs().end()));
        // Independent brute-force route in extended precision.
        long double brute = 0.0L;
        for (std::size_t i = 0; i < m; ++i) {
            const long double d = static_cast<long double>(p[i]) - static_cast<long double>(q[i]);
            brute += d * d;
        }
        const double err = alignment_error(p, q);
        expect(std::abs(err - static_cast<double>(brute)) <= 1e-12,
               "alignment_error disagrees with the brute-force oracle");
    }

    const double imp1 = improvement_pct(0.179, 0.023);
    expect(std::abs(imp1 - 87.2) <= 0.1, "improvement(0.179, 0.023) != 87.2 +- 0.1, got " + std::to_string(imp1));
    const double imp2 = improvement_pct(0.029, 0.007);
    expect(std::abs(imp2 - 77.3) <= 2.5, "improvement(0.029, 0.007) != 77.3 +- 2.5, got " + std::to_string(imp2));
}

// ---------------------------------------------------------------- criterion 2

void criterion_target_algebra() {
    std::mt19937_64 rng(20202);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto fitz = AttributeScheme::fitzpatrick6();

    for (int iter = 0; iter < 1000; ++iter) {
        const std::size_t m = 2 + rng() % 11;
        const auto r = random_simplex(rng, m);
        const auto uniform = uniform_target(r.scheme());

        // Constructed targets are valid distributions.
        const double alpha = unit(rng);
        const auto q_int = intermediate_target(r, alpha);
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            expect(q_int[i] >= 0.0, "intermediate produced negative mass");
            sum += q_int[i];
        }
        expect(std::abs(sum - 1.0) <= 1e-9, "intermediate mass not unit");

        // Linearity.
        for (std::size_t i = 0; i < m; ++i)
            expect(std::abs(q_int[i] - (alpha * r[i] + (1 - alpha) / static_cast<double>(m))) <= 1e-12,
                   "intermediate not linear in alpha");

        // Alpha-monotonicity of error to uniform.
        const double a1 = unit(rng), a2 = unit(rng);
        const double lo = std::min(a1, a2), hi = std::max(a1, a2);
        expect(alignment_error(intermediate_target(r, hi), uniform) >=
                   alignment_error(intermediate_target(r, lo), uniform) - 1e-12,
               "error to uniform not monotone in alpha");

        // Extreme alpha=1 one-hot.
        const std::size_t focal = rng() % m;
        const auto onehot = extreme_target(r, r.scheme().categories[focal], 1.0);
        for (std::size_t i = 0; i < m; ++i)
            expect(onehot[i] == (i == focal ? 1.0 : 0.0), "extreme alpha=1 not one-hot");

        // Aggregate/mix commutation on the Fitzpatrick scheme.
        const auto a_src = random_simplex(rng, 6);
        const auto b_src = random_simplex(rng, 6);
        const auto a6 = Distribution(fitz, std::vector<double>(a_src.probs().begin(), a_src.probs().end()));
        const auto b6 = Distribution(fitz, std::vector<double>(b_src.probs().begin(), b_src.probs().end()));
        const double beta = unit(rng);
        std::vector<double> mixed(6);
        for (std::size_t i = 0; i < 6; ++i) mixed[i] = beta * a6[i] + (1 - beta) * b6[i];
        const auto lhs = aggregate_to_bins(Distribution(fitz, mixed));
        const auto ba = aggregate_to_bins(a6), bb = aggregate_to_bins(b6);
        for (std::size_t i = 0; i < 3; ++i)
            expect(std::abs(lhs[i] - (beta * ba[i] + (1 - beta) * bb[i])) <= 1e-12,
                   "aggregate does not commute with convex mixing");
    }
}

// ---------------------------------------------------------------- criterion 3

void criterion_allocator() {
    {
        const auto a = allocate(Distribution(AttributeScheme{"t", {"a", "b", "c"}, SchemeKind::custom},
                                             {0.5, 0.3, 0.2}),
                                50);
        expect(a.counts == std::vector<std::int64_t>{25, 15, 10}, "hand case (25,15,10) failed");
        const auto b = allocate(Distribution::uniform(AttributeScheme::fitzpatrick6()), 50);
        expect(b.counts == std::vector<std::int64_t>{9, 9, 8, 8, 8, 8}, "hand case (9,9,8,8,8,8) failed");
        const auto c = allocate(Distribution(AttributeScheme{"t", {"a", "b", "c"}, SchemeKind::custom},
                                             {1.0 / 3, 1.0 / 3, 1.0 / 3}),
                                100);
        expect(c.counts == std::vector<std::int64_t>{34, 33, 33}, "hand case (34,33,33) failed");
    }

    std::mt19937_64 rng(30303);
    for (int iter = 0; iter < 10000; ++iter) {
        const std::size_t m = 1 + rng() % 12;
        const auto q = random_simplex(rng, m, /*allow_zeros=*/true);
        const std::int64_t n = static_cast<std::int64_t>(rng() % 10001);
        const auto plan = allocate(q, n);

        std::int64_t total = 0;
        for (std::size_t i = 0; i < m; ++i) {
            total += plan.counts[i];
            expect(plan.counts[i] >= 0, "negative count");
            expect(std::abs(static_cast<double>(plan.counts[i]) - q[i] * static_cast<double>(n)) < 1.0,
                   "near-quota bound violated");
        }
        expect(total == n, "counts do not sum to the budget");
        expect(allocate(q, n).counts == plan.counts, "allocation not deterministic");
    }
}

// ---------------------------------------------------------------- criterion 4

void criterion_colorimetry() {
    const auto white = kernels::srgb_to_lab(255, 255, 255);
    expect(std::abs(white.l - 100.0) <= 1e-9 && std::abs(white.a) < 0.01 && std::abs(white.b) < 0.01,
           "white point conversion off");
    const auto black = kernels::srgb_to_lab(0, 0, 0);
    expect(black.l == 0.0 && black.a == 0.0 && black.b == 0.0, "black conversion off");
    const auto red = kernels::srgb_to_lab(255, 0, 0);
    expect(std::abs(red.l - 53.24) <= 0.05 && std::abs(red.a - 80.09) <= 0.05 &&
               std::abs(red.b - 67.20) <= 0.05,
           "red conversion outside +-0.05 of the oracle value");

    expect(std::abs(ita_degrees({70, 0, 15}) - 53.13) <= 0.01, "ITA(70,.,15) != 53.13");
    expect(std::abs(ita_degrees({50, 0, 10}) - 0.0) <= 0.01, "ITA(50,.,10) != 0");
    expect(std::abs(ita_degrees({80, 0, 12}) - 68.20) <= 0.01, "ITA(80,.,12) != 68.20");

    const struct {
        double edge;
        int at, above;
    } edges[] = {{55, 2, 1}, {41, 3, 2}, {28, 4, 3}, {10, 5, 4}, {-30, 6, 5}};
    for (const auto& e : edges) {
        expect(ita_to_fitzpatrick(e.edge) == e.at, "threshold edge not closed on the lower side");
        expect(ita_to_fitzpatrick(e.edge - 0.001) == e.at, "threshold -0.001 misclassified");
        expect(ita_to_fitzpatrick(e.edge + 0.001) == e.above, "threshold +0.001 misclassified");
    }
}

// ---------------------------------------------------------------- criterion 5

void criterion_palette_roundtrip() {
    const auto cfg = SyntheticBackendConfig::defaults();
    BackendParams params;
    params.width = 96;
    params.height = 96;
    params.steps = 1;

    for (int t = 1; t <= 6; ++t) {
        const auto img = SyntheticBackend::render_face(cfg.palette[t - 1], cfg.background, params.width,
                                                       params.height);
        const auto reading = audit_image(img, std::nullopt);
        expect(reading.status == SkinToneReading::Status::ok,
               "palette color " + std::to_string(t) + " produced no usable reading");
        expect(reading.fitzpatrick == t, "palette color " + std::to_string(t) + " classified as type " +
                                             std::to_string(reading.fitzpatrick));
    }

    const auto& swatches = monk_swatch_srgb();
    for (int m = 1; m <= 10; ++m) {
        const auto img =
            SyntheticBackend::render_face(swatches[m - 1], cfg.background, params.width, params.height);
        const auto reading = audit_image(img, std::nullopt);
        expect(reading.status == SkinToneReading::Status::ok,
               "MST-" + std::to_string(m) + " swatch produced no usable reading");
        expect(reading.monk == m, "MST-" + std::to_string(m) + " classified as MST-" +
                                      std::to_string(reading.monk));
    }
}

// ---------------------------------------------------------------- criterion 6

void criterion_end_to_end() {
    const auto dir = work_dir() / "c6";
    std::filesystem::remove_all(dir);

    ScenarioConfig cfg = ScenarioConfig::preset("high-status");
    cfg.fidelity = 0.9;
    cfg.images_per_condition = 600;
    cfg.target = TargetSetting::Uniform();

    const auto outcome = run_scenario(cfg, dir);

    for (std::size_t i = 0; i < outcome.type_deltas.size(); ++i)
        expect(outcome.type_deltas[i] <= outcome.type_tolerances[i],
               "type " + outcome.q.scheme().categories[i] + " observed " +
                   std::to_string(outcome.p_treated[i]) + " outside 4-sigma of " +
                   std::to_string(outcome.expected_treated[i]));
    expect(outcome.treated_error3 < outcome.baseline_error3,
           "treated 3-bin error not strictly below baseline");
    expect(outcome.improvement >= 70.0,
           "improvement " + std::to_string(outcome.improvement) + "% below 70%");
}

// ---------------------------------------------------------------- criterion 7

void criterion_graded_control() {
    const auto dir = work_dir() / "c7";
    std::filesystem::remove_all(dir);
    const auto uniform3 = Distribution::uniform(AttributeScheme::bins3());

    double prev = -1.0;
    for (const double alpha : {0.25, 0.5, 0.75}) {
        ScenarioConfig cfg = ScenarioConfig::preset("high-status");
        cfg.fidelity = 0.9;
        cfg.images_per_condition = 600;
        cfg.target = TargetSetting::Intermediate(alpha);
        const auto outcome = run_scenario(cfg, dir / ("alpha_" + std::to_string(alpha)));
        const double err = alignment_error(aggregate_to_bins(outcome.p_treated), uniform3);
        expect(err >= prev, "alpha sweep error decreased at alpha=" + std::to_string(alpha));
        prev = err;
    }

    ScenarioConfig extreme = ScenarioConfig::preset("high-status");
    extreme.fidelity = 0.9;
    extreme.images_per_condition = 600;
    extreme.target = TargetSetting::Extreme("VI", 1.0);
    const auto outcome = run_scenario(extreme, dir / "extreme");
    expect(outcome.p_treated[5] >= 0.86, "extreme alpha=1 focal mass " +
                                             std::to_string(outcome.p_treated[5]) + " below 86%");
}

// ---------------------------------------------------------------- criterion 8

void criterion_contracts() {
    // Confidence-0.0 routing.
    StubLlmProvider provider(
        {{"a happy person",
          R"({"concept":"a happy person","scope":"global","groups":[],"confidence":0.0,"sources":[]})"},
         {"doctor",
          R"({"concept":"doctor","scope":"us","groups":[{"label":"A","proportion":0.6},
              {"label":"B","proportion":0.4}],"confidence":0.4,"sources":["census"]})"}});

    DemographicQuery happy{"a happy person", Scope::global, "", "a happy person"};
    const auto no_data = retrieve_demographics(happy, provider, {});
    const auto d1 = route(no_data, 0.5, false);
    expect(d1.outcome == RoutingDecision::Outcome::use_fallback &&
               d1.reason == RoutingDecision::FallbackReason::no_data,
           "confidence 0.0 did not route to fallback(no_data)");

    // Threshold routing.
    DemographicQuery doctor{"doctor", Scope::us, "", "a doctor"};
    const auto low_conf = retrieve_demographics(doctor, provider, {});
    const auto d2 = route(low_conf, 0.5, false);
    expect(d2.outcome == RoutingDecision::Outcome::use_fallback &&
               d2.reason == RoutingDecision::FallbackReason::low_confidence,
           "confidence below threshold did not route to fallback(low_confidence)");
    const auto d3 = route(low_conf, 0.3, false);
    expect(d3.outcome == RoutingDecision::Outcome::use_demographics, "threshold routing broken");
    const auto d4 = route(low_conf, 0.3, true);
    expect(d4.reason == RoutingDecision::FallbackReason::user_forced, "user-forced routing broken");

    // Schema violation rejection, reported distinctly.
    bool schema_rejected = false;
    try {
        parse_provider_response(
            R"({"groups":[{"label":"A","proportion":0.5},{"label":"B","proportion":0.3}],
                "confidence":0.9,"sources":[]})",
            doctor);
    } catch (const Error& e) {
        schema_rejected = e.code() == Errc::schema_violation;
    }
    expect(schema_rejected, "proportions summing to 0.8 were not rejected as a schema violation");

    bool contract_rejected = false;
    try {
        parse_provider_response(R"({"groups":[{"label":"A","proportion":1.0}],"confidence":0.0,"sources":[]})",
                                doctor);
    } catch (const Error& e) {
        contract_rejected = e.code() == Errc::contract_violation;
    }
    expect(contract_rejected, "confidence-0.0-with-data was not rejected as a contract violation");

    // Discard accounting through a crafted run.
    const auto dir = work_dir() / "c8";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);

    SyntheticBackend backend(SyntheticBackendConfig::defaults());
    BackendParams params;
    params.width = 48;
    params.height = 48;
    params.steps = 1;
    write_png(dir / "ok.png", backend.generate("a doctor with medium skin", 1, params));
    write_png(dir / "dark.png", ImageRgb8(48, 48, 0, 0, 0)); // fully masked: degenerate
    {
        std::ofstream bad(dir / "broken.png", std::ios::binary);
        bad << "not a png";
    }
    Json records = Json::array();
    for (const char* name : {"ok.png", "dark.png", "broken.png"})
        records.push_back(Json{{"image", name}, {"category", "III"}, {"prompt", "p"}, {"seed", 1},
                               {"backend", "synthetic"}, {"status", "ok"}, {"timestamp", ""}});
    records.push_back(Json{{"image", "never.png"}, {"category", "III"}, {"prompt", "p"}, {"seed", 2},
                           {"backend", "synthetic"}, {"status", "failed"}, {"timestamp", ""},
                           {"error", "transport: induced"}});
    save_json_file(dir / "manifest.json", Json{{"records", records}, {"created_at", ""}});

    const auto batch = audit_run(dir / "manifest.json");
    expect(batch.n_ok == 1, "ok count wrong");
    expect(batch.discards.degenerate == 1, "degenerate discard not counted");
    expect(batch.discards.undecodable == 1, "undecodable discard not counted");
    expect(batch.discards.failed_generation == 1, "failed generation not counted");

    // Audit-log JSON schema validation on the persisted artifact.
    const auto audit_json = load_json_file(dir / "audit.json");
    validate_audit_json(audit_json);
    Json broken = audit_json;
    broken["n_ok"] = 99;
    bool audit_rejected = false;
    try {
        validate_audit_json(broken);
    } catch (const Error& e) {
        audit_rejected = e.code() == Errc::schema_violation;
    }
    expect(audit_rejected, "tampered audit log passed schema validation");
}

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "metric fidelity (alignment error oracle, improvement rows)", 1.0, criterion_metric_fidelity},
        {2, "target algebra properties (1000 random cases)", 5.0, criterion_target_algebra},
        {3, "allocator exhaustiveness/near-quota/determinism (10000 cases)", 5.0, criterion_allocator},
        {4, "colorimetry (sRGB->Lab, ITA, threshold table)", 1.0, criterion_colorimetry},
        {5, "palette and Monk swatch render->crop->audit round-trip", 10.0, criterion_palette_roundtrip},
        {6, "end-to-end synthetic reproduction (high-status, uniform, N=600)", 60.0, criterion_end_to_end},
        {7, "graded control (alpha sweep, extreme focal mass)", 60.0, criterion_graded_control},
        {8, "contracts (routing, schema, discards, audit-log schema)", 30.0, criterion_contracts},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string message;
        bool ok = true;
        try {
            c.body();
        } catch (const std::exception& e) {
            ok = false;
            message = e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (ok && seconds > c.time_limit_seconds) {
            ok = false;
            message = "exceeded the " + std::to_string(c.time_limit_seconds) + "s time limit";
        }
        std::printf("[%s] criterion %d: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", c.number, c.name.c_str(),
                    seconds, message.empty() ? "" : " -- ", message.c_str());
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
