#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <thread>

#include <httplib.h>

#include "fairgen/audit.hpp"
#include "fairgen/backends.hpp"
#include "fairgen/generate.hpp"
#include "fairgen/png_io.hpp"
#include "fairgen/prompt.hpp"

using namespace fairgen;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("fairgen_gen_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

BackendParams small_params() {
    BackendParams p;
    p.width = 48;
    p.height = 48;
    p.steps = 1;
    return p;
}

} // namespace

TEST_CASE("synthetic backend: descriptor forcing at fidelity 1") {
    SyntheticBackendConfig cfg = SyntheticBackendConfig::defaults();
    cfg.descriptor_fidelity = 1.0;
    SyntheticBackend backend(cfg);

    for (int seed = 0; seed < 50; ++seed)
        CHECK(backend.sample_type("A full-color headshot of a doctor with dark skin", seed) == 6);

    // The rendered image's dominant color is the Type VI palette entry.
    const auto img = backend.generate("a doctor with dark skin", 1, small_params());
    const auto reading = audit_image(img, std::nullopt);
    REQUIRE(reading.status == SkinToneReading::Status::ok);
    CHECK(reading.fitzpatrick == 6);
}

TEST_CASE("synthetic backend: descriptor parsing") {
    CHECK(SyntheticBackend::descriptor_type("x with very light skin") == 1);
    CHECK(SyntheticBackend::descriptor_type("x with light skin") == 2);
    CHECK(SyntheticBackend::descriptor_type("x with medium skin") == 3);
    CHECK(SyntheticBackend::descriptor_type("x with olive skin") == 4);
    CHECK(SyntheticBackend::descriptor_type("x with brown skin") == 5);
    CHECK(SyntheticBackend::descriptor_type("x with dark skin") == 6);
    CHECK(!SyntheticBackend::descriptor_type("a plain prompt").has_value());
}

TEST_CASE("synthetic backend: determinism") {
    SyntheticBackend backend(SyntheticBackendConfig::defaults());
    const auto a = encode_png(backend.generate("a doctor", 1234, small_params()));
    const auto b = encode_png(backend.generate("a doctor", 1234, small_params()));
    CHECK(a == b); // byte-identical

    const auto c = encode_png(backend.generate("a doctor", 1235, small_params()));
    CHECK(a.size() > 0);
    // Different seeds may draw different types; at minimum the call works.
    (void)c;
}

TEST_CASE("synthetic backend: fidelity mixture frequencies" * doctest::timeout(30)) {
    SyntheticBackendConfig cfg = SyntheticBackendConfig::defaults();
    cfg.default_baseline = Distribution(AttributeScheme::fitzpatrick6(), {0.13, 0.69, 0.10, 0.06, 0.013, 0.007});
    cfg.descriptor_fidelity = 0.7;
    SyntheticBackend backend(cfg);

    const int n = 4000;
    std::array<int, 6> counts{};
    for (int i = 0; i < n; ++i)
        ++counts[backend.sample_type("a doctor with dark skin", 50000 + i) - 1];

    // Expected: f at the descriptor type plus (1-f)*baseline everywhere.
    for (int t = 0; t < 6; ++t) {
        const double expected = (t == 5 ? 0.7 : 0.0) + 0.3 * cfg.default_baseline[t];
        const double tol = 4.0 * std::sqrt(std::max(expected * (1 - expected), 1e-6) / n);
        CHECK(std::abs(counts[t] / static_cast<double>(n) - expected) <= tol);
    }
}

TEST_CASE("synthetic backend: keyword baselines and config validation") {
    SyntheticBackendConfig cfg = SyntheticBackendConfig::defaults();
    cfg.keyword_baselines.emplace_back(
        "janitor", Distribution(AttributeScheme::fitzpatrick6(), {0.0, 0.0, 0.0, 0.0, 0.0, 1.0}));
    cfg.descriptor_fidelity = 0.0; // descriptors ignored; baseline rules
    SyntheticBackend backend(cfg);
    for (int seed = 0; seed < 20; ++seed)
        CHECK(backend.sample_type("a janitor with very light skin", seed) == 6);

    // Palette colors that classify to the wrong type are rejected at load.
    SyntheticBackendConfig bad = SyntheticBackendConfig::defaults();
    bad.palette[0] = {92, 58, 40}; // a Type VI color in the Type I slot
    CHECK_THROWS_AS(bad.validate(), Error);

    SyntheticBackendConfig bad_bg = SyntheticBackendConfig::defaults();
    bad_bg.background = {200, 180, 170}; // skin-like background would pollute readings
    CHECK_THROWS_AS(bad_bg.validate(), Error);

    // Config JSON round trip.
    const auto round = SyntheticBackendConfig::from_json(cfg.to_json());
    CHECK(round.descriptor_fidelity == cfg.descriptor_fidelity);
    CHECK(round.keyword_baselines.size() == 1);
}

TEST_CASE("execute: bookkeeping matches the plan") {
    const auto dir = temp_dir("exec");
    const auto q = Distribution::uniform(AttributeScheme::bins3());
    const auto p = plan("A full-color headshot of a doctor", TargetSetting::Uniform(), q, 6, 42);

    SyntheticBackend backend(SyntheticBackendConfig::defaults());
    ExecuteOptions opts;
    opts.out_dir = dir;
    opts.concurrency = 3;
    const auto records = execute(p, backend, small_params(), opts);

    REQUIRE(records.size() == 6);
    std::map<std::string, int> by_category;
    std::set<std::uint64_t> seeds;
    for (const auto& r : records) {
        CHECK(r.status == GenerationRecord::Status::ok);
        CHECK(std::filesystem::exists(dir / r.image));
        CHECK(std::filesystem::exists(dir / (r.image + ".json")));
        ++by_category[r.category];
        seeds.insert(r.seed);
    }
    CHECK(by_category.size() == 3);
    for (const auto& [cat, count] : by_category) CHECK(count == 2);
    CHECK(seeds.size() == 6); // permutation-free match to the plan

    // Records preserve plan order: item 0's seeds come first.
    CHECK(records[0].seed == p.items[0].seeds[0]);
    CHECK(records[1].seed == p.items[0].seeds[1]);
    CHECK(records[2].seed == p.items[1].seeds[0]);

    CHECK(std::filesystem::exists(dir / "manifest.json"));
    const auto manifest = load_json_file(dir / "manifest.json");
    CHECK(manifest.at("n_ok").get<int>() == 6);
    CHECK(manifest.at("n_failed").get<int>() == 0);

    std::filesystem::remove_all(dir);
}

namespace {

// Backend that fails on selected seeds.
class FlakyBackend final : public ImageBackend {
public:
    FlakyBackend(std::set<std::uint64_t> bad_seeds, bool transport)
        : bad_(std::move(bad_seeds)), transport_(transport) {}
    std::string id() const override { return "flaky"; }
    ImageRgb8 generate(const std::string& prompt, std::uint64_t seed, const BackendParams& params) override {
        if (bad_.count(seed)) {
            ++failures_;
            raise(transport_ ? Errc::transport : Errc::contract_violation, "induced failure");
        }
        return inner_.generate(prompt, seed, params);
    }
    int failures() const { return failures_; }

private:
    std::set<std::uint64_t> bad_;
    bool transport_;
    int failures_ = 0;
    SyntheticBackend inner_{SyntheticBackendConfig::defaults()};
};

} // namespace

TEST_CASE("execute: failures are recorded, never dropped") {
    const auto dir = temp_dir("fail");
    const auto q = Distribution::uniform(AttributeScheme::bins3());
    const auto p = plan("a doctor", TargetSetting::Uniform(), q, 6, 7);

    std::set<std::uint64_t> bad = {p.items[0].seeds[0], p.items[2].seeds[1]};
    FlakyBackend backend(bad, /*transport=*/false);
    ExecuteOptions opts;
    opts.out_dir = dir;
    const auto records = execute(p, backend, small_params(), opts);

    REQUIRE(records.size() == 6);
    int failed = 0;
    for (const auto& r : records)
        if (r.status == GenerationRecord::Status::failed) {
            ++failed;
            CHECK(!r.error.empty());
        }
    CHECK(failed == 2);

    const auto manifest = load_json_file(dir / "manifest.json");
    CHECK(manifest.at("n_failed").get<int>() == 2);
    CHECK(manifest.at("n_ok").get<int>() == 4);
    std::filesystem::remove_all(dir);
}

TEST_CASE("execute: transport errors retry once") {
    const auto dir = temp_dir("retry");
    const auto q = Distribution(AttributeScheme::bins3(), {1.0, 0.0, 0.0});
    const auto p = plan("a doctor", TargetSetting::Explicit(q), q, 2, 3);

    // Transport failures on every call: with one retry each image fails
    // after two attempts.
    FlakyBackend backend({p.items[0].seeds[0], p.items[0].seeds[1]}, /*transport=*/true);
    ExecuteOptions opts;
    opts.out_dir = dir;
    const auto records = execute(p, backend, small_params(), opts);
    CHECK(backend.failures() == 4); // 2 images x (1 try + 1 retry)
    for (const auto& r : records) CHECK(r.status == GenerationRecord::Status::failed);
    std::filesystem::remove_all(dir);
}

TEST_CASE("http backend against a loopback server") {
    SyntheticBackend inner(SyntheticBackendConfig::defaults());

    httplib::Server server;
    server.Post("/generate", [&](const httplib::Request& req, httplib::Response& res) {
        const auto j = Json::parse(req.body);
        const auto img = inner.generate(j.at("prompt").get<std::string>(), j.at("seed").get<std::uint64_t>(),
                                        small_params());
        const auto png = encode_png(img);
        res.set_content(std::string(png.begin(), png.end()), "image/png");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpBackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
    HttpImageBackend backend(cfg);
    const auto via_http = backend.generate("a doctor with dark skin", 5, small_params());
    const auto direct = inner.generate("a doctor with dark skin", 5, small_params());
    CHECK(via_http.pixels == direct.pixels);

    server.stop();
    server_thread.join();

    // Unreachable endpoint: transport error, recorded as a failed record by
    // execute() while the run continues.
    HttpBackendConfig dead;
    dead.base_url = "http://127.0.0.1:1";
    dead.timeout_seconds = 1;
    HttpImageBackend dead_backend(dead);
    CHECK_THROWS_AS(dead_backend.generate("x", 1, small_params()), Error);
}

TEST_CASE("png round trip") {
    ImageRgb8 img(21, 13);
    std::mt19937_64 rng(5);
    for (auto& b : img.pixels) b = static_cast<std::uint8_t>(rng());
    const auto decoded = decode_png(encode_png(img));
    CHECK(decoded.width == img.width);
    CHECK(decoded.height == img.height);
    CHECK(decoded.pixels == img.pixels);
}
