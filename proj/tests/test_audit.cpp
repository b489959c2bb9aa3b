#include <doctest.h>

#include <cmath>
#include <random>

#include "fairgen/audit.hpp"
#include "fairgen/backends.hpp"
#include "fairgen/target.hpp"

using namespace fairgen;

TEST_CASE("ita hand cases") {
    CHECK(ita_degrees({70.0, 0.0, 15.0}) == doctest::Approx(53.13010).epsilon(1e-7));
    CHECK(ita_degrees({50.0, 0.0, 10.0}) == doctest::Approx(0.0));
    CHECK(ita_degrees({80.0, 0.0, 12.0}) == doctest::Approx(68.19859).epsilon(1e-7));

    // b = 0 sign convention; undefined at the origin.
    CHECK(ita_degrees({70.0, 0.0, 0.0}) == doctest::Approx(90.0));
    CHECK(ita_degrees({30.0, 0.0, 0.0}) == doctest::Approx(-90.0));
    CHECK_THROWS_AS(ita_degrees({50.0, 0.0, 0.0}), Error);
}

TEST_CASE("ita monotone in L for fixed b > 0") {
    double prev = ita_degrees({10.0, 0.0, 20.0});
    for (double l = 11.0; l <= 95.0; l += 1.0) {
        const double cur = ita_degrees({l, 0.0, 20.0});
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("ita threshold table") {
    CHECK(ita_to_fitzpatrick(60.0) == 1);
    CHECK(ita_to_fitzpatrick(0.0) == 5);
    CHECK(ita_to_fitzpatrick(-40.0) == 6);

    // Band edges, exact and +-0.001 degrees.
    struct Edge {
        double angle;
        int at_or_below, above;
    };
    for (const auto& e : {Edge{55.0, 2, 1}, Edge{41.0, 3, 2}, Edge{28.0, 4, 3}, Edge{10.0, 5, 4},
                          Edge{-30.0, 6, 5}}) {
        CHECK(ita_to_fitzpatrick(e.angle) == e.at_or_below);
        CHECK(ita_to_fitzpatrick(e.angle - 0.001) == e.at_or_below);
        CHECK(ita_to_fitzpatrick(e.angle + 0.001) == e.above);
    }

    // The map is monotone non-increasing along increasing ITA.
    int prev = ita_to_fitzpatrick(-90.0);
    for (double a = -89.5; a <= 90.0; a += 0.5) {
        const int cur = ita_to_fitzpatrick(a);
        CHECK(cur <= prev);
        prev = cur;
    }
}

TEST_CASE("monk swatch classification") {
    const auto& swatches = monk_swatch_srgb();
    for (std::size_t i = 0; i < swatches.size(); ++i) {
        const auto lab = kernels::srgb_to_lab(swatches[i][0], swatches[i][1], swatches[i][2]);
        CHECK(lab_to_monk(lab) == static_cast<int>(i) + 1);
    }

    // Exact midpoint of MST-4 and MST-5 ties to the lighter tone.
    const auto& labs = monk_swatch_lab();
    const kernels::Lab mid{(labs[3].l + labs[4].l) / 2, (labs[3].a + labs[4].a) / 2,
                           (labs[3].b + labs[4].b) / 2};
    CHECK(lab_to_monk(mid) == 4);
}

TEST_CASE("face region sources") {
    const ImageRgb8 img(100, 200);
    CenterCropDetector center;
    const auto r = center.detect(img);
    REQUIRE(r.has_value());
    CHECK(r->w == 60);
    CHECK(r->h == 140);
    CHECK(r->x == 20);
    CHECK(r->y == 30);

    // Sidecar bbox is echoed verbatim.
    FaceRegion sidecar{10, 20, 30, 40, FaceRegion::Origin::sidecar_bbox};
    const auto reading = audit_image(img, sidecar);
    REQUIRE(reading.region.has_value());
    CHECK(reading.region->x == 10);
    CHECK(reading.region->w == 30);
    CHECK(reading.region->origin == FaceRegion::Origin::sidecar_bbox);

    // A detector reporting no face excludes the image.
    struct NoFaceDetector final : FaceDetector {
        std::string id() const override { return "none"; }
        std::optional<FaceRegion> detect(const ImageRgb8&) override { return std::nullopt; }
    } none;
    const auto missed = audit_image(img, std::nullopt, &none);
    CHECK(missed.status == SkinToneReading::Status::no_face);

    CHECK_THROWS_AS(classify_region(img, FaceRegion{90, 0, 20, 20}), Error);
}

TEST_CASE("classify_region on a rendered synthetic face") {
    const auto cfg = SyntheticBackendConfig::defaults();
    for (int t = 1; t <= 6; ++t) {
        const auto img = SyntheticBackend::render_face(cfg.palette[t - 1], cfg.background, 96, 96);
        const auto region = CenterCropDetector{}.detect(img);
        REQUIRE(region.has_value());
        const auto reading = classify_region(img, *region);
        REQUIRE(reading.status == SkinToneReading::Status::ok);
        CHECK(reading.fitzpatrick == t);
        CHECK(reading.pixel_count >= kMinSkinPixels);

        // Every crop pixel is the palette color, so the mean is exact.
        const auto expect = kernels::srgb_to_lab(cfg.palette[t - 1][0], cfg.palette[t - 1][1],
                                                 cfg.palette[t - 1][2]);
        CHECK(reading.mean_lab.l == doctest::Approx(expect.l).epsilon(1e-12));
    }
}

TEST_CASE("degenerate regions") {
    // All-black frame: everything masked out.
    const ImageRgb8 black(64, 64, 0, 0, 0);
    const auto reading = classify_region(black, FaceRegion{0, 0, 64, 64});
    CHECK(reading.status == SkinToneReading::Status::degenerate);
    CHECK(reading.pixel_count == 0);
}

TEST_CASE("estimate_distribution") {
    auto ok = [](int fitz) {
        SkinToneReading r;
        r.status = SkinToneReading::Status::ok;
        r.fitzpatrick = fitz;
        r.monk = 1;
        return r;
    };
    std::vector<SkinToneReading> readings = {ok(1), ok(1), ok(2), ok(6)};
    const auto p = estimate_distribution(readings, AttributeScheme::fitzpatrick6());
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.25));
    CHECK(p[2] == doctest::Approx(0.0));
    CHECK(p[5] == doctest::Approx(0.25));

    // Discarded readings are excluded, not counted.
    SkinToneReading bad;
    bad.status = SkinToneReading::Status::no_face;
    readings.push_back(bad);
    const auto p2 = estimate_distribution(readings, AttributeScheme::fitzpatrick6());
    CHECK(p2[0] == doctest::Approx(0.5));

    std::vector<SkinToneReading> none = {bad};
    CHECK_THROWS_AS(estimate_distribution(none, AttributeScheme::fitzpatrick6()), Error);

    // 3-bin estimate commutes with aggregation of the 6-type estimate.
    const auto p3 = estimate_distribution(readings, AttributeScheme::bins3());
    const auto agg = aggregate_to_bins(p2);
    for (std::size_t i = 0; i < 3; ++i) CHECK(p3[i] == doctest::Approx(agg[i]).epsilon(1e-12));
}

TEST_CASE("estimate converges to the sampling distribution" * doctest::timeout(30)) {
    // 600 synthetic draws from a uniform conditional: every type frequency
    // within the 4-sigma multinomial bound of 1/6.
    SyntheticBackendConfig cfg = SyntheticBackendConfig::defaults();
    cfg.default_baseline = Distribution::uniform(AttributeScheme::fitzpatrick6());
    SyntheticBackend backend(cfg);
    BackendParams params;
    params.width = 48;
    params.height = 48;

    std::vector<SkinToneReading> readings;
    for (int i = 0; i < 600; ++i) {
        const auto img = backend.generate("A full-color headshot of a person", 1000 + i, params);
        readings.push_back(audit_image(img, std::nullopt));
    }
    const auto p = estimate_distribution(readings, AttributeScheme::fitzpatrick6());
    const double tol = 4.0 * std::sqrt((1.0 / 6.0) * (5.0 / 6.0) / 600.0);
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(p[i] - 1.0 / 6.0) <= tol);
}

TEST_CASE("classification is deterministic per image") {
    const auto cfg = SyntheticBackendConfig::defaults();
    const auto img = SyntheticBackend::render_face(cfg.palette[2], cfg.background, 80, 80);
    const auto a = audit_image(img, std::nullopt);
    const auto b = audit_image(img, std::nullopt);
    CHECK(a.mean_lab.l == b.mean_lab.l);
    CHECK(a.ita_degrees == b.ita_degrees);
    CHECK(a.fitzpatrick == b.fitzpatrick);
    CHECK(a.monk == b.monk);
}
