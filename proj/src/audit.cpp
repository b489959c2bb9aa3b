#include "fairgen/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fairgen/png_io.hpp"

namespace fairgen {

const char* face_origin_name(FaceRegion::Origin o) {
    switch (o) {
    case FaceRegion::Origin::external_detector: return "external_detector";
    case FaceRegion::Origin::sidecar_bbox: return "sidecar_bbox";
    case FaceRegion::Origin::center_crop: return "center_crop";
    }
    return "center_crop";
}

const char* reading_status_name(SkinToneReading::Status s) {
    switch (s) {
    case SkinToneReading::Status::ok: return "ok";
    case SkinToneReading::Status::no_face: return "no_face";
    case SkinToneReading::Status::degenerate: return "degenerate";
    case SkinToneReading::Status::undecodable: return "undecodable";
    }
    return "degenerate";
}

std::optional<FaceRegion> CenterCropDetector::detect(const ImageRgb8& image) {
    FaceRegion r;
    r.w = std::max(1, static_cast<int>(std::lround(image.width * 0.6)));
    r.h = std::max(1, static_cast<int>(std::lround(image.height * 0.7)));
    r.x = (image.width - r.w) / 2;
    r.y = (image.height - r.h) / 2;
    r.origin = FaceRegion::Origin::center_crop;
    return r;
}

double ita_degrees(const kernels::Lab& m) {
    if (m.b == 0.0) {
        if (m.l > 50.0) return 90.0;
        if (m.l < 50.0) return -90.0;
        raise(Errc::invalid_argument, "ITA undefined at L=50, b=0");
    }
    return std::atan2(m.l - 50.0, m.b) * 180.0 / M_PI;
}

int ita_to_fitzpatrick(double ita_deg) {
    if (ita_deg > 55.0) return 1;
    if (ita_deg > 41.0) return 2;
    if (ita_deg > 28.0) return 3;
    if (ita_deg > 10.0) return 4;
    if (ita_deg > -30.0) return 5;
    return 6;
}

const std::array<std::array<std::uint8_t, 3>, 10>& monk_swatch_srgb() {
    // Published Monk Skin Tone orb colors, MST-1 (lightest) .. MST-10.
    static const std::array<std::array<std::uint8_t, 3>, 10> swatches = {{
        {0xf6, 0xed, 0xe4},
        {0xf3, 0xe7, 0xdb},
        {0xf7, 0xea, 0xd0},
        {0xea, 0xda, 0xba},
        {0xd7, 0xbd, 0x96},
        {0xa0, 0x7e, 0x56},
        {0x82, 0x5c, 0x43},
        {0x60, 0x41, 0x34},
        {0x3a, 0x31, 0x2a},
        {0x29, 0x24, 0x20},
    }};
    return swatches;
}

const std::array<kernels::Lab, 10>& monk_swatch_lab() {
    static const auto labs = [] {
        std::array<kernels::Lab, 10> out;
        const auto& srgb = monk_swatch_srgb();
        for (std::size_t i = 0; i < srgb.size(); ++i)
            out[i] = kernels::srgb_to_lab(srgb[i][0], srgb[i][1], srgb[i][2]);
        return out;
    }();
    return labs;
}

int lab_to_monk(const kernels::Lab& m) {
    const auto& refs = monk_swatch_lab();
    int best = 1;
    double best_d = std::numeric_limits<double>::infinity();
    // Ties (within rounding of the squared distance) keep the earlier,
    // lighter tone.
    constexpr double kTie = 1e-9;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const double dl = m.l - refs[i].l;
        const double da = m.a - refs[i].a;
        const double db = m.b - refs[i].b;
        const double d = dl * dl + da * da + db * db;
        if (d + kTie < best_d) {
            best_d = d;
            best = static_cast<int>(i) + 1;
        }
    }
    return best;
}

SkinToneReading classify_region(const ImageRgb8& image, const FaceRegion& region,
                                const kernels::MaskBounds& mask) {
    if (region.w <= 0 || region.h <= 0 || region.x < 0 || region.y < 0 ||
        region.x + region.w > image.width || region.y + region.h > image.height)
        raise(Errc::invalid_argument, "face region outside image bounds");

    // Copy the crop into a contiguous buffer and run the kernel once.
    std::vector<std::uint8_t> crop(static_cast<std::size_t>(region.w) * region.h * 3);
    for (int row = 0; row < region.h; ++row)
        std::copy_n(image.at(region.x, region.y + row), static_cast<std::size_t>(region.w) * 3,
                    crop.data() + static_cast<std::size_t>(row) * region.w * 3);

    const auto acc =
        kernels::accumulate_masked_lab(crop.data(), static_cast<std::size_t>(region.w) * region.h, mask);

    SkinToneReading reading;
    reading.region = region;
    reading.pixel_count = acc.kept;
    if (acc.kept < kMinSkinPixels) {
        reading.status = SkinToneReading::Status::degenerate;
        return reading;
    }
    const double n = static_cast<double>(acc.kept);
    reading.mean_lab = {acc.sum_l / n, acc.sum_a / n, acc.sum_b / n};
    if (reading.mean_lab.b == 0.0 && reading.mean_lab.l == 50.0) {
        reading.status = SkinToneReading::Status::degenerate;
        return reading;
    }
    reading.ita_degrees = ita_degrees(reading.mean_lab);
    reading.fitzpatrick = ita_to_fitzpatrick(reading.ita_degrees);
    reading.monk = lab_to_monk(reading.mean_lab);
    reading.status = SkinToneReading::Status::ok;
    return reading;
}

SkinToneReading audit_image(const ImageRgb8& image, const std::optional<FaceRegion>& sidecar_bbox,
                            FaceDetector* external_detector, const kernels::MaskBounds& mask) {
    std::optional<FaceRegion> region;
    if (external_detector) {
        region = external_detector->detect(image);
        if (!region) {
            SkinToneReading r;
            r.status = SkinToneReading::Status::no_face;
            return r;
        }
        region->origin = FaceRegion::Origin::external_detector;
    } else if (sidecar_bbox) {
        region = sidecar_bbox;
        region->origin = FaceRegion::Origin::sidecar_bbox;
    } else {
        region = CenterCropDetector{}.detect(image);
    }
    return classify_region(image, *region, mask);
}

namespace {

int fitz_to_bin(int fitz) { return (fitz - 1) / 2; } // 0=Light, 1=Medium, 2=Dark

} // namespace

Distribution estimate_distribution(std::span<const SkinToneReading> readings, const AttributeScheme& scheme) {
    std::vector<double> counts(scheme.size(), 0.0);
    std::int64_t ok = 0;
    for (const auto& r : readings) {
        if (r.status != SkinToneReading::Status::ok) continue;
        ++ok;
        switch (scheme.kind) {
        case SchemeKind::skin_tone_fitzpatrick: counts[r.fitzpatrick - 1] += 1.0; break;
        case SchemeKind::skin_tone_bins3: counts[fitz_to_bin(r.fitzpatrick)] += 1.0; break;
        case SchemeKind::skin_tone_monk: counts[r.monk - 1] += 1.0; break;
        default:
            raise(Errc::scheme_mismatch, "cannot estimate a skin-tone distribution over scheme '" + scheme.name + "'");
        }
    }
    if (ok == 0) raise(Errc::invalid_argument, "no ok readings to estimate a distribution from");
    for (double& c : counts) c /= static_cast<double>(ok);
    return Distribution(scheme, std::move(counts));
}

Json to_json(const FaceRegion& r) {
    return Json{{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}, {"origin", face_origin_name(r.origin)}};
}

static FaceRegion face_region_from_json(const Json& j) {
    FaceRegion r;
    r.x = static_cast<int>(require_number(j, "x"));
    r.y = static_cast<int>(require_number(j, "y"));
    r.w = static_cast<int>(require_number(j, "w"));
    r.h = static_cast<int>(require_number(j, "h"));
    const std::string origin = j.contains("origin") ? j.at("origin").get<std::string>() : "sidecar_bbox";
    if (origin == "external_detector") r.origin = FaceRegion::Origin::external_detector;
    else if (origin == "center_crop") r.origin = FaceRegion::Origin::center_crop;
    else r.origin = FaceRegion::Origin::sidecar_bbox;
    return r;
}

Json to_json(const SkinToneReading& r) {
    Json j{{"status", reading_status_name(r.status)}, {"pixel_count", r.pixel_count}};
    if (r.region) j["region"] = to_json(*r.region);
    if (r.status == SkinToneReading::Status::ok) {
        j["lab"] = Json{{"L", r.mean_lab.l}, {"a", r.mean_lab.a}, {"b", r.mean_lab.b}};
        j["ita_degrees"] = r.ita_degrees;
        j["fitzpatrick"] = r.fitzpatrick;
        j["monk"] = r.monk;
    }
    return j;
}

static SkinToneReading reading_from_json(const Json& j) {
    SkinToneReading r;
    const std::string status = require_string(j, "status");
    if (status == "ok") r.status = SkinToneReading::Status::ok;
    else if (status == "no_face") r.status = SkinToneReading::Status::no_face;
    else if (status == "degenerate") r.status = SkinToneReading::Status::degenerate;
    else if (status == "undecodable") r.status = SkinToneReading::Status::undecodable;
    else raise(Errc::schema_violation, "unknown reading status '" + status + "'");
    r.pixel_count = static_cast<std::uint64_t>(require_number(j, "pixel_count"));
    if (j.contains("region")) r.region = face_region_from_json(j.at("region"));
    if (r.status == SkinToneReading::Status::ok) {
        const Json& lab = require(j, "lab");
        r.mean_lab = {require_number(lab, "L"), require_number(lab, "a"), require_number(lab, "b")};
        r.ita_degrees = require_number(j, "ita_degrees");
        r.fitzpatrick = static_cast<int>(require_number(j, "fitzpatrick"));
        r.monk = static_cast<int>(require_number(j, "monk"));
        if (r.fitzpatrick < 1 || r.fitzpatrick > 6) raise(Errc::schema_violation, "fitzpatrick out of range");
        if (r.monk < 1 || r.monk > 10) raise(Errc::schema_violation, "monk out of range");
    }
    return r;
}

Json to_json(const AuditBatch& batch) {
    Json images = Json::array();
    for (const auto& e : batch.entries) {
        Json row{{"image", e.image_path}};
        if (!e.category.empty()) row["category"] = e.category;
        row["reading"] = to_json(e.reading);
        images.push_back(std::move(row));
    }
    Json j{{"n_ok", batch.n_ok},
           {"discards",
            Json{{"no_face", batch.discards.no_face},
                 {"degenerate", batch.discards.degenerate},
                 {"undecodable", batch.discards.undecodable},
                 {"failed_generation", batch.discards.failed_generation}}},
           {"images", std::move(images)}};
    if (batch.p_fitzpatrick) j["p_fitzpatrick"] = to_json(*batch.p_fitzpatrick);
    if (batch.p_bins3) j["p_bins3"] = to_json(*batch.p_bins3);
    if (batch.p_monk) j["p_monk"] = to_json(*batch.p_monk);
    if (batch.declared_target) j["declared_target"] = to_json(*batch.declared_target);
    if (batch.target_setting) j["target_setting"] = to_json(*batch.target_setting);
    return j;
}

AuditBatch audit_batch_from_json(const Json& j) {
    validate_audit_json(j);
    AuditBatch b;
    b.n_ok = static_cast<std::int64_t>(require_number(j, "n_ok"));
    const Json& d = require(j, "discards");
    b.discards.no_face = static_cast<std::int64_t>(require_number(d, "no_face"));
    b.discards.degenerate = static_cast<std::int64_t>(require_number(d, "degenerate"));
    b.discards.undecodable = static_cast<std::int64_t>(require_number(d, "undecodable"));
    b.discards.failed_generation = static_cast<std::int64_t>(require_number(d, "failed_generation"));
    for (const auto& row : require(j, "images")) {
        AuditEntry e;
        e.image_path = require_string(row, "image");
        if (row.contains("category")) e.category = row.at("category").get<std::string>();
        e.reading = reading_from_json(require(row, "reading"));
        b.entries.push_back(std::move(e));
    }
    if (j.contains("p_fitzpatrick")) b.p_fitzpatrick = distribution_from_json(j.at("p_fitzpatrick"));
    if (j.contains("p_bins3")) b.p_bins3 = distribution_from_json(j.at("p_bins3"));
    if (j.contains("p_monk")) b.p_monk = distribution_from_json(j.at("p_monk"));
    if (j.contains("declared_target")) b.declared_target = distribution_from_json(j.at("declared_target"));
    if (j.contains("target_setting")) b.target_setting = target_setting_from_json(j.at("target_setting"));
    return b;
}

void validate_audit_json(const Json& j) {
    if (!j.is_object()) raise(Errc::schema_violation, "audit batch must be a JSON object");
    require_number(j, "n_ok");
    const Json& d = require(j, "discards");
    for (const char* k : {"no_face", "degenerate", "undecodable", "failed_generation"}) {
        if (require_number(d, k) < 0) raise(Errc::schema_violation, "negative discard count");
    }
    const Json& images = require(j, "images");
    if (!images.is_array()) raise(Errc::schema_violation, "audit images must be an array");
    std::int64_t ok = 0;
    for (const auto& row : images) {
        require_string(row, "image");
        const Json& reading = require(row, "reading");
        const std::string status = require_string(reading, "status");
        if (status == "ok") {
            ++ok;
            require(reading, "lab");
            require_number(reading, "ita_degrees");
            require_number(reading, "fitzpatrick");
            require_number(reading, "monk");
        }
    }
    if (ok != static_cast<std::int64_t>(require_number(j, "n_ok")))
        raise(Errc::schema_violation, "n_ok does not match the number of ok readings");
}

AuditBatch audit_run(const std::filesystem::path& manifest_path, const AuditOptions& options) {
    if (!std::filesystem::exists(manifest_path))
        raise(Errc::missing_artifact, "no manifest at " + manifest_path.string() + "; run generate first");
    const Json manifest = load_json_file(manifest_path);
    const Json& records = require(manifest, "records");
    if (!records.is_array() || records.empty())
        raise(Errc::missing_artifact, "manifest has no records; run generate first");

    const auto run_dir = manifest_path.parent_path();
    AuditBatch batch;
    if (manifest.contains("target")) batch.declared_target = distribution_from_json(manifest.at("target"));
    if (manifest.contains("target_setting"))
        batch.target_setting = target_setting_from_json(manifest.at("target_setting"));

    std::vector<SkinToneReading> readings;
    for (const auto& rec : records) {
        const std::string status = require_string(rec, "status");
        if (status != "ok") {
            ++batch.discards.failed_generation;
            continue;
        }
        AuditEntry entry;
        entry.image_path = require_string(rec, "image");
        if (rec.contains("category")) entry.category = rec.at("category").get<std::string>();

        const auto image_path = run_dir / entry.image_path;
        std::optional<FaceRegion> sidecar_bbox;
        const auto sidecar_path = image_path.string() + ".json";
        if (std::filesystem::exists(sidecar_path)) {
            const Json sidecar = load_json_file(sidecar_path);
            if (sidecar.contains("bbox")) sidecar_bbox = face_region_from_json(sidecar.at("bbox"));
        }

        SkinToneReading reading;
        try {
            const ImageRgb8 image = read_png(image_path);
            reading = audit_image(image, sidecar_bbox, options.external_detector, options.mask);
        } catch (const Error& e) {
            if (e.code() != Errc::io) throw;
            reading.status = SkinToneReading::Status::undecodable;
        }
        switch (reading.status) {
        case SkinToneReading::Status::ok: ++batch.n_ok; break;
        case SkinToneReading::Status::no_face: ++batch.discards.no_face; break;
        case SkinToneReading::Status::degenerate: ++batch.discards.degenerate; break;
        case SkinToneReading::Status::undecodable: ++batch.discards.undecodable; break;
        }
        if (options.write_sidecar_readings)
            save_json_file(image_path.string() + ".audit.json", to_json(reading));
        entry.reading = reading;
        readings.push_back(reading);
        batch.entries.push_back(std::move(entry));
    }

    if (batch.n_ok > 0) {
        batch.p_fitzpatrick = estimate_distribution(readings, AttributeScheme::fitzpatrick6());
        batch.p_bins3 = estimate_distribution(readings, AttributeScheme::bins3());
        batch.p_monk = estimate_distribution(readings, AttributeScheme::monk10());
    }
    save_json_file(run_dir / "audit.json", to_json(batch));
    return batch;
}

} // namespace fairgen
