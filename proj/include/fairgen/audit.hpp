#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairgen/distribution.hpp"
#include "fairgen/image.hpp"
#include "fairgen/json_io.hpp"
#include "fairgen/kernels/colorimetry.hpp"

namespace fairgen {

struct FaceRegion {
    enum class Origin { external_detector, sidecar_bbox, center_crop };
    int x = 0, y = 0, w = 0, h = 0;
    Origin origin = Origin::center_crop;
};

const char* face_origin_name(FaceRegion::Origin o);

// Pluggable face detector. The repo ships center-crop and sidecar-bbox
// sources; real detectors attach as external processes feeding bboxes in.
class FaceDetector {
public:
    virtual ~FaceDetector() = default;
    virtual std::string id() const = 0;
    // nullopt = no face found.
    virtual std::optional<FaceRegion> detect(const ImageRgb8& image) = 0;
};

// Fixed fraction of the frame, centered: 60% width x 70% height.
class CenterCropDetector : public FaceDetector {
public:
    std::string id() const override { return "center_crop"; }
    std::optional<FaceRegion> detect(const ImageRgb8& image) override;
};

inline constexpr std::uint64_t kMinSkinPixels = 64;

struct SkinToneReading {
    enum class Status { ok, no_face, degenerate, undecodable };
    Status status = Status::ok;
    kernels::Lab mean_lab;
    double ita_degrees = 0.0;
    int fitzpatrick = 0; // 1..6 when ok
    int monk = 0;        // 1..10 when ok
    std::uint64_t pixel_count = 0;
    std::optional<FaceRegion> region;
};

const char* reading_status_name(SkinToneReading::Status s);

// ITA = atan2(L-50, b) in degrees; b = 0 resolves to +-90 by the sign of
// L-50 and has no defined value at (L=50, b=0).
double ita_degrees(const kernels::Lab& mean_lab);

// Six-band ITA thresholds: >55 I, (41,55] II, (28,41] III, (10,28] IV,
// (-30,10] V, <=-30 VI.
int ita_to_fitzpatrick(double ita_deg);

// Nearest Monk reference swatch by Euclidean distance in Lab; exact ties go
// to the lighter tone.
int lab_to_monk(const kernels::Lab& mean_lab);

const std::array<std::array<std::uint8_t, 3>, 10>& monk_swatch_srgb();
const std::array<kernels::Lab, 10>& monk_swatch_lab();

// Mean Lab over masked pixels of the region, then ITA/Fitzpatrick/Monk.
// degenerate when fewer than kMinSkinPixels pixels survive the mask or the
// ITA is undefined.
SkinToneReading classify_region(const ImageRgb8& image, const FaceRegion& region,
                                const kernels::MaskBounds& mask = {});

// Region resolution order: external detector (if given) > sidecar bbox >
// center crop.
SkinToneReading audit_image(const ImageRgb8& image, const std::optional<FaceRegion>& sidecar_bbox,
                            FaceDetector* external_detector = nullptr,
                            const kernels::MaskBounds& mask = {});

struct DiscardTally {
    std::int64_t no_face = 0;
    std::int64_t degenerate = 0;
    std::int64_t undecodable = 0;
    std::int64_t failed_generation = 0;
    std::int64_t total() const { return no_face + degenerate + undecodable + failed_generation; }
};

// Frequencies over ok readings for a skin-tone scheme (fitzpatrick6, bins3
// or monk10). Errors when no ok readings remain.
Distribution estimate_distribution(std::span<const SkinToneReading> readings, const AttributeScheme& scheme);

struct AuditEntry {
    std::string image_path;
    std::string category; // subgroup the image was generated for, if any
    SkinToneReading reading;
};

struct AuditBatch {
    std::vector<AuditEntry> entries;
    DiscardTally discards;
    std::int64_t n_ok = 0;
    std::optional<Distribution> p_fitzpatrick; // present when n_ok > 0
    std::optional<Distribution> p_bins3;
    std::optional<Distribution> p_monk;
    std::optional<Distribution> declared_target; // copied from the run manifest
    std::optional<TargetSetting> target_setting;
};

struct AuditOptions {
    kernels::MaskBounds mask;
    FaceDetector* external_detector = nullptr;
    bool write_sidecar_readings = true; // "<image>.audit.json"
};

// Audits every ok record in a run manifest; writes "<image>.audit.json" per
// image and "audit.json" for the batch.
AuditBatch audit_run(const std::filesystem::path& manifest_path, const AuditOptions& options = {});

Json to_json(const SkinToneReading& r);
Json to_json(const AuditBatch& batch);
AuditBatch audit_batch_from_json(const Json& j);

// Schema check for persisted audit batches; raises Errc::schema_violation.
void validate_audit_json(const Json& j);

} // namespace fairgen
