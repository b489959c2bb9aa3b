#pragma once

#include <array>
#include <optional>

#include "fairgen/distribution.hpp"
#include "fairgen/generate.hpp"

namespace fairgen {

// Deterministic stand-in for a biased text-to-image model: per-prompt-keyword
// baseline skin-tone conditionals, plus a fidelity parameter giving the
// probability that an explicit skin-tone descriptor in the prompt overrides
// the baseline draw. Renders a flat oval face in the sampled palette color.
struct SyntheticBackendConfig {
    Distribution default_baseline;                                  // over Fitzpatrick I-VI
    std::vector<std::pair<std::string, Distribution>> keyword_baselines; // substring match on the prompt
    double descriptor_fidelity = 1.0;                               // in [0,1]
    std::array<std::array<std::uint8_t, 3>, 6> palette;             // sRGB per phototype
    std::array<std::uint8_t, 3> background = {252, 252, 252};       // masked out by the audit (L > 95)

    static SyntheticBackendConfig defaults();
    static SyntheticBackendConfig from_json(const Json& j);
    Json to_json() const;

    // Raises unless every palette color classifies to its own phototype
    // under the audit path and every conditional is a valid distribution.
    void validate() const;
};

class SyntheticBackend : public ImageBackend {
public:
    explicit SyntheticBackend(SyntheticBackendConfig config);

    std::string id() const override { return "synthetic"; }
    ImageRgb8 generate(const std::string& prompt, std::uint64_t seed, const BackendParams& params) override;

    // The phototype the draw resolves to for (prompt, seed); exposed so the
    // mixture behavior is testable without touching pixels.
    int sample_type(const std::string& prompt, std::uint64_t seed) const;

    const SyntheticBackendConfig& config() const { return config_; }

    // Index of the phototype named by a skin-tone descriptor in the prompt.
    static std::optional<int> descriptor_type(const std::string& prompt);

    // Flat oval face of the given palette color over the background.
    static ImageRgb8 render_face(const std::array<std::uint8_t, 3>& color,
                                 const std::array<std::uint8_t, 3>& background, int width, int height);

private:
    SyntheticBackendConfig config_;
};

struct HttpBackendConfig {
    std::string base_url;
    std::string path = "/generate";
    std::string api_key_env; // optional bearer token
    int timeout_seconds = 120;

    static HttpBackendConfig from_json_file(const std::filesystem::path& path);
};

// POSTs {prompt, seed, width, height, steps, guidance} as JSON; accepts
// image/png bytes or {"image": "<base64 png>"}.
class HttpImageBackend : public ImageBackend {
public:
    explicit HttpImageBackend(HttpBackendConfig config);

    std::string id() const override;
    ImageRgb8 generate(const std::string& prompt, std::uint64_t seed, const BackendParams& params) override;

private:
    HttpBackendConfig config_;
};

} // namespace fairgen
