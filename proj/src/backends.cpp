#include "fairgen/backends.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <httplib.h>

#include "fairgen/audit.hpp"
#include "fairgen/png_io.hpp"

namespace fairgen {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

double unit_double(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::string lowercased(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

} // namespace

SyntheticBackendConfig SyntheticBackendConfig::defaults() {
    SyntheticBackendConfig c{Distribution::uniform(AttributeScheme::fitzpatrick6()), {}, 1.0, {}, {252, 252, 252}};
    // One color per phototype, each sitting well inside its ITA band:
    // 76.3, 48.0, 34.5, 19.0, -8.2, -51.8 degrees.
    c.palette = {{{247, 228, 212},
                  {234, 178, 146},
                  {207, 160, 119},
                  {168, 121, 107},
                  {145, 99, 64},
                  {92, 58, 40}}};
    return c;
}

Json SyntheticBackendConfig::to_json() const {
    Json keywords = Json::array();
    for (const auto& [keyword, dist] : keyword_baselines)
        keywords.push_back(Json{{"keyword", keyword}, {"baseline", fairgen::to_json(dist)}});
    Json palette_json = Json::array();
    for (const auto& c : palette)
        palette_json.push_back(Json::array({c[0], c[1], c[2]}));
    return Json{{"default_baseline", fairgen::to_json(default_baseline)},
                {"keyword_baselines", std::move(keywords)},
                {"descriptor_fidelity", descriptor_fidelity},
                {"palette", std::move(palette_json)},
                {"background", Json::array({background[0], background[1], background[2]})}};
}

SyntheticBackendConfig SyntheticBackendConfig::from_json(const Json& j) {
    SyntheticBackendConfig c = defaults();
    c.default_baseline = distribution_from_json(require(j, "default_baseline"));
    c.keyword_baselines.clear();
    if (j.contains("keyword_baselines"))
        for (const auto& row : j.at("keyword_baselines"))
            c.keyword_baselines.emplace_back(require_string(row, "keyword"),
                                             distribution_from_json(require(row, "baseline")));
    if (j.contains("descriptor_fidelity")) c.descriptor_fidelity = j.at("descriptor_fidelity").get<double>();
    if (j.contains("palette")) {
        const Json& palette = j.at("palette");
        if (!palette.is_array() || palette.size() != 6)
            raise(Errc::schema_violation, "palette must list 6 sRGB colors");
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t ch = 0; ch < 3; ++ch)
                c.palette[i][ch] = static_cast<std::uint8_t>(palette[i][ch].get<int>());
    }
    if (j.contains("background"))
        for (std::size_t ch = 0; ch < 3; ++ch)
            c.background[ch] = static_cast<std::uint8_t>(j.at("background")[ch].get<int>());
    c.validate();
    return c;
}

void SyntheticBackendConfig::validate() const {
    if (descriptor_fidelity < 0.0 || descriptor_fidelity > 1.0)
        raise(Errc::invalid_argument, "descriptor_fidelity outside [0,1]");
    auto check6 = [](const Distribution& d, const char* what) {
        if (d.scheme().kind != SchemeKind::skin_tone_fitzpatrick || d.size() != 6)
            raise(Errc::scheme_mismatch, std::string(what) + " must be over the 6-type Fitzpatrick scheme");
    };
    check6(default_baseline, "default baseline");
    for (const auto& [keyword, dist] : keyword_baselines) {
        if (keyword.empty()) raise(Errc::invalid_argument, "empty baseline keyword");
        check6(dist, "keyword baseline");
    }
    // Palette colors must survive the skin mask and classify to their own
    // phototype; the background must be masked out.
    const kernels::MaskBounds mask;
    for (int t = 1; t <= 6; ++t) {
        const auto& c = palette[t - 1];
        const auto lab = kernels::srgb_to_lab(c[0], c[1], c[2]);
        const double chroma = std::sqrt(lab.a * lab.a + lab.b * lab.b);
        if (lab.l < mask.l_min || lab.l > mask.l_max || chroma > mask.chroma_max)
            raise(Errc::invalid_argument, "palette color for type " + std::to_string(t) +
                                              " would be rejected by the skin mask");
        const int got = ita_to_fitzpatrick(ita_degrees(lab));
        if (got != t)
            raise(Errc::invalid_argument, "palette color for type " + std::to_string(t) +
                                              " classifies as type " + std::to_string(got));
    }
    const auto bg = kernels::srgb_to_lab(background[0], background[1], background[2]);
    const double bg_chroma = std::sqrt(bg.a * bg.a + bg.b * bg.b);
    if (bg.l >= mask.l_min && bg.l <= mask.l_max && bg_chroma <= mask.chroma_max)
        raise(Errc::invalid_argument, "background color would pass the skin mask and pollute readings");
}

SyntheticBackend::SyntheticBackend(SyntheticBackendConfig config) : config_(std::move(config)) {
    config_.validate();
}

std::optional<int> SyntheticBackend::descriptor_type(const std::string& prompt) {
    const std::string low = lowercased(prompt);
    // "very light" must win over its substring "light".
    static const std::pair<const char*, int> kDescriptors[] = {
        {"with very light skin", 1}, {"with light skin", 2}, {"with medium skin", 3},
        {"with olive skin", 4},      {"with brown skin", 5}, {"with dark skin", 6},
    };
    for (const auto& [phrase, type] : kDescriptors)
        if (low.find(phrase) != std::string::npos) return type;
    return std::nullopt;
}

int SyntheticBackend::sample_type(const std::string& prompt, std::uint64_t seed) const {
    std::uint64_t state = mix64(fnv1a64(prompt) ^ mix64(seed));
    const double u_fidelity = unit_double(state = mix64(state));
    const auto forced = descriptor_type(prompt);
    if (forced && u_fidelity < config_.descriptor_fidelity) return *forced;

    const Distribution* baseline = &config_.default_baseline;
    const std::string low = lowercased(prompt);
    for (const auto& [keyword, dist] : config_.keyword_baselines) {
        if (low.find(lowercased(keyword)) != std::string::npos) {
            baseline = &dist;
            break;
        }
    }
    const double u = unit_double(mix64(state));
    double cdf = 0.0;
    for (std::size_t i = 0; i < baseline->size(); ++i) {
        cdf += (*baseline)[i];
        if (u < cdf) return static_cast<int>(i) + 1;
    }
    return 6;
}

ImageRgb8 SyntheticBackend::render_face(const std::array<std::uint8_t, 3>& color,
                                        const std::array<std::uint8_t, 3>& background, int width,
                                        int height) {
    ImageRgb8 img(width, height, background[0], background[1], background[2]);
    // Oval large enough that the 60% x 70% center crop stays inside it.
    const double cx = width / 2.0, cy = height / 2.0;
    const double ax = 0.46 * width, ay = 0.52 * height;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double dx = (x + 0.5 - cx) / ax;
            const double dy = (y + 0.5 - cy) / ay;
            if (dx * dx + dy * dy <= 1.0) img.set(x, y, color[0], color[1], color[2]);
        }
    }
    return img;
}

ImageRgb8 SyntheticBackend::generate(const std::string& prompt, std::uint64_t seed,
                                     const BackendParams& params) {
    params.validate();
    const int type = sample_type(prompt, seed);
    return render_face(config_.palette[type - 1], config_.background, params.width, params.height);
}

HttpBackendConfig HttpBackendConfig::from_json_file(const std::filesystem::path& path) {
    const Json j = load_json_file(path);
    HttpBackendConfig c;
    c.base_url = require_string(j, "base_url");
    if (j.contains("path")) c.path = j.at("path").get<std::string>();
    if (j.contains("api_key_env")) c.api_key_env = j.at("api_key_env").get<std::string>();
    if (j.contains("timeout_seconds")) c.timeout_seconds = j.at("timeout_seconds").get<int>();
    return c;
}

HttpImageBackend::HttpImageBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) raise(Errc::config, "backend base_url is empty");
}

std::string HttpImageBackend::id() const { return "http:" + config_.base_url; }

namespace {

std::vector<std::uint8_t> base64_decode(const std::string& in) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    int buffer = 0, bits = 0;
    for (char c : in) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        const int v = value_of(c);
        if (v < 0) raise(Errc::schema_violation, "invalid base64 in backend response");
        buffer = (buffer << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((buffer >> bits) & 0xFF));
        }
    }
    return out;
}

} // namespace

ImageRgb8 HttpImageBackend::generate(const std::string& prompt, std::uint64_t seed,
                                     const BackendParams& params) {
    params.validate();
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (!key || !*key)
            raise(Errc::config, "API key environment variable " + config_.api_key_env + " is not set");
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    Json body{{"prompt", prompt},
              {"seed", seed},
              {"width", params.width},
              {"height", params.height},
              {"steps", params.steps},
              {"guidance", params.guidance}};
    for (const auto& [k, v] : params.extra) body[k] = v;

    auto res = client.Post(config_.path, headers, body.dump(), "application/json");
    if (!res)
        raise(Errc::transport,
              "backend unreachable: " + config_.base_url + " (" + httplib::to_string(res.error()) + ")");
    if (res->status == 400 || res->status == 403)
        raise(Errc::contract_violation, "backend rejected the request (HTTP " + std::to_string(res->status) +
                                            "): " + res->body);
    if (res->status != 200)
        raise(Errc::transport, "backend returned HTTP " + std::to_string(res->status));

    const auto content_type = res->get_header_value("Content-Type");
    if (content_type.rfind("image/png", 0) == 0) {
        return decode_png(std::span<const std::uint8_t>(
            reinterpret_cast<const std::uint8_t*>(res->body.data()), res->body.size()));
    }
    const Json j = Json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("image"))
        raise(Errc::schema_violation, "backend response is neither PNG nor {\"image\": base64}");
    const auto png = base64_decode(j.at("image").get<std::string>());
    return decode_png(png);
}

} // namespace fairgen
