#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fairgen/image.hpp"
#include "fairgen/json_io.hpp"
#include "fairgen/prompt.hpp"

namespace fairgen {

struct BackendParams {
    int width = 768;
    int height = 512;
    int steps = 40;
    double guidance = 7.5;
    std::string precision = "float16";
    std::map<std::string, std::string> extra;

    void validate() const;
};

Json to_json(const BackendParams& p);
BackendParams backend_params_from_json(const Json& j);

// Synchronous request contract: (prompt, seed, params) -> image. Diffusion
// HTTP servers and hosted APIs are adapters over this; seeds are advisory
// for backends that cannot honor them.
class ImageBackend {
public:
    virtual ~ImageBackend() = default;
    virtual std::string id() const = 0;
    virtual ImageRgb8 generate(const std::string& prompt, std::uint64_t seed, const BackendParams& params) = 0;
};

struct GenerationRecord {
    std::string image; // path relative to the run directory
    std::string category;
    std::string prompt;
    std::uint64_t seed = 0;
    std::string backend_id;
    std::string timestamp; // volatile
    enum class Status { ok, failed } status = Status::ok;
    std::string error; // reason when failed
};

Json to_json(const GenerationRecord& r);

struct ExecuteOptions {
    std::filesystem::path out_dir;
    int concurrency = 4; // bounded in-flight requests
    bool write_sidecars = true;
    int transport_retries = 1; // per-image retry on transport error
};

// Runs every planned image (exactly one record per planned image, ok or
// failed), writes PNGs + "<image>.json" sidecars + "manifest.json".
std::vector<GenerationRecord> execute(const GenerationPlan& plan, ImageBackend& backend,
                                      const BackendParams& params, const ExecuteOptions& options);

} // namespace fairgen
