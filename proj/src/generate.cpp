#include "fairgen/generate.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <ctime>
#include <thread>

#include "fairgen/png_io.hpp"

namespace fairgen {

void BackendParams::validate() const {
    if (width <= 0 || height <= 0 || steps <= 0)
        raise(Errc::invalid_argument, "backend params need positive width, height and steps");
}

Json to_json(const BackendParams& p) {
    Json j{{"width", p.width},
           {"height", p.height},
           {"steps", p.steps},
           {"guidance", p.guidance},
           {"precision", p.precision}};
    if (!p.extra.empty()) j["extra"] = p.extra;
    return j;
}

BackendParams backend_params_from_json(const Json& j) {
    BackendParams p;
    if (j.contains("width")) p.width = j.at("width").get<int>();
    if (j.contains("height")) p.height = j.at("height").get<int>();
    if (j.contains("steps")) p.steps = j.at("steps").get<int>();
    if (j.contains("guidance")) p.guidance = j.at("guidance").get<double>();
    if (j.contains("precision")) p.precision = j.at("precision").get<std::string>();
    if (j.contains("extra")) p.extra = j.at("extra").get<std::map<std::string, std::string>>();
    p.validate();
    return p;
}

Json to_json(const GenerationRecord& r) {
    Json j{{"image", r.image},
           {"category", r.category},
           {"prompt", r.prompt},
           {"seed", r.seed},
           {"backend", r.backend_id},
           {"status", r.status == GenerationRecord::Status::ok ? "ok" : "failed"},
           {"timestamp", r.timestamp}};
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

namespace {

std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (unsigned char c : s)
        out += std::isalnum(c) ? static_cast<char>(std::tolower(c)) : '-';
    return out;
}

struct Task {
    std::size_t record_index;
    const PlanItem* item;
    std::uint64_t seed;
    std::string filename;
};

} // namespace

std::vector<GenerationRecord> execute(const GenerationPlan& plan, ImageBackend& backend,
                                      const BackendParams& params, const ExecuteOptions& options) {
    params.validate();
    if (options.concurrency < 1) raise(Errc::invalid_argument, "concurrency bound must be >= 1");
    std::filesystem::create_directories(options.out_dir);

    std::vector<Task> tasks;
    std::size_t index = 0;
    for (const auto& item : plan.items) {
        for (std::size_t j = 0; j < item.seeds.size(); ++j) {
            char prefix[16];
            std::snprintf(prefix, sizeof prefix, "%05zu", index);
            tasks.push_back(Task{index, &item, item.seeds[j],
                                 std::string(prefix) + "_" + sanitize(item.prompt.category) + ".png"});
            ++index;
        }
    }

    std::vector<GenerationRecord> records(tasks.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            const Task& task = tasks[i];
            GenerationRecord rec;
            rec.image = task.filename;
            rec.category = task.item->prompt.category;
            rec.prompt = task.item->prompt.text;
            rec.seed = task.seed;
            rec.backend_id = backend.id();
            rec.timestamp = iso8601_now();

            int attempts_left = 1 + std::max(0, options.transport_retries);
            while (attempts_left-- > 0) {
                try {
                    const ImageRgb8 image = backend.generate(rec.prompt, rec.seed, params);
                    write_png(options.out_dir / rec.image, image);
                    rec.status = GenerationRecord::Status::ok;
                    rec.error.clear();
                    break;
                } catch (const Error& e) {
                    rec.status = GenerationRecord::Status::failed;
                    rec.error = std::string(errc_name(e.code())) + ": " + e.what();
                    if (e.code() != Errc::transport) break; // only transport errors retry
                } catch (const std::exception& e) {
                    rec.status = GenerationRecord::Status::failed;
                    rec.error = std::string("error: ") + e.what();
                    break;
                }
            }

            if (options.write_sidecars) {
                Json sidecar = to_json(rec);
                sidecar["params"] = to_json(params);
                sidecar["target_setting"] = to_json(plan.setting);
                sidecar["base_prompt"] = plan.base_prompt;
                save_json_file(options.out_dir / (rec.image + ".json"), sidecar);
            }
            records[task.record_index] = std::move(rec);
        }
    };

    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(options.concurrency), std::max<std::size_t>(tasks.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::int64_t failed = 0;
    Json record_rows = Json::array();
    for (const auto& r : records) {
        if (r.status == GenerationRecord::Status::failed) ++failed;
        record_rows.push_back(to_json(r));
    }
    Json manifest{{"base_prompt", plan.base_prompt},
                  {"target_setting", to_json(plan.setting)},
                  {"target", to_json(plan.target)},
                  {"alloc", to_json(plan.allocation)["alloc"]},
                  {"total", plan.allocation.total},
                  {"seed_root", plan.seed_root},
                  {"backend", backend.id()},
                  {"params", to_json(params)},
                  {"n_ok", static_cast<std::int64_t>(records.size()) - failed},
                  {"n_failed", failed},
                  {"records", std::move(record_rows)},
                  {"created_at", iso8601_now()}};
    save_json_file(options.out_dir / "manifest.json", manifest);
    return records;
}

} // namespace fairgen
