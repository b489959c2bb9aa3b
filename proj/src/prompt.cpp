#include "fairgen/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <unordered_set>

#include "fairgen/demographics.hpp"

namespace fairgen {

ToneVocabulary ToneVocabulary::defaults() {
    ToneVocabulary v;
    v.fitzpatrick = {"very light", "light", "medium", "olive", "brown", "dark"};
    v.bins = {"light", "medium", "dark"};
    // Wording only; MST prompting reuses the closest phototype descriptor.
    v.monk = {"very light", "very light", "light", "light",  "medium",
              "olive",      "brown",      "brown", "dark",   "dark"};
    return v;
}

namespace {

const std::string& descriptor_for(const AttributeScheme& scheme, std::size_t index,
                                  const ToneVocabulary& vocab) {
    switch (scheme.kind) {
    case SchemeKind::skin_tone_fitzpatrick:
        if (scheme.size() == vocab.fitzpatrick.size()) return vocab.fitzpatrick[index];
        break;
    case SchemeKind::skin_tone_bins3:
        if (scheme.size() == vocab.bins.size()) return vocab.bins[index];
        break;
    case SchemeKind::skin_tone_monk:
        if (scheme.size() == vocab.monk.size()) return vocab.monk[index];
        break;
    default: break;
    }
    raise(Errc::invalid_argument, "no tone vocabulary for scheme '" + scheme.name + "'");
}

std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

SubgroupPrompt build_subgroup_prompt(const std::string& base, const std::string& category,
                                     const AttributeScheme& scheme, const ToneVocabulary& vocab) {
    auto idx = scheme.index_of(category);
    if (!idx)
        raise(Errc::invalid_argument, "category '" + category + "' not in scheme '" + scheme.name + "'");
    std::string text;
    switch (scheme.kind) {
    case SchemeKind::demographic_labels:
        text = base + " who is " + category;
        break;
    case SchemeKind::skin_tone_fitzpatrick:
    case SchemeKind::skin_tone_bins3:
    case SchemeKind::skin_tone_monk:
        text = base + " with " + descriptor_for(scheme, *idx, vocab) + " skin";
        break;
    case SchemeKind::custom:
        text = base + ", " + category;
        break;
    }
    return SubgroupPrompt{std::move(text), category, scheme, base};
}

namespace {

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t kSubgroupSalt = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kImageSalt = 0xD1B54A32D192ED03ull;

} // namespace

std::uint64_t derive_seed(std::uint64_t root, std::size_t subgroup_index, std::size_t image_index) {
    const std::uint64_t stream = mix64(root + kSubgroupSalt * (static_cast<std::uint64_t>(subgroup_index) + 1));
    return mix64(stream + kImageSalt * (static_cast<std::uint64_t>(image_index) + 1));
}

PromptStyler llm_prompt_styler(LlmProvider& provider) {
    return [&provider](const std::string& base, const std::string& category, const std::string& templated) {
        std::string instruction;
        instruction += "You rewrite image-generation prompts.\n";
        instruction += "Rewrite the prompt so it naturally depicts a person matching the attribute, ";
        instruction += "changing nothing else about style or content.\n";
        instruction += "Prompt: \"" + base + "\"\n";
        instruction += "Attribute: \"" + category + "\"\n";
        instruction += "A literal template version would be: \"" + templated + "\"\n";
        instruction += "Reply with the rewritten prompt only, no quotes, no prose.";
        std::string out = provider.complete(instruction);
        const auto notspace = [](unsigned char c) { return !std::isspace(c); };
        out.erase(out.begin(), std::find_if(out.begin(), out.end(), notspace));
        out.erase(std::find_if(out.rbegin(), out.rend(), notspace).base(), out.end());
        if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
        if (out.empty()) raise(Errc::schema_violation, "provider returned an empty rewrite");
        return out;
    };
}

GenerationPlan plan(const std::string& base, const TargetSetting& setting, const Distribution& q,
                    std::int64_t total, std::uint64_t seed_root, const ToneVocabulary& vocab,
                    const PromptStyler& styler) {
    GenerationPlan p{base, setting, q, allocate(q, total), {}, seed_root, iso8601_now()};

    std::unordered_set<std::uint64_t> used;
    for (std::size_t i = 0; i < p.allocation.counts.size(); ++i) {
        const std::int64_t count = p.allocation.counts[i];
        if (count == 0) continue;
        PlanItem item;
        item.prompt = build_subgroup_prompt(base, q.scheme().categories[i], q.scheme(), vocab);
        if (styler) item.prompt.text = styler(base, item.prompt.category, item.prompt.text);
        item.count = count;
        for (std::int64_t j = 0; j < count; ++j) {
            std::uint64_t seed = derive_seed(seed_root, i, static_cast<std::size_t>(j));
            while (!used.insert(seed).second) seed = mix64(seed); // deterministic collision fixup
            item.seeds.push_back(seed);
        }
        p.items.push_back(std::move(item));
    }
    return p;
}

Json to_json(const GenerationPlan& p) {
    Json items = Json::array();
    for (const auto& item : p.items)
        items.push_back(Json{{"prompt", item.prompt.text},
                             {"category", item.prompt.category},
                             {"count", item.count},
                             {"seeds", item.seeds}});
    return Json{{"base_prompt", p.base_prompt},
                {"target_setting", to_json(p.setting)},
                {"target", to_json(p.target)},
                {"alloc", to_json(p.allocation)["alloc"]},
                {"total", p.allocation.total},
                {"seed_root", p.seed_root},
                {"items", std::move(items)},
                {"created_at", p.created_at}};
}

GenerationPlan plan_from_json(const Json& j) {
    Distribution target = distribution_from_json(require(j, "target"));
    Json alloc_obj{{"scheme", to_json(target.scheme())},
                   {"total", require(j, "total")},
                   {"alloc", require(j, "alloc")}};
    GenerationPlan p{require_string(j, "base_prompt"),
                     target_setting_from_json(require(j, "target_setting")),
                     std::move(target),
                     allocation_from_json(alloc_obj),
                     {},
                     static_cast<std::uint64_t>(require_number(j, "seed_root")),
                     j.contains("created_at") ? j.at("created_at").get<std::string>() : ""};

    std::int64_t total_items = 0;
    std::unordered_set<std::uint64_t> used;
    for (const auto& row : require(j, "items")) {
        PlanItem item;
        const std::string category = require_string(row, "category");
        auto idx = p.target.scheme().index_of(category);
        if (!idx) raise(Errc::schema_violation, "plan item category '" + category + "' not in scheme");
        item.prompt = SubgroupPrompt{require_string(row, "prompt"), category, p.target.scheme(), p.base_prompt};
        item.count = static_cast<std::int64_t>(require_number(row, "count"));
        const Json& seeds = require(row, "seeds");
        if (!seeds.is_array() || static_cast<std::int64_t>(seeds.size()) != item.count)
            raise(Errc::schema_violation, "plan item seed list does not match its count");
        for (const auto& s : seeds) {
            const auto seed = s.get<std::uint64_t>();
            if (!used.insert(seed).second) raise(Errc::schema_violation, "duplicate seed in plan");
            item.seeds.push_back(seed);
        }
        total_items += item.count;
        p.items.push_back(std::move(item));
    }
    if (total_items != p.allocation.total)
        raise(Errc::schema_violation, "plan item counts do not sum to the allocation total");
    return p;
}

void save_plan(const std::filesystem::path& path, const GenerationPlan& p) { save_json_file(path, to_json(p)); }

GenerationPlan load_plan(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        raise(Errc::missing_artifact, "no plan at " + path.string() + "; run plan first");
    return plan_from_json(load_json_file(path));
}

} // namespace fairgen
