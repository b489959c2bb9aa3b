#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fairgen/allocate.hpp"
#include "fairgen/distribution.hpp"
#include "fairgen/json_io.hpp"
#include "fairgen/target.hpp"

namespace fairgen {

struct SubgroupPrompt {
    std::string text;
    std::string category;
    AttributeScheme scheme;
    std::string base_prompt;
};

// Controlled wording for skin-tone descriptors; stored in config so users
// can override the vocabulary.
struct ToneVocabulary {
    std::array<std::string, 6> fitzpatrick;
    std::array<std::string, 3> bins;
    std::array<std::string, 10> monk;
    static ToneVocabulary defaults();
};

// demographic_labels -> "<base> who is <label>"
// skin-tone kinds    -> "<base> with <descriptor> skin"
// custom             -> "<base>, <label>"
SubgroupPrompt build_subgroup_prompt(const std::string& base, const std::string& category,
                                     const AttributeScheme& scheme,
                                     const ToneVocabulary& vocab = ToneVocabulary::defaults());

// Optional free-form rewriting (e.g. via an LLM); the deterministic template
// above is the default everywhere.
using PromptStyler = std::function<std::string(const std::string& base, const std::string& category,
                                               const std::string& templated)>;

class LlmProvider;

// Styler that asks a provider to phrase the subgroup variant. Kept out of
// the test paths; template rewriting stays the reproducible default.
PromptStyler llm_prompt_styler(LlmProvider& provider);

struct PlanItem {
    SubgroupPrompt prompt;
    std::int64_t count = 0;
    std::vector<std::uint64_t> seeds;
};

struct GenerationPlan {
    std::string base_prompt;
    TargetSetting setting;
    Distribution target; // resolved q
    AllocationPlan allocation;
    std::vector<PlanItem> items; // categories with a zero budget are omitted
    std::uint64_t seed_root = 0;
    std::string created_at; // volatile; excluded from artifact comparison
};

// Splittable counter scheme: seeds depend on (root, subgroup index, image
// index) only, so adding subgroups does not shift other subgroups' seeds.
// The root itself is never handed out.
std::uint64_t derive_seed(std::uint64_t root, std::size_t subgroup_index, std::size_t image_index);

GenerationPlan plan(const std::string& base, const TargetSetting& setting, const Distribution& q,
                    std::int64_t total, std::uint64_t seed_root,
                    const ToneVocabulary& vocab = ToneVocabulary::defaults(),
                    const PromptStyler& styler = {});

Json to_json(const GenerationPlan& p);
GenerationPlan plan_from_json(const Json& j);

void save_plan(const std::filesystem::path& path, const GenerationPlan& p);
GenerationPlan load_plan(const std::filesystem::path& path);

} // namespace fairgen
