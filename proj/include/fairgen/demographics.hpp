#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fairgen/distribution.hpp"
#include "fairgen/json_io.hpp"

namespace fairgen {

enum class Scope { global, us, custom };

struct DemographicQuery {
    std::string concept_name; // e.g. "doctor"
    Scope scope = Scope::global;
    std::string custom_scope; // used when scope == custom
    std::string base_prompt;

    std::string scope_string() const;
    static Scope scope_from_string(std::string_view s, std::string* custom_out = nullptr);
};

struct DemographicResult {
    std::vector<std::string> groups;
    std::optional<Distribution> proportions; // present iff groups non-empty
    double confidence = 0.0;
    std::vector<std::string> sources;
    std::string raw_response; // retained verbatim for audit
};

struct RoutingDecision {
    enum class Outcome { use_demographics, use_fallback };
    enum class FallbackReason { none, no_data, low_confidence, user_forced };
    Outcome outcome = Outcome::use_fallback;
    FallbackReason reason = FallbackReason::none;
    double threshold = 0.5;
    std::optional<DemographicResult> result;
};

const char* fallback_reason_name(RoutingDecision::FallbackReason r);

// Strips the standard headshot template down to the concept; otherwise the
// whole prompt, lowercased.
std::string extract_concept(std::string_view base_prompt);

// Single text-in/text-out call. HTTP and stub implementations live in
// providers.hpp.
class LlmProvider {
public:
    virtual ~LlmProvider() = default;
    virtual std::string id() const = 0;
    virtual std::string complete(const std::string& instruction) = 0;
};

// Instruction template sent to the provider; embeds the response schema and
// the zero-confidence rule.
std::string demographics_instruction(const DemographicQuery& query);

// Strict schema validation of the provider output. Raises schema_violation
// for malformed responses and contract_violation when the confidence/groups
// contract is broken. Proportions within 1e-6 of unit sum are accepted and
// normalized exactly.
DemographicResult parse_provider_response(const std::string& raw, const DemographicQuery& query);

inline constexpr double kProportionSumTolerance = 1e-6;
inline constexpr double kDefaultConfidenceThreshold = 0.5;

struct RetrievalOptions {
    std::filesystem::path cache_dir; // empty = no persistent cache
    bool use_cache = true;
};

// Provider call with persistent (concept, scope, provider id)-keyed caching.
DemographicResult retrieve_demographics(const DemographicQuery& query, LlmProvider& provider,
                                        const RetrievalOptions& options = {});

// Pure routing: fallback when user-forced, no data, or confidence below the
// threshold.
RoutingDecision route(const DemographicResult& result, double threshold, bool user_forced_fallback);

Json to_json(const DemographicResult& r);
DemographicResult demographic_result_from_json(const Json& j);

} // namespace fairgen
